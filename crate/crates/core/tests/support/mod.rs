pub mod fidelity;
pub mod modality_oracle;
