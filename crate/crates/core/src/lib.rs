//! Anomaly detection on higher-order networks built from clickstreams.
//!
//! A corpus of trajectories is split into time windows. Each window is mined
//! for variable-order dependency rules ([`rule_miner`]), the rules are wired
//! into a weighted directed graph ([`hon_graph`]), consecutive graphs are
//! compared ([`distances`]) and the resulting series is scanned for spikes
//! ([`detector`]). [`synthgen`] produces labelled test corpora.

pub mod corpus;
pub mod detector;
pub mod distances;
pub mod error;
pub mod hon_graph;
pub mod rule_miner;
pub mod synthgen;

pub use error::{Error, Result};
