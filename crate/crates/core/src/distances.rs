//! Distances between two graphs.
//!
//! Every metric compares graphs edge by edge or node by node using canonical
//! node names, so first-order and higher-order graphs are handled alike.

use std::cmp::Ordering;
use std::collections::btree_map;
use std::collections::HashMap;
use std::fmt;
use std::iter::Peekable;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::hon_graph::{node_union, HonGraph, HonNode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DistanceError {
    #[error("distance undefined: {0}")]
    Undefined(String),

    #[error("power iteration did not converge after {steps} steps (residual {residual:e})")]
    NoConvergence { steps: usize, residual: f64 },

    #[error("invalid argument: {0}")]
    Argument(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricKind {
    Weight,
    McsWeight,
    Modality,
    Entropy,
    Spectral,
}

impl MetricKind {
    pub const ALL: [MetricKind; 5] = [
        MetricKind::Weight,
        MetricKind::McsWeight,
        MetricKind::Modality,
        MetricKind::Entropy,
        MetricKind::Spectral,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Weight => "weight",
            MetricKind::McsWeight => "mcs",
            MetricKind::Modality => "modality",
            MetricKind::Entropy => "entropy",
            MetricKind::Spectral => "spectral",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MetricKind {
    type Err = DistanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "weight" => Ok(MetricKind::Weight),
            "mcs" | "mcs_weight" => Ok(MetricKind::McsWeight),
            "modality" => Ok(MetricKind::Modality),
            "entropy" => Ok(MetricKind::Entropy),
            "spectral" => Ok(MetricKind::Spectral),
            other => Err(DistanceError::Argument(format!(
                "unknown metric `{other}` (expected weight, mcs, modality, entropy or spectral)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralParams {
    /// Number of leading eigenvalues compared; defaults to the smaller node count.
    pub num_eigenvalues: Option<usize>,
    pub power_iteration_tol: f64,
    pub power_iteration_max_steps: usize,
}

impl Default for SpectralParams {
    fn default() -> Self {
        SpectralParams {
            num_eigenvalues: None,
            power_iteration_tol: 1e-10,
            power_iteration_max_steps: 10_000,
        }
    }
}

impl SpectralParams {
    pub fn validate(&self) -> Result<(), DistanceError> {
        if self.num_eigenvalues == Some(0) {
            return Err(DistanceError::Argument("num_eigenvalues must be at least 1".into()));
        }
        if self.power_iteration_tol.is_nan() || self.power_iteration_tol <= 0.0 {
            return Err(DistanceError::Argument("tolerance must be positive".into()));
        }
        if self.power_iteration_max_steps == 0 {
            return Err(DistanceError::Argument("max_steps must be at least 1".into()));
        }
        Ok(())
    }
}

type EdgeIter<'a> = Peekable<btree_map::Iter<'a, (HonNode, HonNode), f64>>;

/// Walks two edge maps in key order, yielding the weight in each (0 when absent).
struct EdgeMerge<'a> {
    g: EdgeIter<'a>,
    h: EdgeIter<'a>,
}

impl Iterator for EdgeMerge<'_> {
    type Item = (f64, f64);

    fn next(&mut self) -> Option<(f64, f64)> {
        let ord = match (self.g.peek(), self.h.peek()) {
            (None, None) => return None,
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (Some((a, _)), Some((b, _))) => a.cmp(b),
        };
        Some(match ord {
            Ordering::Less => (*self.g.next()?.1, 0.0),
            Ordering::Greater => (0.0, *self.h.next()?.1),
            Ordering::Equal => (*self.g.next()?.1, *self.h.next()?.1),
        })
    }
}

fn merge<'a>(g: &'a HonGraph, h: &'a HonGraph) -> EdgeMerge<'a> {
    EdgeMerge {
        g: g.edges().iter().peekable(),
        h: h.edges().iter().peekable(),
    }
}

fn relative_difference(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.max(b)
}

/// Mean relative weight difference over the union of edges.
pub fn weight_distance(g: &HonGraph, h: &HonGraph) -> Result<f64, DistanceError> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (a, b) in merge(g, h) {
        sum += relative_difference(a, b);
        n += 1;
    }
    if n == 0 {
        return Err(DistanceError::Undefined("both graphs have no edges".into()));
    }
    Ok(sum / n as f64)
}

/// Mean relative weight difference over the edges both graphs share.
pub fn mcs_weight_distance(g: &HonGraph, h: &HonGraph) -> Result<f64, DistanceError> {
    let (mut sum, mut n) = (0.0, 0usize);
    for (a, b) in merge(g, h) {
        if a > 0.0 && b > 0.0 {
            sum += relative_difference(a, b);
            n += 1;
        }
    }
    if n == 0 {
        return Err(DistanceError::Undefined("graphs share no edges".into()));
    }
    Ok(sum / n as f64)
}

/// Dominant right eigenvector of the weighted adjacency matrix, indexed by
/// `nodes`, unit L2 norm with the first nonzero component positive.
///
/// Iterates `A + cI` with `c` the largest row sum. The shift keeps the
/// dominant eigenvector and removes the oscillation of periodic graphs.
pub fn perron_vector(
    g: &HonGraph,
    nodes: &[HonNode],
    params: &SpectralParams,
) -> Result<Vec<f64>, DistanceError> {
    params.validate()?;
    if g.is_empty() {
        return Err(DistanceError::Undefined("graph has no edges".into()));
    }
    let index: HashMap<&HonNode, usize> = nodes.iter().enumerate().map(|(i, n)| (n, i)).collect();
    let mut triples = Vec::with_capacity(g.edge_count());
    let mut row_sums = vec![0.0; nodes.len()];
    for ((u, v), &w) in g.edges() {
        let (Some(&i), Some(&j)) = (index.get(u), index.get(v)) else {
            return Err(DistanceError::Argument(format!(
                "edge {u} -> {v} is not covered by the node list"
            )));
        };
        triples.push((i, j, w));
        row_sums[i] += w;
    }
    let shift = row_sums.iter().copied().fold(0.0, f64::max);

    let n = nodes.len();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..params.power_iteration_max_steps {
        for (yi, xi) in y.iter_mut().zip(&x) {
            *yi = shift * xi;
        }
        for &(i, j, w) in &triples {
            y[i] += w * x[j];
        }
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(DistanceError::Undefined("iteration collapsed to zero".into()));
        }
        residual = 0.0;
        for (yi, xi) in y.iter_mut().zip(x.iter_mut()) {
            *yi /= norm;
            residual += (*yi - *xi) * (*yi - *xi);
            *xi = *yi;
        }
        residual = residual.sqrt();
        if residual <= params.power_iteration_tol {
            if let Some(first) = x.iter().copied().find(|v| *v != 0.0) {
                if first < 0.0 {
                    x.iter_mut().for_each(|v| *v = -*v);
                }
            }
            return Ok(x);
        }
    }
    Err(DistanceError::NoConvergence {
        steps: params.power_iteration_max_steps,
        residual,
    })
}

/// Euclidean distance between the Perron vectors aligned on the node union.
pub fn modality_distance(
    g: &HonGraph,
    h: &HonGraph,
    params: &SpectralParams,
) -> Result<f64, DistanceError> {
    let nodes = node_union(g, h);
    let pg = perron_vector(g, &nodes, params)?;
    let ph = perron_vector(h, &nodes, params)?;
    Ok(pg
        .iter()
        .zip(&ph)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// `sum(W~) - sum(ln W~)` with `W~` the edge weights normalized to sum 1.
pub fn edge_entropy(g: &HonGraph) -> Result<f64, DistanceError> {
    if g.is_empty() {
        return Err(DistanceError::Undefined("graph has no edges".into()));
    }
    let total = g.total_weight();
    let (mut s, mut logs) = (0.0, 0.0);
    for &w in g.edges().values() {
        let p = w / total;
        s += p;
        logs += p.ln();
    }
    Ok(s - logs)
}

pub fn entropy_distance(g: &HonGraph, h: &HonGraph) -> Result<f64, DistanceError> {
    Ok((edge_entropy(g)? - edge_entropy(h)?).abs())
}

/// Eigenvalues of `D - (A + A^T)/2` over the graph's own nodes, descending.
pub fn laplacian_spectrum(g: &HonGraph) -> Vec<f64> {
    let nodes: Vec<&HonNode> = g.nodes().iter().collect();
    let index: HashMap<&HonNode, usize> = nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let n = nodes.len();
    let mut l = DMatrix::<f64>::zeros(n, n);
    for ((u, v), &w) in g.edges() {
        let (i, j) = (index[u], index[v]);
        if i == j {
            continue;
        }
        let half = w / 2.0;
        l[(i, j)] -= half;
        l[(j, i)] -= half;
        l[(i, i)] += half;
        l[(j, j)] += half;
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(l).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// Spectral distance from two precomputed descending spectra.
pub fn spectral_distance_from_spectra(
    lambda: &[f64],
    mu: &[f64],
    num_eigenvalues: Option<usize>,
) -> Result<f64, DistanceError> {
    let available = lambda.len().min(mu.len());
    let k = num_eigenvalues.unwrap_or(available);
    if k == 0 {
        return Err(DistanceError::Undefined("a graph has no nodes".into()));
    }
    if k > available {
        return Err(DistanceError::Argument(format!(
            "k = {k} exceeds the smaller node count {available}"
        )));
    }
    let (l, m) = (&lambda[..k], &mu[..k]);
    let num: f64 = l.iter().zip(m).map(|(a, b)| (a - b) * (a - b)).sum();
    let sl: f64 = l.iter().map(|a| a * a).sum();
    let sm: f64 = m.iter().map(|a| a * a).sum();
    let den = sl.min(sm);
    if den <= 0.0 {
        return Err(DistanceError::Undefined("Laplacian spectrum is all zero".into()));
    }
    Ok((num / den).sqrt())
}

pub fn spectral_distance(
    g: &HonGraph,
    h: &HonGraph,
    params: &SpectralParams,
) -> Result<f64, DistanceError> {
    params.validate()?;
    spectral_distance_from_spectra(
        &laplacian_spectrum(g),
        &laplacian_spectrum(h),
        params.num_eigenvalues,
    )
}

pub fn distance(
    metric: MetricKind,
    g: &HonGraph,
    h: &HonGraph,
    params: &SpectralParams,
) -> Result<f64, DistanceError> {
    match metric {
        MetricKind::Weight => weight_distance(g, h),
        MetricKind::McsWeight => mcs_weight_distance(g, h),
        MetricKind::Modality => modality_distance(g, h, params),
        MetricKind::Entropy => entropy_distance(g, h),
        MetricKind::Spectral => spectral_distance(g, h, params),
    }
}
