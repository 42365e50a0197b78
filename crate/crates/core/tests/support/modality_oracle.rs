//! Dense reference for the dominant eigenvector, independent of power iteration.

#![allow(dead_code)]

use std::collections::HashMap;

use hon_anomaly::hon_graph::{HonGraph, HonNode};
use nalgebra::linalg::Schur;
use nalgebra::DMatrix;

pub fn node(i: usize) -> HonNode {
    HonNode::parse_canonical(&format!("v{i}")).unwrap()
}

pub fn graph(edges: &[(usize, usize, f64)]) -> HonGraph {
    HonGraph::from_edges(edges.iter().map(|&(u, v, w)| (node(u), node(v), w))).unwrap()
}

pub fn strongly_connected(n: usize, edges: &[(usize, usize, f64)]) -> bool {
    let reach = |forward: bool| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for &(a, b, _) in edges {
                let (from, to) = if forward { (a, b) } else { (b, a) };
                if from == u && !seen[to] {
                    seen[to] = true;
                    stack.push(to);
                }
            }
        }
        seen.into_iter().all(|s| s)
    };
    n > 0 && reach(true) && reach(false)
}

/// Perron root from the full complex spectrum, eigenvector from the null
/// space of `A - rho I` via SVD, unit norm, first nonzero component positive.
pub fn dense_perron(g: &HonGraph, nodes: &[HonNode]) -> Vec<f64> {
    let n = nodes.len();
    let index: HashMap<&HonNode, usize> = nodes.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut a = DMatrix::<f64>::zeros(n, n);
    for ((u, v), &w) in g.edges() {
        a[(index[u], index[v])] += w;
    }
    let rho = perron_root(&a);
    let shifted = &a - DMatrix::<f64>::identity(n, n) * rho;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.unwrap();
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .unwrap();
    let mut x: Vec<f64> = v_t.row(k).iter().copied().collect();
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
    if let Some(first) = x.iter().copied().find(|v| v.abs() > 1e-9) {
        if first < 0.0 {
            x.iter_mut().for_each(|v| *v = -*v);
        }
    }
    x
}

/// Largest real part over the spectrum. Unshifted QR can stall on
/// permutation-like matrices, so retry on `A + sI` when it does.
fn perron_root(a: &DMatrix<f64>) -> f64 {
    let n = a.nrows();
    for shift in [0.0, 1.0, std::f64::consts::E] {
        let m = a + DMatrix::<f64>::identity(n, n) * shift;
        if let Some(schur) = Schur::try_new(m, f64::EPSILON, 100_000) {
            let eig = schur.complex_eigenvalues();
            return eig.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max) - shift;
        }
    }
    panic!("Schur decomposition did not converge");
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Every strongly connected digraph on 3 labelled nodes (self loops allowed),
/// with unit weights.
pub fn all_strongly_connected_3() -> Vec<Vec<(usize, usize, f64)>> {
    let pairs: Vec<(usize, usize)> = (0..3).flat_map(|u| (0..3).map(move |v| (u, v))).collect();
    let mut out = Vec::new();
    for mask in 1u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize, f64)> = pairs
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &(u, v))| (u, v, 1.0))
            .collect();
        if strongly_connected(3, &edges) {
            out.push(edges);
        }
    }
    out
}
