//! The interaction field in its equivalent algebraic forms.
//!
//! Each agent relaxes toward the quantized states of its neighbours:
//! `f_i(x) = Σ_j a_ij·(q(x_j) - x_i)`, equivalently `A·q(x) - D·x` or
//! `-L·x + A·(q(x) - x)`. Freezing the quantizer at a cell index `k` gives
//! the affine per-cell field `A·k - D·x`, which agrees with the full field
//! everywhere on the cell `S_k`.

use crate::graph::Graph;
use crate::quantize::{q_vec, CellIndex};

/// Agent state vector; finite components, one per graph node.
pub type State = Vec<f64>;

/// Quantized-neighbour field `A·q(x) - D·x`.
pub fn field(g: &Graph, x: &[f64]) -> Vec<f64> {
    let n = g.n();
    assert_eq!(x.len(), n, "state length must match the graph");
    let q = q_vec(x);
    let deg = g.out_degrees();
    let mut f = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += g.weight(i, j) * q[j] as f64;
        }
        f[i] = acc - deg[i] * x[i];
    }
    f
}

/// Baseline averaging field `-L·x` (no quantization); the reference the
/// quantized model perturbs.
pub fn field_linear(g: &Graph, x: &[f64]) -> Vec<f64> {
    let n = g.n();
    assert_eq!(x.len(), n, "state length must match the graph");
    let deg = g.out_degrees();
    let mut f = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += g.weight(i, j) * x[j];
        }
        f[i] = acc - deg[i] * x[i];
    }
    f
}

/// Affine field of cell `k`: `A·k - D·x`. Agrees with [`field`] whenever
/// `x ∈ S_k`; evaluating it elsewhere extends the cell flow past the cell.
pub fn field_cell(g: &Graph, x: &[f64], k: &CellIndex) -> Vec<f64> {
    let n = g.n();
    assert_eq!(x.len(), n, "state length must match the graph");
    assert_eq!(k.len(), n, "cell index length must match the graph");
    let deg = g.out_degrees();
    let mut f = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            acc += g.weight(i, j) * k[j] as f64;
        }
        f[i] = acc - deg[i] * x[i];
    }
    f
}

/// Consensus statistics of a state: the mean is the scalar `α` minimizing
/// `‖x - α·1‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusStats {
    pub mean: f64,
    pub spread: f64,
    pub dist: f64,
    pub normalized_dist: f64,
}

pub fn consensus_stats(x: &[f64]) -> ConsensusStats {
    assert!(!x.is_empty());
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let max = x.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let min = x.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let dist = x.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>().sqrt();
    ConsensusStats {
        mean,
        spread: max - min,
        dist,
        normalized_dist: dist / n.sqrt(),
    }
}
