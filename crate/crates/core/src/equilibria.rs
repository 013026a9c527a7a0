//! Classification and enumeration of the rest points of the quantized
//! dynamics.
//!
//! Three nested notions apply, because solutions of the discontinuous
//! system are generalized:
//!
//! * *Carathéodory* equilibrium: the field itself vanishes, `f(x*) = 0`;
//! * *extended* equilibrium: some cell field vanishes, `f_k(x*) = 0` with
//!   `x*` in the closure of `S_k` — limits of solutions can rest here even
//!   when `f(x*) ≠ 0`;
//! * *Krasowskii* equilibrium: `0 ∈ K f(x*)`, the convex hull of the
//!   field's sector limits.
//!
//! Every Carathéodory equilibrium is extended and every extended one is
//! Krasowskii. Extended equilibria are enumerable per cell: the cell field
//! is affine with the unique zero `x_i = (A·k)_i / d_i`, so sweeping cells
//! of a box and keeping the zeros that land in their own cell closure is
//! exhaustive.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::dynamics::{field, field_cell, State};
use crate::graph::{make_graph, Graph, GraphSpec};
use crate::linalg;
use crate::quantize::{boundary_set, q_scalar, CellIndex, KrasowskiiHull, QuantizeError, SECTOR_CAP};

/// Cell budget for box enumeration.
pub const ENUM_BUDGET: u128 = 10_000_000;

/// Closure-membership tolerance for enumeration keeps (the cell zeros are
/// small-denominator rationals, so this is far below their spacing).
const MEMBERSHIP_TOL: f64 = 1e-12;

/// Tolerance used when classifying enumerated points.
const CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum EquilibriaError {
    #[error("node {0} has zero out-degree; the cell field has no isolated zero there")]
    ZeroOutDegree(usize),
    #[error("box holds {volume} cells, budget is {budget}")]
    BudgetExceeded { volume: u128, budget: u128 },
    #[error("box bounds must satisfy lo <= hi componentwise")]
    BadBox,
    #[error("path construction needs n >= 3, got {0}")]
    PathTooShort(usize),
    #[error(transparent)]
    Quantize(#[from] QuantizeError),
}

/// Which equilibrium notions a point satisfies; the flags are nested
/// (`caratheodory` implies `extended` implies `krasowskii`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Classes {
    pub caratheodory: bool,
    pub extended: bool,
    pub krasowskii: bool,
}

/// A classified point with the cells witnessing extendedness.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumRecord {
    pub point: State,
    pub witness_cells: Vec<CellIndex>,
    pub classes: Classes,
}

/// Membership certificate for `0 ∈ hull`: convex weights over the hull
/// vertices realizing the min-norm point, whose norm decides membership.
#[derive(Debug, Clone, PartialEq)]
pub struct HullCertificate {
    pub member: bool,
    pub min_norm: f64,
    pub weights: Vec<f64>,
}

/// The unique zero of the affine cell field: `x_i = (A·k)_i / d_i`.
/// Returned regardless of whether it lies in the closure of `S_k`;
/// membership is the caller's test.
pub fn solve_cell_fixed_point(g: &Graph, k: &CellIndex) -> Result<State, EquilibriaError> {
    let n = g.n();
    assert_eq!(k.len(), n, "cell index length must match the graph");
    let deg = g.out_degrees();
    if let Some(i) = deg.iter().position(|&d| d == 0.0) {
        return Err(EquilibriaError::ZeroOutDegree(i));
    }
    Ok((0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                acc += g.weight(i, j) * k[j] as f64;
            }
            acc / deg[i]
        })
        .collect())
}

/// Decides `0 ∈ hull` by computing the min-norm point of the hull and
/// comparing its norm against `tol`; the certificate weights are returned
/// for audit either way.
pub fn zero_in_hull(hull: &KrasowskiiHull, tol: f64) -> HullCertificate {
    assert!(!hull.vertices.is_empty(), "hull needs at least one vertex");
    assert!(tol > 0.0);
    let dim = hull.base_point.len();
    let res = linalg::min_norm_point(&hull.vertices, dim);
    let min_norm = res.point.iter().map(|v| v * v).sum::<f64>().sqrt();
    HullCertificate { member: min_norm <= tol, min_norm, weights: res.weights }
}

/// Cells whose closure can contain `x`: the quantizer cell of `x`, split
/// at each component within `tol` of a half-integer into its lower and
/// upper neighbours.
fn adjacent_cells(x: &[f64], tol: f64) -> Result<Vec<CellIndex>, QuantizeError> {
    let active = boundary_set(x, tol);
    if active.len() > SECTOR_CAP {
        return Err(QuantizeError::TooManyBoundaryComponents {
            count: active.len(),
            cap: SECTOR_CAP,
        });
    }
    let base: CellIndex = x
        .iter()
        .enumerate()
        .map(|(j, &xj)| if active.contains(&j) { xj.floor() as i64 } else { q_scalar(xj) })
        .collect();
    let m = active.len();
    Ok((0..1usize << m)
        .map(|c| {
            let mut cell = base.clone();
            for (b, &j) in active.iter().enumerate() {
                cell[j] += ((c >> b) & 1) as i64;
            }
            cell
        })
        .collect())
}

fn in_closure(x: &[f64], k: &CellIndex, tol: f64) -> bool {
    x.iter()
        .zip(k)
        .all(|(&xi, &ki)| xi >= ki as f64 - 0.5 - tol && xi <= ki as f64 + 0.5 + tol)
}

/// Full classification of a point at tolerance `tol`: Carathéodory iff
/// `‖f(x)‖∞ <= tol`; extended iff some cell adjacent to `x` has
/// `‖f_k(x)‖∞ <= tol` with `x` in its closure (all such cells are listed
/// as witnesses); Krasowskii iff the sector-limit hull contains zero.
pub fn classify_point(
    g: &Graph,
    x: &[f64],
    tol: f64,
) -> Result<EquilibriumRecord, EquilibriaError> {
    assert!(tol > 0.0 && tol < 0.25, "tolerance must lie in (0, 1/4)");
    let caratheodory = field(g, x).iter().all(|v| v.abs() <= tol);
    let witness_cells: Vec<CellIndex> = adjacent_cells(x, tol)?
        .into_iter()
        .filter(|k| {
            in_closure(x, k, tol) && field_cell(g, x, k).iter().all(|v| v.abs() <= tol)
        })
        .collect();
    let hull = crate::quantize::krasowskii_vertices(g, x, tol)?;
    let krasowskii = zero_in_hull(&hull, tol).member;
    Ok(EquilibriumRecord {
        point: x.to_vec(),
        witness_cells: witness_cells.clone(),
        classes: Classes { caratheodory, extended: !witness_cells.is_empty(), krasowskii },
    })
}

fn consider_cell(
    g: &Graph,
    k: &CellIndex,
    found: &mut BTreeMap<Vec<i64>, EquilibriumRecord>,
    order: &mut Vec<Vec<i64>>,
) -> Result<(), EquilibriaError> {
    let x = solve_cell_fixed_point(g, k)?;
    if !in_closure(&x, k, MEMBERSHIP_TOL) {
        return Ok(());
    }
    // Adjacent cells can share a boundary fixed point: deduplicate on a
    // rounded-coordinate key.
    let key: Vec<i64> = x.iter().map(|&v| (v * 1e9).round() as i64).collect();
    if !found.contains_key(&key) {
        let record = classify_point(g, &x, CLASSIFY_TOL)?;
        debug_assert!(record.classes.extended);
        found.insert(key.clone(), record);
        order.push(key);
    }
    Ok(())
}

/// Sweeps every integer cell in the box `[k_lo, k_hi]` and returns the
/// classified extended equilibria found, in the lexicographic order of the
/// first witnessing cell.
pub fn enumerate_extended_equilibria(
    g: &Graph,
    k_lo: &CellIndex,
    k_hi: &CellIndex,
) -> Result<Vec<EquilibriumRecord>, EquilibriaError> {
    let n = g.n();
    assert_eq!(k_lo.len(), n, "box bounds must match the graph size");
    assert_eq!(k_hi.len(), n, "box bounds must match the graph size");
    if k_lo.iter().zip(k_hi).any(|(lo, hi)| lo > hi) {
        return Err(EquilibriaError::BadBox);
    }
    let volume = k_lo
        .iter()
        .zip(k_hi)
        .map(|(lo, hi)| (hi - lo + 1) as u128)
        .try_fold(1u128, |acc, w| acc.checked_mul(w))
        .unwrap_or(u128::MAX);
    if volume > ENUM_BUDGET {
        return Err(EquilibriaError::BudgetExceeded { volume, budget: ENUM_BUDGET });
    }

    let mut found = BTreeMap::new();
    let mut order = Vec::new();
    let mut k = k_lo.clone();
    loop {
        consider_cell(g, &k, &mut found, &mut order)?;
        // Lexicographic odometer: last coordinate fastest.
        let mut i = n;
        loop {
            if i == 0 {
                let records = order.into_iter().map(|key| found.remove(&key).unwrap()).collect();
                return Ok(records);
            }
            i -= 1;
            if k[i] < k_hi[i] {
                k[i] += 1;
                for j in i + 1..n {
                    k[j] = k_lo[j];
                }
                break;
            }
        }
    }
}

/// Box sweep restricted to nondecreasing cell indices with the first
/// coordinate pinned — the symmetry reduction that makes wide path-graph
/// boxes tractable, where full boxes blow the budget.
pub fn enumerate_extended_equilibria_monotone(
    g: &Graph,
    k_first: i64,
    k_max: i64,
) -> Result<Vec<EquilibriumRecord>, EquilibriaError> {
    let n = g.n();
    if k_max < k_first {
        return Err(EquilibriaError::BadBox);
    }
    let mut found = BTreeMap::new();
    let mut order = Vec::new();
    let mut k: CellIndex = vec![k_first; n];
    loop {
        consider_cell(g, &k, &mut found, &mut order)?;
        let mut i = n;
        loop {
            if i <= 1 {
                let records = order.into_iter().map(|key| found.remove(&key).unwrap()).collect();
                return Ok(records);
            }
            i -= 1;
            if k[i] < k_max {
                k[i] += 1;
                let v = k[i];
                for j in i + 1..n {
                    k[j] = v;
                }
                break;
            }
        }
    }
}

/// The widest extended equilibrium of the path graph on `n >= 3` nodes:
/// cell increments grow as `i - 2` up to the middle of the path and shrink
/// as `n - i` past it, which saturates the admissible increment bounds and
/// yields the spread `(n-2)²/4` for even `n` and `(n-1)(n-3)/4` for odd.
pub fn path_extremal_equilibrium(n: usize) -> Result<EquilibriumRecord, EquilibriaError> {
    if n < 3 {
        return Err(EquilibriaError::PathTooShort(n));
    }
    let mut k: CellIndex = Vec::with_capacity(n);
    k.push(0);
    for i in 2..=n {
        let incr = if 2 * i <= n + 2 { i as i64 - 2 } else { (n - i) as i64 };
        k.push(k[i - 2] + incr);
    }
    let g = make_graph(&GraphSpec::Path { n }, 0).expect("path graph is valid");
    let x = solve_cell_fixed_point(&g, &k)?;
    debug_assert!(in_closure(&x, &k, MEMBERSHIP_TOL));
    // The record is assembled from the construction rather than through
    // classify_point: nearly every interior component is a half-integer,
    // so sector enumeration would blow the cap for long paths, while
    // extendedness (and with it Krasowskii membership) holds by design.
    let caratheodory = field(&g, &x).iter().all(|v| v.abs() <= CLASSIFY_TOL);
    Ok(EquilibriumRecord {
        point: x,
        witness_cells: vec![k],
        classes: Classes { caratheodory, extended: true, krasowskii: true },
    })
}

/// Spread achieved by [`path_extremal_equilibrium`], in closed form.
pub fn path_extremal_spread(n: usize) -> f64 {
    if n % 2 == 0 {
        ((n - 2) * (n - 2)) as f64 / 4.0
    } else {
        ((n - 1) * (n - 3)) as f64 / 4.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::consensus_stats;
    use crate::graph::load_edge_list;
    use crate::quantize::krasowskii_vertices;
    use approx::assert_abs_diff_eq;

    fn path(n: usize) -> Graph {
        make_graph(&GraphSpec::Path { n }, 0).unwrap()
    }

    fn five_node_tree() -> Graph {
        load_edge_list("1 3 1\n3 1 1\n2 3 1\n3 2 1\n3 4 1\n4 3 1\n4 5 1\n5 4 1").unwrap()
    }

    #[test]
    fn cell_fixed_points() {
        let g = path(4);
        let x = solve_cell_fixed_point(&g, &vec![0, 0, 1, 1]).unwrap();
        assert_eq!(x, vec![0.0, 0.5, 0.5, 1.0]);

        let g3 = make_graph(&GraphSpec::Complete { n: 3 }, 0).unwrap();
        assert_eq!(solve_cell_fixed_point(&g3, &vec![2, 2, 2]).unwrap(), vec![2.0; 3]);

        let g9 = path(9);
        let x9 = solve_cell_fixed_point(&g9, &vec![0, 0, 1, 3, 6, 9, 11, 12, 12]).unwrap();
        assert_eq!(x9, vec![0.0, 0.5, 1.5, 3.5, 6.0, 8.5, 10.5, 11.5, 12.0]);
    }

    #[test]
    fn zero_out_degree_is_rejected() {
        // 1 -> 2 only: node 2 has no out-edges.
        let g = load_edge_list("1 2 1\n2 1 0.0");
        assert!(g.is_err());
        let g = Graph::from_weights(2, vec![0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            solve_cell_fixed_point(&g, &vec![0, 0]),
            Err(EquilibriaError::ZeroOutDegree(1))
        ));
    }

    #[test]
    fn hull_membership_cases() {
        let hull = KrasowskiiHull {
            base_point: vec![0.5, 0.5],
            vertices: vec![
                vec![0.5, 0.5],
                vec![0.5, -0.5],
                vec![-0.5, 0.5],
                vec![-0.5, -0.5],
            ],
        };
        let cert = zero_in_hull(&hull, 1e-9);
        assert!(cert.member);
        assert_abs_diff_eq!(cert.weights.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
        // The certificate must reproduce the min-norm point.
        let mut point = [0.0, 0.0];
        for (w, v) in cert.weights.iter().zip(&hull.vertices) {
            point[0] += w * v[0];
            point[1] += w * v[1];
        }
        assert!(point[0].abs() < 1e-9 && point[1].abs() < 1e-9);

        let single = KrasowskiiHull { base_point: vec![0.0, 0.0], vertices: vec![vec![0.8, -0.8]] };
        assert!(!zero_in_hull(&single, 1e-9).member);

        let zero = KrasowskiiHull { base_point: vec![0.0, 0.0], vertices: vec![vec![0.0, 0.0]] };
        assert!(zero_in_hull(&zero, 1e-9).member);
    }

    #[test]
    fn classify_the_three_reference_points() {
        // Carathéodory point of the 5-node tree, on a cell boundary.
        let g5 = five_node_tree();
        let rec = classify_point(&g5, &[0.0, 0.0, 1.0 / 3.0, 0.5, 1.0], 1e-9).unwrap();
        assert!(rec.classes.caratheodory);
        assert!(rec.classes.extended);
        assert!(rec.classes.krasowskii);

        // Boundary equilibrium of the 4-path: extended but not Carathéodory.
        let g4 = path(4);
        let rec_a = classify_point(&g4, &[0.0, 0.5, 0.5, 1.0], 1e-9).unwrap();
        assert!(!rec_a.classes.caratheodory);
        assert!(rec_a.classes.extended);
        assert!(rec_a.classes.krasowskii);
        assert!(rec_a.witness_cells.contains(&vec![0, 0, 1, 1]));

        // All-half point: Krasowskii only.
        let rec_b = classify_point(&g4, &[0.5; 4], 1e-9).unwrap();
        assert!(!rec_b.classes.caratheodory);
        assert!(!rec_b.classes.extended);
        assert!(rec_b.classes.krasowskii);
        assert!(rec_b.witness_cells.is_empty());
    }

    #[test]
    fn sliding_segment_points_are_not_equilibria() {
        // Between the two boundary equilibria of the 4-path the hull misses
        // zero: solutions slide along the segment instead of resting.
        let g = path(4);
        let rec = classify_point(&g, &[0.25, 0.5, 0.5, 0.75], 1e-9).unwrap();
        assert!(!rec.classes.krasowskii);
        assert!(!rec.classes.extended);
        let hull = krasowskii_vertices(&g, &[0.25, 0.5, 0.5, 0.75], 1e-9).unwrap();
        let cert = zero_in_hull(&hull, 1e-9);
        assert!(cert.min_norm > 0.1);
    }

    #[test]
    fn half_consensus_points_are_krasowskii() {
        for spec in [
            GraphSpec::Complete { n: 4 },
            GraphSpec::Path { n: 5 },
            GraphSpec::CompleteBipartite { p: 2, q: 3 },
        ] {
            let g = make_graph(&spec, 0).unwrap();
            let x = vec![1.5; g.n()];
            let rec = classify_point(&g, &x, 1e-9).unwrap();
            assert!(rec.classes.krasowskii);
        }
    }

    #[test]
    fn enumerate_the_four_path_box() {
        let g = path(4);
        let recs = enumerate_extended_equilibria(&g, &vec![0; 4], &vec![1; 4]).unwrap();
        let mut points: Vec<Vec<f64>> = recs.iter().map(|r| r.point.clone()).collect();
        points.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(
            points,
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.5, 1.0],
                vec![1.0, 0.5, 0.5, 0.0],
                vec![1.0, 1.0, 1.0, 1.0],
            ]
        );
        for r in &recs {
            assert!(r.classes.extended);
            for k in &r.witness_cells {
                assert!(field_cell(&g, &r.point, k).iter().all(|v| v.abs() <= 1e-12));
            }
        }
    }

    #[test]
    fn enumerate_complete_graph_finds_only_consensus() {
        let g = make_graph(&GraphSpec::Complete { n: 3 }, 0).unwrap();
        let recs = enumerate_extended_equilibria(&g, &vec![0; 3], &vec![2; 3]).unwrap();
        let points: Vec<Vec<f64>> = recs.iter().map(|r| r.point.clone()).collect();
        assert_eq!(points, vec![vec![0.0; 3], vec![1.0; 3], vec![2.0; 3]]);
        assert!(recs.iter().all(|r| r.classes.caratheodory));
    }

    #[test]
    fn enumerate_single_cell_box() {
        let g = make_graph(&GraphSpec::CompleteBipartite { p: 2, q: 2 }, 0).unwrap();
        let recs = enumerate_extended_equilibria(&g, &vec![3; 4], &vec![3; 4]).unwrap();
        assert_eq!(recs.len(), 1);
        assert_eq!(recs[0].point, vec![3.0; 4]);
    }

    #[test]
    fn enumeration_budget_guard() {
        let g = make_graph(&GraphSpec::Complete { n: 12 }, 0).unwrap();
        let err = enumerate_extended_equilibria(&g, &vec![0; 12], &vec![9; 12]);
        assert!(matches!(err, Err(EquilibriaError::BudgetExceeded { .. })));
    }

    #[test]
    fn monotone_enumeration_agrees_on_the_path_box() {
        // On the 4-path with k_1 = 0 the monotone sweep finds the
        // nondecreasing-witness subset of the full enumeration.
        let g = path(4);
        let full = enumerate_extended_equilibria(&g, &vec![0; 4], &vec![2; 4]).unwrap();
        let mono = enumerate_extended_equilibria_monotone(&g, 0, 2).unwrap();
        for rec in &mono {
            assert!(full.iter().any(|r| r.point == rec.point));
        }
        assert!(mono.iter().any(|r| r.point == vec![0.0, 0.5, 0.5, 1.0]));
    }

    #[test]
    fn extremal_path_construction() {
        let rec9 = path_extremal_equilibrium(9).unwrap();
        assert_eq!(rec9.point, vec![0.0, 0.5, 1.5, 3.5, 6.0, 8.5, 10.5, 11.5, 12.0]);
        assert!(rec9.witness_cells.contains(&vec![0, 0, 1, 3, 6, 9, 11, 12, 12]));
        assert_eq!(consensus_stats(&rec9.point).spread, 12.0);
        assert_eq!(path_extremal_spread(9), 12.0);

        let rec4 = path_extremal_equilibrium(4).unwrap();
        assert_eq!(rec4.point, vec![0.0, 0.5, 0.5, 1.0]);
        assert_eq!(consensus_stats(&rec4.point).spread, 1.0);

        let rec20 = path_extremal_equilibrium(20).unwrap();
        assert_eq!(consensus_stats(&rec20.point).spread, 81.0);
        assert_eq!(path_extremal_spread(20), 81.0);

        assert!(path_extremal_equilibrium(2).is_err());
    }
}
