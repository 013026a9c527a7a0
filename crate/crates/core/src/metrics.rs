//! Trajectory-level verdicts for the structural results of the model:
//! order preservation on all-to-all graphs, convergence into the spectral
//! tube around the consensus line, the Lyapunov decay inequality behind
//! it, and cell dwell-time reports.
//!
//! The continuous statements are exact; their discrete counterparts hold
//! up to explicit first-order slack in the Euler step `h`, which each
//! check budgets for and reports.

use thiserror::Error;

use crate::dynamics::{consensus_stats, field};
use crate::graph::{connectivity_class, is_weight_balanced, spectral_summary, ConnectivityClass, Graph};
use crate::integrator::Trajectory;
use crate::quantize::CellIndex;

const BALANCE_TOL: f64 = 1e-9;
const SPECTRAL_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("order preservation requires a complete graph with uniform weights")]
    NotComplete,
    #[error("theorem hypotheses violated: {0}")]
    HypothesesViolated(String),
    #[error("trajectory too short: {0}")]
    TooShort(String),
}

/// Outcome of the pairwise order check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderReport {
    pub ok: bool,
    /// Largest observed positive part of `x_i - x_j` over pairs ordered
    /// `x_i <= x_j` at the start.
    pub max_violation: f64,
}

/// On all-to-all graphs the ordering of any two agents is invariant along
/// solutions; one Euler step can overshoot the crossing by `O(h)`, so the
/// check passes when the worst violation stays below `n·h`.
pub fn check_order_preservation(traj: &Trajectory, g: &Graph) -> Result<OrderReport, MetricsError> {
    let n = g.n();
    let w = g.weight(0, 1);
    let uniform_complete = w > 0.0
        && (0..n).all(|i| {
            (0..n).all(|j| {
                let want = if i == j { 0.0 } else { w };
                (g.weight(i, j) - want).abs() <= 1e-12
            })
        });
    if !uniform_complete {
        return Err(MetricsError::NotComplete);
    }
    if traj.is_empty() {
        return Err(MetricsError::TooShort("need at least one sample".into()));
    }
    let x0 = &traj.states[0];
    let mut max_violation = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if i == j || x0[i] > x0[j] {
                continue;
            }
            // Ordered x_i <= x_j at t = 0 (ties count both ways).
            for state in &traj.states {
                max_violation = max_violation.max(state[i] - state[j]);
            }
        }
    }
    Ok(OrderReport { ok: max_violation <= n as f64 * traj.step, max_violation })
}

/// Verdict for the distance-to-consensus bound: the tail-averaged
/// normalized distance against `‖A‖ / (2λ*)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport {
    pub normalized_tail_dist: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub margin: f64,
}

/// Averages `‖x - x_a·1‖ / √n` over the trailing `tail_fraction` of the
/// samples and compares against the tube radius `‖A‖ / (2λ*)`. Requires a
/// weight-balanced, at least weakly connected graph.
pub fn check_m_bound(
    g: &Graph,
    traj: &Trajectory,
    tail_fraction: f64,
    tol: f64,
) -> Result<BoundReport, MetricsError> {
    assert!(tail_fraction > 0.0 && tail_fraction < 1.0, "tail fraction must lie in (0, 1)");
    assert!(tol > 0.0);
    require_balanced_connected(g)?;
    if traj.is_empty() {
        return Err(MetricsError::TooShort("need at least one sample".into()));
    }
    let summary = spectral_summary(g, SPECTRAL_TOL);
    let lambda_star = summary
        .lambda_star
        .ok_or_else(|| MetricsError::HypothesesViolated("no nonzero Laplacian eigenvalue".into()))?;
    let bound = summary.a_norm / (2.0 * lambda_star);

    let tail = traj.tail(tail_fraction);
    let normalized_tail_dist = tail
        .states
        .iter()
        .map(|s| consensus_stats(s).normalized_dist)
        .sum::<f64>()
        / tail.len() as f64;
    Ok(BoundReport {
        normalized_tail_dist,
        bound,
        satisfied: normalized_tail_dist <= bound + tol,
        margin: bound - normalized_tail_dist,
    })
}

/// Outcome of the decay-inequality check; `worst_excess` is the largest
/// amount by which a step's V-increment exceeded the budgeted bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayReport {
    pub ok: bool,
    pub worst_excess: f64,
}

/// Checks the decay inequality of `V = ½‖x - x_a·1‖²` along consecutive
/// samples: the increment per unit time may not exceed
/// `‖y‖(-λ*·‖y‖ + ‖A‖·√n/2)` plus second-order Euler slack `2hF²`, with
/// `F` the largest field infinity-norm seen on the run. The right-hand
/// side is evaluated at the state each step lands on, matching the
/// backward quadrature of the continuous inequality.
pub fn lyapunov_decay_check(
    g: &Graph,
    traj: &Trajectory,
    tol: f64,
) -> Result<DecayReport, MetricsError> {
    assert!(tol > 0.0);
    require_balanced_connected(g)?;
    if traj.len() < 2 {
        return Err(MetricsError::TooShort("need at least two samples".into()));
    }
    let summary = spectral_summary(g, SPECTRAL_TOL);
    let lambda_star = summary
        .lambda_star
        .ok_or_else(|| MetricsError::HypothesesViolated("no nonzero Laplacian eigenvalue".into()))?;
    let n = g.n() as f64;

    let sup_field = traj
        .states
        .iter()
        .map(|s| field(g, s).iter().fold(0.0f64, |a, &b| a.max(b.abs())))
        .fold(0.0f64, f64::max);
    let slack = 2.0 * traj.step * sup_field * sup_field;

    let v = |s: &[f64]| {
        let d = consensus_stats(s).dist;
        0.5 * d * d
    };
    let mut worst_excess = f64::NEG_INFINITY;
    for k in 1..traj.len() {
        let dt = traj.times[k] - traj.times[k - 1];
        let dv = (v(&traj.states[k]) - v(&traj.states[k - 1])) / dt;
        let y = consensus_stats(&traj.states[k]).dist;
        let rhs = y * (-lambda_star * y + summary.a_norm * n.sqrt() / 2.0) + slack;
        worst_excess = worst_excess.max(dv - rhs);
    }
    Ok(DecayReport { ok: worst_excess <= tol, worst_excess })
}

fn require_balanced_connected(g: &Graph) -> Result<(), MetricsError> {
    if !is_weight_balanced(g, BALANCE_TOL) {
        return Err(MetricsError::HypothesesViolated("graph is not weight-balanced".into()));
    }
    if connectivity_class(g) == ConnectivityClass::Disconnected {
        return Err(MetricsError::HypothesesViolated("graph is disconnected".into()));
    }
    Ok(())
}

/// One visited quantizer cell with its entry time and, unless it is the
/// final cell, its exit time.
#[derive(Debug, Clone, PartialEq)]
pub struct DwellRecord {
    pub cell: CellIndex,
    pub enter: f64,
    pub exit: Option<f64>,
}

/// Run-length encodes the recorded quantizer states into visited cells.
pub fn cell_dwell_report(traj: &Trajectory) -> Vec<DwellRecord> {
    let mut out: Vec<DwellRecord> = Vec::new();
    for (t, q) in traj.times.iter().zip(&traj.q_states) {
        if out.last().is_some_and(|last| last.cell == *q) {
            continue;
        }
        if let Some(prev) = out.last_mut() {
            prev.exit = Some(*t);
        }
        out.push(DwellRecord { cell: q.clone(), enter: *t, exit: None });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{classify_point, path_extremal_equilibrium};
    use crate::graph::{load_edge_list, make_graph, GraphSpec};
    use crate::integrator::{simulate, uniform_initial_state, SimConfig};
    use approx::assert_abs_diff_eq;

    fn constant_traj(x: Vec<f64>, samples: usize, h: f64) -> Trajectory {
        Trajectory {
            times: (0..samples).map(|k| k as f64 * h).collect(),
            q_states: vec![crate::quantize::q_vec(&x); samples],
            states: vec![x; samples],
            converged: None,
            step: h,
            record_stride: 1,
        }
    }

    #[test]
    fn order_preservation_on_complete_runs() {
        let g = make_graph(&GraphSpec::Complete { n: 20 }, 0).unwrap();
        let x0 = uniform_initial_state(20, 0.0, 30.0, 17);
        let cfg = SimConfig { horizon: 20.0, ..SimConfig::default() };
        let traj = simulate(&g, &x0, &cfg).unwrap();
        let rep = check_order_preservation(&traj, &g).unwrap();
        assert!(rep.ok, "violation {}", rep.max_violation);
        assert!(rep.max_violation <= 20.0 * 0.01);
    }

    #[test]
    fn order_check_rejects_non_complete_graphs() {
        let g = make_graph(&GraphSpec::Path { n: 4 }, 0).unwrap();
        let traj = constant_traj(vec![0.0; 4], 10, 0.01);
        assert!(matches!(
            check_order_preservation(&traj, &g),
            Err(MetricsError::NotComplete)
        ));
    }

    #[test]
    fn two_agent_ordering_never_flips_inside_a_cell() {
        let g = make_graph(&GraphSpec::Complete { n: 2 }, 0).unwrap();
        let cfg = SimConfig { horizon: 30.0, ..SimConfig::default() };
        let traj = simulate(&g, &[0.6, 1.4], &cfg).unwrap();
        let rep = check_order_preservation(&traj, &g).unwrap();
        assert_eq!(rep.max_violation, 0.0);
    }

    #[test]
    fn m_bound_on_complete_run_is_within_half() {
        let g = make_graph(&GraphSpec::Complete { n: 20 }, 0).unwrap();
        let x0 = uniform_initial_state(20, 0.0, 30.0, 23);
        let cfg = SimConfig { horizon: 20.0, ..SimConfig::default() };
        let traj = simulate(&g, &x0, &cfg).unwrap();
        let rep = check_m_bound(&g, &traj, 0.2, 1e-9).unwrap();
        assert!(rep.satisfied);
        assert_abs_diff_eq!(rep.bound, 19.0 / 40.0, epsilon = 1e-8);
        assert!(rep.normalized_tail_dist < 1e-6);
    }

    #[test]
    fn m_bound_at_the_widest_path_equilibrium() {
        // Stationary trajectory at the widest 9-node path equilibrium:
        // dist/sqrt(n) = sqrt(185.5)/3, still inside the spectral tube.
        let rec = path_extremal_equilibrium(9).unwrap();
        let g = make_graph(&GraphSpec::Path { n: 9 }, 0).unwrap();
        let traj = constant_traj(rec.point.clone(), 200, 0.01);
        let rep = check_m_bound(&g, &traj, 0.2, 1e-9).unwrap();
        assert_abs_diff_eq!(rep.normalized_tail_dist, 185.5f64.sqrt() / 3.0, epsilon = 1e-12);
        assert!(rep.satisfied, "margin {}", rep.margin);
    }

    #[test]
    fn m_bound_rejects_unbalanced_graphs() {
        let g = load_edge_list("1 2 1\n2 3 1").unwrap();
        let traj = constant_traj(vec![0.0; 3], 10, 0.01);
        assert!(matches!(
            check_m_bound(&g, &traj, 0.2, 1e-9),
            Err(MetricsError::HypothesesViolated(_))
        ));
    }

    #[test]
    fn lyapunov_decay_on_complete_run() {
        let g = make_graph(&GraphSpec::Complete { n: 20 }, 0).unwrap();
        let x0 = uniform_initial_state(20, 0.0, 30.0, 31);
        let cfg = SimConfig { horizon: 20.0, ..SimConfig::default() };
        let traj = simulate(&g, &x0, &cfg).unwrap();
        let rep = lyapunov_decay_check(&g, &traj, 1e-6).unwrap();
        assert!(rep.ok, "worst excess {}", rep.worst_excess);
    }

    #[test]
    fn lyapunov_decay_on_stationary_consensus() {
        let g = make_graph(&GraphSpec::Complete { n: 5 }, 0).unwrap();
        let traj = constant_traj(vec![3.0; 5], 50, 0.01);
        let rep = lyapunov_decay_check(&g, &traj, 1e-9).unwrap();
        assert!(rep.ok);
        assert!(rep.worst_excess <= 0.0);
    }

    #[test]
    fn v_decreases_far_from_consensus() {
        // Outside the tube the inequality forces V strictly down.
        let g = make_graph(&GraphSpec::Complete { n: 4 }, 0).unwrap();
        let x0 = vec![0.1, 10.2, 20.3, 30.4];
        let cfg = SimConfig { horizon: 0.5, stop_window: 0.2, ..SimConfig::default() };
        let traj = simulate(&g, &x0, &cfg).unwrap();
        let v = |s: &[f64]| {
            let d = consensus_stats(s).dist;
            0.5 * d * d
        };
        let summary = spectral_summary(&g, 1e-9);
        let radius = summary.m_radius.unwrap();
        for k in 1..traj.len() {
            let prev = &traj.states[k - 1];
            if consensus_stats(prev).dist > radius {
                assert!(v(&traj.states[k]) < v(prev));
            }
        }
    }

    #[test]
    fn dwell_report_on_converged_run() {
        let g = make_graph(&GraphSpec::Complete { n: 6 }, 0).unwrap();
        let x0 = uniform_initial_state(6, 0.0, 30.0, 41);
        let cfg = SimConfig { horizon: 30.0, ..SimConfig::default() };
        let traj = simulate(&g, &x0, &cfg).unwrap();
        let report = cell_dwell_report(&traj);
        assert!(!report.is_empty());
        let last = report.len() - 1;
        for (i, rec) in report.iter().enumerate() {
            if i < last {
                assert!(rec.exit.is_some());
            } else {
                assert!(rec.exit.is_none());
            }
        }
        // The final cell of a converged complete-graph run is a consensus
        // cell.
        let final_cell = &report[last].cell;
        assert!(final_cell.iter().all(|&k| k == final_cell[0]));
    }

    #[test]
    fn dwell_report_on_constant_trajectory() {
        let traj = constant_traj(vec![1.2, 0.3], 20, 0.01);
        let report = cell_dwell_report(&traj);
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].enter, 0.0);
        assert!(report[0].exit.is_none());
    }

    #[test]
    fn path_run_final_cell_is_an_extended_equilibrium() {
        let g = make_graph(&GraphSpec::Path { n: 20 }, 0).unwrap();
        let x0 = uniform_initial_state(20, 0.0, 30.0, 7);
        let cfg = SimConfig { horizon: 60.0, ..SimConfig::default() };
        let traj = simulate(&g, &x0, &cfg).unwrap();
        let conv = traj.converged.clone().expect("path run settles");
        let report = cell_dwell_report(&traj);
        assert!(report.last().unwrap().exit.is_none());
        let rec = classify_point(&g, &conv.limit, 1e-6).unwrap();
        assert!(rec.classes.extended);
    }
}
