//! Fixed-step explicit Euler integration of the discontinuous field, with
//! trajectory recording, a stagnation-based stop rule, and chattering
//! diagnostics.
//!
//! No event detection or sliding-mode projection is attempted: the scheme
//! is plain `x <- x + h·f(x)`, which approximates the classical solutions
//! of the system. Orbits sliding on the discontinuity set show up as
//! persistent quantizer switching and are surfaced by
//! [`chattering_score`], not resolved by the stepper.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::dynamics::{field, field_linear, State};
use crate::graph::Graph;
use crate::quantize::{q_vec, CellIndex};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    BadConfig(String),
    #[error("step {step} is unstable for max out-degree {max_degree}; need step < 1/max_degree")]
    UnstableStep { step: f64, max_degree: f64 },
    #[error("state became non-finite at t = {time}")]
    NonFinite { time: f64 },
    #[error("trajectory has no samples")]
    EmptyTrajectory,
    #[error("window {window} exceeds the trajectory span {span}")]
    WindowTooLong { window: f64, span: f64 },
}

/// Step size, horizon, recording stride, and the stop rule parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    /// Euler step `h`.
    pub step: f64,
    /// Total integration time.
    pub horizon: f64,
    /// Record every `record_stride`-th state (the initial state is always
    /// recorded).
    pub record_stride: usize,
    /// Stagnation threshold for the stop rule.
    pub stop_tol: f64,
    /// Trailing window length for the stop rule.
    pub stop_window: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            step: 0.01,
            horizon: 60.0,
            record_stride: 1,
            stop_tol: 1e-9,
            stop_window: 1.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(SimError::BadConfig(format!("step must be positive, got {}", self.step)));
        }
        if !(self.horizon > 0.0) || self.step > self.horizon {
            return Err(SimError::BadConfig(format!(
                "horizon must satisfy 0 < step <= horizon, got step={}, horizon={}",
                self.step, self.horizon
            )));
        }
        if self.record_stride == 0 {
            return Err(SimError::BadConfig("record_stride must be at least 1".into()));
        }
        if !(self.stop_tol > 0.0) {
            return Err(SimError::BadConfig(format!(
                "stop_tol must be positive, got {}",
                self.stop_tol
            )));
        }
        if self.stop_window < self.step {
            return Err(SimError::BadConfig(format!(
                "stop_window must be at least one step, got window={}, step={}",
                self.stop_window, self.step
            )));
        }
        Ok(())
    }
}

/// Which right-hand side to integrate: the quantized-neighbour field or the
/// baseline averaging field `-L·x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Quantized,
    Linear,
}

/// Detected limit of a run: the final state once the stop rule fired.
#[derive(Debug, Clone, PartialEq)]
pub struct Converged {
    pub limit: State,
    pub at_time: f64,
}

/// Recorded samples of a run. Times advance by `step·record_stride`, except
/// that the final sample is always recorded even when the run stops off the
/// stride grid. `q_states[k]` is always the quantizer image of `states[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub q_states: Vec<CellIndex>,
    pub converged: Option<Converged>,
    /// Raw Euler step the run was produced with.
    pub step: f64,
    pub record_stride: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &State {
        self.states.last().expect("trajectory has samples")
    }

    pub fn span(&self) -> f64 {
        match (self.times.first(), self.times.last()) {
            (Some(a), Some(b)) => b - a,
            _ => 0.0,
        }
    }

    /// Trailing portion of the trajectory covering the given fraction of
    /// its samples (at least one).
    pub fn tail(&self, fraction: f64) -> Trajectory {
        assert!(fraction > 0.0 && fraction <= 1.0, "fraction must lie in (0, 1]");
        let keep = ((self.len() as f64 * fraction).ceil() as usize).clamp(1, self.len());
        let start = self.len() - keep;
        Trajectory {
            times: self.times[start..].to_vec(),
            states: self.states[start..].to_vec(),
            q_states: self.q_states[start..].to_vec(),
            converged: self.converged.clone(),
            step: self.step,
            record_stride: self.record_stride,
        }
    }
}

/// One explicit Euler step `x + h·f(x)`.
pub fn euler_step(g: &Graph, x: &[f64], h: f64) -> Result<State, SimError> {
    assert!(h > 0.0, "step must be positive");
    let f = field(g, x);
    let next: State = x.iter().zip(&f).map(|(xi, fi)| xi + h * fi).collect();
    if next.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite { time: h });
    }
    Ok(next)
}

/// Integrates the quantized field from `x0`. See [`simulate_field`].
pub fn simulate(g: &Graph, x0: &[f64], cfg: &SimConfig) -> Result<Trajectory, SimError> {
    simulate_field(g, x0, cfg, FieldKind::Quantized)
}

/// Fixed-step Euler integration up to the horizon, recording every
/// `record_stride`-th state.
///
/// Stop rule: the run is declared converged once the field's infinity norm
/// has stayed below `stop_tol / stop_window` throughout a full trailing
/// window. That keeps the state within `stop_tol` over the window and
/// leaves the final field below the threshold, while a slowly sliding
/// orbit, which stagnates per step but keeps a large field, never fires it.
pub fn simulate_field(
    g: &Graph,
    x0: &[f64],
    cfg: &SimConfig,
    kind: FieldKind,
) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    assert_eq!(x0.len(), g.n(), "initial state length must match the graph");
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(SimError::NonFinite { time: 0.0 });
    }
    // Per-cell flows contract at rate d_i, so Euler needs h·d_i < 1.
    let max_deg = g.max_out_degree();
    if kind == FieldKind::Quantized && max_deg > 0.0 && cfg.step * max_deg >= 1.0 {
        return Err(SimError::UnstableStep { step: cfg.step, max_degree: max_deg });
    }

    let h = cfg.step;
    let total_steps = (cfg.horizon / h + 1e-9).floor() as usize;
    let field_threshold = cfg.stop_tol / cfg.stop_window;

    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        q_states: Vec::new(),
        converged: None,
        step: h,
        record_stride: cfg.record_stride,
    };
    let mut record = |k: usize, x: &State| {
        traj.times.push(k as f64 * h);
        traj.states.push(x.clone());
        traj.q_states.push(q_vec(x));
    };

    // Monotonic deque of (step index, field norm): the front is the max of
    // the field norm over the trailing window of states.
    let mut window: std::collections::VecDeque<(usize, f64)> = std::collections::VecDeque::new();
    let window_steps = (cfg.stop_window / h).ceil() as usize;

    let mut x = x0.to_vec();
    record(0, &x);
    let mut last_recorded = 0usize;
    for k in 0..=total_steps {
        let f = match kind {
            FieldKind::Quantized => field(g, &x),
            FieldKind::Linear => field_linear(g, &x),
        };
        let fnorm = f.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        while window.back().is_some_and(|&(_, v)| v <= fnorm) {
            window.pop_back();
        }
        window.push_back((k, fnorm));
        while window.front().is_some_and(|&(i, _)| i + window_steps < k) {
            window.pop_front();
        }

        let window_max = window.front().map_or(f64::INFINITY, |&(_, v)| v);
        if k >= window_steps && window_max <= field_threshold {
            if last_recorded != k {
                record(k, &x);
            }
            traj.converged = Some(Converged { limit: x.clone(), at_time: k as f64 * h });
            return Ok(traj);
        }
        if k == total_steps {
            break;
        }

        for (xi, fi) in x.iter_mut().zip(&f) {
            *xi += h * fi;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SimError::NonFinite { time: (k + 1) as f64 * h });
        }
        if (k + 1) % cfg.record_stride == 0 {
            record(k + 1, &x);
            last_recorded = k + 1;
        }
    }
    if last_recorded != total_steps {
        record(total_steps, &x);
    }
    Ok(traj)
}

/// A-posteriori version of the stop rule on a recorded trajectory: the
/// final state is a limit when the trailing window stagnates within `tol`
/// and the mean field over the last recorded hop, estimated from the state
/// difference, stays below `tol / window`.
pub fn detect_limit(traj: &Trajectory, tol: f64, window: f64) -> Result<Option<State>, SimError> {
    assert!(tol > 0.0 && window > 0.0);
    if traj.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    if traj.len() == 1 {
        return Err(SimError::WindowTooLong { window, span: 0.0 });
    }
    let span = traj.span();
    if window > span + 1e-12 {
        return Err(SimError::WindowTooLong { window, span });
    }
    let t_end = *traj.times.last().unwrap();
    let last = traj.last_state();

    let inf = |a: &[f64], b: &[f64]| {
        a.iter().zip(b).fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()))
    };
    let stagnant = traj
        .times
        .iter()
        .zip(&traj.states)
        .filter(|(&t, _)| t >= t_end - window - 1e-12)
        .all(|(_, s)| inf(s, last) <= tol);

    let k = traj.len() - 1;
    let dt = traj.times[k] - traj.times[k - 1];
    let mean_field = inf(&traj.states[k], &traj.states[k - 1]) / dt;

    if stagnant && mean_field <= tol / window {
        Ok(Some(last.clone()))
    } else {
        Ok(None)
    }
}

/// Maximum, over sliding windows of the given width, of the number of
/// componentwise quantizer-level changes per unit time. Zero means the
/// quantization levels eventually freeze; persistently positive scores
/// indicate numerical sliding (chattering).
pub fn chattering_score(traj: &Trajectory, window: f64) -> f64 {
    assert!(traj.len() >= 2, "need at least two samples");
    assert!(window > 0.0);
    // (time, number of components whose level changed at that sample)
    let mut events: Vec<(f64, usize)> = Vec::new();
    for k in 1..traj.len() {
        let changes = traj.q_states[k]
            .iter()
            .zip(&traj.q_states[k - 1])
            .filter(|(a, b)| a != b)
            .count();
        if changes > 0 {
            events.push((traj.times[k], changes));
        }
    }
    if events.is_empty() {
        return 0.0;
    }
    let mut best = 0usize;
    let mut start = 0usize;
    let mut in_window = 0usize;
    // Half-open windows (t - width, t] anchored at event times; the edge
    // comparison carries a relative epsilon against accumulated rounding
    // in the sample times.
    let edge = window * (1.0 - 1e-12);
    for j in 0..events.len() {
        in_window += events[j].1;
        while events[j].0 - events[start].0 >= edge {
            in_window -= events[start].1;
            start += 1;
        }
        best = best.max(in_window);
    }
    best as f64 / window
}

/// Seeded uniform draw of `n` components in `[lo, hi)`; the generator is a
/// fixed named stream cipher so runs reproduce bit-for-bit across
/// platforms with the same floating-point environment.
pub fn uniform_initial_state(n: usize, lo: f64, hi: f64, seed: u64) -> State {
    assert!(lo < hi, "need lo < hi");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| lo + (hi - lo) * rng.gen::<f64>()).collect()
}
