//! Time stepping of the primal-dual network flow
//!
//! ```text
//! ẋ = −(L⊗I)v − (H̃x − z_H)
//! v̇ = (L⊗I)x
//! ```
//!
//! by fixed-step RK4, its forward-Euler iteration with step `ε`, and the
//! damped variant with an extra `−α(L⊗I)x` term in `ẋ`.

use std::fmt;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spectral::AssembledFlow;

pub const DEFAULT_STEP: f64 = 0.005;
pub const DEFAULT_T_END: f64 = 200.0;
pub const DEFAULT_MAX_STEPS: usize = 40_000;
/// Any state entry beyond this magnitude counts as divergence.
pub const DIVERGENCE_BOUND: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    /// Time for continuous runs, step index for discrete ones.
    pub t: f64,
    pub x: DVector<f64>,
    pub v: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: DVector<f64>,
    pub v: DVector<f64>,
    /// `‖x − 1⊗y*‖²`
    pub error: f64,
    /// `U(x)`
    pub cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    Rk4,
    Euler,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Rk4 => "rk4",
            Scheme::Euler => "euler",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub scheme: Scheme,
    pub step: f64,
    pub n: usize,
    pub m: usize,
    pub label: String,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories hold at least the initial sample")
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.t).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.error).collect()
    }

    /// Entry `x_i[c]` (both 1-based) across all samples.
    pub fn x_component(&self, i: usize, c: usize) -> Vec<f64> {
        let k = (i - 1) * self.m + (c - 1);
        self.samples.iter().map(|s| s.x[k]).collect()
    }

    pub fn v_component(&self, i: usize, c: usize) -> Vec<f64> {
        let k = (i - 1) * self.m + (c - 1);
        self.samples.iter().map(|s| s.v[k]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuousConfig {
    pub step: f64,
    pub t_end: f64,
    pub record_every: usize,
}

impl Default for ContinuousConfig {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP,
            t_end: DEFAULT_T_END,
            record_every: 20,
        }
    }
}

impl ContinuousConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::InvalidParameter(format!("step must be positive, got {}", self.step)));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidParameter(format!("t_end must be positive, got {}", self.t_end)));
        }
        if self.record_every == 0 {
            return Err(Error::InvalidParameter("record_every must be at least 1".into()));
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        ((self.t_end / self.step).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteConfig {
    pub epsilon: f64,
    pub max_steps: usize,
    pub record_every: usize,
}

impl DiscreteConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            max_steps: DEFAULT_MAX_STEPS,
            record_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if self.max_steps == 0 || self.record_every == 0 {
            return Err(Error::InvalidParameter("max_steps and record_every must be at least 1".into()));
        }
        Ok(())
    }
}

/// Right-hand side of the undamped flow.
pub fn ct_rhs(flow: &AssembledFlow, x: &DVector<f64>, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    rhs(flow, 0.0, x, v)
}

fn rhs(flow: &AssembledFlow, alpha: f64, x: &DVector<f64>, v: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let lx = &flow.l_kron * x;
    let mut dx = -(&flow.l_kron * v) - flow.gradient(x);
    if alpha != 0.0 {
        dx -= &lx * alpha;
    }
    (dx, lx)
}

/// One classical RK4 step of the (possibly damped) flow.
pub(crate) fn rk4_step(
    flow: &AssembledFlow,
    alpha: f64,
    x: &DVector<f64>,
    v: &DVector<f64>,
    h: f64,
) -> (DVector<f64>, DVector<f64>) {
    let (k1x, k1v) = rhs(flow, alpha, x, v);
    let (k2x, k2v) = rhs(flow, alpha, &(x + &k1x * (h / 2.0)), &(v + &k1v * (h / 2.0)));
    let (k3x, k3v) = rhs(flow, alpha, &(x + &k2x * (h / 2.0)), &(v + &k2v * (h / 2.0)));
    let (k4x, k4v) = rhs(flow, alpha, &(x + &k3x * h), &(v + &k3v * h));
    let xn = x + (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
    let vn = v + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    (xn, vn)
}

pub(crate) fn sample(flow: &AssembledFlow, t: f64, x: &DVector<f64>, v: &DVector<f64>) -> Sample {
    Sample {
        t,
        x: x.clone(),
        v: v.clone(),
        error: flow.error(x),
        cost: flow.cost(x),
    }
}

pub(crate) fn blown_up(x: &DVector<f64>, v: &DVector<f64>) -> bool {
    x.iter().chain(v.iter()).any(|c| !c.is_finite() || c.abs() > DIVERGENCE_BOUND)
}

pub(crate) fn check_initial(flow: &AssembledFlow, x0: &DVector<f64>, v0: &DVector<f64>) -> Result<()> {
    let nm = flow.n * flow.m;
    if x0.len() != nm || v0.len() != nm {
        return Err(Error::DimensionMismatch(format!(
            "initial state needs {nm} entries per block, got x: {}, v: {}",
            x0.len(),
            v0.len()
        )));
    }
    Ok(())
}

pub fn simulate_ct(
    flow: &AssembledFlow,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    config: &ContinuousConfig,
) -> Result<Trajectory> {
    integrate(flow, 0.0, x0, v0, config, "continuous")
}

/// The comparison flow `ẋ = −α(L⊗I)x − (L⊗I)v − ∇U(x)`, `v̇ = (L⊗I)x`.
pub fn simulate_wang_elia(
    flow: &AssembledFlow,
    alpha: f64,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    config: &ContinuousConfig,
) -> Result<Trajectory> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must be nonnegative, got {alpha}")));
    }
    integrate(flow, alpha, x0, v0, config, "damped")
}

fn integrate(
    flow: &AssembledFlow,
    alpha: f64,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    config: &ContinuousConfig,
    label: &str,
) -> Result<Trajectory> {
    config.validate()?;
    check_initial(flow, x0, v0)?;
    let h = config.step;
    let steps = config.n_steps();
    let mut traj = Trajectory {
        samples: vec![sample(flow, 0.0, x0, v0)],
        scheme: Scheme::Rk4,
        step: h,
        n: flow.n,
        m: flow.m,
        label: label.to_string(),
    };
    let (mut x, mut v) = (x0.clone(), v0.clone());
    for k in 1..=steps {
        (x, v) = rk4_step(flow, alpha, &x, &v, h);
        let t = k as f64 * h;
        if blown_up(&x, &v) {
            traj.samples.push(sample(flow, t, &x, &v));
            return Err(Error::Diverged {
                at: t,
                partial: Box::new(traj),
            });
        }
        if k % config.record_every == 0 || k == steps {
            traj.samples.push(sample(flow, t, &x, &v));
        }
    }
    Ok(traj)
}

/// `x(k+1) = x(k) − ε(L⊗I)v(k) − ε∇U(x(k))`, `v(k+1) = v(k) + ε(L⊗I)x(k)`.
pub fn simulate_dt(
    flow: &AssembledFlow,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    config: &DiscreteConfig,
) -> Result<Trajectory> {
    config.validate()?;
    check_initial(flow, x0, v0)?;
    let eps = config.epsilon;
    let mut traj = Trajectory {
        samples: vec![sample(flow, 0.0, x0, v0)],
        scheme: Scheme::Euler,
        step: eps,
        n: flow.n,
        m: flow.m,
        label: "discrete".to_string(),
    };
    let (mut x, mut v) = (x0.clone(), v0.clone());
    for k in 1..=config.max_steps {
        let (dx, dv) = ct_rhs(flow, &x, &v);
        x += dx * eps;
        v += dv * eps;
        let t = k as f64;
        if blown_up(&x, &v) {
            traj.samples.push(sample(flow, t, &x, &v));
            return Err(Error::Diverged {
                at: t,
                partial: Box::new(traj),
            });
        }
        if k % config.record_every == 0 || k == config.max_steps {
            traj.samples.push(sample(flow, t, &x, &v));
        }
    }
    Ok(traj)
}

/// `(t, e(t))` pairs, recomputed from the stored states.
pub fn error_trajectory(traj: &Trajectory, y_star: &DVector<f64>) -> Vec<(f64, f64)> {
    let x_star = crate::linalg::replicate(y_star, traj.n);
    traj.samples
        .iter()
        .map(|s| (s.t, (&s.x - &x_star).norm_squared()))
        .collect()
}

/// `V = ½(‖x − x*‖² + ‖v − v*‖²)`
pub fn lyapunov(x: &DVector<f64>, v: &DVector<f64>, x_star: &DVector<f64>, v_star: &DVector<f64>) -> f64 {
    0.5 * ((x - x_star).norm_squared() + (v - v_star).norm_squared())
}

/// Peak-to-peak range of the samples with index fraction in `[from, to)`.
pub fn window_amplitude(series: &[f64], from: f64, to: f64) -> f64 {
    let len = series.len();
    let a = ((from * len as f64).floor() as usize).min(len);
    let b = ((to * len as f64).ceil() as usize).clamp(a, len);
    let w = &series[a..b];
    if w.is_empty() {
        return 0.0;
    }
    let (lo, hi) = w
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    hi - lo
}

/// Sustained oscillation: the range over the last 20% of the run is at least
/// half the range over the 40–60% window, and above round-off.
pub fn oscillation_detected(series: &[f64]) -> bool {
    let mid = window_amplitude(series, 0.4, 0.6);
    let tail = window_amplitude(series, 0.8, 1.0);
    let scale = series.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    tail >= 0.5 * mid && tail > 1e-9 * (1.0 + scale)
}
