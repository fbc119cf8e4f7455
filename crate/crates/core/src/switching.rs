//! The flow on a periodically switching topology, the affine limit sets of the
//! dual variable on each fixed graph, and tail statistics of `e(t)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::flow::{self, ContinuousConfig, Scheme, Trajectory};
use crate::graph::{self, Graph};
use crate::linalg;
use crate::problem::NetworkLinearEquation;
use crate::spectral::{self, AssembledFlow};

pub const DEFAULT_TAIL_FRACTION: f64 = 0.2;
const ALIGN_TOL: f64 = 1e-12;
const MEMBERSHIP_TOL: f64 = 1e-8;

/// Graph `⌊t/T⌋ mod len` is active on `[kT, (k+1)T)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSignal {
    pub period: f64,
    pub graphs: Vec<Graph>,
}

impl SwitchingSignal {
    pub fn new(period: f64, graphs: Vec<Graph>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidParameter(format!("period must be positive, got {period}")));
        }
        let Some(first) = graphs.first() else {
            return Err(Error::InvalidParameter("switching signal needs at least one graph".into()));
        };
        let n = first.n_nodes();
        if graphs.iter().any(|g| g.n_nodes() != n) {
            return Err(Error::DimensionMismatch("switching graphs differ in node count".into()));
        }
        Ok(Self { period, graphs })
    }

    pub fn active(&self, t: f64) -> usize {
        ((t / self.period).floor() as usize) % self.graphs.len()
    }
}

/// Whole number of steps per period, or `StepAlignment`.
pub fn steps_per_period(step: f64, period: f64) -> Result<usize> {
    let k = (period / step).round();
    if k < 1.0 || (k * step - period).abs() > ALIGN_TOL * period.max(1.0) {
        return Err(Error::StepAlignment { step, period });
    }
    Ok(k as usize)
}

pub fn simulate_switching(
    problem: &NetworkLinearEquation,
    signal: &SwitchingSignal,
    x0: &DVector<f64>,
    v0: &DVector<f64>,
    config: &ContinuousConfig,
) -> Result<Trajectory> {
    config.validate()?;
    let per = steps_per_period(config.step, signal.period)?;
    let periods = config.t_end / signal.period;
    if (periods - periods.round()).abs() > 1e-9 * periods.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "t_end {} is not a whole number of periods {}",
            config.t_end, signal.period
        )));
    }
    let flows: Vec<AssembledFlow> = signal
        .graphs
        .iter()
        .map(|g| spectral::assemble(problem, g))
        .collect::<Result<_>>()?;
    let first = &flows[0];
    flow::check_initial(first, x0, v0)?;

    let h = config.step;
    let steps = config.n_steps();
    let mut traj = Trajectory {
        samples: vec![flow::sample(first, 0.0, x0, v0)],
        scheme: Scheme::Rk4,
        step: h,
        n: first.n,
        m: first.m,
        label: "switching".to_string(),
    };
    let (mut x, mut v) = (x0.clone(), v0.clone());
    for k in 1..=steps {
        let active = &flows[((k - 1) / per) % flows.len()];
        (x, v) = flow::rk4_step(active, 0.0, &x, &v, h);
        let t = k as f64 * h;
        if flow::blown_up(&x, &v) {
            traj.samples.push(flow::sample(first, t, &x, &v));
            return Err(Error::Diverged {
                at: t,
                partial: Box::new(traj),
            });
        }
        if k % config.record_every == 0 || k == steps {
            traj.samples.push(flow::sample(first, t, &x, &v));
        }
    }
    Ok(traj)
}

/// `{base_point + span_basis · k}`
#[derive(Debug, Clone)]
pub struct LimitSet {
    pub base_point: DVector<f64>,
    pub span_basis: DMatrix<f64>,
}

impl LimitSet {
    pub fn dim(&self) -> usize {
        self.span_basis.ncols()
    }

    /// Euclidean distance from `p` to the set.
    pub fn distance_to(&self, p: &DVector<f64>) -> f64 {
        let d = p - &self.base_point;
        let proj = &self.span_basis * (self.span_basis.transpose() * &d);
        (d - proj).norm()
    }

    pub fn contains(&self, p: &DVector<f64>) -> bool {
        self.distance_to(p) <= MEMBERSHIP_TOL * (1.0 + p.norm())
    }
}

pub fn limit_set(problem: &NetworkLinearEquation, graph: &Graph) -> Result<LimitSet> {
    let flow = spectral::assemble(problem, graph)?;
    let zero = spectral::zero_space_projector(&flow)?;
    let v_star = spectral::equilibrium_dual(&flow)?;
    let base_point = &v_star - &zero.projector * &v_star;
    Ok(LimitSet {
        base_point,
        span_basis: zero.range_basis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    pub intersect: bool,
    /// Smallest distance between the two sets; 0 when they meet.
    pub distance: f64,
}

/// Least-squares solve of `base_a + S_a u = base_b + S_b w`.
pub fn limit_sets_intersect(a: &LimitSet, b: &LimitSet) -> Result<Intersection> {
    let dim = a.base_point.len();
    if b.base_point.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "limit sets live in R^{dim} and R^{}",
            b.base_point.len()
        )));
    }
    let (ka, kb) = (a.dim(), b.dim());
    let mut sys = DMatrix::zeros(dim, ka + kb);
    sys.view_mut((0, 0), (dim, ka)).copy_from(&a.span_basis);
    sys.view_mut((0, ka), (dim, kb)).copy_from(&(-&b.span_basis));
    let diff = &b.base_point - &a.base_point;
    let residual = if ka + kb == 0 {
        diff.norm()
    } else {
        let uw = linalg::min_norm_solve(&sys, &diff, 1e-12);
        (&sys * uw - &diff).norm()
    };
    let intersect = residual <= 1e-6 * (1.0 + diff.norm());
    Ok(Intersection {
        intersect,
        distance: if intersect { 0.0 } else { residual },
    })
}

/// `sup e(t)` over the final `tail_fraction` of the recorded samples.
pub fn tail_sup_error(traj: &Trajectory, tail_fraction: f64) -> Result<f64> {
    if !(tail_fraction > 0.0 && tail_fraction < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction must lie in (0, 1), got {tail_fraction}"
        )));
    }
    let len = traj.samples.len();
    let start = ((1.0 - tail_fraction) * len as f64).floor() as usize;
    Ok(traj.samples[start.min(len - 1)..]
        .iter()
        .map(|s| s.error)
        .fold(0.0, f64::max))
}

/// Peak-to-peak range of `e(t)` over the final `tail_fraction` of samples.
pub fn tail_amplitude(traj: &Trajectory, tail_fraction: f64) -> f64 {
    flow::window_amplitude(&traj.errors(), 1.0 - tail_fraction, 1.0)
}

/// Normalised RMS mismatch between a uniformly sampled series and itself
/// shifted by `lag` samples.
pub fn lag_mismatch(series: &[f64], lag: usize) -> f64 {
    let n = series.len();
    if lag == 0 || lag >= n {
        return f64::INFINITY;
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    if var == 0.0 {
        return 0.0;
    }
    let ms = (0..n - lag).map(|i| (series[i + lag] - series[i]).powi(2)).sum::<f64>() / (n - lag) as f64;
    (ms / var).sqrt()
}

/// Fundamental period of `e(t)` over the second half of a run with uniform
/// sample spacing: the first local minimum of the lag mismatch after it
/// drops below 0.1. `None` when no such lag exists within half the window.
pub fn estimate_period(traj: &Trajectory) -> Option<f64> {
    let s = &traj.samples;
    if s.len() < 8 {
        return None;
    }
    let dt = s[1].t - s[0].t;
    let half: Vec<f64> = s[s.len() / 2..].iter().map(|p| p.error).collect();
    let max_lag = half.len() / 2;
    let d: Vec<f64> = (0..=max_lag + 1).map(|k| lag_mismatch(&half, k)).collect();
    let mut k = (1..=max_lag).find(|&k| d[k] < 0.1)?;
    while k < max_lag && d[k + 1] <= d[k] {
        k += 1;
    }
    Some(k as f64 * dt)
}

/// True when `graph`'s Laplacian eigenvector supports are all among
/// `allowed` (1-based node sets).
pub fn matches_support_fingerprint(graph: &Graph, allowed: &[Vec<usize>]) -> Result<bool> {
    let spec = graph::spectrum(&graph.laplacian())?;
    if !spec.is_simple() {
        return Ok(false);
    }
    let rep = graph::support_report(&spec);
    Ok(rep.supports.iter().all(|s| allowed.contains(s)))
}
