//! Mode dispatch: loads the problem and graphs, calls into the core library
//! and writes artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use lsqflow_core::flow::{self, ContinuousConfig, DiscreteConfig};
use lsqflow_core::graph::{self, family_min_support};
use lsqflow_core::spectral::{self, Witness};
use lsqflow_core::switching::{self, SwitchingSignal};
use lsqflow_core::{problem, Error, Graph, NetworkLinearEquation, Trajectory};
use nalgebra::{DMatrix, DVector};
use serde_json::{json, Value};

use crate::config::{GraphSpec, Mode, PlotSpec, ProblemSource, RunConfig, Series};
use crate::csv;
use crate::plot::{self, PlotError};

pub const SEED_VAR: &str = "LSQFLOW_SEED";

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error(transparent)]
    Plot(#[from] PlotError),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("problem file {path}: {message}")]
    ProblemFile { path: PathBuf, message: String },
    #[error("graph {index} does not show the expected eigenvector supports")]
    Fingerprint { index: usize },
    #[error("{0}")]
    Invalid(String),
}

impl RunError {
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Core(e) => match e {
                Error::RankDeficient { .. } => "RankDeficient",
                Error::InvalidProblem(_) => "InvalidProblem",
                Error::InvalidNode { .. } => "InvalidNode",
                Error::InvalidGraph(_) => "InvalidGraph",
                Error::TooSmall(_) => "TooSmall",
                Error::Disconnected => "Disconnected",
                Error::NotCharacterized { .. } => "NotCharacterized",
                Error::DimensionMismatch(_) => "DimensionMismatch",
                Error::NumericalFailure(_) => "NumericalFailure",
                Error::NotApplicable(_) => "NotApplicable",
                Error::InternalInconsistency(_) => "InternalInconsistency",
                Error::NoStableModes => "NoStableModes",
                Error::ConditionViolated => "ConditionViolated",
                Error::EquilibriumInfeasible { .. } => "EquilibriumInfeasible",
                Error::Diverged { .. } => "Diverged",
                Error::StepAlignment { .. } => "StepAlignment",
                Error::InvalidParameter(_) => "InvalidParameter",
            },
            RunError::Plot(PlotError::NothingToPlot) => "NothingToPlot",
            RunError::Plot(_) => "InvalidPlot",
            RunError::Io { .. } => "Io",
            RunError::ProblemFile { .. } => "ProblemFile",
            RunError::Fingerprint { .. } => "FingerprintMismatch",
            RunError::Invalid(_) => "Invalid",
        }
    }

    /// Machine-readable error envelope.
    pub fn envelope(&self) -> Value {
        let mut e = json!({"kind": self.kind(), "message": self.to_string()});
        if let RunError::Core(Error::Diverged { at, .. }) = self {
            e["at"] = json!(at);
        }
        json!({ "error": e })
    }
}

#[derive(Debug, Clone, Default)]
pub struct RunContext {
    /// Directory relative paths in the config (problem files) resolve against.
    pub base_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: Option<u64>,
    /// Series given with `--plot`, replacing the config's selection.
    pub plot_override: Option<Vec<Series>>,
}

impl RunContext {
    pub fn new(base_dir: impl Into<PathBuf>, out_dir: impl Into<PathBuf>) -> Self {
        Self {
            base_dir: base_dir.into(),
            out_dir: out_dir.into(),
            ..Default::default()
        }
    }

    /// Reads the seed from `LSQFLOW_SEED` when set.
    pub fn seed_from_env(mut self) -> Result<Self, RunError> {
        if let Ok(s) = std::env::var(SEED_VAR) {
            self.seed = Some(parse_seed(&s)?);
        }
        Ok(self)
    }
}

pub fn parse_seed(s: &str) -> Result<u64, RunError> {
    s.trim()
        .parse()
        .map_err(|_| RunError::Invalid(format!("{SEED_VAR} must be an unsigned integer, got `{s}`")))
}

#[derive(Debug)]
pub struct RunOutcome {
    pub exit_code: i32,
    pub stdout: String,
    pub artifacts: Vec<PathBuf>,
    pub error: Option<RunError>,
}

pub fn run(config: &RunConfig, ctx: &RunContext) -> RunOutcome {
    let mut out = RunOutcome {
        exit_code: 0,
        stdout: String::new(),
        artifacts: Vec::new(),
        error: None,
    };
    if let Err(e) = dispatch(config, ctx, &mut out) {
        out.exit_code = if matches!(e, RunError::Core(Error::Diverged { .. })) { 2 } else { 1 };
        out.error = Some(e);
    }
    out
}

fn dispatch(config: &RunConfig, ctx: &RunContext, out: &mut RunOutcome) -> Result<(), RunError> {
    fs::create_dir_all(&ctx.out_dir).map_err(|e| io_err(&ctx.out_dir, e))?;
    match config.mode {
        Mode::SolveLsq => {
            let p = load_problem(config, ctx)?;
            let sol = problem::solve_least_squares(&p)?;
            let report = json!({
                "y_star": vec_json(&sol.y_star),
                "residual": vec_json(&sol.residual),
                "objective": sol.objective,
            });
            write_json(ctx, &config.report, &report, out)?;
            out.stdout = format!("{}\n", serde_json::to_string(&vec_json(&sol.y_star)).unwrap());
        }
        Mode::Analyze => {
            let p = load_problem(config, ctx)?;
            let g = build_graph(required_graph(config)?)?;
            let a = spectral::analyze(&p, &g)?;
            let supports = graph::support_report_seeded(&a.laplacian, seed(ctx));
            let report = json!({
                "verdict": {
                    "holds": a.verdict.holds,
                    "method": a.verdict.method.as_str(),
                    "witness": a.verdict.witness.as_ref().map(witness_json),
                },
                "laplacian_eigenvalues": a.laplacian.eigenvalues,
                "supports": supports.supports,
                "min_support": supports.min_support,
                "simple_spectrum": supports.simple_spectrum,
                "m_eigenvalues": a.report.m_eigenvalues.iter().map(|l| json!([l.re, l.im])).collect::<Vec<_>>(),
                "epsilon_star": a.report.epsilon_star,
                "zero_space_dim": a.report.zero_space_dim,
                "projector_W": a.report.projector_w.as_ref().map(mat_json),
                "y_star": vec_json(&a.flow.y_star),
            });
            write_json(ctx, &config.report, &report, out)?;
            out.stdout = format!(
                "condition holds: {}\nepsilon*: {}\n",
                a.verdict.holds,
                a.report.epsilon_star.map_or("none".to_string(), |e| e.to_string())
            );
        }
        Mode::EpsilonStar => {
            let p = load_problem(config, ctx)?;
            let g = build_graph(required_graph(config)?)?;
            let e = spectral::epsilon_star(&spectral::assemble(&p, &g)?)?;
            out.stdout = format!("{e}\n");
        }
        Mode::GraphFeasibility => {
            let mut rows = Vec::new();
            let mut table = String::from("family n min_support closed_form\n");
            for r in &config.families {
                for n in r.n_min..=r.n_max {
                    let g = Graph::family(r.family, n)?;
                    let spec = graph::spectrum(&g.laplacian())?;
                    let min = graph::support_report_seeded(&spec, seed(ctx)).min_support;
                    let closed = match family_min_support(r.family, n) {
                        Ok(v) => Some(v),
                        Err(Error::NotCharacterized { .. }) => None,
                        Err(e) => return Err(e.into()),
                    };
                    table.push_str(&format!(
                        "{} {n} {min} {}\n",
                        r.family,
                        closed.map_or("-".to_string(), |c| c.to_string())
                    ));
                    rows.push(json!({"family": r.family.to_string(), "n": n, "min_support": min, "closed_form": closed}));
                }
            }
            write_json(ctx, &config.report, &json!({ "rows": rows }), out)?;
            out.stdout = table;
        }
        Mode::SimulateCt | Mode::SimulateDt | Mode::SimulateSwitching => simulate(config, ctx, out)?,
    }
    Ok(())
}

fn simulate(config: &RunConfig, ctx: &RunContext, out: &mut RunOutcome) -> Result<(), RunError> {
    let p = load_problem(config, ctx)?;
    let nm = p.n_nodes() * p.dim();
    let x0 = DVector::from_vec(config.x0.clone().ok_or_else(|| RunError::Invalid("x0 is required".into()))?);
    let v0 = match &config.v0 {
        Some(v) => DVector::from_vec(v.clone()),
        None => DVector::zeros(nm),
    };
    let cont = ContinuousConfig {
        step: config.step_h,
        t_end: config.t_end,
        record_every: config.record_every,
    };
    let result = match config.mode {
        Mode::SimulateCt => {
            let g = build_graph(required_graph(config)?)?;
            let f = spectral::assemble(&p, &g)?;
            match config.alpha {
                Some(a) => flow::simulate_wang_elia(&f, a, &x0, &v0, &cont),
                None => flow::simulate_ct(&f, &x0, &v0, &cont),
            }
        }
        Mode::SimulateDt => {
            let g = build_graph(required_graph(config)?)?;
            let f = spectral::assemble(&p, &g)?;
            let dt = DiscreteConfig {
                epsilon: config.epsilon.ok_or_else(|| RunError::Invalid("epsilon is required".into()))?,
                max_steps: config.max_steps,
                record_every: config.record_every,
            };
            flow::simulate_dt(&f, &x0, &v0, &dt)
        }
        _ => {
            let spec = config
                .switching
                .as_ref()
                .ok_or_else(|| RunError::Invalid("period_T and graphs are required".into()))?;
            let graphs: Vec<Graph> = spec.graphs.iter().map(build_graph).collect::<Result<_, _>>()?;
            if let Some(expected) = &spec.expected_supports {
                for (k, (g, allowed)) in graphs.iter().zip(expected).enumerate() {
                    if !switching::matches_support_fingerprint(g, allowed)? {
                        return Err(RunError::Fingerprint { index: k + 1 });
                    }
                }
            }
            let signal = SwitchingSignal::new(spec.period_t, graphs)?;
            switching::simulate_switching(&p, &signal, &x0, &v0, &cont)
        }
    };
    match result {
        Ok(traj) => {
            write_trajectory(config, ctx, &traj, out)?;
            let summary = json!({
                "samples": traj.samples.len(),
                "final_time": traj.last().t,
                "final_error": traj.last().error,
                "tail_sup_error": switching::tail_sup_error(&traj, config.tail_fraction)?,
                "error_period": switching::estimate_period(&traj),
            });
            write_json(ctx, &config.report, &summary, out)?;
            out.stdout = format!("final error: {:e}\n", traj.last().error);
            Ok(())
        }
        Err(Error::Diverged { at, partial }) => {
            write_trajectory(config, ctx, &partial, out)?;
            Err(Error::Diverged { at, partial }.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn write_trajectory(config: &RunConfig, ctx: &RunContext, traj: &Trajectory, out: &mut RunOutcome) -> Result<(), RunError> {
    write_file(ctx, &config.csv, &csv::to_csv(traj), out)?;
    let spec = match (&ctx.plot_override, &config.plot) {
        (Some(series), Some(p)) => Some(PlotSpec {
            series: series.clone(),
            ..p.clone()
        }),
        (Some(series), None) => Some(PlotSpec::with_series(series.clone())),
        (None, p) => p.clone(),
    };
    if let Some(spec) = spec {
        let svg = plot::emit_plot(traj, &spec)?;
        write_file(ctx, &spec.file, &svg, out)?;
    }
    Ok(())
}

fn seed(ctx: &RunContext) -> u64 {
    ctx.seed.unwrap_or(graph::DEFAULT_SAMPLE_SEED)
}

fn required_graph(config: &RunConfig) -> Result<&GraphSpec, RunError> {
    config
        .graph
        .as_ref()
        .ok_or_else(|| RunError::Invalid(format!("mode {} needs a graph", config.mode)))
}

pub fn build_graph(spec: &GraphSpec) -> Result<Graph, RunError> {
    Ok(match spec {
        GraphSpec::Family { family, n } => Graph::family(*family, *n)?,
        GraphSpec::Custom { n, edges } => Graph::new(*n, edges)?,
    })
}

pub fn load_problem(config: &RunConfig, ctx: &RunContext) -> Result<NetworkLinearEquation, RunError> {
    match config.problem.as_ref() {
        Some(ProblemSource::Inline { h, z }) => Ok(NetworkLinearEquation::from_rows(h, z)?),
        Some(ProblemSource::File(rel)) => {
            let path = ctx.base_dir.join(rel);
            let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
            let bad = |message: String| RunError::ProblemFile {
                path: path.clone(),
                message,
            };
            let v: Value = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
            let h: Vec<Vec<f64>> = serde_json::from_value(v.get("H").cloned().ok_or_else(|| bad("H: required".into()))?)
                .map_err(|e| bad(format!("H: {e}")))?;
            let z: Vec<f64> = serde_json::from_value(v.get("z").cloned().ok_or_else(|| bad("z: required".into()))?)
                .map_err(|e| bad(format!("z: {e}")))?;
            Ok(NetworkLinearEquation::from_rows(&h, &z)?)
        }
        None => Err(RunError::Invalid(format!("mode {} needs a problem", config.mode))),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> RunError {
    RunError::Io {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

fn write_file(ctx: &RunContext, name: &str, content: &str, out: &mut RunOutcome) -> Result<(), RunError> {
    let path = ctx.out_dir.join(name);
    fs::write(&path, content).map_err(|e| io_err(&path, e))?;
    out.artifacts.push(path);
    Ok(())
}

fn write_json(ctx: &RunContext, name: &str, v: &Value, out: &mut RunOutcome) -> Result<(), RunError> {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    write_file(ctx, name, &text, out)
}

fn vec_json(v: &DVector<f64>) -> Vec<f64> {
    v.iter().copied().collect()
}

fn mat_json(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn witness_json(w: &Witness) -> Value {
    json!({
        "eigenvalue": w.eigenvalue,
        "support": w.support,
        "eta": vec_json(&w.eta),
        "span_dim": w.span_dim,
        "damping": w.damping,
        "alpha": vec_json(&w.alpha),
    })
}
