//! Run configuration: JSON parsing, schema validation and serialization.

use std::fmt;
use std::str::FromStr;

use lsqflow_core::Family;
use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Analyze,
    SolveLsq,
    SimulateCt,
    SimulateDt,
    SimulateSwitching,
    EpsilonStar,
    GraphFeasibility,
}

impl Mode {
    pub const ALL: [Mode; 7] = [
        Mode::Analyze,
        Mode::SolveLsq,
        Mode::SimulateCt,
        Mode::SimulateDt,
        Mode::SimulateSwitching,
        Mode::EpsilonStar,
        Mode::GraphFeasibility,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Analyze => "analyze",
            Mode::SolveLsq => "solve-lsq",
            Mode::SimulateCt => "simulate-ct",
            Mode::SimulateDt => "simulate-dt",
            Mode::SimulateSwitching => "simulate-switching",
            Mode::EpsilonStar => "epsilon-star",
            Mode::GraphFeasibility => "graph-feasibility",
        }
    }

    fn needs_problem(self) -> bool {
        self != Mode::GraphFeasibility
    }

    fn needs_graph(self) -> bool {
        matches!(self, Mode::Analyze | Mode::SimulateCt | Mode::SimulateDt | Mode::EpsilonStar)
    }

    fn simulates(self) -> bool {
        matches!(self, Mode::SimulateCt | Mode::SimulateDt | Mode::SimulateSwitching)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Mode::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown mode `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemSource {
    Inline { h: Vec<Vec<f64>>, z: Vec<f64> },
    /// JSON file with keys `H` and `z`, relative to the config file.
    File(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    Family { family: Family, n: usize },
    Custom { n: usize, edges: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSpec {
    pub period_t: f64,
    pub graphs: Vec<GraphSpec>,
    /// Allowed Laplacian eigenvector supports per graph, checked on load.
    pub expected_supports: Option<Vec<Vec<Vec<usize>>>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyRange {
    pub family: Family,
    pub n_min: usize,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Series {
    X { node: usize, comp: usize },
    V { node: usize, comp: usize },
    AllX,
    AllV,
    Error,
    Cost,
}

impl Series {
    pub fn name(&self) -> String {
        match self {
            Series::X { node, comp } => format!("x_{node}_{comp}"),
            Series::V { node, comp } => format!("v_{node}_{comp}"),
            Series::AllX => "x".into(),
            Series::AllV => "v".into(),
            Series::Error => "error".into(),
            Series::Cost => "cost".into(),
        }
    }
}

impl FromStr for Series {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "x" => return Ok(Series::AllX),
            "v" => return Ok(Series::AllV),
            "error" => return Ok(Series::Error),
            "cost" => return Ok(Series::Cost),
            _ => {}
        }
        let parts: Vec<&str> = s.split('_').collect();
        if let [block, node, comp] = parts[..] {
            let node: usize = node.parse().map_err(|_| format!("bad node index in `{s}`"))?;
            let comp: usize = comp.parse().map_err(|_| format!("bad component index in `{s}`"))?;
            if node == 0 || comp == 0 {
                return Err(format!("indices in `{s}` are 1-based"));
            }
            match block {
                "x" => return Ok(Series::X { node, comp }),
                "v" => return Ok(Series::V { node, comp }),
                _ => {}
            }
        }
        Err(format!("unknown series `{s}`"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub series: Vec<Series>,
    pub x_label: String,
    pub y_label: String,
    pub file: String,
}

impl PlotSpec {
    pub fn with_series(series: Vec<Series>) -> Self {
        Self {
            series,
            x_label: "t".into(),
            y_label: String::new(),
            file: "plot.svg".into(),
        }
    }

    /// Comma-separated series names, as given on the command line.
    pub fn parse_list(list: &str) -> Result<Vec<Series>, String> {
        list.split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(Series::from_str)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: Mode,
    pub problem: Option<ProblemSource>,
    pub graph: Option<GraphSpec>,
    pub switching: Option<SwitchingSpec>,
    pub x0: Option<Vec<f64>>,
    pub v0: Option<Vec<f64>>,
    pub step_h: f64,
    pub t_end: f64,
    pub record_every: usize,
    pub epsilon: Option<f64>,
    pub max_steps: usize,
    pub alpha: Option<f64>,
    pub tail_fraction: f64,
    pub families: Vec<FamilyRange>,
    pub csv: String,
    pub report: String,
    pub plot: Option<PlotSpec>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaError {
    pub path: String,
    pub reason: String,
}

impl fmt::Display for SchemaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.reason)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    ParseError { line: usize, column: usize, message: String },
    #[error("invalid configuration: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Schema(Vec<SchemaError>),
}

const KNOWN_KEYS: &[&str] = &[
    "mode", "H", "z", "problem_file", "graph", "period_T", "graphs", "expected_supports", "x0", "v0",
    "step_h", "t_end", "record_every", "epsilon", "max_steps", "alpha", "tail_fraction", "families",
    "csv", "report", "plot",
];

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    parse_config_with_mode(text, None)
}

/// Parses `text`; `mode` overrides the file's `"mode"` when given.
pub fn parse_config_with_mode(text: &str, mode: Option<Mode>) -> Result<RunConfig, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::ParseError {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let mut v = Validator::default();
    let Some(obj) = value.as_object() else {
        v.fail("", "configuration must be a JSON object");
        return Err(ConfigError::Schema(v.errors));
    };
    for key in obj.keys() {
        if !KNOWN_KEYS.contains(&key.as_str()) {
            v.fail(key, "unknown key");
        }
    }

    let mode = match mode {
        Some(m) => Some(m),
        None => match obj.get("mode") {
            None => {
                v.fail("mode", "required");
                None
            }
            Some(x) => match x.as_str().map(Mode::from_str) {
                Some(Ok(m)) => Some(m),
                Some(Err(e)) => v.fail_none("mode", &e),
                None => v.fail_none("mode", "must be a string"),
            },
        },
    };

    let problem = match (obj.get("problem_file"), obj.get("H"), obj.get("z")) {
        (Some(p), None, None) => p
            .as_str()
            .map(|s| ProblemSource::File(s.to_string()))
            .or_else(|| v.fail_none("problem_file", "must be a string")),
        (Some(_), _, _) => v.fail_none("problem_file", "give either problem_file or H and z, not both"),
        (None, h, z) => {
            let h = h.and_then(|h| v.matrix("H", h));
            let z = z.and_then(|z| v.numbers("z", z));
            if let (Some(rows), Some(z)) = (&h, &z) {
                if rows.len() != z.len() {
                    v.fail("z", &format!("has {} entries but H has {} rows", z.len(), rows.len()));
                }
            }
            match (h, z, obj.contains_key("H"), obj.contains_key("z")) {
                (Some(h), Some(z), _, _) => Some(ProblemSource::Inline { h, z }),
                (_, _, false, false) => None,
                (_, _, has_h, has_z) => {
                    if !has_h {
                        v.fail("H", "required");
                    }
                    if !has_z {
                        v.fail("z", "required");
                    }
                    None
                }
            }
        }
    };

    let graph = obj.get("graph").and_then(|g| v.graph("graph", g));
    let switching = match (obj.get("period_T"), obj.get("graphs")) {
        (None, None) => None,
        (p, g) => {
            let period = match p {
                Some(p) => v.positive("period_T", p),
                None => v.fail_none("period_T", "required"),
            };
            let graphs = match g {
                Some(Value::Array(items)) if !items.is_empty() => {
                    let parsed: Vec<Option<GraphSpec>> = items
                        .iter()
                        .enumerate()
                        .map(|(k, g)| v.graph(&format!("graphs[{k}]"), g))
                        .collect();
                    parsed.into_iter().collect::<Option<Vec<_>>>()
                }
                Some(_) => v.fail_none("graphs", "must be a non-empty array"),
                None => v.fail_none("graphs", "required"),
            };
            let expected = obj.get("expected_supports").and_then(|e| v.support_sets("expected_supports", e));
            if let (Some(e), Some(g)) = (&expected, &graphs) {
                if e.len() != g.len() {
                    v.fail("expected_supports", "needs one entry per graph");
                }
            }
            match (period, graphs) {
                (Some(period_t), Some(graphs)) => Some(SwitchingSpec {
                    period_t,
                    graphs,
                    expected_supports: expected,
                }),
                _ => None,
            }
        }
    };
    if switching.is_none() && obj.contains_key("expected_supports") {
        v.fail("expected_supports", "only valid with a switching signal");
    }

    let x0 = obj.get("x0").and_then(|x| v.numbers("x0", x));
    let v0 = obj.get("v0").and_then(|x| v.numbers("v0", x));
    let step_h = v.positive_or("step_h", obj.get("step_h"), lsqflow_core::flow::DEFAULT_STEP);
    let t_end = v.positive_or("t_end", obj.get("t_end"), lsqflow_core::flow::DEFAULT_T_END);
    let record_every = v.count_or("record_every", obj.get("record_every"), 20);
    let epsilon = obj.get("epsilon").and_then(|e| v.positive("epsilon", e));
    let max_steps = v.count_or("max_steps", obj.get("max_steps"), lsqflow_core::flow::DEFAULT_MAX_STEPS);
    let alpha = obj.get("alpha").and_then(|a| v.positive("alpha", a));
    let tail_fraction = v.positive_or("tail_fraction", obj.get("tail_fraction"), 0.2);
    if tail_fraction >= 1.0 {
        v.fail("tail_fraction", "must be below 1");
    }
    let families = match obj.get("families") {
        None => Vec::new(),
        Some(Value::Array(items)) => items
            .iter()
            .enumerate()
            .filter_map(|(k, f)| v.family_range(&format!("families[{k}]"), f))
            .collect(),
        Some(_) => {
            v.fail("families", "must be an array");
            Vec::new()
        }
    };
    let csv = v.string_or("csv", obj.get("csv"), "trajectory.csv");
    let report = v.string_or("report", obj.get("report"), "report.json");
    let plot = obj.get("plot").and_then(|p| v.plot("plot", p));

    if let Some(mode) = mode {
        if mode.needs_problem() && problem.is_none() && !obj.contains_key("H") && !obj.contains_key("z") {
            v.fail("z", "required");
            v.fail("H", "required");
        }
        if mode.needs_graph() && !obj.contains_key("graph") {
            v.fail("graph", "required");
        }
        if mode == Mode::SimulateSwitching && !obj.contains_key("period_T") && !obj.contains_key("graphs") {
            v.fail("period_T", "required");
            v.fail("graphs", "required");
        }
        if mode.simulates() && !obj.contains_key("x0") {
            v.fail("x0", "required");
        }
        if mode == Mode::SimulateDt && !obj.contains_key("epsilon") {
            v.fail("epsilon", "required");
        }
        if mode == Mode::GraphFeasibility && families.is_empty() && !obj.contains_key("families") {
            v.fail("families", "required");
        }
    }

    if !v.errors.is_empty() {
        v.errors.sort_by(|a, b| a.path.cmp(&b.path).then(a.reason.cmp(&b.reason)));
        v.errors.dedup();
        return Err(ConfigError::Schema(v.errors));
    }
    Ok(RunConfig {
        mode: mode.expect("mode validated"),
        problem,
        graph,
        switching,
        x0,
        v0,
        step_h,
        t_end,
        record_every,
        epsilon,
        max_steps,
        alpha,
        tail_fraction,
        families,
        csv,
        report,
        plot,
    })
}

#[derive(Default)]
struct Validator {
    errors: Vec<SchemaError>,
}

impl Validator {
    fn fail(&mut self, path: &str, reason: &str) {
        self.errors.push(SchemaError {
            path: path.to_string(),
            reason: reason.to_string(),
        });
    }

    fn fail_none<T>(&mut self, path: &str, reason: &str) -> Option<T> {
        self.fail(path, reason);
        None
    }

    fn number(&mut self, path: &str, v: &Value) -> Option<f64> {
        match v.as_f64() {
            Some(x) if x.is_finite() => Some(x),
            _ => self.fail_none(path, "must be a number"),
        }
    }

    fn positive(&mut self, path: &str, v: &Value) -> Option<f64> {
        let x = self.number(path, v)?;
        if x > 0.0 {
            Some(x)
        } else {
            self.fail_none(path, "must be positive")
        }
    }

    fn positive_or(&mut self, path: &str, v: Option<&Value>, default: f64) -> f64 {
        match v {
            None => default,
            Some(v) => self.positive(path, v).unwrap_or(default),
        }
    }

    fn count(&mut self, path: &str, v: &Value) -> Option<usize> {
        match v.as_u64() {
            Some(0) => self.fail_none(path, "must be positive"),
            Some(k) => Some(k as usize),
            None if v.as_f64().is_some_and(|x| x <= 0.0) => self.fail_none(path, "must be positive"),
            None => self.fail_none(path, "must be a positive integer"),
        }
    }

    fn count_or(&mut self, path: &str, v: Option<&Value>, default: usize) -> usize {
        match v {
            None => default,
            Some(v) => self.count(path, v).unwrap_or(default),
        }
    }

    fn string_or(&mut self, path: &str, v: Option<&Value>, default: &str) -> String {
        match v {
            None => default.to_string(),
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            Some(_) => {
                self.fail(path, "must be a non-empty string");
                default.to_string()
            }
        }
    }

    fn numbers(&mut self, path: &str, v: &Value) -> Option<Vec<f64>> {
        let Some(items) = v.as_array() else {
            return self.fail_none(path, "must be an array of numbers");
        };
        let out: Vec<Option<f64>> = items
            .iter()
            .enumerate()
            .map(|(k, x)| self.number(&format!("{path}[{k}]"), x))
            .collect();
        out.into_iter().collect()
    }

    fn matrix(&mut self, path: &str, v: &Value) -> Option<Vec<Vec<f64>>> {
        let Some(rows) = v.as_array() else {
            return self.fail_none(path, "must be an array of rows");
        };
        if rows.is_empty() {
            return self.fail_none(path, "must have at least one row");
        }
        let parsed: Vec<Option<Vec<f64>>> = rows
            .iter()
            .enumerate()
            .map(|(k, r)| self.numbers(&format!("{path}[{k}]"), r))
            .collect();
        let parsed: Vec<Vec<f64>> = parsed.into_iter().collect::<Option<_>>()?;
        let m = parsed[0].len();
        if m == 0 {
            return self.fail_none(path, "rows must be non-empty");
        }
        if let Some(k) = parsed.iter().position(|r| r.len() != m) {
            return self.fail_none(&format!("{path}[{k}]"), &format!("expected {m} entries"));
        }
        Some(parsed)
    }

    fn index(&mut self, path: &str, v: &Value) -> Option<usize> {
        match v.as_u64() {
            Some(k) if k >= 1 => Some(k as usize),
            _ => self.fail_none(path, "must be a 1-based node index"),
        }
    }

    fn family(&mut self, path: &str, v: Option<&Value>) -> Option<Family> {
        match v.and_then(Value::as_str) {
            Some("path") => Some(Family::Path),
            Some("ring") => Some(Family::Ring),
            Some("star") => Some(Family::Star),
            Some("complete") => Some(Family::Complete),
            Some(other) => self.fail_none(path, &format!("unknown graph type `{other}`")),
            None => self.fail_none(path, "required"),
        }
    }

    fn graph(&mut self, path: &str, v: &Value) -> Option<GraphSpec> {
        let Some(obj) = v.as_object() else {
            return self.fail_none(path, "must be an object");
        };
        let n = match obj.get("n") {
            Some(n) => self.count(&format!("{path}.n"), n),
            None => self.fail_none(&format!("{path}.n"), "required"),
        };
        if obj.get("type").and_then(Value::as_str) == Some("custom") {
            let edges = match obj.get("edges").and_then(Value::as_array) {
                Some(items) => {
                    let parsed: Vec<Option<(usize, usize)>> = items
                        .iter()
                        .enumerate()
                        .map(|(k, e)| {
                            let p = format!("{path}.edges[{k}]");
                            match e.as_array().map(Vec::as_slice) {
                                Some([a, b]) => {
                                    let a = self.index(&p, a);
                                    let b = self.index(&p, b);
                                    a.zip(b)
                                }
                                _ => self.fail_none(&p, "must be a pair of node indices"),
                            }
                        })
                        .collect();
                    parsed.into_iter().collect::<Option<Vec<_>>>()
                }
                None => self.fail_none(&format!("{path}.edges"), "required for custom graphs"),
            };
            return Some(GraphSpec::Custom { n: n?, edges: edges? });
        }
        let family = self.family(&format!("{path}.type"), obj.get("type"));
        Some(GraphSpec::Family { family: family?, n: n? })
    }

    fn family_range(&mut self, path: &str, v: &Value) -> Option<FamilyRange> {
        let Some(obj) = v.as_object() else {
            return self.fail_none(path, "must be an object");
        };
        let family = self.family(&format!("{path}.type"), obj.get("type"));
        let n_min = match obj.get("n_min") {
            Some(x) => self.count(&format!("{path}.n_min"), x),
            None => self.fail_none(&format!("{path}.n_min"), "required"),
        };
        let n_max = match obj.get("n_max") {
            Some(x) => self.count(&format!("{path}.n_max"), x),
            None => n_min,
        };
        let (family, n_min, n_max) = (family?, n_min?, n_max?);
        if n_max < n_min {
            return self.fail_none(&format!("{path}.n_max"), "must be at least n_min");
        }
        Some(FamilyRange { family, n_min, n_max })
    }

    fn support_sets(&mut self, path: &str, v: &Value) -> Option<Vec<Vec<Vec<usize>>>> {
        let Some(per_graph) = v.as_array() else {
            return self.fail_none(path, "must be an array with one list of supports per graph");
        };
        let mut out = Vec::new();
        for (g, sets) in per_graph.iter().enumerate() {
            let Some(sets) = sets.as_array() else {
                return self.fail_none(&format!("{path}[{g}]"), "must be an array of node sets");
            };
            let mut group = Vec::new();
            for (k, set) in sets.iter().enumerate() {
                let p = format!("{path}[{g}][{k}]");
                let Some(items) = set.as_array() else {
                    return self.fail_none(&p, "must be an array of node indices");
                };
                let mut nodes: Vec<usize> = items.iter().filter_map(|x| self.index(&p, x)).collect();
                nodes.sort_unstable();
                group.push(nodes);
            }
            out.push(group);
        }
        Some(out)
    }

    fn plot(&mut self, path: &str, v: &Value) -> Option<PlotSpec> {
        let Some(obj) = v.as_object() else {
            return self.fail_none(path, "must be an object");
        };
        let series = match obj.get("series").and_then(Value::as_array) {
            Some(items) => {
                let parsed: Vec<Option<Series>> = items
                    .iter()
                    .enumerate()
                    .map(|(k, s)| match s.as_str().map(Series::from_str) {
                        Some(Ok(s)) => Some(s),
                        Some(Err(e)) => self.fail_none(&format!("{path}.series[{k}]"), &e),
                        None => self.fail_none(&format!("{path}.series[{k}]"), "must be a string"),
                    })
                    .collect();
                parsed.into_iter().collect::<Option<Vec<_>>>()?
            }
            None => return self.fail_none(&format!("{path}.series"), "required"),
        };
        let mut spec = PlotSpec::with_series(series);
        spec.x_label = self.string_or(&format!("{path}.x_label"), obj.get("x_label"), &spec.x_label);
        if let Some(y) = obj.get("y_label") {
            match y.as_str() {
                Some(s) => spec.y_label = s.to_string(),
                None => self.fail(&format!("{path}.y_label"), "must be a string"),
            }
        }
        spec.file = self.string_or(&format!("{path}.file"), obj.get("file"), &spec.file);
        Some(spec)
    }
}

fn graph_json(g: &GraphSpec) -> Value {
    match g {
        GraphSpec::Family { family, n } => json!({"type": family.to_string(), "n": n}),
        GraphSpec::Custom { n, edges } => json!({
            "type": "custom",
            "n": n,
            "edges": edges.iter().map(|&(a, b)| json!([a, b])).collect::<Vec<_>>(),
        }),
    }
}

impl RunConfig {
    /// Canonical JSON form; `parse_config` reads it back to an equal value.
    pub fn to_json(&self) -> Value {
        let mut o = Map::new();
        o.insert("mode".into(), json!(self.mode.as_str()));
        match &self.problem {
            Some(ProblemSource::Inline { h, z }) => {
                o.insert("H".into(), json!(h));
                o.insert("z".into(), json!(z));
            }
            Some(ProblemSource::File(p)) => {
                o.insert("problem_file".into(), json!(p));
            }
            None => {}
        }
        if let Some(g) = &self.graph {
            o.insert("graph".into(), graph_json(g));
        }
        if let Some(s) = &self.switching {
            o.insert("period_T".into(), json!(s.period_t));
            o.insert("graphs".into(), Value::Array(s.graphs.iter().map(graph_json).collect()));
            if let Some(e) = &s.expected_supports {
                o.insert("expected_supports".into(), json!(e));
            }
        }
        if let Some(x) = &self.x0 {
            o.insert("x0".into(), json!(x));
        }
        if let Some(x) = &self.v0 {
            o.insert("v0".into(), json!(x));
        }
        o.insert("step_h".into(), json!(self.step_h));
        o.insert("t_end".into(), json!(self.t_end));
        o.insert("record_every".into(), json!(self.record_every));
        if let Some(e) = self.epsilon {
            o.insert("epsilon".into(), json!(e));
        }
        o.insert("max_steps".into(), json!(self.max_steps));
        if let Some(a) = self.alpha {
            o.insert("alpha".into(), json!(a));
        }
        o.insert("tail_fraction".into(), json!(self.tail_fraction));
        if !self.families.is_empty() {
            let fams: Vec<Value> = self
                .families
                .iter()
                .map(|f| json!({"type": f.family.to_string(), "n_min": f.n_min, "n_max": f.n_max}))
                .collect();
            o.insert("families".into(), Value::Array(fams));
        }
        o.insert("csv".into(), json!(self.csv));
        o.insert("report".into(), json!(self.report));
        if let Some(p) = &self.plot {
            o.insert(
                "plot".into(),
                json!({
                    "series": p.series.iter().map(Series::name).collect::<Vec<_>>(),
                    "x_label": p.x_label,
                    "y_label": p.y_label,
                    "file": p.file,
                }),
            );
        }
        Value::Object(o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema_errors(text: &str) -> Vec<SchemaError> {
        match parse_config(text) {
            Err(ConfigError::Schema(e)) => e,
            other => panic!("expected schema errors, got {other:?}"),
        }
    }

    fn has(errors: &[SchemaError], path: &str, reason: &str) -> bool {
        errors.iter().any(|e| e.path == path && e.reason == reason)
    }

    #[test]
    fn malformed_json_reports_position() {
        let err = parse_config("{\n  \"mode\": \"analyze\",\n  oops\n}").unwrap_err();
        assert!(matches!(err, ConfigError::ParseError { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn negative_period_and_missing_z() {
        let e = schema_errors(
            r#"{"mode": "simulate-switching", "H": [[1,0],[0,1],[1,1]], "period_T": -1,
                "graphs": [{"type": "path", "n": 3}], "x0": [0,0,0,0,0,0]}"#,
        );
        assert!(has(&e, "period_T", "must be positive"));
        assert!(has(&e, "z", "required"));
    }

    #[test]
    fn collects_every_violation() {
        let e = schema_errors(
            r#"{"mode": "simulate-dt", "H": [[1,0],[0,1,2]], "z": [1, "a"],
                "graph": {"type": "hexagon", "n": 0}, "step_h": 0, "colour": 1}"#,
        );
        for (p, r) in [
            ("H[1]", "expected 2 entries"),
            ("z[1]", "must be a number"),
            ("graph.type", "unknown graph type `hexagon`"),
            ("graph.n", "must be positive"),
            ("step_h", "must be positive"),
            ("colour", "unknown key"),
            ("x0", "required"),
            ("epsilon", "required"),
        ] {
            assert!(has(&e, p, r), "missing {p}: {r} in {e:?}");
        }
    }

    #[test]
    fn defaults_and_round_trip() {
        let c = parse_config(
            r#"{"mode": "simulate-ct", "H": [[0,1],[3,0],[2,0],[1,0]], "z": [-1,0,-2,2],
                "graph": {"type": "custom", "n": 4, "edges": [[1,2],[1,3],[3,4]]},
                "x0": [-2,-0.5,-1.8,-1.5,1.8,-0.6,1.9,-1.4],
                "plot": {"series": ["x", "error"]}}"#,
        )
        .unwrap();
        assert_eq!(c.step_h, 0.005);
        assert_eq!(c.t_end, 200.0);
        assert_eq!(c.max_steps, 40_000);
        assert_eq!(c.csv, "trajectory.csv");
        let again = parse_config(&c.to_json().to_string()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn fixtures_round_trip() {
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
        let mut seen = 0;
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.extension().is_some_and(|e| e == "json") {
                let c = parse_config(&std::fs::read_to_string(&path).unwrap()).unwrap();
                assert_eq!(parse_config(&c.to_json().to_string()).unwrap(), c, "{}", path.display());
                seen += 1;
            }
        }
        assert!(seen >= 13);
        let ex1 = parse_config(include_str!("../fixtures/example1.json")).unwrap();
        assert_eq!(ex1.mode, Mode::SimulateCt);
        assert_eq!((ex1.step_h, ex1.t_end), (0.005, 200.0));
    }

    #[test]
    fn mode_override() {
        let text = r#"{"mode": "analyze", "H": [[1],[2]], "z": [1,2], "graph": {"type": "path", "n": 3}}"#;
        let c = parse_config_with_mode(text, Some(Mode::EpsilonStar)).unwrap();
        assert_eq!(c.mode, Mode::EpsilonStar);
        let e = schema_errors(r#"{"mode": "fly"}"#);
        assert!(has(&e, "mode", "unknown mode `fly`"));
    }

    #[test]
    fn series_names() {
        assert_eq!("x_2_1".parse::<Series>().unwrap(), Series::X { node: 2, comp: 1 });
        assert_eq!("v_10_3".parse::<Series>().unwrap(), Series::V { node: 10, comp: 3 });
        assert!("x_0_1".parse::<Series>().is_err());
        assert!("y_1_1".parse::<Series>().is_err());
        assert_eq!(PlotSpec::parse_list("x_1_2, error").unwrap().len(), 2);
    }
}
