//! Command-line front end: argument parsing, config loading and the error
//! envelope, separated from `main` so it can be driven in-process.

use std::path::PathBuf;

use clap::Parser;
use serde_json::{json, Value};

use crate::config::{parse_config_with_mode, ConfigError, Mode, PlotSpec};
use crate::run::{run, RunContext};

#[derive(Parser)]
#[command(name = "lsqflow", version, about = "Distributed least-squares network flows")]
struct Cli {
    /// analyze | solve-lsq | simulate-ct | simulate-dt | simulate-switching | epsilon-star | graph-feasibility
    #[arg(value_parser = |s: &str| s.parse::<Mode>())]
    mode: Mode,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Comma-separated series to plot, e.g. `x_1_2,x_2_2` or `error`
    #[arg(long)]
    plot: Option<String>,
}

#[derive(Debug)]
pub struct CliOutput {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

fn failure(envelope: Value) -> CliOutput {
    CliOutput {
        code: 1,
        stdout: String::new(),
        stderr: format!("{envelope}\n"),
    }
}

/// Runs one invocation; `args` includes the program name.
pub fn cli_main<I, S>(args: I) -> CliOutput
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                CliOutput { code, stdout: text, stderr: String::new() }
            } else {
                failure(json!({"error": {"kind": "Usage", "message": text}}))
            };
        }
    };
    let text = match std::fs::read_to_string(&cli.config) {
        Ok(t) => t,
        Err(e) => {
            return failure(json!({"error": {"kind": "Io", "message": format!("{}: {e}", cli.config.display())}}))
        }
    };
    let config = match parse_config_with_mode(&text, Some(cli.mode)) {
        Ok(c) => c,
        Err(ConfigError::ParseError { line, column, message }) => {
            return failure(json!({"error": {"kind": "ParseError", "line": line, "column": column, "message": message}}))
        }
        Err(ConfigError::Schema(errors)) => {
            let list: Vec<Value> = errors.iter().map(|e| json!({"path": e.path, "reason": e.reason})).collect();
            return failure(json!({"error": {"kind": "SchemaError", "violations": list}}));
        }
    };
    let base = cli.config.parent().map(PathBuf::from).unwrap_or_default();
    let mut ctx = match RunContext::new(base, cli.out).seed_from_env() {
        Ok(c) => c,
        Err(e) => return failure(e.envelope()),
    };
    if let Some(list) = &cli.plot {
        match PlotSpec::parse_list(list) {
            Ok(series) => ctx.plot_override = Some(series),
            Err(e) => return failure(json!({"error": {"kind": "InvalidPlot", "message": e}})),
        }
    }
    let outcome = run(&config, &ctx);
    CliOutput {
        code: outcome.exit_code as u8,
        stdout: outcome.stdout,
        stderr: outcome.error.map(|e| format!("{}\n", e.envelope())).unwrap_or_default(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(name: &str) -> String {
        format!("{}/fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
    }

    fn invoke(args: &[&str]) -> CliOutput {
        cli_main(std::iter::once("lsqflow").chain(args.iter().copied()))
    }

    #[test]
    fn simulate_with_plot_override() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let r = invoke(&["simulate-ct", "--config", &fixture("example1.json"), "--out", out, "--plot", "x_1_1,error"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        assert!(r.stdout.starts_with("final error: "));
        let svg = std::fs::read_to_string(dir.path().join("example1.svg")).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(dir.path().join("example1.csv").exists());
    }

    #[test]
    fn divergence_envelope_on_stderr() {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().to_str().unwrap();
        let r = invoke(&["simulate-dt", "--config", &fixture("example3_diverge.json"), "--out", out]);
        assert_eq!(r.code, 2);
        let env: Value = serde_json::from_str(r.stderr.trim()).unwrap();
        assert_eq!(env["error"]["kind"], "Diverged");
    }

    #[test]
    fn schema_errors_listed_together() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("bad.json");
        std::fs::write(&cfg, r#"{"H": [[1, 0], [0, 1]], "period_T": -1, "graphs": [{"type": "path", "n": 2}]}"#).unwrap();
        let r = invoke(&["simulate-switching", "--config", cfg.to_str().unwrap()]);
        assert_eq!(r.code, 1);
        let env: Value = serde_json::from_str(r.stderr.trim()).unwrap();
        assert_eq!(env["error"]["kind"], "SchemaError");
        let paths: Vec<&str> = env["error"]["violations"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v["path"].as_str().unwrap())
            .collect();
        for p in ["z", "period_T", "x0"] {
            assert!(paths.contains(&p), "{paths:?}");
        }
    }

    #[test]
    fn parse_error_has_position() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("broken.json");
        std::fs::write(&cfg, "{\n  \"mode\": \"analyze\",\n  oops\n}").unwrap();
        let r = invoke(&["analyze", "--config", cfg.to_str().unwrap()]);
        let env: Value = serde_json::from_str(r.stderr.trim()).unwrap();
        assert_eq!(env["error"]["kind"], "ParseError");
        assert_eq!(env["error"]["line"], 3);
    }

    #[test]
    fn unknown_mode_and_missing_config() {
        assert_eq!(invoke(&["plot-everything", "--config", "x.json"]).code, 1);
        let r = invoke(&["analyze", "--config", "/nonexistent/cfg.json"]);
        assert_eq!(r.code, 1);
        assert!(r.stderr.contains("\"Io\""));
    }
}
