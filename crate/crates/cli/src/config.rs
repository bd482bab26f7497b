use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::{Command, Options};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Config(String),
    Library(dp_bounds::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "{s}"),
            CliError::Config(s) => write!(f, "config: {s}"),
            CliError::Library(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl From<dp_bounds::Error> for CliError {
    fn from(e: dp_bounds::Error) -> Self {
        CliError::Library(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

/// Fields that may hold a path to a separate JSON file instead of an object.
const COMPONENTS: [&str; 4] = ["universe", "mechanism", "model", "instantiation"];

/// Resolves `--config` / `--defaults` to one JSON object with components
/// inlined. Without either, the command's own default is used.
pub fn load(cmd: Command, opts: &Options) -> Result<Value, CliError> {
    let (mut cfg, base) = match (&opts.config, &opts.defaults) {
        (Some(c), _) if c.trim_start().starts_with('{') => (parse(c, "inline config")?, None),
        (Some(c), _) => {
            let path = PathBuf::from(c);
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let base = path.parent().map(Path::to_path_buf);
            (parse(&text, c)?, base)
        }
        (None, Some(name)) => (defaults(cmd, name)?, None),
        (None, None) => (defaults(cmd, default_name(cmd))?, None),
    };
    let obj = cfg
        .as_object_mut()
        .ok_or_else(|| CliError::Config("top level must be a JSON object".into()))?;
    for key in COMPONENTS {
        if let Some(Value::String(p)) = obj.get(key) {
            let path = match &base {
                Some(b) if Path::new(p).is_relative() => b.join(p),
                _ => PathBuf::from(p),
            };
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::Config(format!("{key} file {}: {e}", path.display())))?;
            obj.insert(key.to_string(), parse(&text, p)?);
        }
    }
    check_schema(&cfg, "config")?;
    for key in COMPONENTS {
        if let Some(v) = cfg.get(key) {
            check_schema(v, key)?;
        }
    }
    Ok(cfg)
}

fn parse(text: &str, what: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("{what}: {e}")))
}

fn check_schema(v: &Value, what: &str) -> Result<(), CliError> {
    match v.get("schema") {
        None => Ok(()),
        Some(s) if s.as_u64() == Some(1) => Ok(()),
        Some(s) => Err(CliError::Config(format!("{what}: unsupported schema {s}"))),
    }
}

/// Typed view of the resolved config.
pub fn typed<T: DeserializeOwned>(cfg: &Value) -> Result<T, CliError> {
    serde_json::from_value(cfg.clone()).map_err(|e| CliError::Config(e.to_string()))
}

fn default_name(cmd: Command) -> &'static str {
    match cmd {
        Command::VerifyDp => "rr",
        Command::MarginalBounds => "fig2a",
        Command::RrBounds => "fig3",
        Command::PosteriorBounds => "fig4",
        Command::PowerBounds => "power",
        Command::PufferfishCheck => "pufferfish",
    }
}

fn binary(n: usize) -> Value {
    json!({"mode": "vector", "alphabet": ["0", "1"], "lengths": [n], "metric": "hamming"})
}

fn fig2(eps: f64) -> Value {
    json!({
        "schema": 1,
        "universe": binary(10),
        "mechanism": {"type": "laplace", "query": "sum", "sensitivity": 1.0, "epsilon": eps},
        "grid": {"from": -10.0, "to": 20.0, "step": 0.1}
    })
}

pub fn defaults(cmd: Command, name: &str) -> Result<Value, CliError> {
    let (owner, v) = match name {
        "fig1" => (
            Command::VerifyDp,
            json!({
                "schema": 1,
                "universe": binary(10),
                "mechanism": {"type": "laplace", "query": "sum", "sensitivity": 1.0, "epsilon": 0.1}
            }),
        ),
        "rr" => (
            Command::VerifyDp,
            json!({"schema": 1, "universe": binary(3), "mechanism": {"type": "rr", "epsilon": 1.0}}),
        ),
        "fig2a" => (Command::MarginalBounds, fig2(0.1)),
        "fig2b" => (Command::MarginalBounds, fig2(0.25)),
        "fig3" => (Command::RrBounds, json!({"schema": 1, "epsilon": 1.0, "max_records": 10})),
        "fig4" => (
            Command::PosteriorBounds,
            json!({
                "schema": 1,
                "alpha": 3.0, "beta": 1.0, "epsilon": 1.0, "a0": 0, "a1": 6,
                "draws": 10, "distance": 1,
                "grid": {"from": 0.0, "to": 30.0, "step": 0.01}
            }),
        ),
        "power" => (
            Command::PowerBounds,
            json!({
                "schema": 1,
                "alphas": [0.01, 0.05, 0.1],
                "epsilons": [0.0, 0.1, 0.2, 0.5, 1.0],
                "distances": [1, 5],
                "laplace_exact": true
            }),
        ),
        "pufferfish" => (
            Command::PufferfishCheck,
            json!({
                "schema": 1,
                "universe": binary(3),
                "mechanism": {"type": "rr", "epsilon": 1.0},
                "correspondence": {"attackers": 1000, "epsilon": 1.0},
                "semantics": true
            }),
        ),
        other => return Err(CliError::Usage(format!("unknown defaults {other:?}"))),
    };
    if owner != cmd {
        return Err(CliError::Usage(format!(
            "defaults {name:?} belong to {}, not {}",
            owner.name(),
            cmd.name()
        )));
    }
    Ok(v)
}
