//! Command-line front end.
//!
//! Every run resolves one [`ExperimentConfig`]: command defaults, then the
//! `--config` JSON (a partial document or a previous `manifest.json`), then the
//! named flags, then `--dotted.key value` overrides. Exit codes: 0 success,
//! 1 numerical-contract violation, 2 usage or configuration error.

mod commands;
mod svg;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Error;
use crate::experiment::ExperimentConfig;

pub use commands::{cmd_correlate, cmd_eraser, cmd_local, cmd_terms};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONTRACT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "mzi-eraser",
    version,
    about = "Heterodyne delayed-choice eraser simulator",
    after_help = "Any config field can be overridden with `--dotted.path VALUE`, e.g. \
                  `--scheme.phi 0.3 --n_shots 64 --scheme.combiner BS`. VALUE is parsed as JSON, \
                  falling back to a plain string."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// φ scan in PBS and BS combiner modes with fringe fits.
    Eraser {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of φ points over one turn.
        #[arg(long)]
        phi_points: Option<usize>,
    },
    /// Raw and low-passed detector traces behind the analyzers.
    Local {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Correlation surfaces of both pipelines, oracle residuals and CHSH S.
    Correlate {
        #[command(flatten)]
        common: CommonArgs,
        /// Points per axis of the (ξ, θ) grid over [0, π).
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Pairing enumeration and kept/blocked product terms.
    Terms {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// JSON config (partial) or a manifest.json from an earlier run.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    pub svg: bool,
    /// Machine-readable stdout.
    #[arg(long)]
    pub json: bool,
}

/// Written next to every run's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub resolved_config: ExperimentConfig,
    pub seed: u64,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("numerical contract violated: {0}")]
    Contract(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Contract(_) => EXIT_CONTRACT,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::FormMismatch(_) | Error::Fit(_) | Error::DegenerateSurface { .. } => {
                CliError::Contract(e.to_string())
            }
            _ => CliError::Usage(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<String> = args.into_iter().map(|a| a.into().to_string_lossy().into_owned()).collect();
    let (args, overrides) = match split_overrides(args) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command, &overrides) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, overrides: &[(String, String)]) -> CliResult<()> {
    match command {
        Command::Eraser { common, phi_points } => {
            let mut flags = named_flags(&common);
            if let Some(n) = phi_points {
                flags.push(("scan".into(), serde_json::json!({ "Phi": crate::experiment::full_turn_grid(n) })));
            }
            let cfg = resolve_config(commands::eraser_defaults(), common.config.as_deref(), &flags, overrides)?;
            cmd_eraser(&cfg, &common)
        }
        Command::Local { common } => {
            let flags = named_flags(&common);
            let cfg = resolve_config(commands::local_defaults(), common.config.as_deref(), &flags, overrides)?;
            cmd_local(&cfg, &common)
        }
        Command::Correlate { common, grid_points } => {
            let mut flags = named_flags(&common);
            if let Some(n) = grid_points {
                let g = crate::analysis::half_turn_grid(n);
                flags.push(("scan".into(), serde_json::json!({ "XiTheta": { "xi": g, "theta": g } })));
            }
            let cfg = resolve_config(commands::correlate_defaults(), common.config.as_deref(), &flags, overrides)?;
            cmd_correlate(&cfg, &common)
        }
        Command::Terms { common } => {
            let flags = named_flags(&common);
            let cfg = resolve_config(commands::terms_defaults(), common.config.as_deref(), &flags, overrides)?;
            cmd_terms(&cfg, &common)
        }
    }
}

fn named_flags(common: &CommonArgs) -> Vec<(String, Value)> {
    common.seed.map(|s| ("seed".to_string(), Value::from(s))).into_iter().collect()
}

/// Top-level config fields that have no named flag of their own.
const BARE_FIELDS: [&str; 4] = ["scheme", "grid", "filter", "scan"];

fn is_override(key: &str) -> bool {
    key.contains(['.', '_']) || BARE_FIELDS.contains(&key)
}

type Split = (Vec<String>, Vec<(String, String)>);

/// Pulls `--a.b VALUE`, `--a_b VALUE`, `--filter VALUE` and their `=` forms
/// out of the argument list. Named flags use hyphens, config fields use dots
/// and underscores.
fn split_overrides(args: Vec<String>) -> CliResult<Split> {
    let mut keep = Vec::with_capacity(args.len());
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(a) = it.next() {
        let Some(body) = a.strip_prefix("--") else {
            keep.push(a);
            continue;
        };
        let (key, inline) = match body.split_once('=') {
            Some((k, v)) => (k.to_string(), Some(v.to_string())),
            None => (body.to_string(), None),
        };
        if !is_override(&key) {
            keep.push(a);
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().ok_or_else(|| CliError::Usage(format!("--{key} needs a value")))?,
        };
        overrides.push((key, value));
    }
    Ok((keep, overrides))
}

/// Enum-valued fields are replaced wholesale rather than merged.
const REPLACE_KEYS: [&str; 3] = ["scan", "filter", "sign_policy"];

fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) if !REPLACE_KEYS.contains(&k.as_str()) => merge(slot, v),
                    _ => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (b, p) => *b = p,
    }
}

fn set_path(root: &mut Value, key: &str, value: Value) -> CliResult<()> {
    let mut node = root;
    let parts: Vec<&str> = key.split('.').collect();
    for (i, part) in parts.iter().enumerate() {
        let Value::Object(map) = node else {
            return Err(CliError::Usage(format!("--{key}: `{}` is not an object", parts[..i].join("."))));
        };
        if i + 1 == parts.len() {
            map.insert(part.to_string(), value);
            return Ok(());
        }
        node = map.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
        if node.is_null() {
            *node = Value::Object(Default::default());
        }
    }
    Ok(())
}

fn parse_value(raw: &str) -> Value {
    serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()))
}

/// Layers defaults, config file, named flags and overrides, then validates.
pub fn resolve_config(
    defaults: ExperimentConfig,
    path: Option<&Path>,
    flags: &[(String, Value)],
    overrides: &[(String, String)],
) -> CliResult<ExperimentConfig> {
    let mut doc = serde_json::to_value(&defaults)?;
    if let Some(path) = path {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut file: Value = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        if let Some(resolved) = file.get_mut("resolved_config") {
            file = resolved.take();
        }
        if !file.is_object() {
            return Err(CliError::Usage(format!("config {} must be a JSON object", path.display())));
        }
        merge(&mut doc, file);
    }
    for (key, value) in flags {
        set_path(&mut doc, key, value.clone())?;
    }
    for (key, raw) in overrides {
        set_path(&mut doc, key, parse_value(raw))?;
    }
    let cfg: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Usage(format!("invalid config: {e}")))?;
    cfg.validate()?;
    Ok(cfg)
}

/// Writes a line to stdout, ignoring a closed pipe.
pub(crate) fn say(line: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub(crate) fn write_manifest(out: &Path, command: &str, cfg: &ExperimentConfig, outputs: &[&str]) -> CliResult<()> {
    let manifest = RunManifest {
        command: command.to_string(),
        resolved_config: cfg.clone(),
        seed: cfg.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    write_json(&out.join("manifest.json"), &manifest)
}
