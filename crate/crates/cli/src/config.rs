//! Command-line flags, optional JSON config files, and the resolved
//! configuration embedded in every report.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use elliott_core::simplex::MeasureScheme;
use elliott_core::transport::weyl::PairKind;
use elliott_core::walk::Barrier;

#[derive(Debug, Parser)]
#[command(name = "elliott", version, about = "Random inductive limits of dimension-drop algebras")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reflecting or absorbing walks on the nonnegative integers.
    Walk(WalkArgs),
    /// Random limit algebras and the proportion that are Jiang-Su.
    Sample(SampleArgs),
    /// Towers of simplices driven by the walk.
    Simplex(SimplexArgs),
    /// Spectral matching distance against the optimised unitary distance.
    Weyl(WeylArgs),
    /// Cuntz-semigroup checks on the dimension-drop models.
    Cuntz(GridArgs),
    /// K-groups of the dimension-drop algebras and the Toeplitz algebra.
    Ktheory(GridArgs),
    /// Aggregates of an existing report.
    Summary { path: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub horizon: Option<u64>,
    /// Report path; standard output when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct WalkFlags {
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// reflecting | absorbing
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub barrier: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub start: Option<u64>,
}

#[derive(Debug, Args)]
pub struct WalkArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub flags: WalkFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct SchemeFlags {
    /// barycenter | vertices | faces
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scheme: Option<String>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub walk: WalkFlags,
    #[command(flatten)]
    pub scheme: SchemeFlags,
    /// Largest k in the absorbing-mode histogram of sup Y.
    #[arg(long)]
    pub k_max: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimplexArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub walk: WalkFlags,
    #[command(flatten)]
    pub scheme: SchemeFlags,
}

#[derive(Debug, Args, Serialize)]
pub struct WeylArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: CommonArgs,
    /// hermitian | unitary | normal
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kind: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    /// Gradient tolerance of the optimiser.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct GridArgs {
    #[command(flatten)]
    #[serde(skip)]
    pub common: CommonArgs,
    /// Pairs `(p, q)` with `1 <= p, q <= max`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkSettings {
    pub p: f64,
    pub barrier: Barrier,
    pub start: u64,
}

impl Default for WalkSettings {
    fn default() -> Self {
        Self { p: 0.5, barrier: Barrier::Reflecting, start: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleSettings {
    pub p: f64,
    pub barrier: Barrier,
    pub start: u64,
    pub scheme: MeasureScheme,
    pub k_max: u64,
}

impl Default for SampleSettings {
    fn default() -> Self {
        let w = WalkSettings::default();
        Self { p: w.p, barrier: w.barrier, start: w.start, scheme: MeasureScheme::BarycenterPointMass, k_max: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimplexSettings {
    pub p: f64,
    pub barrier: Barrier,
    pub start: u64,
    pub scheme: MeasureScheme,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        let s = SampleSettings::default();
        Self { p: s.p, barrier: s.barrier, start: s.start, scheme: s.scheme }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeylSettings {
    pub kind: PairKind,
    pub n: usize,
    pub tol: f64,
}

impl Default for WeylSettings {
    fn default() -> Self {
        Self { kind: PairKind::Hermitian, n: 4, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSettings {
    pub max: u64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self { max: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Parameters {
    Walk(WalkSettings),
    Sample(SampleSettings),
    Simplex(SimplexSettings),
    Weyl(WeylSettings),
    Grid(GridSettings),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: &'static str,
    pub seed: u64,
    pub trials: u64,
    pub horizon: u64,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub parameters: Parameters,
}

/// Contents of a `--config` file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    seed: Option<u64>,
    trials: Option<u64>,
    horizon: Option<u64>,
    output: Option<PathBuf>,
    format: Option<Format>,
    #[serde(default)]
    parameters: Map<String, Value>,
}

fn load_file(path: &Option<PathBuf>, command: &str) -> Result<FileConfig, String> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let file: FileConfig =
        serde_json::from_str(&text).map_err(|e| format!("invalid config {}: {e}", path.display()))?;
    match &file.command {
        Some(c) if c != command => Err(format!("config is for command {c}, not {command}")),
        _ => Ok(file),
    }
}

/// Overlays `flags` on `file` and deserialises into the settings type, whose
/// `Default` fills anything still missing.
fn settings<T: for<'de> Deserialize<'de>>(mut file: Map<String, Value>, flags: &[Value]) -> Result<T, String> {
    for f in flags {
        if let Value::Object(m) = f {
            file.extend(m.clone());
        }
    }
    serde_json::from_value(Value::Object(file)).map_err(|e| format!("invalid parameters: {e}"))
}

fn to_value<T: Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("flags serialize")
}

fn common(
    command: &'static str,
    args: &CommonArgs,
    file: &FileConfig,
    defaults: (u64, u64),
    parameters: Parameters,
) -> ExperimentConfig {
    ExperimentConfig {
        command,
        seed: args.seed.or(file.seed).unwrap_or(0),
        trials: args.trials.or(file.trials).unwrap_or(defaults.0),
        horizon: args.horizon.or(file.horizon).unwrap_or(defaults.1),
        format: args.format.or(file.format).unwrap_or(Format::Json),
        output: args.output.clone().or_else(|| file.output.clone()),
        parameters,
    }
}

/// Resolves a run command; `None` for `summary`.
pub fn resolve(command: &Command) -> Result<Option<ExperimentConfig>, String> {
    let config = match command {
        Command::Summary { .. } => return Ok(None),
        Command::Walk(a) => {
            let file = load_file(&a.common.config, "walk")?;
            let s = settings(file.parameters.clone(), &[to_value(&a.flags)])?;
            common("walk", &a.common, &file, (1000, 1000), Parameters::Walk(s))
        }
        Command::Sample(a) => {
            let file = load_file(&a.common.config, "sample")?;
            let k_max = a.k_max.map(|k| serde_json::json!({ "k_max": k })).unwrap_or(Value::Null);
            let s = settings(file.parameters.clone(), &[to_value(&a.walk), to_value(&a.scheme), k_max])?;
            common("sample", &a.common, &file, (1000, 1000), Parameters::Sample(s))
        }
        Command::Simplex(a) => {
            let file = load_file(&a.common.config, "simplex")?;
            let s = settings(file.parameters.clone(), &[to_value(&a.walk), to_value(&a.scheme)])?;
            common("simplex", &a.common, &file, (100, 200), Parameters::Simplex(s))
        }
        Command::Weyl(a) => {
            let file = load_file(&a.common.config, "weyl")?;
            let s = settings(file.parameters.clone(), &[to_value(a)])?;
            common("weyl", &a.common, &file, (200, 1), Parameters::Weyl(s))
        }
        Command::Cuntz(a) | Command::Ktheory(a) => {
            let name = if matches!(command, Command::Cuntz(_)) { "cuntz" } else { "ktheory" };
            let file = load_file(&a.common.config, name)?;
            let s = settings(file.parameters.clone(), &[to_value(a)])?;
            common(name, &a.common, &file, (1, 1), Parameters::Grid(s))
        }
    };
    validate(&config)?;
    Ok(Some(config))
}

fn validate(c: &ExperimentConfig) -> Result<(), String> {
    if c.trials == 0 {
        return Err("trials must be ≥ 1".into());
    }
    if c.horizon == 0 {
        return Err("horizon must be ≥ 1".into());
    }
    if c.format == Format::Csv && c.command != "weyl" {
        return Err(format!("csv format is only available for weyl, not {}", c.command));
    }
    match &c.parameters {
        Parameters::Walk(WalkSettings { p, .. })
        | Parameters::Sample(SampleSettings { p, .. })
        | Parameters::Simplex(SimplexSettings { p, .. })
            if !(0.0..=1.0).contains(p) =>
        {
            Err(format!("p must lie in [0, 1], got {p}"))
        }
        Parameters::Sample(s) if s.k_max == 0 => Err("k_max must be ≥ 1".into()),
        Parameters::Weyl(w) if w.n == 0 || w.n > 64 => Err(format!("n must lie in 1..=64, got {}", w.n)),
        Parameters::Weyl(w) if !(w.tol > 0.0 && w.tol.is_finite()) => Err(format!("tol must be positive, got {}", w.tol)),
        Parameters::Grid(g) if g.max == 0 || g.max > 1000 => Err(format!("max must lie in 1..=1000, got {}", g.max)),
        _ => Ok(()),
    }
}
