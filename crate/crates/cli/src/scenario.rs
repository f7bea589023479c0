//! Argument grammar, scenario assembly, and the manifest.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use nlslab_core::nonlinearity::{parse_spec, preset, serialize_spec};
use nlslab_core::{CoreError, GridSpec, SystemSpec};

/// Environment variable bounding a single field's memory footprint
/// (N^n * l * 16 bytes). Default 4 GiB.
pub const MEMORY_CAP_VAR: &str = "NLSLAB_MEMORY_CAP_BYTES";
const DEFAULT_MEMORY_CAP: u64 = 4 << 30;

#[derive(Debug)]
pub enum AppError {
    /// Bad flags, unwritable outputs, over-budget grids: exit 3.
    Usage(String),
    /// The scenario is well-formed but the inputs fail validation: exit 1.
    Validation(String),
    /// The computation itself diverged or produced non-finite data: exit 2.
    Numerical(String),
}

impl AppError {
    pub fn code(&self) -> u8 {
        match self {
            AppError::Validation(_) => 1,
            AppError::Numerical(_) => 2,
            AppError::Usage(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Validation(_) => "validation",
            AppError::Numerical(_) => "numerical",
            AppError::Usage(_) => "usage",
        }
    }

    pub fn message(&self) -> String {
        match self {
            AppError::Validation(m) | AppError::Numerical(m) | AppError::Usage(m) => m.clone(),
        }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            // Misconfigured grids and mismatched shapes are flag mistakes.
            CoreError::Grid(_) | CoreError::DimensionMismatch(_) => AppError::Usage(e.to_string()),
            // A solver that leaves the admissible set is a numerical failure.
            CoreError::InitialGuessOutsideP => AppError::Numerical(e.to_string()),
            // Everything else rejects the scenario's inputs.
            other => AppError::Validation(other.to_string()),
        }
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Usage(format!("io: {e}"))
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "nlslab",
    version,
    about = "Numerical laboratory for coupled nonlinear Schrodinger systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the structural hypotheses of a system and report resonance.
    Validate(ValidateArgs),
    /// Solve the stationary elliptic system for a ground-state profile.
    GroundState(GroundStateArgs),
    /// Integrate the time-dependent system and emit a diagnostic series.
    Evolve(EvolveArgs),
    /// Compare conserved quantities of initial data against ground-state
    /// thresholds and report a global-existence/blow-up verdict.
    Classify(ClassifyArgs),
    /// Build the explicit blow-up solution from a ground state and sample it.
    PseudoConformal(PseudoConformalArgs),
    /// Evaluate the variance identities (global and localized) on data.
    VirialCheck(VirialCheckArgs),
}

#[derive(Args, Debug)]
pub struct CommonArgs {
    /// Preset expression (e.g. "quadratic(kappa=0.5)", "cubic(sigma=3,mu=1)",
    /// "single_cubic") or path to a system file.
    #[arg(long)]
    pub spec: String,
    /// Spatial dimension (presets only; files carry their own).
    #[arg(long)]
    pub n: Option<usize>,
    /// Seed for the sampling-based validators.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct GridArgs {
    /// Points per axis (power of two).
    #[arg(long = "N", default_value_t = 256)]
    pub points: usize,
    /// Half-length of the periodic box [-L, L)^n.
    #[arg(long = "L", default_value_t = 10.0)]
    pub half_length: f64,
}

#[derive(Args, Debug)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct GroundStateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Frequency parameter of the standing wave.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    /// Iteration stopping tolerance (sup-norm of the update).
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Initial guess field file (default: Gaussian bump).
    #[arg(long)]
    pub init: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Final time (required).
    #[arg(long = "t-end")]
    pub t_end: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    /// Halve dt when the kinetic energy doubles; relax back when stable.
    #[arg(long, default_value_t = false)]
    pub adaptive: bool,
    /// Record diagnostics every this many steps.
    #[arg(long, default_value_t = 100)]
    pub stride: usize,
    /// Kinetic-energy growth factor that triggers blow-up detection.
    #[arg(long, default_value_t = 1e6)]
    pub blowup_factor: f64,
    /// Initial data field file (default: Gaussian bump in every component).
    #[arg(long)]
    pub init: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Frequency of the reference ground state.
    #[arg(long, default_value_t = 1.0)]
    pub omega: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
    /// Initial data field file; defaults to amplitude * ground state.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Scale factor applied to the ground state when --init is absent.
    #[arg(long, default_value_t = 1.0)]
    pub amplitude: f64,
    /// Qualitative assumption on the data: "finite-variance" or "radial".
    #[arg(long, default_value = "finite-variance")]
    pub assume: String,
}

#[derive(Args, Debug)]
pub struct PseudoConformalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Blow-up time of the constructed solution.
    #[arg(long = "big-t", default_value_t = 1.0)]
    pub big_t: f64,
    /// Times at which to sample the exact solution (repeatable).
    #[arg(long = "t")]
    pub times: Vec<f64>,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_iter: usize,
}

#[derive(Args, Debug)]
pub struct VirialCheckArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Localization radius for the cutoff identity.
    #[arg(long = "big-r", default_value_t = 4.0)]
    pub big_r: f64,
    /// Data field file (default: Gaussian bump in every component).
    #[arg(long)]
    pub init: Option<PathBuf>,
}

/// Resolve a `--spec` argument: a parenthesized expression or bare preset
/// name first, then a file path.
pub fn load_spec(arg: &str, n: Option<usize>) -> Result<SystemSpec, AppError> {
    let looks_like_preset =
        arg.contains('(') || matches!(arg, "quadratic" | "cubic" | "single_cubic");
    if looks_like_preset {
        // A bad preset name or parameter is a flag mistake, not bad data.
        return preset(arg, n.unwrap_or(1)).map_err(|e| AppError::Usage(e.to_string()));
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(AppError::Usage(format!(
            "spec '{arg}' is neither a known preset nor an existing file"
        )));
    }
    let text = fs::read_to_string(path)?;
    let spec = parse_spec(&text)?;
    match n {
        Some(n) if n != spec.n => Ok(spec.with_dimension(n)?),
        _ => Ok(spec),
    }
}

/// Enforce the per-field memory budget N^n * l * 16 bytes.
pub fn check_memory(grid: &GridSpec, l: usize) -> Result<(), AppError> {
    let cap = std::env::var(MEMORY_CAP_VAR)
        .ok()
        .and_then(|v| v.parse::<u64>().ok())
        .unwrap_or(DEFAULT_MEMORY_CAP);
    let bytes = (grid.len() as u64).saturating_mul(l as u64).saturating_mul(16);
    if bytes >= cap {
        return Err(AppError::Usage(format!(
            "grid needs {bytes} bytes per field, over the {cap}-byte cap ({MEMORY_CAP_VAR})"
        )));
    }
    Ok(())
}

pub fn make_grid(spec: &SystemSpec, grid: &GridArgs) -> Result<GridSpec, AppError> {
    let g = GridSpec::new(spec.n, grid.points, grid.half_length)?;
    check_memory(&g, spec.l)?;
    Ok(g)
}

#[derive(Serialize)]
struct ManifestGrid {
    n: usize,
    points_per_axis: usize,
    half_length: f64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: Vec<&'a str>,
    spec_hash: String,
    grid: Option<ManifestGrid>,
    seed: u64,
    version: &'static str,
}

/// Write the run manifest atomically (temp file + rename).
pub fn write_manifest(
    out_dir: &Path,
    argv: &[String],
    spec: &SystemSpec,
    grid: Option<&GridSpec>,
    seed: u64,
) -> Result<(), AppError> {
    fs::create_dir_all(out_dir)?;
    let canonical = serialize_spec(spec);
    let hash = format!("{:x}", Sha256::digest(canonical.as_bytes()));
    let manifest = Manifest {
        command: argv.iter().map(|s| s.as_str()).collect(),
        spec_hash: hash,
        grid: grid.map(|g| ManifestGrid {
            n: g.n,
            points_per_axis: g.points_per_axis,
            half_length: g.half_length,
        }),
        seed,
        version: env!("CARGO_PKG_VERSION"),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| AppError::Usage(format!("manifest serialization: {e}")))?;
    let tmp = out_dir.join(".manifest.json.tmp");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(json.as_bytes())?;
        f.write_all(b"\n")?;
        f.sync_all()?;
    }
    fs::rename(&tmp, out_dir.join("manifest.json"))?;
    Ok(())
}

/// Pull a `--sweep name=v1,v2,...` flag out of argv, if present.
pub fn extract_sweep(argv: &mut Vec<String>) -> Result<Option<(String, Vec<String>)>, AppError> {
    let Some(pos) = argv.iter().position(|a| a == "--sweep") else {
        return Ok(None);
    };
    if pos + 1 >= argv.len() {
        return Err(AppError::Usage("--sweep needs name=v1,v2,...".into()));
    }
    let expr = argv.remove(pos + 1);
    argv.remove(pos);
    let (name, list) = expr
        .split_once('=')
        .ok_or_else(|| AppError::Usage(format!("bad --sweep '{expr}', expected name=v1,v2")))?;
    let values: Vec<String> = list.split(',').map(|v| v.trim().to_string()).collect();
    if name.is_empty() || values.iter().any(|v| v.is_empty()) {
        return Err(AppError::Usage(format!("bad --sweep '{expr}'")));
    }
    Ok(Some((name.to_string(), values)))
}

/// Replace (or append) the value of `--flag` in raw argv.
pub fn set_flag(argv: &mut Vec<String>, flag: &str, value: &str) {
    let long = format!("--{flag}");
    if let Some(pos) = argv.iter().position(|a| *a == long) {
        if pos + 1 < argv.len() {
            argv[pos + 1] = value.to_string();
            return;
        }
    }
    argv.push(long);
    argv.push(value.to_string());
}

pub fn get_flag(argv: &[String], flag: &str) -> Option<String> {
    let long = format!("--{flag}");
    argv.iter()
        .position(|a| *a == long)
        .and_then(|pos| argv.get(pos + 1).cloned())
}
