//! Command-line front end.
//!
//! Subcommands talk to each other through files only. Every subcommand
//! writes a JSON report that records the tool version, the full flag set,
//! all seeds and the SHA-256 of every input file; reports carry no
//! timestamps, so identical invocations produce identical bytes. Timing
//! goes to the log on stderr.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod commands;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::Error;
use crate::wxdata::write_atomic;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "qkscreen", version, about = "Quantum-kernel screening and hybrid weather-radar pipelines")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded synthetic SAT/LGHT/MOD/TARG dataset.
    GenData(GenDataArgs),
    /// Geometric-difference and SVM-complexity screening of quantum kernels.
    Screen(ScreenArgs),
    /// Train a codebook + Born machine generator and synthesize a source.
    Qvae(QvaeArgs),
    /// Quanvolve a source through a sampled feature dictionary.
    Quanvolve(QuanvolveArgs),
    /// Fit a ridge readout from quanvolved features to radar targets.
    FitReadout(FitReadoutArgs),
    /// Score predictions against truth, optionally with calibration.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceArg {
    Sat,
    Lght,
    Mod,
}

impl SourceArg {
    pub fn stem(self) -> &'static str {
        match self {
            SourceArg::Sat => "sat",
            SourceArg::Lght => "lght",
            SourceArg::Mod => "mod",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EncodingArg {
    Angle,
    Iqp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeArg {
    Exact,
    Sampled,
}

#[derive(Debug, Args, Serialize)]
pub struct GenDataArgs {
    #[arg(long, default_value_t = 200)]
    pub scenes: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value = "data")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct ScreenArgs {
    /// Directory written by `gen-data`.
    #[arg(long, default_value = "data")]
    pub data: PathBuf,
    /// Input groups flattened into each feature vector.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [SourceArg::Sat, SourceArg::Lght, SourceArg::Mod])]
    pub sources: Vec<SourceArg>,
    /// Scenes drawn (without replacement) as feature vectors.
    #[arg(long, default_value_t = 74)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [4usize, 8, 16])]
    pub pcs: Vec<usize>,
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [EncodingArg::Angle, EncodingArg::Iqp])]
    pub encoding: Vec<EncodingArg>,
    #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
    pub mode: ModeArg,
    /// Shots per kernel entry; required in sampled mode.
    #[arg(long, required_if_eq("mode", "sampled"))]
    pub shots: Option<usize>,
    /// A scene is labelled +1 when its maximum VIL reaches this level.
    #[arg(long, default_value_t = 5)]
    pub label_level: usize,
    #[arg(long, default_value_t = 1.0)]
    pub svm_c: f64,
    #[arg(long)]
    pub adversarial: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "screen")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct QvaeArgs {
    #[arg(long, default_value = "data")]
    pub data: PathBuf,
    #[arg(long, value_enum)]
    pub source: QvaeSource,
    #[arg(long, default_value_t = 16)]
    pub codebook_k: usize,
    #[arg(long, default_value_t = 50)]
    pub codebook_iters: usize,
    #[arg(long, default_value_t = 3)]
    pub layers: usize,
    /// SPSA iterations of the exact warm-start stage.
    #[arg(long, default_value_t = 300)]
    pub iters: usize,
    /// Random restarts of the warm start besides the product-state start.
    #[arg(long, default_value_t = 3)]
    pub restarts: usize,
    /// SPSA iterations of the sampled refinement stage.
    #[arg(long, default_value_t = 100)]
    pub refine_iters: usize,
    #[arg(long, default_value_t = 2000)]
    pub shots: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise_p: f64,
    /// Number of synthetic patches to emit.
    #[arg(long, default_value_t = 1000)]
    pub out: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "qvae")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QvaeSource {
    Lght,
    Sat,
}

#[derive(Debug, Args, Serialize)]
pub struct QuanvolveArgs {
    #[arg(long, default_value = "data")]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = SourceArg::Lght)]
    pub source: SourceArg,
    #[arg(long, value_enum, default_value_t = EncodingArg::Angle)]
    pub encoding: EncodingArg,
    #[arg(long, default_value_t = 256)]
    pub dict_k: usize,
    #[arg(long, default_value_t = 1000)]
    pub shots: usize,
    #[arg(long, default_value_t = 2)]
    pub patch: usize,
    #[arg(long, default_value_t = 2)]
    pub stride: usize,
    /// Layers of the random circuit.
    #[arg(long, default_value_t = 4)]
    pub depth: usize,
    /// Train, calibration and test fractions.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.6, 0.2, 0.2])]
    pub split: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "quanv")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct FitReadoutArgs {
    /// Directory written by `quanvolve`.
    #[arg(long, default_value = "quanv")]
    pub dir: PathBuf,
    #[arg(long, default_value_t = 1e-3)]
    pub ridge: f64,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub truth: PathBuf,
    /// JSON file with `VIL`, `ET`, `CR` threshold arrays.
    #[arg(long)]
    pub levels: Option<PathBuf>,
    /// Fit per-product calibration on a held-out `PRED TRUTH` pair.
    #[arg(long, num_args = 2, value_names = ["PRED", "TRUTH"])]
    pub calibrate: Option<Vec<PathBuf>>,
    #[arg(long, default_value = "model")]
    pub model: String,
    /// Level reported in the wide summary table.
    #[arg(long, default_value_t = 2)]
    pub summary_level: usize,
    #[arg(long, default_value_t = 50)]
    pub diagram_resolution: usize,
    #[arg(long, default_value = "eval")]
    pub out: PathBuf,
}

/// Failure of a subcommand, split by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Runtime(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// Common wrapper of every report.
#[derive(Debug, Serialize)]
pub struct Envelope<'a, F: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub flags: &'a F,
    pub seeds: BTreeMap<&'static str, u64>,
    /// Input file → hex SHA-256.
    pub inputs: BTreeMap<String, String>,
    pub result: R,
}

pub(crate) fn sha256_file(path: &Path) -> crate::Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Hashes of both files of each tensor stem.
pub(crate) fn hash_stems(stems: &[&Path]) -> crate::Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for stem in stems {
        let (json, bin) = crate::wxdata::tensor_paths(stem);
        for p in [json, bin] {
            out.insert(p.display().to_string(), sha256_file(&p)?);
        }
    }
    Ok(out)
}

pub(crate) fn write_report<F: Serialize, R: Serialize>(path: &Path, env: &Envelope<'_, F, R>) -> crate::Result<()> {
    let mut text = serde_json::to_string_pretty(env)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

pub(crate) fn ensure_dir(dir: &Path) -> crate::Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("QKSCREEN_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| usage(format!("QKSCREEN_THREADS must be a non-negative integer, got {raw:?}")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(format!("cannot size thread pool: {e}")))?;
    }
    Ok(())
}

/// Runs one invocation and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let outcome = configure_threads().and_then(|_| match &cli.command {
        Command::GenData(a) => commands::gen_data(a),
        Command::Screen(a) => commands::screen(a),
        Command::Qvae(a) => commands::qvae(a),
        Command::Quanvolve(a) => commands::quanvolve(a),
        Command::FitReadout(a) => commands::fit_readout(a),
        Command::Evaluate(a) => commands::evaluate(a),
    });
    match outcome {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).try_init();
    run(std::env::args_os())
}
