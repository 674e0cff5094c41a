//! Command-line workflows: `train`, `apply` and `inspect`.
//!
//! Exit codes: 0 on success, 2 for usage and I/O errors, 3 when a model and
//! an image (or a model and its own contents) do not fit together.
//! `ACE_THREADS` caps the worker threads used for per-pixel work.

pub mod format;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::AceError;
use crate::image::{load_pgm, save_pgm};
use crate::model::{render, AceConfig, AceModel, LayerMask};
use crate::network::MAX_LAYERS;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONTRACT: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ace", version, about = "Hierarchical density estimation and anomaly images")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train a model on a PGM image.
    Train(TrainArgs),
    /// Render the anomaly image of a PGM under a trained model.
    Apply(ApplyArgs),
    /// Describe a trained model.
    Inspect(InspectArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long = "in", value_name = "PGM")]
    pub input: PathBuf,
    #[arg(long = "out", value_name = "MODEL")]
    pub output: PathBuf,
    #[arg(long, default_value_t = 6, value_parser = clap::value_parser!(u32).range(1..=MAX_LAYERS as i64))]
    pub layers: u32,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u8).range(1..=8))]
    pub bits: u8,
    #[arg(long = "hist-drop", default_value_t = 2)]
    pub hist_drop: u8,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Skip the linear illumination correction.
    #[arg(long)]
    pub no_wedge: bool,
}

#[derive(Debug, Args)]
pub struct ApplyArgs {
    #[arg(long, value_name = "MODEL")]
    pub model: PathBuf,
    #[arg(long = "in", value_name = "PGM")]
    pub input: PathBuf,
    #[arg(long = "out", value_name = "PGM")]
    pub output: PathBuf,
    /// Only this layer contributes; all layers by default.
    #[arg(long)]
    pub layer: Option<usize>,
    /// Show low log-probability as white (the default).
    #[arg(long, overrides_with = "no_invert")]
    pub invert: bool,
    /// Show low log-probability as black.
    #[arg(long, overrides_with = "invert")]
    pub no_invert: bool,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long, value_name = "MODEL")]
    pub model: PathBuf,
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn at(path: &Path, err: AceError) -> Self {
        let code = exit_code(&err);
        CliError {
            code,
            message: format!("{}: {err}", path.display()),
        }
    }
}

impl From<AceError> for CliError {
    fn from(err: AceError) -> Self {
        CliError {
            code: exit_code(&err),
            message: err.to_string(),
        }
    }
}

fn exit_code(err: &AceError) -> i32 {
    match err {
        AceError::Contract(_) | AceError::State(_) => EXIT_CONTRACT,
        _ => EXIT_USAGE,
    }
}

fn read(path: &Path) -> Result<Vec<u8>, CliError> {
    std::fs::read(path).map_err(|e| CliError::at(path, e.into()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes).map_err(|e| CliError::at(path, e.into()))
}

fn load_model(path: &Path) -> Result<AceModel, CliError> {
    format::decode(&read(path)?).map_err(|e| CliError::at(path, e))
}

pub fn cmd_train(args: &TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let image = load_pgm(&read(&args.input)?).map_err(|e| CliError::at(&args.input, e))?;
    if args.hist_drop >= args.bits {
        return Err(CliError::usage(format!(
            "--hist-drop {} must be below --bits {}",
            args.hist_drop, args.bits
        )));
    }
    let config = AceConfig {
        n_layers: args.layers as usize,
        bits: args.bits,
        drop_bits: args.hist_drop,
        seed: args.seed,
        wedge: !args.no_wedge,
        ..AceConfig::default()
    };
    let (model, report) = AceModel::train_with_report(&image, &config)?;
    if report.wedge_clamped > 0 {
        writeln!(out, "warning: wedge correction clamped {} pixels", report.wedge_clamped).ok();
    }
    for (l, t) in report.layer_times.iter().enumerate() {
        writeln!(out, "layer {l}: {:.1} ms", t.as_secs_f64() * 1e3).ok();
    }
    writeln!(out, "histograms: {:.1} ms", report.histogram_time.as_secs_f64() * 1e3).ok();
    write(&args.output, &format::encode(&model))?;
    writeln!(out, "wrote {}", args.output.display()).ok();
    Ok(())
}

pub fn cmd_apply(args: &ApplyArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let image = load_pgm(&read(&args.input)?).map_err(|e| CliError::at(&args.input, e))?;
    let n = model.n_layers();
    let mask = match args.layer {
        Some(l) if l >= n => {
            return Err(CliError::usage(format!("--layer {l} but the model has {n} layers")))
        }
        Some(l) => LayerMask::single(n, l)?,
        None => LayerMask::all(n),
    };
    let prepared = model.prepare(&image)?;
    let lp = model.anomaly_image(&prepared, &mask)?;
    let total = model.log_q_direct(&prepared, &mask)?;
    write(&args.output, &save_pgm(&render(&lp, !args.no_invert)))?;
    writeln!(out, "log_q_direct: {total:.6}").ok();
    writeln!(out, "wrote {}", args.output.display()).ok();
    Ok(())
}

/// Text summary of a model: header, then one row per layer ending in the
/// receptive field its cliques cover.
pub fn inspect_report(model: &AceModel) -> String {
    let mut s = String::new();
    let schedule = model.schedule();
    writeln!(
        s,
        "layers {}  bits {}  hist-drop {}  wedge {}  seed {}",
        model.n_layers(),
        model.bits(),
        model.drop_bits(),
        if model.wedge_applied() { "on" } else { "off" },
        model.seed()
    )
    .ok();
    writeln!(s, "layer  pairing      sep  occupancy  H(first)  H(second)  field").ok();
    for (step, hist) in schedule.steps().iter().zip(model.histograms()) {
        let (h1, h2) = hist.marginal_entropies();
        writeln!(
            s,
            "{:<5}  {:<11}  {:>3}  {:>9.6}  {:>8.4}  {:>9.4}  {}",
            step.layer_index,
            step.orientation.to_string(),
            step.separation,
            hist.occupancy(),
            h1,
            h2,
            schedule.clique_field(step.layer_index)
        )
        .ok();
    }
    s
}

pub fn cmd_inspect(args: &InspectArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    out.write_all(inspect_report(&model).as_bytes())
        .map_err(|e| CliError::from(AceError::from(e)))
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Train(a) => cmd_train(a, out),
        Command::Apply(a) => cmd_apply(a, out),
        Command::Inspect(a) => cmd_inspect(a, out),
    }
}

fn thread_cap() -> Result<Option<usize>, CliError> {
    match std::env::var("ACE_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::usage(format!("ACE_THREADS={v} is not a positive integer"))),
        },
        Err(_) => Ok(None),
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                out.write_all(text.as_bytes()).ok();
            } else {
                err.write_all(text.as_bytes()).ok();
            }
            return code;
        }
    };
    let mut buffer = Vec::new();
    let result = thread_cap().and_then(|cap| match cap {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::usage(e.to_string()))?
            .install(|| dispatch(&cli, &mut buffer)),
        None => dispatch(&cli, &mut buffer),
    });
    out.write_all(&buffer).ok();
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            writeln!(err, "error: {}", e.message).ok();
            e.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("ace").chain(args.iter().copied()))
    }

    #[test]
    fn train_defaults() {
        let cli = parse(&["train", "--in", "t.pgm", "--out", "m.ace"]).unwrap();
        let Command::Train(a) = cli.command else { panic!() };
        assert_eq!((a.layers, a.bits, a.hist_drop, a.seed, a.no_wedge), (6, 8, 2, 1, false));
    }

    #[test]
    fn layer_bounds() {
        assert!(parse(&["train", "--in", "a", "--out", "b", "--layers", "0"]).is_err());
        assert!(parse(&["train", "--in", "a", "--out", "b", "--layers", "13"]).is_err());
        assert!(parse(&["train", "--in", "a", "--out", "b", "--bits", "9"]).is_err());
    }

    #[test]
    fn invert_flags() {
        let apply = |extra: &[&str]| {
            let mut args = vec!["apply", "--model", "m", "--in", "i", "--out", "o"];
            args.extend_from_slice(extra);
            let Command::Apply(a) = parse(&args).unwrap().command else { panic!() };
            !a.no_invert
        };
        assert!(apply(&[]));
        assert!(apply(&["--invert"]));
        assert!(!apply(&["--no-invert"]));
        assert!(apply(&["--no-invert", "--invert"]));
    }

    #[test]
    fn usage_error_exit_code() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(["ace", "train", "--layers", "0"], &mut out, &mut err);
        assert_eq!(code, EXIT_USAGE);
        assert!(!err.is_empty());
    }
}
