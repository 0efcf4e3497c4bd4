//! `qpga`: batch driver for ingestion, qPGA embedding, embedding metrics,
//! qubit bounds and the quantum classifiers.

mod artifacts;
mod commands;
mod config;
mod manifest;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, Parser, Subcommand};
use serde_json::Value;

use crate::commands::*;
use crate::config::{resolve, UsageError};
use crate::manifest::{Outcome, RunManifest};

#[derive(Parser, Debug)]
#[command(name = "qpga", version, about = "Principal geodesic embeddings for amplitude-encoded quantum classifiers")]
struct Cli {
    /// Print numeric results as JSON on standard output
    #[arg(long, global = true)]
    json: bool,
    /// JSON configuration file; command-line flags override its values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Where to write the run manifest (default: next to the first output)
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Read an IDX or CIFAR-10 dataset into a labelled matrix file
    Ingest(IngestArgs),
    /// Fit the feature map and qPGA model
    Fit(FitArgs),
    /// Embed rows with a fitted model
    Transform(TransformArgs),
    /// Map latent rows back to the feature sphere
    Invert(InvertArgs),
    /// Trustworthiness, continuity and co-ranking of an embedding
    Metrics(MetricsArgs),
    /// Qubit requirements under a per-qubit error budget
    Bounds(BoundsArgs),
    /// Quantum fidelity kernel matrix
    Kernel(KernelArgs),
    /// Train the quantum-kernel SVM
    TrainQsvm(TrainQsvmArgs),
    /// Train the variational circuit classifier
    TrainVqc(TrainVqcArgs),
    /// Cross-validate the full pipeline
    Evaluate(EvaluateArgs),
    /// Score a VQC under increasing depolarizing noise
    NoiseSweep(NoiseSweepArgs),
    /// Embedding quality and reconstruction error across component counts
    Dsweep(DsweepArgs),
    /// Summarize run manifests as Markdown
    Report(ReportArgs),
}

const SUBCOMMANDS: &[&str] = &[
    "ingest", "fit", "transform", "invert", "metrics", "bounds", "kernel", "train-qsvm", "train-vqc", "evaluate",
    "noise-sweep", "dsweep", "report",
];

fn known_flags(command: &str) -> Vec<String> {
    let cmd = Cli::command();
    let sub = cmd.find_subcommand(command).expect("registered subcommand");
    sub.get_arguments()
        .filter(|a| !a.is_global_set())
        .filter_map(|a| a.get_long().map(str::to_string))
        .filter(|l| !["json", "config", "manifest", "help"].contains(&l.as_str()))
        .collect()
}

fn dispatch(cli: &Cli, config: Option<&Value>) -> anyhow::Result<(&'static str, Outcome)> {
    macro_rules! run {
        ($name:literal, $args:expr, $f:ident) => {{
            let known = known_flags($name);
            let known: Vec<&str> = known.iter().map(String::as_str).collect();
            let resolved = resolve($args, config, $name, SUBCOMMANDS, &known)?;
            Ok(($name, $f(resolved)?))
        }};
    }
    match &cli.command {
        Command::Ingest(a) => run!("ingest", a, run_ingest),
        Command::Fit(a) => run!("fit", a, run_fit),
        Command::Transform(a) => run!("transform", a, run_transform),
        Command::Invert(a) => run!("invert", a, run_invert),
        Command::Metrics(a) => run!("metrics", a, run_metrics),
        Command::Bounds(a) => run!("bounds", a, run_bounds),
        Command::Kernel(a) => run!("kernel", a, run_kernel),
        Command::TrainQsvm(a) => run!("train-qsvm", a, run_train_qsvm),
        Command::TrainVqc(a) => run!("train-vqc", a, run_train_vqc),
        Command::Evaluate(a) => run!("evaluate", a, run_evaluate),
        Command::NoiseSweep(a) => run!("noise-sweep", a, run_noise_sweep),
        Command::Dsweep(a) => run!("dsweep", a, run_dsweep),
        Command::Report(a) => run!("report", a, run_report),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let start = Instant::now();
    let config = cli.config.as_deref().map(config::load).transpose()?;
    let (command, outcome) = dispatch(&cli, config.as_ref())?;
    let manifest = RunManifest::build(command, &outcome, start.elapsed().as_secs_f64())?;
    let path = cli.manifest.clone().unwrap_or_else(|| RunManifest::default_path(command, &outcome));
    manifest.write(&path)?;
    let mut text = String::new();
    if cli.json || command == "bounds" {
        text = serde_json::to_string_pretty(&outcome.result)? + "\n";
    } else {
        for out in &outcome.outputs {
            text += &format!("wrote {}\n", out.display());
        }
        text += &format!("manifest {}\n", path.display());
    }
    // A closed pipe on the reader's side is not a failure of the run.
    match std::io::stdout().write_all(text.as_bytes()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if e.is::<UsageError>() { 2 } else { 1 })
        }
    }
}
