use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use syk_magic::experiments::{
    example_config, export_figure_data, run, Command as Experiment, ExperimentConfig, FigureId, ResultEnvelope,
    TaskStatus,
};

/// Stabilizer Rényi entropy experiments on SYK and SYK₂ states.
#[derive(Parser, Debug)]
#[command(name = "sykmagic", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run the experiment described by a TOML config and write envelope.json.
    Run {
        config: PathBuf,
        /// Worker threads (overrides the config file and SYKMAGIC_WORKERS).
        #[arg(long, env = "SYKMAGIC_WORKERS")]
        workers: Option<usize>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the CSV tables behind one figure from an envelope.
    Export {
        envelope: PathBuf,
        #[arg(long, value_parser = parse_figure)]
        figure: FigureId,
        /// Destination directory (defaults to the envelope's directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a starter config for an experiment.
    Init {
        #[arg(value_enum)]
        experiment: ExperimentArg,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExperimentArg {
    GsSpectrum,
    GsSre,
    Quench,
    Benchmark,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::GsSpectrum => Experiment::GsSpectrum,
            ExperimentArg::GsSre => Experiment::GsSre,
            ExperimentArg::Quench => Experiment::Quench,
            ExperimentArg::Benchmark => Experiment::Benchmark,
        }
    }
}

fn parse_figure(s: &str) -> Result<FigureId, String> {
    s.parse().map_err(|e: syk_magic::Error| e.to_string())
}

fn run_cmd(config: PathBuf, workers: Option<usize>, seed: Option<u64>, out: Option<PathBuf>) -> Result<()> {
    let mut cfg = ExperimentConfig::load(&config).with_context(|| format!("reading {}", config.display()))?;
    if workers.is_some() {
        cfg.workers = workers;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(o) = out {
        cfg.output = o;
    }
    cfg.validate()?;
    let (env, path) = run(&cfg).with_context(|| format!("running {}", config.display()))?;
    for g in &env.summary {
        let m2 = g.stats.get("M2").map(|s| format!("  M2 = {:.6} ± {:.6}", s.mean, s.std)).unwrap_or_default();
        println!("{} N={}: {}/{} realizations{m2}", g.model, g.n, g.achieved, g.requested);
    }
    for t in env.tasks.iter().filter(|t| t.status == TaskStatus::Failed) {
        eprintln!(
            "warning: {} N={} realization {} failed: {}",
            t.model,
            t.n,
            t.realization,
            t.error.as_deref().unwrap_or("unknown error")
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn export_cmd(envelope: PathBuf, figure: FigureId, out: Option<PathBuf>) -> Result<()> {
    let env = ResultEnvelope::load(&envelope).with_context(|| format!("reading {}", envelope.display()))?;
    let dir = match out {
        Some(d) => d,
        None => envelope.parent().map(PathBuf::from).unwrap_or_default(),
    };
    let files = export_figure_data(&env, figure, &dir)?;
    if files.is_empty() {
        bail!("nothing to export for {figure}");
    }
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Cmd::Run { config, workers, seed, out } => run_cmd(config, workers, seed, out),
        Cmd::Export { envelope, figure, out } => export_cmd(envelope, figure, out),
        Cmd::Init { experiment } => {
            print!("{}", example_config(experiment.into()));
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
