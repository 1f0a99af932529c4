use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use frlab::acceptance::{run_criteria, AcceptanceOptions};
use frlab::{run_experiment, Experiment, ExperimentConfig};

#[derive(Parser)]
#[command(name = "frlab", version, about = "Fourier-ratio experiments and acceptance suite")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (JSON, schema 1).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Ratio scans over the measure corpus or polygons.
    Ratio(RunArgs),
    /// Random trigonometric approximation sweep.
    Approx(RunArgs),
    /// Sparse recovery trials.
    Recover(RunArgs),
    /// Discrete suite on Z_N.
    Discrete(RunArgs),
    /// Any scaling scenario (Knapp arc, Cantor set, corpus, polygons, L² counterexample).
    Scan(RunArgs),
    /// Convex-body degree law.
    Convex(RunArgs),
    /// The acceptance suite.
    Accept {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out/acceptance")]
        out: PathBuf,
        /// Comma-separated criterion ids (default: all).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

fn allowed(cmd: &Command) -> &'static [Experiment] {
    use Experiment::*;
    match cmd {
        Command::Ratio(_) => &[RatioScan, PolygonScaling],
        Command::Approx(_) => &[ApproxSweep],
        Command::Recover(_) => &[RecoveryPhase],
        Command::Discrete(_) => &[DiscreteSuite],
        Command::Scan(_) => &[RatioScan, KnappCircle, CantorDichotomy, PolygonScaling, L2Counterexample],
        Command::Convex(_) => &[ConvexDegree, PolygonScaling],
        Command::Accept { .. } => &[],
    }
}

fn run(cli: Cli) -> frlab::Result<bool> {
    let args = match &cli.command {
        Command::Accept { config, seed, out, only } => {
            let mut opts = AcceptanceOptions::default();
            if let Some(path) = config {
                opts.seed = ExperimentConfig::load(path)?.seed;
            }
            if let Some(s) = seed {
                opts.seed = *s;
            }
            let ids: Vec<u8> = if only.is_empty() { (1..=11).collect() } else { only.clone() };
            let summary = run_criteria(&opts, &ids);
            summary.write(out)?;
            for c in &summary.criteria {
                println!("{}", c.line());
            }
            return Ok(summary.pass());
        }
        Command::Ratio(a)
        | Command::Approx(a)
        | Command::Recover(a)
        | Command::Discrete(a)
        | Command::Scan(a)
        | Command::Convex(a) => a,
    };
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if !allowed(&cli.command).contains(&cfg.experiment) {
        return Err(frlab::Error::Config(format!(
            "experiment `{}` is not run by this subcommand",
            cfg.experiment.name()
        )));
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(o) = &args.out {
        cfg.output_dir = o.clone();
    }
    let summary = run_experiment(&cfg)?;
    for r in &summary.results {
        let slope = r
            .slope()
            .map(|s| format!(" slope {s:.4}"))
            .unwrap_or_default();
        println!("{:<28} {}{slope}", r.name, if r.pass { "PASS" } else { "FAIL" });
        for c in &r.checks {
            println!(
                "    {:<34} {:>12.6} {} {}",
                c.name,
                c.value,
                c.band.describe(),
                if c.pass { "ok" } else { "FAIL" }
            );
        }
    }
    println!("outputs in {}", cfg.output_dir.display());
    Ok(summary.pass())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("frlab: {e}");
            ExitCode::from(2)
        }
    }
}
