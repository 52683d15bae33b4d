use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use moyal_lab::{run_experiment, run_lyapunov, run_sweep, validate, ExperimentConfig, LabError, RunOptions, RunReport};

#[derive(Parser)]
#[command(name = "moyal", version, about = "Classical, Wigner-Moyal and decoherent phase-space experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory; overrides the config's `output_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Write binary field snapshots.
    #[arg(long, global = true, value_enum, default_value_t = Switch::Off)]
    snapshots: Switch,

    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment.
    Simulate { config: PathBuf },
    /// Run an experiment once per sweep value.
    Sweep { config: PathBuf },
    /// Compute only the Lyapunov exponents and diffusion coefficient.
    Lyapunov { config: PathBuf },
    /// Check a config without running it.
    Validate { config: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

fn print_run(report: &RunReport, dir: &std::path::Path) {
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let d = &report.derived;
    if let Some(l) = &d.lyapunov {
        println!("lyapunov exponent: {:.6} ({})", l.lambda, l.unit);
    }
    for (engine, tb) in &d.break_times {
        match tb {
            Some(t) => println!("break time ({engine}): {t:.6}"),
            None => println!("break time ({engine}): not reached"),
        }
    }
    if let Some(s) = &d.standard_map {
        println!(
            "standard map K = {}: lambda {:.6} per step, D = {:.4} +- {:.4} (K^2/4 = {:.4})",
            s.k, s.lambda, s.diffusion, s.diffusion_standard_error, s.quasilinear_diffusion
        );
    }
    println!("wrote {}", dir.display());
}

fn run(cli: Cli) -> Result<(), LabError> {
    let snapshots = cli.snapshots == Switch::On;
    match cli.command {
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let setup = validate(&cfg)?;
            if let Some(s) = &cfg.sweep {
                for (i, &v) in s.values.iter().enumerate() {
                    validate(&cfg.sweep_member(v, cfg.output_dir().join(format!("run-{i:03}"))))?;
                }
            }
            println!("{}: ok ({} steps)", config.display(), setup.n_steps);
        }
        Command::Simulate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = cli.out.unwrap_or_else(|| cfg.output_dir());
            let report = run_experiment(
                &cfg,
                &RunOptions {
                    out_dir: Some(dir.clone()),
                    snapshots,
                },
            )?;
            print_run(&report, &dir);
        }
        Command::Lyapunov { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = cli.out.unwrap_or_else(|| cfg.output_dir());
            let report = run_lyapunov(
                &cfg,
                &RunOptions {
                    out_dir: Some(dir.clone()),
                    snapshots: false,
                },
            )?;
            print_run(&report, &dir);
        }
        Command::Sweep { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            let dir = cli.out.unwrap_or_else(|| cfg.output_dir());
            let outcome = run_sweep(&cfg, cli.threads, Some(dir.clone()), snapshots)?;
            for row in &outcome.aggregate {
                let breaks: Vec<String> = row
                    .break_times
                    .iter()
                    .map(|(e, t)| match t {
                        Some(t) => format!("{e} {t:.4}"),
                        None => format!("{e} -"),
                    })
                    .collect();
                println!(
                    "{} = {}: {} {}",
                    outcome.parameter.as_str(),
                    row.value,
                    row.status,
                    breaks.join(", ")
                );
            }
            for w in outcome.runs.iter().flatten().flat_map(|r| &r.warnings) {
                eprintln!("warning: {w}");
            }
            println!("wrote {}", dir.join("aggregate.json").display());
            if let Some(e) = outcome.first_error() {
                return Err(match e {
                    LabError::Validation { field, reason } => LabError::validation(field.clone(), reason.clone()),
                    LabError::Numerical { engine, detail } => LabError::Numerical {
                        engine: engine.clone(),
                        detail: detail.clone(),
                    },
                    LabError::Io { path, source } => {
                        LabError::io(path.clone(), std::io::Error::new(source.kind(), source.to_string()))
                    }
                });
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
