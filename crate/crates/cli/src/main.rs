use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ghzsim_core::photonic::ExperimentConfig;
use ghzsim_core::Error;
use ghzsim_cli::pipeline::{self, Mode, PipelineOutput, PipelineSpec};

/// Simulator and estimation toolkit for a three-photon time-bin GHZ
/// experiment.
#[derive(Parser)]
#[command(name = "ghzsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CliMode {
    /// Exact lossless pipeline; metrics evaluated on the model state.
    Ideal,
    /// White-noise GHZ model measured with the configured detectors, then
    /// reconstructed by maximum likelihood.
    NoisyModel,
    /// Photon-number Monte Carlo and analytic rate estimates.
    MonteCarlo,
}

#[derive(Subcommand)]
enum Command {
    /// Generate data and run the full pipeline for the chosen mode.
    Simulate {
        #[arg(long, value_enum)]
        mode: CliMode,
        /// Experiment config JSON; defaults to the built-in lab parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        /// Pulses per tomography setting (Monte Carlo samples in
        /// monte-carlo mode).
        #[arg(long, default_value_t = 100_000)]
        pulses: u64,
        /// Bootstrap resamples for error bars; 0 disables the bootstrap.
        #[arg(long, default_value_t = 200)]
        resamples: usize,
        #[arg(long)]
        out: PathBuf,
        /// GHZ weight of the white-noise model (noisy-model mode).
        #[arg(long, default_value_t = 0.672)]
        p_white: f64,
        /// Skip the per-detector efficiency normalization before inversion.
        #[arg(long)]
        no_efficiency_correction: bool,
    },
    /// Reconstruct a density matrix from a counts CSV (no metrics).
    Tomograph {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_efficiency_correction: bool,
    },
    /// Full analysis of an existing counts CSV: reconstruction, metrics,
    /// bootstrap error bars.
    Analyze {
        #[arg(long)]
        counts: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        resamples: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        no_efficiency_correction: bool,
    },
    /// Emit figure data and metrics for a stored density matrix.
    Report {
        #[arg(long)]
        density: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_NON_CONVERGENCE: u8 = 3;
const EXIT_IO: u8 = 4;

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::InvalidConfig(_) | Error::Json(_) => EXIT_CONFIG,
        Error::MleNonConvergence { .. } => EXIT_NON_CONVERGENCE,
        Error::BootstrapResample { source, .. } => exit_code_for(source),
        Error::Io(_) | Error::Csv(_) => EXIT_IO,
        _ => 1,
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<ExperimentConfig, Error> {
    match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)?;
            ExperimentConfig::from_json(&text)
        }
        None => Ok(ExperimentConfig::lab()),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Simulate {
            mode,
            config,
            seed,
            pulses,
            resamples,
            out,
            p_white,
            no_efficiency_correction,
        } => {
            let spec = PipelineSpec {
                mode: match mode {
                    CliMode::Ideal => Mode::Ideal,
                    CliMode::NoisyModel => Mode::NoisyModel,
                    CliMode::MonteCarlo => Mode::MonteCarlo,
                },
                config: load_config(&config)?,
                counts_path: None,
                output_dir: out,
                seed,
                pulses_per_setting: pulses,
                bootstrap_resamples: resamples,
                p_white,
                efficiency_correction: !no_efficiency_correction,
            };
            match pipeline::run_pipeline(&spec)? {
                PipelineOutput::Metrics(report) => {
                    println!("{}", serde_json::to_string_pretty(&report)?)
                }
                PipelineOutput::MonteCarlo(report) => {
                    println!("{}", serde_json::to_string_pretty(&report)?)
                }
            }
            Ok(())
        }
        Command::Tomograph {
            counts,
            config,
            out,
            no_efficiency_correction,
        } => {
            let cfg = load_config(&config)?;
            let stats =
                pipeline::run_tomograph(&counts, &cfg, !no_efficiency_correction, &out)?;
            println!("{}", serde_json::to_string_pretty(&stats)?);
            Ok(())
        }
        Command::Analyze {
            counts,
            config,
            seed,
            resamples,
            out,
            no_efficiency_correction,
        } => {
            let spec = PipelineSpec {
                mode: Mode::AnalyzeCounts,
                config: load_config(&config)?,
                counts_path: Some(counts),
                output_dir: out,
                seed,
                pulses_per_setting: 1,
                bootstrap_resamples: resamples,
                p_white: 0.0,
                efficiency_correction: !no_efficiency_correction,
            };
            match pipeline::run_pipeline(&spec)? {
                PipelineOutput::Metrics(report) => {
                    println!("{}", serde_json::to_string_pretty(&report)?)
                }
                PipelineOutput::MonteCarlo(_) => unreachable!("analyze mode yields metrics"),
            }
            Ok(())
        }
        Command::Report {
            density,
            config,
            out,
        } => {
            let cfg = load_config(&config)?;
            let report = pipeline::run_report(&density, &cfg, &out)?;
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
