use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use sicsim_cli::config::ScenarioConfig;
use sicsim_cli::runner::{format_report, run_scenario, Pipeline};
use sicsim_cli::sigfile;
use sicsim_cli::sweep::{run_sweep, Axis};
use sicsim_core::waveform::{generate, WaveformKind, WaveformSpec};
use std::path::PathBuf;

/// Self-interference cancellation simulator: photonic analog subtraction
/// with digital amplitude/delay pre-matching and adaptive residual
/// cancellation.
#[derive(Parser)]
#[command(name = "sicsim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a waveform and write it as a SIG1 binary dump.
    Synth(SynthArgs),
    /// Run calibration only and print the pre-matching solution.
    Prematch {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run one scenario and write report.json plus CSV artifacts.
    RunScenario {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Cartesian sweep over config keys.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Axis as key=v1,v2,... (repeatable), e.g.
        /// --axis si_waveform.bandwidth_hz=0.2e9,0.5e9,1e9,2e9
        #[arg(long = "axis")]
        axes: Vec<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pretty-print a run report directory.
    Report {
        #[arg(long = "in")]
        dir: PathBuf,
    },
}

#[derive(Args)]
struct SynthArgs {
    /// Waveform family: lfm or qpsk.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    center_freq_hz: f64,
    /// LFM sweep width.
    #[arg(long, default_value_t = 2e9)]
    bandwidth_hz: f64,
    /// QPSK symbol rate.
    #[arg(long, default_value_t = 2e9)]
    baud_hz: f64,
    #[arg(long, default_value_t = 0.35)]
    rolloff: f64,
    #[arg(long, default_value_t = 2)]
    symbol_seed: u64,
    #[arg(long, default_value_t = 10e-6)]
    duration_s: f64,
    #[arg(long, default_value_t = 10e9)]
    sample_rate_hz: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Synth(args) => {
            let kind = match args.kind.as_str() {
                "lfm" => WaveformKind::Lfm {
                    bandwidth_hz: args.bandwidth_hz,
                },
                "qpsk" => WaveformKind::Qpsk {
                    baud_hz: args.baud_hz,
                    rolloff: args.rolloff,
                    symbol_seed: args.symbol_seed,
                },
                other => anyhow::bail!("unknown waveform kind '{other}' (expected lfm or qpsk)"),
            };
            let spec = WaveformSpec {
                kind,
                center_freq_hz: args.center_freq_hz,
                duration_s: args.duration_s,
            };
            let sig = generate(&spec, args.sample_rate_hz).context("stage synth")?;
            sigfile::write_signal(&args.out, &sig)?;
            println!(
                "wrote {} samples at {:.3e} Sa/s to {}",
                sig.len(),
                sig.sample_rate(),
                args.out.display()
            );
        }
        Command::Prematch { config } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let pipeline = Pipeline::from_config(&cfg)?;
            let run = pipeline.run_prematch()?;
            println!("gain_factor = {:.4}", run.solution.gain_factor);
            println!("fine_delay_points = {}", run.solution.fine_delay_points);
            println!(
                "coarse_delay_samples = {}",
                run.solution.coarse_delay_samples
            );
            println!("residual_power_db = {:.2}", run.solution.residual_power_db);
            if run.fine.exhaustive_fallback {
                eprintln!("warning: fine search fell back to an exhaustive scan");
            }
        }
        Command::RunScenario { config, out } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let report = run_scenario(&cfg, &out)?;
            println!(
                "analog {:.2} dB, digital {:.2} dB, total {:.2} dB ({:?})",
                report.analog_depth_db,
                report.digital_depth_db,
                report.total_depth_db,
                report.algorithm
            );
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            println!("report written to {}", out.join("report.json").display());
        }
        Command::Sweep { config, axes, out } => {
            let cfg = ScenarioConfig::from_path(&config)?;
            let axes = axes
                .iter()
                .map(|a| Axis::parse(a))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let results = run_sweep(&cfg, &axes, &out)?;
            let failed = results.iter().filter(|r| r.outcome.is_err()).count();
            println!(
                "{} cells run, {} failed; summary at {}",
                results.len(),
                failed,
                out.join("summary.csv").display()
            );
            for r in results.iter().filter(|r| r.outcome.is_err()) {
                eprintln!("cell {} failed: {}", r.index, r.outcome.as_ref().unwrap_err());
            }
        }
        Command::Report { dir } => {
            print!("{}", format_report(&dir)?);
        }
    }
    Ok(())
}
