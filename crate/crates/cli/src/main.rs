use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use radhydro_cli::config::parse_config;
use radhydro_cli::run::{run_command, verify_command, RunOptions};
use radhydro_cli::tools::{exponents_command, kernel_command, mms_command, ExponentArgs, KernelArgs};
use radhydro_core::exponents::T0Reading;
use radhydro_core::Params;

/// Exit status for usage, configuration and i/o errors.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(
    name = "radhydro",
    version,
    about = "1D periodic viscous radiation hydrodynamics: simulate and audit"
)]
struct Cli {
    /// Suppress progress and verdict lines on stderr.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Reading {
    AsPrinted,
    LinearInP,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate and audit; exits 0 iff the run completes and every enabled audit passes.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `[output] dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Continue from a checkpoint written under the same configuration.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Tabulate the torus kernel against its series and certify its sign.
    Kernel {
        #[arg(long, default_value = "kernel")]
        out: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        b: f64,
        #[arg(long, default_value_t = 1000)]
        points: usize,
        #[arg(long, default_value_t = 100_000)]
        terms: u32,
    },
    /// Admissible-n search over a beta grid and the closed-form consistency sweep.
    Exponents {
        #[arg(long, default_value = "exponents")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "as-printed")]
        reading: Reading,
        #[arg(long, default_value_t = 200)]
        betas: usize,
        #[arg(long, default_value_t = 10_000)]
        probes: usize,
    },
    /// Manufactured-solution convergence study.
    Mms {
        /// Physical constants are taken from this configuration when given.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "mms")]
        out: PathBuf,
    },
    /// Re-audit a finished run directory and compare with its stored artifacts.
    Verify {
        #[arg(long)]
        out: PathBuf,
    },
}

fn status(pass: bool) -> ExitCode {
    ExitCode::from(u8::from(!pass))
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    let quiet = cli.quiet;
    let say = |line: String| {
        if !quiet {
            eprintln!("{line}");
        }
    };
    match cli.command {
        Command::Run { config, out, resume } => {
            let mut cfg = parse_config(&config)?;
            if let Some(out) = out {
                cfg.output_dir = out;
            }
            let report = run_command(&cfg, &RunOptions { resume, quiet })?;
            Ok(ExitCode::from(report.outcome.exit_code() as u8))
        }
        Command::Kernel {
            out,
            a,
            b,
            points,
            terms,
        } => {
            let s = kernel_command(
                &KernelArgs {
                    a,
                    b,
                    points,
                    terms,
                    ..KernelArgs::default()
                },
                &out,
            )?;
            say(format!(
                "kernel: max |series - closed| = {:.3e}, max K = {:.3e}, all pass = {}",
                s.max_abs_difference, s.certificate.max_value, s.all_pass
            ));
            Ok(status(s.all_pass))
        }
        Command::Exponents {
            out,
            reading,
            betas,
            probes,
        } => {
            let reading = match reading {
                Reading::AsPrinted => T0Reading::AsPrinted,
                Reading::LinearInP => T0Reading::LinearInP,
            };
            let s = exponents_command(&ExponentArgs { reading, betas, probes }, &out)?;
            say(format!(
                "exponents: {}/{} betas admissible, iff agreement {:.4} ({} disagreements listed in {})",
                s.existence_admissible,
                betas,
                s.sweep.agreement_rate,
                s.sweep.disagreements,
                out.join("iff_disagreements.csv").display()
            ));
            Ok(status(s.all_pass))
        }
        Command::Mms { config, out } => {
            let params = match config {
                Some(path) => parse_config(&path)?.params,
                None => Params::default(),
            };
            let s = mms_command(&params, &out)?;
            say(format!(
                "mms: space orders {:?}, time orders {:?}",
                s.spatial.orders, s.temporal.orders
            ));
            Ok(status(s.all_pass))
        }
        Command::Verify { out } => {
            let r = verify_command(&out)?;
            println!("{}", serde_json::to_string_pretty(&r)?);
            Ok(status(r.ok()))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
