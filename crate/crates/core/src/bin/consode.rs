//! Command-line runner for conservative-ode experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use conservative_ode::analysis::elliptic_geometry;
use conservative_ode::config::{ExperimentConfig, SystemDef};
use conservative_ode::experiment::{self, exit_code, RunStatus};
use conservative_ode::{verify_multiplier, Error};

#[derive(Parser)]
#[command(name = "consode", version, about = "Conservative multiplier-method ODE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one experiment config and write its CSV artifacts.
    Run {
        config: PathBuf,
        /// Override a config key, e.g. `--set steps=100`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Output directory (overrides the config and the environment).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several configs on the same system and tabulate them.
    Compare {
        #[arg(required = true)]
        configs: Vec<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        /// Where to write compare.csv; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check Λ·f = 0 for a system file at random sample points.
    Verify {
        system: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        /// Half-width of the sampling box around the origin.
        #[arg(long, default_value_t = 2.0)]
        radius: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Discriminant, roots and merge distance of y² = x³ + a x + b.
    Geometry {
        #[arg(long, allow_hyphen_values = true)]
        a: f64,
        #[arg(long, allow_hyphen_values = true)]
        b: f64,
    },
}

fn parse_overrides(raw: &[String]) -> anyhow::Result<Vec<(String, String)>> {
    raw.iter()
        .map(|s| {
            s.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .with_context(|| format!("override `{s}` is not KEY=VALUE"))
        })
        .collect()
}

fn load(path: &Path, overrides: &[(String, String)]) -> Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::load(path, overrides).map_err(|e| {
        eprintln!("config error: {e}");
        ExitCode::from(exit_code::CONFIG as u8)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, overrides, out } => {
            let overrides = match parse_overrides(&overrides) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("config error: {e:#}");
                    return ExitCode::from(exit_code::CONFIG as u8);
                }
            };
            let mut cfg = match load(&config, &overrides) {
                Ok(c) => c,
                Err(code) => return code,
            };
            if let Some(dir) = out {
                cfg.output = dir;
            }
            let report = match experiment::run(&cfg) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(exit_code::CONFIG as u8);
                }
            };
            if let Err(e) = report.write_artifacts(&cfg.output) {
                eprintln!("error writing artifacts: {e}");
                return ExitCode::FAILURE;
            }
            let exit = report.exit_step.map_or("none".into(), |k| k.to_string());
            println!(
                "{}: {} after {} steps, max drift {:e}, exit step {}, artifacts in {}",
                cfg.label,
                report.status.name(),
                report.trajectory.len_steps(),
                report.max_drift,
                exit,
                cfg.output.display()
            );
            if let RunStatus::StepFailure { message, .. } = &report.status {
                eprintln!("{message}");
            }
            ExitCode::from(report.status.exit_code() as u8)
        }
        Command::Compare {
            configs,
            overrides,
            out,
        } => {
            let overrides = match parse_overrides(&overrides) {
                Ok(o) => o,
                Err(e) => {
                    eprintln!("config error: {e:#}");
                    return ExitCode::from(exit_code::CONFIG as u8);
                }
            };
            let mut cfgs = Vec::new();
            for path in &configs {
                match load(path, &overrides) {
                    Ok(c) => cfgs.push(c),
                    Err(code) => return code,
                }
            }
            let rows = match experiment::compare(&cfgs) {
                Ok(r) => r,
                Err(e @ Error::Input(_)) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(exit_code::CONFIG as u8);
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::FAILURE;
                }
            };
            let result = match out {
                Some(dir) => std::fs::create_dir_all(&dir)
                    .and_then(|_| std::fs::File::create(dir.join("compare.csv")))
                    .and_then(|f| experiment::write_compare_csv(&rows, std::io::BufWriter::new(f))),
                None => experiment::write_compare_csv(&rows, std::io::stdout().lock()),
            };
            if let Err(e) = result {
                eprintln!("error writing comparison: {e}");
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
        Command::Verify {
            system,
            tol,
            samples,
            radius,
            seed,
        } => {
            let def = match SystemDef::load(&system) {
                Ok(d) => d,
                Err(e) => {
                    eprintln!("config error: {e}");
                    return ExitCode::from(exit_code::CONFIG as u8);
                }
            };
            let sys = def.build().expect("validated on load");
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let pts: Vec<Vec<f64>> = (0..samples)
                .map(|_| (0..sys.n()).map(|_| rng.gen_range(-radius..=radius)).collect())
                .collect();
            let report = verify_multiplier(&sys, &pts, tol, None).expect("sample dimensions match");
            println!("system: {}", def.name);
            println!("samples: {}", report.samples);
            println!("max |Λf|: {:e}", report.max_residual);
            println!("max scaled |Λf|: {:e}", report.max_scaled_residual);
            println!("tol: {:e}", report.tol);
            println!("result: {}", if report.passed { "pass" } else { "FAIL" });
            if report.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Command::Geometry { a, b } => {
            let g = elliptic_geometry(a, b);
            if let Err(e) = g.write_csv(std::io::stdout().lock()) {
                eprintln!("{e}");
                return ExitCode::FAILURE;
            }
            ExitCode::SUCCESS
        }
    }
}
