use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use evenodd_cli::acceptance;
use evenodd_cli::config::{Config, Method, ModelKind};
use evenodd_cli::{emit_outputs, run_sweep};
use evenodd_core::geometric_alpha;

#[derive(Parser)]
#[command(name = "evenodd", version, about = "Entanglement sweeps for quadratic boson lattices and XY spin arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a TOML config.
    Sweep {
        config: PathBuf,
        /// Overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the config against the exact oracle of its model kind
    /// (fock_oracle for bosons, ed for spins) next to the analytic method.
    Oracle {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the acceptance suite.
    Check {
        /// Only these criteria (1 to 10).
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// Print the geometric factor of the isotropic d-dimensional lattice.
    Alpha {
        #[arg(long)]
        d: usize,
        /// Midpoint nodes per axis; defaults shrink with d.
        #[arg(long)]
        resolution: Option<usize>,
    },
}

const CONFIG_ERROR: u8 = 1;
const NUMERICAL_FAILURE: u8 = 2;

fn sweep(mut config: Config, out: Option<PathBuf>) -> ExitCode {
    if let Some(dir) = out {
        config.output.dir = dir.display().to_string();
    }
    let result = match run_sweep(&config) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(CONFIG_ERROR);
        }
    };
    match emit_outputs(&config, &result, Path::new(&config.output.dir)) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(NUMERICAL_FAILURE);
        }
    }
    let mut counts = std::collections::BTreeMap::new();
    for r in &result.rows {
        *counts.entry(r.status.label()).or_insert(0usize) += 1;
    }
    let summary: Vec<String> = counts.iter().map(|(k, v)| format!("{v} {k}")).collect();
    println!("{} rows: {}", result.rows.len(), summary.join(", "));
    ExitCode::from(result.exit_code() as u8)
}

fn load(path: &Path) -> Result<Config, ExitCode> {
    Config::load(path).map_err(|e| {
        eprintln!("error: {e}");
        ExitCode::from(CONFIG_ERROR)
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep { config, out } => match load(&config) {
            Ok(c) => sweep(c, out),
            Err(code) => code,
        },
        Command::Oracle { config, out } => {
            let mut c = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            c.methods.list = match c.model.kind {
                ModelKind::Boson => vec![Method::Gaussian, Method::FockOracle],
                ModelKind::Spin => vec![Method::Rpa, Method::Ed],
            };
            let out = out.unwrap_or_else(|| Path::new(&c.output.dir).join("oracle"));
            // re-validate: the oracle methods have their own size limits
            match Config::from_toml(&c.to_toml()) {
                Ok(c) => sweep(c, Some(out)),
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(CONFIG_ERROR)
                }
            }
        }
        Command::Check { only } => {
            let ids: Vec<u8> = if only.is_empty() { (1..=10).collect() } else { only };
            let mut all = true;
            for id in ids {
                if !(1..=10).contains(&id) {
                    eprintln!("error: no criterion {id}");
                    return ExitCode::from(CONFIG_ERROR);
                }
                let report = acceptance::run_criterion(id);
                all &= report.passed();
                print!("{report}");
            }
            if all {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(NUMERICAL_FAILURE)
            }
        }
        Command::Alpha { d, resolution } => {
            if d == 0 {
                eprintln!("error: d must be positive");
                return ExitCode::from(CONFIG_ERROR);
            }
            let resolution = resolution.unwrap_or(match d {
                1..=3 => 1024,
                4 => 64,
                _ => 16,
            });
            match geometric_alpha(&vec![1.0; d], resolution) {
                Ok(a) => {
                    println!("d = {d}  resolution = {resolution}  alpha = {:.10}", a.alpha);
                    if d <= 2 {
                        println!("closed form d(1 - ln 2) = {:.10}", d as f64 * (1.0 - std::f64::consts::LN_2));
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(CONFIG_ERROR)
                }
            }
        }
    }
}
