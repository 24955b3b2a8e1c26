use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use oddm_core::analysis::{theorem1, BoundParams, DEFAULT_TRUNC};
use oddm_core::sim::validate::{self, Preset};
use oddm_core::sim::{self, write_bounds, write_results, BoundRow};
use oddm_core::{ConfigError, OddmError, SimConfig};

#[derive(Parser)]
#[command(name = "oddm", version, about = "ODDM with time-domain THP: Monte Carlo BER and closed-form bounds")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run every SNR of a config at the first alpha in `alpha_list`.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads, 0 for one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Tabulate the closed-form bounds over an alpha range and SNR list.
    Bounds {
        #[arg(long = "mod")]
        order: u32,
        /// `start:stop:step`, stop included.
        #[arg(long)]
        alpha: String,
        /// Comma-separated SNRs in dB.
        #[arg(long = "snr-db", value_delimiter = ',', num_args = 1.., required = true)]
        snr_db: Vec<f64>,
        #[arg(long = "sigma-h1-sq")]
        sigma_h1_sq: f64,
        #[arg(long)]
        out: PathBuf,
        /// Series truncation `H`.
        #[arg(long, default_value_t = DEFAULT_TRUNC)]
        trunc: usize,
    },
    /// Run the full `alpha_list x snr_db_list` cross product.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Keep only the lowest-BER alpha at each SNR.
        #[arg(long)]
        optimize_alpha: bool,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Run the built-in self-checks.
    Validate {
        #[arg(long, default_value = "small")]
        preset: Preset,
    },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_VALIDATION: u8 = 3;

fn parse_range(s: &str) -> Result<Vec<f64>, ConfigError> {
    let bad = || ConfigError::Sim(format!("alpha range `{s}` is not start:stop:step"));
    let parts: Vec<f64> = s.split(':').map(|p| p.trim().parse::<f64>().map_err(|_| bad())).collect::<Result<_, _>>()?;
    let [a0, a1, step] = parts[..] else { return Err(bad()) };
    if !(step > 0.0 && a0.is_finite() && a1 >= a0) {
        return Err(bad());
    }
    let n = ((a1 - a0) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| a0 + i as f64 * step).collect())
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot write {}", path.display()))?))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.cmd {
        Cmd::Simulate { config, out, workers } => {
            let cfg = SimConfig::from_path(&config)?;
            write_results(create(&out)?, &sim::simulate(&cfg, workers)?)?;
        }
        Cmd::Sweep { config, out, optimize_alpha, workers } => {
            let cfg = SimConfig::from_path(&config)?;
            let mut records = sim::sweep(&cfg, workers)?;
            if optimize_alpha {
                records = sim::optimize_alpha(&records);
            }
            write_results(create(&out)?, &records)?;
        }
        Cmd::Bounds { order, alpha, snr_db, sigma_h1_sq, out, trunc } => {
            let mut rows = Vec::new();
            for a in parse_range(&alpha)? {
                for &s in &snr_db {
                    let p = BoundParams::from_snr_db(order, a, sigma_h1_sq, s)?.with_trunc(trunc)?;
                    let bounds = theorem1(&p)?;
                    rows.push(BoundRow { mod_order: order, alpha: a, snr_db: s, sigma_h1_sq, bounds });
                }
            }
            write_bounds(create(&out)?, &rows)?;
        }
        Cmd::Validate { preset } => {
            let report = validate::run(preset)?;
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(EXIT_VALIDATION));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            let config = match e.downcast_ref::<OddmError>() {
                Some(inner) => inner.is_config(),
                None => e.downcast_ref::<ConfigError>().is_some(),
            };
            ExitCode::from(if config { EXIT_CONFIG } else { 1 })
        }
    }
}
