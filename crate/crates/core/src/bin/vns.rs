use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use vns_core::diagnostics::{decay_fit, format_value, parse_window, read_series_csv, DecayFit};
use vns_core::driver::{heat_decay, picard_local_solve, run, twin_run, write_json, RunConfig};
use vns_core::{Result, VnsError};

/// Vlasov–Navier–Stokes laboratory.
#[derive(Parser)]
#[command(name = "vns", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Coupled run: energy.csv, summary.json and snapshots.
    Run {
        config: PathBuf,
        /// Output directory, overriding `output_dir`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Twin-run stability series for a perturbation of size ε.
    Twin {
        config: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Picard iteration of the local existence map.
    Picard {
        config: PathBuf,
        /// Horizon; defaults to the step conditions.
        #[arg(long = "T")]
        horizon: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Free heat decay of a narrow Gaussian.
    HeatDecay {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power-law fit of CSV columns over a time window.
    Fit {
        series: PathBuf,
        #[arg(long)]
        window: String,
        /// Columns to fit; defaults to E0 and E1 when present.
        #[arg(long = "column")]
        columns: Vec<String>,
        /// Name of the time column.
        #[arg(long, default_value = "t")]
        time: String,
    },
}

fn out_dir(cfg: &RunConfig, out: Option<PathBuf>) -> Result<PathBuf> {
    let dir = out.unwrap_or_else(|| cfg.output_dir.clone());
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn print_json<T: Serialize>(v: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn write_columns(path: &Path, header: &[&str], cols: &[&[f64]]) -> Result<()> {
    let mut w = csv::Writer::from_writer(BufWriter::new(File::create(path)?));
    w.write_record(header)?;
    for i in 0..cols[0].len() {
        w.write_record(cols.iter().map(|c| format_value(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct RunBrief<'a> {
    out: &'a Path,
    t_final: f64,
    records: usize,
    energy_balance: f64,
    e0_monotone: bool,
    w1_le_cs: bool,
    mass_drift: f64,
}

#[derive(Serialize)]
struct FitEntry {
    column: String,
    #[serde(flatten)]
    fit: DecayFit,
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let dir = out_dir(&cfg, out)?;
            let s = run(&cfg, &dir)?;
            print_json(&RunBrief {
                out: &dir,
                t_final: s.t_final,
                records: s.records,
                energy_balance: s.verdicts.energy_balance,
                e0_monotone: s.verdicts.e0_monotone,
                w1_le_cs: s.verdicts.w1_le_cs,
                mass_drift: s.verdicts.mass_drift,
            })
        }
        Command::Twin { config, eps, out } => {
            if !eps.is_finite() {
                return Err(VnsError::Usage(format!("eps must be finite, got {eps}")));
            }
            let cfg = RunConfig::from_path(&config)?;
            let dir = out_dir(&cfg, out)?;
            let r = twin_run(&cfg, eps)?;
            write_columns(&dir.join("twin.csv"), &["t", "Y", "du2", "dz2"], &[&r.t, &r.y, &r.du2, &r.dz2])?;
            write_json(&dir.join("twin.json"), &r)?;
            print_json(&serde_json::json!({ "eps": r.eps, "k_max": r.k_max, "y_final": r.y.last() }))
        }
        Command::Picard { config, horizon, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let dir = out_dir(&cfg, out)?;
            let r = picard_local_solve(&cfg, horizon)?;
            write_json(&dir.join("picard.json"), &r)?;
            print_json(&r)
        }
        Command::HeatDecay { config, out } => {
            let cfg = RunConfig::from_path(&config)?;
            let dir = out_dir(&cfg, out)?;
            let r = heat_decay(&cfg)?;
            write_columns(&dir.join("heat.csv"), &["t", "l2_sq", "grad_sq"], &[&r.t, &r.l2_sq, &r.grad_sq])?;
            write_json(&dir.join("heat.json"), &r)?;
            print_json(&serde_json::json!({
                "fit_l2": r.fit_l2,
                "fit_grad": r.fit_grad,
                "expected_l2": r.expected_l2,
                "expected_grad": r.expected_grad,
            }))
        }
        Command::Fit { series, window, columns, time } => {
            let window = parse_window(&window)?;
            let s = read_series_csv(File::open(&series)?)?;
            let t = s.column(&time)?;
            let columns = if columns.is_empty() {
                let defaults: Vec<String> = ["E0", "E1"]
                    .iter()
                    .filter(|c| s.header.iter().any(|h| h == *c))
                    .map(|c| c.to_string())
                    .collect();
                if defaults.is_empty() {
                    s.header.iter().filter(|h| **h != time).cloned().collect()
                } else {
                    defaults
                }
            } else {
                columns
            };
            let fits = columns
                .into_iter()
                .map(|c| {
                    let y = s.column(&c)?;
                    Ok(FitEntry { fit: decay_fit(&t, &y, window)?, column: c })
                })
                .collect::<Result<Vec<_>>>()?;
            print_json(&fits)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vns: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
