//! Benchmark CLI for the magsplit propagators.
//!
//! ```text
//! magsplit propagate --config FILE [--scheme ID] [--h H] [--full] [--out PATH]
//! magsplit sweep     --config FILE [--full]
//! magsplit verify
//! ```
//!
//! Exit codes: 0 success, 2 configuration error, 3 reference cross-validation failure,
//! 1 any other runtime failure.

use clap::{Parser, Subcommand};
use std::path::PathBuf;

use magsplit::harness::{self, ExperimentConfig};
use magsplit::schemes::SchemeId;
use magsplit::{FftEngine, MagsplitError};

#[derive(Parser)]
#[command(
    name = "magsplit",
    version,
    about = "Spectral-collocation propagators for the semiclassical Schrödinger equation with a laser potential: convergence and cost benchmarks"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one scheme at one step size and report error, cost, and norm drift.
    Propagate {
        /// JSON experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Scheme to run (default: first scheme in the config).
        #[arg(long)]
        scheme: Option<String>,
        /// Step size (default: largest step size in the config).
        #[arg(long)]
        h: Option<f64>,
        /// Use the problem's full benchmark extent instead of the desk-scale one.
        #[arg(long)]
        full: bool,
        /// Write the run record (with config echo) as JSON to this path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every scheme × step-size combination of a config and fit convergence slopes.
    Sweep {
        /// JSON experiment config.
        #[arg(long)]
        config: PathBuf,
        /// Use the problem's full benchmark extent instead of the desk-scale one.
        #[arg(long)]
        full: bool,
    },
    /// Run the built-in operator-identity and oracle suite.
    Verify,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    });
}

fn exit_code(e: &MagsplitError) -> i32 {
    match e {
        MagsplitError::CrossValidation { .. } => 3,
        MagsplitError::Config(_)
        | MagsplitError::Json(_)
        | MagsplitError::Io(_)
        | MagsplitError::GridMismatch(_) => 2,
        _ => 1,
    }
}

fn load_config(path: &PathBuf, full: bool) -> Result<ExperimentConfig, MagsplitError> {
    let mut cfg = ExperimentConfig::from_json_file(path)?;
    if full {
        cfg.apply_full()?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<i32, MagsplitError> {
    match cli.cmd {
        Cmd::Propagate { config, scheme, h, full, out } => {
            let cfg = load_config(&config, full)?;
            let id: SchemeId = match scheme {
                Some(s) => s.parse()?,
                None => cfg.scheme_ids()?[0],
            };
            let h = match h {
                Some(v) if v > 0.0 && v.is_finite() => v,
                Some(v) => {
                    return Err(MagsplitError::Config(format!("--h {v} must be finite and > 0")))
                }
                None => cfg.h_list()?[0],
            };
            let grid = cfg.grid()?;
            let u0 = cfg.initial_state(&grid)?;
            eprintln!(
                "reference: {} at h_ref = {:.6e} (cross-validated)…",
                cfg.reference_scheme, cfg.h_ref
            );
            let reference = harness::make_reference(&cfg, &grid, &u0)?;
            eprintln!(
                "reference accepted: cross-validation distance {:.3e}",
                reference.cross_validation_diff
            );
            let mut stepper = cfg.make_stepper(id, &grid)?;
            let mut engine = FftEngine::new(&grid);
            let (outcome, trace) = if cfg.record_energy {
                let (o, t) =
                    harness::propagate_recording(&mut stepper, &mut engine, &u0, cfg.t_final, h, 100)?;
                (o, Some(t))
            } else {
                (harness::propagate(&mut stepper, &mut engine, &u0, cfg.t_final, h)?, None)
            };
            let record = magsplit::RunRecord {
                scheme: id.as_str().to_string(),
                h,
                error: outcome.state.l2_distance(&reference.state),
                seconds: outcome.seconds,
                transforms: outcome.transforms,
                norm_drift: outcome.norm_drift,
                energy_trace: trace,
            };
            println!("scheme,h,error,seconds,transforms,norm_drift");
            println!(
                "{},{},{:.12e},{:.3},{},{:.3e}",
                record.scheme, record.h, record.error, record.seconds, record.transforms,
                record.norm_drift
            );
            if stepper.krylov_usage().calls > 0 {
                let k = stepper.krylov_usage();
                eprintln!(
                    "lanczos: {} calls, {} matvecs ({:.2} per call)",
                    k.calls,
                    k.matvecs,
                    k.matvecs as f64 / k.calls as f64
                );
            }
            if let Some(path) = out {
                #[derive(serde::Serialize)]
                struct PropagateReport<'a> {
                    config: &'a ExperimentConfig,
                    reference_cross_diff: f64,
                    record: &'a magsplit::RunRecord,
                }
                let report = PropagateReport {
                    config: &cfg,
                    reference_cross_diff: reference.cross_validation_diff,
                    record: &record,
                };
                harness::write_text(&path, &serde_json::to_string_pretty(&report)?)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(0)
        }
        Cmd::Sweep { config, full } => {
            let cfg = load_config(&config, full)?;
            let result = harness::sweep(&cfg)?;
            print!("{}", result.to_csv());
            for fit in &result.slopes {
                eprintln!(
                    "slope[{}] = {:.3} ({} points)",
                    fit.scheme, fit.slope, fit.points_used
                );
            }
            eprintln!("reference cross-validation distance: {:.3e}", result.reference_cross_diff);
            let stem = cfg.output_stem();
            let csv_path = format!("{stem}_sweep.csv");
            let json_path = format!("{stem}_sweep.json");
            harness::write_text(&csv_path, &result.to_csv())?;
            harness::write_text(&json_path, &result.to_json(&cfg)?)?;
            eprintln!("wrote {csv_path} and {json_path}");
            Ok(0)
        }
        Cmd::Verify => {
            let results = harness::self_check();
            let mut all_ok = true;
            for r in &results {
                let tag = if r.passed { "ok  " } else { "FAIL" };
                println!("{tag}  {:<45} {}", r.name, r.detail);
                all_ok &= r.passed;
            }
            if all_ok {
                println!("all {} checks passed", results.len());
                Ok(0)
            } else {
                eprintln!("verification failed");
                Ok(1)
            }
        }
    }
}
