//! The `qplr` command-line front end: thin dispatch from subcommands to
//! the [`crate::runner`] pipelines.
//!
//! Exit codes: 0 success / all checks passed, 1 verification check failed,
//! 2 usage or config error, 3 numerical stage error.

use crate::runner::{
    self, fmt_float, ExperimentConfig, OutputWriter, StageError, SweepAxis, TOOL_VERSION,
};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(name = "qplr", version = TOOL_VERSION, about = "quasiperiodic lattice transport toolkit")]
pub struct Cli {
    /// Experiment configuration (TOML, strict schema).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (default: config output_dir, then ./out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for phase sweeps and sweep-level parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Override the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrated density of states table (CSV: E, N).
    Ids,
    /// Group-velocity bound from the inverse IDS (JSON).
    Groupvel,
    /// Cesàro norm curve ‖Q_T‖ (CSV: T, central_norm, full_norm).
    Qnorm,
    /// Propagator light cone (CSV: t, r, value).
    Lightcone,
    /// Position moments p = 1, 2 (CSV: t, p, value).
    Moments,
    /// Lyapunov exponent over an energy grid (CSV: E, value, stderr).
    Lyapunov,
    /// Fibered rotation number over an energy grid (CSV: E, value, stderr).
    Rotation,
    /// Kotani density over spectrum-bulk energies (CSV: E, value, stderr).
    Kotani,
    /// Dual Q̃ diagonal entries (CSV: theta, k_center, eigenvalue, diagonal_entry).
    Dual,
    /// Hausdorff distance between primal and dual spectra (JSON).
    Dualcheck,
    /// Jordan-Wigner covariance and commutator checks (JSON).
    ChainVerify,
    /// Light-cone velocity fit (CSV + JSON).
    Lrfit,
    /// Full pipeline with cross-checks; exit 1 if any check fails.
    Verify,
    /// Repeat verify along one parameter axis.
    Sweep {
        #[arg(long)]
        axis: String,
        /// Comma-separated numeric values.
        #[arg(long, value_delimiter = ',')]
        values: Vec<f64>,
    },
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    if let Some(w) = cli.workers {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(w).build_global();
    }
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                StageError::Config(_) => 2,
                _ => 3,
            }
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, StageError> {
    let path = cli.config.as_deref().ok_or_else(|| {
        StageError::Config(runner::ConfigError::Invalid {
            field: "--config",
            message: "a config file is required".into(),
        })
    })?;
    let mut cfg = ExperimentConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: &ExperimentConfig) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn writer(cli: &Cli, cfg: &ExperimentConfig) -> Result<OutputWriter, StageError> {
    OutputWriter::new(&out_dir(cli, cfg), cfg.hash()).map_err(StageError::Io)
}

fn announce(path: &Path) {
    println!("wrote {}", path.display());
}

fn dispatch(cli: &Cli) -> Result<i32, StageError> {
    let cfg = load_config(cli)?;
    match &cli.command {
        Command::Ids => {
            let w = writer(cli, &cfg)?;
            let run = runner::run_ids(&cfg)?;
            let path = w
                .write_csv(
                    "ids.csv",
                    &["E", "N"],
                    run.table
                        .grid()
                        .iter()
                        .zip(run.table.n_values())
                        .map(|(&e, &n)| vec![fmt_float(e), fmt_float(n)]),
                )
                .map_err(StageError::Io)?;
            announce(&path);
            let path = w
                .write_csv(
                    "gaps.csv",
                    &["E_left", "E_right", "N_value"],
                    run.gaps
                        .gaps
                        .iter()
                        .map(|g| vec![fmt_float(g.e_left), fmt_float(g.e_right), fmt_float(g.n_value)]),
                )
                .map_err(StageError::Io)?;
            announce(&path);
        }
        Command::Groupvel => {
            let w = writer(cli, &cfg)?;
            let run = runner::run_ids(&cfg)?;
            let gv = runner::run_groupvel(&cfg, &run.table)?;
            let path = w.write_json("groupvel.json", &gv).map_err(StageError::Io)?;
            announce(&path);
            println!("q_norm_bound = {:.6}, lr_velocity_bound = {:.6}", gv.q_norm_bound, gv.lr_velocity_bound);
        }
        Command::Qnorm => {
            let w = writer(cli, &cfg)?;
            let curve = runner::run_qnorm(&cfg)?;
            let path = w
                .write_csv(
                    "qnorm.csv",
                    &["T", "central_norm", "full_norm"],
                    curve.points.iter().map(|p| {
                        vec![fmt_float(p.t), fmt_float(p.central_norm), fmt_float(p.full_norm)]
                    }),
                )
                .map_err(StageError::Io)?;
            announce(&path);
            println!("plateau = {:.6} ± {:.2e}", curve.plateau, curve.oscillation);
        }
        Command::Lightcone => {
            let w = writer(cli, &cfg)?;
            let cone = runner::run_lightcone(&cfg)?;
            let mut rows = Vec::new();
            for (ti, &t) in cone.times.iter().enumerate() {
                for (ri, &r) in cone.sites.iter().enumerate() {
                    rows.push(vec![fmt_float(t), r.to_string(), fmt_float(cone.values[[ti, ri]])]);
                }
            }
            let path = w
                .write_csv("lightcone.csv", &["t", "r", "value"], rows)
                .map_err(StageError::Io)?;
            announce(&path);
        }
        Command::Moments => {
            let w = writer(cli, &cfg)?;
            let rows = runner::run_moments(&cfg)?;
            let path = w
                .write_csv(
                    "moments.csv",
                    &["t", "p", "value"],
                    rows.iter().map(|r| vec![fmt_float(r.t), fmt_float(r.p), fmt_float(r.value)]),
                )
                .map_err(StageError::Io)?;
            announce(&path);
        }
        Command::Lyapunov => {
            let w = writer(cli, &cfg)?;
            let rows = runner::run_lyapunov(&cfg)?;
            let path = w
                .write_csv(
                    "lyapunov.csv",
                    &["E", "lyapunov", "stderr"],
                    rows.iter()
                        .map(|r| vec![fmt_float(r.e), fmt_float(r.value), fmt_float(r.std_error)]),
                )
                .map_err(StageError::Io)?;
            announce(&path);
        }
        Command::Rotation => {
            let w = writer(cli, &cfg)?;
            let rows = runner::run_rotation(&cfg)?;
            let path = w
                .write_csv(
                    "rotation.csv",
                    &["E", "rho", "stderr"],
                    rows.iter()
                        .map(|r| vec![fmt_float(r.e), fmt_float(r.value), fmt_float(r.std_error)]),
                )
                .map_err(StageError::Io)?;
            announce(&path);
        }
        Command::Kotani => {
            let w = writer(cli, &cfg)?;
            let rows = runner::run_kotani(&cfg)?;
            let path = w
                .write_csv(
                    "kotani.csv",
                    &["E", "density", "stderr"],
                    rows.iter()
                        .map(|r| vec![fmt_float(r.e), fmt_float(r.value), fmt_float(r.std_error)]),
                )
                .map_err(StageError::Io)?;
            announce(&path);
        }
        Command::Dual => {
            let w = writer(cli, &cfg)?;
            let run = runner::run_dual(&cfg)?;
            let path = w
                .write_csv(
                    "dual.csv",
                    &["theta", "k_center", "eigenvalue", "diagonal_entry"],
                    run.diagonal
                        .centers
                        .iter()
                        .zip(&run.diagonal.eigenvalues)
                        .zip(&run.diagonal.entries)
                        .map(|((&c, &ev), &d)| {
                            vec![
                                fmt_float(run.diagonal.theta),
                                fmt_float(c),
                                fmt_float(ev),
                                fmt_float(d),
                            ]
                        }),
                )
                .map_err(StageError::Io)?;
            announce(&path);
            println!("bulk sup |d_k| = {:.6}", run.bulk_sup);
        }
        Command::Dualcheck => {
            let w = writer(cli, &cfg)?;
            let report = runner::run_dualcheck(&cfg)?;
            let path = w.write_json("dualcheck.json", &report).map_err(StageError::Io)?;
            announce(&path);
            println!("hausdorff_distance = {:.6}", report.hausdorff_distance);
        }
        Command::ChainVerify => {
            let w = writer(cli, &cfg)?;
            let report = runner::run_chain_verify(&cfg)?;
            let path = w.write_json("chain_verify.json", &report).map_err(StageError::Io)?;
            announce(&path);
            println!(
                "covariance_max_dev = {:.3e}, commutator checks {}/{}",
                report.covariance_max_dev,
                report.commutator_checks_passed,
                report.commutator_checks_total
            );
            if report.covariance_max_dev > 1e-9
                || report.commutator_checks_passed != report.commutator_checks_total
            {
                return Ok(1);
            }
        }
        Command::Lrfit => {
            let w = writer(cli, &cfg)?;
            let fit = runner::run_lrfit(&cfg)?;
            let curve = runner::run_qnorm(&cfg)?;
            let path = w
                .write_csv(
                    "lrfit.csv",
                    &["T", "front_radius"],
                    fit.points.iter().map(|&(t, r)| vec![fmt_float(t), fmt_float(r)]),
                )
                .map_err(StageError::Io)?;
            announce(&path);
            #[derive(serde::Serialize)]
            struct LrJson {
                config_hash: String,
                tool_version: String,
                v_emp: f64,
                threshold: f64,
                v_lower_bound: f64,
            }
            let path = w
                .write_json(
                    "lrfit.json",
                    &LrJson {
                        config_hash: cfg.hash(),
                        tool_version: TOOL_VERSION.into(),
                        v_emp: fit.v_emp,
                        threshold: fit.threshold,
                        v_lower_bound: 2.0 * curve.plateau,
                    },
                )
                .map_err(StageError::Io)?;
            announce(&path);
            println!("v_emp = {:.4} (2·‖Q‖ = {:.4})", fit.v_emp, 2.0 * curve.plateau);
        }
        Command::Verify => {
            let dir = out_dir(cli, &cfg);
            let report = runner::run_verify(&cfg, Some(&dir))?;
            println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
            if !report.pass {
                return Ok(1);
            }
        }
        Command::Sweep { axis, values } => {
            let parsed: SweepAxis = axis.parse().map_err(|message| {
                StageError::Config(runner::ConfigError::Invalid { field: "--axis", message })
            })?;
            let dir = out_dir(cli, &cfg);
            let rows = runner::sweep(&cfg, parsed, values, Some(&dir))?;
            let w = writer(cli, &cfg)?;
            let path = runner::write_sweep_csv(&w, axis, &rows).map_err(StageError::Io)?;
            announce(&path);
            if rows.iter().any(|(_, r)| !r.pass) {
                return Ok(1);
            }
        }
    }
    Ok(0)
}
