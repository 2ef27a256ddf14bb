use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use optosteer::config::{load_config, Config};
use optosteer::dynamics::{solve_lyapunov, DriftMatrix, DiffusionMatrix, DIM};
use optosteer::oracle::{noise_factor, simulate_covariance, OracleConfig};
use optosteer::sweep::{
    assemble, fmt_num, point_metadata, run_point, run_stability_map, run_sweep, sweep_metadata, write_metadata, write_rows_csv,
    write_stability_csv, write_sweep_csv, Axis, OutputColumn, ParameterPath, Status, SweepSpec,
};
use optosteer::Result;

#[derive(Parser)]
#[command(name = "optosteer", version, about = "Steady-state steering between two laser-coupled mechanical mirrors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON configuration; defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output file, or `-` for standard output.
    #[arg(long, default_value = "-")]
    out: String,
    /// Worker threads (0 = one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Print the drift and diffusion matrices to standard error as CSV.
    #[arg(long)]
    dump_matrices: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the configured parameter point.
    Point(Common),
    /// Grid sweep of steering, regime and energy.
    Sweep(Common),
    /// Routh–Hurwitz and eigenvalue stability over a grid.
    Stability(Common),
    /// Monte Carlo estimate of the steady covariance at the configured point.
    Oracle {
        #[command(flatten)]
        common: Common,
        /// Seed of the random streams (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn open_out(path: &str) -> Result<Box<dyn Write>> {
    Ok(if path == "-" {
        Box::new(BufWriter::new(io::stdout().lock()))
    } else {
        Box::new(BufWriter::new(File::create(path)?))
    })
}

fn load(common: &Common) -> Result<Config> {
    match &common.config {
        Some(p) => load_config(p),
        None => Ok(Config::reference()),
    }
}

fn dump_matrices(cfg: &Config) -> Result<()> {
    let (k, r, _) = assemble(&cfg.params)?;
    let mut err = io::stderr().lock();
    for (name, m) in [("K", k.0), ("R", r.0)] {
        writeln!(err, "# {name}")?;
        for i in 0..DIM {
            let row: Vec<String> = (0..DIM).map(|j| fmt_num(m[(i, j)])).collect();
            writeln!(err, "{}", row.join(","))?;
        }
    }
    Ok(())
}

fn sweep_spec(cfg: &Config) -> SweepSpec {
    cfg.sweep.clone().unwrap_or_else(|| {
        log::info!("no sweep section; using gain.omega_over_gamma in [0, 12] with 481 points");
        SweepSpec::one_d(Axis::linear(ParameterPath::OmegaOverGamma, 0.0, 12.0, 481))
    })
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Point(common) => {
            let cfg = load(&common)?;
            if common.dump_matrices {
                dump_matrices(&cfg)?;
            }
            let row = run_point(&cfg.params)?;
            let ok = row.status != Status::Error;
            let meta = point_metadata(&cfg.resolved_json(), std::slice::from_ref(&row));
            let mut out = open_out(&common.out)?;
            write_rows_csv(&mut out, &[], &OutputColumn::ALL, &[row], &meta)?;
            out.flush()?;
            Ok(ok)
        }
        Command::Sweep(common) => {
            let cfg = load(&common)?;
            if common.dump_matrices {
                dump_matrices(&cfg)?;
            }
            let spec = sweep_spec(&cfg);
            let rows = run_sweep(&cfg.params, &spec, common.workers)?;
            let meta = sweep_metadata(&spec, &cfg.resolved_json(), &rows);
            let mut out = open_out(&common.out)?;
            write_sweep_csv(&mut out, &spec, &rows, &meta)?;
            out.flush()?;
            let failed = rows.iter().filter(|r| r.status == Status::Error).count();
            if failed > 0 {
                log::error!("{failed} of {} points failed", rows.len());
            }
            Ok(failed == 0)
        }
        Command::Stability(common) => {
            let cfg = load(&common)?;
            if common.dump_matrices {
                dump_matrices(&cfg)?;
            }
            let spec = sweep_spec(&cfg);
            let rows = run_stability_map(&cfg.params, &spec, common.workers)?;
            let mut meta = sweep_metadata(&spec, &cfg.resolved_json(), &[]);
            meta.retain(|(k, _)| k != "energy_diff_unit");
            meta.push(("hurwitz".into(), "determinants of the characteristic polynomial of K/||K||_inf".into()));
            let mut out = open_out(&common.out)?;
            write_stability_csv(&mut out, &spec, &rows, &meta)?;
            out.flush()?;
            let disagree = rows.iter().filter(|r| r.stable_by_eig != r.stable_by_rh).count();
            log::info!("verdicts disagree at {disagree} of {} points", rows.len());
            Ok(rows.iter().all(|r| r.error.is_none()))
        }
        Command::Oracle { common, seed } => {
            let cfg = load(&common)?;
            if common.dump_matrices {
                dump_matrices(&cfg)?;
            }
            let (k, r, _) = assemble(&cfg.params)?;
            let exact = solve_lyapunov(&k, &r)?.to_dmatrix();
            let (estimate, stderr, oc) = oracle_run(&cfg, &k, &r, seed)?;
            let dev = (&estimate - &exact).norm();
            let rel = dev / exact.norm();
            let mut out = open_out(&common.out)?;
            write_metadata(
                &mut out,
                &[
                    ("generator".into(), format!("optosteer {}", env!("CARGO_PKG_VERSION"))),
                    ("dt".into(), fmt_num(oc.dt)),
                    ("n_steps".into(), oc.n_steps.to_string()),
                    ("n_trajectories".into(), oc.n_trajectories.to_string()),
                    ("burn_in_fraction".into(), fmt_num(oc.burn_in_fraction)),
                    ("seed".into(), oc.seed.to_string()),
                    ("frobenius_deviation".into(), fmt_num(dev)),
                    ("relative_deviation".into(), fmt_num(rel)),
                    ("bootstrap_stderr".into(), fmt_num(stderr)),
                    ("config".into(), cfg.resolved_json()),
                ],
            )?;
            writeln!(out, "row,col,estimate,lyapunov")?;
            for i in 0..DIM {
                for j in 0..DIM {
                    writeln!(out, "{i},{j},{},{}", fmt_num(estimate[(i, j)]), fmt_num(exact[(i, j)]))?;
                }
            }
            out.flush()?;
            log::info!("relative Frobenius deviation {rel:.3e}, bootstrap stderr {stderr:.3e}");
            Ok(true)
        }
    }
}

fn oracle_run(
    cfg: &Config,
    k: &DriftMatrix,
    r: &DiffusionMatrix,
    seed: Option<u64>,
) -> Result<(nalgebra::DMatrix<f64>, f64, OracleConfig)> {
    let kd = k.to_dmatrix();
    let s = &cfg.oracle;
    let mut oc = OracleConfig::for_drift(&kd, s.n_steps, s.n_trajectories, seed.unwrap_or(s.seed))?;
    oc.burn_in_fraction = s.burn_in_fraction;
    if let Some(dt) = s.dt {
        oc.dt = dt;
    }
    let b = noise_factor(&r.to_dmatrix())?;
    let est = simulate_covariance(&kd, &b, &oc)?;
    Ok((est.estimate, est.stderr, oc))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
