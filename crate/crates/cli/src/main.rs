//! `polariton`: dispersion maps, thickness sweeps, fits and critical lengths
//! of metal-clad molecular microcavities.
//!
//! Exit codes: 0 success, 2 input error, 3 no solution, 4 fit not converged,
//! 1 output failure.

mod commands;
mod config;
mod error;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use polariton_core::Polarization;

use crate::commands::Status;
use crate::config::RunConfig;
use crate::error::CliError;

#[derive(Parser)]
#[command(name = "polariton", version, about = "Transfer-matrix simulation and analysis of polariton microcavities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a 1 − R dispersion map, its JSON sidecar and a heatmap.
    Simulate(SimulateArgs),
    /// Solve for the critical cavity length.
    Critlen(CritlenArgs),
    /// Normal-incidence spectra and regime labels over a range of lengths.
    Sweep(SweepArgs),
    /// Fit cavity parameters to a target map.
    Fit(FitArgs),
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    config: Option<PathBuf>,
    /// Output directory (overrides $POLARITON_OUT_DIR and the config).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Cavity length, nm.
    #[arg(long)]
    length_nm: Option<f64>,
    #[arg(long, value_parser = parse_polarization)]
    polarization: Option<Polarization>,
    #[arg(long)]
    energy_min: Option<f64>,
    #[arg(long)]
    energy_max: Option<f64>,
    #[arg(long)]
    energy_points: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    kx_min: Option<f64>,
    #[arg(long)]
    kx_max: Option<f64>,
    #[arg(long)]
    kx_points: Option<usize>,
    /// Drop momenta beyond the incidence light line.
    #[arg(long)]
    clip_to_light_line: bool,
    /// Base name of the output files.
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    no_heatmap: bool,
}

#[derive(Args)]
struct CritlenArgs {
    #[arg(long, default_value_t = 1.5)]
    n0: f64,
    /// Exciton linewidth, meV.
    #[arg(long, default_value_t = 34.0)]
    gamma_mev: f64,
    /// Oscillator strength, eV².
    #[arg(long, default_value_t = 0.037)]
    f_ev2: f64,
    /// Print a JSON record instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    min_nm: Option<f64>,
    #[arg(long)]
    max_nm: Option<f64>,
    #[arg(long)]
    step_nm: Option<f64>,
    /// Half-width of the classification window around the exciton, eV.
    #[arg(long)]
    window_ev: Option<f64>,
    #[arg(long)]
    min_prominence: Option<f64>,
    /// Base name of the output files.
    #[arg(long, default_value = "sweep")]
    name: String,
}

#[derive(Args)]
struct FitArgs {
    /// Fit problem (JSON).
    problem: PathBuf,
    /// Result file; defaults to fit_result.json in the output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

fn parse_polarization(s: &str) -> Result<Polarization, String> {
    s.parse().map_err(|e: polariton_core::Error| e.to_string())
}

fn load(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(v) = common.length_nm {
        cfg.cavity.length_nm = v;
    }
    if let Some(v) = common.polarization {
        cfg.grid.polarization = v;
    }
    let e = &mut cfg.grid.energy;
    e.min = common.energy_min.unwrap_or(e.min);
    e.max = common.energy_max.unwrap_or(e.max);
    e.points = common.energy_points.unwrap_or(e.points);
    Ok(cfg)
}

fn simulate(args: SimulateArgs) -> Result<Status, CliError> {
    let mut cfg = load(&args.common)?;
    let k = &mut cfg.grid.kx;
    k.min = args.kx_min.unwrap_or(k.min);
    k.max = args.kx_max.unwrap_or(k.max);
    k.points = args.kx_points.unwrap_or(k.points);
    cfg.grid.clip_to_light_line |= args.clip_to_light_line;
    if let Some(n) = args.name {
        cfg.output.name = n;
    }
    cfg.output.heatmap &= !args.no_heatmap;
    let dir = output::output_dir(args.common.out_dir.as_deref(), &cfg.output.dir);
    let (map, out) = commands::simulate(&cfg, &dir)?;
    let (ne, nk) = map.shape();
    println!("map {ne}×{nk} ({}) → {}", map.quantity_label, out.csv.display());
    println!("sidecar → {}", out.sidecar.display());
    if let Some(p) = out.heatmap {
        println!("heatmap → {}", p.display());
    }
    if !map.defects.is_empty() {
        eprintln!("warning: {} grid points could not be evaluated; see the sidecar", map.defects.len());
    }
    Ok(Status::Done)
}

fn critlen(args: CritlenArgs) -> Result<Status, CliError> {
    let rec = commands::critlen(args.n0, args.gamma_mev, args.f_ev2)?;
    if args.json {
        println!("{}", serde_json::to_string(&rec).map_err(|e| CliError::Output(e.to_string()))?);
    } else {
        println!("L_c = {:.3} nm (residual {:.2e} nm)", rec.length_nm, rec.residual_nm);
    }
    Ok(Status::Done)
}

fn sweep(args: SweepArgs) -> Result<Status, CliError> {
    let mut cfg = load(&args.common)?;
    let s = &mut cfg.sweep;
    s.min_nm = args.min_nm.unwrap_or(s.min_nm);
    s.max_nm = args.max_nm.unwrap_or(s.max_nm);
    s.step_nm = args.step_nm.unwrap_or(s.step_nm);
    s.window_ev = args.window_ev.unwrap_or(s.window_ev);
    s.min_prominence = args.min_prominence.unwrap_or(s.min_prominence);
    let dir = output::output_dir(args.common.out_dir.as_deref(), &cfg.output.dir);
    let out = commands::sweep(&cfg, &dir, &args.name)?;
    println!("{} lengths → {}", out.rows, out.table.display());
    println!("spectra → {}", out.spectra.display());
    Ok(Status::Done)
}

fn fit(args: FitArgs) -> Result<Status, CliError> {
    let problem = commands::load_problem(&args.problem)?;
    let out = args.out.unwrap_or_else(|| {
        output::output_dir(args.out_dir.as_deref(), Path::new(".")).join("fit_result.json")
    });
    let (result, status) = commands::run_fit(&problem, &out)?;
    for v in &result.fitted {
        println!("{} = {} (start {}, bounds [{}, {}])", v.name, v.value, v.initial, v.lo, v.hi);
    }
    println!(
        "objective {:.6e} (start {:.6e}), {} iterations, converged: {}",
        result.objective, result.initial_objective, result.iterations, result.converged
    );
    println!("result → {}", out.display());
    Ok(status)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Critlen(a) => critlen(a),
        Command::Sweep(a) => sweep(a),
        Command::Fit(a) => fit(a),
    };
    match result {
        Ok(Status::Done) => ExitCode::SUCCESS,
        Ok(Status::NotConverged) => {
            eprintln!("fit stopped at the iteration limit before converging");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
