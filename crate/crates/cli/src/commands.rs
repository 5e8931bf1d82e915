use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use polariton_core::fitting::{fit, FitOptions, FitProblem, FitResult, FreeParam, Weights};
use polariton_core::io::{map_from_csv, map_to_csv, stacked_spectra_csv, MapMetadata};
use polariton_core::polariton::{critical_length, CriticalLengthParams};
use polariton_core::spectral::thickness_sweep;
use polariton_core::tmm::{dispersion_map, DispersionMap, ONE_MINUS_R};
use polariton_core::units::{free_space_wavenumber, PER_UM_TO_PER_NM};
use polariton_core::{CavityParams, Error, PhotonEnergy, Polarization};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::write_atomic;

pub enum Status {
    Done,
    NotConverged,
}

fn input(e: Error) -> CliError {
    CliError::Input(e.to_string())
}

pub struct SimulateOutputs {
    pub csv: PathBuf,
    pub sidecar: PathBuf,
    pub heatmap: Option<PathBuf>,
}

fn clipped_momenta(cfg: &RunConfig, momenta: Vec<f64>, emin: f64) -> Result<Vec<f64>, CliError> {
    let stack = cfg.layer_stack()?;
    let n = stack.incidence.index(PhotonEnergy::new(emin).map_err(input)?).map_err(input)?;
    let limit = n.re * free_space_wavenumber(emin) / PER_UM_TO_PER_NM;
    let kept: Vec<f64> = momenta.into_iter().filter(|k| k.abs() < limit).collect();
    if kept.is_empty() {
        return Err(CliError::Input(format!(
            "no momenta below the light line ({limit:.3} μm⁻¹ at {emin} eV)"
        )));
    }
    Ok(kept)
}

pub fn simulate(cfg: &RunConfig, out_dir: &Path) -> Result<(DispersionMap, SimulateOutputs), CliError> {
    cfg.check_grid()?;
    let stack = cfg.layer_stack()?;
    let energies = cfg.grid.energy.values();
    let mut momenta = cfg.grid.kx.values();
    if cfg.grid.clip_to_light_line {
        momenta = clipped_momenta(cfg, momenta, energies[0])?;
    }
    let map = dispersion_map(&stack, &energies, &momenta, cfg.grid.polarization).map_err(input)?;

    let name = &cfg.output.name;
    let csv = out_dir.join(format!("{name}.csv"));
    let sidecar = out_dir.join(format!("{name}.json"));
    write_atomic(&csv, map_to_csv(&map).as_bytes())?;
    let meta = MapMetadata::for_map(&map, cfg.grid.polarization, Some(&stack));
    let json = serde_json::to_string_pretty(&meta).map_err(|e| CliError::Output(e.to_string()))?;
    write_atomic(&sidecar, json.as_bytes())?;
    let heatmap = if cfg.output.heatmap {
        let png = out_dir.join(format!("{name}.png"));
        write_atomic(&png, &crate::output::heatmap_png(&map)?)?;
        Some(png)
    } else {
        None
    };
    Ok((map, SimulateOutputs { csv, sidecar, heatmap }))
}

#[derive(Debug, Serialize)]
pub struct CritLenRecord {
    #[serde(rename = "L_c_nm")]
    pub length_nm: f64,
    pub residual_nm: f64,
}

pub fn critlen(n0: f64, gamma_mev: f64, f_ev2: f64) -> Result<CritLenRecord, CliError> {
    let p = CriticalLengthParams {
        n0,
        gamma: gamma_mev * 1e-3,
        f: f_ev2,
    };
    match critical_length(&p) {
        Ok(l) => Ok(CritLenRecord {
            length_nm: l,
            residual_nm: p.residual(l),
        }),
        Err(e @ Error::InvalidParameter(_)) => Err(input(e)),
        Err(e) => Err(CliError::NoSolution(e.to_string())),
    }
}

pub struct SweepOutputs {
    pub table: PathBuf,
    pub spectra: PathBuf,
    pub rows: usize,
}

pub const SWEEP_HEADER: &str = "L_nm,regime,gap_meV,dip_centers_ev,error";

pub fn sweep(cfg: &RunConfig, out_dir: &Path, name: &str) -> Result<SweepOutputs, CliError> {
    if cfg.stack.is_some() {
        return Err(CliError::Input("sweep varies the cavity template; remove the [stack] section".into()));
    }
    cfg.check_grid()?;
    let lengths = cfg.sweep.lengths()?;
    let energies = cfg.grid.energy.values();
    let opts = cfg.sweep.options(cfg.grid.polarization);
    let rows = thickness_sweep(&cfg.cavity, &lengths, &energies, &opts);

    let mut table = String::from(SWEEP_HEADER);
    table.push('\n');
    for r in &rows {
        match &r.outcome {
            Ok((label, centers)) => {
                let gap = label.gap_ev.map(|g| format!("{}", g * 1e3)).unwrap_or_default();
                let centers: Vec<String> = centers.iter().map(|c| c.to_string()).collect();
                writeln!(table, "{},{},{gap},{},", r.length_nm, label.regime, centers.join(";")).unwrap();
            }
            Err(e) => {
                writeln!(table, "{},,,,\"{}\"", r.length_nm, e.replace('"', "'")).unwrap();
            }
        }
    }
    let columns: Vec<Vec<f64>> = rows.iter().map(|r| r.reflectance.clone()).collect();
    let spectra = stacked_spectra_csv(&energies, &lengths, &columns);

    let table_path = out_dir.join(format!("{name}.csv"));
    let spectra_path = out_dir.join(format!("{name}_spectra.csv"));
    write_atomic(&table_path, table.as_bytes())?;
    write_atomic(&spectra_path, spectra.as_bytes())?;
    Ok(SweepOutputs {
        table: table_path,
        spectra: spectra_path,
        rows: rows.len(),
    })
}

/// Fit problem as stored on disk. The target map is a CSV path, relative to
/// the problem file; its sidecar, if present, supplies the quantity label and
/// polarization.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub target: PathBuf,
    pub quantity_label: Option<String>,
    pub polarization: Option<Polarization>,
    #[serde(default)]
    pub cavity: CavityParams,
    pub free: Vec<FreeParam>,
    #[serde(default)]
    pub weights: Weights,
    #[serde(default)]
    pub options: FitOptions,
}

fn read_sidecar(csv: &Path) -> Option<MapMetadata> {
    let text = std::fs::read_to_string(csv.with_extension("json")).ok()?;
    serde_json::from_str(&text).ok()
}

pub fn load_problem(path: &Path) -> Result<FitProblem, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read problem {}: {e}", path.display())))?;
    let file: ProblemFile =
        serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let target_path = if file.target.is_relative() {
        path.parent().unwrap_or(Path::new(".")).join(&file.target)
    } else {
        file.target.clone()
    };
    let csv = std::fs::read_to_string(&target_path)
        .map_err(|e| CliError::Input(format!("cannot read target {}: {e}", target_path.display())))?;
    let sidecar = read_sidecar(&target_path);
    let label = file
        .quantity_label
        .or_else(|| sidecar.as_ref().map(|m| m.quantity_label.clone()))
        .unwrap_or_else(|| ONE_MINUS_R.to_string());
    let polarization = file
        .polarization
        .or_else(|| sidecar.as_ref().map(|m| m.polarization))
        .unwrap_or(Polarization::TE);
    let target = map_from_csv(&csv, &label).map_err(|e| CliError::Input(format!("{}: {e}", target_path.display())))?;
    let mut base = file.cavity;
    for p in &file.free {
        base.set(p.name, p.initial);
    }
    let problem = FitProblem {
        target,
        polarization,
        base,
        free: file.free,
        weights: file.weights,
        options: file.options,
    };
    problem.validate().map_err(input)?;
    Ok(problem)
}

pub fn run_fit(problem: &FitProblem, out: &Path) -> Result<(FitResult, Status), CliError> {
    let result = fit(problem).map_err(|e| match e {
        Error::InvalidParameter(_) | Error::Parse { .. } => input(e),
        other => CliError::NoSolution(other.to_string()),
    })?;
    let json = serde_json::to_string_pretty(&result).map_err(|e| CliError::Output(e.to_string()))?;
    write_atomic(out, json.as_bytes())?;
    let status = if result.converged { Status::Done } else { Status::NotConverged };
    Ok((result, status))
}
