//! Planar multilayer optics.
//!
//! Amplitudes are computed with the Rouard/Airy scattering recursion, folding
//! the stack from the exit medium back towards the incidence medium. Each step
//! only multiplies by `exp(i kz d)` with `Im kz ≥ 0`, so optically thick
//! absorbing or evanescent layers decay towards zero instead of overflowing as
//! a plain transfer-matrix product would.
//!
//! TE amplitudes are ratios of the tangential electric field. TM amplitudes are
//! computed on the tangential magnetic field and reported in the electric-field
//! convention `r = −r_H`, `t = t_H · n_inc / n_exit`, which makes TE and TM
//! coincide at normal incidence.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::materials::{refractive_index, DielectricModel, PhotonEnergy};
use crate::units::{free_space_wavenumber, PER_UM_TO_PER_NM};

/// Label of maps that store absorptance-like `1 − R`.
pub const ONE_MINUS_R: &str = "1-R";

/// Label of maps that store reflectance.
pub const REFLECTANCE: &str = "R";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Polarization {
    #[serde(alias = "te")]
    TE,
    #[serde(alias = "tm")]
    TM,
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarization::TE => "TE",
            Polarization::TM => "TM",
        })
    }
}

impl std::str::FromStr for Polarization {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TE" | "S" => Ok(Polarization::TE),
            "TM" | "P" => Ok(Polarization::TM),
            _ => Err(Error::InvalidParameter(format!("unknown polarization `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneWaveContext {
    pub energy: PhotonEnergy,
    /// In-plane momentum, μm⁻¹. Only `kx²` enters the result.
    pub kx_um: f64,
    pub polarization: Polarization,
}

impl PlaneWaveContext {
    pub fn new(energy_ev: f64, kx_um: f64, polarization: Polarization) -> Result<Self> {
        if !kx_um.is_finite() {
            return Err(Error::InvalidParameter(format!("kx must be finite, got {kx_um}")));
        }
        Ok(Self {
            energy: PhotonEnergy::new(energy_ev)?,
            kx_um,
            polarization,
        })
    }

    #[inline]
    fn kx_nm(&self) -> f64 {
        self.kx_um.abs() * PER_UM_TO_PER_NM
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub thickness_nm: f64,
    pub material: DielectricModel,
}

impl Layer {
    pub fn new(thickness_nm: f64, material: DielectricModel) -> Self {
        Self { thickness_nm, material }
    }
}

/// Layers between a semi-infinite incidence medium and a semi-infinite exit
/// medium, ordered from the incidence side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerStack {
    pub incidence: DielectricModel,
    pub layers: Vec<Layer>,
    pub exit: DielectricModel,
}

impl LayerStack {
    pub fn new(incidence: DielectricModel, layers: Vec<Layer>, exit: DielectricModel) -> Self {
        Self { incidence, layers, exit }
    }

    /// Zero-thickness layers are accepted; they do not change the result.
    pub fn validate(&self) -> Result<()> {
        self.incidence.validate()?;
        self.exit.validate()?;
        for (i, l) in self.layers.iter().enumerate() {
            if !(l.thickness_nm.is_finite() && l.thickness_nm >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "layer {i}: thickness must be finite and non-negative, got {} nm",
                    l.thickness_nm
                )));
            }
            l.material.validate()?;
        }
        Ok(())
    }

    /// The same structure seen from the exit side.
    pub fn reversed(&self) -> Self {
        Self {
            incidence: self.exit.clone(),
            layers: self.layers.iter().rev().cloned().collect(),
            exit: self.incidence.clone(),
        }
    }

    /// Permittivities of incidence medium, each layer, and exit medium.
    fn permittivities(&self, e: PhotonEnergy) -> Result<Vec<Complex64>> {
        let mut eps = Vec::with_capacity(self.layers.len() + 2);
        eps.push(self.incidence.permittivity(e)?);
        for l in &self.layers {
            eps.push(l.material.permittivity(e)?);
        }
        eps.push(self.exit.permittivity(e)?);
        Ok(eps)
    }

    fn thicknesses(&self) -> Vec<f64> {
        self.layers.iter().map(|l| l.thickness_nm).collect()
    }
}

/// Normal wavevector component (nm⁻¹) in a medium of index `n`, on the branch
/// `Im kz ≥ 0` (and `Re kz ≥ 0` when `Im kz = 0`).
pub fn kz_in_layer(ctx: &PlaneWaveContext, n: Complex64) -> Complex64 {
    let k = n * free_space_wavenumber(ctx.energy.ev());
    kz_from_eps(k * k, ctx.kx_nm())
}

#[inline]
fn kz_from_eps(eps_k0sq: Complex64, kx_nm: f64) -> Complex64 {
    refractive_index(eps_k0sq - kx_nm * kx_nm)
}

/// Field amplitudes from the incidence side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub r: Complex64,
    pub t: Complex64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerCoefficients {
    pub reflectance: f64,
    pub transmittance: f64,
    pub absorptance: f64,
}

/// Intermediate result of the recursion: H-field amplitudes for TM.
struct RawAmplitudes {
    r: Complex64,
    t: Complex64,
    q_inc: Complex64,
    q_exit: Complex64,
}

fn raw_amplitudes(
    eps: &[Complex64],
    thickness: &[f64],
    energy: f64,
    kx_nm: f64,
    pol: Polarization,
) -> RawAmplitudes {
    let k0 = free_space_wavenumber(energy);
    let k0sq = k0 * k0;
    let kz: Vec<Complex64> = eps.iter().map(|&e| kz_from_eps(e * k0sq, kx_nm)).collect();
    let q: Vec<Complex64> = match pol {
        Polarization::TE => kz.clone(),
        Polarization::TM => kz.iter().zip(eps).map(|(k, e)| k / e).collect(),
    };
    let last = eps.len() - 1;
    let interface = |i: usize, j: usize| {
        let s = q[i] + q[j];
        ((q[i] - q[j]) / s, 2.0 * q[i] / s)
    };
    let (mut r, mut t) = interface(last - 1, last);
    for j in (1..last).rev() {
        let phase = (Complex64::i() * kz[j] * thickness[j - 1]).exp();
        let phase2 = phase * phase;
        let (rij, tij) = interface(j - 1, j);
        let denom = 1.0 + rij * r * phase2;
        t = tij * t * phase / denom;
        r = (rij + r * phase2) / denom;
    }
    RawAmplitudes {
        r,
        t,
        q_inc: q[0],
        q_exit: q[last],
    }
}

fn to_field_convention(raw: &RawAmplitudes, eps: &[Complex64], pol: Polarization) -> Amplitudes {
    match pol {
        Polarization::TE => Amplitudes { r: raw.r, t: raw.t },
        Polarization::TM => {
            let n_inc = refractive_index(eps[0]);
            let n_exit = refractive_index(eps[eps.len() - 1]);
            Amplitudes {
                r: -raw.r,
                t: raw.t * n_inc / n_exit,
            }
        }
    }
}

fn check_finite(a: &Amplitudes, ctx: &PlaneWaveContext) -> Result<()> {
    if a.r.is_finite() && a.t.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite {
            energy: ctx.energy.ev(),
            kx_um: ctx.kx_um,
        })
    }
}

pub fn stack_amplitudes(stack: &LayerStack, ctx: &PlaneWaveContext) -> Result<Amplitudes> {
    let eps = stack.permittivities(ctx.energy)?;
    let raw = raw_amplitudes(&eps, &stack.thicknesses(), ctx.energy.ev(), ctx.kx_nm(), ctx.polarization);
    let amp = to_field_convention(&raw, &eps, ctx.polarization);
    check_finite(&amp, ctx)?;
    Ok(amp)
}

fn power_from_eps(
    eps: &[Complex64],
    thickness: &[f64],
    ctx: &PlaneWaveContext,
) -> Result<PowerCoefficients> {
    let e = ctx.energy.ev();
    let eps_inc = eps[0];
    if eps_inc.im.abs() > 1e-12 * eps_inc.norm() {
        return Err(Error::AbsorbingIncidence { energy: e });
    }
    let n_inc = eps_inc.re.sqrt();
    let limit_um = n_inc * free_space_wavenumber(e) / PER_UM_TO_PER_NM;
    // NaN momenta fail this test too
    if ctx.kx_um.abs().partial_cmp(&limit_um) != Some(std::cmp::Ordering::Less) {
        return Err(Error::EvanescentIncidence {
            energy: e,
            kx_um: ctx.kx_um,
            limit_um,
        });
    }
    let raw = raw_amplitudes(eps, thickness, e, ctx.kx_nm(), ctx.polarization);
    if !(raw.r.is_finite() && raw.t.is_finite()) {
        return Err(Error::NonFinite { energy: e, kx_um: ctx.kx_um });
    }
    let reflectance = raw.r.norm_sqr();
    let transmittance = raw.t.norm_sqr() * raw.q_exit.re / raw.q_inc.re;
    Ok(PowerCoefficients {
        reflectance,
        transmittance,
        absorptance: 1.0 - reflectance - transmittance,
    })
}

/// `R = |r|²`, `T = |t|² Re(q_exit)/Re(q_inc)` with `q = kz` (TE) or `kz/ε`
/// (TM, H-field amplitudes), `A = 1 − R − T`. The incidence medium must be
/// lossless and the incidence propagating.
pub fn power_coefficients(stack: &LayerStack, ctx: &PlaneWaveContext) -> Result<PowerCoefficients> {
    let eps = stack.permittivities(ctx.energy)?;
    power_from_eps(&eps, &stack.thicknesses(), ctx)
}

/// A point of a map that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapDefect {
    pub energy_ev: f64,
    pub kx_um: f64,
    pub reason: String,
}

/// A real quantity sampled on an energy × momentum grid. `values[i][j]`
/// belongs to `energies[i]` and `momenta[j]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionMap {
    pub energies: Vec<f64>,
    pub momenta: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub quantity_label: String,
    #[serde(default)]
    pub defects: Vec<MapDefect>,
}

impl DispersionMap {
    pub fn new(
        energies: Vec<f64>,
        momenta: Vec<f64>,
        values: Vec<Vec<f64>>,
        quantity_label: impl Into<String>,
    ) -> Result<Self> {
        check_grid("energy", &energies)?;
        check_grid("momentum", &momenta)?;
        if values.len() != energies.len() || values.iter().any(|row| row.len() != momenta.len()) {
            return Err(Error::InvalidParameter(format!(
                "value matrix must be {}×{}",
                energies.len(),
                momenta.len()
            )));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("map values must be finite".into()));
        }
        Ok(Self {
            energies,
            momenta,
            values,
            quantity_label: quantity_label.into(),
            defects: Vec::new(),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.energies.len(), self.momenta.len())
    }

    /// Values at fixed momentum index `j`, ordered by energy.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[j]).collect()
    }
}

pub(crate) fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidParameter(format!("{name} grid is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{name} grid has non-finite entries")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(format!("{name} grid must be strictly ascending")));
    }
    Ok(())
}

/// `1 − R` over the grid. Points that fail (evanescent incidence, materials
/// out of range, overflow) are set to 0, the value at the light line where
/// `R → 1`, and listed in `defects`. Rows are evaluated in parallel; the
/// result does not depend on scheduling.
pub fn dispersion_map(
    stack: &LayerStack,
    energies: &[f64],
    momenta: &[f64],
    pol: Polarization,
) -> Result<DispersionMap> {
    check_grid("energy", energies)?;
    check_grid("momentum", momenta)?;
    stack.validate()?;
    let thickness = stack.thicknesses();

    let rows: Vec<(Vec<f64>, Vec<MapDefect>)> = energies
        .par_iter()
        .map(|&e| {
            let mut defects = Vec::new();
            let eps = PhotonEnergy::new(e).and_then(|pe| stack.permittivities(pe));
            let row = momenta
                .iter()
                .map(|&kx| {
                    let result = eps.as_ref().map_err(Clone::clone).and_then(|eps| {
                        let ctx = PlaneWaveContext::new(e, kx, pol)?;
                        power_from_eps(eps, &thickness, &ctx)
                    });
                    match result {
                        Ok(p) => 1.0 - p.reflectance,
                        Err(err) => {
                            defects.push(MapDefect {
                                energy_ev: e,
                                kx_um: kx,
                                reason: err.to_string(),
                            });
                            0.0
                        }
                    }
                })
                .collect();
            (row, defects)
        })
        .collect();

    let mut values = Vec::with_capacity(rows.len());
    let mut defects = Vec::new();
    for (row, d) in rows {
        values.push(row);
        defects.extend(d);
    }
    Ok(DispersionMap {
        energies: energies.to_vec(),
        momenta: momenta.to_vec(),
        values,
        quantity_label: ONE_MINUS_R.to_string(),
        defects,
    })
}

/// Reflectance `R(E)` at fixed momentum.
pub fn reflectance_spectrum(
    stack: &LayerStack,
    energies: &[f64],
    kx_um: f64,
    pol: Polarization,
) -> Result<Vec<f64>> {
    check_grid("energy", energies)?;
    energies
        .iter()
        .map(|&e| {
            let ctx = PlaneWaveContext::new(e, kx_um, pol)?;
            power_coefficients(stack, &ctx).map(|p| p.reflectance)
        })
        .collect()
}
