//! Complex dielectric functions for the constituents of a planar stack.
//!
//! Permittivities follow the `exp(-iωt)` convention: passive media have
//! `Im ε ≥ 0` and the refractive index is taken on the branch `Im n ≥ 0`.
//!
//! Oscillator-strength units: the Lorentz strength `f` is an energy squared in
//! eV². A film value quoted as "f ≃ 37 meV²" is read as `f = 0.037 eV²`, and a
//! linewidth quoted as "γ = 34 meV²" as `γ = 0.034 eV`; only that reading gives
//! a 128 meV nominal splitting and a ~700 nm critical length together.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Photon energy in eV.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PhotonEnergy(f64);

impl PhotonEnergy {
    pub fn new(ev: f64) -> Result<Self> {
        if ev.is_finite() && ev > 0.0 {
            Ok(Self(ev))
        } else {
            Err(Error::InvalidParameter(format!(
                "photon energy must be finite and positive, got {ev} eV"
            )))
        }
    }

    #[inline]
    pub fn ev(self) -> f64 {
        self.0
    }
}

/// Single Lorentz oscillator on a constant background,
/// `ε(E) = n0² + f / (Ex² − E² − iγE)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LorentzParams {
    /// Background refractive index.
    pub n0: f64,
    /// Oscillator strength per unit volume, eV².
    pub f: f64,
    /// Resonance energy, eV.
    pub ex: f64,
    /// Full width at half maximum, eV.
    pub gamma: f64,
}

impl Default for LorentzParams {
    fn default() -> Self {
        Self::TDBC_FILM
    }
}

impl LorentzParams {
    /// The J-aggregate film of the 628/1615 nm cavities.
    pub const TDBC_FILM: LorentzParams = LorentzParams {
        n0: 1.5,
        f: 0.037,
        ex: 2.1,
        gamma: 0.034,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.n0 >= 1.0
            && self.f >= 0.0
            && self.ex > 0.0
            && self.gamma > 0.0
            && [self.n0, self.f, self.ex, self.gamma].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "Lorentz parameters need n0 ≥ 1, f ≥ 0, Ex > 0, γ > 0 (got {self:?})"
            )))
        }
    }
}

/// Free-electron metal, `ε(E) = ε∞ − Ep² / (E² + iΓE)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DrudeParams {
    pub eps_inf: f64,
    /// Plasma energy, eV.
    pub ep: f64,
    /// Damping energy, eV.
    pub damping: f64,
}

impl DrudeParams {
    /// Default silver model used for the cavity mirrors.
    pub const SILVER: DrudeParams = DrudeParams {
        eps_inf: 5.0,
        ep: 9.0,
        damping: 0.07,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = self.eps_inf >= 1.0
            && self.ep > 0.0
            && self.damping >= 0.0
            && [self.eps_inf, self.ep, self.damping].iter().all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "Drude parameters need ε∞ ≥ 1, Ep > 0, Γ ≥ 0 (got {self:?})"
            )))
        }
    }
}

impl Default for DrudeParams {
    fn default() -> Self {
        Self::SILVER
    }
}

/// One row of tabulated optical constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticsRow {
    pub energy_ev: f64,
    pub n: f64,
    pub k: f64,
}

/// Measured `(n, k)` versus energy, interpolated piecewise-linearly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<OpticsRow>", into = "Vec<OpticsRow>")]
pub struct TabulatedOptics {
    rows: Vec<OpticsRow>,
}

impl TryFrom<Vec<OpticsRow>> for TabulatedOptics {
    type Error = Error;
    fn try_from(rows: Vec<OpticsRow>) -> Result<Self> {
        Self::new(rows)
    }
}

impl From<TabulatedOptics> for Vec<OpticsRow> {
    fn from(t: TabulatedOptics) -> Self {
        t.rows
    }
}

impl TabulatedOptics {
    pub fn new(rows: Vec<OpticsRow>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::InvalidParameter("optical table is empty".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if !(r.energy_ev.is_finite() && r.n.is_finite() && r.k.is_finite()) {
                return Err(Error::InvalidParameter(format!("row {i}: non-finite value")));
            }
            if r.k < 0.0 {
                return Err(Error::InvalidParameter(format!("row {i}: k = {} < 0", r.k)));
            }
        }
        if let Some(w) = rows.windows(2).position(|w| w[1].energy_ev <= w[0].energy_ev) {
            return Err(Error::InvalidParameter(format!(
                "energies must be strictly increasing (rows {} and {})",
                w,
                w + 1
            )));
        }
        Ok(Self { rows })
    }

    /// Parses a CSV document with header `energy_ev,n,k`.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 1,
            message: "empty optical-constants file".into(),
        })?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["energy_ev", "n", "k"] {
            return Err(Error::Parse {
                line: hline,
                message: format!("expected header `energy_ev,n,k`, found `{header}`"),
            });
        }
        let mut rows = Vec::new();
        for (line, l) in lines {
            let vals: Vec<&str> = l.split(',').map(str::trim).collect();
            if vals.len() != 3 {
                return Err(Error::Parse {
                    line,
                    message: format!("expected 3 columns, found {}", vals.len()),
                });
            }
            let mut parsed = [0.0; 3];
            for (slot, v) in parsed.iter_mut().zip(&vals) {
                *slot = v.parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("not a number: `{v}`"),
                })?;
            }
            rows.push(OpticsRow {
                energy_ev: parsed[0],
                n: parsed[1],
                k: parsed[2],
            });
        }
        Self::new(rows).map_err(|e| Error::Parse {
            line: hline,
            message: e.to_string(),
        })
    }

    pub fn rows(&self) -> &[OpticsRow] {
        &self.rows
    }

    pub fn energy_range(&self) -> (f64, f64) {
        (self.rows[0].energy_ev, self.rows[self.rows.len() - 1].energy_ev)
    }
}

/// A material's dielectric response.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DielectricModel {
    Constant { n: f64 },
    Lorentz(LorentzParams),
    Drude(DrudeParams),
    Tabulated { table: TabulatedOptics },
}

impl DielectricModel {
    pub fn constant(n: f64) -> Self {
        DielectricModel::Constant { n }
    }

    pub fn silver() -> Self {
        DielectricModel::Drude(DrudeParams::SILVER)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DielectricModel::Constant { n } => {
                if n.is_finite() && *n >= 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("constant index must be ≥ 1, got {n}")))
                }
            }
            DielectricModel::Lorentz(p) => p.validate(),
            DielectricModel::Drude(p) => p.validate(),
            DielectricModel::Tabulated { .. } => Ok(()),
        }
    }

    pub fn permittivity(&self, e: PhotonEnergy) -> Result<Complex64> {
        match self {
            DielectricModel::Constant { n } => Ok(Complex64::new(n * n, 0.0)),
            DielectricModel::Lorentz(p) => Ok(lorentz_permittivity(e, p)),
            DielectricModel::Drude(p) => Ok(drude_permittivity(e, p)),
            DielectricModel::Tabulated { table } => {
                let n = tabulated_index(e, table)?;
                Ok(n * n)
            }
        }
    }

    pub fn index(&self, e: PhotonEnergy) -> Result<Complex64> {
        match self {
            DielectricModel::Constant { n } => Ok(Complex64::new(*n, 0.0)),
            DielectricModel::Tabulated { table } => tabulated_index(e, table),
            _ => self.permittivity(e).map(refractive_index),
        }
    }

    /// True when the medium is lossless at every energy.
    pub fn is_lossless(&self) -> bool {
        match self {
            DielectricModel::Constant { .. } => true,
            DielectricModel::Lorentz(p) => p.f == 0.0,
            DielectricModel::Drude(_) => false,
            DielectricModel::Tabulated { table } => table.rows().iter().all(|r| r.k == 0.0),
        }
    }
}

pub fn lorentz_permittivity(e: PhotonEnergy, p: &LorentzParams) -> Complex64 {
    let e = e.ev();
    let denom = Complex64::new(p.ex * p.ex - e * e, -p.gamma * e);
    Complex64::new(p.n0 * p.n0, 0.0) + p.f / denom
}

pub fn drude_permittivity(e: PhotonEnergy, p: &DrudeParams) -> Complex64 {
    let e = e.ev();
    let denom = Complex64::new(e * e, p.damping * e);
    Complex64::new(p.eps_inf, 0.0) - p.ep * p.ep / denom
}

/// Square root of the permittivity on the branch `Im n ≥ 0`.
pub fn refractive_index(eps: Complex64) -> Complex64 {
    let n = eps.sqrt();
    if n.im < 0.0 || (n.im == 0.0 && n.re < 0.0) {
        -n
    } else {
        n
    }
}

/// Linear interpolation of `(n, k)` in energy.
pub fn tabulated_index(e: PhotonEnergy, t: &TabulatedOptics) -> Result<Complex64> {
    let e = e.ev();
    let rows = t.rows();
    let (min, max) = t.energy_range();
    if !(min..=max).contains(&e) {
        return Err(Error::OutOfRange { energy: e, min, max });
    }
    // first row with energy ≥ e
    let hi = rows.partition_point(|r| r.energy_ev < e);
    if rows[hi].energy_ev == e {
        return Ok(Complex64::new(rows[hi].n, rows[hi].k));
    }
    let (a, b) = (rows[hi - 1], rows[hi]);
    let w = (e - a.energy_ev) / (b.energy_ev - a.energy_ev);
    Ok(Complex64::new(
        a.n + w * (b.n - a.n),
        a.k + w * (b.k - a.k),
    ))
}
