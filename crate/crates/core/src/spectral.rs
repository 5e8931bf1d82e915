//! Spectral feature extraction: dips, branch traces, Rabi splitting and the
//! coupled/decoupled regime label.
//!
//! Every analysis here looks for *minima*. Reflectance spectra can be used as
//! they are; maps and spectra of `1 − R` are flipped back to `R` by
//! [`Spectrum::from_map_column`] and [`Spectrum::dip_oriented`].

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::CavityParams;
use crate::error::{Error, Result};
use crate::polariton::{Branch, PolaritonBranches};
use crate::tmm::{check_grid, reflectance_spectrum, DispersionMap, LayerStack, Polarization, ONE_MINUS_R};

/// Prominence threshold, as a fraction of the unit full scale.
pub const DEFAULT_MIN_PROMINENCE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Simulated,
    Ingested,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub values: Vec<f64>,
    pub provenance: Provenance,
    /// True when `values` hold `1 − R` rather than a dip-like quantity.
    #[serde(default)]
    pub inverted: bool,
}

impl Spectrum {
    pub fn new(energies: Vec<f64>, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        check_grid("energy", &energies)?;
        if values.len() != energies.len() {
            return Err(Error::InvalidParameter(format!(
                "{} values for {} energies",
                values.len(),
                energies.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("spectrum values must be finite".into()));
        }
        Ok(Self {
            energies,
            values,
            provenance,
            inverted: false,
        })
    }

    /// A `1 − R` spectrum.
    pub fn one_minus_r(energies: Vec<f64>, values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        let mut s = Self::new(energies, values, provenance)?;
        s.inverted = true;
        Ok(s)
    }

    /// Simulated reflectance at fixed in-plane momentum.
    pub fn reflectance(stack: &LayerStack, energies: &[f64], kx_um: f64, pol: Polarization) -> Result<Self> {
        let r = reflectance_spectrum(stack, energies, kx_um, pol)?;
        Self::new(energies.to_vec(), r, Provenance::Simulated)
    }

    /// Column `j` of a map, flipped to reflectance if the map stores `1 − R`.
    pub fn from_map_column(map: &DispersionMap, j: usize) -> Self {
        let mut values = map.column(j);
        if map.quantity_label == ONE_MINUS_R {
            values.iter_mut().for_each(|v| *v = 1.0 - *v);
        }
        Self {
            energies: map.energies.clone(),
            values,
            provenance: Provenance::Simulated,
            inverted: false,
        }
    }

    /// The same spectrum with features as minima.
    pub fn dip_oriented(&self) -> Self {
        if !self.inverted {
            return self.clone();
        }
        Self {
            energies: self.energies.clone(),
            values: self.values.iter().map(|v| 1.0 - v).collect(),
            provenance: self.provenance,
            inverted: false,
        }
    }

    /// Mean grid spacing, eV.
    pub fn resolution(&self) -> f64 {
        let n = self.energies.len();
        if n < 2 {
            return 0.0;
        }
        (self.energies[n - 1] - self.energies[0]) / (n - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dip {
    /// Refined position of the minimum, eV.
    pub center: f64,
    /// Spectrum value at the refined minimum.
    pub depth: f64,
    pub prominence: f64,
    /// Full width at half prominence, eV; `None` if a side never rises to
    /// that level inside the spectrum.
    pub fwhm: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DipSet {
    pub dips: Vec<Dip>,
}

impl DipSet {
    pub fn len(&self) -> usize {
        self.dips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dips.is_empty()
    }

    pub fn centers(&self) -> Vec<f64> {
        self.dips.iter().map(|d| d.center).collect()
    }

    /// Highest dip strictly below and lowest dip strictly above `e`.
    pub fn straddling(&self, e: f64) -> (Option<&Dip>, Option<&Dip>) {
        let below = self.dips.iter().rfind(|d| d.center < e);
        let above = self.dips.iter().find(|d| d.center > e);
        (below, above)
    }
}

/// Vertex of the parabola through three points (any spacing).
fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> (f64, f64) {
    let d1 = (y[1] - y[0]) / (x[1] - x[0]);
    let d2 = (y[2] - y[1]) / (x[2] - x[1]);
    let a = (d2 - d1) / (x[2] - x[0]);
    if a <= 0.0 || !a.is_finite() {
        return (x[1], y[1]);
    }
    // y = y1 + b (x − x1) + a (x − x1)² with b the slope at x1
    let b = d1 + a * (x[1] - x[0]);
    let xv = x[1] - b / (2.0 * a);
    let yv = y[1] - b * b / (4.0 * a);
    (xv, yv)
}

/// Local minima with prominence ≥ `min_prominence` whose centers fall inside
/// `window` (eV). Prominence is measured on the whole spectrum, as the drop
/// from the lower of the two highest points reachable on either side before
/// the spectrum falls below the minimum.
pub fn find_dips(s: &Spectrum, min_prominence: f64, window: (f64, f64)) -> Result<DipSet> {
    let (lo, hi) = window;
    let s = s.dip_oriented();
    let (x, v) = (&s.energies, &s.values);
    if !x.iter().any(|&e| e >= lo && e <= hi) {
        return Err(Error::EmptyWindow { lo, hi });
    }
    let n = v.len();
    let mut dips = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        if v[i] < v[i - 1] {
            // walk across a flat bottom
            let mut j = i;
            while j + 1 < n && v[j + 1] == v[i] {
                j += 1;
            }
            if j + 1 < n && v[j + 1] > v[i] {
                let mid = (i + j) / 2;
                if let Some(d) = dip_at(x, v, mid, i, j) {
                    if d.prominence >= min_prominence && d.center >= lo && d.center <= hi {
                        dips.push(d);
                    }
                }
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    dips.sort_by(|a, b| a.center.total_cmp(&b.center));
    Ok(DipSet { dips })
}

fn dip_at(x: &[f64], v: &[f64], mid: usize, left: usize, right: usize) -> Option<Dip> {
    let n = v.len();
    let vmin = v[mid];
    let mut l = left;
    let mut left_max = vmin;
    while l > 0 && v[l - 1] >= vmin {
        l -= 1;
        left_max = left_max.max(v[l]);
    }
    let mut r = right;
    let mut right_max = vmin;
    while r + 1 < n && v[r + 1] >= vmin {
        r += 1;
        right_max = right_max.max(v[r]);
    }
    let prominence = left_max.min(right_max) - vmin;
    if prominence <= 0.0 {
        return None;
    }
    let (center, depth) = if left == right {
        parabola_vertex([x[mid - 1], x[mid], x[mid + 1]], [v[mid - 1], v[mid], v[mid + 1]])
    } else {
        (0.5 * (x[left] + x[right]), vmin)
    };

    let half = vmin + 0.5 * prominence;
    let crossing = |a: usize, b: usize| {
        let w = (half - v[a]) / (v[b] - v[a]);
        x[a] + w * (x[b] - x[a])
    };
    let left_edge = (l..left).rev().find(|&k| v[k] >= half).map(|k| crossing(k + 1, k));
    let right_edge = (right + 1..=r).find(|&k| v[k] >= half).map(|k| crossing(k - 1, k));
    let fwhm = match (left_edge, right_edge) {
        (Some(a), Some(b)) => Some(b - a),
        _ => None,
    };
    Some(Dip {
        center,
        depth,
        prominence,
        fwhm,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Splitting {
    /// Minimal separation of the two dips bracketing the exciton, eV.
    pub rabi_ev: f64,
    /// Momentum of the minimal separation, μm⁻¹.
    pub kx_um: f64,
    pub lower_ev: f64,
    pub upper_ev: f64,
}

/// Rabi splitting at the anti-crossing of `bare_mode` with the exciton.
///
/// At every momentum the highest dip below `ex` and the lowest dip above it
/// form a candidate pair. A real anti-crossing pushes both branches away from
/// the bare mode, so a pair only counts if the bare mode sits inside it with at
/// least two energy steps of clearance on each side; this rejects both a bare
/// mode passing straight through `ex` and small splittings of the exciton line
/// far from resonance. The result is the candidate with minimal separation.
pub fn measure_splitting<F>(map: &DispersionMap, bare_mode: F, ex: f64, min_prominence: f64) -> Result<Splitting>
where
    F: Fn(f64) -> f64,
{
    let detuning: Vec<f64> = map.momenta.iter().map(|&k| bare_mode(k) - ex).collect();
    if !detuning.windows(2).any(|w| w[0] * w[1] <= 0.0) {
        return Err(Error::NoAntiCrossing(format!(
            "bare mode does not cross {ex} eV between kx = {} and {} μm⁻¹",
            map.momenta[0],
            map.momenta[map.momenta.len() - 1]
        )));
    }
    let range = (map.energies[0], map.energies[map.energies.len() - 1]);
    let columns: Vec<Option<Splitting>> = (0..map.momenta.len())
        .into_par_iter()
        .map(|j| {
            let s = Spectrum::from_map_column(map, j);
            let margin = 2.0 * s.resolution();
            let dips = find_dips(&s, min_prominence, range).ok()?;
            let (lower, upper) = dips.straddling(ex);
            let (lower, upper) = (lower?.center, upper?.center);
            let bare = ex + detuning[j];
            (bare >= lower + margin && bare <= upper - margin).then_some(Splitting {
                rabi_ev: upper - lower,
                kx_um: map.momenta[j],
                lower_ev: lower,
                upper_ev: upper,
            })
        })
        .collect();
    columns
        .into_iter()
        .flatten()
        .min_by(|a, b| a.rabi_ev.total_cmp(&b.rabi_ev))
        .ok_or_else(|| Error::NoAntiCrossing(format!("no pair of dips brackets both {ex} eV and the bare mode")))
}

/// A bare cavity mode traced on a momentum grid, linearly interpolated in
/// between and held constant past the ends.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BareMode {
    pub momenta: Vec<f64>,
    pub energies: Vec<f64>,
}

impl BareMode {
    pub fn at(&self, kx_um: f64) -> f64 {
        let k = &self.momenta;
        let j = k.partition_point(|&v| v < kx_um);
        if j == 0 {
            return self.energies[0];
        }
        if j == k.len() {
            return self.energies[k.len() - 1];
        }
        let w = (kx_um - k[j - 1]) / (k[j] - k[j - 1]);
        self.energies[j - 1] + w * (self.energies[j] - self.energies[j - 1])
    }

    /// Traces mode `order` of `cavity` with the film oscillator switched off.
    ///
    /// The metal mirrors shift the resonances away from the ideal-mirror
    /// ladder, so the mode is taken from reflectance dips: at each momentum
    /// the dip nearest the ideal-mirror energy of `order`.
    pub fn empty_cavity(
        cavity: &CavityParams,
        order: u32,
        energies: &[f64],
        momenta: &[f64],
        pol: Polarization,
    ) -> Result<Self> {
        let mut empty = *cavity;
        empty.film.f = 0.0;
        let stack = empty.stack();
        let map = crate::tmm::dispersion_map(&stack, energies, momenta, pol)?;
        let range = (energies[0], energies[energies.len() - 1]);
        let traced = (0..momenta.len())
            .map(|j| {
                let guess = crate::polariton::empty_mode_energy(order, cavity.length_nm, cavity.film.n0, momenta[j]);
                let dips = find_dips(&Spectrum::from_map_column(&map, j), DEFAULT_MIN_PROMINENCE, range)?;
                dips.dips
                    .iter()
                    .map(|d| d.center)
                    .min_by(|a, b| (a - guess).abs().total_cmp(&(b - guess).abs()))
                    .ok_or_else(|| {
                        Error::NoAntiCrossing(format!("no empty-cavity resonance at kx = {} μm⁻¹", momenta[j]))
                    })
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(Self {
            momenta: momenta.to_vec(),
            energies: traced,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    Coupled,
    Decoupled,
    Indeterminate,
}

impl std::fmt::Display for Regime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Regime::Coupled => "Coupled",
            Regime::Decoupled => "Decoupled",
            Regime::Indeterminate => "Indeterminate",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeLabel {
    pub regime: Regime,
    /// Qualifying dips within the analysis window.
    pub dips_near_ex: usize,
    /// Band gap between the straddling dips, eV, when they exist.
    pub gap_ev: Option<f64>,
    pub lower_edge_ev: Option<f64>,
    pub upper_edge_ev: Option<f64>,
}

impl RegimeLabel {
    pub fn indeterminate(dips_near_ex: usize) -> Self {
        Self {
            regime: Regime::Indeterminate,
            dips_near_ex,
            gap_ev: None,
            lower_edge_ev: None,
            upper_edge_ev: None,
        }
    }
}

/// Labels a normal-incidence spectrum.
///
/// Decoupled needs one dip below and one above `ex` inside
/// `[ex − window, ex + window]`, separated by at least two grid steps. A single
/// dip is Coupled (the mid-polariton). Anything else is Indeterminate. The
/// dip-count criterion is this crate's operational definition of "one
/// broadened peak" versus "two peaks".
pub fn classify_regime(s: &Spectrum, ex: f64, window: f64, min_prominence: f64) -> RegimeLabel {
    let indeterminate = RegimeLabel::indeterminate;
    let (first, last) = (s.energies[0], s.energies[s.energies.len() - 1]);
    if first > ex - window || last < ex + window {
        return indeterminate(0);
    }
    let dips = match find_dips(s, min_prominence, (ex - window, ex + window)) {
        Ok(d) => d,
        Err(_) => return indeterminate(0),
    };
    let floor = 2.0 * s.resolution();
    if let (Some(lo), Some(hi)) = dips.straddling(ex) {
        let gap = hi.center - lo.center;
        if gap >= floor {
            return RegimeLabel {
                regime: Regime::Decoupled,
                dips_near_ex: dips.len(),
                gap_ev: Some(gap),
                lower_edge_ev: Some(lo.center),
                upper_edge_ev: Some(hi.center),
            };
        }
    }
    if dips.len() == 1 {
        return RegimeLabel {
            regime: Regime::Coupled,
            dips_near_ex: 1,
            gap_ev: None,
            lower_edge_ev: None,
            upper_edge_ev: None,
        };
    }
    indeterminate(dips.len())
}

/// Greedy continuation of dips along increasing momentum.
///
/// Each step matches active branches to the dips of the next column in order of
/// increasing energy jump; a branch ends when no unclaimed dip lies within
/// `max_jump` eV of its last point.
pub fn trace_branches(map: &DispersionMap, seeds: &DipSet, min_prominence: f64, max_jump: f64) -> Result<PolaritonBranches> {
    if seeds.is_empty() {
        return Err(Error::InvalidParameter("at least one seed dip is required".into()));
    }
    let range = (map.energies[0], map.energies[map.energies.len() - 1]);
    let mut branches: Vec<Branch> = seeds
        .dips
        .iter()
        .map(|d| Branch {
            label: format!("B@{:.4}", d.center),
            energies: vec![d.center],
        })
        .collect();
    let mut active: Vec<bool> = vec![true; branches.len()];
    for j in 1..map.momenta.len() {
        if !active.iter().any(|&a| a) {
            break;
        }
        let dips = find_dips(&Spectrum::from_map_column(map, j), min_prominence, range)?;
        let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
        for (b, branch) in branches.iter().enumerate().filter(|(b, _)| active[*b]) {
            let last = *branch.energies.last().unwrap();
            for (d, dip) in dips.dips.iter().enumerate() {
                let jump = (dip.center - last).abs();
                if jump <= max_jump {
                    pairs.push((jump, b, d));
                }
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut branch_taken = vec![false; branches.len()];
        let mut dip_taken = vec![false; dips.len()];
        for (_, b, d) in pairs {
            if !branch_taken[b] && !dip_taken[d] {
                branch_taken[b] = true;
                dip_taken[d] = true;
                branches[b].energies.push(dips.dips[d].center);
            }
        }
        for (b, a) in active.iter_mut().enumerate() {
            *a &= branch_taken[b];
        }
    }
    Ok(PolaritonBranches {
        kx: map.momenta.clone(),
        branches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    pub ex: f64,
    pub window: f64,
    pub min_prominence: f64,
    pub polarization: Polarization,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            ex: 2.1,
            window: 0.15,
            min_prominence: DEFAULT_MIN_PROMINENCE,
            polarization: Polarization::TE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub length_nm: f64,
    /// Normal-incidence reflectance on the sweep's energy grid (empty when the
    /// simulation failed).
    pub reflectance: Vec<f64>,
    pub outcome: std::result::Result<(RegimeLabel, Vec<f64>), String>,
}

/// Normal-incidence spectra and regime labels of the cavity at each length.
/// Lengths are processed in parallel; rows come back in input order. A film
/// with zero oscillator strength has no polariton regime, so its rows are
/// Indeterminate and only list the bare-mode dips.
pub fn thickness_sweep(base: &CavityParams, lengths: &[f64], energies: &[f64], opts: &SweepOptions) -> Vec<SweepRow> {
    lengths
        .par_iter()
        .map(|&length_nm| {
            let cavity = CavityParams { length_nm, ..*base };
            let spectrum = cavity
                .stack()
                .validate()
                .and_then(|_| Spectrum::reflectance(&cavity.stack(), energies, 0.0, opts.polarization));
            match spectrum {
                Ok(s) => {
                    let centers = find_dips(&s, opts.min_prominence, (opts.ex - opts.window, opts.ex + opts.window))
                        .map(|d| d.centers())
                        .unwrap_or_default();
                    // without oscillator strength every dip is a bare cavity mode
                    let label = if cavity.film.f > 0.0 {
                        classify_regime(&s, opts.ex, opts.window, opts.min_prominence)
                    } else {
                        RegimeLabel::indeterminate(centers.len())
                    };
                    SweepRow {
                        length_nm,
                        reflectance: s.values,
                        outcome: Ok((label, centers)),
                    }
                }
                Err(e) => SweepRow {
                    length_nm,
                    reflectance: Vec::new(),
                    outcome: Err(e.to_string()),
                },
            }
        })
        .collect()
}
