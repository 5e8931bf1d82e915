//! Multimode cavity polariton models.
//!
//! Two Hamiltonians describe a film coupled to N longitudinal modes:
//!
//! * [`Topology::Entangled`] — an (N+1)-dimensional matrix where every mode
//!   couples to one shared exciton, so modes mix with each other through the
//!   material;
//! * [`Topology::Decoupled`] — a 2N-dimensional block-diagonal matrix where
//!   each mode couples to its own exciton copy independently.
//!
//! These explicit matrices are reconstructions from the verbal description of
//! the two regimes (mode–exciton coupling `g`, no direct mode–mode terms), not
//! matrices taken from a published derivation.
//!
//! The transition between the regimes happens at the critical length `L_c`,
//! the root of
//!
//! ```text
//! L_c = hc · n0γ / (π · (1 − 2β) · (f − (n0γ)²)),   β = 1 / (exp(2π f L_c / (hc n0 γ)) − 1)
//! ```

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::roots::{brent, BrentOptions};
use crate::units::{HBARC_EV_NM, HC_EV_NM, PER_UM_TO_PER_NM};

/// Bare mode energy `(ħc/n0)·√((mπ/L)² + kx²)` of an ideal-mirror cavity.
///
/// This ignores the phase picked up on reflection from real metal mirrors, so
/// it only labels modes; quantitative mode positions come from the
/// transfer-matrix model.
pub fn empty_mode_energy(order: u32, length_nm: f64, n0: f64, kx_um: f64) -> f64 {
    let kz = order as f64 * std::f64::consts::PI / length_nm;
    let kx = kx_um * PER_UM_TO_PER_NM;
    HBARC_EV_NM / n0 * (kz * kz + kx * kx).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeLadder {
    pub length_nm: f64,
    pub n0: f64,
    pub orders: Vec<u32>,
}

impl ModeLadder {
    pub fn new(length_nm: f64, n0: f64, orders: Vec<u32>) -> Result<Self> {
        if !(length_nm.is_finite() && length_nm > 0.0) {
            return Err(Error::InvalidParameter(format!("cavity length must be positive, got {length_nm}")));
        }
        if orders.is_empty() || orders[0] == 0 || orders.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "mode orders must be positive and strictly increasing".into(),
            ));
        }
        Ok(Self { length_nm, n0, orders })
    }

    /// Orders whose normal-incidence energy lies within `window` eV of `ex`.
    pub fn near_exciton(length_nm: f64, n0: f64, ex: f64, window: f64) -> Result<Self> {
        let orders: Vec<u32> = (1..)
            .map(|m| (m, empty_mode_energy(m, length_nm, n0, 0.0)))
            .take_while(|&(_, e)| e <= ex + window)
            .filter(|&(_, e)| (e - ex).abs() <= window)
            .map(|(m, _)| m)
            .collect();
        if orders.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "no mode of a {length_nm} nm cavity lies within {window} eV of {ex} eV"
            )));
        }
        Self::new(length_nm, n0, orders)
    }

    pub fn energies(&self, kx_um: f64) -> Vec<f64> {
        self.orders
            .iter()
            .map(|&m| empty_mode_energy(m, self.length_nm, self.n0, kx_um))
            .collect()
    }

    pub fn coupled_model(&self, kx_um: f64, ex: f64, g: f64, topology: Topology) -> CoupledModel {
        CoupledModel {
            mode_energies: self.energies(kx_um),
            mode_orders: self.orders.clone(),
            ex,
            g,
            topology,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Topology {
    Entangled,
    Decoupled,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoupledModel {
    /// Mode energies in eV, ascending.
    pub mode_energies: Vec<f64>,
    /// Longitudinal order of each mode, used for branch labels.
    pub mode_orders: Vec<u32>,
    pub ex: f64,
    /// Coupling of each mode to the exciton, `ħΩ_R / 2`.
    pub g: f64,
    pub topology: Topology,
}

impl CoupledModel {
    /// Model with modes numbered 1..=N.
    pub fn new(mode_energies: Vec<f64>, ex: f64, g: f64, topology: Topology) -> Self {
        let mode_orders = (1..=mode_energies.len() as u32).collect();
        Self {
            mode_energies,
            mode_orders,
            ex,
            g,
            topology,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.mode_energies.is_empty() {
            return Err(Error::InvalidParameter("at least one cavity mode is required".into()));
        }
        if self.mode_orders.len() != self.mode_energies.len() {
            return Err(Error::InvalidParameter("one order per mode energy is required".into()));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(Error::InvalidParameter(format!("coupling must be ≥ 0, got {}", self.g)));
        }
        if self.mode_energies.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter("mode energies must be ascending".into()));
        }
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        let n = self.mode_energies.len();
        match self.topology {
            Topology::Entangled => n + 1,
            Topology::Decoupled => 2 * n,
        }
    }
}

/// Real symmetric (hence Hermitian) Hamiltonian in eV.
pub fn build_hamiltonian(model: &CoupledModel) -> DMatrix<f64> {
    let n = model.mode_energies.len();
    match model.topology {
        Topology::Entangled => {
            let mut h = DMatrix::zeros(n + 1, n + 1);
            for (i, &e) in model.mode_energies.iter().enumerate() {
                h[(i, i)] = e;
                h[(i, n)] = model.g;
                h[(n, i)] = model.g;
            }
            h[(n, n)] = model.ex;
            h
        }
        Topology::Decoupled => {
            let mut h = DMatrix::zeros(2 * n, 2 * n);
            for (i, &e) in model.mode_energies.iter().enumerate() {
                let (p, x) = (2 * i, 2 * i + 1);
                h[(p, p)] = e;
                h[(x, x)] = model.ex;
                h[(p, x)] = model.g;
                h[(x, p)] = model.g;
            }
            h
        }
    }
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(h: DMatrix<f64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn eigenvalues(model: &CoupledModel) -> Vec<f64> {
    symmetric_eigenvalues(build_hamiltonian(model))
}

/// Eigenvalues of one `[[e, g], [g, ex]]` block, lower first.
fn block_eigenvalues(e: f64, ex: f64, g: f64) -> (f64, f64) {
    let mean = 0.5 * (e + ex);
    let half = (0.25 * (e - ex) * (e - ex) + g * g).sqrt();
    (mean - half, mean + half)
}

/// Labels for eigenvalues sorted ascending.
///
/// Decoupled: each 2×2 block contributes `LP_m` (lower) and `UP_m` (upper).
/// Entangled: with `k` modes below the exciton, the eigenvalue at index `k`
/// lies between the two modes bracketing the exciton and becomes `MP_{m,m+1}`;
/// eigenvalues below it are `LP` of the mode just above them, those above it
/// `UP` of the mode just below.
pub fn branch_labels(model: &CoupledModel) -> Vec<String> {
    let orders = &model.mode_orders;
    match model.topology {
        Topology::Decoupled => {
            let mut tagged: Vec<(f64, String)> = Vec::with_capacity(2 * orders.len());
            for (&e, &m) in model.mode_energies.iter().zip(orders) {
                let (lo, hi) = block_eigenvalues(e, model.ex, model.g);
                tagged.push((lo, format!("LP_{m}")));
                tagged.push((hi, format!("UP_{m}")));
            }
            tagged.sort_by(|a, b| a.0.total_cmp(&b.0));
            tagged.into_iter().map(|(_, l)| l).collect()
        }
        Topology::Entangled => {
            let n = orders.len();
            let k = model.mode_energies.iter().filter(|&&e| e < model.ex).count();
            (0..=n)
                .map(|i| {
                    if i == k && k > 0 && k < n {
                        format!("MP_{}-{}", orders[k - 1], orders[k])
                    } else if i < k || (i == 0 && k == 0) {
                        format!("LP_{}", orders[i])
                    } else {
                        format!("UP_{}", orders[i - 1])
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Branch {
    pub label: String,
    /// Energy at `kx[i]` for `i < energies.len()`; a traced branch that ends
    /// early is shorter than the grid.
    pub energies: Vec<f64>,
}

impl Branch {
    /// Momentum of the last point of this branch.
    pub fn last_kx(&self, kx: &[f64]) -> Option<f64> {
        self.energies.len().checked_sub(1).map(|i| kx[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolaritonBranches {
    pub kx: Vec<f64>,
    pub branches: Vec<Branch>,
}

impl PolaritonBranches {
    /// CSV with a `kx` column followed by one column per branch; cells past
    /// the end of a truncated branch are left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kx");
        for b in &self.branches {
            out.push(',');
            out.push_str(&b.label);
        }
        out.push('\n');
        for (i, kx) in self.kx.iter().enumerate() {
            write!(out, "{kx}").unwrap();
            for b in &self.branches {
                out.push(',');
                if let Some(e) = b.energies.get(i) {
                    write!(out, "{e}").unwrap();
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Eigen-branches over a momentum grid. Branch `i` is the `i`-th smallest
/// eigenvalue at every `kx`; labels come from the first grid point.
pub fn eigenbranches<F>(model_at_kx: F, kx_grid: &[f64]) -> Result<PolaritonBranches>
where
    F: Fn(f64) -> CoupledModel,
{
    if kx_grid.is_empty() {
        return Err(Error::InvalidParameter("momentum grid is empty".into()));
    }
    let mut branches: Vec<Branch> = Vec::new();
    for (i, &kx) in kx_grid.iter().enumerate() {
        let model = model_at_kx(kx);
        model.validate()?;
        let ev = eigenvalues(&model);
        if i == 0 {
            branches = branch_labels(&model)
                .into_iter()
                .map(|label| Branch {
                    label,
                    energies: Vec::with_capacity(kx_grid.len()),
                })
                .collect();
        } else if ev.len() != branches.len() {
            return Err(Error::InvalidParameter(format!(
                "Hamiltonian dimension changed from {} to {} at kx = {kx}",
                branches.len(),
                ev.len()
            )));
        }
        for (b, e) in branches.iter_mut().zip(ev) {
            b.energies.push(e);
        }
    }
    Ok(PolaritonBranches {
        kx: kx_grid.to_vec(),
        branches,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalLengthParams {
    pub n0: f64,
    /// Absorption FWHM, eV.
    pub gamma: f64,
    /// Oscillator strength per unit volume, eV².
    pub f: f64,
}

impl CriticalLengthParams {
    pub const TDBC: CriticalLengthParams = CriticalLengthParams {
        n0: 1.5,
        gamma: 0.034,
        f: 0.037,
    };

    fn validate(&self) -> Result<()> {
        if !(self.n0 >= 1.0 && self.gamma > 0.0 && self.f.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "critical length needs n0 ≥ 1 and γ > 0 (got {self:?})"
            )));
        }
        let damping = self.n0 * self.gamma;
        if self.f <= damping * damping {
            return Err(Error::NoSolution(format!(
                "f = {} eV² does not exceed (n0γ)² = {} eV²",
                self.f,
                damping * damping
            )));
        }
        Ok(())
    }

    fn beta(&self, length_nm: f64) -> f64 {
        let x = 2.0 * std::f64::consts::PI * self.f * length_nm / (HC_EV_NM * self.n0 * self.gamma);
        1.0 / x.exp_m1()
    }

    /// Right-hand side of the implicit equation.
    pub fn rhs(&self, length_nm: f64) -> f64 {
        let damping = self.n0 * self.gamma;
        HC_EV_NM * damping
            / (std::f64::consts::PI * (1.0 - 2.0 * self.beta(length_nm)) * (self.f - damping * damping))
    }

    /// `|L − RHS(L)|` in nm.
    pub fn residual(&self, length_nm: f64) -> f64 {
        (length_nm - self.rhs(length_nm)).abs()
    }

    /// The critical length with `β` set to zero.
    pub fn large_length_limit(&self) -> f64 {
        let damping = self.n0 * self.gamma;
        HC_EV_NM * damping / (std::f64::consts::PI * (self.f - damping * damping))
    }
}

/// Default search bracket for [`critical_length`], nm.
pub const CRITICAL_LENGTH_BRACKET: (f64, f64) = (1.0, 1e5);

pub fn critical_length(p: &CriticalLengthParams) -> Result<f64> {
    critical_length_in(p, CRITICAL_LENGTH_BRACKET.0, CRITICAL_LENGTH_BRACKET.1)
}

/// Solves `L·π·(1 − 2β(L))·(f − (n0γ)²) − hc·n0γ = 0` on `[lo, hi]` nm. The
/// left side increases monotonically with `L` on the physical branch.
pub fn critical_length_in(p: &CriticalLengthParams, lo: f64, hi: f64) -> Result<f64> {
    p.validate()?;
    let damping = p.n0 * p.gamma;
    let excess = p.f - damping * damping;
    let g = |l: f64| l * std::f64::consts::PI * (1.0 - 2.0 * p.beta(l)) * excess - HC_EV_NM * damping;
    brent(
        g,
        lo,
        hi,
        BrentOptions {
            xtol: 1e-10,
            max_iterations: 200,
        },
    )
}

/// Splitting `√f / n0` (eV) implied by an oscillator strength.
pub fn nominal_rabi(f: f64, n0: f64) -> Result<f64> {
    if !(f >= 0.0 && n0 > 0.0) {
        return Err(Error::InvalidParameter(format!("need f ≥ 0 and n0 > 0 (got f = {f}, n0 = {n0})")));
    }
    Ok(f.sqrt() / n0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// det(H − λI) of a 3×3 matrix by cofactor expansion.
    fn det3_shifted(h: &DMatrix<f64>, l: f64) -> f64 {
        let a = |i: usize, j: usize| h[(i, j)] - if i == j { l } else { 0.0 };
        a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0))
    }

    /// Roots of the characteristic polynomial by scanning for sign changes and
    /// bisecting each one.
    fn brute_force_eigenvalues3(h: &DMatrix<f64>) -> Vec<f64> {
        let (lo, hi, steps) = (0.0, 5.0, 50_000);
        let dx = (hi - lo) / steps as f64;
        let mut roots = Vec::new();
        for s in 0..steps {
            let (mut a, mut b) = (lo + s as f64 * dx, lo + (s + 1) as f64 * dx);
            let (fa, fb) = (det3_shifted(h, a), det3_shifted(h, b));
            if fa == 0.0 {
                roots.push(a);
                continue;
            }
            if fa * fb < 0.0 {
                for _ in 0..100 {
                    let m = 0.5 * (a + b);
                    if det3_shifted(h, a) * det3_shifted(h, m) <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                    }
                }
                roots.push(0.5 * (a + b));
            }
        }
        roots
    }

    #[test]
    fn mode_energy_closed_form() {
        let e = empty_mode_energy(3, 628.0, 1.5, 0.0);
        assert!((e - 3.0 * HC_EV_NM / (2.0 * 1.5 * 628.0)).abs() < 1e-3);
        assert!((e - 1.9743).abs() < 1e-4);
        assert!((empty_mode_energy(3, 1256.0, 1.5, 0.0) - e / 2.0).abs() < 1e-14);
        assert!(empty_mode_energy(3, 628.0, 1.5, 1.0) > e);
        assert!(empty_mode_energy(4, 628.0, 1.5, 0.0) > e);
    }

    #[test]
    fn ladder_near_exciton() {
        let ladder = ModeLadder::near_exciton(628.0, 1.5, 2.1, 1.0).unwrap();
        assert_eq!(ladder.orders, vec![2, 3, 4]);
        assert!(ModeLadder::near_exciton(10.0, 1.5, 2.1, 0.5).is_err());
        assert!(ModeLadder::new(100.0, 1.5, vec![3, 2]).is_err());
    }

    #[test]
    fn resonant_two_level() {
        let m = CoupledModel::new(vec![2.1], 2.1, 0.064, Topology::Entangled);
        let ev = eigenvalues(&m);
        assert!((ev[0] - (2.1 - 0.064)).abs() < 1e-14);
        assert!((ev[1] - (2.1 + 0.064)).abs() < 1e-14);
        assert!(((ev[1] - ev[0]) - 2.0 * 0.064).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_shapes_and_traces() {
        let modes = vec![1.9, 2.05, 2.3];
        let ent = build_hamiltonian(&CoupledModel::new(modes.clone(), 2.1, 0.06, Topology::Entangled));
        assert_eq!(ent.shape(), (4, 4));
        assert!((ent.trace() - (modes.iter().sum::<f64>() + 2.1)).abs() < 1e-15);
        assert_eq!(ent[(0, 1)], 0.0);
        let dec = build_hamiltonian(&CoupledModel::new(modes.clone(), 2.1, 0.06, Topology::Decoupled));
        assert_eq!(dec.shape(), (6, 6));
        assert!((dec.trace() - (modes.iter().sum::<f64>() + 3.0 * 2.1)).abs() < 1e-14);
        assert_eq!(dec[(1, 2)], 0.0);
    }

    #[test]
    fn entangled_three_level_matches_characteristic_polynomial() {
        let m = CoupledModel::new(vec![2.0, 2.2], 2.1, 0.064, Topology::Entangled);
        let h = build_hamiltonian(&m);
        let oracle = brute_force_eigenvalues3(&h);
        assert_eq!(oracle.len(), 3);
        for (a, b) in eigenvalues(&m).iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        // symmetric detuning puts the mid-polariton exactly on the exciton
        assert!((oracle[1] - 2.1).abs() < 1e-10);
    }

    #[test]
    fn decoupled_gap_edges_are_inner_block_eigenvalues() {
        let (ex, delta, g) = (2.1, 0.2, 0.064);
        let m = CoupledModel::new(vec![ex - delta, ex + delta], ex, g, Topology::Decoupled);
        let ev = eigenvalues(&m);
        let s = ((delta / 2.0).powi(2) + g * g).sqrt();
        let lower_edge = ex + delta / 2.0 - s;
        let upper_edge = ex - delta / 2.0 + s;
        assert!((ev[1] - lower_edge).abs() < 1e-12);
        assert!((ev[2] - upper_edge).abs() < 1e-12);
        assert!(ev[1] < ex && ex < ev[2]);
        assert_eq!(branch_labels(&m), ["LP_1", "LP_2", "UP_1", "UP_2"]);
    }

    #[test]
    fn entangled_labels() {
        let m = CoupledModel {
            mode_energies: vec![1.8, 2.0, 2.2, 2.4],
            mode_orders: vec![2, 3, 4, 5],
            ex: 2.1,
            g: 0.06,
            topology: Topology::Entangled,
        };
        assert_eq!(branch_labels(&m), ["LP_2", "LP_3", "MP_3-4", "UP_4", "UP_5"]);
        let above = CoupledModel { ex: 1.5, ..m.clone() };
        assert_eq!(branch_labels(&above), ["LP_2", "UP_2", "UP_3", "UP_4", "UP_5"]);
        let below = CoupledModel { ex: 3.0, ..m };
        assert_eq!(branch_labels(&below), ["LP_2", "LP_3", "LP_4", "LP_5", "UP_5"]);
    }

    #[test]
    fn zero_coupling_gives_bare_lines() {
        let ladder = ModeLadder::new(628.0, 1.5, vec![3, 4]).unwrap();
        let kx: Vec<f64> = (0..13).map(|i| i as f64).collect();
        let b = eigenbranches(|k| ladder.coupled_model(k, 2.1, 0.0, Topology::Entangled), &kx).unwrap();
        for (i, &k) in kx.iter().enumerate() {
            let mut expect = ladder.energies(k);
            expect.push(2.1);
            expect.sort_by(f64::total_cmp);
            let got: Vec<f64> = b.branches.iter().map(|br| br.energies[i]).collect();
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).abs() < 1e-12, "{got:?} vs {expect:?}");
            }
        }
    }

    #[test]
    fn branches_csv_layout() {
        let ladder = ModeLadder::new(628.0, 1.5, vec![3, 4]).unwrap();
        let b = eigenbranches(|k| ladder.coupled_model(k, 2.1, 0.064, Topology::Entangled), &[0.0, 1.0]).unwrap();
        let csv = b.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "kx,LP_3,MP_3-4,UP_4");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn critical_length_tdbc() {
        let lc = critical_length(&CriticalLengthParams::TDBC).unwrap();
        assert!((lc - 700.5).abs() < 0.1, "{lc}");
        assert!(CriticalLengthParams::TDBC.residual(lc) < 1e-6);
        for (lo, hi) in [(10.0, 2000.0), (600.0, 800.0), (1.0, 1e5)] {
            let l = critical_length_in(&CriticalLengthParams::TDBC, lo, hi).unwrap();
            assert!((l - lc).abs() < 1e-8);
        }
    }

    #[test]
    fn critical_length_weak_damping_scaling() {
        // with (n0 γ)² ≪ f, y = Lc / L∞ solves y (1 - 2 / (e^{2y} - 1)) = 1
        let h = |y: f64| y * (1.0 - 2.0 / (2.0 * y).exp_m1()) - 1.0;
        let (mut lo, mut hi) = (1.0, 3.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid) > 0.0 { hi = mid } else { lo = mid }
        }
        let p = CriticalLengthParams { n0: 1.5, gamma: 0.001, f: 0.2 };
        let lc = critical_length(&p).unwrap();
        assert!((lc / p.large_length_limit() - lo).abs() < 1e-4, "{} vs {lo}", lc / p.large_length_limit());
    }

    #[test]
    fn critical_length_failures() {
        let weak = CriticalLengthParams { f: 0.002, ..CriticalLengthParams::TDBC };
        assert!(matches!(critical_length(&weak), Err(Error::NoSolution(_))));
        let d = 1.5 * 0.034;
        let marginal = CriticalLengthParams { f: d * d * (1.0 + 1e-9), ..CriticalLengthParams::TDBC };
        assert!(matches!(critical_length(&marginal), Err(Error::NotBracketed { .. })));
    }

    #[test]
    fn nominal_rabi_values() {
        assert!((nominal_rabi(0.037, 1.5).unwrap() - 0.12824).abs() < 1e-5);
        assert_eq!(nominal_rabi(0.0, 1.5).unwrap(), 0.0);
        let base = nominal_rabi(0.01, 1.3).unwrap();
        assert!((nominal_rabi(0.04, 1.3).unwrap() - 2.0 * base).abs() < 1e-15);
    }

    fn random_model(topology: Topology) -> impl Strategy<Value = CoupledModel> {
        (prop::collection::vec(1.0f64..3.0, 1..8), 1.0f64..3.0, 0.0f64..0.3).prop_map(move |(mut modes, ex, g)| {
            modes.sort_by(f64::total_cmp);
            CoupledModel::new(modes, ex, g, topology)
        })
    }

    proptest! {
        #[test]
        fn hermitian_and_trace_conserving(m in random_model(Topology::Entangled), d in random_model(Topology::Decoupled)) {
            for model in [m, d] {
                let h = build_hamiltonian(&model);
                prop_assert_eq!(&h, &h.transpose());
                let sum: f64 = eigenvalues(&model).iter().sum();
                prop_assert!((sum - h.trace()).abs() < 1e-10);
            }
        }

        #[test]
        fn decoupled_equals_union_of_blocks(m in random_model(Topology::Decoupled)) {
            let mut blocks: Vec<f64> = m.mode_energies.iter().flat_map(|&e| {
                let (lo, hi) = block_eigenvalues(e, m.ex, m.g);
                [lo, hi]
            }).collect();
            blocks.sort_by(f64::total_cmp);
            for (a, b) in eigenvalues(&m).iter().zip(&blocks) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn entangled_interlacing(m in random_model(Topology::Entangled)) {
            let ev = eigenvalues(&m);
            let modes = &m.mode_energies;
            let tol = 1e-12;
            prop_assert!(ev[0] <= modes[0] + tol);
            for i in 0..modes.len() - 1 {
                prop_assert!(modes[i] - tol <= ev[i + 1] && ev[i + 1] <= modes[i + 1] + tol);
            }
            prop_assert!(ev[modes.len()] >= modes[modes.len() - 1] - tol);
        }

        #[test]
        fn mid_polariton_sits_between_modes(delta in 0.01f64..0.5, g in 1e-3f64..0.3) {
            let ex = 2.1;
            let m = CoupledModel::new(vec![ex - delta, ex + delta], ex, g, Topology::Entangled);
            let ev = eigenvalues(&m);
            let inside = ev.iter().filter(|&&e| e > ex - delta && e < ex + delta).count();
            prop_assert_eq!(inside, 1);
        }
    }
}
