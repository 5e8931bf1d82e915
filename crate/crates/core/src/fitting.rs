//! Cavity parameter recovery from a target dispersion map.
//!
//! The objective is the weighted sum of squared differences between a
//! simulated `1 − R` map and the target on the target's own grid. It is
//! minimised with a Nelder–Mead simplex in bound-normalised coordinates; every
//! candidate is clipped into its box before it is simulated.

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cavity::{CavityParam, CavityParams};
use crate::error::{Error, Result};
use crate::tmm::{dispersion_map, DispersionMap, Polarization, ONE_MINUS_R, REFLECTANCE};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FreeParam {
    pub name: CavityParam,
    pub initial: f64,
    pub lo: f64,
    pub hi: f64,
}

impl FreeParam {
    pub fn new(name: CavityParam, initial: f64, lo: f64, hi: f64) -> Self {
        Self { name, initial, lo, hi }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Weights {
    #[default]
    Uniform,
    /// Points within `half_width` eV of the film resonance weigh `factor`.
    ExcitonEmphasis { half_width: f64, factor: f64 },
    /// Explicit per-point weights, same shape as the target.
    Matrix { values: Vec<Vec<f64>> },
}

impl Weights {
    pub fn exciton_emphasis() -> Self {
        Weights::ExcitonEmphasis {
            half_width: 0.3,
            factor: 3.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Relative spread of simplex values at convergence.
    pub rel_tol: f64,
    /// Additional Latin-hypercube starts; 0 runs only from the initial point.
    pub restarts: usize,
    pub seed: u64,
    /// Initial simplex edge as a fraction of each bound interval.
    pub initial_step: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            rel_tol: 1e-10,
            restarts: 0,
            seed: 0,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitProblem {
    pub target: DispersionMap,
    pub polarization: Polarization,
    /// Values of every parameter; free ones are overwritten during the fit.
    pub base: CavityParams,
    pub free: Vec<FreeParam>,
    pub weights: Weights,
    pub options: FitOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedValue {
    pub name: CavityParam,
    pub value: f64,
    pub initial: f64,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub fitted: Vec<FittedValue>,
    pub params: CavityParams,
    pub objective: f64,
    pub initial_objective: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

impl FitResult {
    pub fn value(&self, name: CavityParam) -> Option<f64> {
        self.fitted.iter().find(|f| f.name == name).map(|f| f.value)
    }
}

impl FitProblem {
    pub fn validate(&self) -> Result<()> {
        for p in &self.free {
            if !(p.lo < p.hi && p.lo.is_finite() && p.hi.is_finite()) {
                return Err(Error::InvalidParameter(format!("{}: empty bound interval [{}, {}]", p.name, p.lo, p.hi)));
            }
            if !(p.lo..=p.hi).contains(&p.initial) {
                return Err(Error::InvalidParameter(format!(
                    "{}: initial value {} outside [{}, {}]",
                    p.name, p.initial, p.lo, p.hi
                )));
            }
        }
        for (i, a) in self.free.iter().enumerate() {
            if self.free[..i].iter().any(|b| b.name == a.name) {
                return Err(Error::InvalidParameter(format!("{} listed twice", a.name)));
            }
        }
        if ![ONE_MINUS_R, REFLECTANCE].contains(&self.target.quantity_label.as_str()) {
            return Err(Error::InvalidParameter(format!(
                "target quantity must be `{ONE_MINUS_R}` or `{REFLECTANCE}`, got `{}`",
                self.target.quantity_label
            )));
        }
        if let Weights::Matrix { values } = &self.weights {
            let (ne, nk) = self.target.shape();
            if values.len() != ne || values.iter().any(|r| r.len() != nk) {
                return Err(Error::InvalidParameter(format!("weight matrix must be {ne}×{nk}")));
            }
        }
        Ok(())
    }

    fn params_at(&self, x: &[f64]) -> CavityParams {
        let mut p = self.base;
        for (fp, &v) in self.free.iter().zip(x) {
            p.set(fp.name, v);
        }
        p
    }

    fn weight(&self, params: &CavityParams, i: usize, j: usize) -> f64 {
        match &self.weights {
            Weights::Uniform => 1.0,
            Weights::ExcitonEmphasis { half_width, factor } => {
                if (self.target.energies[i] - params.film.ex).abs() <= *half_width {
                    *factor
                } else {
                    1.0
                }
            }
            Weights::Matrix { values } => values[i][j],
        }
    }
}

/// Weighted SSE between the simulated map of `params` and the target.
pub fn objective(params: &CavityParams, problem: &FitProblem) -> Result<f64> {
    let stack = params.stack();
    let t = &problem.target;
    let model = dispersion_map(&stack, &t.energies, &t.momenta, problem.polarization)?;
    if let Some(d) = model.defects.first() {
        return Err(Error::Simulation {
            energy: d.energy_ev,
            kx_um: d.kx_um,
            reason: d.reason.clone(),
        });
    }
    let as_reflectance = t.quantity_label == REFLECTANCE;
    let mut sse = 0.0;
    for (i, (mrow, trow)) in model.values.iter().zip(&t.values).enumerate() {
        for (j, (&m, v)) in mrow.iter().zip(trow).enumerate() {
            let m = if as_reflectance { 1.0 - m } else { m };
            let w = problem.weight(params, i, j);
            if w != 0.0 {
                sse += w * (m - v) * (m - v);
            }
        }
    }
    Ok(sse)
}

struct Simplex<'a> {
    problem: &'a FitProblem,
    evaluations: usize,
}

impl Simplex<'_> {
    fn to_physical(&self, u: &[f64]) -> Vec<f64> {
        self.problem
            .free
            .iter()
            .zip(u)
            .map(|(p, &ui)| p.lo + ui.clamp(0.0, 1.0) * (p.hi - p.lo))
            .collect()
    }

    fn eval(&mut self, u: &[f64]) -> f64 {
        self.evaluations += 1;
        let x = self.to_physical(u);
        // failed simulations rank as worst
        objective(&self.problem.params_at(&x), self.problem).unwrap_or(f64::INFINITY)
    }

    /// One simplex run from normalised start `u0`.
    fn run(&mut self, u0: Vec<f64>, f0: f64) -> (Vec<f64>, f64, usize, bool) {
        let opts = &self.problem.options;
        let n = u0.len();
        let clip = |v: Vec<f64>| v.into_iter().map(|x| x.clamp(0.0, 1.0)).collect::<Vec<f64>>();

        let mut pts: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        pts.push((u0.clone(), f0));
        for i in 0..n {
            let mut u = u0.clone();
            u[i] = if u[i] + opts.initial_step <= 1.0 {
                u[i] + opts.initial_step
            } else {
                u[i] - opts.initial_step
            };
            let f = self.eval(&u);
            pts.push((u, f));
        }

        let mut iterations = 0;
        let mut converged = false;
        while iterations < opts.max_iterations {
            pts.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (best, worst) = (pts[0].1, pts[n].1);
            let collapsed = pts[1..]
                .iter()
                .all(|(u, _)| u.iter().zip(&pts[0].0).all(|(a, b)| (a - b).abs() < 1e-13));
            if (worst - best).abs() <= opts.rel_tol * best.abs() + 1e-30 || collapsed {
                converged = true;
                break;
            }
            iterations += 1;

            let centroid: Vec<f64> = (0..n).map(|k| pts[..n].iter().map(|p| p.0[k]).sum::<f64>() / n as f64).collect();
            let along = |t: f64| -> Vec<f64> {
                clip(centroid.iter().zip(&pts[n].0).map(|(c, w)| c + t * (c - w)).collect())
            };

            let ur = along(1.0);
            let fr = self.eval(&ur);
            if fr < pts[0].1 {
                let ue = along(2.0);
                let fe = self.eval(&ue);
                pts[n] = if fe < fr { (ue, fe) } else { (ur, fr) };
            } else if fr < pts[n - 1].1 {
                pts[n] = (ur, fr);
            } else {
                let (uc, fc) = if fr < pts[n].1 {
                    let u = along(0.5);
                    let f = self.eval(&u);
                    (u, f)
                } else {
                    let u = along(-0.5);
                    let f = self.eval(&u);
                    (u, f)
                };
                if fc < fr.min(pts[n].1) {
                    pts[n] = (uc, fc);
                } else {
                    let best_u = pts[0].0.clone();
                    for p in pts.iter_mut().skip(1) {
                        p.0 = clip(best_u.iter().zip(&p.0).map(|(b, x)| b + 0.5 * (x - b)).collect());
                        p.1 = self.eval(&p.0);
                    }
                }
            }
        }
        pts.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (u, f) = pts.swap_remove(0);
        (u, f, iterations, converged)
    }
}

/// Latin-hypercube points in the unit cube.
fn latin_hypercube(n_points: usize, dim: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pts = vec![vec![0.0; dim]; n_points];
    for d in 0..dim {
        let mut strata: Vec<usize> = (0..n_points).collect();
        strata.shuffle(&mut rng);
        for (p, s) in pts.iter_mut().zip(strata) {
            p[d] = (s as f64 + rng.random::<f64>()) / n_points as f64;
        }
    }
    pts
}

pub fn fit(problem: &FitProblem) -> Result<FitResult> {
    problem.validate()?;
    let initial: Vec<f64> = problem.free.iter().map(|p| p.initial).collect();
    let start_params = problem.params_at(&initial);
    let f0 = objective(&start_params, problem)?;
    if !f0.is_finite() {
        return Err(Error::InvalidParameter(format!("objective at the initial point is {f0}")));
    }

    let finish = |x: Vec<f64>, f: f64, iterations, evaluations, converged| {
        let fitted = problem
            .free
            .iter()
            .zip(&x)
            .map(|(p, &value)| FittedValue {
                name: p.name,
                value,
                initial: p.initial,
                lo: p.lo,
                hi: p.hi,
            })
            .collect();
        FitResult {
            fitted,
            params: problem.params_at(&x),
            objective: f,
            initial_objective: f0,
            iterations,
            evaluations,
            converged,
        }
    };
    if problem.free.is_empty() {
        return Ok(finish(initial, f0, 0, 1, true));
    }

    let u0: Vec<f64> = problem
        .free
        .iter()
        .map(|p| (p.initial - p.lo) / (p.hi - p.lo))
        .collect();
    let mut starts = vec![(u0, Some(f0))];
    starts.extend(
        latin_hypercube(problem.options.restarts, problem.free.len(), problem.options.seed)
            .into_iter()
            .map(|u| (u, None)),
    );

    let runs: Vec<(Vec<f64>, f64, usize, bool, usize)> = starts
        .into_par_iter()
        .map(|(u, f)| {
            let mut s = Simplex { problem, evaluations: 0 };
            let f = f.unwrap_or_else(|| s.eval(&u));
            let (u, f, it, conv) = s.run(u, f);
            let x = s.to_physical(&u);
            (x, f, it, conv, s.evaluations)
        })
        .collect();

    let evaluations = 1 + runs.iter().map(|r| r.4).sum::<usize>();
    let iterations = runs.iter().map(|r| r.2).sum::<usize>();
    // first run wins ties, keeping the result independent of scheduling
    let best = runs
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("at least one start");
    let (x, f, _, converged, _) = best;
    if f > f0 {
        return Ok(finish(initial, f0, iterations, evaluations, converged));
    }
    Ok(finish(x, f, iterations, evaluations, converged))
}
