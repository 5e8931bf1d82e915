//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polariton_core::cavity::{CavityParam, CavityParams};
use polariton_core::fitting::{fit, FitOptions, FitProblem, FreeParam, Weights};
use polariton_core::materials::{DielectricModel, DrudeParams, LorentzParams, PhotonEnergy};
use polariton_core::polariton::{
    critical_length, eigenvalues, nominal_rabi, symmetric_eigenvalues, build_hamiltonian, CoupledModel,
    CriticalLengthParams, Topology,
};
use polariton_core::spectral::{
    classify_regime, measure_splitting, thickness_sweep, BareMode, Regime, Spectrum, SweepOptions,
    DEFAULT_MIN_PROMINENCE,
};
use polariton_core::tmm::{
    dispersion_map, power_coefficients, stack_amplitudes, Layer, LayerStack, PlaneWaveContext, Polarization,
};
use polariton_core::units::{free_space_wavenumber, PER_UM_TO_PER_NM};

type Check = fn() -> (bool, String);
type Criterion = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn critical_length_criterion() -> Outcome {
    let p = CriticalLengthParams { n0: 1.5, gamma: 0.034, f: 0.037 };
    let mut best = Duration::MAX;
    let mut lc = f64::NAN;
    for _ in 0..20 {
        let t = Instant::now();
        lc = match critical_length(&p) {
            Ok(v) => v,
            Err(e) => return outcome(false, format!("error: {e}")),
        };
        best = best.min(t.elapsed());
    }
    let residual = p.residual(lc);
    outcome(
        (lc - 700.0).abs() <= 10.0 && residual < 1e-6 && best < Duration::from_millis(1),
        format!("L_c = {lc:.3} nm, residual = {residual:.2e} nm, runtime = {best:?}"),
    )
}

fn rabi_criterion() -> Outcome {
    match nominal_rabi(0.037, 1.5) {
        Ok(r) => {
            let mev = r * 1e3;
            outcome((mev - 128.2).abs() <= 0.1, format!("ħΩ = {mev:.3} meV"))
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn anticrossing_criterion() -> Outcome {
    let cavity = CavityParams::with_length(628.0);
    let stack = cavity.stack();
    let energies = linspace(1.6, 2.6, 500);
    let momenta = linspace(0.0, 12.0, 500);
    let t = Instant::now();
    let map = match dispersion_map(&stack, &energies, &momenta, Polarization::TE) {
        Ok(m) => m,
        Err(e) => return outcome(false, format!("map error: {e}")),
    };
    let elapsed = t.elapsed();
    let bare = match BareMode::empty_cavity(&cavity, 3, &energies, &momenta, Polarization::TE) {
        Ok(b) => b,
        Err(e) => return outcome(false, format!("bare mode error: {e}")),
    };
    match measure_splitting(&map, |k| bare.at(k), cavity.film.ex, DEFAULT_MIN_PROMINENCE) {
        Ok(s) => {
            let mev = s.rabi_ev * 1e3;
            outcome(
                (mev - 128.0).abs() <= 15.0
                    && (s.kx_um - 7.7).abs() <= 1.5
                    && elapsed < Duration::from_secs(10)
                    && map.defects.is_empty(),
                format!(
                    "splitting = {mev:.1} meV at kx = {:.2} μm⁻¹, 500×500 map in {elapsed:.2?}, {} defects",
                    s.kx_um,
                    map.defects.len()
                ),
            )
        }
        Err(e) => outcome(false, format!("error: {e}")),
    }
}

fn regime_criterion() -> Outcome {
    let base = CavityParams::default();
    let energies = linspace(1.6, 2.6, 1001);
    let opts = SweepOptions::default();
    let lengths: Vec<f64> = (0..=120).map(|i| 400.0 + 10.0 * i as f64).collect();
    let rows = thickness_sweep(&base, &lengths, &energies, &opts);
    let labels: Vec<Option<Regime>> = rows
        .iter()
        .map(|r| r.outcome.as_ref().ok().map(|(l, _)| l.regime))
        .collect();
    let flips: Vec<f64> = labels
        .windows(2)
        .zip(&lengths[1..])
        .filter(|(w, _)| w[0] != w[1])
        .map(|(_, &l)| l)
        .collect();
    let first_decoupled = labels.iter().position(|l| *l == Some(Regime::Decoupled));
    let single_flip = match first_decoupled {
        Some(i) => {
            labels[..i].iter().all(|l| *l == Some(Regime::Coupled))
                && labels[i..].iter().all(|l| *l == Some(Regime::Decoupled))
                && (600.0..=800.0).contains(&lengths[i])
        }
        None => false,
    };
    let count = |r: Regime| labels.iter().filter(|l| **l == Some(r)).count();

    let cavity = CavityParams::with_length(1615.0);
    let gap = Spectrum::reflectance(&cavity.stack(), &energies, 0.0, Polarization::TE)
        .map(|s| classify_regime(&s, opts.ex, opts.window, opts.min_prominence));
    let (gap_ok, gap_detail) = match &gap {
        Ok(l) => {
            let mev = l.gap_ev.map(|g| g * 1e3);
            (
                l.regime == Regime::Decoupled && mev.is_some_and(|g| (20.0..=80.0).contains(&g)),
                format!("L = 1615 nm: {} gap {:?} meV", l.regime, mev.map(|g| (g * 10.0).round() / 10.0)),
            )
        }
        Err(e) => (false, format!("L = 1615 nm error: {e}")),
    };
    let shown: Vec<String> = flips.iter().take(8).map(|l| format!("{l}")).collect();
    outcome(
        single_flip && gap_ok,
        format!(
            "sweep: {} Coupled / {} Decoupled / {} Indeterminate, {} label changes (first at {} nm), single flip in [600, 800]: {single_flip}; {gap_detail}",
            count(Regime::Coupled),
            count(Regime::Decoupled),
            count(Regime::Indeterminate),
            flips.len(),
            shown.join(", ")
        ),
    )
}

// Independent power oracle: forward/backward amplitudes layer by layer, with
// absorption integrated from the local fields instead of taken as 1 − R − T.

struct OracleResult {
    reflectance: f64,
    transmittance: f64,
    absorptance: f64,
}

fn kz(eps: Complex64, k0: f64, kx: f64) -> Complex64 {
    let k = (eps * k0 * k0 - kx * kx).sqrt();
    if k.im < 0.0 || (k.im == 0.0 && k.re < 0.0) {
        -k
    } else {
        k
    }
}

/// ∫₀ᵈ e^{s z} dz for complex s.
fn exp_integral(s: Complex64, d: f64) -> Complex64 {
    if (s * d).norm() < 1e-8 {
        Complex64::new(d, 0.0) * (1.0 + s * d / 2.0)
    } else {
        ((s * d).exp() - 1.0) / s
    }
}

fn oracle(eps: &[Complex64], d: &[f64], energy: f64, kx_um: f64, pol: Polarization) -> OracleResult {
    let k0 = free_space_wavenumber(energy);
    let kx = kx_um * PER_UM_TO_PER_NM;
    let n = eps.len();
    let kzs: Vec<Complex64> = eps.iter().map(|&e| kz(e, k0, kx)).collect();
    let q: Vec<Complex64> = match pol {
        Polarization::TE => kzs.clone(),
        Polarization::TM => kzs.iter().zip(eps).map(|(k, e)| k / e).collect(),
    };
    // thickness per medium; half-spaces have none
    let thick = |j: usize| if j == 0 || j == n - 1 { 0.0 } else { d[j - 1] };
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    let mut b = vec![Complex64::new(0.0, 0.0); n];
    a[n - 1] = Complex64::new(1.0, 0.0);
    for j in (0..n - 1).rev() {
        let (fa, fb) = (a[j + 1], b[j + 1]);
        let ratio = q[j + 1] / q[j];
        let p = (Complex64::i() * kzs[j] * thick(j)).exp();
        a[j] = 0.5 * ((fa + fb) + ratio * (fa - fb)) / p;
        b[j] = 0.5 * ((fa + fb) - ratio * (fa - fb)) * p;
    }
    let norm = a[0];
    for j in 0..n {
        a[j] /= norm;
        b[j] /= norm;
    }
    let reflectance = b[0].norm_sqr();
    let transmittance = a[n - 1].norm_sqr() * q[n - 1].re / q[0].re;
    let mut absorptance = 0.0;
    for j in 1..n - 1 {
        let (e, k, dj) = (eps[j], kzs[j], thick(j));
        if e.im == 0.0 {
            continue;
        }
        let uu = a[j].norm_sqr() * exp_integral(Complex64::new(-2.0 * k.im, 0.0), dj).re;
        let vv = b[j].norm_sqr() * exp_integral(Complex64::new(2.0 * k.im, 0.0), dj).re;
        let uv = (a[j] * b[j].conj() * exp_integral(Complex64::new(0.0, 2.0 * k.re), dj)).re;
        let plus = uu + vv + 2.0 * uv;
        let minus = uu + vv - 2.0 * uv;
        absorptance += match pol {
            Polarization::TE => k0 * k0 * e.im * plus / q[0].re,
            Polarization::TM => e.im / e.norm_sqr() * (k.norm_sqr() * minus + kx * kx * plus) / q[0].re,
        };
    }
    OracleResult {
        reflectance,
        transmittance,
        absorptance,
    }
}

fn random_material(rng: &mut ChaCha8Rng) -> (DielectricModel, f64) {
    match rng.random_range(0..3) {
        0 => (DielectricModel::constant(rng.random_range(1.0..3.0)), rng.random_range(5.0..400.0)),
        1 => (
            DielectricModel::Lorentz(LorentzParams {
                n0: rng.random_range(1.0..2.0),
                f: rng.random_range(0.0..0.1),
                ex: rng.random_range(1.8..2.4),
                gamma: rng.random_range(0.01..0.1),
            }),
            rng.random_range(5.0..400.0),
        ),
        _ => (
            DielectricModel::Drude(DrudeParams {
                eps_inf: rng.random_range(1.0..6.0),
                ep: rng.random_range(5.0..10.0),
                damping: rng.random_range(0.01..0.2),
            }),
            rng.random_range(1.0..60.0),
        ),
    }
}

fn random_stack(rng: &mut ChaCha8Rng, absorbing: bool) -> LayerStack {
    let count = rng.random_range(1..=4);
    let mut layers: Vec<Layer> = (0..count)
        .map(|_| {
            let (m, d) = random_material(rng);
            Layer::new(d, m)
        })
        .collect();
    if absorbing && layers.iter().all(|l| l.material.is_lossless()) {
        layers.push(Layer::new(30.0, DielectricModel::silver()));
    }
    LayerStack::new(
        DielectricModel::constant(rng.random_range(1.0..2.0)),
        layers,
        DielectricModel::constant(rng.random_range(1.0..2.0)),
    )
}

fn random_context(rng: &mut ChaCha8Rng, limit_n: f64) -> PlaneWaveContext {
    let e = rng.random_range(1.5..3.0);
    let kmax = 0.999 * limit_n * free_space_wavenumber(e) / PER_UM_TO_PER_NM;
    let pol = if rng.random_bool(0.5) { Polarization::TE } else { Polarization::TM };
    PlaneWaveContext::new(e, rng.random_range(0.0..kmax), pol).unwrap()
}

fn layer_eps(stack: &LayerStack, e: PhotonEnergy) -> (Vec<Complex64>, Vec<f64>) {
    let mut eps = vec![stack.incidence.permittivity(e).unwrap()];
    eps.extend(stack.layers.iter().map(|l| l.material.permittivity(e).unwrap()));
    eps.push(stack.exit.permittivity(e).unwrap());
    (eps, stack.layers.iter().map(|l| l.thickness_nm).collect())
}

fn constant_n(m: &DielectricModel) -> f64 {
    match m {
        DielectricModel::Constant { n } => *n,
        _ => unreachable!("random stacks use constant half-spaces"),
    }
}

fn conservation_property() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst: f64 = 0.0;
    let mut worst_match: f64 = 0.0;
    for _ in 0..1000 {
        let stack = random_stack(&mut rng, false);
        let ctx = random_context(&mut rng, constant_n(&stack.incidence));
        let p = power_coefficients(&stack, &ctx).unwrap();
        let (eps, d) = layer_eps(&stack, ctx.energy);
        let o = oracle(&eps, &d, ctx.energy.ev(), ctx.kx_um, ctx.polarization);
        worst = worst.max((p.reflectance + p.transmittance + o.absorptance - 1.0).abs());
        worst_match = worst_match
            .max((p.reflectance - o.reflectance).abs())
            .max((p.transmittance - o.transmittance).abs());
    }
    (
        worst < 1e-10 && worst_match < 1e-10,
        format!("R+T+A−1 ≤ {worst:.1e}, |ΔR|,|ΔT| vs oracle ≤ {worst_match:.1e}"),
    )
}

fn reciprocity_property() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let stack = random_stack(&mut rng, true);
        let limit = constant_n(&stack.incidence).min(constant_n(&stack.exit));
        let ctx = random_context(&mut rng, limit);
        let fwd = power_coefficients(&stack, &ctx).unwrap();
        let back = power_coefficients(&stack.reversed(), &ctx).unwrap();
        worst = worst.max((fwd.transmittance - back.transmittance).abs());
    }
    (worst < 1e-10, format!("|T→ − T←| ≤ {worst:.1e}"))
}

fn subdivision_property() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut worst: f64 = 0.0;
    for _ in 0..500 {
        let stack = random_stack(&mut rng, true);
        let ctx = random_context(&mut rng, constant_n(&stack.incidence));
        let split: Vec<Layer> = stack
            .layers
            .iter()
            .flat_map(|l| {
                let w = rng.random_range(0.1..0.9);
                [
                    Layer::new(w * l.thickness_nm, l.material.clone()),
                    Layer::new((1.0 - w) * l.thickness_nm, l.material.clone()),
                ]
            })
            .collect();
        let fine = LayerStack::new(stack.incidence.clone(), split, stack.exit.clone());
        let a = stack_amplitudes(&stack, &ctx).unwrap();
        let b = stack_amplitudes(&fine, &ctx).unwrap();
        worst = worst.max((a.r - b.r).norm()).max((a.t - b.t).norm());
    }
    (worst < 1e-12, format!("|Δr|,|Δt| ≤ {worst:.1e}"))
}

fn random_model(rng: &mut ChaCha8Rng, topology: Topology) -> CoupledModel {
    let n = rng.random_range(1..=6);
    let mut modes: Vec<f64> = (0..n).map(|_| rng.random_range(1.0..3.5)).collect();
    modes.sort_by(f64::total_cmp);
    CoupledModel::new(modes, rng.random_range(1.5..2.5), rng.random_range(0.0..0.3), topology)
}

fn trace_property() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let mut worst: f64 = 0.0;
    for i in 0..1000 {
        let topology = if i % 2 == 0 { Topology::Entangled } else { Topology::Decoupled };
        let m = random_model(&mut rng, topology);
        let h = build_hamiltonian(&m);
        let trace = h.trace();
        let sum: f64 = symmetric_eigenvalues(h).iter().sum();
        worst = worst.max((trace - sum).abs());
    }
    (worst < 1e-10, format!("|tr H − Σλ| ≤ {worst:.1e}"))
}

fn decoupled_property() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let m = random_model(&mut rng, Topology::Decoupled);
        let mut expect: Vec<f64> = m
            .mode_energies
            .iter()
            .flat_map(|&e| {
                let mean = 0.5 * (e + m.ex);
                let half = (0.25 * (e - m.ex).powi(2) + m.g * m.g).sqrt();
                [mean - half, mean + half]
            })
            .collect();
        expect.sort_by(f64::total_cmp);
        let got = eigenvalues(&m);
        for (g, e) in got.iter().zip(&expect) {
            worst = worst.max((g - e).abs());
        }
    }
    (worst < 1e-12, format!("max |λ − λ_block| = {worst:.1e}"))
}

fn two_level_property() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let ex = rng.random_range(1.5..2.5);
        let g = rng.random_range(0.001..0.3);
        let ev = eigenvalues(&CoupledModel::new(vec![ex], ex, g, Topology::Entangled));
        worst = worst.max(((ev[1] - ev[0]) - 2.0 * g).abs() / g);
    }
    (worst < 1e-12, format!("max |Δλ − 2g|/g = {worst:.1e}"))
}

fn fit_property() -> (bool, String) {
    let truth = CavityParams::default();
    let energies = linspace(1.7, 2.5, 81);
    let momenta = linspace(0.0, 10.0, 21);
    let target = dispersion_map(&truth.stack(), &energies, &momenta, Polarization::TE).unwrap();
    let mut details = Vec::new();
    let mut pass = true;
    for (sl, sf) in [(1.2, 0.8), (0.8, 1.2), (1.2, 1.2), (0.8, 0.8)] {
        let l0 = truth.length_nm * sl;
        let f0 = truth.film.f * sf;
        let problem = FitProblem {
            target: target.clone(),
            polarization: Polarization::TE,
            base: CavityParams {
                length_nm: l0,
                film: LorentzParams { f: f0, ..truth.film },
                ..truth
            },
            free: vec![
                FreeParam::new(CavityParam::L, l0, 0.75 * truth.length_nm, 1.25 * truth.length_nm),
                FreeParam::new(CavityParam::F, f0, 0.75 * truth.film.f, 1.25 * truth.film.f),
            ],
            weights: Weights::Uniform,
            options: FitOptions {
                restarts: 8,
                seed: 1,
                ..FitOptions::default()
            },
        };
        match fit(&problem) {
            Ok(r) => {
                let el = (r.params.length_nm / truth.length_nm - 1.0).abs();
                let ef = (r.params.film.f / truth.film.f - 1.0).abs();
                pass &= el <= 0.01 && ef <= 0.05;
                details.push(format!("({sl},{sf}): ΔL {:.2}%, Δf {:.2}%", el * 100.0, ef * 100.0));
            }
            Err(e) => {
                pass = false;
                details.push(format!("({sl},{sf}): {e}"));
            }
        }
    }
    (pass, details.join("; "))
}

fn property_criterion() -> Outcome {
    let checks: [(&str, Check); 7] = [
        ("energy conservation", conservation_property),
        ("reciprocity", reciprocity_property),
        ("subdivision", subdivision_property),
        ("trace", trace_property),
        ("decoupled blocks", decoupled_property),
        ("two-level 2g", two_level_property),
        ("fit recovery", fit_property),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, check) in checks {
        let (ok, detail) = check();
        pass &= ok;
        parts.push(format!("{name} {} [{detail}]", if ok { "ok" } else { "FAILED" }));
    }
    outcome(pass, parts.join("; "))
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 5] = [
        ("critical length", critical_length_criterion),
        ("Rabi consistency", rabi_criterion),
        ("anti-crossing reproduction", anticrossing_criterion),
        ("regime transition", regime_criterion),
        ("property suites", property_criterion),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        let o = run();
        if !o.pass {
            failures += 1;
        }
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
