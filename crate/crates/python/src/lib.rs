//! Python bindings for `polariton-core`.
//!
//! Energies are in eV, lengths in nm and in-plane momenta in μm⁻¹, as in the
//! Rust API. Maps are returned as nested lists indexed `[energy][kx]`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use polariton_core::cavity::{CavityParam, CavityParams};
use polariton_core::fitting::{self, FitOptions, FitProblem, FreeParam, Weights};
use polariton_core::polariton::{self as model, CriticalLengthParams};
use polariton_core::spectral::{self, BareMode, Provenance, DEFAULT_MIN_PROMINENCE};
use polariton_core::tmm::{self, ONE_MINUS_R};
use polariton_core::{CoupledModel, LayerStack, PlaneWaveContext, Polarization, Spectrum, Topology};

/// (center, depth, prominence, fwhm)
type DipTuple = (f64, f64, f64, Option<f64>);
/// (fitted (name, value) pairs, objective, converged)
type FitSummary = (Vec<(String, f64)>, f64, bool);

fn err(e: polariton_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn polarization(s: &str) -> PyResult<Polarization> {
    s.parse().map_err(err)
}

fn topology(s: &str) -> PyResult<Topology> {
    match s.to_ascii_lowercase().as_str() {
        "entangled" => Ok(Topology::Entangled),
        "decoupled" => Ok(Topology::Decoupled),
        _ => Err(PyValueError::new_err(format!("unknown topology `{s}`"))),
    }
}

/// Glass / silver / Lorentz film / silver / air cavity.
#[pyclass(name = "Cavity", from_py_object)]
#[derive(Clone)]
struct PyCavity {
    inner: CavityParams,
}

#[pymethods]
impl PyCavity {
    #[new]
    #[pyo3(signature = (length_nm = 628.0, **overrides))]
    fn new(length_nm: f64, overrides: Option<&Bound<'_, PyDict>>) -> PyResult<Self> {
        let mut inner = CavityParams::with_length(length_nm);
        if let Some(kw) = overrides {
            for (k, v) in kw.iter() {
                let name: String = k.extract()?;
                let p: CavityParam = name.parse().map_err(err)?;
                inner.set(p, v.extract()?);
            }
        }
        Ok(Self { inner })
    }

    /// Value of a named parameter ("L", "f", "gamma", "n0", "Ex", ...).
    fn get(&self, name: &str) -> PyResult<f64> {
        Ok(self.inner.get(name.parse().map_err(err)?))
    }

    fn set(&mut self, name: &str, value: f64) -> PyResult<()> {
        self.inner.set(name.parse().map_err(err)?, value);
        Ok(())
    }

    #[getter]
    fn length_nm(&self) -> f64 {
        self.inner.length_nm
    }

    /// JSON description of the layer stack.
    fn stack_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner.stack()).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        let c = &self.inner;
        format!(
            "Cavity(L={} nm, mirrors={} nm, f={} eV², γ={} eV, Ex={} eV)",
            c.length_nm, c.mirror_nm, c.film.f, c.film.gamma, c.film.ex
        )
    }
}

/// A layer stack built from its JSON description.
#[pyclass(name = "Stack", from_py_object)]
#[derive(Clone)]
struct PyStack {
    inner: LayerStack,
}

#[pymethods]
impl PyStack {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: LayerStack = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(err)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn from_cavity(cavity: &PyCavity) -> Self {
        Self {
            inner: cavity.inner.stack(),
        }
    }

    /// (R, T, A) for one plane wave.
    #[pyo3(signature = (energy, kx = 0.0, polarization = "TE"))]
    fn power(&self, energy: f64, kx: f64, polarization: &str) -> PyResult<(f64, f64, f64)> {
        let ctx = PlaneWaveContext::new(energy, kx, self::polarization(polarization)?).map_err(err)?;
        let p = tmm::power_coefficients(&self.inner, &ctx).map_err(err)?;
        Ok((p.reflectance, p.transmittance, p.absorptance))
    }

    #[pyo3(signature = (energies, kx = 0.0, polarization = "TE"))]
    fn reflectance(&self, energies: Vec<f64>, kx: f64, polarization: &str) -> PyResult<Vec<f64>> {
        tmm::reflectance_spectrum(&self.inner, &energies, kx, self::polarization(polarization)?).map_err(err)
    }

    /// `1 − R` map.
    #[pyo3(signature = (energies, momenta, polarization = "TE"))]
    fn dispersion_map(&self, energies: Vec<f64>, momenta: Vec<f64>, polarization: &str) -> PyResult<PyMap> {
        let inner = tmm::dispersion_map(&self.inner, &energies, &momenta, self::polarization(polarization)?).map_err(err)?;
        Ok(PyMap { inner })
    }
}

#[pyclass(name = "DispersionMap", from_py_object)]
#[derive(Clone)]
struct PyMap {
    inner: tmm::DispersionMap,
}

#[pymethods]
impl PyMap {
    #[new]
    #[pyo3(signature = (energies, momenta, values, quantity = ONE_MINUS_R))]
    fn new(energies: Vec<f64>, momenta: Vec<f64>, values: Vec<Vec<f64>>, quantity: &str) -> PyResult<Self> {
        let inner = tmm::DispersionMap::new(energies, momenta, values, quantity).map_err(err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn energies(&self) -> Vec<f64> {
        self.inner.energies.clone()
    }

    #[getter]
    fn momenta(&self) -> Vec<f64> {
        self.inner.momenta.clone()
    }

    #[getter]
    fn values(&self) -> Vec<Vec<f64>> {
        self.inner.values.clone()
    }

    #[getter]
    fn quantity(&self) -> String {
        self.inner.quantity_label.clone()
    }

    /// Grid points that could not be evaluated, as (energy, kx, reason).
    #[getter]
    fn defects(&self) -> Vec<(f64, f64, String)> {
        self.inner
            .defects
            .iter()
            .map(|d| (d.energy_ev, d.kx_um, d.reason.clone()))
            .collect()
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        self.inner.shape()
    }

    fn to_csv(&self) -> String {
        polariton_core::io::map_to_csv(&self.inner)
    }

    #[staticmethod]
    #[pyo3(signature = (text, quantity = ONE_MINUS_R))]
    fn from_csv(text: &str, quantity: &str) -> PyResult<Self> {
        Ok(Self {
            inner: polariton_core::io::map_from_csv(text, quantity).map_err(err)?,
        })
    }
}

#[pyfunction]
#[pyo3(signature = (n0 = 1.5, gamma = 0.034, f = 0.037))]
fn critical_length(n0: f64, gamma: f64, f: f64) -> PyResult<(f64, f64)> {
    let p = CriticalLengthParams { n0, gamma, f };
    let l = model::critical_length(&p).map_err(err)?;
    Ok((l, p.residual(l)))
}

#[pyfunction]
fn nominal_rabi(f: f64, n0: f64) -> PyResult<f64> {
    model::nominal_rabi(f, n0).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (mode_energies, ex, g, topology = "entangled"))]
fn eigenvalues(mode_energies: Vec<f64>, ex: f64, g: f64, topology: &str) -> PyResult<Vec<f64>> {
    let m = CoupledModel::new(mode_energies, ex, g, self::topology(topology)?);
    m.validate().map_err(err)?;
    Ok(model::eigenvalues(&m))
}

#[pyfunction]
#[pyo3(signature = (mode_energies, ex, g, topology = "entangled"))]
fn branch_labels(mode_energies: Vec<f64>, ex: f64, g: f64, topology: &str) -> PyResult<Vec<String>> {
    let m = CoupledModel::new(mode_energies, ex, g, self::topology(topology)?);
    m.validate().map_err(err)?;
    Ok(model::branch_labels(&m))
}

/// Dips of a reflectance spectrum as (center, depth, prominence, fwhm).
#[pyfunction]
#[pyo3(signature = (energies, reflectance, min_prominence = DEFAULT_MIN_PROMINENCE, window = None))]
fn find_dips(
    energies: Vec<f64>,
    reflectance: Vec<f64>,
    min_prominence: f64,
    window: Option<(f64, f64)>,
) -> PyResult<Vec<DipTuple>> {
    let window = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    let s = Spectrum::new(energies, reflectance, Provenance::Ingested).map_err(err)?;
    let dips = spectral::find_dips(&s, min_prominence, window).map_err(err)?;
    Ok(dips.dips.iter().map(|d| (d.center, d.depth, d.prominence, d.fwhm)).collect())
}

/// (regime, gap in eV or None) for a normal-incidence reflectance spectrum.
#[pyfunction]
#[pyo3(signature = (energies, reflectance, ex = 2.1, window = 0.15, min_prominence = DEFAULT_MIN_PROMINENCE))]
fn classify_regime(
    energies: Vec<f64>,
    reflectance: Vec<f64>,
    ex: f64,
    window: f64,
    min_prominence: f64,
) -> PyResult<(String, Option<f64>)> {
    let s = Spectrum::new(energies, reflectance, Provenance::Ingested).map_err(err)?;
    let l = spectral::classify_regime(&s, ex, window, min_prominence);
    Ok((l.regime.to_string(), l.gap_ev))
}

/// Rabi splitting of `cavity` at the crossing of cavity mode `order` with the
/// exciton: (splitting eV, kx μm⁻¹).
#[pyfunction]
#[pyo3(signature = (cavity, energies, momenta, order = 3, polarization = "TE"))]
fn rabi_splitting(
    cavity: &PyCavity,
    energies: Vec<f64>,
    momenta: Vec<f64>,
    order: u32,
    polarization: &str,
) -> PyResult<(f64, f64)> {
    let pol = self::polarization(polarization)?;
    let c = &cavity.inner;
    let map = tmm::dispersion_map(&c.stack(), &energies, &momenta, pol).map_err(err)?;
    let bare = BareMode::empty_cavity(c, order, &energies, &momenta, pol).map_err(err)?;
    let s = spectral::measure_splitting(&map, |k| bare.at(k), c.film.ex, DEFAULT_MIN_PROMINENCE).map_err(err)?;
    Ok((s.rabi_ev, s.kx_um))
}

/// Fits the free cavity parameters to a `1 − R` (or `R`) target map.
///
/// `free` maps parameter names to (initial, lo, hi). Returns the fitted
/// values, the final objective and whether the simplex converged.
#[pyfunction]
#[pyo3(signature = (target, cavity, free, polarization = "TE", restarts = 0, seed = 0, max_iterations = 500))]
fn fit(
    target: &PyMap,
    cavity: &PyCavity,
    free: Vec<(String, f64, f64, f64)>,
    polarization: &str,
    restarts: usize,
    seed: u64,
    max_iterations: usize,
) -> PyResult<FitSummary> {
    let free = free
        .into_iter()
        .map(|(name, initial, lo, hi)| Ok(FreeParam::new(name.parse().map_err(err)?, initial, lo, hi)))
        .collect::<PyResult<Vec<_>>>()?;
    let mut base = cavity.inner;
    for p in &free {
        base.set(p.name, p.initial);
    }
    let problem = FitProblem {
        target: target.inner.clone(),
        polarization: self::polarization(polarization)?,
        base,
        free,
        weights: Weights::Uniform,
        options: FitOptions {
            restarts,
            seed,
            max_iterations,
            ..FitOptions::default()
        },
    };
    let r = fitting::fit(&problem).map_err(err)?;
    let named = r
        .fitted
        .iter()
        .map(|v| (v.name.to_string(), v.value))
        .collect();
    Ok((named, r.objective, r.converged))
}

#[pymodule]
fn polariton(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyCavity>()?;
    m.add_class::<PyStack>()?;
    m.add_class::<PyMap>()?;
    m.add_function(wrap_pyfunction!(critical_length, m)?)?;
    m.add_function(wrap_pyfunction!(nominal_rabi, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(branch_labels, m)?)?;
    m.add_function(wrap_pyfunction!(find_dips, m)?)?;
    m.add_function(wrap_pyfunction!(classify_regime, m)?)?;
    m.add_function(wrap_pyfunction!(rabi_splitting, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    Ok(())
}
