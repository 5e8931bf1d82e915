use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("energy {energy} eV outside tabulated range [{min}, {max}] eV")]
    OutOfRange { energy: f64, min: f64, max: f64 },

    #[error("evanescent incidence: kx = {kx_um} μm⁻¹ exceeds the light line {limit_um} μm⁻¹ at E = {energy} eV")]
    EvanescentIncidence {
        energy: f64,
        kx_um: f64,
        limit_um: f64,
    },

    #[error("absorbing incidence medium at E = {energy} eV: power coefficients are undefined")]
    AbsorbingIncidence { energy: f64 },

    #[error("non-finite result at E = {energy} eV, kx = {kx_um} μm⁻¹")]
    NonFinite { energy: f64, kx_um: f64 },

    #[error("simulation failed at E = {energy} eV, kx = {kx_um} μm⁻¹: {reason}")]
    Simulation {
        energy: f64,
        kx_um: f64,
        reason: String,
    },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("root not bracketed on [{lo}, {hi}]: g(lo) = {g_lo:e}, g(hi) = {g_hi:e}")]
    NotBracketed {
        lo: f64,
        hi: f64,
        g_lo: f64,
        g_hi: f64,
    },

    #[error("root finder did not converge after {iterations} iterations (last bracket [{lo}, {hi}])")]
    NoConvergence { iterations: usize, lo: f64, hi: f64 },

    #[error("analysis window [{lo}, {hi}] eV contains no grid points")]
    EmptyWindow { lo: f64, hi: f64 },

    #[error("no anti-crossing: {0}")]
    NoAntiCrossing(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
