//! Strong light-matter coupling in multimode planar microcavities.
//!
//! The crate is organised bottom-up:
//!
//! * [`materials`] — dielectric functions (constant, Lorentz, Drude, tabulated)
//! * [`tmm`] — transfer/scattering-matrix reflectance of planar stacks and
//!   dispersion maps over photon energy and in-plane momentum
//! * [`polariton`] — analytic mode ladder, coupled/decoupled multimode
//!   Hamiltonians, eigen-branches, critical cavity length
//! * [`spectral`] — dip extraction, branch tracing, Rabi splitting and regime
//!   classification
//! * [`fitting`] — bounded simplex recovery of cavity parameters from a map
//! * [`cavity`] — the metal / Lorentz film / metal cavity template shared by
//!   fitting, sweeps and the CLI
//!
//! All energies are in eV, lengths in nm and in-plane momenta in μm⁻¹ at the
//! API boundary.

pub mod cavity;
pub mod error;
pub mod fitting;
pub mod io;
pub mod materials;
pub mod polariton;
pub mod roots;
pub mod spectral;
pub mod tmm;
pub mod units;

pub use cavity::CavityParams;
pub use error::{Error, Result};
pub use materials::{DielectricModel, DrudeParams, LorentzParams, PhotonEnergy, TabulatedOptics};
pub use polariton::{CoupledModel, CriticalLengthParams, ModeLadder, PolaritonBranches, Topology};
pub use spectral::{BareMode, Dip, DipSet, RegimeLabel, Spectrum};
pub use tmm::{DispersionMap, Layer, LayerStack, PlaneWaveContext, Polarization};
