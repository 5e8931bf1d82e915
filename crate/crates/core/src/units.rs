//! Unit conversion constants. Every energy/length conversion in the crate
//! goes through these two values.

/// Planck constant times the speed of light, in eV·nm.
pub const HC_EV_NM: f64 = 1239.8420;

/// Reduced Planck constant times the speed of light, in eV·nm.
pub const HBARC_EV_NM: f64 = 197.3270;

/// μm⁻¹ → nm⁻¹.
pub const PER_UM_TO_PER_NM: f64 = 1e-3;

/// Free-space wavenumber (nm⁻¹) of a photon of energy `energy_ev`.
#[inline]
pub fn free_space_wavenumber(energy_ev: f64) -> f64 {
    energy_ev / HBARC_EV_NM
}

/// Vacuum wavelength (nm) of a photon of energy `energy_ev`.
#[inline]
pub fn wavelength_nm(energy_ev: f64) -> f64 {
    HC_EV_NM / energy_ev
}
