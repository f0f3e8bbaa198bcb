//! Unit conventions: hbar = 1, energies in eV, times in eV^-1.

use crate::error::{Error, Result};

/// hbar in eV fs; one eV^-1 of time is this many femtoseconds.
pub const HBAR_EV_FS: f64 = 0.658_211_956_9;

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn inv_ev_to_fs(t: f64) -> f64 {
    t * HBAR_EV_FS
}

pub fn fs_to_inv_ev(t_fs: f64) -> f64 {
    t_fs / HBAR_EV_FS
}

/// Spatial extent `c * duration` of a pulse, in micrometres.
///
/// The wavelength does not enter the length; it is accepted so callers can
/// pass the pulse description as a whole and is checked for sanity only.
pub fn pulse_extent(wavelength_nm: f64, duration_ps: f64) -> Result<f64> {
    if !wavelength_nm.is_finite() || !duration_ps.is_finite() {
        return Err(Error::NonFinite { what: "pulse description" });
    }
    if wavelength_nm <= 0.0 {
        return Err(Error::param("wavelength_nm", "must be > 0"));
    }
    if duration_ps <= 0.0 {
        return Err(Error::param("duration_ps", "must be > 0"));
    }
    // ps -> s is 1e-12, m -> um is 1e6
    Ok(SPEED_OF_LIGHT * duration_ps * 1e-6)
}
