//! Continuum Fourier convention `f(t) = (2 pi)^(-1/2) \int dw f(w) e^(-i w t)`
//! realized on discrete grids.
//!
//! A spectrum on an `n`-point [`FrequencyGrid`] maps onto the conjugate
//! `n`-point [`TimeGrid`] (`dt * dw = 2 pi / n`). The FFT is wrapped in phase
//! factors so that grids not centered at zero frequency still produce the
//! continuum values `(2 pi)^(-1/2) sum_k dw f(w_k) e^(-i w_k t_j)` exactly, and
//! the pair of transforms is an exact discrete inverse (Parseval holds
//! identically).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::grid::FrequencyGrid;
use super::signal::{Spectrum, TimeSignal};
use crate::error::{Error, Result};

/// Edge-energy fraction above which a transform result is flagged.
pub const ALIAS_THRESHOLD: f64 = 0.01;

pub fn fourier_to_time(spectrum: &Spectrum) -> Result<TimeSignal> {
    let fgrid = *spectrum.grid();
    let tgrid = fgrid.conjugate();
    let n = fgrid.len();
    let origin = tgrid.origin() as f64;
    let w0 = fgrid.start();

    let mut buf: Vec<C64> = spectrum
        .values()
        .iter()
        .enumerate()
        .map(|(k, v)| v * C64::from_polar(1.0, 2.0 * PI * k as f64 * origin / n as f64))
        .collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let norm = fgrid.step() / (2.0 * PI).sqrt();
    let values = buf.into_iter().enumerate().map(|(j, v)| v * C64::from_polar(norm, -w0 * tgrid.point(j))).collect();
    Ok(TimeSignal::new(tgrid, values)?.with_alias_flag(spectrum.edge_fraction() > ALIAS_THRESHOLD))
}

/// Inverse of [`fourier_to_time`]; `center` fixes the frequency grid the
/// result lives on (the time grid only determines its spacing).
pub fn fourier_to_frequency(signal: &TimeSignal, center: f64) -> Result<Spectrum> {
    if !center.is_finite() {
        return Err(Error::NonFinite { what: "center frequency" });
    }
    let tgrid = *signal.grid();
    let fgrid: FrequencyGrid = tgrid.conjugate(center);
    let n = tgrid.len();
    let origin = tgrid.origin() as f64;
    let w0 = fgrid.start();

    let mut buf: Vec<C64> =
        signal.values().iter().enumerate().map(|(j, v)| v * C64::from_polar(1.0, w0 * tgrid.point(j))).collect();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);

    let norm = tgrid.step() / (2.0 * PI).sqrt();
    let values = buf
        .into_iter()
        .enumerate()
        .map(|(k, v)| v * C64::from_polar(norm, -2.0 * PI * k as f64 * origin / n as f64))
        .collect();
    Ok(Spectrum::new(fgrid, values)?.with_alias_flag(signal.edge_fraction() > ALIAS_THRESHOLD))
}
