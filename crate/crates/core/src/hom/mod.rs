//! Beam splitter and the Hong-Ou-Mandel coincidence observables.
//!
//! Time-domain responses `C(t)` are produced from spectra sampled around the
//! pump half-frequency, so the envelope is what gets sampled and the optical
//! carrier is carried by the transform phases. The explicit `e^(-i w_p ...)`
//! factors of the coincidence formulas then cancel the carrier exactly.
//!
//! Delays must keep `2 * delay` on the lattice of the response grid; use
//! [`TimeGrid::delay_axis`] to build compatible delay axes.

mod mzi;
mod scan;

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{convolve, TimeGrid, TimeSignal};

pub use mzi::{mzi_number_difference, singles, MziInput};
pub use scan::{effective_response, fwhm, scan_delta, CoincidenceMap, DelayScan, HomSetup};

/// Relative size of `|C|` at the grid ends above which integrated results
/// are flagged.
pub const EDGE_DECAY: f64 = 1e-6;

/// Lossless beam splitter displaced to delay one input by `delay` relative
/// to the other.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeamSplitter {
    transmittance: f64,
    reflectance: f64,
    delay: f64,
}

impl BeamSplitter {
    pub fn new(transmittance: f64, reflectance: f64, delay: f64) -> Result<Self> {
        if !transmittance.is_finite() || !reflectance.is_finite() || !delay.is_finite() {
            return Err(Error::NonFinite { what: "beam splitter" });
        }
        if !(0.0..=1.0).contains(&transmittance) || !(0.0..=1.0).contains(&reflectance) {
            return Err(Error::param("transmittance", "T and R must lie in [0, 1]"));
        }
        if (transmittance + reflectance - 1.0).abs() > 1e-12 {
            return Err(Error::param(
                "reflectance",
                format!("lossless splitter needs T + R = 1, got {}", transmittance + reflectance),
            ));
        }
        Ok(Self { transmittance, reflectance, delay })
    }

    pub fn balanced(delay: f64) -> Result<Self> {
        Self::new(0.5, 0.5, delay)
    }

    pub fn with_delay(&self, delay: f64) -> Self {
        Self { delay, ..*self }
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    pub fn reflectance(&self) -> f64 {
        self.reflectance
    }

    pub fn delay(&self) -> f64 {
        self.delay
    }

    pub fn is_balanced(&self) -> bool {
        (self.transmittance - 0.5).abs() <= 1e-12
    }
}

/// Field transformation of the displaced splitter at frequency `omega`:
/// `[[sqrt T, i sqrt R e^(i w D)], [i sqrt R e^(-i w D), sqrt T]]`.
pub fn beam_splitter_matrix(bs: &BeamSplitter, omega: f64) -> Matrix2<C64> {
    let t = C64::new(bs.transmittance.sqrt(), 0.0);
    let r = bs.reflectance.sqrt();
    let phase = omega * bs.delay;
    Matrix2::new(t, C64::new(0.0, r) * C64::from_polar(1.0, phase), C64::new(0.0, r) * C64::from_polar(1.0, -phase), t)
}

/// Overall positive scale `P0` of the coincidence signals (arbitrary units).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalScale(f64);

impl SignalScale {
    pub fn new(p0: f64) -> Result<Self> {
        if !p0.is_finite() || p0 <= 0.0 {
            return Err(Error::param("p0", "signal scale must be finite and > 0"));
        }
        Ok(Self(p0))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl Default for SignalScale {
    fn default() -> Self {
        Self(1.0)
    }
}

/// `C(t) = G(t) * chi(t)`.
pub fn convolved_response(g: &TimeSignal, chi: &TimeSignal) -> Result<TimeSignal> {
    convolve(g, chi)
}

/// Gated coincidence rate at detector delay `tau` for splitter delay
/// `bs.delay()`:
///
/// `P0 { T^2 |C(t)|^2 + R^2 |C(2D - t)|^2 - RT [C*(t) C(2D - t) e^(-i w_p (t - D)) + c.c.] }`
///
/// `tau` must be a lattice point inside the grid; `C(2D - tau)` is taken as
/// zero outside it.
pub fn coincidence_tau(c: &TimeSignal, pump: f64, bs: &BeamSplitter, scale: &SignalScale, tau: f64) -> Result<f64> {
    let grid = c.grid();
    let j = grid.require_index(tau)?;
    let mirrored = grid.lattice_offset(2.0 * bs.delay - tau)?;
    let a = c.values()[j];
    let b = c.at_offset(mirrored);
    let (t, r) = (bs.transmittance, bs.reflectance);
    let cross = a.conj() * b * C64::from_polar(1.0, -pump * (tau - bs.delay));
    Ok(scale.0 * (t * t * a.norm_sqr() + r * r * b.norm_sqr() - 2.0 * r * t * cross.re))
}

/// Ungated coincidence `P(D) = n0 - v \int dt {C*(D + t) C(D - t) e^(-i w_p t) + c.c.}`
/// with `n0 = P0 (R^2 + T^2) \int |C|^2` and `v = P0 R T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratedCoincidence {
    pub value: f64,
    /// Large-delay background `n0`.
    pub n0: f64,
    /// `C` has not decayed to [`EDGE_DECAY`] of its peak at the grid ends.
    pub edge_warning: bool,
}

impl IntegratedCoincidence {
    pub fn normalized(&self) -> f64 {
        self.value / self.n0
    }
}

pub fn coincidence_integrated(
    c: &TimeSignal,
    pump: f64,
    bs: &BeamSplitter,
    scale: &SignalScale,
) -> Result<IntegratedCoincidence> {
    let phases = carrier_phases(c.grid(), pump);
    let n0 = background(c, bs, scale);
    let overlap = overlap(c, &phases, pump, bs.delay)?;
    Ok(IntegratedCoincidence {
        value: n0 - 2.0 * scale.0 * bs.reflectance * bs.transmittance * overlap.re,
        n0,
        edge_warning: c.edge_ratio() > EDGE_DECAY,
    })
}

pub(crate) fn background(c: &TimeSignal, bs: &BeamSplitter, scale: &SignalScale) -> f64 {
    let (t, r) = (bs.transmittance, bs.reflectance);
    scale.0 * (r * r + t * t) * c.energy()
}

/// `e^(-i w_p s_j)` on the grid.
pub(crate) fn carrier_phases(grid: &TimeGrid, pump: f64) -> Vec<C64> {
    grid.points().into_iter().map(|s| C64::from_polar(1.0, -pump * s)).collect()
}

/// `\int dt C*(D + t) C(D - t) e^(-i w_p t)`, evaluated with `s = D + t` as
/// `dt sum_j C*(s_j) C(2D - s_j) e^(-i w_p (s_j - D))`.
pub(crate) fn overlap(c: &TimeSignal, phases: &[C64], pump: f64, delay: f64) -> Result<C64> {
    let grid = c.grid();
    let shift = grid.lattice_offset(2.0 * delay)?;
    let origin = grid.origin() as i64;
    let sum: C64 = c
        .values()
        .iter()
        .zip(phases)
        .enumerate()
        .map(|(j, (a, ph))| a.conj() * c.at_offset(shift - (j as i64 - origin)) * ph)
        .sum();
    Ok(sum * C64::from_polar(grid.step(), pump * delay))
}
