use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Relative tolerance used when deciding whether two grids coincide or a
/// time sits on a lattice point.
const LATTICE_TOL: f64 = 1e-6;

/// Uniform frequency samples covering `[center - half_width, center + half_width]`
/// inclusive. Energies are in eV (hbar = 1).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyGrid {
    center: f64,
    half_width: f64,
    n_points: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, half_width: f64, n_points: usize) -> Result<Self> {
        if !center.is_finite() || !half_width.is_finite() {
            return Err(Error::NonFinite { what: "frequency grid" });
        }
        if half_width <= 0.0 {
            return Err(Error::param("half_width", "must be > 0"));
        }
        if n_points < 2 {
            return Err(Error::param("n_points", "need at least two samples"));
        }
        Ok(Self { center, half_width, n_points })
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn step(&self) -> f64 {
        2.0 * self.half_width / (self.n_points - 1) as f64
    }

    pub fn start(&self) -> f64 {
        self.center - self.half_width
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start() + k as f64 * self.step()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|k| self.point(k)).collect()
    }

    /// Same sampling, moved to a new center.
    pub fn recentered(&self, center: f64) -> Self {
        Self { center, ..*self }
    }

    /// Index of the sample closest to `omega`, if it lies inside the grid
    /// (half a step of slack at either end).
    pub fn nearest_index(&self, omega: f64) -> Option<usize> {
        let r = (omega - self.start()) / self.step();
        let k = r.round();
        if k < 0.0 || k > (self.n_points - 1) as f64 || (r - k).abs() > 0.5 + 1e-12 {
            return None;
        }
        Some(k as usize)
    }

    /// Time grid reached by the discrete transform: `dt = 2 pi / (n dw)`.
    pub fn conjugate(&self) -> TimeGrid {
        TimeGrid { step: 2.0 * PI / (self.n_points as f64 * self.step()), n_points: self.n_points }
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n_points == other.n_points
            && close(self.step(), other.step())
            && (self.center - other.center).abs() <= LATTICE_TOL * self.step()
    }
}

/// Uniform time samples `t_j = (j - floor(n/2)) * step`, `j = 0..n`.
///
/// The lattice always contains `t = 0`. For odd `n` it is exactly symmetric;
/// for even `n` it carries one extra sample at `-floor(n/2) * step`, which is
/// the usual FFT ordering and keeps `t = 0` available for discrete impulses.
/// Times are in eV^-1 (see [`crate::numerics::units::HBAR_EV_FS`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    step: f64,
    n_points: usize,
}

impl TimeGrid {
    /// Grid whose most negative sample sits at `-half_span`.
    pub fn new(half_span: f64, n_points: usize) -> Result<Self> {
        if !half_span.is_finite() {
            return Err(Error::NonFinite { what: "time grid" });
        }
        if half_span <= 0.0 {
            return Err(Error::param("half_span", "must be > 0"));
        }
        if n_points < 2 {
            return Err(Error::param("n_points", "need at least two samples"));
        }
        Self::from_step(half_span / (n_points / 2) as f64, n_points)
    }

    pub fn from_step(step: f64, n_points: usize) -> Result<Self> {
        if !step.is_finite() {
            return Err(Error::NonFinite { what: "time grid" });
        }
        if step <= 0.0 {
            return Err(Error::param("step", "must be > 0"));
        }
        if n_points < 2 {
            return Err(Error::param("n_points", "need at least two samples"));
        }
        Ok(Self { step, n_points })
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    /// Index of `t = 0`.
    pub fn origin(&self) -> usize {
        self.n_points / 2
    }

    pub fn half_span(&self) -> f64 {
        self.origin() as f64 * self.step
    }

    pub fn first(&self) -> f64 {
        self.point(0)
    }

    pub fn last(&self) -> f64 {
        self.point(self.n_points - 1)
    }

    pub fn point(&self, j: usize) -> f64 {
        (j as f64 - self.origin() as f64) * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }

    /// Frequency grid reached by the inverse transform, centered at `center`.
    pub fn conjugate(&self, center: f64) -> FrequencyGrid {
        let d_omega = 2.0 * PI / (self.n_points as f64 * self.step);
        FrequencyGrid { center, half_width: 0.5 * (self.n_points - 1) as f64 * d_omega, n_points: self.n_points }
    }

    /// Signed lattice offset of `t` from the origin, in units of `step`.
    pub fn lattice_offset(&self, t: f64) -> Result<i64> {
        if !t.is_finite() {
            return Err(Error::NonFinite { what: "time" });
        }
        let r = t / self.step;
        let k = r.round();
        if (r - k).abs() > LATTICE_TOL {
            return Err(Error::OffLattice { value: t, step: self.step });
        }
        Ok(k as i64)
    }

    /// Index of `t` if it is a lattice point inside the grid, `None` if it
    /// is a lattice point outside the grid.
    pub fn index_of(&self, t: f64) -> Result<Option<usize>> {
        let k = self.lattice_offset(t)? + self.origin() as i64;
        Ok(if k >= 0 && (k as usize) < self.n_points { Some(k as usize) } else { None })
    }

    /// Like [`index_of`](Self::index_of) but rejects points outside the grid.
    pub fn require_index(&self, t: f64) -> Result<usize> {
        self.index_of(t)?.ok_or(Error::OutOfRange { value: t, min: self.first(), max: self.last() })
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.n_points == other.n_points && close(self.step, other.step)
    }

    /// A delay axis of `n_points` samples whose spacing is a whole number of
    /// half-steps of `self`, as close as possible to `approx_step`. Delays on
    /// this axis put `2 * delay` on the lattice of `self`, which is what the
    /// coincidence quadratures need.
    pub fn delay_axis(&self, approx_step: f64, n_points: usize) -> Result<TimeGrid> {
        let half = 0.5 * self.step;
        let stride = (approx_step / half).round().max(1.0);
        TimeGrid::from_step(stride * half, n_points)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}
