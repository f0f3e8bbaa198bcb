use num_complex::Complex64 as C64;

use super::grid::{FrequencyGrid, TimeGrid};
use crate::error::{Error, Result};

/// A uniform one-dimensional sampling.
pub trait SampleGrid: Clone {
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn step(&self) -> f64;
    fn point(&self, i: usize) -> f64;

    fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }
}

impl SampleGrid for FrequencyGrid {
    fn len(&self) -> usize {
        FrequencyGrid::len(self)
    }
    fn step(&self) -> f64 {
        FrequencyGrid::step(self)
    }
    fn point(&self, i: usize) -> f64 {
        FrequencyGrid::point(self, i)
    }
}

impl SampleGrid for TimeGrid {
    fn len(&self) -> usize {
        TimeGrid::len(self)
    }
    fn step(&self) -> f64 {
        TimeGrid::step(self)
    }
    fn point(&self, i: usize) -> f64 {
        TimeGrid::point(self, i)
    }
}

/// Complex samples on a grid, one per grid point, all finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal<G> {
    grid: G,
    values: Vec<C64>,
    aliased: bool,
}

pub type Spectrum = Signal<FrequencyGrid>;
pub type TimeSignal = Signal<TimeGrid>;

impl<G: SampleGrid> Signal<G> {
    pub fn new(grid: G, values: Vec<C64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!("{} values for a {}-point grid", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { what: "signal samples" });
        }
        Ok(Self { grid, values, aliased: false })
    }

    pub fn zeros(grid: G) -> Self {
        let values = vec![C64::new(0.0, 0.0); grid.len()];
        Self { grid, values, aliased: false }
    }

    /// Samples `f` at every grid point.
    pub fn from_fn(grid: G, f: impl Fn(f64) -> C64) -> Result<Self> {
        let values = grid.points().into_iter().map(f).collect();
        Self::new(grid, values)
    }

    pub(crate) fn with_alias_flag(mut self, aliased: bool) -> Self {
        self.aliased = aliased;
        self
    }

    pub fn grid(&self) -> &G {
        &self.grid
    }

    pub fn values(&self) -> &[C64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Set when the producing transform saw significant weight at the band
    /// edges (possible aliasing or truncation).
    pub fn aliased(&self) -> bool {
        self.aliased
    }

    /// `sum |f|^2 * step`
    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.step()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * factor).collect(),
            aliased: self.aliased,
        }
    }

    /// Fraction of the total `|f|^2` carried by the outer `1/32` of the
    /// samples at each end.
    pub fn edge_fraction(&self) -> f64 {
        let n = self.values.len();
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let w = (n / 32).max(1);
        let edge: f64 = self.values[..w].iter().chain(&self.values[n - w..]).map(|v| v.norm_sqr()).sum();
        edge / total
    }

    /// Largest `|f|` among the outermost sample at either end, relative to
    /// the peak.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        self.values[0].norm().max(self.values[self.values.len() - 1].norm()) / peak
    }
}

impl TimeSignal {
    /// Value at the lattice time `t`; zero outside the grid.
    pub fn at_time(&self, t: f64) -> Result<C64> {
        Ok(match self.grid.index_of(t)? {
            Some(j) => self.values[j],
            None => C64::new(0.0, 0.0),
        })
    }

    /// Value at signed lattice offset `k` from the origin; zero outside.
    pub(crate) fn at_offset(&self, k: i64) -> C64 {
        let j = k + self.grid.origin() as i64;
        if j >= 0 && (j as usize) < self.values.len() {
            self.values[j as usize]
        } else {
            C64::new(0.0, 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn length_and_finiteness_checked() {
        let g = TimeGrid::from_step(1.0, 4).unwrap();
        assert!(Signal::new(g, vec![C64::new(0.0, 0.0); 3]).is_err());
        let bad = vec![C64::new(0.0, 0.0), C64::new(f64::NAN, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        assert_eq!(Signal::new(g, bad).unwrap_err(), Error::NonFinite { what: "signal samples" });
    }

    #[test]
    fn zero_padding_outside_grid() {
        let g = TimeGrid::from_step(0.5, 5).unwrap();
        let s = Signal::from_fn(g, |t| C64::new(t, 0.0)).unwrap();
        assert_eq!(s.at_time(1.0).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(s.at_time(5.0).unwrap(), C64::new(0.0, 0.0));
        assert!(s.at_time(0.3).is_err());
    }
}
