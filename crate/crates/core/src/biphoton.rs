//! Joint spectral amplitudes `Phi(w_a, w_b)` of a down-converted photon pair.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{fourier_to_time, sinc, FrequencyGrid, Spectrum, TimeGrid, TimeSignal};

/// Broadband type-II source: Gaussian pump envelope times the sinc
/// phase-matching function of a crystal of length `crystal_length`.
/// `k_a`, `k_b`, `k_p` are inverse group velocities (time per length).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SincPdcParams {
    pub pump: f64,
    pub pump_bandwidth: f64,
    pub crystal_length: f64,
    pub k_a: f64,
    pub k_b: f64,
    pub k_p: f64,
}

impl SincPdcParams {
    pub fn validate(&self) -> Result<()> {
        let all = [self.pump, self.pump_bandwidth, self.crystal_length, self.k_a, self.k_b, self.k_p];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "sinc PDC parameters" });
        }
        if self.pump_bandwidth < 0.0 {
            return Err(Error::param("pump_bandwidth", "must be >= 0"));
        }
        if self.pump_bandwidth == 0.0 {
            return Err(Error::param(
                "pump_bandwidth",
                "zero bandwidth is the narrowband limit; use the narrowband sinc amplitude",
            ));
        }
        if self.crystal_length <= 0.0 {
            return Err(Error::param("crystal_length", "must be > 0"));
        }
        Ok(())
    }

    pub fn time_a(&self) -> f64 {
        (self.k_a - self.k_p) * self.crystal_length
    }

    pub fn time_b(&self) -> f64 {
        (self.k_b - self.k_p) * self.crystal_length
    }

    pub fn entanglement_time(&self) -> f64 {
        self.time_a() - self.time_b()
    }

    /// The zero-bandwidth limit of this source.
    pub fn narrowband(&self) -> Result<NarrowbandSinc> {
        NarrowbandSinc::new(self.pump, self.entanglement_time())
    }
}

/// Double-Gaussian surrogate of the sinc amplitude with widths along the
/// sum (`sigma_plus`) and difference (`sigma_minus`) frequency directions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianBiphotonParams {
    pub pump: f64,
    pub sigma_plus: f64,
    pub sigma_minus: f64,
}

impl GaussianBiphotonParams {
    pub fn new(pump: f64, sigma_plus: f64, sigma_minus: f64) -> Result<Self> {
        let p = Self { pump, sigma_plus, sigma_minus };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.pump.is_finite() || !self.sigma_plus.is_finite() || !self.sigma_minus.is_finite() {
            return Err(Error::NonFinite { what: "Gaussian biphoton parameters" });
        }
        if self.sigma_plus <= 0.0 {
            return Err(Error::param("sigma_plus", "must be > 0"));
        }
        if self.sigma_minus <= 0.0 {
            return Err(Error::param("sigma_minus", "must be > 0"));
        }
        Ok(())
    }

    /// Schmidt ratio `mu = (2 s+ - s-) / (2 s+ + s-)`; the weights are
    /// `(1 - mu^2) mu^(2n)`.
    pub fn schmidt_ratio(&self) -> f64 {
        (2.0 * self.sigma_plus - self.sigma_minus) / (2.0 * self.sigma_plus + self.sigma_minus)
    }
}

/// Narrowband pump: the pair lives on the anti-diagonal `w_a + w_b = pump`
/// with profile `sinc((w - pump/2) T_ent)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NarrowbandSinc {
    pub pump: f64,
    pub t_ent: f64,
}

impl NarrowbandSinc {
    pub fn new(pump: f64, t_ent: f64) -> Result<Self> {
        let p = Self { pump, t_ent };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.pump.is_finite() || !self.t_ent.is_finite() {
            return Err(Error::NonFinite { what: "narrowband parameters" });
        }
        if self.t_ent == 0.0 {
            return Err(Error::param("t_ent", "entanglement time must be nonzero"));
        }
        Ok(())
    }
}

pub fn amplitude_sinc_pdc(p: &SincPdcParams, omega_a: f64, omega_b: f64) -> Result<C64> {
    p.validate()?;
    Ok(C64::new(sinc_pdc_unchecked(p, omega_a, omega_b), 0.0))
}

fn sinc_pdc_unchecked(p: &SincPdcParams, omega_a: f64, omega_b: f64) -> f64 {
    let s = p.pump_bandwidth;
    let envelope = (-(omega_a + omega_b - p.pump).powi(2) / (2.0 * s * s)).exp() / (2.0 * PI * s * s).sqrt();
    let half = 0.5 * p.pump;
    let arg = p.crystal_length * ((omega_a - half) * (p.k_a - p.k_p) + (omega_b - half) * (p.k_b - p.k_p));
    envelope * sinc(arg)
}

pub fn amplitude_gaussian(p: &GaussianBiphotonParams, omega_a: f64, omega_b: f64) -> C64 {
    let (sp, sm) = (p.sigma_plus, p.sigma_minus);
    let sum = omega_a + omega_b - p.pump;
    let diff = omega_a - omega_b;
    let v = (-sum * sum / (16.0 * sp * sp) - diff * diff / (4.0 * sm * sm)).exp() / (2.0 * PI * sp * sm).sqrt();
    C64::new(v, 0.0)
}

pub fn amplitude_narrowband(pump: f64, t_ent: f64, omega: f64) -> Result<f64> {
    NarrowbandSinc::new(pump, t_ent)?;
    Ok(sinc((omega - 0.5 * pump) * t_ent))
}

/// Two-photon amplitude in one of the supported parameterizations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiphotonAmplitude {
    SincPdc(SincPdcParams),
    Gaussian(GaussianBiphotonParams),
    NarrowbandSinc(NarrowbandSinc),
}

impl BiphotonAmplitude {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::SincPdc(p) => p.validate(),
            Self::Gaussian(p) => p.validate(),
            Self::NarrowbandSinc(p) => p.validate(),
        }
    }

    pub fn pump(&self) -> f64 {
        match self {
            Self::SincPdc(p) => p.pump,
            Self::Gaussian(p) => p.pump,
            Self::NarrowbandSinc(p) => p.pump,
        }
    }

    /// Same source pumped at a different frequency.
    pub fn with_pump(&self, pump: f64) -> Self {
        match *self {
            Self::SincPdc(p) => Self::SincPdc(SincPdcParams { pump, ..p }),
            Self::Gaussian(p) => Self::Gaussian(GaussianBiphotonParams { pump, ..p }),
            Self::NarrowbandSinc(p) => Self::NarrowbandSinc(NarrowbandSinc { pump, ..p }),
        }
    }

    /// `Phi(w_a, w_b)`. The narrowband amplitude carries a delta function
    /// across the anti-diagonal and has no pointwise joint value.
    pub fn joint(&self, omega_a: f64, omega_b: f64) -> Result<C64> {
        match self {
            Self::SincPdc(p) => amplitude_sinc_pdc(p, omega_a, omega_b),
            Self::Gaussian(p) => Ok(amplitude_gaussian(p, omega_a, omega_b)),
            Self::NarrowbandSinc(_) => Err(Error::Unsupported(
                "narrowband amplitude is confined to the anti-diagonal; sample its slice instead".into(),
            )),
        }
    }

    /// Anti-diagonal profile `Phi(w, pump - w)` entering the narrowband
    /// coincidence signal.
    pub fn slice(&self, pump: f64, omega: f64) -> C64 {
        match self {
            Self::SincPdc(p) => C64::new(sinc_pdc_unchecked(p, omega, pump - omega), 0.0),
            Self::Gaussian(p) => amplitude_gaussian(p, omega, pump - omega),
            Self::NarrowbandSinc(p) => C64::new(sinc((omega - 0.5 * pump) * p.t_ent), 0.0),
        }
    }

    /// Is `Phi(w_a, w_b) = Phi(w_b, w_a)` guaranteed by the parameters?
    pub fn exchange_symmetric(&self) -> bool {
        match self {
            Self::SincPdc(p) => p.k_a == p.k_b,
            Self::Gaussian(_) | Self::NarrowbandSinc(_) => true,
        }
    }
}

/// `G(t) = (2 pi)^(-1/2) \int dw Phi(w, pump - w) e^(-i w t)` on `tgrid`.
///
/// The slice is sampled on the frequency grid conjugate to `tgrid`, centered
/// at `pump / 2`, so only the envelope is sampled; the `e^(-i pump t / 2)`
/// carrier is carried exactly by the transform phases.
pub fn pump_slice_g(amp: &BiphotonAmplitude, pump: f64, tgrid: &TimeGrid) -> Result<TimeSignal> {
    amp.validate()?;
    let spectrum = pump_slice_spectrum(amp, pump, &tgrid.conjugate(0.5 * pump))?;
    fourier_to_time(&spectrum)
}

/// The anti-diagonal slice `Phi(w, pump - w)` sampled on `grid`.
pub fn pump_slice_spectrum(amp: &BiphotonAmplitude, pump: f64, grid: &FrequencyGrid) -> Result<Spectrum> {
    Spectrum::from_fn(*grid, |w| amp.slice(pump, w))
}

/// `Phi` sampled on the tensor grid `grid x grid`; rows index `w_a`,
/// columns `w_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledJsa {
    grid: FrequencyGrid,
    values: DMatrix<C64>,
}

impl SampledJsa {
    pub fn sample(amp: &BiphotonAmplitude, grid: &FrequencyGrid) -> Result<Self> {
        amp.validate()?;
        let w = grid.points();
        let mut err = None;
        let values = DMatrix::from_fn(w.len(), w.len(), |i, j| match amp.joint(w[i], w[j]) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                C64::new(0.0, 0.0)
            }
        });
        if let Some(e) = err {
            return Err(e);
        }
        Self::from_matrix(*grid, values)
    }

    /// Default tensor grid: `n` points per axis centered at `pump / 2`.
    pub fn sample_centered(amp: &BiphotonAmplitude, half_width: f64, n: usize) -> Result<Self> {
        Self::sample(amp, &FrequencyGrid::new(0.5 * amp.pump(), half_width, n)?)
    }

    pub fn from_matrix(grid: FrequencyGrid, values: DMatrix<C64>) -> Result<Self> {
        if values.nrows() != grid.len() || values.ncols() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{}x{} matrix for a {}-point grid",
                values.nrows(),
                values.ncols(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite { what: "sampled amplitude" });
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn values(&self) -> &DMatrix<C64> {
        &self.values
    }

    /// `sum |Phi|^2 dw^2`
    pub fn norm_sq(&self) -> f64 {
        let dw = self.grid.step();
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * dw * dw
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sq();
        if n == 0.0 {
            return Err(Error::param("amplitude", "cannot normalize an all-zero amplitude"));
        }
        Ok(Self { grid: self.grid, values: self.values.map(|v| v / n.sqrt()) })
    }

    pub fn is_normalized(&self, tol: f64) -> bool {
        (self.norm_sq() - 1.0).abs() <= tol
    }

    /// Single-photon spectral density of photon `a`: `\int dw_b |Phi|^2`.
    pub fn marginal_a(&self) -> Vec<f64> {
        let dw = self.grid.step();
        self.values.row_iter().map(|r| r.iter().map(|v| v.norm_sqr()).sum::<f64>() * dw).collect()
    }

    pub fn marginal_b(&self) -> Vec<f64> {
        let dw = self.grid.step();
        self.values.column_iter().map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>() * dw).collect()
    }

    /// Fraction of `|Phi|^2` on the outermost ring of samples.
    pub fn boundary_fraction(&self) -> f64 {
        let n = self.values.nrows();
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut edge = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i == 0 || j == 0 || i == n - 1 || j == n - 1 {
                    edge += self.values[(i, j)].norm_sqr();
                }
            }
        }
        edge / total
    }
}
