use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::{background, carrier_phases, overlap, BeamSplitter, SignalScale, EDGE_DECAY};
use crate::biphoton::{pump_slice_g, pump_slice_spectrum, BiphotonAmplitude};
use crate::error::{Error, Result};
use crate::matter::{chi3_time, Sample};
use crate::numerics::{convolve, fourier_to_time, impulse, FrequencyGrid, Spectrum, TimeGrid, TimeSignal};

/// One interferometer configuration: source, optional sample in arm `a`,
/// the spectral band the slice is sampled on, splitter and scale.
///
/// `band` fixes the half-width and number of samples; its center is moved
/// to `pump / 2` for every pump frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomSetup {
    pub amplitude: BiphotonAmplitude,
    pub sample: Option<Sample>,
    pub band: FrequencyGrid,
    pub splitter: BeamSplitter,
    pub scale: SignalScale,
}

impl HomSetup {
    pub fn new(amplitude: BiphotonAmplitude, band: FrequencyGrid, splitter: BeamSplitter) -> Result<Self> {
        amplitude.validate()?;
        Ok(Self { amplitude, sample: None, band, splitter, scale: SignalScale::default() })
    }

    pub fn with_sample(mut self, sample: Option<Sample>) -> Self {
        self.sample = sample;
        self
    }

    pub fn with_scale(mut self, scale: SignalScale) -> Self {
        self.scale = scale;
        self
    }

    /// Grid of every `C(t)` this setup produces.
    pub fn time_grid(&self) -> TimeGrid {
        self.band.conjugate()
    }

    /// `c(w) = Phi(w, pump - w) T(w)` on the band centered at `pump / 2`.
    pub fn response_spectrum(&self, pump: f64) -> Result<Spectrum> {
        let grid = self.band.recentered(0.5 * pump);
        let slice = pump_slice_spectrum(&self.amplitude.with_pump(pump), pump, &grid)?;
        match &self.sample {
            None => Ok(slice),
            Some(s) => {
                let values = grid
                    .points()
                    .into_iter()
                    .zip(slice.values())
                    .map(|(w, v)| Ok(v * s.transmission(w)?))
                    .collect::<Result<Vec<_>>>()?;
                Spectrum::new(grid, values)
            }
        }
    }

    /// `C(t) = G(t) * chi(t)` with the sample acting as the filter
    /// `chi(w) = (2 pi)^(-1/2) T(w)`, so an empty arm gives `chi(t) = delta(t)`.
    pub fn response(&self, pump: f64) -> Result<TimeSignal> {
        fourier_to_time(&self.response_spectrum(pump)?)
    }

    /// Same `C(t)` assembled in the time domain from `G(t)` and the causal
    /// material response. Slightly less accurate than [`response`](Self::response)
    /// because the sampled response is periodized by the lattice.
    pub fn response_by_convolution(&self, pump: f64) -> Result<TimeSignal> {
        let tgrid = self.time_grid();
        let g = pump_slice_g(&self.amplitude.with_pump(pump), pump, &tgrid)?;
        convolve(&g, &effective_response(self.sample.as_ref(), &tgrid)?)
    }

    pub fn scan_delta(&self, pump: f64, delays: &TimeGrid) -> Result<DelayScan> {
        let c = self.response(pump)?;
        scan_delta(&c, pump, &self.splitter, &self.scale, delays)
    }

    /// Integrated coincidence over `delays` for every pump frequency; the
    /// amplitude is rebuilt for each pump.
    pub fn scan_2d(&self, delays: &TimeGrid, pumps: &FrequencyGrid) -> Result<CoincidenceMap> {
        let rows: Vec<DelayScan> =
            pumps.points().into_par_iter().map(|p| self.scan_delta(p, delays)).collect::<Result<_>>()?;
        let values = DMatrix::from_fn(pumps.len(), delays.len(), |i, j| rows[i].values[j]);
        Ok(CoincidenceMap {
            delays: *delays,
            pumps: *pumps,
            values,
            n0: rows.iter().map(|r| r.n0).collect(),
            edge_warning: rows.iter().any(|r| r.edge_warning),
        })
    }
}

/// Time-domain filter of arm `a`: `delta(t) - i A0 (2 pi)^(-1/2) chi3(t)`.
pub fn effective_response(sample: Option<&Sample>, tgrid: &TimeGrid) -> Result<TimeSignal> {
    let delta = impulse(*tgrid);
    let Some(s) = sample else { return Ok(delta) };
    if s.coupling == 0.0 {
        return Ok(delta);
    }
    let chi = chi3_time(&s.system, &s.drive, tgrid)?;
    let k = C64::new(0.0, -s.coupling / (2.0 * PI).sqrt());
    let values = delta.values().iter().zip(chi.values()).map(|(d, c)| d + k * c).collect();
    Ok(TimeSignal::new(*tgrid, values)?.with_alias_flag(chi.aliased()))
}

/// Integrated coincidence of a fixed `C(t)` for every delay in `delays`
/// (the delay of `bs` is ignored).
pub fn scan_delta(
    c: &TimeSignal,
    pump: f64,
    bs: &BeamSplitter,
    scale: &SignalScale,
    delays: &TimeGrid,
) -> Result<DelayScan> {
    let phases = carrier_phases(c.grid(), pump);
    let n0 = background(c, bs, scale);
    let v = 2.0 * scale.value() * bs.reflectance() * bs.transmittance();
    let values = delays
        .points()
        .into_par_iter()
        .map(|d| Ok(n0 - v * overlap(c, &phases, pump, d)?.re))
        .collect::<Result<Vec<f64>>>()?;
    Ok(DelayScan { delays: *delays, values, n0, edge_warning: c.edge_ratio() > EDGE_DECAY })
}

/// `P(D)` sampled on a delay axis.
#[derive(Debug, Clone, PartialEq)]
pub struct DelayScan {
    pub delays: TimeGrid,
    pub values: Vec<f64>,
    pub n0: f64,
    pub edge_warning: bool,
}

impl DelayScan {
    pub fn normalized(&self) -> Vec<f64> {
        self.values.iter().map(|v| v / self.n0).collect()
    }

    fn mirror_pairs(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        let o = self.delays.origin();
        (0..self.values.len())
            .filter(move |&j| 2 * o >= j && 2 * o - j < self.values.len())
            .map(move |j| (self.values[j], self.values[2 * o - j]))
    }

    /// `sum |P(D) - P(-D)| / sum P(D)` over delays whose mirror image is on
    /// the axis.
    pub fn asymmetry(&self) -> f64 {
        let (num, den) = self.mirror_pairs().fold((0.0, 0.0), |(n, d), (a, b)| (n + (a - b).abs(), d + a));
        if den == 0.0 {
            0.0
        } else {
            num / den
        }
    }

    pub fn max_parity_deviation(&self) -> f64 {
        self.mirror_pairs().map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `(n0 - min P) / n0`
    pub fn visibility(&self) -> f64 {
        let min = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        (self.n0 - min) / self.n0
    }

    pub fn at_zero_delay(&self) -> f64 {
        self.values[self.delays.origin()]
    }
}

/// Integrated coincidence over a delay x pump-frequency plane.
/// Rows index the pump frequency, columns the delay.
#[derive(Debug, Clone, PartialEq)]
pub struct CoincidenceMap {
    pub delays: TimeGrid,
    pub pumps: FrequencyGrid,
    pub values: DMatrix<f64>,
    /// Background `n0` for each pump frequency.
    pub n0: Vec<f64>,
    pub edge_warning: bool,
}

impl CoincidenceMap {
    fn check_shape(&self, other: &CoincidenceMap) -> Result<()> {
        if !self.pumps.same_as(&other.pumps) || !self.delays.same_as(&other.delays) {
            return Err(Error::GridMismatch("maps sampled on different axes".into()));
        }
        Ok(())
    }

    /// Background-free difference `(P - n0) - (P_ref - n0_ref)` against a
    /// reference map on the same axes.
    pub fn modulation(&self, reference: &CoincidenceMap) -> Result<DMatrix<f64>> {
        self.check_shape(reference)?;
        Ok(DMatrix::from_fn(self.values.nrows(), self.values.ncols(), |i, j| {
            (self.values[(i, j)] - self.n0[i]) - (reference.values[(i, j)] - reference.n0[i])
        }))
    }

    /// Pump row with the largest summed `|modulation|`.
    pub fn feature_row(&self, reference: &CoincidenceMap) -> Result<usize> {
        let m = self.modulation(reference)?;
        let weights: Vec<f64> = m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum()).collect();
        let mut best = 0;
        for (i, w) in weights.iter().enumerate() {
            if *w > weights[best] {
                best = i;
            }
        }
        Ok(best)
    }

    /// Pump frequency at which the matter-induced modulation is strongest.
    pub fn feature_center(&self, reference: &CoincidenceMap) -> Result<f64> {
        Ok(self.pumps.point(self.feature_row(reference)?))
    }

    /// Width along the delay axis of `|modulation|` in the feature row.
    pub fn feature_fwhm(&self, reference: &CoincidenceMap) -> Result<f64> {
        let row = self.feature_row(reference)?;
        let m = self.modulation(reference)?;
        let profile: Vec<f64> = m.row(row).iter().map(|v| v.abs()).collect();
        fwhm(&self.delays.points(), &profile)
            .ok_or_else(|| Error::GridTooCoarse("feature does not fall to half maximum inside the delay axis".into()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Full width at half maximum of the peak of `y`, with linear interpolation
/// between samples. `None` when the half level is not crossed on both sides.
pub fn fwhm(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || y.len() < 3 {
        return None;
    }
    let (peak, &ymax) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    if ymax <= 0.0 {
        return None;
    }
    let half = 0.5 * ymax;
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let left = (1..=peak).rev().find(|&i| y[i - 1] < half).map(|i| cross(i - 1, i))?;
    let right = (peak..y.len() - 1).find(|&i| y[i + 1] < half).map(|i| cross(i, i + 1))?;
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{GaussianBiphotonParams, NarrowbandSinc};
    use crate::matter::FourLevelSystem;

    fn source(sigma_minus: f64) -> BiphotonAmplitude {
        BiphotonAmplitude::Gaussian(GaussianBiphotonParams::new(12.0, 0.1, sigma_minus).unwrap())
    }

    fn model_sample() -> Sample {
        let sys = FourLevelSystem::model();
        Sample::new(sys, sys.resonant_drive(), Sample::coupling_for_depth(&sys, 0.5)).unwrap()
    }

    fn setup(amp: BiphotonAmplitude) -> HomSetup {
        let band = FrequencyGrid::new(6.0, 4.0, 1025).unwrap();
        HomSetup::new(amp, band, BeamSplitter::balanced(0.0).unwrap()).unwrap()
    }

    #[test]
    fn fwhm_of_triangle_and_gaussian() {
        let x: Vec<f64> = (0..201).map(|i| -10.0 + 0.1 * i as f64).collect();
        let tri: Vec<f64> = x.iter().map(|v| (1.0 - v.abs() / 4.0).max(0.0)).collect();
        assert!((fwhm(&x, &tri).unwrap() - 4.0).abs() < 1e-9);
        let g: Vec<f64> = x.iter().map(|v| (-v * v / 2.0).exp()).collect();
        assert!((fwhm(&x, &g).unwrap() - 2.0 * (2.0 * 2f64.ln()).sqrt()).abs() < 1e-2);
        assert!(fwhm(&x, &vec![1.0; x.len()]).is_none());
    }

    #[test]
    fn bare_gaussian_dip() {
        let s = setup(source(0.2));
        let delays = s.time_grid().delay_axis(1.0, 41).unwrap();
        let scan = s.scan_delta(12.0, &delays).unwrap();
        assert!(scan.at_zero_delay() / scan.n0 < 1e-10);
        assert!(scan.max_parity_deviation() / scan.n0 < 1e-10);
        let far = (-(delays.first() * 0.2).powi(2) / 2.0).exp();
        assert!((scan.values[0] / scan.n0 - 1.0 + far).abs() < 1e-6);
        assert!(!scan.edge_warning);
    }

    #[test]
    fn matter_breaks_parity() {
        let s = setup(source(0.8)).with_sample(Some(model_sample()));
        let delays = s.time_grid().delay_axis(1.0, 61).unwrap();
        let scan = s.scan_delta(12.0, &delays).unwrap();
        assert!(scan.asymmetry() > 1e-3);
    }

    #[test]
    fn convolution_route_agrees() {
        let s = setup(source(0.8)).with_sample(Some(model_sample()));
        let a = s.response(12.0).unwrap();
        let b = s.response_by_convolution(12.0).unwrap();
        let err = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        assert!(err < 1e-3 * a.max_abs(), "{err}");
    }

    #[test]
    fn narrowband_triangle() {
        let amp = BiphotonAmplitude::NarrowbandSinc(NarrowbandSinc::new(12.0, 10.0).unwrap());
        let band = FrequencyGrid::new(6.0, 10.0, 4097).unwrap();
        let s = HomSetup::new(amp, band, BeamSplitter::balanced(0.0).unwrap()).unwrap();
        let delays = s.time_grid().delay_axis(0.5, 61).unwrap();
        let scan = s.scan_delta(12.0, &delays).unwrap();
        for (d, p) in delays.points().iter().zip(scan.normalized()) {
            let expect = 1.0 - (1.0 - (d / 10.0).abs()).max(0.0);
            assert!((p - expect).abs() < 0.01, "{d} {p} {expect}");
        }
    }

    #[test]
    fn map_without_matter_is_flat_in_pump() {
        let s = setup(source(0.8));
        let delays = s.time_grid().delay_axis(1.0, 21).unwrap();
        let pumps = FrequencyGrid::new(12.0, 0.5, 5).unwrap();
        let map = s.scan_2d(&delays, &pumps).unwrap();
        for i in 1..5 {
            for j in 0..21 {
                assert!((map.values[(i, j)] - map.values[(0, j)]).abs() < 1e-10 * map.n0[0]);
            }
        }
        assert!(map.min_value() > -1e-12 * map.n0[0]);
    }

    #[test]
    fn feature_sits_at_twice_final_state_energy() {
        let bare = setup(source(0.8));
        let with = bare.with_sample(Some(model_sample()));
        let delays = bare.time_grid().delay_axis(1.0, 41).unwrap();
        let pumps = FrequencyGrid::new(12.0, 1.0, 21).unwrap();
        let m = with.scan_2d(&delays, &pumps).unwrap();
        let b = bare.scan_2d(&delays, &pumps).unwrap();
        assert!((m.feature_center(&b).unwrap() - 12.0).abs() < 1e-9);
    }
}
