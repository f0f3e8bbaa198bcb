//! Schmidt modes of a sampled two-photon amplitude, their temporal
//! counterparts, the broadband coincidence built from them and pulse
//! reshaping by mode reweighting.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::biphoton::SampledJsa;
use crate::error::{Error, Result};
use crate::hom::{BeamSplitter, SignalScale};
use crate::numerics::{convolve, fourier_to_time, FrequencyGrid, Spectrum, TimeGrid, TimeSignal};

/// Allowed departure of `sum |Phi|^2 dw^2` from one.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Largest fraction of `|Phi|^2` tolerated on the outer ring of the grid.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// `(kappa_a, kappa_b)` with `kappa_a(w, w') = \int dw_b Phi(w, w_b) Phi*(w', w_b)`
/// and `kappa_b(w, w') = \int dw_a Phi(w_a, w) Phi*(w_a, w')`.
pub fn kernels(jsa: &SampledJsa) -> Result<(DMatrix<C64>, DMatrix<C64>)> {
    require_normalized(jsa)?;
    let dw = C64::new(jsa.grid().step(), 0.0);
    let phi = jsa.values();
    let ka = phi * phi.adjoint() * dw;
    let kb = phi.transpose() * phi.conjugate() * dw;
    Ok((ka, kb))
}

fn require_normalized(jsa: &SampledJsa) -> Result<()> {
    if !jsa.is_normalized(NORMALIZATION_TOL) {
        return Err(Error::NotNormalized { norm: jsa.norm_sq() });
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtOptions {
    /// Modes with `lambda_n` below this are dropped (the leading mode is
    /// always kept). Zero keeps the full numerical rank.
    pub truncation: f64,
    /// Bound on the full-rank reconstruction error and on the eigen-relation
    /// residual.
    pub tolerance: f64,
}

impl Default for SchmidtOptions {
    fn default() -> Self {
        Self { truncation: 1e-8, tolerance: 1e-6 }
    }
}

impl SchmidtOptions {
    pub fn full_rank() -> Self {
        Self { truncation: 0.0, ..Self::default() }
    }
}

/// `Phi(w_a, w_b) = sum_n sqrt(lambda_n) psi_n(w_a) phi_n(w_b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtDecomposition {
    grid: FrequencyGrid,
    weights: Vec<f64>,
    modes_a: Vec<Spectrum>,
    modes_b: Vec<Spectrum>,
    discarded_weight: f64,
    reconstruction_error: f64,
    eigen_residual: f64,
}

impl SchmidtDecomposition {
    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    /// Descending `lambda_n` of the retained modes.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn modes_a(&self) -> &[Spectrum] {
        &self.modes_a
    }

    pub fn modes_b(&self) -> &[Spectrum] {
        &self.modes_b
    }

    /// Number of retained modes.
    pub fn truncation(&self) -> usize {
        self.weights.len()
    }

    /// Sum of the dropped weights.
    pub fn discarded_weight(&self) -> f64 {
        self.discarded_weight
    }

    /// `||Phi - sum sqrt(lambda) psi phi|| / ||Phi||` for the retained modes.
    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    /// Largest `||kappa_a psi_n - lambda_n psi_n||` over retained modes.
    pub fn eigen_residual(&self) -> f64 {
        self.eigen_residual
    }

    /// The amplitude rebuilt from the retained modes.
    pub fn reconstruct(&self) -> DMatrix<C64> {
        let n = self.grid.len();
        let mut m = DMatrix::zeros(n, n);
        for (k, w) in self.weights.iter().enumerate() {
            let a = nalgebra::DVector::from_column_slice(self.modes_a[k].values());
            let b = nalgebra::DVector::from_column_slice(self.modes_b[k].values());
            m += a * b.transpose() * C64::new(w.sqrt(), 0.0);
        }
        m
    }

    /// Copy keeping only the leading `n` modes.
    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.weights.len() {
            return Err(Error::param("modes", format!("need 1..={} modes, got {n}", self.weights.len())));
        }
        let mut d = self.clone();
        d.discarded_weight += d.weights[n..].iter().sum::<f64>();
        d.weights.truncate(n);
        d.modes_a.truncate(n);
        d.modes_b.truncate(n);
        Ok(d)
    }
}

/// Singular-value factorization of `Phi dw`; `lambda_n` are the squared
/// singular values and the modes are normalized under `sum |.|^2 dw`.
///
/// Each `psi_n` is rotated so its largest-magnitude sample is real and
/// positive; `phi_n` takes the opposite phase.
pub fn schmidt_decompose(jsa: &SampledJsa, options: &SchmidtOptions) -> Result<SchmidtDecomposition> {
    require_normalized(jsa)?;
    let edge = jsa.boundary_fraction();
    if edge > BOUNDARY_TOL {
        return Err(Error::GridTooCoarse(format!(
            "{edge:.3e} of the amplitude lies on the grid boundary; widen the band"
        )));
    }
    let grid = *jsa.grid();
    let dw = grid.step();
    let m = jsa.values() * C64::new(dw, 0.0);
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("left vectors requested");
    let v_t = svd.v_t.as_ref().expect("right vectors requested");

    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));

    let scale = 1.0 / dw.sqrt();
    let mut weights = Vec::new();
    let mut modes_a = Vec::new();
    let mut modes_b = Vec::new();
    let mut discarded = 0.0;
    for (rank, &k) in order.iter().enumerate() {
        let s = svd.singular_values[k];
        let lambda = s * s;
        if rank > 0 && lambda < options.truncation {
            discarded += lambda;
            continue;
        }
        let mut psi: Vec<C64> = u.column(k).iter().map(|x| x * scale).collect();
        // V^H row k holds conj(V[:, k])
        let mut phi: Vec<C64> = v_t.row(k).iter().map(|x| x * scale).collect();
        let peak = psi.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())).unwrap_or_default();
        if peak.norm() > 0.0 {
            let rot = (peak / peak.norm()).conj();
            psi.iter_mut().for_each(|x| *x *= rot);
            phi.iter_mut().for_each(|x| *x /= rot);
        }
        weights.push(lambda);
        modes_a.push(Spectrum::new(grid, psi)?);
        modes_b.push(Spectrum::new(grid, phi)?);
    }

    let mut d = SchmidtDecomposition {
        grid,
        weights,
        modes_a,
        modes_b,
        discarded_weight: discarded,
        reconstruction_error: 0.0,
        eigen_residual: 0.0,
    };
    let norm = jsa.values().norm();
    d.reconstruction_error = (jsa.values() - d.reconstruct()).norm() / norm;
    if discarded == 0.0 && d.reconstruction_error > options.tolerance {
        return Err(Error::GridTooCoarse(format!(
            "full-rank reconstruction error {:.3e} exceeds {:.1e}",
            d.reconstruction_error, options.tolerance
        )));
    }

    let mmh = &m * m.adjoint();
    for (k, lambda) in d.weights.iter().enumerate() {
        let psi = nalgebra::DVector::from_column_slice(d.modes_a[k].values());
        let r = (&mmh * &psi - &psi * C64::new(*lambda, 0.0)).norm() * dw.sqrt();
        d.eigen_residual = d.eigen_residual.max(r);
    }
    if d.eigen_residual > options.tolerance {
        return Err(Error::GridTooCoarse(format!(
            "mode eigen-relation residual {:.3e} exceeds {:.1e}",
            d.eigen_residual, options.tolerance
        )));
    }
    Ok(d)
}

/// `K = 1 / sum lambda_n^2`
pub fn schmidt_number(d: &SchmidtDecomposition) -> f64 {
    schmidt_number_of(d.weights())
}

pub fn schmidt_number_of(weights: &[f64]) -> f64 {
    1.0 / weights.iter().map(|w| w * w).sum::<f64>()
}

/// `u_n(t)`, `v_n(t)`: transforms of `psi_n`, `phi_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalModes {
    pub grid: TimeGrid,
    pub u: Vec<TimeSignal>,
    pub v: Vec<TimeSignal>,
}

impl TemporalModes {
    pub fn aliased(&self) -> bool {
        self.u.iter().chain(&self.v).any(|m| m.aliased())
    }
}

/// `tgrid` must be the grid conjugate to the decomposition's band.
pub fn temporal_modes(d: &SchmidtDecomposition, tgrid: &TimeGrid) -> Result<TemporalModes> {
    if !d.grid.conjugate().same_as(tgrid) {
        return Err(Error::GridMismatch(format!(
            "temporal modes live on the {}-point grid with step {}",
            d.grid.len(),
            d.grid.conjugate().step()
        )));
    }
    let u = d.modes_a.iter().map(fourier_to_time).collect::<Result<Vec<_>>>()?;
    let v = d.modes_b.iter().map(fourier_to_time).collect::<Result<Vec<_>>>()?;
    Ok(TemporalModes { grid: *tgrid, u, v })
}

/// Two-time amplitude `A(t_a, t_b) = sum_k sqrt(lambda_k) u~_k(t_a) v_k(t_b)`
/// after arm `a` has passed the filter `chi` (`None` is `delta(t)`).
#[derive(Debug, Clone)]
pub struct TwoTimeAmplitude {
    weights: Vec<f64>,
    u: Vec<TimeSignal>,
    v: Vec<TimeSignal>,
}

impl TwoTimeAmplitude {
    pub fn new(d: &SchmidtDecomposition, modes: &TemporalModes, chi: Option<&TimeSignal>) -> Result<Self> {
        if modes.u.len() != d.weights.len() {
            return Err(Error::GridMismatch("temporal modes do not match the decomposition".into()));
        }
        let u = match chi {
            None => modes.u.clone(),
            Some(c) => modes.u.iter().map(|u| convolve(u, c)).collect::<Result<_>>()?,
        };
        Ok(Self { weights: d.weights.clone(), u, v: modes.v.clone() })
    }

    pub fn at(&self, ta: f64, tb: f64) -> Result<C64> {
        let mut sum = C64::new(0.0, 0.0);
        for (k, w) in self.weights.iter().enumerate() {
            sum += w.sqrt() * self.u[k].at_time(ta)? * self.v[k].at_time(tb)?;
        }
        Ok(sum)
    }
}

/// Time of the largest `|v_0|`.
pub fn default_observation_time(modes: &TemporalModes) -> Result<f64> {
    let v0 = modes.v.first().ok_or_else(|| Error::param("modes", "no retained modes"))?;
    let (j, _) =
        v0.values().iter().enumerate().max_by(|a, b| a.1.norm().total_cmp(&b.1.norm())).expect("non-empty grid");
    Ok(modes.grid.point(j))
}

/// Broadband coincidence at detection times `t + tau` (detector `a`) and `t`
/// (detector `b`) for the splitter delay `bs.delay()`:
///
/// `P0 { T^2 |A(t+tau, t)|^2 + R^2 |A(t+D, t+tau-D)|^2 - RT [A*(t+tau, t) A(t+D, t+tau-D) + c.c.] }`
///
/// Only the `a`-branch modes see `chi`. `t` defaults to
/// [`default_observation_time`]; all times must sit on the lattice.
pub fn broadband_coincidence(
    d: &SchmidtDecomposition,
    modes: &TemporalModes,
    chi: Option<&TimeSignal>,
    bs: &BeamSplitter,
    scale: &SignalScale,
    t: Option<f64>,
    tau: f64,
) -> Result<f64> {
    let amp = TwoTimeAmplitude::new(d, modes, chi)?;
    let t = match t {
        Some(t) => t,
        None => default_observation_time(modes)?,
    };
    broadband_from_amplitude(&amp, bs, scale, t, tau)
}

pub fn broadband_from_amplitude(
    amp: &TwoTimeAmplitude,
    bs: &BeamSplitter,
    scale: &SignalScale,
    t: f64,
    tau: f64,
) -> Result<f64> {
    let delay = bs.delay();
    let direct = amp.at(t + tau, t)?;
    let crossed = amp.at(t + delay, t + tau - delay)?;
    let (tt, r) = (bs.transmittance(), bs.reflectance());
    Ok(scale.value()
        * (tt * tt * direct.norm_sqr() + r * r * crossed.norm_sqr() - 2.0 * r * tt * (direct.conj() * crossed).re))
}

/// What the reweighted modes should synthesize.
#[derive(Debug, Clone, Copy)]
pub enum PulseTarget<'a> {
    /// Project an envelope `A(w)` sampled on the decomposition grid.
    Envelope(&'a Spectrum),
    /// Approach `delta(w - w_s)`: `a_n = psi_n*(w_s)`.
    ScanFrequency(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReshapedPulse {
    pub coefficients: Vec<C64>,
    pub profile: Spectrum,
    /// `||A - synthesis|| / ||A||` for an envelope target.
    pub residual: Option<f64>,
}

/// Reweights the leading `n_modes` `psi_n` toward `target`.
pub fn reshape_pulse(d: &SchmidtDecomposition, target: PulseTarget, n_modes: usize) -> Result<ReshapedPulse> {
    if n_modes == 0 {
        return Err(Error::param("n_modes", "at least one mode is needed"));
    }
    if n_modes > d.truncation() {
        return Err(Error::param(
            "n_modes",
            format!("only {} modes are retained, asked for {n_modes}", d.truncation()),
        ));
    }
    let dw = d.grid.step();
    let modes = &d.modes_a[..n_modes];
    let coefficients: Vec<C64> = match target {
        PulseTarget::Envelope(a) => {
            if !a.grid().same_as(&d.grid) {
                return Err(Error::GridMismatch("target envelope must share the decomposition grid".into()));
            }
            modes
                .iter()
                .map(|m| m.values().iter().zip(a.values()).map(|(p, x)| p.conj() * x).sum::<C64>() * dw)
                .collect()
        }
        PulseTarget::ScanFrequency(ws) => {
            let k = d.grid.nearest_index(ws).ok_or(Error::OutOfRange {
                value: ws,
                min: d.grid.start(),
                max: d.grid.point(d.grid.len() - 1),
            })?;
            modes.iter().map(|m| m.values()[k].conj()).collect()
        }
    };
    let mut values = vec![C64::new(0.0, 0.0); d.grid.len()];
    for (c, m) in coefficients.iter().zip(modes) {
        for (v, p) in values.iter_mut().zip(m.values()) {
            *v += c * p;
        }
    }
    let profile = Spectrum::new(d.grid, values)?;
    let residual = match target {
        PulseTarget::Envelope(a) => {
            let norm = a.energy().sqrt();
            if norm == 0.0 {
                return Err(Error::param("target", "envelope is identically zero"));
            }
            let diff: f64 = a.values().iter().zip(profile.values()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() * dw;
            Some(diff.sqrt() / norm)
        }
        PulseTarget::ScanFrequency(_) => None,
    };
    Ok(ReshapedPulse { coefficients, profile, residual })
}
