//! Mach-Zehnder readout with the sample treated as a linear filter, and the
//! single-detector counts behind a HOM splitter.

use num_complex::Complex64 as C64;

use super::{beam_splitter_matrix, BeamSplitter};
use crate::biphoton::SampledJsa;
use crate::error::{Error, Result};
use crate::matter::Sample;
use crate::numerics::{FrequencyGrid, Spectrum};

/// What enters the interferometer.
#[derive(Debug, Clone, Copy)]
pub enum MziInput<'a> {
    /// One photon with spectral amplitude `psi(w)` in port `a`.
    Photon(&'a Spectrum),
    /// A photon pair, photon `a` in port `a` and photon `b` in port `b`.
    Pair(&'a SampledJsa),
}

fn densities(input: &MziInput) -> (FrequencyGrid, Vec<f64>, Vec<f64>) {
    match input {
        MziInput::Photon(s) => (*s.grid(), s.values().iter().map(|v| v.norm_sqr()).collect(), vec![0.0; s.len()]),
        MziInput::Pair(j) => (*j.grid(), j.marginal_a(), j.marginal_b()),
    }
}

fn filter(sample: Option<&Sample>, omega: f64) -> Result<C64> {
    match sample {
        Some(s) => s.transmission(omega),
        None => Ok(C64::new(1.0, 0.0)),
    }
}

/// `<n_b''> - <n_a''>` at the output of a balanced Mach-Zehnder whose arm
/// `a'` carries the phase element `e^(i phase(w))` and arm `b'` the sample
/// filter `T(w)`; the second splitter is displaced by `bs.delay()`.
///
/// First splitter `[[sqrt T, i sqrt R], [i sqrt R, sqrt T]]`, second
/// `a'' = sqrt T a' - i sqrt R e^(-i w D) b'`, `b'' = sqrt T b' - i sqrt R e^(i w D) a'`.
pub fn mzi_number_difference(
    input: &MziInput,
    sample: Option<&Sample>,
    phase: impl Fn(f64) -> f64,
    bs: &BeamSplitter,
) -> Result<f64> {
    if !bs.is_balanced() {
        return Err(Error::Unsupported(
            "the linear-filter interferometer is modelled for a balanced splitter only".into(),
        ));
    }
    let (grid, rho_a, rho_b) = densities(input);
    let (t, r) = (bs.transmittance().sqrt(), bs.reflectance().sqrt());
    let i = C64::i();
    let mut diff = 0.0;
    for (k, w) in grid.points().into_iter().enumerate() {
        let arm_a = C64::from_polar(1.0, phase(w));
        let arm_b = filter(sample, w)?;
        let late = C64::from_polar(1.0, -w * bs.delay());
        let early = C64::from_polar(1.0, w * bs.delay());
        // (a', b') amplitudes after the first splitter for a photon in port a, then port b
        for (rho, (ap, bp)) in [(rho_a[k], (C64::new(t, 0.0), i * r)), (rho_b[k], (i * r, C64::new(t, 0.0)))] {
            if rho == 0.0 {
                continue;
            }
            let (ap, bp) = (ap * arm_a, bp * arm_b);
            let out_a = t * ap - i * r * late * bp;
            let out_b = t * bp - i * r * early * ap;
            diff += rho * (out_b.norm_sqr() - out_a.norm_sqr());
        }
    }
    Ok(diff * grid.step())
}

/// Mean counts `(<n_a>, <n_b>)` at the two detectors behind the displaced
/// splitter for a photon pair, with the sample filter in arm `a`.
pub fn singles(jsa: &SampledJsa, sample: Option<&Sample>, bs: &BeamSplitter) -> Result<(f64, f64)> {
    let (grid, rho_a, rho_b) = densities(&MziInput::Pair(jsa));
    let mut n = (0.0, 0.0);
    for (k, w) in grid.points().into_iter().enumerate() {
        let u = beam_splitter_matrix(bs, w);
        let ra = rho_a[k] * filter(sample, w)?.norm_sqr();
        n.0 += u[(0, 0)].norm_sqr() * ra + u[(0, 1)].norm_sqr() * rho_b[k];
        n.1 += u[(1, 0)].norm_sqr() * ra + u[(1, 1)].norm_sqr() * rho_b[k];
    }
    Ok((n.0 * grid.step(), n.1 * grid.step()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biphoton::{BiphotonAmplitude, GaussianBiphotonParams};
    use crate::matter::FourLevelSystem;

    fn photon(center: f64, width: f64) -> Spectrum {
        let grid = FrequencyGrid::new(center, 8.0 * width, 801).unwrap();
        let s =
            Spectrum::from_fn(grid, |w| C64::new((-(w - center).powi(2) / (4.0 * width * width)).exp(), 0.0)).unwrap();
        let norm = s.energy().sqrt();
        s.scaled(C64::new(1.0 / norm, 0.0))
    }

    #[test]
    fn flat_filters_send_everything_to_one_port() {
        let p = photon(6.0, 0.1);
        let s =
            mzi_number_difference(&MziInput::Photon(&p), None, |_| 0.0, &BeamSplitter::balanced(0.0).unwrap()).unwrap();
        assert!((s + 1.0).abs() < 1e-12);
    }

    #[test]
    fn fringes_follow_carrier() {
        let p = photon(6.0, 1e-4);
        for d in [0.1, 0.37, 1.3] {
            let s = mzi_number_difference(&MziInput::Photon(&p), None, |_| 0.0, &BeamSplitter::balanced(d).unwrap())
                .unwrap();
            assert!((s + (6.0 * d).cos()).abs() < 1e-6, "{d}");
        }
    }

    #[test]
    fn unbalanced_rejected() {
        let p = photon(6.0, 0.1);
        let bs = BeamSplitter::new(0.3, 0.7, 0.0).unwrap();
        assert!(mzi_number_difference(&MziInput::Photon(&p), None, |_| 0.0, &bs).is_err());
    }

    #[test]
    fn weak_absorber_shift_is_linear() {
        let sys = FourLevelSystem::model();
        let p = photon(6.0, 0.1);
        let bs = BeamSplitter::balanced(0.2).unwrap();
        let shift = |a0: f64| {
            let s = Sample::new(sys, sys.resonant_drive(), a0).unwrap();
            mzi_number_difference(&MziInput::Photon(&p), Some(&s), |_| 0.0, &bs).unwrap()
                - mzi_number_difference(&MziInput::Photon(&p), None, |_| 0.0, &bs).unwrap()
        };
        let h = 1e-7;
        let (s1, s2) = (shift(h), shift(2.0 * h));
        assert!(s1.abs() > 0.0);
        assert!((s2 / s1 - 2.0).abs() < 1e-3);
    }

    #[test]
    fn singles_sum_to_two_and_ignore_delay() {
        let amp = BiphotonAmplitude::Gaussian(GaussianBiphotonParams::new(12.0, 0.1, 0.8).unwrap());
        let jsa = SampledJsa::sample_centered(&amp, 4.0, 128).unwrap().normalized().unwrap();
        let base = singles(&jsa, None, &BeamSplitter::balanced(0.0).unwrap()).unwrap();
        assert!((base.0 + base.1 - 2.0).abs() < 1e-10);
        for d in [-3.0, 0.5, 7.0] {
            let n = singles(&jsa, None, &BeamSplitter::new(0.3, 0.7, d).unwrap()).unwrap();
            assert!((n.0 + n.1 - 2.0).abs() < 1e-10);
        }
    }
}
