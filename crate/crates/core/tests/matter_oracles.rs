use homspec_core::matter::{chi3, chi3_photon, chi3_time, phase_matching_factor, FourLevelSystem, MoleculeCloud};
use homspec_core::numerics::{fourier_to_time, FrequencyGrid, Spectrum, TimeGrid};
use homspec_core::C64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn closed_form_matches_sampled_transform() {
    let sys = FourLevelSystem::model();
    let drive = sys.resonant_drive();
    let band = FrequencyGrid::new(6.0, 200.0, 1 << 16).unwrap();
    let spec = Spectrum::from_fn(band, |w| chi3_photon(&sys, &drive, w).unwrap()).unwrap();
    let fft = fourier_to_time(&spec).unwrap();
    let exact = chi3_time(&sys, &drive, fft.grid()).unwrap();
    let peak = exact.max_abs();
    for t in [2.0, 5.0, 10.0, 40.0] {
        let tt = (t / fft.grid().step()).round() * fft.grid().step();
        let diff = (fft.at_time(tt).unwrap() - exact.at_time(tt).unwrap()).norm();
        assert!(diff < 1e-2 * peak, "t = {tt}: {diff}");
    }
}

#[test]
fn lorentzian_fit_of_photon_response() {
    let sys = FourLevelSystem::model();
    let drive = sys.resonant_drive();
    // |chi|^-2 is a parabola a (w - c)^2 + b for a Lorentzian; least squares fit
    let pts: Vec<f64> = (0..201).map(|i| 5.8 + 0.002 * i as f64).collect();
    let y: Vec<f64> = pts.iter().map(|&w| chi3_photon(&sys, &drive, w).unwrap().norm_sqr().recip()).collect();
    let n = pts.len() as f64;
    let (sx, sx2, sx3, sx4) =
        pts.iter().fold((0.0, 0.0, 0.0, 0.0), |a, &x| (a.0 + x, a.1 + x * x, a.2 + x.powi(3), a.3 + x.powi(4)));
    let (sy, sxy, sx2y) =
        pts.iter().zip(&y).fold((0.0, 0.0, 0.0), |a, (&x, &v)| (a.0 + v, a.1 + x * v, a.2 + x * x * v));
    let m = nalgebra::Matrix3::new(sx4, sx3, sx2, sx3, sx2, sx, sx2, sx, n);
    let coef = m.lu().solve(&nalgebra::Vector3::new(sx2y, sxy, sy)).unwrap();
    let center = -coef[1] / (2.0 * coef[0]);
    let floor = coef[2] - coef[0] * center * center;
    let half_width = (floor / coef[0]).sqrt();
    assert!((center - 6.0).abs() < 1e-3);
    assert!((half_width - sys.gamma_fg).abs() < 0.01 * sys.gamma_fg);
    let resid = pts
        .iter()
        .zip(&y)
        .map(|(&x, &v)| ((coef[0] * x * x + coef[1] * x + coef[2]) - v).abs() / v)
        .fold(0.0, f64::max);
    assert!(resid < 0.01);
}

fn fitted_decay(sys: &FourLevelSystem) -> f64 {
    let grid = TimeGrid::from_step(0.05, 1 << 14).unwrap();
    let chi = chi3_time(sys, &sys.resonant_drive(), &grid).unwrap();
    let pts: Vec<(f64, f64)> = grid
        .points()
        .into_iter()
        .zip(chi.values())
        .filter(|(t, v)| *t > 0.5 && v.norm() > 1e-6 * chi.max_abs())
        .map(|(t, v)| (t, v.norm().ln()))
        .collect();
    let n = pts.len() as f64;
    let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    -num / den
}

#[test]
fn decay_rate_tracks_final_dephasing() {
    let sys = FourLevelSystem::model();
    let rate = fitted_decay(&sys);
    assert!((rate - sys.gamma_fg).abs() < 0.05 * sys.gamma_fg);
    let doubled = sys.with_dephasing(sys.gamma_e1g, sys.gamma_e2g, 2.0 * sys.gamma_fg).unwrap();
    assert!((fitted_decay(&doubled) / rate - 2.0).abs() < 0.05);
}

#[test]
fn random_cloud_washes_out_phase_matching() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let side = 1.0;
    let positions: Vec<[f64; 3]> =
        (0..10_000).map(|_| [rng.gen_range(0.0..side), rng.gen_range(0.0..side), rng.gen_range(0.0..side)]).collect();
    let dir = [0.48, 0.6, 0.64];
    let delta_k = dir.map(|c| c * 100.0 / side);
    let f = phase_matching_factor(&MoleculeCloud { positions: positions.clone(), delta_k }).unwrap();
    assert!(f.norm() <= 0.1, "{}", f.norm());
    let f0 = phase_matching_factor(&MoleculeCloud { positions, delta_k: [0.0; 3] }).unwrap();
    assert_eq!(f0, C64::new(1.0, 0.0));
}

proptest! {
    #[test]
    fn susceptibility_is_finite(
        g in prop::array::uniform3(1e-4f64..1.0),
        w in prop::array::uniform3(-20.0f64..20.0),
    ) {
        let sys = FourLevelSystem::model().with_dephasing(g[0], g[1], g[2]).unwrap();
        let v = chi3(&sys, w[0], w[1], w[2]).unwrap();
        prop_assert!(v.re.is_finite() && v.im.is_finite());
    }

    #[test]
    fn phase_matching_bounded(seed in any::<u64>(), n in 1usize..200, k in prop::array::uniform3(-50.0f64..50.0)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let positions = (0..n).map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)]).collect();
        let f = phase_matching_factor(&MoleculeCloud { positions, delta_k: k }).unwrap();
        prop_assert!(f.norm() <= 1.0 + 1e-12);
    }

    #[test]
    fn response_is_causal(
        g in prop::array::uniform3(0.02f64..0.5),
        e in prop::array::uniform3(0.5f64..4.0),
        detune in -0.3f64..0.3,
    ) {
        let sys = FourLevelSystem::new(e[0], e[1], e[2]).unwrap().with_dephasing(g[0], g[1], g[2]).unwrap();
        let drive = homspec_core::matter::ClassicalDrive::new(e[0] + detune, e[1]).unwrap();
        let grid = TimeGrid::from_step(0.05, 4096).unwrap();
        let chi = chi3_time(&sys, &drive, &grid).unwrap();
        let neg = chi.values()[..grid.origin()].iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(neg <= 1e-6 * chi.max_abs());
    }
}
