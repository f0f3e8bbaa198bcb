use std::f64::consts::PI;

use homspec_core::biphoton::{BiphotonAmplitude, GaussianBiphotonParams, NarrowbandSinc};
use homspec_core::hom::{
    beam_splitter_matrix, coincidence_integrated, coincidence_tau, convolved_response, scan_delta, BeamSplitter,
    HomSetup, SignalScale,
};
use homspec_core::matter::{FourLevelSystem, Sample};
use homspec_core::numerics::{FrequencyGrid, TimeGrid, TimeSignal};
use homspec_core::C64;
use proptest::prelude::*;

fn gaussian(sigma_minus: f64) -> BiphotonAmplitude {
    BiphotonAmplitude::Gaussian(GaussianBiphotonParams::new(12.0, 0.1, sigma_minus).unwrap())
}

fn model_sample(depth: f64) -> Sample {
    let sys = FourLevelSystem::model();
    Sample::new(sys, sys.resonant_drive(), Sample::coupling_for_depth(&sys, depth)).unwrap()
}

/// Overlap in the frequency picture, `\int dv c*(v) c(-v) e^(2 i v D)` with
/// `v` measured from `pump / 2`, followed by the same background algebra.
fn frequency_picture(setup: &HomSetup, pump: f64, delay: f64) -> (f64, f64) {
    let spec = setup.response_spectrum(pump).unwrap();
    let grid = spec.grid();
    let n = grid.len();
    let dv = grid.step();
    let c = spec.values();
    let mut o = C64::new(0.0, 0.0);
    for k in 0..n {
        let v = grid.point(k) - 0.5 * pump;
        o += c[k].conj() * c[n - 1 - k] * C64::from_polar(1.0, 2.0 * v * delay);
    }
    o *= dv;
    let norm: f64 = c.iter().map(|x| x.norm_sqr()).sum::<f64>() * dv;
    let (t, r) = (setup.splitter.transmittance(), setup.splitter.reflectance());
    let n0 = (r * r + t * t) * norm;
    (n0 - 2.0 * r * t * o.re, n0)
}

#[test]
fn time_and_frequency_pictures_agree() {
    let band = FrequencyGrid::new(6.0, 4.0, 1025).unwrap();
    let setup = HomSetup::new(gaussian(0.8), band, BeamSplitter::new(0.4, 0.6, 0.0).unwrap())
        .unwrap()
        .with_sample(Some(model_sample(0.5)));
    let delays = setup.time_grid().delay_axis(1.5, 21).unwrap();
    for pump in [11.7, 12.0, 12.4] {
        let scan = setup.scan_delta(pump, &delays).unwrap();
        for (d, p) in delays.points().into_iter().zip(&scan.values) {
            let (expect, n0) = frequency_picture(&setup, pump, d);
            assert!((p - expect).abs() < 1e-9 * n0, "pump {pump} delay {d}: {p} vs {expect}");
        }
    }
}

/// `G(t)` of the narrowband sinc by direct quadrature of its spectrum, then
/// the integrated coincidence by direct quadrature in `t`.
fn brute_force_triangle(t_ent: f64, delay: f64) -> f64 {
    let band = 60.0 / t_ent;
    let nw = 24001;
    let dw = 2.0 * band / (nw - 1) as f64;
    let g = |t: f64| -> f64 {
        let mut s = 0.0;
        for k in 0..nw {
            let v = -band + k as f64 * dw;
            let x = v * t_ent;
            let sinc = if x == 0.0 { 1.0 } else { x.sin() / x };
            s += sinc * (v * t).cos();
        }
        s * dw / (2.0 * PI).sqrt()
    };
    let dt = 0.05;
    let span = 2.0 * t_ent + 2.0 * delay.abs();
    let nt = (2.0 * span / dt) as usize;
    let (mut overlap, mut norm) = (0.0, 0.0);
    for j in 0..=nt {
        let s = -span + j as f64 * dt;
        let gs = g(s);
        overlap += gs * g(2.0 * delay - s);
        norm += gs * gs;
    }
    1.0 - overlap / norm
}

#[test]
fn narrowband_dip_matches_brute_force() {
    let t_ent = 4.0;
    let amp = BiphotonAmplitude::NarrowbandSinc(NarrowbandSinc::new(12.0, t_ent).unwrap());
    let band = FrequencyGrid::new(6.0, 15.0, 4097).unwrap();
    let setup = HomSetup::new(amp, band, BeamSplitter::balanced(0.0).unwrap()).unwrap();
    let tg = setup.time_grid();
    let delays = tg.delay_axis(0.8, 13).unwrap();
    let scan = setup.scan_delta(12.0, &delays).unwrap();
    for (d, p) in delays.points().into_iter().zip(scan.normalized()) {
        let oracle = brute_force_triangle(t_ent, d);
        assert!((p - oracle).abs() < 5e-3, "delay {d}: {p} vs {oracle}");
        let triangle = 1.0 - (1.0 - (d / t_ent).abs()).max(0.0);
        assert!((oracle - triangle).abs() < 1e-2);
    }
}

#[test]
fn rectangle_through_exponential_closed_form() {
    let grid = TimeGrid::from_step(0.01, 8192).unwrap();
    let (w, g) = (2.0, 0.7);
    let rect = TimeSignal::from_fn(grid, |t| C64::new(if t.abs() < w / 2.0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
    let chi = TimeSignal::from_fn(grid, |t| C64::new(if t >= 0.0 { (-g * t).exp() } else { 0.0 }, 0.0)).unwrap();
    let c = convolved_response(&rect, &chi).unwrap();
    let exact = |t: f64| {
        if t < -w / 2.0 {
            0.0
        } else if t < w / 2.0 {
            (1.0 - (-g * (t + w / 2.0)).exp()) / g
        } else {
            ((-g * (t - w / 2.0)).exp() - (-g * (t + w / 2.0)).exp()) / g
        }
    };
    for t in [-3.0, -0.5, 0.0, 0.37, 2.5, 6.0] {
        assert!((c.at_time(t).unwrap().re - exact(t)).abs() < 2e-2, "{t}");
    }
}

#[test]
fn far_delays_return_to_background() {
    let band = FrequencyGrid::new(6.0, 5.0, 2049).unwrap();
    let setup = HomSetup::new(gaussian(0.8), band, BeamSplitter::balanced(0.0).unwrap())
        .unwrap()
        .with_sample(Some(model_sample(0.5)));
    let delays = setup.time_grid().delay_axis(50.0, 7).unwrap();
    let scan = setup.scan_delta(12.0, &delays).unwrap();
    assert!(!scan.edge_warning);
    assert!((scan.values[0] / scan.n0 - 1.0).abs() < 1e-4);
    assert!((scan.values[6] / scan.n0 - 1.0).abs() < 1e-4);
}

#[test]
fn scans_do_not_depend_on_thread_count() {
    let band = FrequencyGrid::new(6.0, 4.0, 513).unwrap();
    let setup = HomSetup::new(gaussian(0.8), band, BeamSplitter::balanced(0.0).unwrap())
        .unwrap()
        .with_sample(Some(model_sample(0.5)));
    let delays = setup.time_grid().delay_axis(1.0, 31).unwrap();
    let pumps = FrequencyGrid::new(12.0, 1.0, 9).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| setup.scan_2d(&delays, &pumps).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(1));
    assert_eq!(one, run(4));
}

#[test]
fn entangled_feature_is_narrower() {
    let band = FrequencyGrid::new(6.0, 5.0, 2049).unwrap();
    let widths: Vec<f64> = [0.2, 0.8]
        .iter()
        .map(|&sm| {
            let bare = HomSetup::new(gaussian(sm), band, BeamSplitter::balanced(0.0).unwrap()).unwrap();
            let with = bare.with_sample(Some(model_sample(0.5)));
            let delays = bare.time_grid().delay_axis(1.0, 121).unwrap();
            let pumps = FrequencyGrid::new(12.0, 1.0, 11).unwrap();
            let b = bare.scan_2d(&delays, &pumps).unwrap();
            let m = with.scan_2d(&delays, &pumps).unwrap();
            assert!((m.feature_center(&b).unwrap() - 12.0).abs() < 1e-9);
            m.feature_fwhm(&b).unwrap()
        })
        .collect();
    assert!(widths[1] < widths[0], "{widths:?}");
}

proptest! {
    #[test]
    fn splitter_is_unitary(t in 0.0f64..=1.0, delay in -50.0f64..50.0, w in -20.0f64..20.0) {
        let bs = BeamSplitter::new(t, 1.0 - t, delay).unwrap();
        let u = beam_splitter_matrix(&bs, w);
        let err = (u.adjoint() * u - nalgebra::Matrix2::identity()).norm();
        prop_assert!(err < 1e-14);
    }

    #[test]
    fn lossy_splitters_rejected(t in 0.0f64..1.0, excess in 1e-9f64..0.5) {
        prop_assert!(BeamSplitter::new(t, 1.0 - t + excess, 0.0).is_err());
    }

    #[test]
    fn bare_dip_is_even(sm in 0.15f64..1.0, sp in 0.05f64..0.5, pump in 11.0f64..13.0) {
        let amp = BiphotonAmplitude::Gaussian(GaussianBiphotonParams::new(pump, sp, sm).unwrap());
        let band = FrequencyGrid::new(6.0, 6.0 * sm.max(0.5), 513).unwrap();
        let setup = HomSetup::new(amp, band, BeamSplitter::balanced(0.0).unwrap()).unwrap();
        let delays = setup.time_grid().delay_axis(0.7, 25).unwrap();
        let scan = setup.scan_delta(pump, &delays).unwrap();
        prop_assert!(scan.max_parity_deviation() <= 1e-10 * scan.n0);
    }

    #[test]
    fn gated_integrates_to_ungated(t in 0.1f64..0.9, k in -6i64..6, pump in 11.0f64..13.0) {
        let band = FrequencyGrid::new(6.0, 4.0, 513).unwrap();
        let bs = BeamSplitter::new(t, 1.0 - t, 0.0).unwrap();
        let setup = HomSetup::new(gaussian(0.8), band, bs).unwrap().with_sample(Some(model_sample(0.5)));
        let c = setup.response(pump).unwrap();
        let grid = *c.grid();
        let bs = bs.with_delay(k as f64 * grid.step() * 0.5 * 3.0);
        let scale = SignalScale::new(2.5).unwrap();
        let gated: f64 = grid
            .points()
            .into_iter()
            .map(|tau| coincidence_tau(&c, pump, &bs, &scale, tau).unwrap())
            .sum::<f64>()
            * grid.step();
        let whole = coincidence_integrated(&c, pump, &bs, &scale).unwrap();
        prop_assert!((gated - whole.value).abs() <= 1e-6 * whole.n0);
    }

    #[test]
    fn visibility_is_bounded(t in 0.05f64..0.95, depth in 0.0f64..0.9, sm in 0.2f64..0.9) {
        let band = FrequencyGrid::new(6.0, 4.0, 513).unwrap();
        let bs = BeamSplitter::new(t, 1.0 - t, 0.0).unwrap();
        let setup = HomSetup::new(gaussian(sm), band, bs).unwrap().with_sample(Some(model_sample(depth)));
        let c = setup.response(12.0).unwrap();
        let delays = setup.time_grid().delay_axis(0.5, 41).unwrap();
        let scan = scan_delta(&c, 12.0, &bs, &SignalScale::default(), &delays).unwrap();
        let r = 1.0 - t;
        prop_assert!(scan.visibility() <= 2.0 * r * t / (r * r + t * t) + 1e-9);
    }
}
