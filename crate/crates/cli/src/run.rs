//! Dispatch of a validated scenario to its physics pipeline.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{anyhow, Context, Result};
use homspec_core::biphoton::{BiphotonAmplitude, SampledJsa};
use homspec_core::hom::{effective_response, mzi_number_difference, BeamSplitter, DelayScan, HomSetup, MziInput};
use homspec_core::matter::{chi3_photon, chi3_time, transmission, FourLevelSystem};
use homspec_core::numerics::units::inv_ev_to_fs;
use homspec_core::numerics::{pulse_extent, FrequencyGrid, TimeGrid};
use homspec_core::schmidt::broadband_from_amplitude;
use homspec_core::schmidt::{
    default_observation_time, reshape_pulse, schmidt_decompose, schmidt_number, schmidt_number_of, temporal_modes,
    PulseTarget, TwoTimeAmplitude,
};

use crate::export::{export_csv, export_plot_script, Artifact, PlotKind, Table};
use crate::scenario::{Scenario, Task};

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    /// Worker threads for the scans; `None` uses the global pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub scenario: Scenario,
    pub files: Vec<PathBuf>,
    pub plot_script: PathBuf,
    pub report: PathBuf,
    pub diagnostics: Vec<(String, f64)>,
    pub warnings: Vec<String>,
    pub duration: Duration,
}

impl RunReport {
    pub fn diagnostic(&self, key: &str) -> Option<f64> {
        self.diagnostics.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
    }
}

#[derive(Default)]
struct Output {
    artifacts: Vec<Artifact>,
    diagnostics: Vec<(String, f64)>,
    warnings: Vec<String>,
}

impl Output {
    fn csv(&mut self, dir: &Path, name: &str, title: &str, table: &Table, kind: PlotKind) -> Result<()> {
        let path = dir.join(name);
        export_csv(table, &path)?;
        self.artifacts.push(Artifact { path, title: title.into(), kind });
        Ok(())
    }

    fn diag(&mut self, key: &str, v: f64) {
        self.diagnostics.push((key.into(), v));
    }

    fn warn(&mut self, w: impl Into<String>) {
        self.warnings.push(w.into());
    }
}

pub fn run(scenario: &Scenario, options: &RunOptions) -> Result<RunReport> {
    match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("building the worker pool")?
            .install(|| run_inner(scenario, options)),
        None => run_inner(scenario, options),
    }
}

fn run_inner(scenario: &Scenario, options: &RunOptions) -> Result<RunReport> {
    let start = Instant::now();
    let dir = &options.out_dir;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut out = Output::default();
    let task = scenario.task;
    match task {
        Task::Chi3Scan => chi3_scan(scenario, dir, &mut out),
        Task::Transmission => transmission_scan(scenario, dir, &mut out),
        Task::HomDip => hom_dip(scenario, dir, &mut out),
        Task::Scan2d => scan_2d(scenario, dir, &mut out),
        Task::Schmidt => schmidt(scenario, dir, &mut out),
        Task::BroadbandHom => broadband(scenario, dir, &mut out),
        Task::Mzi => mzi(scenario, dir, &mut out),
        Task::PulseExtent => pulse(scenario, dir, &mut out),
    }
    .with_context(|| format!("task `{task}` of scenario `{}`", scenario.name))?;

    let plot_script = export_plot_script(&out.artifacts, dir)?;
    let duration = start.elapsed();
    let report = dir.join("report.txt");
    let files: Vec<PathBuf> = out.artifacts.iter().map(|a| a.path.clone()).collect();
    fs::write(&report, render_report(scenario, &files, &plot_script, &out, duration))
        .with_context(|| format!("writing {}", report.display()))?;
    Ok(RunReport {
        scenario: scenario.clone(),
        files,
        plot_script,
        report,
        diagnostics: out.diagnostics,
        warnings: out.warnings,
        duration,
    })
}

fn render_report(s: &Scenario, files: &[PathBuf], plot: &Path, out: &Output, duration: Duration) -> String {
    let mut r = String::new();
    let _ = writeln!(r, "scenario: {}\ntask: {}\nduration_s: {:.3}\n", s.name, s.task, duration.as_secs_f64());
    r.push_str("[diagnostics]\n");
    for (k, v) in &out.diagnostics {
        let _ = writeln!(r, "{k} = {v:.10e}");
    }
    r.push_str("\n[warnings]\n");
    for w in &out.warnings {
        let _ = writeln!(r, "{w}");
    }
    r.push_str("\n[files]\n");
    for f in files.iter().chain(std::iter::once(&plot.to_path_buf())) {
        let _ = writeln!(r, "{}", f.display());
    }
    r.push_str("\n[scenario]\n");
    r.push_str(&s.source);
    r
}

fn system_of(s: &Scenario) -> Result<(FourLevelSystem, homspec_core::matter::ClassicalDrive)> {
    match (s.system, s.drive) {
        (Some(sys), Some(d)) => Ok((sys, d)),
        _ => Err(anyhow!("this task needs a `system.*` section")),
    }
}

fn biphoton_of(s: &Scenario) -> Result<BiphotonAmplitude> {
    s.biphoton.ok_or_else(|| anyhow!("this task needs a `biphoton.*` section"))
}

fn chi3_scan(s: &Scenario, dir: &Path, out: &mut Output) -> Result<()> {
    let (sys, drive) = system_of(s)?;
    let fgrid = FrequencyGrid::new(sys.omega_fg(), s.grid.scan_half_width, s.grid.points)?;
    let mut t = Table::new(&["omega_eV", "chi3_re_arb", "chi3_im_arb", "chi3_abs_arb"]);
    let mut peak = (0.0, f64::MIN);
    for w in fgrid.points() {
        let c = chi3_photon(&sys, &drive, w)?;
        if c.norm() > peak.1 {
            peak = (w, c.norm());
        }
        t.push(vec![w, c.re, c.im, c.norm()]);
    }
    let lines = PlotKind::Lines { x: 0, ys: vec![1, 2, 3] };
    out.csv(dir, "chi3_frequency.csv", "susceptibility versus photon frequency", &t, lines)?;

    let tgrid = TimeGrid::from_step(s.grid.time_step, s.grid.time_points)?;
    let chi = chi3_time(&sys, &drive, &tgrid)?;
    if chi.aliased() {
        out.warn("time grid does not resolve or contain the decay of chi3(t)");
    }
    let mut t = Table::new(&["t_inv_eV", "t_fs", "chi3_re_arb", "chi3_im_arb", "chi3_abs_arb"]);
    for (tau, v) in tgrid.points().into_iter().zip(chi.values()) {
        t.push(vec![tau, inv_ev_to_fs(tau), v.re, v.im, v.norm()]);
    }
    out.csv(dir, "chi3_time.csv", "causal time response", &t, PlotKind::Lines { x: 0, ys: vec![2, 3, 4] })?;

    let max = chi.max_abs();
    let negative = chi.values()[..tgrid.origin()].iter().map(|v| v.norm()).fold(0.0, f64::max);
    out.diag("omega_fg_eV", sys.omega_fg());
    out.diag("peak_omega_eV", peak.0);
    out.diag("causality_ratio", negative / max);
    out.diag("decay_rate_eV", fitted_decay_rate(&tgrid, chi.values(), max));
    out.diag("gamma_fg_eV", sys.gamma_fg);
    Ok(())
}

/// Least-squares slope of `-ln |f(t)|` over `t > 0` where `|f|` is above
/// `1e-6` of its peak.
pub fn fitted_decay_rate(grid: &TimeGrid, values: &[homspec_core::C64], max: f64) -> f64 {
    let pts: Vec<(f64, f64)> = grid
        .points()
        .into_iter()
        .zip(values)
        .filter(|(t, v)| *t > 0.0 && v.norm() > 1e-6 * max)
        .map(|(t, v)| (t, v.norm().ln()))
        .collect();
    let n = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
    let (num, den) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
    -num / den
}

fn transmission_scan(s: &Scenario, dir: &Path, out: &mut Output) -> Result<()> {
    let (sys, drive) = system_of(s)?;
    let coupling = s.sample.map_or(0.0, |x| x.coupling);
    let fgrid = FrequencyGrid::new(sys.omega_fg(), s.grid.scan_half_width, s.grid.points)?;
    let mut t = Table::new(&["omega_eV", "t_re", "t_im", "t_abs"]);
    let mut min = (0.0, f64::MAX);
    for w in fgrid.points() {
        let v = transmission(&sys, &drive, w, coupling)?;
        if v.norm() < min.1 {
            min = (w, v.norm());
        }
        t.push(vec![w, v.re, v.im, v.norm()]);
    }
    out.csv(dir, "transmission.csv", "transmission of the sample", &t, PlotKind::Lines { x: 0, ys: vec![1, 2, 3] })?;
    out.diag("coupling", coupling);
    out.diag("min_abs_t", min.1);
    out.diag("min_abs_t_omega_eV", min.0);
    Ok(())
}

fn hom_setup(s: &Scenario) -> Result<HomSetup> {
    let amp = biphoton_of(s)?;
    let band = FrequencyGrid::new(0.5 * amp.pump(), s.grid.band_half_width, s.grid.points)?;
    Ok(HomSetup::new(amp, band, s.splitter)?.with_scale(s.scale).with_sample(s.sample))
}

fn delay_axis(setup: &HomSetup, s: &Scenario) -> Result<TimeGrid> {
    Ok(setup.time_grid().delay_axis(s.grid.delay_step, s.grid.delay_points)?)
}

fn scan_diagnostics(out: &mut Output, label: &str, scan: &DelayScan) {
    out.diag(&format!("n0_{label}"), scan.n0);
    out.diag(&format!("p_zero_norm_{label}"), scan.at_zero_delay() / scan.n0);
    out.diag(&format!("visibility_{label}"), scan.visibility());
    out.diag(&format!("asymmetry_{label}"), scan.asymmetry());
    out.diag(&format!("parity_deviation_norm_{label}"), scan.max_parity_deviation() / scan.n0);
    if scan.edge_warning {
        out.warn(format!("{label}: C(t) has not decayed at the grid ends; widen the time grid (more points)"));
    }
}

fn hom_dip(s: &Scenario, dir: &Path, out: &mut Output) -> Result<()> {
    let setup = hom_setup(s)?;
    let pump = setup.amplitude.pump();
    let delays = delay_axis(&setup, s)?;
    let bare = setup.with_sample(None).scan_delta(pump, &delays)?;
    scan_diagnostics(out, "bare", &bare);
    let with = match setup.sample {
        Some(_) => {
            let scan = setup.scan_delta(pump, &delays)?;
            scan_diagnostics(out, "sample", &scan);
            Some(scan)
        }
        None => None,
    };
    let mut cols = vec!["delay_inv_eV", "delay_fs", "p_bare_arb", "p_bare_over_n0"];
    if with.is_some() {
        cols.extend(["p_sample_arb", "p_sample_over_n0"]);
    }
    let mut t = Table::new(&cols);
    for (j, d) in delays.points().into_iter().enumerate() {
        let mut row = vec![d, inv_ev_to_fs(d), bare.values[j], bare.values[j] / bare.n0];
        if let Some(w) = &with {
            row.extend([w.values[j], w.values[j] / w.n0]);
        }
        t.push(row);
    }
    let ys = if with.is_some() { vec![3, 5] } else { vec![3] };
    out.csv(dir, "hom_dip.csv", "coincidence versus delay", &t, PlotKind::Lines { x: 0, ys })?;
    out.diag("delay_step_inv_eV", delays.step());
    Ok(())
}

fn scan_2d(s: &Scenario, dir: &Path, out: &mut Output) -> Result<()> {
    let setup = hom_setup(s)?;
    let delays = delay_axis(&setup, s)?;
    let pumps = FrequencyGrid::new(setup.amplitude.pump(), s.grid.pump_half_width, s.grid.pump_points)?;
    let bare = setup.with_sample(None).scan_2d(&delays, &pumps)?;
    let (d, p) = (delays.points(), pumps.points());
    let heat = || PlotKind::Heatmap;
    let cols = ["delay_inv_eV", "pump_eV", "p_arb"];
    out.csv(dir, "map_bare.csv", "bare coincidence map", &Table::long_format(cols, &d, &p, &bare.values), heat())?;
    out.diag("pump_step_eV", pumps.step());
    out.diag("delay_step_inv_eV", delays.step());
    if bare.edge_warning {
        out.warn("bare map: C(t) has not decayed at the grid ends");
    }
    if setup.sample.is_some() {
        let map = setup.scan_2d(&delays, &pumps)?;
        let cols = ["delay_inv_eV", "pump_eV", "p_arb"];
        out.csv(
            dir,
            "map_sample.csv",
            "coincidence map with sample",
            &Table::long_format(cols, &d, &p, &map.values),
            heat(),
        )?;
        let m = map.modulation(&bare)?;
        let cols = ["delay_inv_eV", "pump_eV", "modulation_arb"];
        out.csv(dir, "modulation.csv", "matter-induced modulation", &Table::long_format(cols, &d, &p, &m), heat())?;
        let center = map.feature_center(&bare)?;
        out.diag("feature_center_pump_eV", center);
        out.diag("feature_center_half_pump_eV", 0.5 * center);
        match map.feature_fwhm(&bare) {
            Ok(w) => out.diag("feature_fwhm_inv_eV", w),
            Err(e) => out.warn(format!("feature width: {e}")),
        }
        let min = (0..map.values.nrows())
            .flat_map(|i| (0..map.values.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| map.values[(i, j)] / map.n0[i])
            .fold(f64::INFINITY, f64::min);
        out.diag("min_p_over_n0_sample", min);
        if map.edge_warning {
            out.warn("sample map: C(t) has not decayed at the grid ends");
        }
    }
    Ok(())
}

fn sampled_jsa(s: &Scenario) -> Result<SampledJsa> {
    let amp = biphoton_of(s)?;
    Ok(SampledJsa::sample_centered(&amp, s.schmidt.half_width, s.schmidt.points)?.normalized()?)
}

fn analytic_weights(amp: &BiphotonAmplitude, count: usize) -> Option<Vec<f64>> {
    match amp {
        BiphotonAmplitude::Gaussian(p) => {
            let mu = p.schmidt_ratio();
            Some((0..count).map(|n| (1.0 - mu * mu) * mu.powi(2 * n as i32)).collect())
        }
        _ => None,
    }
}

fn schmidt(s: &Scenario, dir: &Path, out: &mut Output) -> Result<()> {
    let amp = biphoton_of(s)?;
    let jsa = sampled_jsa(s)?;
    let d = schmidt_decompose(&jsa, &s.schmidt.options)?;
    let analytic = analytic_weights(&amp, d.truncation());
    let mut cols = vec!["n", "lambda"];
    if analytic.is_some() {
        cols.push("lambda_gaussian_closed_form");
    }
    let mut t = Table::new(&cols);
    for (n, w) in d.weights().iter().enumerate() {
        let mut row = vec![n as f64, *w];
        if let Some(a) = &analytic {
            row.push(a[n]);
        }
        t.push(row);
    }
    let ys = if analytic.is_some() { vec![1, 2] } else { vec![1] };
    out.csv(dir, "schmidt_weights.csv", "Schmidt weights", &t, PlotKind::Lines { x: 0, ys })?;

    let shown = d.truncation().min(s.schmidt.reshape_modes);
    for (family, modes) in [("a", d.modes_a()), ("b", d.modes_b())] {
        let names: Vec<String> = std::iter::once("omega_eV".to_string())
            .chain((0..shown).flat_map(|n| [format!("mode{n}_re_sqrt_inv_eV"), format!("mode{n}_im_sqrt_inv_eV")]))
            .collect();
        let refs: Vec<&str> = names.iter().map(|x| x.as_str()).collect();
        let mut t = Table::new(&refs);
        for (k, w) in d.grid().points().into_iter().enumerate() {
            let mut row = vec![w];
            for m in &modes[..shown] {
                row.extend([m.values()[k].re, m.values()[k].im]);
            }
            t.push(row);
        }
        let ys = (0..shown).map(|n| 1 + 2 * n).collect();
        let title = format!("Schmidt modes of photon {family}");
        out.csv(dir, &format!("schmidt_modes_{family}.csv"), &title, &t, PlotKind::Lines { x: 0, ys })?;
    }

    let reshaped = reshape_pulse(&d, PulseTarget::ScanFrequency(0.5 * amp.pump()), shown)?;
    let mut t = Table::new(&["omega_eV", "profile_re", "profile_im", "profile_abs"]);
    for (w, v) in d.grid().points().into_iter().zip(reshaped.profile.values()) {
        t.push(vec![w, v.re, v.im, v.norm()]);
    }
    out.csv(dir, "reshaped_pulse.csv", "reweighted modes aimed at pump/2", &t, PlotKind::Lines { x: 0, ys: vec![3] })?;

    out.diag("schmidt_number", schmidt_number(&d));
    if let Some(a) = analytic_weights(&amp, 400) {
        out.diag("schmidt_number_closed_form", schmidt_number_of(&a));
    }
    out.diag("lambda0", d.weights()[0]);
    out.diag("modes_retained", d.truncation() as f64);
    out.diag("discarded_weight", d.discarded_weight());
    out.diag("reconstruction_error", d.reconstruction_error());
    out.diag("eigen_residual", d.eigen_residual());
    out.diag("boundary_fraction", jsa.boundary_fraction());
    Ok(())
}

fn broadband(s: &Scenario, dir: &Path, out: &mut Output) -> Result<()> {
    let jsa = sampled_jsa(s)?;
    let d = schmidt_decompose(&jsa, &s.schmidt.options)?;
    let tgrid = d.grid().conjugate();
    let modes = temporal_modes(&d, &tgrid)?;
    if modes.aliased() {
        out.warn("temporal modes carry weight at the band edges");
    }
    let snap = |t: f64| (t / tgrid.step()).round() * tgrid.step();
    let t_obs = match s.observation_time {
        Some(t) => snap(t),
        None => default_observation_time(&modes)?,
    };
    let tau = snap(s.tau);
    let stride = (s.grid.delay_step / tgrid.step()).round().max(1.0);
    let delays = TimeGrid::from_step(stride * tgrid.step(), s.grid.delay_points)?;

    let bare = TwoTimeAmplitude::new(&d, &modes, None)?;
    let chi = s.sample.as_ref().map(|x| effective_response(Some(x), &tgrid)).transpose()?;
    let with = chi.as_ref().map(|c| TwoTimeAmplitude::new(&d, &modes, Some(c))).transpose()?;
    let mut cols = vec!["delay_inv_eV", "p_bare_arb"];
    if with.is_some() {
        cols.push("p_sample_arb");
    }
    let mut t = Table::new(&cols);
    let bs = |delay: f64| -> BeamSplitter { s.splitter.with_delay(delay) };
    for delay in delays.points() {
        let mut row = vec![delay, broadband_from_amplitude(&bare, &bs(delay), &s.scale, t_obs, tau)?];
        if let Some(w) = &with {
            row.push(broadband_from_amplitude(w, &bs(delay), &s.scale, t_obs, tau)?);
        }
        t.push(row);
    }
    let ys = (1..cols.len()).collect();
    out.csv(dir, "broadband_hom.csv", "broadband coincidence versus delay", &t, PlotKind::Lines { x: 0, ys })?;
    out.diag("observation_time_inv_eV", t_obs);
    out.diag("tau_inv_eV", tau);
    out.diag("schmidt_number", schmidt_number(&d));
    out.diag("modes_retained", d.truncation() as f64);
    Ok(())
}

fn mzi(s: &Scenario, dir: &Path, out: &mut Output) -> Result<()> {
    let jsa = sampled_jsa(s)?;
    let decomposition = match s.mzi_single_mode {
        true => Some(schmidt_decompose(&jsa, &s.schmidt.options)?),
        false => None,
    };
    let input = match &decomposition {
        Some(d) => {
            out.diag("mode_a_weight", d.weights()[0]);
            MziInput::Photon(&d.modes_a()[0])
        }
        None => MziInput::Pair(&jsa),
    };
    let delays = TimeGrid::from_step(s.grid.delay_step, s.grid.delay_points)?;
    let phase = s.mzi_phase;
    let mut cols = vec!["delay_inv_eV", "delay_fs", "signal_bare"];
    if s.sample.is_some() {
        cols.extend(["signal_sample", "signal_shift"]);
    }
    let mut t = Table::new(&cols);
    let mut largest: f64 = 0.0;
    for delay in delays.points() {
        let bs = s.splitter.with_delay(delay);
        let bare = mzi_number_difference(&input, None, |_| phase, &bs)?;
        let mut row = vec![delay, inv_ev_to_fs(delay), bare];
        if let Some(sample) = &s.sample {
            let with = mzi_number_difference(&input, Some(sample), |_| phase, &bs)?;
            largest = largest.max((with - bare).abs());
            row.extend([with, with - bare]);
        }
        t.push(row);
    }
    let ys = (2..cols.len()).collect();
    out.csv(dir, "mzi.csv", "Mach-Zehnder number difference", &t, PlotKind::Lines { x: 0, ys })?;
    if s.sample.is_some() {
        out.diag("max_abs_signal_shift", largest);
    }
    Ok(())
}

fn pulse(s: &Scenario, dir: &Path, out: &mut Output) -> Result<()> {
    let (w, d) = s.pulse.ok_or_else(|| anyhow!("pulse-extent needs `pulse.wavelength_nm` and `pulse.duration_ps`"))?;
    let extent = pulse_extent(w, d)?;
    let mut t = Table::new(&["wavelength_nm", "duration_ps", "extent_um"]);
    t.push(vec![w, d, extent]);
    out.csv(dir, "pulse_extent.csv", "pulse extent", &t, PlotKind::Table)?;
    out.diag("extent_um", extent);
    Ok(())
}
