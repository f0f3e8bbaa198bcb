//! Scenario files: flat `section.key = value` lines (a TOML subset).
//!
//! Every key is checked against [`KEYS`]; unknown keys, missing required
//! fields and violated parameter invariants are all reported together.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use homspec_core::biphoton::{BiphotonAmplitude, GaussianBiphotonParams, NarrowbandSinc, SincPdcParams};
use homspec_core::hom::{BeamSplitter, SignalScale};
use homspec_core::matter::{ClassicalDrive, FourLevelSystem, Sample, DEFAULT_DEPHASING};
use homspec_core::schmidt::SchmidtOptions;

/// Every accepted key with a one-line description.
pub const KEYS: &[(&str, &str)] = &[
    ("name", "scenario name, used for the default output directory"),
    ("task", "one of the tasks listed by `list-tasks`"),
    ("system.omega_e1g_eV", "e1 - g transition energy"),
    ("system.omega_e2e1_eV", "e2 - e1 transition energy"),
    ("system.omega_fe2_eV", "f - e2 transition energy"),
    ("system.mu_e1g", "dipole, default 1"),
    ("system.mu_e2e1", "dipole, default 1"),
    ("system.mu_fe2", "dipole, default 1"),
    ("system.gamma_e1g_eV", "dephasing, default 0.05"),
    ("system.gamma_e2g_eV", "dephasing, default 0.05"),
    ("system.gamma_fg_eV", "dephasing, default 0.05"),
    ("drive.omega1_eV", "first classical frequency, default resonant"),
    ("drive.omega2_eV", "second classical frequency, default resonant"),
    ("sample.enabled", "place the system in arm a, default true when a system is given"),
    ("sample.depth", "fractional dip of |T| on resonance, default 0.5"),
    ("sample.coupling", "A0 of the transmission filter (instead of depth)"),
    ("biphoton.kind", "gaussian | sinc-pdc | narrowband-sinc"),
    ("biphoton.pump_eV", "pump center frequency"),
    ("biphoton.sigma_plus_eV", "gaussian: sum-frequency width"),
    ("biphoton.sigma_minus_eV", "gaussian: difference-frequency width"),
    ("biphoton.t_ent_inv_eV", "narrowband-sinc: entanglement time"),
    ("biphoton.pump_bandwidth_eV", "sinc-pdc: pump bandwidth"),
    ("biphoton.crystal_length", "sinc-pdc: crystal length"),
    ("biphoton.k_a", "sinc-pdc: inverse group velocity of photon a"),
    ("biphoton.k_b", "sinc-pdc: inverse group velocity of photon b"),
    ("biphoton.k_p", "sinc-pdc: inverse group velocity of the pump"),
    ("bs.transmittance", "T, default 0.5"),
    ("bs.reflectance", "R, default 0.5"),
    ("scale.p0", "overall signal scale, default 1"),
    ("grid.band_half_width_eV", "half-width of the sampled band around pump/2, default 5"),
    ("grid.points", "samples across the band, default 2049"),
    ("grid.delay_step_inv_eV", "approximate delay step, default 1"),
    ("grid.delay_points", "delay samples, default 121"),
    ("grid.pump_half_width_eV", "scan-2d: pump axis half-width, default 1"),
    ("grid.pump_points", "scan-2d: pump samples, default 41"),
    ("grid.scan_half_width_eV", "chi3-scan/transmission: frequency half-width, default 1"),
    ("grid.time_step_inv_eV", "chi3-scan: time step, default 0.1"),
    ("grid.time_points", "chi3-scan: time samples, default 8192"),
    ("schmidt.points", "samples per axis of the joint amplitude, default 256"),
    ("schmidt.half_width_eV", "half-width of each axis around pump/2, default 4"),
    ("schmidt.truncation", "drop modes with lambda below this, default 1e-8"),
    ("schmidt.tolerance", "reconstruction and eigen-residual bound, default 1e-6"),
    ("schmidt.reshape_modes", "modes used for the pulse-reshaping output, default 8"),
    ("broadband.tau_inv_eV", "detector delay tau, default 0"),
    ("broadband.observation_time_inv_eV", "detection time t, default the peak of v_0"),
    ("mzi.phase_rad", "constant phase of the reference arm, default 0"),
    ("mzi.input", "pair (one photon per port, default) | mode-a (leading Schmidt mode of photon a in port a)"),
    ("pulse.wavelength_nm", "pulse-extent: carrier wavelength"),
    ("pulse.duration_ps", "pulse-extent: pulse duration"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Chi3Scan,
    Transmission,
    HomDip,
    Scan2d,
    Schmidt,
    BroadbandHom,
    Mzi,
    PulseExtent,
}

impl Task {
    pub const ALL: [Task; 8] = [
        Task::Chi3Scan,
        Task::Transmission,
        Task::HomDip,
        Task::Scan2d,
        Task::Schmidt,
        Task::BroadbandHom,
        Task::Mzi,
        Task::PulseExtent,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Task::Chi3Scan => "chi3-scan",
            Task::Transmission => "transmission",
            Task::HomDip => "hom-dip",
            Task::Scan2d => "scan-2d",
            Task::Schmidt => "schmidt",
            Task::BroadbandHom => "broadband-hom",
            Task::Mzi => "mzi",
            Task::PulseExtent => "pulse-extent",
        }
    }

    pub fn summary(&self) -> &'static str {
        match self {
            Task::Chi3Scan => "susceptibility versus photon frequency and its causal time response",
            Task::Transmission => "transmission filter of the sample versus frequency",
            Task::HomDip => "integrated coincidence versus delay, bare and with the sample",
            Task::Scan2d => "coincidence map over delay and pump frequency",
            Task::Schmidt => "Schmidt weights and modes of the joint amplitude",
            Task::BroadbandHom => "coincidence from the Schmidt temporal modes versus delay",
            Task::Mzi => "Mach-Zehnder number difference versus delay",
            Task::PulseExtent => "spatial extent c * duration of a pulse",
        }
    }

    fn needs_system(&self) -> bool {
        matches!(self, Task::Chi3Scan | Task::Transmission)
    }

    fn needs_biphoton(&self) -> bool {
        matches!(self, Task::HomDip | Task::Scan2d | Task::Schmidt | Task::BroadbandHom | Task::Mzi)
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Task::ALL.into_iter().find(|t| t.name() == s).ok_or_else(|| {
            let names: Vec<_> = Task::ALL.iter().map(|t| t.name()).collect();
            format!("unknown task `{s}` (expected one of {})", names.join(", "))
        })
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSettings {
    pub band_half_width: f64,
    pub points: usize,
    pub delay_step: f64,
    pub delay_points: usize,
    pub pump_half_width: f64,
    pub pump_points: usize,
    pub scan_half_width: f64,
    pub time_step: f64,
    pub time_points: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            band_half_width: 5.0,
            points: 2049,
            delay_step: 1.0,
            delay_points: 121,
            pump_half_width: 1.0,
            pump_points: 41,
            scan_half_width: 1.0,
            time_step: 0.1,
            time_points: 8192,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchmidtSettings {
    pub points: usize,
    pub half_width: f64,
    pub options: SchmidtOptions,
    pub reshape_modes: usize,
}

impl Default for SchmidtSettings {
    fn default() -> Self {
        Self { points: 256, half_width: 4.0, options: SchmidtOptions::default(), reshape_modes: 8 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub task: Task,
    pub system: Option<FourLevelSystem>,
    pub drive: Option<ClassicalDrive>,
    /// Sample in arm `a`; `None` for a bare interferometer.
    pub sample: Option<Sample>,
    pub biphoton: Option<BiphotonAmplitude>,
    pub splitter: BeamSplitter,
    pub scale: SignalScale,
    pub grid: GridSettings,
    pub schmidt: SchmidtSettings,
    pub tau: f64,
    pub observation_time: Option<f64>,
    pub mzi_phase: f64,
    /// Inject only photon `a`, projected on its leading Schmidt mode.
    pub mzi_single_mode: bool,
    pub pulse: Option<(f64, f64)>,
    /// The file as read, echoed into the run report.
    pub source: String,
}

impl Scenario {
    pub fn with_grid_points(mut self, n: usize) -> Self {
        self.grid.points = n;
        self
    }

    pub fn with_task(mut self, task: Task) -> Self {
        self.task = task;
        self
    }

    pub fn bare(&self) -> Self {
        Self { sample: None, ..self.clone() }
    }
}

/// All problems found in one scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub errors: Vec<String>,
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid scenario:")?;
        for e in &self.errors {
            write!(f, "\n  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ScenarioError {}

pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError { errors: vec![format!("cannot read {}: {e}", path.display())] })?;
    let mut s = parse_scenario(&text)?;
    if s.name.is_empty() {
        s.name = path.file_stem().and_then(|n| n.to_str()).unwrap_or("scenario").to_string();
    }
    Ok(s)
}

#[derive(Debug, Clone)]
enum Value {
    Num(f64),
    Int(i64),
    Bool(bool),
    Str(String),
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>, errors: &mut Vec<String>) {
    for (k, v) in table {
        let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match v {
            toml::Value::Table(t) => flatten(&key, t, out, errors),
            toml::Value::Float(x) => {
                out.insert(key, Value::Num(*x));
            }
            toml::Value::Integer(i) => {
                out.insert(key, Value::Int(*i));
            }
            toml::Value::Boolean(b) => {
                out.insert(key, Value::Bool(*b));
            }
            toml::Value::String(s) => {
                out.insert(key, Value::Str(s.clone()));
            }
            _ => errors.push(format!("`{key}`: arrays and dates are not supported")),
        }
    }
}

struct Fields {
    map: BTreeMap<String, Value>,
    errors: Vec<String>,
}

impl Fields {
    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn has_section(&self, section: &str) -> bool {
        let p = format!("{section}.");
        self.map.keys().any(|k| k.starts_with(&p))
    }

    fn num(&mut self, key: &str) -> Option<f64> {
        match self.map.get(key)? {
            Value::Num(x) if x.is_finite() => Some(*x),
            Value::Int(i) => Some(*i as f64),
            _ => {
                self.errors.push(format!("`{key}` must be a finite number"));
                None
            }
        }
    }

    fn num_or(&mut self, key: &str, default: f64) -> f64 {
        self.num(key).unwrap_or(default)
    }

    fn req_num(&mut self, key: &str, why: &str) -> Option<f64> {
        if !self.has(key) {
            self.errors.push(format!("missing required field `{key}` ({why})"));
            return None;
        }
        self.num(key)
    }

    fn count_or(&mut self, key: &str, default: usize) -> usize {
        match self.map.get(key) {
            None => default,
            Some(Value::Int(i)) if *i > 0 => *i as usize,
            Some(_) => {
                self.errors.push(format!("`{key}` must be a positive integer"));
                default
            }
        }
    }

    fn bool(&mut self, key: &str) -> Option<bool> {
        match self.map.get(key)? {
            Value::Bool(b) => Some(*b),
            _ => {
                self.errors.push(format!("`{key}` must be true or false"));
                None
            }
        }
    }

    fn string(&mut self, key: &str) -> Option<String> {
        match self.map.get(key)? {
            Value::Str(s) => Some(s.clone()),
            _ => {
                self.errors.push(format!("`{key}` must be a string"));
                None
            }
        }
    }

    fn check<T>(&mut self, context: &str, r: homspec_core::Result<T>) -> Option<T> {
        r.map_err(|e| self.errors.push(format!("{context}: {e}"))).ok()
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let table: toml::Table =
        toml::from_str(text).map_err(|e| ScenarioError { errors: vec![format!("syntax: {}", e.message())] })?;
    let mut errors = Vec::new();
    let mut map = BTreeMap::new();
    flatten("", &table, &mut map, &mut errors);
    for k in map.keys() {
        if !KEYS.iter().any(|(known, _)| known == k) {
            errors.push(format!("unknown key `{k}`"));
        }
    }
    let mut f = Fields { map, errors };

    let task = match f.string("task") {
        None if !f.has("task") => {
            f.errors.insert(0, "missing task".into());
            None
        }
        None => None,
        Some(s) => match s.parse::<Task>() {
            Ok(t) => Some(t),
            Err(e) => {
                f.errors.push(e);
                None
            }
        },
    };
    let name = f.string("name").unwrap_or_default();

    let system =
        if task.is_some_and(|t| t.needs_system()) || f.has_section("system") { parse_system(&mut f) } else { None };
    let drive = match system {
        Some(sys) if f.has_section("drive") => {
            let resonant = sys.resonant_drive();
            let (w1, w2) = (f.num_or("drive.omega1_eV", resonant.omega1), f.num_or("drive.omega2_eV", resonant.omega2));
            f.check("drive", ClassicalDrive::new(w1, w2))
        }
        Some(sys) => Some(sys.resonant_drive()),
        None => {
            if f.has_section("drive") {
                f.errors.push("`drive.*` given without a `system.*` section".into());
            }
            None
        }
    };
    let sample = parse_sample(&mut f, system, drive);

    let biphoton = if task.is_some_and(|t| t.needs_biphoton()) || f.has_section("biphoton") {
        parse_biphoton(&mut f)
    } else {
        None
    };

    let splitter = {
        let (t, r) = match (f.has("bs.transmittance"), f.has("bs.reflectance")) {
            (false, false) => (Some(0.5), Some(0.5)),
            (true, true) => (f.num("bs.transmittance"), f.num("bs.reflectance")),
            _ => {
                f.errors.push("give both `bs.transmittance` and `bs.reflectance`".into());
                (None, None)
            }
        };
        match (t, r) {
            (Some(t), Some(r)) => f.check("bs", BeamSplitter::new(t, r, 0.0)),
            _ => None,
        }
    };
    let p0 = f.num_or("scale.p0", 1.0);
    let scale = f.check("scale", SignalScale::new(p0));

    let d = GridSettings::default();
    let grid = GridSettings {
        band_half_width: f.num_or("grid.band_half_width_eV", d.band_half_width),
        points: f.count_or("grid.points", d.points),
        delay_step: f.num_or("grid.delay_step_inv_eV", d.delay_step),
        delay_points: f.count_or("grid.delay_points", d.delay_points),
        pump_half_width: f.num_or("grid.pump_half_width_eV", d.pump_half_width),
        pump_points: f.count_or("grid.pump_points", d.pump_points),
        scan_half_width: f.num_or("grid.scan_half_width_eV", d.scan_half_width),
        time_step: f.num_or("grid.time_step_inv_eV", d.time_step),
        time_points: f.count_or("grid.time_points", d.time_points),
    };
    for (key, v) in [
        ("grid.band_half_width_eV", grid.band_half_width),
        ("grid.delay_step_inv_eV", grid.delay_step),
        ("grid.pump_half_width_eV", grid.pump_half_width),
        ("grid.scan_half_width_eV", grid.scan_half_width),
        ("grid.time_step_inv_eV", grid.time_step),
    ] {
        if v <= 0.0 {
            f.errors.push(format!("`{key}` must be > 0"));
        }
    }
    for (key, v) in
        [("grid.points", grid.points), ("grid.pump_points", grid.pump_points), ("grid.time_points", grid.time_points)]
    {
        if v < 2 {
            f.errors.push(format!("`{key}` needs at least 2 samples"));
        }
    }

    let sd = SchmidtSettings::default();
    let schmidt = SchmidtSettings {
        points: f.count_or("schmidt.points", sd.points),
        half_width: f.num_or("schmidt.half_width_eV", sd.half_width),
        options: SchmidtOptions {
            truncation: f.num_or("schmidt.truncation", sd.options.truncation),
            tolerance: f.num_or("schmidt.tolerance", sd.options.tolerance),
        },
        reshape_modes: f.count_or("schmidt.reshape_modes", sd.reshape_modes),
    };
    if schmidt.half_width <= 0.0 {
        f.errors.push("`schmidt.half_width_eV` must be > 0".into());
    }
    if schmidt.options.truncation < 0.0 || schmidt.options.tolerance <= 0.0 {
        f.errors.push("`schmidt.truncation` must be >= 0 and `schmidt.tolerance` > 0".into());
    }

    let tau = f.num_or("broadband.tau_inv_eV", 0.0);
    let observation_time = f.num("broadband.observation_time_inv_eV");
    let mzi_phase = f.num_or("mzi.phase_rad", 0.0);
    let mzi_single_mode = match f.string("mzi.input").as_deref() {
        None | Some("pair") => false,
        Some("mode-a") => true,
        Some(other) => {
            f.errors.push(format!("`mzi.input` must be \"pair\" or \"mode-a\", got \"{other}\""));
            false
        }
    };

    let pulse = if task == Some(Task::PulseExtent) || f.has_section("pulse") {
        let w = f.req_num("pulse.wavelength_nm", "pulse-extent");
        let d = f.req_num("pulse.duration_ps", "pulse-extent");
        match (w, d) {
            (Some(w), Some(d)) => f.check("pulse", homspec_core::numerics::pulse_extent(w, d)).map(|_| (w, d)),
            _ => None,
        }
    } else {
        None
    };

    if !f.errors.is_empty() {
        return Err(ScenarioError { errors: f.errors });
    }
    Ok(Scenario {
        name,
        task: task.expect("checked above"),
        system,
        drive,
        sample,
        biphoton,
        splitter: splitter.expect("checked above"),
        scale: scale.expect("checked above"),
        grid,
        schmidt,
        tau,
        observation_time,
        mzi_phase,
        mzi_single_mode,
        pulse,
        source: text.to_string(),
    })
}

fn parse_system(f: &mut Fields) -> Option<FourLevelSystem> {
    let e1 = f.req_num("system.omega_e1g_eV", "transition energy");
    let e21 = f.req_num("system.omega_e2e1_eV", "transition energy");
    let ef2 = f.req_num("system.omega_fe2_eV", "transition energy");
    let mu = [f.num_or("system.mu_e1g", 1.0), f.num_or("system.mu_e2e1", 1.0), f.num_or("system.mu_fe2", 1.0)];
    let g = [
        f.num_or("system.gamma_e1g_eV", DEFAULT_DEPHASING),
        f.num_or("system.gamma_e2g_eV", DEFAULT_DEPHASING),
        f.num_or("system.gamma_fg_eV", DEFAULT_DEPHASING),
    ];
    let sys = f.check("system", FourLevelSystem::new(e1?, e21?, ef2?))?;
    let sys = f.check("system", sys.with_dipoles(mu[0], mu[1], mu[2]))?;
    f.check("system", sys.with_dephasing(g[0], g[1], g[2]))
}

fn parse_sample(f: &mut Fields, system: Option<FourLevelSystem>, drive: Option<ClassicalDrive>) -> Option<Sample> {
    let enabled = f.bool("sample.enabled").unwrap_or(true);
    let (Some(sys), Some(drive)) = (system, drive) else {
        if f.has_section("sample") && f.bool("sample.enabled") != Some(false) {
            f.errors.push("`sample.*` given without a `system.*` section".into());
        }
        return None;
    };
    let coupling = match (f.has("sample.depth"), f.has("sample.coupling")) {
        (true, true) => {
            f.errors.push("give either `sample.depth` or `sample.coupling`, not both".into());
            return None;
        }
        (_, true) => f.num("sample.coupling")?,
        _ => {
            let depth = f.num_or("sample.depth", 0.5);
            if !(0.0..1.0).contains(&depth) {
                f.errors.push("`sample.depth` must lie in [0, 1)".into());
                return None;
            }
            Sample::coupling_for_depth(&sys, depth)
        }
    };
    let s = f.check("sample", Sample::new(sys, drive, coupling))?;
    enabled.then_some(s)
}

fn parse_biphoton(f: &mut Fields) -> Option<BiphotonAmplitude> {
    let kind = match f.string("biphoton.kind") {
        Some(k) => k,
        None => {
            if !f.has("biphoton.kind") {
                f.errors.push("missing required field `biphoton.kind`".into());
            }
            return None;
        }
    };
    let pump = f.req_num("biphoton.pump_eV", "pump frequency");
    let amp = match kind.as_str() {
        "gaussian" => {
            let sp = f.req_num("biphoton.sigma_plus_eV", "gaussian source");
            let sm = f.req_num("biphoton.sigma_minus_eV", "gaussian source");
            BiphotonAmplitude::Gaussian(f.check("biphoton", GaussianBiphotonParams::new(pump?, sp?, sm?))?)
        }
        "narrowband-sinc" => {
            let t = f.req_num("biphoton.t_ent_inv_eV", "narrowband source");
            BiphotonAmplitude::NarrowbandSinc(f.check("biphoton", NarrowbandSinc::new(pump?, t?))?)
        }
        "sinc-pdc" => {
            let p = SincPdcParams {
                pump: pump?,
                pump_bandwidth: f.req_num("biphoton.pump_bandwidth_eV", "sinc-pdc source")?,
                crystal_length: f.req_num("biphoton.crystal_length", "sinc-pdc source")?,
                k_a: f.req_num("biphoton.k_a", "sinc-pdc source")?,
                k_b: f.req_num("biphoton.k_b", "sinc-pdc source")?,
                k_p: f.req_num("biphoton.k_p", "sinc-pdc source")?,
            };
            f.check("biphoton", p.validate())?;
            BiphotonAmplitude::SincPdc(p)
        }
        other => {
            f.errors.push(format!("`biphoton.kind` = `{other}` is not one of gaussian, sinc-pdc, narrowband-sinc"));
            return None;
        }
    };
    Some(amp)
}
