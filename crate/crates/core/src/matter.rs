//! Four-level molecular model and its third-order response.
//!
//! Only the ladder pathway `g -> e1 -> e2 -> f` is kept. With the two
//! classical frequencies fixed, the photon enters through the last
//! interaction only, so the photon-frequency response is a single Lorentzian
//! pole in `w`. Its time-domain form is evaluated from that pole.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{Signal, TimeGrid, TimeSignal};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Transition energies, dipoles and dephasing rates of the ladder
/// `g -> e1 -> e2 -> f`. Energies and rates in eV, dipoles in arbitrary units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourLevelSystem {
    pub omega_e1g: f64,
    pub omega_e2e1: f64,
    pub omega_fe2: f64,
    pub mu_e1g: f64,
    pub mu_e2e1: f64,
    pub mu_fe2: f64,
    pub gamma_e1g: f64,
    pub gamma_e2g: f64,
    pub gamma_fg: f64,
}

pub const DEFAULT_DEPHASING: f64 = 0.05;

impl FourLevelSystem {
    /// Unit dipoles and the default dephasing on all three coherences.
    pub fn new(omega_e1g: f64, omega_e2e1: f64, omega_fe2: f64) -> Result<Self> {
        let s = Self {
            omega_e1g,
            omega_e2e1,
            omega_fe2,
            mu_e1g: 1.0,
            mu_e2e1: 1.0,
            mu_fe2: 1.0,
            gamma_e1g: DEFAULT_DEPHASING,
            gamma_e2g: DEFAULT_DEPHASING,
            gamma_fg: DEFAULT_DEPHASING,
        };
        s.validate()?;
        Ok(s)
    }

    /// 3, 2 and 1 eV ladder steps, so `omega_fg = 6 eV`.
    pub fn model() -> Self {
        Self::new(3.0, 2.0, 1.0).expect("valid model system")
    }

    pub fn with_dephasing(mut self, gamma_e1g: f64, gamma_e2g: f64, gamma_fg: f64) -> Result<Self> {
        self.gamma_e1g = gamma_e1g;
        self.gamma_e2g = gamma_e2g;
        self.gamma_fg = gamma_fg;
        self.validate()?;
        Ok(self)
    }

    pub fn with_dipoles(mut self, mu_e1g: f64, mu_e2e1: f64, mu_fe2: f64) -> Result<Self> {
        self.mu_e1g = mu_e1g;
        self.mu_e2e1 = mu_e2e1;
        self.mu_fe2 = mu_fe2;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.omega_e1g,
            self.omega_e2e1,
            self.omega_fe2,
            self.mu_e1g,
            self.mu_e2e1,
            self.mu_fe2,
            self.gamma_e1g,
            self.gamma_e2g,
            self.gamma_fg,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "four-level system" });
        }
        for (name, v) in [
            ("omega_e1g", self.omega_e1g),
            ("omega_e2e1", self.omega_e2e1),
            ("omega_fe2", self.omega_fe2),
            ("gamma_e1g", self.gamma_e1g),
            ("gamma_e2g", self.gamma_e2g),
            ("gamma_fg", self.gamma_fg),
        ] {
            if v <= 0.0 {
                return Err(Error::param(name, "must be > 0"));
            }
        }
        Ok(())
    }

    pub fn omega_e2g(&self) -> f64 {
        self.omega_e1g + self.omega_e2e1
    }

    pub fn omega_fg(&self) -> f64 {
        self.omega_e2g() + self.omega_fe2
    }

    /// Classical frequencies tuned to the first two ladder steps.
    pub fn resonant_drive(&self) -> ClassicalDrive {
        ClassicalDrive { omega1: self.omega_e1g, omega2: self.omega_e2e1 }
    }
}

/// The two fixed classical frequencies; the third interaction is the photon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassicalDrive {
    pub omega1: f64,
    pub omega2: f64,
}

impl ClassicalDrive {
    pub fn new(omega1: f64, omega2: f64) -> Result<Self> {
        let d = Self { omega1, omega2 };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.omega1.is_finite() || !self.omega2.is_finite() {
            return Err(Error::NonFinite { what: "classical drive" });
        }
        if self.omega1 <= 0.0 || self.omega2 <= 0.0 {
            return Err(Error::param("drive", "classical frequencies must be > 0"));
        }
        Ok(())
    }
}

/// Ladder-diagram third-order susceptibility for interactions at
/// `omega_a`, `omega_b`, `omega_c` (emitted frequency `omega_a + omega_b + omega_c`).
pub fn chi3(system: &FourLevelSystem, omega_a: f64, omega_b: f64, omega_c: f64) -> Result<C64> {
    let d3 = C64::new(omega_a + omega_b + omega_c - system.omega_fg(), system.gamma_fg);
    let d2 = C64::new(omega_a + omega_b - system.omega_e2g(), system.gamma_e2g);
    let d1 = C64::new(omega_a - system.omega_e1g, system.gamma_e1g);
    if d1 == C64::new(0.0, 0.0) || d2 == C64::new(0.0, 0.0) || d3 == C64::new(0.0, 0.0) {
        return Err(Error::PoleOnRealAxis);
    }
    let num = -system.mu_fe2 * system.mu_e2e1 * system.mu_e1g;
    let v = num / (d3 * d2 * d1);
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::NonFinite { what: "chi3" });
    }
    Ok(v)
}

/// Susceptibility as a function of the photon frequency `omega`, with the
/// scanned third frequency fixed by energy conservation:
/// `omega_3 = omega - omega_1 - omega_2`.
pub fn chi3_photon(system: &FourLevelSystem, drive: &ClassicalDrive, omega: f64) -> Result<C64> {
    chi3(system, drive.omega1, drive.omega2, omega - drive.omega1 - drive.omega2)
}

/// Residue `K` and pole `p` with `chi3_photon(w) = K / (w - p)`.
pub fn chi3_pole(system: &FourLevelSystem, drive: &ClassicalDrive) -> Result<(C64, C64)> {
    let d2 = C64::new(drive.omega1 + drive.omega2 - system.omega_e2g(), system.gamma_e2g);
    let d1 = C64::new(drive.omega1 - system.omega_e1g, system.gamma_e1g);
    if d1 == C64::new(0.0, 0.0) || d2 == C64::new(0.0, 0.0) {
        return Err(Error::PoleOnRealAxis);
    }
    let residue = -system.mu_fe2 * system.mu_e2e1 * system.mu_e1g / (d2 * d1);
    let pole = C64::new(system.omega_fg(), -system.gamma_fg);
    Ok((residue, pole))
}

/// Time-domain response `(2 pi)^(-1/2) \int dw chi3_photon(w) e^(-i w t)`.
///
/// Closing the contour in the lower half plane picks up the single pole at
/// `omega_fg - i gamma_fg`, giving `-i sqrt(2 pi) K e^(-i p t)` for `t > 0`
/// and zero for `t < 0`. The `t = 0` sample carries half the jump, which is
/// what Fourier inversion converges to there.
///
/// The result is flagged when the grid does not resolve the decay
/// (`gamma_fg * dt > 1`) or the response has not decayed to `1e-6` of its
/// peak by the end of the grid.
pub fn chi3_time(system: &FourLevelSystem, drive: &ClassicalDrive, tgrid: &TimeGrid) -> Result<TimeSignal> {
    let (residue, pole) = chi3_pole(system, drive)?;
    if pole.im >= 0.0 {
        return Err(Error::param("gamma_fg", "must be > 0 for a causal response"));
    }
    let amp = -I * (2.0 * PI).sqrt() * residue;
    let signal = Signal::from_fn(*tgrid, |t| {
        if t > 0.0 {
            amp * (-I * pole * t).exp()
        } else if t == 0.0 {
            0.5 * amp
        } else {
            C64::new(0.0, 0.0)
        }
    })?;
    let gamma = -pole.im;
    let unresolved = gamma * tgrid.step() > 1.0;
    let undecayed = (-gamma * tgrid.last()).exp() > 1e-6;
    Ok(signal.with_alias_flag(unresolved || undecayed))
}

/// Weak-coupling transmission filter `T(w) = 1 - i A0 chi3_photon(w)`.
pub fn transmission(system: &FourLevelSystem, drive: &ClassicalDrive, omega: f64, coupling: f64) -> Result<C64> {
    if !coupling.is_finite() || coupling < 0.0 {
        return Err(Error::param("coupling", "A0 must be finite and >= 0"));
    }
    if coupling == 0.0 {
        return Ok(C64::new(1.0, 0.0));
    }
    Ok(1.0 - I * coupling * chi3_photon(system, drive, omega)?)
}

/// Material placed in arm `a` of the interferometer: the system, the
/// classical drive and the coupling strength `A0` of the transmission filter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub system: FourLevelSystem,
    pub drive: ClassicalDrive,
    pub coupling: f64,
}

impl Sample {
    pub fn new(system: FourLevelSystem, drive: ClassicalDrive, coupling: f64) -> Result<Self> {
        system.validate()?;
        drive.validate()?;
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(Error::param("coupling", "A0 must be finite and >= 0"));
        }
        Ok(Self { system, drive, coupling })
    }

    pub fn transmission(&self, omega: f64) -> Result<C64> {
        transmission(&self.system, &self.drive, omega, self.coupling)
    }

    /// Coupling that makes the resonant dip of `|T|` reach `1 - depth`, for a
    /// resonant drive: `A0 = depth * gamma_e1g * gamma_e2g * gamma_fg / (mu mu mu)`.
    pub fn coupling_for_depth(system: &FourLevelSystem, depth: f64) -> f64 {
        depth * system.gamma_e1g * system.gamma_e2g * system.gamma_fg
            / (system.mu_e1g * system.mu_e2e1 * system.mu_fe2).abs()
    }
}

/// Molecule positions and the wavevector mismatch of the detected mode.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeCloud {
    pub positions: Vec<[f64; 3]>,
    pub delta_k: [f64; 3],
}

/// `f(dk) = (1/N) sum_a exp(i dk . r_a)`.
pub fn phase_matching_factor(cloud: &MoleculeCloud) -> Result<C64> {
    if cloud.positions.is_empty() {
        return Err(Error::param("positions", "molecule cloud is empty"));
    }
    let dk = cloud.delta_k;
    let sum: C64 = cloud
        .positions
        .iter()
        .map(|r| {
            let phase = dk[0] * r[0] + dk[1] * r[1] + dk[2] * r[2];
            if phase == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                C64::from_polar(1.0, phase)
            }
        })
        .sum();
    let f = sum / cloud.positions.len() as f64;
    if !f.re.is_finite() || !f.im.is_finite() {
        return Err(Error::NonFinite { what: "phase-matching factor" });
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_system(gamma: f64) -> FourLevelSystem {
        FourLevelSystem::model().with_dephasing(gamma, gamma, gamma).unwrap()
    }

    #[test]
    fn triple_resonance_value() {
        let s = unit_system(0.1);
        let v = chi3(&s, 3.0, 2.0, 1.0).unwrap();
        assert!((v - C64::new(0.0, -1000.0)).norm() < 1e-9, "{v}");
    }

    #[test]
    fn far_off_resonance_is_negligible() {
        let s = unit_system(0.1);
        let res = chi3(&s, 3.0, 2.0, 1.0).unwrap().norm();
        let off = chi3(&s, 3.0 + 1e6, 2.0, 1.0).unwrap().norm();
        assert!(off < 1e-6 * res);
    }

    #[test]
    fn negative_dephasing_conjugates() {
        let s = unit_system(0.07);
        let mut neg = s;
        neg.gamma_e1g = -s.gamma_e1g;
        neg.gamma_e2g = -s.gamma_e2g;
        neg.gamma_fg = -s.gamma_fg;
        for &(a, b, c) in &[(2.9, 2.1, 1.3), (3.4, 1.0, 0.2), (1.0, 1.0, 1.0)] {
            let p = chi3(&s, a, b, c).unwrap();
            let m = chi3(&neg, a, b, c).unwrap();
            assert!((m - p.conj()).norm() < 1e-12 * p.norm());
        }
    }

    #[test]
    fn zero_dephasing_at_resonance_rejected() {
        let mut s = FourLevelSystem::model();
        s.gamma_e1g = 0.0;
        assert_eq!(chi3(&s, 3.0, 2.0, 0.5), Err(Error::PoleOnRealAxis));
        assert!(s.validate().is_err());
    }

    #[test]
    fn photon_response_peaks_at_omega_fg() {
        let s = FourLevelSystem::model();
        let d = s.resonant_drive();
        let peak = chi3_photon(&s, &d, 6.0).unwrap().norm();
        for w in [5.9, 5.99, 6.01, 6.1] {
            assert!(chi3_photon(&s, &d, w).unwrap().norm() < peak);
        }
        let g = s.gamma_fg;
        for w in [6.0 - g, 6.0 + g] {
            let r = chi3_photon(&s, &d, w).unwrap().norm() / peak;
            assert!((r - 0.5f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn detuned_drive_suppressed() {
        let s = FourLevelSystem::model();
        let res = chi3_photon(&s, &s.resonant_drive(), 6.0).unwrap().norm();
        let d = ClassicalDrive::new(3.0 + 1e3, 2.0).unwrap();
        let off = chi3_photon(&s, &d, 6.0 + 1e3).unwrap().norm();
        assert!(off <= 1e-6 * res);
    }

    #[test]
    fn pole_form_matches_direct_evaluation() {
        let s = FourLevelSystem::model().with_dephasing(0.03, 0.08, 0.05).unwrap();
        let d = ClassicalDrive::new(2.9, 2.2).unwrap();
        let (k, p) = chi3_pole(&s, &d).unwrap();
        for w in [4.0, 5.5, 6.0, 6.3, 9.0] {
            let direct = chi3_photon(&s, &d, w).unwrap();
            assert!((direct - k / (w - p)).norm() < 1e-12 * direct.norm());
        }
    }

    #[test]
    fn time_response_is_causal_and_decays_at_gamma_fg() {
        let s = FourLevelSystem::model();
        let d = s.resonant_drive();
        let g = TimeGrid::from_step(0.1, 8192).unwrap();
        let chi = chi3_time(&s, &d, &g).unwrap();
        assert!(!chi.aliased());
        let neg = chi.values()[..g.origin()].iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(neg <= 1e-6 * chi.max_abs());
        let a = chi.at_time(10.0).unwrap().norm();
        let b = chi.at_time(20.0).unwrap().norm();
        assert!(((a / b).ln() / 10.0 - s.gamma_fg).abs() < 1e-12);
    }

    #[test]
    fn transmission_values() {
        let s = unit_system(0.1);
        let d = s.resonant_drive();
        assert_eq!(transmission(&s, &d, 6.3, 0.0).unwrap(), C64::new(1.0, 0.0));
        let t = transmission(&s, &d, 6.0, 1e-4).unwrap();
        assert!((t - C64::new(0.9, 0.0)).norm() < 1e-12);
        let far = transmission(&s, &d, 1e7, 1e-4).unwrap();
        assert!((far - 1.0).norm() < 1e-8);
        assert!(transmission(&s, &d, 6.0, -1.0).is_err());
    }

    #[test]
    fn coupling_for_depth_hits_requested_dip() {
        let s = FourLevelSystem::model();
        let a0 = Sample::coupling_for_depth(&s, 0.5);
        let t = transmission(&s, &s.resonant_drive(), s.omega_fg(), a0).unwrap();
        assert!((t - C64::new(0.5, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn phase_matching_limits() {
        let cloud = MoleculeCloud { positions: vec![[1.0, 2.0, 3.0], [-4.0, 0.5, 9.0]], delta_k: [0.0; 3] };
        assert_eq!(phase_matching_factor(&cloud).unwrap(), C64::new(1.0, 0.0));
        let single = MoleculeCloud { positions: vec![[0.0; 3]], delta_k: [3.0, -1.0, 7.0] };
        assert_eq!(phase_matching_factor(&single).unwrap(), C64::new(1.0, 0.0));
        let empty = MoleculeCloud { positions: vec![], delta_k: [1.0, 0.0, 0.0] };
        assert!(phase_matching_factor(&empty).is_err());
    }
}
