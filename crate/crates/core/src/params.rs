//! Physical constants, experimental inputs and the constants derived from them.
//!
//! Every frequency held here is angular (rad/s). Unit conversion from the
//! user-facing config (Hz, mW, mK, ...) happens once, in [`crate::config`].

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, J s.
    pub hbar: f64,
    /// Boltzmann constant, J/K.
    pub k_b: f64,
    /// Speed of light in vacuum, m/s.
    pub c_light: f64,
}

impl PhysicalConstants {
    pub const CODATA: Self = Self {
        hbar: 1.054_571_817e-34,
        k_b: 1.380_649e-23,
        c_light: 2.997_924_58e8,
    };
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::CODATA
    }
}

/// How the laser-cavity detuning is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum DetuningSpec {
    /// Effective detuning Delta (rad/s), already including the radiation-pressure shift.
    Effective(f64),
    /// Bare detuning Delta0 = omega_c - omega_L (rad/s); the operating points
    /// follow from the multistability quintic.
    Bare(f64),
    /// Effective detuning pinned to the degenerate point sqrt(omega_m^2 + 4G^2),
    /// where the parametrically shifted cavity frequency matches omega_m.
    Degenerate,
}

/// Experimental inputs, SI units, angular frequencies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Laser wavelength, m.
    pub lambda_laser: f64,
    /// Cavity length, m.
    pub cavity_length: f64,
    /// Effective mirror mass, kg.
    pub mass: f64,
    /// Cavity amplitude decay rate, rad/s (total linewidth 2 kappa).
    pub kappa: f64,
    /// Mechanical frequency, rad/s.
    pub omega_m: f64,
    /// Mechanical quality factor omega_m / gamma_m.
    pub quality_factor: f64,
    /// Bath temperature, K.
    pub temperature: f64,
    /// Parametric gain G, rad/s.
    pub parametric_gain: f64,
    /// Phase theta of the field pumping the amplifier, rad.
    pub parametric_phase: f64,
    /// Input laser power, W.
    pub laser_power: f64,
    pub detuning: DetuningSpec,
}

impl SystemParams {
    /// The optomechanical normal-mode-splitting experiment parameters:
    /// 1064 nm, 25 mm, 145 ng, kappa = 2pi x 215 kHz, omega_m = 2pi x 947 kHz,
    /// Q' = 6700, T = 300 mK, theta = pi/4, 6.9 mW, G = 0, Delta = omega_m.
    pub fn reference() -> Self {
        let omega_m = 2.0 * PI * 947e3;
        Self {
            lambda_laser: 1064e-9,
            cavity_length: 25e-3,
            mass: 145e-12,
            kappa: 2.0 * PI * 215e3,
            omega_m,
            quality_factor: 6700.0,
            temperature: 0.3,
            parametric_gain: 0.0,
            parametric_phase: PI / 4.0,
            laser_power: 6.9e-3,
            detuning: DetuningSpec::Effective(omega_m),
        }
    }

    pub fn with_gain_over_kappa(mut self, g: f64) -> Self {
        self.parametric_gain = g * self.kappa;
        self
    }

    pub fn with_power_mw(mut self, mw: f64) -> Self {
        self.laser_power = mw * 1e-3;
        self
    }

    pub fn with_detuning(mut self, detuning: DetuningSpec) -> Self {
        self.detuning = detuning;
        self
    }

    /// Checks the hard invariants. The error names the offending field.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda_laser", self.lambda_laser),
            ("cavity_length", self.cavity_length),
            ("mass", self.mass),
            ("kappa", self.kappa),
            ("omega_m", self.omega_m),
            ("quality_factor", self.quality_factor),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        let nonnegative = [
            ("temperature", self.temperature),
            ("parametric_gain", self.parametric_gain),
            ("laser_power", self.laser_power),
        ];
        for (name, value) in nonnegative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and >= 0, got {value}"),
                });
            }
        }
        if !self.parametric_phase.is_finite() {
            return Err(Error::InvalidParameter {
                name: "parametric_phase",
                reason: "must be finite".into(),
            });
        }
        match self.detuning {
            DetuningSpec::Effective(v) | DetuningSpec::Bare(v) if !v.is_finite() => {
                Err(Error::InvalidParameter {
                    name: "detuning",
                    reason: "must be finite".into(),
                })
            }
            _ => Ok(()),
        }
    }

    pub fn gamma_m(&self) -> f64 {
        self.omega_m / self.quality_factor
    }

    /// Effective detuning for the `Effective` and `Degenerate` modes; `None` in bare mode.
    pub fn effective_detuning(&self) -> Option<f64> {
        match self.detuning {
            DetuningSpec::Effective(delta) => Some(delta),
            DetuningSpec::Degenerate => Some(
                (self.omega_m * self.omega_m + 4.0 * self.parametric_gain * self.parametric_gain)
                    .sqrt(),
            ),
            DetuningSpec::Bare(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Laser angular frequency, rad/s.
    pub omega_l: f64,
    /// Cavity angular frequency, rad/s.
    pub omega_c: f64,
    /// Dimensionless optomechanical coupling.
    pub chi: f64,
    /// Drive amplitude sqrt(2 kappa P / (hbar omega_L)), s^-1/2 scaled to photon amplitude rate.
    pub epsilon: f64,
    /// Mechanical energy damping rate, rad/s.
    pub gamma_m: f64,
    pub consts: PhysicalConstants,
}

pub fn derive_constants(p: &SystemParams, consts: &PhysicalConstants) -> Result<DerivedConstants> {
    p.validate()?;
    let omega_l = 2.0 * PI * consts.c_light / p.lambda_laser;
    let omega_c = match p.detuning {
        DetuningSpec::Bare(delta0) => omega_l + delta0,
        _ => omega_l,
    };
    let chi = (1.0 / p.omega_m)
        * (omega_c / p.cavity_length)
        * (consts.hbar / (2.0 * p.mass * p.omega_m)).sqrt();
    let epsilon = (2.0 * p.kappa * p.laser_power / (consts.hbar * omega_l)).sqrt();
    Ok(DerivedConstants {
        omega_l,
        omega_c,
        chi,
        epsilon,
        gamma_m: p.gamma_m(),
        consts: *consts,
    })
}

/// Regime warnings for the resolved-sideband analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Diagnostic {
    /// omega_m <= kappa: sidebands not resolved.
    UnresolvedSideband { omega_m: f64, kappa: f64 },
    /// Delta <= 2G: the parametrically shifted cavity frequency is not real.
    DetuningBelowTwiceGain { delta: f64, gain: f64 },
    /// kappa <= gamma_m.
    CavityDampingNotDominant { kappa: f64, gamma_m: f64 },
    /// omega_m is not far below the free spectral range pi c / L.
    NonAdiabatic { omega_m: f64, free_spectral_range: f64 },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::UnresolvedSideband { omega_m, kappa } => write!(
                f,
                "omega_m <= kappa (omega_m = {omega_m:e}, kappa = {kappa:e}): not in the resolved-sideband regime"
            ),
            Diagnostic::DetuningBelowTwiceGain { delta, gain } => write!(
                f,
                "Delta <= 2G (Delta = {delta:e}, G = {gain:e}): sqrt(Delta^2 - 4G^2) is not real"
            ),
            Diagnostic::CavityDampingNotDominant { kappa, gamma_m } => write!(
                f,
                "kappa <= gamma_m not >> (kappa = {kappa:e}, gamma_m = {gamma_m:e})"
            ),
            Diagnostic::NonAdiabatic {
                omega_m,
                free_spectral_range,
            } => write!(
                f,
                "omega_m = {omega_m:e} is not << free spectral range {free_spectral_range:e}: single-mode picture doubtful"
            ),
        }
    }
}

/// Ratio below which omega_m counts as "much smaller" than the free spectral range.
const ADIABATIC_RATIO: f64 = 1e-2;

/// Regime checks. In bare-detuning mode Delta0 stands in for Delta.
pub fn validate_params(p: &SystemParams) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if p.omega_m <= p.kappa {
        out.push(Diagnostic::UnresolvedSideband {
            omega_m: p.omega_m,
            kappa: p.kappa,
        });
    }
    let delta = match p.detuning {
        DetuningSpec::Bare(d0) => d0,
        _ => p.effective_detuning().unwrap_or(0.0),
    };
    if delta <= 2.0 * p.parametric_gain {
        out.push(Diagnostic::DetuningBelowTwiceGain {
            delta,
            gain: p.parametric_gain,
        });
    }
    let gamma_m = p.gamma_m();
    if p.kappa <= gamma_m {
        out.push(Diagnostic::CavityDampingNotDominant {
            kappa: p.kappa,
            gamma_m,
        });
    }
    let fsr = PI * PhysicalConstants::CODATA.c_light / p.cavity_length;
    if p.omega_m >= ADIABATIC_RATIO * fsr {
        out.push(Diagnostic::NonAdiabatic {
            omega_m: p.omega_m,
            free_spectral_range: fsr,
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn consts() -> PhysicalConstants {
        PhysicalConstants::CODATA
    }

    #[test]
    fn chi_for_reference_parameters() {
        // Reference evaluated with mpmath at 50 digits:
        // (1/wm) (wL/L) sqrt(hbar/(2 m wm)) = 2.94213939393115...e-6
        let d = derive_constants(&SystemParams::reference(), &consts()).unwrap();
        assert!((d.chi - 2.942_139_393_931_15e-6).abs() / 2.942_139_393_931_15e-6 < 1e-13);
    }

    #[test]
    fn gamma_m_from_quality_factor() {
        let p = SystemParams::reference();
        let d = derive_constants(&p, &consts()).unwrap();
        assert_eq!(d.gamma_m, p.omega_m / 6700.0);
    }

    #[test]
    fn zero_power_gives_zero_drive() {
        let p = SystemParams::reference().with_power_mw(0.0);
        let d = derive_constants(&p, &consts()).unwrap();
        assert_eq!(d.epsilon, 0.0);
    }

    #[test]
    fn scaling_laws() {
        let p = SystemParams::reference();
        let d = derive_constants(&p, &consts()).unwrap();
        let heavy = SystemParams {
            mass: 4.0 * p.mass,
            ..p
        };
        let dh = derive_constants(&heavy, &consts()).unwrap();
        assert!((dh.chi * 2.0 / d.chi - 1.0).abs() < 1e-14);
        let bright = SystemParams {
            laser_power: 4.0 * p.laser_power,
            ..p
        };
        let db = derive_constants(&bright, &consts()).unwrap();
        assert!((db.epsilon / (2.0 * d.epsilon) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn derive_is_bit_reproducible() {
        let p = SystemParams::reference().with_gain_over_kappa(1.3);
        let a = derive_constants(&p, &consts()).unwrap();
        let b = derive_constants(&p, &consts()).unwrap();
        assert_eq!(a.chi.to_bits(), b.chi.to_bits());
        assert_eq!(a.epsilon.to_bits(), b.epsilon.to_bits());
    }

    #[test]
    fn bare_mode_shifts_cavity_frequency() {
        let p = SystemParams::reference().with_detuning(DetuningSpec::Bare(1e6));
        let d = derive_constants(&p, &consts()).unwrap();
        assert_eq!(d.omega_c, d.omega_l + 1e6);
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        for (name, p) in [
            ("lambda_laser", SystemParams { lambda_laser: 0.0, ..SystemParams::reference() }),
            ("cavity_length", SystemParams { cavity_length: -1.0, ..SystemParams::reference() }),
            ("mass", SystemParams { mass: 0.0, ..SystemParams::reference() }),
            ("omega_m", SystemParams { omega_m: 0.0, ..SystemParams::reference() }),
            ("quality_factor", SystemParams { quality_factor: 0.0, ..SystemParams::reference() }),
            ("laser_power", SystemParams { laser_power: -1e-3, ..SystemParams::reference() }),
            ("temperature", SystemParams { temperature: -1.0, ..SystemParams::reference() }),
        ] {
            match derive_constants(&p, &consts()) {
                Err(Error::InvalidParameter { name: got, .. }) => assert_eq!(got, name),
                other => panic!("{name}: expected rejection, got {other:?}"),
            }
        }
    }

    #[test]
    fn reference_regime_is_clean() {
        assert!(validate_params(&SystemParams::reference()).is_empty());
    }

    #[test]
    fn detuning_below_twice_gain_warns() {
        let mut p = SystemParams::reference().with_gain_over_kappa(2.0);
        p.detuning = DetuningSpec::Effective(1.5 * p.parametric_gain);
        let diags = validate_params(&p);
        assert!(diags
            .iter()
            .any(|d| matches!(d, Diagnostic::DetuningBelowTwiceGain { .. })));
        assert!(diags.iter().any(|d| d.to_string().contains("Delta <= 2G")));
    }

    #[test]
    fn kappa_equal_gamma_warns() {
        let mut p = SystemParams::reference();
        p.kappa = p.gamma_m();
        let diags = validate_params(&p);
        assert!(diags
            .iter()
            .any(|d| d.to_string().contains("kappa <= gamma_m not >>")));
    }

    #[test]
    fn validate_does_not_mutate() {
        let p = SystemParams::reference().with_gain_over_kappa(3.0);
        let copy = p;
        let _ = validate_params(&p);
        assert_eq!(p, copy);
    }
}
