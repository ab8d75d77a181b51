//! Flat JSON run configuration in laboratory units.
//!
//! ```json
//! {
//!   "lambda_nm": 1064, "cavity_length_mm": 25, "mass_ng": 145,
//!   "kappa_hz": 215000, "omega_m_hz": 947000, "quality_factor": 6700,
//!   "temperature_mk": 300, "parametric_gain_over_kappa": 1.3,
//!   "parametric_phase_rad": 0.7853981633974483, "laser_power_mw": 6.9,
//!   "detuning_mode": "effective", "detuning_over_omega_m": 1.0
//! }
//! ```
//!
//! `kappa_hz` and `omega_m_hz` are ordinary frequencies (kappa/2pi, omega_m/2pi);
//! they are multiplied by 2pi here and nowhere else.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DetuningSpec, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DetuningMode {
    Effective,
    Bare,
    Degenerate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsConfig {
    pub lambda_nm: f64,
    pub cavity_length_mm: f64,
    pub mass_ng: f64,
    pub kappa_hz: f64,
    pub omega_m_hz: f64,
    pub quality_factor: f64,
    pub temperature_mk: f64,
    pub parametric_gain_over_kappa: f64,
    pub parametric_phase_rad: f64,
    pub laser_power_mw: f64,
    pub detuning_mode: DetuningMode,
    /// Required unless `detuning_mode` is `degenerate`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning_over_omega_m: Option<f64>,
}

impl ParamsConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            Error::Config {
                key: offending_key(&msg).unwrap_or_else(|| "<document>".into()),
                reason: msg,
            }
        })
    }

    pub fn from_params(p: &SystemParams) -> Self {
        let (detuning_mode, detuning_over_omega_m) = match p.detuning {
            DetuningSpec::Effective(d) => (DetuningMode::Effective, Some(d / p.omega_m)),
            DetuningSpec::Bare(d) => (DetuningMode::Bare, Some(d / p.omega_m)),
            DetuningSpec::Degenerate => (DetuningMode::Degenerate, None),
        };
        Self {
            lambda_nm: p.lambda_laser * 1e9,
            cavity_length_mm: p.cavity_length * 1e3,
            mass_ng: p.mass * 1e12,
            kappa_hz: p.kappa / (2.0 * PI),
            omega_m_hz: p.omega_m / (2.0 * PI),
            quality_factor: p.quality_factor,
            temperature_mk: p.temperature * 1e3,
            parametric_gain_over_kappa: p.parametric_gain / p.kappa,
            parametric_phase_rad: p.parametric_phase,
            laser_power_mw: p.laser_power * 1e3,
            detuning_mode,
            detuning_over_omega_m,
        }
    }

    /// Converts to SI/angular units and validates; errors name the config key.
    pub fn to_params(&self) -> Result<SystemParams> {
        let positive = [
            ("lambda_nm", self.lambda_nm),
            ("cavity_length_mm", self.cavity_length_mm),
            ("mass_ng", self.mass_ng),
            ("kappa_hz", self.kappa_hz),
            ("omega_m_hz", self.omega_m_hz),
            ("quality_factor", self.quality_factor),
        ];
        for (key, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(key, format!("must be finite and > 0, got {v}")));
            }
        }
        let nonnegative = [
            ("temperature_mk", self.temperature_mk),
            ("parametric_gain_over_kappa", self.parametric_gain_over_kappa),
            ("laser_power_mw", self.laser_power_mw),
        ];
        for (key, v) in nonnegative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(bad(key, format!("must be finite and >= 0, got {v}")));
            }
        }
        if !self.parametric_phase_rad.is_finite() {
            return Err(bad("parametric_phase_rad", "must be finite".into()));
        }
        let kappa = 2.0 * PI * self.kappa_hz;
        let omega_m = 2.0 * PI * self.omega_m_hz;
        let detuning = match self.detuning_mode {
            DetuningMode::Degenerate => DetuningSpec::Degenerate,
            mode => {
                let x = self
                    .detuning_over_omega_m
                    .ok_or_else(|| bad("detuning_over_omega_m", "missing field".into()))?;
                if !x.is_finite() {
                    return Err(bad("detuning_over_omega_m", "must be finite".into()));
                }
                if mode == DetuningMode::Effective {
                    DetuningSpec::Effective(x * omega_m)
                } else {
                    DetuningSpec::Bare(x * omega_m)
                }
            }
        };
        let p = SystemParams {
            lambda_laser: self.lambda_nm * 1e-9,
            cavity_length: self.cavity_length_mm * 1e-3,
            mass: self.mass_ng * 1e-12,
            kappa,
            omega_m,
            quality_factor: self.quality_factor,
            temperature: self.temperature_mk * 1e-3,
            parametric_gain: self.parametric_gain_over_kappa * kappa,
            parametric_phase: self.parametric_phase_rad,
            laser_power: self.laser_power_mw * 1e-3,
            detuning,
        };
        p.validate().map_err(|e| match e {
            Error::InvalidParameter { name, reason } => bad(field_to_key(name), reason),
            other => other,
        })?;
        Ok(p)
    }
}

fn bad(key: &str, reason: String) -> Error {
    Error::Config {
        key: key.to_string(),
        reason,
    }
}

fn field_to_key(field: &str) -> &str {
    match field {
        "lambda_laser" => "lambda_nm",
        "cavity_length" => "cavity_length_mm",
        "mass" => "mass_ng",
        "kappa" => "kappa_hz",
        "omega_m" => "omega_m_hz",
        "temperature" => "temperature_mk",
        "parametric_gain" => "parametric_gain_over_kappa",
        "parametric_phase" => "parametric_phase_rad",
        "laser_power" => "laser_power_mw",
        "detuning" => "detuning_over_omega_m",
        other => other,
    }
}

/// Pulls the backtick-quoted field name out of a serde_json message.
fn offending_key(msg: &str) -> Option<String> {
    let start = msg.find('`')? + 1;
    let len = msg[start..].find('`')?;
    Some(msg[start..start + len].to_string())
}
