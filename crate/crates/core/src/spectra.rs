//! Mirror-position and output-field fluctuation spectra.
//!
//! All spectra share the denominator |d(omega)|^2 from
//! [`crate::linear_dynamics::d_omega`]. Thermal noise enters only through the
//! weights omega coth(hbar omega / 2 k_B T) (symmetrized position spectrum) and
//! omega [coth(hbar omega / 2 k_B T) - 1] (normally ordered output spectra).

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear_dynamics::{d_omega, is_stable};
use crate::params::{DerivedConstants, PhysicalConstants, SystemParams};
use crate::peaks::{find_peaks, Peak, PeakOptions};
use crate::steady_state::SteadyState;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    ExactCoth,
    /// coth(x) replaced by 1/x.
    HighTemperature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub mode: NoiseMode,
    /// Bath temperature, K.
    pub temperature: f64,
}

impl NoiseModel {
    pub fn exact(temperature: f64) -> Self {
        Self {
            mode: NoiseMode::ExactCoth,
            temperature,
        }
    }

    pub fn high_temperature(temperature: f64) -> Self {
        Self {
            mode: NoiseMode::HighTemperature,
            temperature,
        }
    }

    /// High-temperature form when k_B T / (hbar omega_m) > 100, exact otherwise.
    pub fn auto(p: &SystemParams, consts: &PhysicalConstants) -> Self {
        let ratio = consts.k_b * p.temperature / (consts.hbar * p.omega_m);
        if ratio > 100.0 {
            Self::high_temperature(p.temperature)
        } else {
            Self::exact(p.temperature)
        }
    }

    /// omega coth(hbar omega / 2 k_B T).
    pub fn symmetric_weight(&self, omega: f64, consts: &PhysicalConstants) -> f64 {
        let thermal = 2.0 * consts.k_b * self.temperature / consts.hbar;
        match self.mode {
            NoiseMode::HighTemperature => thermal,
            NoiseMode::ExactCoth => {
                if self.temperature == 0.0 {
                    omega.abs()
                } else if omega == 0.0 {
                    thermal
                } else {
                    omega / (omega / thermal).tanh()
                }
            }
        }
    }

    /// omega [coth(hbar omega / 2 k_B T) - 1]; nonnegative for both signs of omega.
    pub fn emission_weight(&self, omega: f64, consts: &PhysicalConstants) -> f64 {
        let thermal = 2.0 * consts.k_b * self.temperature / consts.hbar;
        match self.mode {
            NoiseMode::HighTemperature => thermal - omega,
            NoiseMode::ExactCoth => {
                if omega == 0.0 {
                    thermal
                } else if self.temperature == 0.0 {
                    // coth -> sign(omega)
                    if omega > 0.0 {
                        0.0
                    } else {
                        -2.0 * omega
                    }
                } else {
                    // coth(x) - 1 = 2 / expm1(2x)
                    2.0 * omega / (2.0 * omega / thermal).exp_m1()
                }
            }
        }
    }
}

impl FromStr for NoiseMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "exact" => Ok(NoiseMode::ExactCoth),
            "hight" | "high-t" | "high_temperature" => Ok(NoiseMode::HighTemperature),
            other => Err(format!("unknown noise mode `{other}` (expected exact|hight)")),
        }
    }
}

/// A strictly increasing list of angular frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid(Vec<f64>);

impl FrequencyGrid {
    pub fn new(points: Vec<f64>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidGrid("empty".into()));
        }
        if points.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidGrid("non-finite frequency".into()));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidGrid("not strictly increasing".into()));
        }
        Ok(Self(points))
    }

    /// `n` uniform points over [lo, hi] x omega_m.
    pub fn uniform(lo_over_omega_m: f64, hi_over_omega_m: f64, n: usize, omega_m: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {n}")));
        }
        let step = (hi_over_omega_m - lo_over_omega_m) / (n - 1) as f64;
        Self::new(
            (0..n)
                .map(|i| (lo_over_omega_m + step * i as f64) * omega_m)
                .collect(),
        )
    }

    pub fn points(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SpectrumKind {
    SQ,
    Scout,
    Sxout,
    Syout,
}

impl SpectrumKind {
    pub const ALL: [SpectrumKind; 4] = [Self::SQ, Self::Scout, Self::Sxout, Self::Syout];

    pub fn name(self) -> &'static str {
        match self {
            Self::SQ => "SQ",
            Self::Scout => "Scout",
            Self::Sxout => "Sxout",
            Self::Syout => "Syout",
        }
    }
}

impl fmt::Display for SpectrumKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpectrumKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown spectrum `{s}` (expected SQ|Scout|Sxout|Syout)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumResult {
    pub kind: SpectrumKind,
    /// Angular frequencies, rad/s.
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Peaks with positions and widths in rad/s.
    pub peaks: Vec<Peak>,
    pub operating_point: SteadyState,
}

impl SpectrumResult {
    fn new(kind: SpectrumKind, grid: &FrequencyGrid, values: Vec<f64>, ss: &SteadyState) -> Self {
        let peaks = find_peaks(grid.points(), &values, PeakOptions::default());
        Self {
            kind,
            grid: grid.points().to_vec(),
            values,
            peaks,
            operating_point: *ss,
        }
    }
}

/// Radiation-pressure bracket of the position spectrum,
/// `(kappa^2 + omega^2 + Delta^2 + 4G^2)|c_s|^2 + 2G e^{i theta} c_s*^2 (kappa - i Delta) + c.c.`.
pub fn sq_radiation_bracket(ss: &SteadyState, p: &SystemParams, omega: f64) -> Complex64 {
    let c = ss.c_s;
    let g = p.parametric_gain;
    let e = Complex64::from_polar(1.0, p.parametric_phase);
    let k = p.kappa;
    let delta = ss.delta;
    Complex64::new(
        (k * k + omega * omega + delta * delta + 4.0 * g * g) * ss.photon_number,
        0.0,
    ) + 2.0 * g * e * c.conj() * c.conj() * Complex64::new(k, -delta)
        + 2.0 * g * e.conj() * c * c * Complex64::new(k, delta)
}

fn sq_value(ss: &SteadyState, d: &DerivedConstants, p: &SystemParams, noise: &NoiseModel, omega: f64) -> f64 {
    let wm = p.omega_m;
    let k = p.kappa;
    let g = p.parametric_gain;
    let delta = ss.delta;
    let radiation = 8.0 * wm * wm * d.chi * d.chi * k * sq_radiation_bracket(ss, p, omega).re;
    let cav = delta * delta + k * k - omega * omega - 4.0 * g * g;
    let thermal = 2.0 * (d.gamma_m / wm)
        * (cav * cav + 4.0 * k * k * omega * omega)
        * noise.symmetric_weight(omega, &d.consts);
    let dw = d_omega(ss, d, p, Complex64::new(omega, 0.0));
    wm * wm * (radiation + thermal) / dw.norm_sqr()
}

fn require_stable(ss: &SteadyState, d: &DerivedConstants, p: &SystemParams) -> Result<()> {
    if is_stable(ss, d, p) {
        Ok(())
    } else {
        Err(Error::Unstable)
    }
}

/// Symmetrized mirror position spectrum S_Q(omega) on a grid.
pub fn sq_spectrum(
    ss: &SteadyState,
    d: &DerivedConstants,
    p: &SystemParams,
    grid: &FrequencyGrid,
    noise: &NoiseModel,
) -> Result<SpectrumResult> {
    require_stable(ss, d, p)?;
    let values = grid
        .points()
        .iter()
        .map(|&w| sq_value(ss, d, p, noise, w))
        .collect();
    Ok(SpectrumResult::new(SpectrumKind::SQ, grid, values, ss))
}

/// Response of the output field to the thermal force (v), input noise (e) and
/// conjugate input noise (f) at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutputCoefficients {
    pub v: Complex64,
    pub e: Complex64,
    pub f: Complex64,
}

pub fn output_coefficients(
    ss: &SteadyState,
    d: &DerivedConstants,
    p: &SystemParams,
    omega: f64,
) -> OutputCoefficients {
    let wm = p.omega_m;
    let k = p.kappa;
    let g = p.parametric_gain;
    let delta = ss.delta;
    let c = ss.c_s;
    let e_theta = Complex64::from_polar(1.0, p.parametric_phase);
    let w = Complex64::new(omega, 0.0);

    let dw = d_omega(ss, d, p, w);
    let k_plus = Complex64::new(k, -(omega + delta)); // kappa - i(omega + Delta)
    let k_minus = Complex64::new(k, -(omega - delta)); // kappa - i(omega - Delta)
    let drive = k_plus * c - 2.0 * g * e_theta * c.conj();

    let v = -(2.0 * k).sqrt() * wm * wm * d.chi / dw * I * drive;

    let kw = Complex64::new(k, -omega);
    let cavity = kw * kw + delta * delta - 4.0 * g * g;
    let pref = 2.0 * k / cavity;
    let mech = -2.0 * wm.powi(3) * d.chi * d.chi / dw * I * drive;

    let e = pref * (mech * (k_plus * c.conj() + 2.0 * g * e_theta.conj() * c) + k_plus) - 1.0;
    let f = pref * (mech * (k_minus * c + 2.0 * g * e_theta * c.conj()) + 2.0 * g * e_theta);
    OutputCoefficients { v, e, f }
}

/// The three output spectra at one frequency, as complex numbers whose
/// imaginary parts vanish analytically.
pub fn output_spectra_at(
    ss: &SteadyState,
    d: &DerivedConstants,
    p: &SystemParams,
    noise: &NoiseModel,
    omega: f64,
) -> [Complex64; 3] {
    let pos = output_coefficients(ss, d, p, omega);
    let neg = output_coefficients(ss, d, p, -omega);
    let weight = 2.0 * (d.gamma_m / p.omega_m) * noise.emission_weight(omega, &d.consts);

    let (v, f) = (pos.v, pos.f);
    let (vm, em) = (neg.v, neg.e);

    let scout = v.conj() * v * weight + f.conj() * f;
    let sxout = (vm + v.conj()) * (v + vm.conj()) * weight + (em + f.conj()) * (f + em.conj());
    let syout = -(v.conj() - vm) * (vm.conj() - v) * weight - (f.conj() - em) * (em.conj() - f);
    [scout, sxout, syout]
}

/// Output-field spectra on a grid for the requested kinds (`SQ` entries are ignored).
pub fn output_spectra(
    ss: &SteadyState,
    d: &DerivedConstants,
    p: &SystemParams,
    grid: &FrequencyGrid,
    noise: &NoiseModel,
    which: &[SpectrumKind],
) -> Result<Vec<SpectrumResult>> {
    require_stable(ss, d, p)?;
    let all: Vec<[Complex64; 3]> = grid
        .points()
        .iter()
        .map(|&w| output_spectra_at(ss, d, p, noise, w))
        .collect();
    let mut out = Vec::new();
    for (slot, kind) in [SpectrumKind::Scout, SpectrumKind::Sxout, SpectrumKind::Syout]
        .into_iter()
        .enumerate()
    {
        if which.contains(&kind) {
            let values = all.iter().map(|s| s[slot].re).collect();
            out.push(SpectrumResult::new(kind, grid, values, ss));
        }
    }
    Ok(out)
}

/// Any subset of the four spectra, in the order requested.
pub fn spectra(
    ss: &SteadyState,
    d: &DerivedConstants,
    p: &SystemParams,
    grid: &FrequencyGrid,
    noise: &NoiseModel,
    which: &[SpectrumKind],
) -> Result<Vec<SpectrumResult>> {
    let mut out = Vec::with_capacity(which.len());
    let outputs = output_spectra(ss, d, p, grid, noise, which)?;
    for kind in which {
        if *kind == SpectrumKind::SQ {
            out.push(sq_spectrum(ss, d, p, grid, noise)?);
        } else if let Some(s) = outputs.iter().find(|s| s.kind == *kind) {
            out.push(s.clone());
        }
    }
    Ok(out)
}
