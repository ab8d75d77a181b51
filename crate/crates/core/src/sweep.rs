//! Single-point analysis, one-dimensional parameter sweeps, and stability
//! boundary search.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear_dynamics::{roots_of_d, routh_hurwitz, ModeAnalysis, StabilityReport};
use crate::params::{derive_constants, DetuningSpec, PhysicalConstants, SystemParams};
use crate::spectra::{spectra, FrequencyGrid, NoiseMode, NoiseModel, SpectrumKind, SpectrumResult};
use crate::steady_state::{operating_points, SteadyState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// G / kappa.
    ParametricGain,
    /// Laser power, mW.
    LaserPower,
    /// Delta / omega_m.
    EffectiveDetuning,
    /// Delta0 / omega_m.
    BareDetuning,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            Self::ParametricGain => "gain",
            Self::LaserPower => "power",
            Self::EffectiveDetuning => "detuning",
            Self::BareDetuning => "bare_detuning",
        }
    }

    /// Column label of the axis value in normalized units.
    pub fn label(self) -> &'static str {
        match self {
            Self::ParametricGain => "G/kappa",
            Self::LaserPower => "P (mW)",
            Self::EffectiveDetuning => "Delta/omega_m",
            Self::BareDetuning => "Delta0/omega_m",
        }
    }

    /// `p` with this axis set to `value` (axis units). Other fields, including the
    /// detuning mode for the gain and power axes, are kept.
    pub fn apply(self, p: &SystemParams, value: f64) -> SystemParams {
        match self {
            Self::ParametricGain => p.with_gain_over_kappa(value),
            Self::LaserPower => p.with_power_mw(value),
            Self::EffectiveDetuning => p.with_detuning(DetuningSpec::Effective(value * p.omega_m)),
            Self::BareDetuning => p.with_detuning(DetuningSpec::Bare(value * p.omega_m)),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "gain" | "G" | "parametric_gain" => Ok(Self::ParametricGain),
            "power" | "P" | "laser_power" => Ok(Self::LaserPower),
            "detuning" | "effective_detuning" => Ok(Self::EffectiveDetuning),
            "bare_detuning" => Ok(Self::BareDetuning),
            other => Err(format!(
                "unknown axis `{other}` (expected gain|power|detuning|bare_detuning)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOutput {
    Roots,
    Eigenvalues,
    Stability,
    SplittingEstimate,
    PhotonNumber,
    Spectrum(SpectrumKind),
}

impl FromStr for SweepOutput {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "roots" => Ok(Self::Roots),
            "eigenvalues" => Ok(Self::Eigenvalues),
            "stability" => Ok(Self::Stability),
            "splitting_estimate" => Ok(Self::SplittingEstimate),
            "photon_number" => Ok(Self::PhotonNumber),
            other => other.parse().map(Self::Spectrum),
        }
    }
}

/// Uniform frequency grid in units of omega_m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo_over_omega_m: f64,
    pub hi_over_omega_m: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            lo_over_omega_m: 0.2,
            hi_over_omega_m: 1.8,
            points: 4001,
        }
    }
}

impl GridSpec {
    pub fn build(&self, omega_m: f64) -> Result<FrequencyGrid> {
        FrequencyGrid::uniform(self.lo_over_omega_m, self.hi_over_omega_m, self.points, omega_m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
    pub outputs: Vec<SweepOutput>,
    pub grid: GridSpec,
    /// `None` picks the model per point with [`NoiseModel::auto`].
    pub noise: Option<NoiseMode>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(Error::InvalidSweep("no axis values".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSweep("non-finite axis value".into()));
        }
        let up = self.values.windows(2).all(|w| w[1] > w[0]);
        let down = self.values.windows(2).all(|w| w[1] < w[0]);
        if !(up || down) {
            return Err(Error::InvalidSweep("axis values not strictly monotone".into()));
        }
        Ok(())
    }

    pub fn spectrum_kinds(&self) -> Vec<SpectrumKind> {
        SpectrumKind::ALL
            .into_iter()
            .filter(|k| self.outputs.contains(&SweepOutput::Spectrum(*k)))
            .collect()
    }
}

/// `n` evenly spaced values from `lo` to `hi` inclusive, each computed from its index.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Everything computed for one operating branch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointAnalysis {
    pub params: SystemParams,
    pub steady: SteadyState,
    pub stability: StabilityReport,
    pub modes: ModeAnalysis,
    pub spectra: Vec<SpectrumResult>,
    /// Set when spectra were requested but refused.
    pub spectra_error: Option<Error>,
}

/// Analysis of every operating branch of `p`.
pub fn analyze_point(
    p: &SystemParams,
    consts: &PhysicalConstants,
    kinds: &[SpectrumKind],
    grid: &GridSpec,
    noise: Option<NoiseMode>,
) -> Result<Vec<PointAnalysis>> {
    p.validate()?;
    let d = derive_constants(p, consts)?;
    let noise = match noise {
        Some(mode) => NoiseModel {
            mode,
            temperature: p.temperature,
        },
        None => NoiseModel::auto(p, consts),
    };
    let freq = if kinds.is_empty() {
        None
    } else {
        Some(grid.build(p.omega_m)?)
    };

    operating_points(p, &d)?
        .into_iter()
        .map(|ss| {
            let stability = routh_hurwitz(&ss, &d, p)?;
            let modes = roots_of_d(&ss, &d, p)?;
            let (spectra, spectra_error) = match &freq {
                None => (Vec::new(), None),
                Some(g) => match spectra(&ss, &d, p, g, &noise, kinds) {
                    Ok(s) => (s, None),
                    Err(e) => (Vec::new(), Some(e)),
                },
            };
            Ok(PointAnalysis {
                params: *p,
                steady: ss,
                stability,
                modes,
                spectra,
                spectra_error,
            })
        })
        .collect()
}

/// One output row: a branch at an axis value, or the error that stopped the point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub axis_value: f64,
    pub result: std::result::Result<PointAnalysis, Error>,
}

/// Runs the sweep on a pool of `workers` threads. Records come back in axis
/// order with one record per branch; failing points produce an error record.
pub fn run_sweep(
    base: &SystemParams,
    consts: &PhysicalConstants,
    spec: &SweepSpec,
    workers: usize,
) -> Result<Vec<SweepRecord>> {
    spec.validate()?;
    let kinds = spec.spectrum_kinds();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidSweep(format!("worker pool: {e}")))?;

    let per_point: Vec<(f64, Result<Vec<PointAnalysis>>)> = pool.install(|| {
        spec.values
            .par_iter()
            .map(|&v| {
                let p = spec.axis.apply(base, v);
                (v, analyze_point(&p, consts, &kinds, &spec.grid, spec.noise))
            })
            .collect()
    });

    Ok(per_point
        .into_iter()
        .flat_map(|(axis_value, res)| match res {
            Ok(branches) => branches
                .into_iter()
                .map(|a| SweepRecord {
                    axis_value,
                    result: Ok(a),
                })
                .collect::<Vec<_>>(),
            Err(e) => vec![SweepRecord {
                axis_value,
                result: Err(e),
            }],
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub axis: SweepAxis,
    /// Midpoint of the final bracket, axis units.
    pub critical_value: f64,
    /// Final bracket, ordered as [stable side, unstable side].
    pub bracket: [f64; 2],
    /// 1-based indices of the Routh-Hurwitz conditions failing on the unstable side.
    /// Empty when the unstable side has no steady state at all.
    pub failing_conditions: Vec<usize>,
    pub iterations: usize,
}

enum Verdict {
    Stable,
    Unstable(Vec<usize>),
}

fn verdict(p: &SystemParams, consts: &PhysicalConstants) -> Result<Verdict> {
    p.validate()?;
    let d = derive_constants(p, consts)?;
    // Lowest-detuning branch in bare mode.
    let ss = match operating_points(p, &d) {
        Ok(branches) => branches[0],
        Err(Error::ParametricDivergence { .. }) => return Ok(Verdict::Unstable(Vec::new())),
        Err(e) => return Err(e),
    };
    let values = crate::linear_dynamics::rh_values(&ss, &d, p);
    let failing: Vec<usize> = (0..3).filter(|&i| !(values[i] > 0.0)).map(|i| i + 1).collect();
    Ok(if failing.is_empty() {
        Verdict::Stable
    } else {
        Verdict::Unstable(failing)
    })
}

/// Bisects the Routh-Hurwitz verdict along `axis` between `lo` and `hi` to an
/// absolute tolerance of 1e-3 of the bracket width.
pub fn stability_boundary(
    base: &SystemParams,
    consts: &PhysicalConstants,
    axis: SweepAxis,
    lo: f64,
    hi: f64,
) -> Result<BoundaryReport> {
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::InvalidSweep(format!("bad bracket [{lo}, {hi}]")));
    }
    let at = |v: f64| verdict(&axis.apply(base, v), consts);
    let (mut stable_side, mut unstable_side, mut failing) = match (at(lo)?, at(hi)?) {
        (Verdict::Stable, Verdict::Unstable(f)) => (lo, hi, f),
        (Verdict::Unstable(f), Verdict::Stable) => (hi, lo, f),
        _ => return Err(Error::NoBoundary { lo, hi }),
    };
    let tol = 1e-3 * (hi - lo);
    let mut iterations = 0;
    while (unstable_side - stable_side).abs() > tol {
        let mid = 0.5 * (stable_side + unstable_side);
        match at(mid)? {
            Verdict::Stable => stable_side = mid,
            Verdict::Unstable(f) => {
                unstable_side = mid;
                failing = f;
            }
        }
        iterations += 1;
    }
    Ok(BoundaryReport {
        axis,
        critical_value: 0.5 * (stable_side + unstable_side),
        bracket: [stable_side, unstable_side],
        failing_conditions: failing,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const C: PhysicalConstants = PhysicalConstants::CODATA;

    fn gain_spec(values: Vec<f64>, outputs: Vec<SweepOutput>) -> SweepSpec {
        SweepSpec {
            axis: SweepAxis::ParametricGain,
            values,
            outputs,
            grid: GridSpec::default(),
            noise: None,
        }
    }

    #[test]
    fn axis_application() {
        let p = SystemParams::reference();
        assert_eq!(SweepAxis::ParametricGain.apply(&p, 1.3).parametric_gain, 1.3 * p.kappa);
        assert_eq!(SweepAxis::LaserPower.apply(&p, 10.7).laser_power, 10.7e-3);
        assert_eq!(
            SweepAxis::BareDetuning.apply(&p, 2.0).detuning,
            DetuningSpec::Bare(2.0 * p.omega_m)
        );
        let deg = p.with_detuning(DetuningSpec::Degenerate);
        assert_eq!(SweepAxis::ParametricGain.apply(&deg, 1.0).detuning, DetuningSpec::Degenerate);
    }

    #[test]
    fn spec_validation() {
        assert!(gain_spec(vec![], vec![]).validate().is_err());
        assert!(gain_spec(vec![0.0, 0.0], vec![]).validate().is_err());
        assert!(gain_spec(vec![0.0, 1.0, 0.5], vec![]).validate().is_err());
        assert!(gain_spec(vec![0.0, f64::NAN], vec![]).validate().is_err());
        assert!(gain_spec(vec![1.0, 0.5], vec![]).validate().is_ok());
    }

    #[test]
    fn linspace_hits_endpoints() {
        let v = linspace(0.0, 1.6, 81);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[80], 1.6);
        assert!((v[65] - 1.3).abs() < 1e-15);
    }

    #[test]
    fn sweep_is_ordered_and_independent_of_worker_count() {
        let spec = gain_spec(linspace(0.0, 1.6, 17), vec![SweepOutput::Roots]);
        let p = SystemParams::reference();
        let one = run_sweep(&p, &C, &spec, 1).unwrap();
        let many = run_sweep(&p, &C, &spec, 4).unwrap();
        assert_eq!(one, many);
        let axis: Vec<f64> = one.iter().map(|r| r.axis_value).collect();
        assert_eq!(axis, spec.values);
    }

    #[test]
    fn last_stable_gain_on_sweep() {
        let spec = gain_spec(linspace(0.0, 1.7, 86), vec![SweepOutput::Stability]);
        let recs = run_sweep(&SystemParams::reference(), &C, &spec, 2).unwrap();
        let last = recs
            .iter()
            .filter(|r| r.result.as_ref().is_ok_and(|a| a.stability.stable))
            .map(|r| r.axis_value)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((last - 1.62).abs() <= 0.02, "{last}");
    }

    #[test]
    fn unstable_points_keep_roots_but_refuse_spectra() {
        let spec = gain_spec(vec![1.7], vec![SweepOutput::Spectrum(SpectrumKind::SQ)]);
        let recs = run_sweep(&SystemParams::reference(), &C, &spec, 1).unwrap();
        let a = recs[0].result.as_ref().unwrap();
        assert!(!a.stability.stable);
        assert!(a.spectra.is_empty());
        assert_eq!(a.spectra_error, Some(Error::Unstable));
    }

    #[test]
    fn failing_points_become_error_records() {
        // 2G = sqrt(kappa^2 + Delta^2) puts the steady state on the divergence.
        let p = SystemParams::reference();
        let g = (p.kappa.powi(2) + p.omega_m.powi(2)).sqrt() / 2.0 / p.kappa;
        let spec = gain_spec(vec![0.5, g, g + 0.5], vec![SweepOutput::Roots]);
        let recs = run_sweep(&p, &C, &spec, 2).unwrap();
        assert_eq!(recs.len(), 3);
        assert!(recs[0].result.is_ok());
        assert!(matches!(recs[1].result, Err(Error::ParametricDivergence { .. })));
        assert!(recs[2].result.is_ok());
    }

    #[test]
    fn multistable_points_give_one_record_per_branch() {
        let p = SystemParams::reference().with_power_mw(10.7);
        let spec = SweepSpec {
            axis: SweepAxis::BareDetuning,
            values: vec![0.1, 5.0],
            outputs: vec![SweepOutput::Stability],
            grid: GridSpec::default(),
            noise: None,
        };
        let recs = run_sweep(&p, &C, &spec, 1).unwrap();
        let n_low = recs.iter().filter(|r| r.axis_value == 0.1).count();
        let n_high = recs.iter().filter(|r| r.axis_value == 5.0).count();
        assert_eq!(n_low, 1);
        assert!(n_high >= 1);
        assert_eq!(recs.len(), n_low + n_high);
    }

    #[test]
    fn gain_boundary() {
        let p = SystemParams::reference();
        let r = stability_boundary(&p, &C, SweepAxis::ParametricGain, 0.0, 2.0).unwrap();
        assert!((r.critical_value - 1.62).abs() <= 0.02, "{r:?}");
        assert!((r.bracket[0] - r.bracket[1]).abs() <= 2e-3);
        assert!(!r.failing_conditions.is_empty());
    }

    #[test]
    fn boundary_needs_a_verdict_change() {
        let p = SystemParams::reference();
        assert_eq!(
            stability_boundary(&p, &C, SweepAxis::ParametricGain, 0.0, 1.0).unwrap_err(),
            Error::NoBoundary { lo: 0.0, hi: 1.0 }
        );
    }

    #[test]
    fn uncoupled_boundary_is_the_parametric_threshold() {
        // An enormous mass switches the radiation-pressure coupling off.
        let p = SystemParams {
            mass: 1e30,
            ..SystemParams::reference()
        };
        let r = stability_boundary(&p, &C, SweepAxis::ParametricGain, 0.0, 4.0).unwrap();
        let expected = (p.kappa.powi(2) + p.omega_m.powi(2)).sqrt() / 2.0 / p.kappa;
        assert!((r.critical_value - expected).abs() <= 4e-3, "{} vs {expected}", r.critical_value);
    }

    #[test]
    fn output_parsing() {
        assert_eq!("roots".parse::<SweepOutput>().unwrap(), SweepOutput::Roots);
        assert_eq!(
            "Sxout".parse::<SweepOutput>().unwrap(),
            SweepOutput::Spectrum(SpectrumKind::Sxout)
        );
        assert!("bogus".parse::<SweepOutput>().is_err());
        assert_eq!("power".parse::<SweepAxis>().unwrap(), SweepAxis::LaserPower);
    }
}
