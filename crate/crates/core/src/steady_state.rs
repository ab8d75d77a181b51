//! Classical operating points of the driven cavity-mirror system.
//!
//! For a given effective detuning the intracavity amplitude is closed form.
//! For a given bare detuning Delta0 the effective detuning solves
//!
//! ```text
//! (Delta0 - Delta) (kappa^2 + Delta^2 - 4G^2)^2 = 2 omega_m chi^2 eps^2 |kappa - i Delta + 2G e^{i theta}|^2
//! ```
//!
//! which is a real quintic in Delta with up to five real roots.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DerivedConstants, DetuningSpec, SystemParams};
use crate::poly;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyState {
    /// Effective detuning, rad/s.
    pub delta: f64,
    /// Steady intracavity amplitude.
    pub c_s: Complex64,
    /// Mirror displacement, dimensionless.
    pub q_s: f64,
    /// Mirror momentum, dimensionless; always zero.
    pub p_s: f64,
    /// |c_s|^2.
    pub photon_number: f64,
    /// Position among the branches ordered by Delta ascending; 0 in the direct modes.
    pub branch_index: usize,
}

/// Floor on |kappa^2 + Delta^2 - 4G^2| relative to kappa^2 + omega_m^2.
pub const DIVERGENCE_FLOOR: f64 = 1e-9;

/// Relative imaginary part below which a companion eigenvalue counts as real,
/// in units of max(kappa, omega_m).
pub const REAL_ROOT_TOL: f64 = 1e-6;

pub fn steady_state_at_delta(
    p: &SystemParams,
    d: &DerivedConstants,
    delta: f64,
) -> Result<SteadyState> {
    let g = p.parametric_gain;
    let denom = p.kappa * p.kappa + delta * delta - 4.0 * g * g;
    let floor = DIVERGENCE_FLOOR * (p.kappa * p.kappa + p.omega_m * p.omega_m);
    if !(denom.abs() >= floor) {
        return Err(Error::ParametricDivergence {
            value: denom.abs(),
            floor,
        });
    }
    let numer = Complex64::new(p.kappa, -delta)
        + 2.0 * g * Complex64::from_polar(1.0, p.parametric_phase);
    let c_s = numer * (d.epsilon / denom);
    let photon_number = c_s.norm_sqr();
    Ok(SteadyState {
        delta,
        c_s,
        q_s: 2.0 * d.chi * photon_number,
        p_s: 0.0,
        photon_number,
        branch_index: 0,
    })
}

/// Quintic coefficients (ascending powers of Delta) of the bare-detuning condition,
/// written as `(Delta0 - Delta)(Delta^2 + a)^2 - K (Delta^2 - 4 G sin(theta) Delta + b)`.
pub fn quintic_coefficients(p: &SystemParams, d: &DerivedConstants, delta0: f64) -> [f64; 6] {
    let g = p.parametric_gain;
    let (sin_t, cos_t) = p.parametric_phase.sin_cos();
    let a = p.kappa * p.kappa - 4.0 * g * g;
    let b = p.kappa * p.kappa + 4.0 * p.kappa * g * cos_t + 4.0 * g * g;
    let k = 2.0 * p.omega_m * d.chi * d.chi * d.epsilon * d.epsilon;
    [
        a * a * delta0 - k * b,
        -a * a + 4.0 * k * g * sin_t,
        2.0 * a * delta0 - k,
        -2.0 * a,
        delta0,
        -1.0,
    ]
}

/// Relative residual of the detuning self-consistency condition for one branch.
pub fn branch_residual(p: &SystemParams, d: &DerivedConstants, delta0: f64, ss: &SteadyState) -> f64 {
    let shift = p.omega_m * d.chi * ss.q_s;
    let scale = ss.delta.abs() + delta0.abs() + shift.abs();
    if scale == 0.0 {
        return 0.0;
    }
    (ss.delta - (delta0 - shift)).abs() / scale
}

/// Relative residual of the closed-form amplitude equation
/// c_s (kappa^2 + Delta^2 - 4G^2) = (kappa - i Delta + 2G e^{i theta}) eps.
pub fn amplitude_residual(p: &SystemParams, d: &DerivedConstants, ss: &SteadyState) -> f64 {
    let g = p.parametric_gain;
    let lhs = ss.c_s * (p.kappa * p.kappa + ss.delta * ss.delta - 4.0 * g * g);
    let rhs = (Complex64::new(p.kappa, -ss.delta)
        + 2.0 * g * Complex64::from_polar(1.0, p.parametric_phase))
        * d.epsilon;
    if rhs.norm() == 0.0 {
        return lhs.norm();
    }
    (lhs - rhs).norm() / rhs.norm()
}

/// All real operating points for a bare detuning, ordered by Delta ascending.
pub fn solve_branches(
    p: &SystemParams,
    d: &DerivedConstants,
    delta0: f64,
) -> Result<Vec<SteadyState>> {
    let coeffs = quintic_coefficients(p, d, delta0);
    let rate_scale = p.kappa.max(p.omega_m);
    let scale = rate_scale.max(delta0.abs());
    // Same polynomial in x = Delta / scale, for polishing.
    let scaled: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| c * scale.powi(k as i32))
        .collect();

    let mut deltas: Vec<f64> = poly::companion_roots(&coeffs, scale)
        .into_iter()
        .filter(|z| z.im.abs() < REAL_ROOT_TOL * rate_scale)
        .map(|z| scale * poly::newton_polish_real(&scaled, z.re / scale))
        .collect();
    deltas.sort_by(f64::total_cmp);

    let mut branches = Vec::with_capacity(deltas.len());
    for delta in deltas {
        // Roots on kappa^2 + Delta^2 = 4G^2 are dropped.
        match steady_state_at_delta(p, d, delta) {
            Ok(mut ss) => {
                ss.branch_index = branches.len();
                branches.push(ss);
            }
            Err(Error::ParametricDivergence { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    if branches.is_empty() {
        return Err(Error::NoBranches);
    }
    Ok(branches)
}

/// Operating point(s) for whatever detuning mode `p` carries.
pub fn operating_points(p: &SystemParams, d: &DerivedConstants) -> Result<Vec<SteadyState>> {
    match p.detuning {
        DetuningSpec::Bare(delta0) => solve_branches(p, d, delta0),
        _ => {
            let delta = p.effective_detuning().expect("direct detuning mode");
            Ok(vec![steady_state_at_delta(p, d, delta)?])
        }
    }
}
