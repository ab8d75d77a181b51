//! Linearized fluctuation dynamics around an operating point.
//!
//! State vector ordering is (dQ, dP, dx, dy) with x = c + c^dag and
//! y = i(c^dag - c). Normal-mode frequencies are the eigenvalues of iA, which
//! coincide with the complex zeros of the quartic d(omega) that appears as the
//! common denominator of every fluctuation spectrum.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{DerivedConstants, SystemParams};
use crate::poly;
use crate::steady_state::SteadyState;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn cplx(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftMatrix {
    pub entries: [[f64; 4]; 4],
}

pub fn drift_matrix(ss: &SteadyState, d: &DerivedConstants, p: &SystemParams) -> DriftMatrix {
    let wm = p.omega_m;
    let g = p.parametric_gain;
    let (sin_t, cos_t) = p.parametric_phase.sin_cos();
    // omega_m chi (c + c*) and -i omega_m chi (c - c*)
    let re_coupling = 2.0 * wm * d.chi * ss.c_s.re;
    let im_coupling = 2.0 * wm * d.chi * ss.c_s.im;
    DriftMatrix {
        entries: [
            [0.0, wm, 0.0, 0.0],
            [-wm, -d.gamma_m, re_coupling, im_coupling],
            [-im_coupling, 0.0, 2.0 * g * cos_t - p.kappa, 2.0 * g * sin_t + ss.delta],
            [re_coupling, 0.0, 2.0 * g * sin_t - ss.delta, -(2.0 * g * cos_t + p.kappa)],
        ],
    }
}

/// `|c_s|^2 Delta + iG (c_s^2 e^{-i theta} - c_s*^2 e^{i theta})`, real by construction.
///
/// Returned as a complex number so callers can check the imaginary residue.
pub fn coupling_bracket(ss: &SteadyState, p: &SystemParams) -> Complex64 {
    let c = ss.c_s;
    let e = Complex64::from_polar(1.0, p.parametric_phase);
    let g = p.parametric_gain;
    cplx(ss.photon_number * ss.delta) + I * g * (c * c * e.conj() - c.conj() * c.conj() * e)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Left-hand sides of the three Routh-Hurwitz inequalities.
    pub rh_values: [f64; 3],
    pub rh_pass: [bool; 3],
    /// Eigenvalues of the drift matrix A, rad/s.
    pub eigenvalues_a: [Complex64; 4],
    pub stable: bool,
}

impl StabilityReport {
    /// Verdict from the eigenvalues alone.
    pub fn eigen_stable(&self) -> bool {
        self.eigenvalues_a.iter().all(|z| z.re < 0.0)
    }
}

/// The three Routh-Hurwitz expressions; the system is stable iff all are positive.
pub fn rh_values(ss: &SteadyState, d: &DerivedConstants, p: &SystemParams) -> [f64; 3] {
    let k = p.kappa;
    let gm = d.gamma_m;
    let wm = p.omega_m;
    let g = p.parametric_gain;
    let delta = ss.delta;
    let chi2 = d.chi * d.chi;
    let bracket = coupling_bracket(ss, p).re;
    let x = k * k - 4.0 * g * g + delta * delta;

    let first = 2.0 * k * (x + 2.0 * k * gm) + gm * (2.0 * k * gm + wm * wm);
    let second = 2.0 * wm.powi(3) * chi2 * (2.0 * k + gm).powi(2) * bracket
        + k * gm
            * (x * x
                + (2.0 * k * gm + gm * gm) * x
                + wm * wm * (2.0 * (k * k + 4.0 * g * g - delta * delta) + wm * wm + 2.0 * k * gm));
    let third = x - 4.0 * wm * chi2 * bracket;
    [first, second, third]
}

pub fn is_stable(ss: &SteadyState, d: &DerivedConstants, p: &SystemParams) -> bool {
    rh_values(ss, d, p).iter().all(|&v| v > 0.0)
}

pub fn routh_hurwitz(
    ss: &SteadyState,
    d: &DerivedConstants,
    p: &SystemParams,
) -> Result<StabilityReport> {
    let rh_values = rh_values(ss, d, p);
    let rh_pass = rh_values.map(|v| v > 0.0);
    let eig_ia = eigenvalues_ia(&drift_matrix(ss, d, p))?;
    // iA v = lambda v  =>  A v = -i lambda v
    let eigenvalues_a = eig_ia.map(|z| -I * z);
    Ok(StabilityReport {
        rh_values,
        rh_pass,
        eigenvalues_a,
        stable: rh_pass.iter().all(|&b| b),
    })
}

/// Characteristic polynomial det(lambda I - M) of a complex 4x4 matrix by the
/// Faddeev-LeVerrier recursion, ascending coefficients.
fn characteristic_polynomial(m: &[[Complex64; 4]; 4]) -> [Complex64; 5] {
    let zero = cplx(0.0);
    let mut coeffs = [zero; 5];
    coeffs[4] = cplx(1.0);
    let mut mk = [[zero; 4]; 4];
    for k in 1..=4 {
        // M_k = M M_{k-1} + c_{n-k+1} I
        let mut next = [[zero; 4]; 4];
        for (i, row) in next.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let mut s = zero;
                for l in 0..4 {
                    s += m[i][l] * mk[l][j];
                }
                *cell = s;
            }
            row[i] += coeffs[5 - k];
        }
        mk = next;
        let mut trace = zero;
        for i in 0..4 {
            for l in 0..4 {
                trace += m[i][l] * mk[l][i];
            }
        }
        coeffs[4 - k] = -trace / k as f64;
    }
    coeffs
}

/// Eigenvalues of iA from the roots of its characteristic quartic, sorted by
/// descending real part (ties by ascending imaginary part).
pub fn eigenvalues_ia(a: &DriftMatrix) -> Result<[Complex64; 4]> {
    let mut ia = [[cplx(0.0); 4]; 4];
    for (i, row) in a.entries.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            ia[i][j] = I * v;
        }
    }
    let cp = characteristic_polynomial(&ia);
    let roots = poly::durand_kerner(&cp)?;
    to_sorted_array(roots)
}

fn to_sorted_array(mut roots: Vec<Complex64>) -> Result<[Complex64; 4]> {
    sort_roots(&mut roots);
    roots
        .try_into()
        .map_err(|_| Error::NoConvergence(poly::MAX_ITERATIONS))
}

/// Descending real part; real parts equal to within 1e-9 of the largest
/// modulus are ordered by ascending imaginary part.
pub fn sort_roots(roots: &mut [Complex64]) {
    let scale = roots.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let tol = 1e-9 * scale;
    roots.sort_by(|a, b| {
        if (a.re - b.re).abs() <= tol {
            a.im.partial_cmp(&b.im).unwrap_or(Ordering::Equal)
        } else {
            b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal)
        }
    });
}

/// Ascending coefficients of d(omega) in omega.
pub fn d_coefficients(ss: &SteadyState, d: &DerivedConstants, p: &SystemParams) -> [Complex64; 5] {
    let wm = p.omega_m;
    let g = p.parametric_gain;
    let coupling = 4.0 * wm.powi(3) * d.chi * d.chi * coupling_bracket(ss, p);
    // (omega^2 + i gamma_m omega - omega_m^2)
    let mech = [cplx(-wm * wm), Complex64::new(0.0, d.gamma_m), cplx(1.0)];
    // (kappa - i omega)^2 + Delta^2 - 4G^2
    let opt = [
        cplx(p.kappa * p.kappa + ss.delta * ss.delta - 4.0 * g * g),
        Complex64::new(0.0, -2.0 * p.kappa),
        cplx(-1.0),
    ];
    let prod = poly::mul(&mech, &opt);
    let mut out = [cplx(0.0); 5];
    out.copy_from_slice(&prod);
    out[0] += coupling;
    out
}

pub fn d_omega(
    ss: &SteadyState,
    d: &DerivedConstants,
    p: &SystemParams,
    omega: Complex64,
) -> Complex64 {
    let wm = p.omega_m;
    let g = p.parametric_gain;
    let coupling = 4.0 * wm.powi(3) * d.chi * d.chi * coupling_bracket(ss, p);
    let mech = omega * omega - wm * wm + I * d.gamma_m * omega;
    let kw = cplx(p.kappa) - I * omega;
    let opt = kw * kw + ss.delta * ss.delta - 4.0 * g * g;
    coupling + mech * opt
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplittingEstimate {
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub g_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeAnalysis {
    /// All zeros of d(omega), sorted (descending Re, ascending Im).
    pub d_roots: [Complex64; 4],
    /// The two roots with the largest real parts.
    pub positive_branch: [Complex64; 2],
    /// Weak-damping estimate of the split frequencies, when its radicands are nonnegative.
    pub estimate: Option<SplittingEstimate>,
    /// Why `estimate` is absent.
    pub estimate_invalid_reason: Option<String>,
    /// Roots of the quartic keeping the -2i kappa omega term.
    pub refined: [Complex64; 2],
    /// omega_m chi^2 |c_s|^2 [Delta + 2G sin(theta - 2 phi)].
    pub g_squared: f64,
    /// Phase of c_s.
    pub phi: f64,
    /// Two roots coincide to within 1e-6 relative.
    pub degenerate: bool,
    /// Largest backward residual of d at the reported roots.
    pub max_residual: f64,
}

fn phase(ss: &SteadyState) -> f64 {
    if ss.c_s.norm() == 0.0 {
        0.0
    } else {
        ss.c_s.arg()
    }
}

pub fn g_squared(ss: &SteadyState, d: &DerivedConstants, p: &SystemParams) -> f64 {
    let phi = phase(ss);
    p.omega_m
        * d.chi
        * d.chi
        * ss.photon_number
        * (ss.delta + 2.0 * p.parametric_gain * (p.parametric_phase - 2.0 * phi).sin())
}

pub fn splitting_estimate(
    ss: &SteadyState,
    d: &DerivedConstants,
    p: &SystemParams,
) -> Result<SplittingEstimate> {
    let wm2 = p.omega_m * p.omega_m;
    let cav2 = ss.delta * ss.delta - 4.0 * p.parametric_gain * p.parametric_gain;
    let g2 = g_squared(ss, d, p);
    let half_sum = (wm2 + cav2) / 2.0;
    let half_diff = (wm2 - cav2) / 2.0;
    let radicand = half_diff * half_diff + 4.0 * wm2 * g2;
    if radicand < 0.0 {
        return Err(Error::EstimateInvalid(format!(
            "negative radicand {radicand:e} (g^2 = {g2:e})"
        )));
    }
    let root = radicand.sqrt();
    let plus2 = half_sum + root;
    let minus2 = half_sum - root;
    if minus2 < 0.0 || plus2 < 0.0 {
        return Err(Error::EstimateInvalid(format!(
            "negative squared frequency (omega_-^2 = {minus2:e})"
        )));
    }
    Ok(SplittingEstimate {
        omega_plus: plus2.sqrt(),
        omega_minus: minus2.sqrt(),
        g_squared: g2,
    })
}

/// Positive-frequency roots of d(omega) with i gamma_m omega and kappa^2
/// dropped but -2i kappa omega kept; imaginary parts approximate the split
/// half-linewidths.
pub fn refined_splitting(
    ss: &SteadyState,
    d: &DerivedConstants,
    p: &SystemParams,
) -> Result<[Complex64; 2]> {
    let wm = p.omega_m;
    let g = p.parametric_gain;
    let coupling = 4.0 * wm.powi(3) * d.chi * d.chi * coupling_bracket(ss, p);
    let mech = [cplx(-wm * wm), cplx(0.0), cplx(1.0)];
    let opt = [
        cplx(ss.delta * ss.delta - 4.0 * g * g),
        Complex64::new(0.0, -2.0 * p.kappa),
        cplx(-1.0),
    ];
    let mut coeffs = poly::mul(&mech, &opt);
    coeffs[0] += coupling;
    let roots = to_sorted_array(poly::durand_kerner(&coeffs)?)?;
    Ok([roots[0], roots[1]])
}

pub fn roots_of_d(ss: &SteadyState, d: &DerivedConstants, p: &SystemParams) -> Result<ModeAnalysis> {
    let coeffs = d_coefficients(ss, d, p);
    let d_roots = to_sorted_array(poly::durand_kerner(&coeffs)?)?;
    let max_residual = d_roots
        .iter()
        .map(|&z| poly::relative_residual(&coeffs, z))
        .fold(0.0, f64::max);

    let mut degenerate = false;
    for i in 0..4 {
        for j in i + 1..4 {
            let scale = d_roots[i].norm().max(d_roots[j].norm());
            if (d_roots[i] - d_roots[j]).norm() < 1e-6 * scale {
                degenerate = true;
            }
        }
    }

    let (estimate, estimate_invalid_reason) = match splitting_estimate(ss, d, p) {
        Ok(e) => (Some(e), None),
        Err(e) => (None, Some(e.to_string())),
    };

    Ok(ModeAnalysis {
        d_roots,
        positive_branch: [d_roots[0], d_roots[1]],
        estimate,
        estimate_invalid_reason,
        refined: refined_splitting(ss, d, p)?,
        g_squared: g_squared(ss, d, p),
        phi: phase(ss),
        degenerate,
        max_residual,
    })
}
