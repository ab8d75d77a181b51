//! Polynomial helpers: Horner evaluation, simultaneous (Durand-Kerner) root
//! iteration for complex polynomials, and companion-matrix roots for real ones.
//!
//! Coefficient slices are in ascending order: `c[k]` multiplies `z^k`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 1000;

/// Seed for the starting-point perturbation.
const INIT_SEED: u64 = 0x5eed_0f_d0_4b;

pub fn eval(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
}

pub fn eval_real(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * x + ck)
}

/// Value and derivative of a real polynomial.
pub fn eval_real_with_derivative(c: &[f64], x: f64) -> (f64, f64) {
    let mut p = 0.0;
    let mut dp = 0.0;
    for &ck in c.iter().rev() {
        dp = dp * x + p;
        p = p * x + ck;
    }
    (p, dp)
}

/// |p(z)| relative to sum_k |c_k| |z|^k; a backward-error style residual.
pub fn relative_residual(c: &[Complex64], z: Complex64) -> f64 {
    let scale = c
        .iter()
        .rev()
        .fold(0.0, |acc, ck| acc * z.norm() + ck.norm());
    if scale == 0.0 {
        return 0.0;
    }
    eval(c, z).norm() / scale
}

/// Strips (numerically) zero leading coefficients.
fn trim(c: &[Complex64]) -> &[Complex64] {
    let max = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut n = c.len();
    while n > 1 && c[n - 1].norm() <= max * 1e-300 {
        n -= 1;
    }
    &c[..n]
}

/// All roots of a complex polynomial by Durand-Kerner iteration.
///
/// The variable is rescaled by a Fujiwara-type root radius so the iteration
/// runs on O(1) roots. Starting points sit on a circle with a small seeded
/// random perturbation, which breaks the symmetry that can stall the scheme.
pub fn durand_kerner(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let c = trim(coeffs);
    let n = c.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = c[n];

    // Root radius bound: max_k |c_k / c_n|^(1/(n-k)).
    let radius = (0..n)
        .map(|k| (c[k] / lead).norm().powf(1.0 / (n - k) as f64))
        .fold(0.0, f64::max);
    let scale = if radius > 0.0 { radius } else { 1.0 };

    // Monic polynomial in x = z / scale.
    let monic: Vec<Complex64> = (0..=n)
        .map(|k| c[k] / lead * scale.powi(k as i32 - n as i32))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(INIT_SEED);
    let mut x: Vec<Complex64> = (0..n)
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4;
            let r = 1.0 + 0.05 * rng.gen_range(-1.0..1.0);
            let jitter = 0.05 * rng.gen_range(-1.0..1.0);
            Complex64::from_polar(r, angle + jitter)
        })
        .collect();

    let mut converged = false;
    for _ in 0..MAX_ITERATIONS {
        let mut max_step: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= x[i] - x[j];
                }
            }
            if denom.norm() == 0.0 {
                denom = Complex64::new(1e-30, 0.0);
            }
            let step = eval(&monic, x[i]) / denom;
            x[i] -= step;
            max_step = max_step.max(step.norm());
        }
        if !max_step.is_finite() {
            return Err(Error::NoConvergence(MAX_ITERATIONS));
        }
        if max_step <= 1e-15 {
            converged = true;
            break;
        }
    }
    if !converged {
        // Stalled iterates (multiple roots) pass on a small backward residual.
        let worst = x
            .iter()
            .map(|&xi| relative_residual(&monic, xi))
            .fold(0.0, f64::max);
        if !(worst < 1e-10) {
            return Err(Error::NoConvergence(MAX_ITERATIONS));
        }
    }
    Ok(x.into_iter().map(|xi| xi * scale).collect())
}

/// Roots of a real polynomial as eigenvalues of the companion matrix of its
/// monic, rescaled form. Returned in the original variable.
pub fn companion_roots(coeffs: &[f64], scale: f64) -> Vec<Complex64> {
    let mut n = coeffs.len() - 1;
    while n > 0 && coeffs[n] == 0.0 {
        n -= 1;
    }
    if n == 0 {
        return Vec::new();
    }
    let lead = coeffs[n];
    // Monic in x = z / scale: b_k = c_k scale^(k-n) / c_n.
    let b: Vec<f64> = (0..n)
        .map(|k| coeffs[k] / lead * scale.powi(k as i32 - n as i32))
        .collect();
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -b[i];
    }
    m.complex_eigenvalues()
        .iter()
        .map(|z| Complex64::new(z.re * scale, z.im * scale))
        .collect()
}

/// Newton iteration on a real polynomial, started at `x0`. Stops when the step
/// stops shrinking or after a small fixed number of steps.
pub fn newton_polish_real(coeffs: &[f64], x0: f64) -> f64 {
    let mut x = x0;
    let mut last_step = f64::INFINITY;
    for _ in 0..50 {
        let (p, dp) = eval_real_with_derivative(coeffs, x);
        if dp == 0.0 || !dp.is_finite() {
            break;
        }
        let step = p / dp;
        if !step.is_finite() || step.abs() >= last_step {
            break;
        }
        x -= step;
        last_step = step.abs();
        if step.abs() <= 1e-16 * x.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    x
}

/// Coefficients of the product of two polynomials.
pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}
