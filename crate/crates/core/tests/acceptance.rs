//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::process::ExitCode;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use opa_nms::linear_dynamics::{
    coupling_bracket, drift_matrix, eigenvalues_ia, roots_of_d, routh_hurwitz,
};
use opa_nms::params::{derive_constants, DerivedConstants, DetuningSpec, PhysicalConstants, SystemParams};
use opa_nms::peaks::peak_separation;
use opa_nms::presets::{preset, Figure};
use opa_nms::spectra::{
    output_spectra_at, sq_radiation_bracket, sq_spectrum, spectra, FrequencyGrid, NoiseModel,
    SpectrumKind,
};
use opa_nms::steady_state::{solve_branches, steady_state_at_delta, SteadyState};
use opa_nms::sweep::{run_sweep, stability_boundary, GridSpec, SweepAxis};

const C: PhysicalConstants = PhysicalConstants::CODATA;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn setup(p: &SystemParams) -> (DerivedConstants, SteadyState) {
    let d = derive_constants(p, &C).unwrap();
    let delta = p.effective_detuning().unwrap();
    let ss = steady_state_at_delta(p, &d, delta).unwrap();
    (d, ss)
}

/// Largest relative mismatch after greedy nearest matching of two multisets.
fn multiset_mismatch(a: &[Complex64], b: &[Complex64]) -> f64 {
    let mut pool = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (i, err) = pool
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (x - y).norm() / y.norm().max(x.norm())))
            .min_by(|p, q| p.1.total_cmp(&q.1))
            .unwrap();
        worst = worst.max(err);
        pool.swap_remove(i);
    }
    worst
}

fn photon_numbers() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (g, expected) in [(0.0, 2.68e9), (1.3, 4.30e9), (1.45, 5.65e9)] {
        let p = SystemParams::reference().with_gain_over_kappa(g);
        let (_, ss) = setup(&p);
        let rel = (ss.photon_number - expected).abs() / expected;
        pass &= rel < 0.01;
        detail.push(format!("G={g}k: {:.4e} ({:.2}%)", ss.photon_number, 100.0 * rel));
    }
    outcome(pass, detail.join(", "))
}

fn gain_bound() -> Outcome {
    let r = stability_boundary(&SystemParams::reference(), &C, SweepAxis::ParametricGain, 0.0, 2.0)
        .unwrap();
    outcome(
        (r.critical_value - 1.62).abs() <= 0.02,
        format!("G_max/kappa = {:.4}, failing {:?}", r.critical_value, r.failing_conditions),
    )
}

fn power_bound() -> Outcome {
    let p = SystemParams::reference()
        .with_gain_over_kappa(1.3)
        .with_detuning(DetuningSpec::Degenerate);
    let r = stability_boundary(&p, &C, SweepAxis::LaserPower, 1.0, 100.0).unwrap();
    outcome(
        (r.critical_value - 55.0).abs() <= 1.0,
        format!("P_max = {:.3} mW, failing {:?}", r.critical_value, r.failing_conditions),
    )
}

fn uncoupled_closed_forms() -> Outcome {
    let mut worst: f64 = 0.0;
    for (g, x) in [(0.0, 1.0), (0.3, 1.0), (1.3, 1.2), (0.8, 2.0)] {
        let p = SystemParams::reference()
            .with_gain_over_kappa(g)
            .with_detuning(DetuningSpec::Effective(x * SystemParams::reference().omega_m));
        let (mut d, _) = setup(&p);
        d.chi = 0.0;
        let ss = steady_state_at_delta(&p, &d, x * p.omega_m).unwrap();
        let gm = d.gamma_m;
        let mech = (p.omega_m.powi(2) - gm * gm / 4.0).sqrt();
        let opt = (ss.delta.powi(2) - 4.0 * p.parametric_gain.powi(2)).sqrt();
        let expected = [
            Complex64::new(mech, -gm / 2.0),
            Complex64::new(-mech, -gm / 2.0),
            Complex64::new(opt, -p.kappa),
            Complex64::new(-opt, -p.kappa),
        ];
        let eig = eigenvalues_ia(&drift_matrix(&ss, &d, &p)).unwrap();
        let roots = roots_of_d(&ss, &d, &p).unwrap().d_roots;
        worst = worst
            .max(multiset_mismatch(&eig, &expected))
            .max(multiset_mismatch(&roots, &expected));
    }
    outcome(worst < 1e-10, format!("worst relative error {worst:.2e}"))
}

fn random_params(rng: &mut ChaCha8Rng) -> SystemParams {
    let r = SystemParams::reference();
    let kappa = 2.0 * std::f64::consts::PI * rng.gen_range(100e3..400e3);
    SystemParams {
        kappa,
        quality_factor: rng.gen_range(1e3..2e4),
        temperature: rng.gen_range(0.0..1.0),
        parametric_gain: rng.gen_range(0.0..1.6) * kappa,
        parametric_phase: rng.gen_range(0.0..std::f64::consts::TAU),
        laser_power: rng.gen_range(0.1..15.0) * 1e-3,
        detuning: DetuningSpec::Effective(rng.gen_range(0.5..2.0) * r.omega_m),
        ..r
    }
}

fn admissible(p: &SystemParams) -> Option<(DerivedConstants, SteadyState)> {
    let d = derive_constants(p, &C).ok()?;
    let ss = steady_state_at_delta(p, &d, p.effective_detuning()?).ok()?;
    Some((d, ss))
}

fn root_eigen_duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    let mut n = 0;
    while n < 200 {
        let p = random_params(&mut rng);
        let Some((d, ss)) = admissible(&p) else { continue };
        let eig = eigenvalues_ia(&drift_matrix(&ss, &d, &p)).unwrap();
        let roots = roots_of_d(&ss, &d, &p).unwrap().d_roots;
        worst = worst.max(multiset_mismatch(&roots, &eig));
        n += 1;
    }
    outcome(worst < 1e-6, format!("{n} sets, worst relative mismatch {worst:.2e}"))
}

fn brownian_limit() -> Outcome {
    let p = SystemParams::reference();
    let (mut d, _) = setup(&p);
    d.chi = 0.0;
    let ss = steady_state_at_delta(&p, &d, p.omega_m).unwrap();
    let grid = FrequencyGrid::uniform(0.999, 1.001, 4001, p.omega_m).unwrap();
    let s = sq_spectrum(&ss, &d, &p, &grid, &NoiseModel::exact(p.temperature)).unwrap();
    let gm = d.gamma_m;
    let wm = p.omega_m;
    let worst = s
        .grid
        .iter()
        .zip(&s.values)
        .map(|(&w, &v)| {
            let coth = 1.0 / (C.hbar * w / (2.0 * C.k_b * p.temperature)).tanh();
            let exact = 2.0 * gm * wm * w * coth / ((w * w - wm * wm).powi(2) + gm * gm * w * w);
            (v - exact).abs() / exact
        })
        .fold(0.0, f64::max);
    let step = grid.points()[1] - grid.points()[0];
    let pass = s.peaks.len() == 1
        && (s.peaks[0].position - wm).abs() <= step
        && (s.peaks[0].fwhm - gm).abs() <= 0.02 * gm
        && worst < 1e-10;
    let (pos, fwhm) = s.peaks.first().map_or((f64::NAN, f64::NAN), |pk| (pk.position, pk.fwhm));
    outcome(
        pass,
        format!(
            "max rel err {worst:.2e}, {} peak(s), offset {:.2} steps, FWHM/gamma_m = {:.4}",
            s.peaks.len(),
            (pos - wm) / step,
            fwhm / gm
        ),
    )
}

fn figure_spectra(fig: Figure) -> Vec<(f64, Vec<opa_nms::spectra::SpectrumResult>)> {
    let pr = preset(fig, GridSpec::default());
    let run = &pr.runs[0];
    run_sweep(&run.base, &C, &run.spec, 4)
        .unwrap()
        .into_iter()
        .map(|r| (r.axis_value, r.result.unwrap().spectra))
        .collect()
}

fn gain_figures() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (fig, kind) in [
        (Figure::Fig4, SpectrumKind::SQ),
        (Figure::Fig5, SpectrumKind::Scout),
        (Figure::Fig6, SpectrumKind::Sxout),
        (Figure::Fig7, SpectrumKind::Syout),
    ] {
        let rows = figure_spectra(fig);
        let counts: Vec<usize> = rows.iter().map(|(_, s)| s[0].peaks.len()).collect();
        pass &= counts == [1, 2, 2];
        let mut line = format!("{kind} peaks {counts:?}");
        if kind == SpectrumKind::SQ {
            let sep: Vec<f64> = rows
                .iter()
                .map(|(_, s)| peak_separation(&s[0].peaks) / SystemParams::reference().omega_m)
                .collect();
            pass &= sep[2] > sep[1];
            line.push_str(&format!(" sep/omega_m {:.4} -> {:.4}", sep[1], sep[2]));
        }
        detail.push(line);
    }
    outcome(pass, detail.join("; "))
}

fn power_figures() -> Outcome {
    let wm = SystemParams::reference().omega_m;
    let sep = |fig| -> Vec<f64> {
        figure_spectra(fig)
            .iter()
            .map(|(_, s)| peak_separation(&s[0].peaks) / wm)
            .collect()
    };
    let with_gain = sep(Figure::Fig8);
    let without = sep(Figure::Fig9);
    let pass = with_gain[0] < with_gain[1]
        && with_gain[1] < with_gain[2]
        && with_gain[1] > without[1]
        && with_gain[2] > without[2];
    outcome(
        pass,
        format!("G=1.3k: {with_gain:.4?}; G=0: {without:.4?} (sep/omega_m at 0.6, 6.9, 10.7 mW)"),
    )
}

/// Follows the two positive-branch roots along the sweep by continuity.
fn track(points: &[[Complex64; 2]]) -> Vec<[Complex64; 2]> {
    let mut out = vec![points[0]];
    for pair in &points[1..] {
        let prev = out.last().unwrap();
        let keep = (pair[0] - prev[0]).norm() + (pair[1] - prev[1]).norm();
        let swap = (pair[1] - prev[0]).norm() + (pair[0] - prev[1]).norm();
        out.push(if swap < keep { [pair[1], pair[0]] } else { *pair });
    }
    out
}

fn broaden_narrow() -> Outcome {
    let pr = preset(Figure::Fig3, GridSpec::default());
    let mut pass = true;
    let mut detail = Vec::new();
    for run in &pr.runs {
        let recs = run_sweep(&run.base, &C, &run.spec, 4).unwrap();
        let gains: Vec<f64> = recs.iter().map(|r| r.axis_value).collect();
        let roots: Vec<[Complex64; 2]> = recs
            .iter()
            .map(|r| r.result.as_ref().unwrap().modes.positive_branch)
            .collect();
        let tracked = track(&roots);
        let inside: Vec<usize> = (0..gains.len())
            .filter(|&i| gains[i] >= 0.8 - 1e-9 && gains[i] <= 1.45 + 1e-9)
            .collect();
        let widths = |k: usize| -> Vec<f64> { inside.iter().map(|&i| tracked[i][k].im.abs()).collect() };
        let non_increasing = |w: &[f64]| w.windows(2).all(|s| s[1] <= s[0]);
        let non_decreasing = |w: &[f64]| w.windows(2).all(|s| s[1] >= s[0]);
        let (w0, w1) = (widths(0), widths(1));
        let ok = (non_increasing(&w0) && non_decreasing(&w1)) || (non_decreasing(&w0) && non_increasing(&w1));
        pass &= ok;
        let narrowing = if w0.last() < w0.first() { &w0 } else { &w1 };
        let violations: Vec<String> = inside
            .windows(2)
            .zip(narrowing.windows(2))
            .filter(|(_, w)| w[1] > w[0])
            .map(|(i, w)| {
                format!(
                    "G {:.2}->{:.2}: {:.6}->{:.6}",
                    gains[i[0]],
                    gains[i[1]],
                    w[0] / run.base.kappa,
                    w[1] / run.base.kappa
                )
            })
            .collect();
        detail.push(format!(
            "{}: {} (narrowing |Im|/kappa rises at [{}])",
            run.label,
            if ok { "monotone" } else { "not monotone" },
            violations.join(", ")
        ));
    }
    outcome(pass, detail.join("; "))
}

fn splitting_estimates() -> Outcome {
    let p = SystemParams::reference()
        .with_gain_over_kappa(1.3)
        .with_power_mw(10.7)
        .with_detuning(DetuningSpec::Degenerate);
    let (d, ss) = setup(&p);
    let m = roots_of_d(&ss, &d, &p).unwrap();
    let exact = [m.positive_branch[0].re, m.positive_branch[1].re];
    let refined = [m.refined[0].re, m.refined[1].re];
    let Some(e) = m.estimate else {
        return outcome(false, format!("plain estimate invalid: {:?}", m.estimate_invalid_reason));
    };
    let plain = [e.omega_plus, e.omega_minus];
    let err = |est: [f64; 2]| (0..2).map(|k| (est[k] - exact[k]).abs() / exact[k]).fold(0.0, f64::max);
    let (er, ep) = (err(refined), err(plain));
    outcome(
        er < 0.05 && ep < 0.15,
        format!(
            "roots Re/omega_m [{:.5}, {:.5}], refined err {:.2}%, plain err {:.2}%",
            exact[0] / p.omega_m,
            exact[1] / p.omega_m,
            100.0 * er,
            100.0 * ep
        ),
    )
}

fn nonnegativity_and_reality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst_neg: f64 = 0.0;
    let mut worst_im: f64 = 0.0;
    let mut n = 0;
    let mut attempts = 0;
    while n < 100 && attempts < 10_000 {
        attempts += 1;
        let p = random_params(&mut rng);
        let Some((d, ss)) = admissible(&p) else { continue };
        if !routh_hurwitz(&ss, &d, &p).unwrap().stable {
            continue;
        }
        let grid = GridSpec::default().build(p.omega_m).unwrap();
        let noise = NoiseModel::auto(&p, &C);
        let all = spectra(&ss, &d, &p, &grid, &noise, &SpectrumKind::ALL).unwrap();
        for s in &all {
            let max = s.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let min = s.values.iter().copied().fold(f64::INFINITY, f64::min);
            worst_neg = worst_neg.max(-min / max);
        }
        let cb = coupling_bracket(&ss, &p);
        worst_im = worst_im.max(cb.im.abs() / cb.norm().max(f64::MIN_POSITIVE));
        for &w in grid.points() {
            let b = sq_radiation_bracket(&ss, &p, w);
            worst_im = worst_im.max(b.im.abs() / b.norm().max(f64::MIN_POSITIVE));
            for z in output_spectra_at(&ss, &d, &p, &noise, w) {
                if z.norm() > 0.0 {
                    worst_im = worst_im.max(z.im.abs() / z.norm());
                }
            }
        }
        n += 1;
    }
    outcome(
        n >= 100 && worst_neg <= 1e-12 && worst_im < 1e-12,
        format!("{n} stable sets, worst -min/max {worst_neg:.2e}, worst imaginary residue {worst_im:.2e}"),
    )
}

/// Real roots of the detuning self-consistency condition, written in factored
/// form, by a dense sign-change scan followed by bisection.
fn scan_roots(p: &SystemParams, d: &DerivedConstants, delta0: f64, samples: usize) -> Vec<f64> {
    let g = p.parametric_gain;
    let k = 2.0 * p.omega_m * d.chi * d.chi * d.epsilon * d.epsilon;
    let e = Complex64::from_polar(2.0 * g, p.parametric_phase);
    let f = |x: f64| {
        let den = p.kappa * p.kappa + x * x - 4.0 * g * g;
        (delta0 - x) * den * den - k * (Complex64::new(p.kappa, -x) + e).norm_sqr()
    };
    let lo = delta0 - 10.0 * p.omega_m;
    let hi = delta0 + 10.0 * p.omega_m;
    let step = (hi - lo) / (samples - 1) as f64;
    let mut roots = Vec::new();
    let mut xa = lo;
    let mut fa = f(xa);
    for i in 1..samples {
        let xb = lo + step * i as f64;
        let fb = f(xb);
        if fa == 0.0 {
            roots.push(xa);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut a, mut b, mut fa_) = (xa, xb, fa);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let fm = f(m);
                if fm.signum() == fa_.signum() {
                    a = m;
                    fa_ = fm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        xa = xb;
        fa = fb;
    }
    roots
}

fn multistability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut pass = true;
    let mut worst: f64 = 0.0;
    let mut multi = 0;
    let mut failures = Vec::new();
    let configs = 60;
    for i in 0..configs {
        let r = SystemParams::reference();
        let p = SystemParams {
            parametric_gain: rng.gen_range(0.0..0.45) * r.kappa,
            parametric_phase: rng.gen_range(0.0..std::f64::consts::TAU),
            laser_power: rng.gen_range(1.0..60.0) * 1e-3,
            detuning: DetuningSpec::Bare(rng.gen_range(-2.0..12.0) * r.kappa),
            ..r
        };
        let DetuningSpec::Bare(delta0) = p.detuning else { unreachable!() };
        let d = derive_constants(&p, &C).unwrap();
        let found: Vec<f64> = solve_branches(&p, &d, delta0).unwrap().iter().map(|s| s.delta).collect();
        let oracle = scan_roots(&p, &d, delta0, 1_000_000);
        if found.len() > 1 {
            multi += 1;
        }
        if found.len() != oracle.len() {
            pass = false;
            failures.push(format!("config {i}: {} vs oracle {}", found.len(), oracle.len()));
            continue;
        }
        for (a, b) in found.iter().zip(&oracle) {
            let err = (a - b).abs() / b.abs().max(p.kappa);
            worst = worst.max(err);
            if err > 1e-6 {
                pass = false;
                failures.push(format!("config {i}: {a:e} vs {b:e}"));
            }
        }
    }
    outcome(
        pass,
        format!(
            "{configs} configs ({multi} multistable), worst relative location error {worst:.2e}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("intracavity photon numbers", photon_numbers),
        ("stability bound in G", gain_bound),
        ("stability bound in power", power_bound),
        ("uncoupled closed-form roots", uncoupled_closed_forms),
        ("root/eigenvalue duality", root_eigen_duality),
        ("Brownian limit", brownian_limit),
        ("gain-dependent spectra peak pattern", gain_figures),
        ("power-dependent splitting trend", power_figures),
        ("broadening and narrowing roots", broaden_narrow),
        ("splitting estimate consistency", splitting_estimates),
        ("spectra nonnegativity and reality", nonnegativity_and_reality),
        ("multistability branch oracle", multistability),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<38} {}  {}",
            i + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
