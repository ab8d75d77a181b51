//! CSV layouts. Column sets are fixed; cells that do not apply are left empty.

use std::path::Path;

use opa_nms::peaks::peak_separation;
use opa_nms::spectra::SpectrumKind;
use opa_nms::sweep::{PointAnalysis, SweepAxis, SweepRecord};

use crate::CliError;

/// Shortest round-trip scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}

fn joined(xs: impl Iterator<Item = f64>) -> String {
    xs.map(num).collect::<Vec<_>>().join(";")
}

pub fn summary_header() -> Vec<String> {
    let mut h: Vec<String> = [
        "series",
        "axis",
        "axis_value",
        "branch",
        "g_over_kappa",
        "power_mw",
        "delta_rad_s",
        "delta_over_omega_m",
        "photon_number",
        "q_s",
        "rh1",
        "rh2",
        "rh3",
        "stable",
        "root1_re",
        "root1_im",
        "root2_re",
        "root2_im",
        "root1_re_over_omega_m",
        "root1_im_over_omega_m",
        "root2_re_over_omega_m",
        "root2_im_over_omega_m",
        "omega_plus",
        "omega_minus",
        "omega_plus_over_omega_m",
        "omega_minus_over_omega_m",
        "refined1_re_over_omega_m",
        "refined1_im_over_omega_m",
        "refined2_re_over_omega_m",
        "refined2_im_over_omega_m",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    for i in 1..=4 {
        h.push(format!("eig{i}_re_over_omega_m"));
        h.push(format!("eig{i}_im_over_omega_m"));
    }
    for k in SpectrumKind::ALL {
        for col in [
            "peak_count",
            "peak_positions_over_omega_m",
            "peak_heights",
            "peak_fwhms_over_omega_m",
            "separation_over_omega_m",
        ] {
            h.push(format!("{k}_{col}"));
        }
    }
    h.push("error".into());
    h
}

fn summary_cells(a: &PointAnalysis) -> Vec<String> {
    let p = &a.params;
    let wm = p.omega_m;
    let ss = &a.steady;
    let st = &a.stability;
    let m = &a.modes;
    let mut row = vec![
        a.steady.branch_index.to_string(),
        num(p.parametric_gain / p.kappa),
        num(p.laser_power * 1e3),
        num(ss.delta),
        num(ss.delta / wm),
        num(ss.photon_number),
        num(ss.q_s),
        num(st.rh_values[0]),
        num(st.rh_values[1]),
        num(st.rh_values[2]),
        st.stable.to_string(),
    ];
    for r in m.positive_branch {
        row.push(num(r.re));
        row.push(num(r.im));
    }
    for r in m.positive_branch {
        row.push(num(r.re / wm));
        row.push(num(r.im / wm));
    }
    match &m.estimate {
        Some(e) => {
            row.extend([
                num(e.omega_plus),
                num(e.omega_minus),
                num(e.omega_plus / wm),
                num(e.omega_minus / wm),
            ]);
        }
        None => row.extend(std::iter::repeat(String::new()).take(4)),
    }
    for r in m.refined {
        row.push(num(r.re / wm));
        row.push(num(r.im / wm));
    }
    for z in st.eigenvalues_a {
        row.push(num(z.re / wm));
        row.push(num(z.im / wm));
    }
    for k in SpectrumKind::ALL {
        match a.spectra.iter().find(|s| s.kind == k) {
            Some(s) => row.extend([
                s.peaks.len().to_string(),
                joined(s.peaks.iter().map(|pk| pk.position / wm)),
                joined(s.peaks.iter().map(|pk| pk.height)),
                joined(s.peaks.iter().map(|pk| pk.fwhm / wm)),
                num(peak_separation(&s.peaks) / wm),
            ]),
            None => row.extend(std::iter::repeat(String::new()).take(5)),
        }
    }
    row.push(a.spectra_error.as_ref().map(|e| e.to_string()).unwrap_or_default());
    row
}

/// One row per record.
pub fn summary_rows(series: &str, axis: Option<SweepAxis>, records: &[SweepRecord]) -> Vec<Vec<String>> {
    let width = summary_header().len();
    records
        .iter()
        .map(|r| {
            let mut row = vec![
                series.to_string(),
                axis.map(|a| a.name().to_string()).unwrap_or_default(),
                axis.map(|_| num(r.axis_value)).unwrap_or_default(),
            ];
            match &r.result {
                Ok(a) => row.extend(summary_cells(a)),
                Err(e) => {
                    row.resize(width - 1, String::new());
                    row.push(e.to_string());
                }
            }
            row
        })
        .collect()
}

pub fn spectra_header() -> Vec<String> {
    [
        "series",
        "axis",
        "axis_value",
        "branch",
        "kind",
        "omega_rad_s",
        "omega_over_omega_m",
        "value",
        "value_scaled",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect()
}

/// Long format, one row per grid point. `value_scaled` is S x gamma_m for the
/// position spectrum and equal to `value` for the output spectra.
pub fn spectra_rows(series: &str, axis: Option<SweepAxis>, records: &[SweepRecord]) -> Vec<Vec<String>> {
    let mut rows = Vec::new();
    for r in records {
        let Ok(a) = &r.result else { continue };
        let wm = a.params.omega_m;
        let gm = a.params.gamma_m();
        for s in &a.spectra {
            let scale = if s.kind == SpectrumKind::SQ { gm } else { 1.0 };
            for (&w, &v) in s.grid.iter().zip(&s.values) {
                rows.push(vec![
                    series.to_string(),
                    axis.map(|a| a.name().to_string()).unwrap_or_default(),
                    axis.map(|_| num(r.axis_value)).unwrap_or_default(),
                    a.steady.branch_index.to_string(),
                    s.kind.to_string(),
                    num(w),
                    num(w / wm),
                    num(v),
                    num(v * scale),
                ]);
            }
        }
    }
    rows
}

pub fn write_csv(path: &Path, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path, e))?;
    w.write_record(header).map_err(|e| CliError::io(path, e))?;
    for row in rows {
        w.write_record(row).map_err(|e| CliError::io(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))?;
    Ok(())
}
