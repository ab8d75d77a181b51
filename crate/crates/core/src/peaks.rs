//! Peak detection on sampled spectra.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Peak position, same units as the grid.
    pub position: f64,
    pub height: f64,
    /// Full width at half maximum, same units as the grid.
    pub fwhm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeakOptions {
    /// Minimum peak height as a fraction of the global maximum.
    pub min_height_fraction: f64,
}

impl Default for PeakOptions {
    fn default() -> Self {
        Self {
            min_height_fraction: 0.05,
        }
    }
}

/// Strict local maxima at least `min_height_fraction` of the global maximum
/// high, refined by a three-point parabola, sorted by position.
///
/// The FWHM is measured between linearly interpolated half-height crossings.
/// When one side never drops to half height inside the grid, the width is
/// taken as twice the measured half-width on the other side.
pub fn find_peaks(grid: &[f64], values: &[f64], opts: PeakOptions) -> Vec<Peak> {
    let n = grid.len().min(values.len());
    if n < 5 {
        return Vec::new();
    }
    let global_max = values[..n]
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !(global_max > 0.0) {
        return Vec::new();
    }
    let threshold = opts.min_height_fraction * global_max;

    let mut peaks = Vec::new();
    for i in 1..n - 1 {
        let (l, c, r) = (values[i - 1], values[i], values[i + 1]);
        if !(c > l && c > r && c >= threshold) {
            continue;
        }
        let (position, height) = parabola_vertex(
            (grid[i - 1], l),
            (grid[i], c),
            (grid[i + 1], r),
        );
        let half = height / 2.0;

        let left = (1..=i).rev().find_map(|j| {
            (values[j - 1] <= half).then(|| lerp_crossing(grid[j - 1], values[j - 1], grid[j], values[j], half))
        });
        let right = (i..n - 1).find_map(|j| {
            (values[j + 1] <= half).then(|| lerp_crossing(grid[j], values[j], grid[j + 1], values[j + 1], half))
        });
        let fwhm = match (left, right) {
            (Some(a), Some(b)) => b - a,
            (Some(a), None) => 2.0 * (position - a),
            (None, Some(b)) => 2.0 * (b - position),
            (None, None) => grid[n - 1] - grid[0],
        };
        if fwhm > 0.0 {
            peaks.push(Peak {
                position,
                height,
                fwhm,
            });
        }
    }
    peaks
}

/// Distance between the two highest peaks, zero when fewer than two exist.
pub fn peak_separation(peaks: &[Peak]) -> f64 {
    if peaks.len() < 2 {
        return 0.0;
    }
    let mut by_height: Vec<&Peak> = peaks.iter().collect();
    by_height.sort_by(|a, b| b.height.total_cmp(&a.height));
    (by_height[0].position - by_height[1].position).abs()
}

fn parabola_vertex((x0, y0): (f64, f64), (x1, y1): (f64, f64), (x2, y2): (f64, f64)) -> (f64, f64) {
    // Newton divided differences: y = y1 + b (x - x1) + a (x - x1)^2
    let d01 = (y1 - y0) / (x1 - x0);
    let d12 = (y2 - y1) / (x2 - x1);
    let a = (d12 - d01) / (x2 - x0);
    if !(a < 0.0) {
        return (x1, y1);
    }
    let b = d01 + a * (x1 - x0);
    let dx = (-b / (2.0 * a)).clamp(x0 - x1, x2 - x1);
    (x1 + dx, y1 + b * dx + a * dx * dx)
}

fn lerp_crossing(xa: f64, ya: f64, xb: f64, yb: f64, level: f64) -> f64 {
    if yb == ya {
        return xa;
    }
    xa + (level - ya) * (xb - xa) / (yb - ya)
}
