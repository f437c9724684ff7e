//! Fringe counting.
//!
//! A peak is a strict local maximum (flat tops count once, at their left
//! edge) that lies above the scan mean and has a topographic prominence of at
//! least [`MIN_PROMINENCE`] times the scan's peak-to-peak range. Peaks are
//! counted in the half-open window `[lo, hi)`, so a window one period long
//! counts each fringe exactly once regardless of where it starts.

use crate::analytic::CorrelationScan;
use crate::error::{domain, Error, Result};

pub const MIN_PROMINENCE: f64 = 0.05;

/// Points required per counted fringe.
pub const MIN_POINTS_PER_PEAK: f64 = 8.0;

/// Indices of all qualifying peaks in the scan.
pub fn find_peaks(scan: &CorrelationScan) -> Vec<usize> {
    let v = scan.values();
    let n = v.len();
    let (lo, hi) = v
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let range = hi - lo;
    if n < 3 || range <= 0.0 {
        return Vec::new();
    }
    let eps = 1e-12 * range;
    let mean = scan.mean();
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < n {
        // extend over a flat top
        let mut k = i;
        while k + 1 < n && (v[k + 1] - v[i]).abs() <= eps {
            k += 1;
        }
        if k + 1 < n
            && v[i - 1] < v[i] - eps
            && v[k + 1] < v[i] - eps
            && v[i] > mean
            && prominence(v, i, k) >= MIN_PROMINENCE * range
        {
            peaks.push(i);
        }
        i = k + 1;
    }
    peaks
}

fn prominence(v: &[f64], left: usize, right: usize) -> f64 {
    let top = v[left];
    let mut left_min = top;
    for &x in v[..left].iter().rev() {
        if x > top {
            break;
        }
        left_min = left_min.min(x);
    }
    let mut right_min = top;
    for &x in &v[right + 1..] {
        if x > top {
            break;
        }
        right_min = right_min.min(x);
    }
    top - left_min.max(right_min)
}

/// Number of peaks with `lo <= delta < hi`.
pub fn count_peaks(scan: &CorrelationScan, window: (f64, f64)) -> Result<usize> {
    let (lo, hi) = window;
    let d = scan.deltas();
    if !(hi > lo) {
        return Err(domain(format!("empty counting window [{lo}, {hi})")));
    }
    let step = (d[d.len() - 1] - d[0]) / (d.len().max(2) - 1) as f64;
    let tol = 1e-9 * step.abs().max(f64::MIN_POSITIVE);
    if lo < d[0] - tol || hi > d[d.len() - 1] + tol {
        return Err(domain(format!(
            "window [{lo}, {hi}) exceeds scan support [{}, {}]",
            d[0],
            d[d.len() - 1]
        )));
    }
    let inside = |x: f64| x >= lo - tol && x < hi - tol;
    let points = d.iter().filter(|&&x| inside(x)).count();
    if points < 3 {
        return Err(Error::ResolutionInsufficient(format!(
            "only {points} grid points inside the counting window"
        )));
    }
    let m = find_peaks(scan)
        .into_iter()
        .filter(|&i| inside(d[i]))
        .count();
    if m > 0 && (points as f64) < MIN_POINTS_PER_PEAK * m as f64 {
        return Err(Error::ResolutionInsufficient(format!(
            "{points} points for {m} fringes; need {MIN_POINTS_PER_PEAK} per fringe"
        )));
    }
    Ok(m)
}
