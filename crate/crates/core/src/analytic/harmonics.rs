use num_complex::Complex64;
use std::collections::BTreeMap;
use std::f64::consts::TAU;

use super::scan::CorrelationScan;
use crate::error::{domain, Result};

/// Fourier coefficients `c_m = (1/K) sum_k g(delta_k) exp(-i m delta_k)` of a
/// scan over one full period, for orders `0..=N`.
///
/// The grid must be uniform with a step that divides `2 pi`; the first
/// period's worth of points is used.
pub fn harmonic_decomposition(scan: &CorrelationScan) -> Result<BTreeMap<usize, Complex64>> {
    let max_order = scan.source().n_sources();
    let deltas = scan.deltas();
    if deltas.len() < 2 {
        return Err(domain(
            "harmonic decomposition needs at least two grid points",
        ));
    }
    let step = deltas[1] - deltas[0];
    for w in deltas.windows(2) {
        if ((w[1] - w[0]) - step).abs() > 1e-9 * step {
            return Err(domain("harmonic decomposition needs a uniform grid"));
        }
    }
    let per_period = (TAU / step).round();
    if per_period < 1.0 || (per_period * step - TAU).abs() > 1e-9 * TAU {
        return Err(domain("grid step does not divide a 2 pi period"));
    }
    let k = per_period as usize;
    if k > deltas.len() {
        return Err(domain(format!(
            "grid covers {} of the {k} points of one period",
            deltas.len()
        )));
    }
    if k < 2 * max_order + 1 {
        return Err(domain(format!(
            "{k} points per period cannot resolve harmonics up to {max_order}"
        )));
    }
    let values = scan.values();
    let mut out = BTreeMap::new();
    for m in 0..=max_order {
        let c: Complex64 = (0..k)
            .map(|i| values[i] * Complex64::from_polar(1.0, -(m as f64) * deltas[i]))
            .sum();
        out.insert(m, c / k as f64);
    }
    Ok(out)
}

/// Fraction of harmonic energy outside the orders in `keep`.
pub fn out_of_band_energy(coeffs: &BTreeMap<usize, Complex64>, keep: &[usize]) -> f64 {
    let total: f64 = coeffs.values().map(|c| c.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let outside: f64 = coeffs
        .iter()
        .filter(|(m, _)| !keep.contains(m))
        .map(|(_, c)| c.norm_sqr())
        .sum();
    outside / total
}

/// Visibility `2 |c_order| / c_0` of a single harmonic.
pub fn harmonic_visibility(coeffs: &BTreeMap<usize, Complex64>, order: usize) -> Option<f64> {
    let c0 = coeffs.get(&0)?.re;
    let cm = coeffs.get(&order)?;
    (c0 != 0.0).then(|| 2.0 * cm.norm() / c0)
}
