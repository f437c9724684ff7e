//! Least-squares fits of the single-harmonic fringe model
//! `c0 [1 + V cos(nu delta + phase)]`.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;
use std::f64::consts::TAU;

use crate::analytic::CorrelationScan;
use crate::error::{domain, Result};

/// Points required per period of a candidate harmonic.
pub const MIN_POINTS_PER_PERIOD: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub offset: f64,
    /// Fringe visibility, clamped to `[0, 1]`.
    pub visibility: f64,
    pub harmonic: usize,
    pub phase: f64,
    /// RMS of the unclamped model minus the data.
    pub residual_rms: f64,
    /// Weighted (chi-square) or plain sum of squared residuals.
    pub objective: f64,
    pub weighted: bool,
    /// Covariance of `(offset, visibility, phase)`.
    pub covariance: [[f64; 3]; 3],
}

impl FitResult {
    pub fn model(&self, delta: f64) -> f64 {
        self.offset * (1.0 + self.visibility * (self.harmonic as f64 * delta + self.phase).cos())
    }
}

/// Linear least squares on `{1, cos(nu x), sin(nu x)}` for a fixed `nu`.
pub fn fit_harmonic(
    xs: &[f64],
    ys: &[f64],
    sigmas: Option<&[f64]>,
    nu: usize,
) -> Result<FitResult> {
    if xs.len() != ys.len() || sigmas.is_some_and(|s| s.len() != xs.len()) {
        return Err(domain("fit inputs have mismatched lengths"));
    }
    if xs.len() < 3 {
        return Err(domain(format!(
            "{} points cannot determine 3 parameters",
            xs.len()
        )));
    }
    if nu == 0 {
        return Err(domain("harmonic order must be at least 1"));
    }
    let f = nu as f64;
    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let w = sigmas.map_or(1.0, |s| 1.0 / (s[i] * s[i]));
        let row = Vector3::new(1.0, (f * x).cos(), (f * x).sin());
        normal += row * row.transpose() * w;
        rhs += row * (w * y);
    }
    let inverse = normal
        .try_inverse()
        .ok_or_else(|| domain(format!("design matrix is singular for harmonic {nu}")))?;
    let beta = inverse * rhs;
    let (c0, a, b) = (beta[0], beta[1], beta[2]);

    let mut sse = 0.0;
    let mut objective = 0.0;
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let r = c0 + a * (f * x).cos() + b * (f * x).sin() - y;
        sse += r * r;
        let w = sigmas.map_or(1.0, |s| 1.0 / (s[i] * s[i]));
        objective += w * r * r;
    }
    let n = xs.len() as f64;
    let dof = (n - 3.0).max(1.0);
    let param_cov = if sigmas.is_some() {
        inverse
    } else {
        inverse * (sse / dof)
    };

    let amp = a.hypot(b);
    let visibility = if c0 != 0.0 { amp / c0 } else { 0.0 };
    let phase = (-b).atan2(a);
    // Jacobian of (c0, V, phase) with respect to (c0, a, b)
    let mut jac = Matrix3::<f64>::zeros();
    jac[(0, 0)] = 1.0;
    if c0 != 0.0 {
        jac[(1, 0)] = -amp / (c0 * c0);
        if amp > 0.0 {
            jac[(1, 1)] = a / (amp * c0);
            jac[(1, 2)] = b / (amp * c0);
        }
    }
    if amp > 0.0 {
        jac[(2, 1)] = b / (amp * amp);
        jac[(2, 2)] = -a / (amp * amp);
    }
    let cov = jac * param_cov * jac.transpose();
    let mut covariance = [[0.0; 3]; 3];
    for (r, row) in covariance.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            *v = cov[(r, c)];
        }
    }
    Ok(FitResult {
        offset: c0,
        visibility: visibility.clamp(0.0, 1.0),
        harmonic: nu,
        phase,
        residual_rms: (sse / n).sqrt(),
        objective,
        weighted: sigmas.is_some(),
        covariance,
    })
}

/// Fits every harmonic `1..=max_harmonic` that the grid can support and
/// keeps the one with the smallest (weighted) residual; ties go to the
/// smaller order.
pub fn fit_noon(scan: &CorrelationScan, max_harmonic: usize) -> Result<FitResult> {
    let xs = scan.deltas();
    let ys = scan.values();
    if xs.len() < 3 {
        return Err(domain(format!(
            "{} points cannot determine 3 parameters",
            xs.len()
        )));
    }
    let span = xs[xs.len() - 1] - xs[0];
    let sigmas = scan.uncertainties();
    let mean = scan.mean();
    let (spread, level) = ys.iter().enumerate().fold((0.0, 0.0), |(sp, lv), (i, y)| {
        let w = sigmas.map_or(1.0, |s| 1.0 / (s[i] * s[i]));
        (sp + w * (y - mean).powi(2), lv + w * y * y)
    });
    let tie = 1e-10 * spread + 1e-14 * level + 1e-300;

    let mut best: Option<FitResult> = None;
    for nu in 1..=max_harmonic {
        let period = TAU / nu as f64;
        let points_per_period = (xs.len() - 1) as f64 * period / span;
        if span < period * (1.0 - 1e-9) || points_per_period < MIN_POINTS_PER_PERIOD {
            continue;
        }
        let fit = fit_harmonic(xs, ys, sigmas, nu)?;
        match &best {
            Some(b) if fit.objective >= b.objective - tie => {}
            _ => best = Some(fit),
        }
    }
    best.ok_or_else(|| {
        domain(format!(
            "no harmonic in 1..={max_harmonic} is sampled with a full period and {MIN_POINTS_PER_PERIOD} points per period"
        ))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::linspace;
    use crate::source::{DetectorConfig, SourceArray, SourceKind};

    fn synthetic(nu: usize, c0: f64, v: f64, phase: f64) -> CorrelationScan {
        let xs = linspace(0.0, TAU, 97);
        let ys = xs
            .iter()
            .map(|x| c0 * (1.0 + v * (nu as f64 * x + phase).cos()))
            .collect();
        let src = SourceArray::new(2, 1.0, 1.0, SourceKind::Tls).unwrap();
        let cfg = DetectorConfig::with_fixed(&[0.0]).unwrap();
        CorrelationScan::new(xs, ys, None, src, cfg).unwrap()
    }

    #[test]
    fn recovers_synthetic_parameters() {
        let fit = fit_noon(&synthetic(3, 2.0, 0.4, 0.7), 8).unwrap();
        assert_eq!(fit.harmonic, 3);
        assert!((fit.offset - 2.0).abs() < 1e-12);
        assert!((fit.visibility - 0.4).abs() < 1e-12);
        assert!((fit.phase - 0.7).abs() < 1e-12);
        assert!(fit.residual_rms < 1e-12);
        assert!((fit.model(1.0) - 2.0 * (1.0 + 0.4 * (3.0 + 0.7f64).cos())).abs() < 1e-12);
    }

    #[test]
    fn constant_ties_resolve_to_first_harmonic() {
        let fit = fit_noon(&synthetic(1, 1.5, 0.0, 0.0), 6).unwrap();
        assert_eq!(fit.harmonic, 1);
        assert!(fit.visibility < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_harmonic(&[0.0, 1.0], &[1.0, 1.0], None, 1).is_err());
        assert!(fit_harmonic(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], None, 1).is_err());
        let src = SourceArray::new(2, 1.0, 1.0, SourceKind::Tls).unwrap();
        let cfg = DetectorConfig::with_fixed(&[0.0]).unwrap();
        let short =
            CorrelationScan::new(vec![0.0, 0.1, 0.2, 0.3], vec![1.0; 4], None, src, cfg).unwrap();
        assert!(fit_noon(&short, 4).is_err());
    }

    #[test]
    fn weighted_fit_reports_parameter_errors() {
        let scan = synthetic(2, 1.0, 0.5, 0.0);
        let sig = vec![0.01; scan.len()];
        let fit = fit_harmonic(scan.deltas(), scan.values(), Some(&sig), 2).unwrap();
        assert!(fit.weighted);
        // sd of the offset for n points with equal sigma is sigma / sqrt(n)
        let expected = 0.01 / (scan.len() as f64).sqrt();
        assert!((fit.covariance[0][0].sqrt() / expected - 1.0).abs() < 0.05);
        assert!(fit.covariance[1][1] > 0.0);
    }
}
