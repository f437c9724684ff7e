//! Recovery of the emitter spacing, from magic detector angles or by fitting
//! the full finite-slit model to a scan recorded in angle space.

use serde::Serialize;
use std::f64::consts::TAU;

use super::fit::fit_harmonic;
use crate::analytic::AnalyticEngine;
use crate::error::{domain, Error, Result};
use crate::source::{SourceArray, SourceKind};

/// Largest relative spread tolerated between pairwise spacing estimates.
pub const MAX_PAIR_SPREAD: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpacingEstimate {
    pub spacing: f64,
    /// `(max - min) / mean` of the pairwise estimates.
    pub spread: f64,
    pub pairs: Vec<f64>,
}

/// Spacing from detectors placed at consecutive magic positions of an
/// order-`n` pattern: each neighbouring pair gives
/// `d = lambda / ((N-1)(sin theta_j - sin theta_{j-1}))`.
pub fn recover_spacing(angles: &[f64], wavelength: f64, n: usize) -> Result<SpacingEstimate> {
    if n < 2 {
        return Err(domain(format!("order must be at least 2, got {n}")));
    }
    if angles.len() < 2 {
        return Err(domain("need at least one pair of detector angles"));
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let order = (n - 1) as f64;
    let pairs = angles
        .windows(2)
        .map(|w| {
            let ds = w[1].sin() - w[0].sin();
            if ds == 0.0 {
                Err(domain("coincident detector angles"))
            } else {
                Ok((wavelength / (order * ds)).abs())
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let mean = pairs.iter().sum::<f64>() / pairs.len() as f64;
    let lo = pairs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let spread = (hi - lo) / mean;
    if spread > MAX_PAIR_SPREAD {
        return Err(Error::Inconsistent {
            spread,
            limit: MAX_PAIR_SPREAD,
        });
    }
    Ok(SpacingEstimate {
        spacing: mean,
        spread,
        pairs,
    })
}

/// Correlation values recorded as a function of the scanned detector's
/// observation angle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AngleScan {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub uncertainties: Option<Vec<f64>>,
}

impl AngleScan {
    /// Converts a phase-space scan into angles using the true geometry.
    pub fn from_scan(scan: &crate::analytic::CorrelationScan) -> Result<Self> {
        let src = scan.source();
        let thetas = scan
            .deltas()
            .iter()
            .map(|&d| crate::geometry::angle_from_phase(src, d))
            .collect::<Result<Vec<_>>>()?;
        Ok(AngleScan {
            thetas,
            values: scan.values().to_vec(),
            uncertainties: scan.uncertainties().map(<[f64]>::to_vec),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeometryFit {
    pub spacing: f64,
    pub slit_width: f64,
    /// Visibility of the fitted curve over the scanned range.
    pub visibility: f64,
    /// The fit is `offset + scale * g_model(theta; d, a)`.
    pub offset: f64,
    pub scale: f64,
    pub residual_rms: f64,
    /// Initial spacing from the fringe-frequency search.
    pub spacing_seed: f64,
    /// Fitted curve at the scan angles.
    pub curve: Vec<f64>,
}

struct ModelFit {
    objective: f64,
    offset: f64,
    scale: f64,
    curve: Vec<f64>,
}

fn linear_fit(model: &[f64], ys: &[f64], sigmas: Option<&[f64]>) -> Option<(f64, f64, f64)> {
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, (&x, &y)) in model.iter().zip(ys).enumerate() {
        let w = sigmas.map_or(1.0, |s| 1.0 / (s[i] * s[i]));
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    let det = sw * sxx - sx * sx;
    if det.abs() <= 1e-14 * sw * sxx {
        return None;
    }
    let scale = (sw * sxy - sx * sy) / det;
    let offset = (sy - scale * sx) / sw;
    let objective = model
        .iter()
        .zip(ys)
        .enumerate()
        .map(|(i, (&x, &y))| {
            let w = sigmas.map_or(1.0, |s| 1.0 / (s[i] * s[i]));
            w * (offset + scale * x - y).powi(2)
        })
        .sum();
    Some((offset, scale, objective))
}

/// Fits spacing `d` and slit width `a` of an order-`N` array (`N` = number of
/// detectors) to an angle scan taken with the other detectors held at
/// `fixed_angles`. The visibility and overall level enter through a linear
/// rescaling of the model.
pub fn fit_slit_geometry(
    scan: &AngleScan,
    fixed_angles: &[f64],
    wavelength: f64,
    kind: SourceKind,
) -> Result<GeometryFit> {
    let n = fixed_angles.len() + 1;
    let npts = scan.thetas.len();
    if npts < 8 || scan.values.len() != npts {
        return Err(domain("angle scan needs at least 8 matched points"));
    }
    if scan.uncertainties.as_ref().is_some_and(|u| u.len() != npts) {
        return Err(domain("uncertainties do not match the angle grid"));
    }
    let engine = AnalyticEngine::default();
    let sigmas = scan.uncertainties.as_deref();
    let us: Vec<f64> = scan.thetas.iter().map(|t| t.sin()).collect();
    let span = us[npts - 1] - us[0];
    if !(span > 0.0) {
        return Err(domain("angle grid must be increasing"));
    }
    let nu = (n - 1) as f64;

    // fringe frequency in sin(theta): phase nu*k*d*u = 2 pi f u  =>  d = f lambda / nu
    let f_min = 1.0 / span;
    let f_max = (npts - 1) as f64 / (2.0 * span);
    let df = 1.0 / (8.0 * span);
    let score = |f: f64| -> f64 {
        // rescale so the trial frequency maps onto harmonic 1
        let xs: Vec<f64> = us.iter().map(|u| TAU * f * u).collect();
        fit_harmonic(&xs, &scan.values, sigmas, 1).map_or(f64::INFINITY, |r| r.objective)
    };
    let mut best_f = f_min;
    let mut best_score = f64::INFINITY;
    let mut f = f_min;
    while f <= f_max {
        let s = score(f);
        if s < best_score {
            best_score = s;
            best_f = f;
        }
        f += df;
    }
    let best_f = golden_min(&score, best_f - df, best_f + df, 1e-12 * best_f);
    let spacing_seed = best_f * wavelength / nu;

    let evaluate = |d: f64, a: f64| -> Option<ModelFit> {
        if !(d > 0.0) || !(0.0..d).contains(&a) {
            return None;
        }
        let src = SourceArray::new(n, d, wavelength, kind)
            .ok()?
            .with_slit_width(a)
            .ok()?;
        let kd = src.kd();
        let mut phases: Vec<f64> = std::iter::once(0.0)
            .chain(fixed_angles.iter().map(|t| kd * t.sin()))
            .collect();
        let curve = us
            .iter()
            .map(|u| {
                phases[0] = kd * u;
                engine.evaluate(&src, &phases)
            })
            .collect::<Result<Vec<_>>>()
            .ok()?;
        let (offset, scale, objective) = linear_fit(&curve, &scan.values, sigmas)?;
        Some(ModelFit {
            objective,
            offset,
            scale,
            curve,
        })
    };
    let objective = |x: &[f64]| -> f64 {
        let d = spacing_seed * (1.0 + x[0]);
        let a = if kind == SourceKind::Spe {
            0.0
        } else {
            x[1].abs() * spacing_seed
        };
        evaluate(d, a).map_or(f64::INFINITY, |m| m.objective)
    };

    let starts: &[f64] = if kind == SourceKind::Spe {
        &[0.0]
    } else {
        &[0.0, 0.1, 0.25]
    };
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &a0 in starts {
        let start = [0.0, a0];
        let (x, fx) = super::magic::nelder_mead(&mut |x: &[f64]| objective(x), &start, 0.002, 2000);
        if best.as_ref().is_none_or(|(_, fb)| fx < *fb) {
            best = Some((x, fx));
        }
    }
    let (x, _) = best.expect("at least one start");
    let spacing = spacing_seed * (1.0 + x[0]);
    let slit_width = if kind == SourceKind::Spe {
        0.0
    } else {
        x[1].abs() * spacing_seed
    };
    let fit = evaluate(spacing, slit_width)
        .ok_or_else(|| domain("model fit did not converge to a valid geometry"))?;
    let fitted: Vec<f64> = fit
        .curve
        .iter()
        .map(|g| fit.offset + fit.scale * g)
        .collect();
    let hi = fitted.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = fitted.iter().copied().fold(f64::INFINITY, f64::min);
    let residual_rms = (fitted
        .iter()
        .zip(&scan.values)
        .map(|(m, y)| (m - y).powi(2))
        .sum::<f64>()
        / npts as f64)
        .sqrt();
    Ok(GeometryFit {
        spacing,
        slit_width,
        visibility: (hi - lo) / (hi + lo),
        offset: fit.offset,
        scale: fit.scale,
        residual_rms,
        spacing_seed,
        curve: fitted,
    })
}

fn golden_min(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - ratio * (b - a);
    let mut d = a + ratio * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - ratio * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + ratio * (b - a);
            fd = f(d);
        }
    }
    (a + b) / 2.0
}
