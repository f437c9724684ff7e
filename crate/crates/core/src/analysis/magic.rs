//! Numerical search for magic detector positions: fixed-detector phases that
//! leave only harmonics 0 and N-1 in the scanned-detector pattern.

use num_complex::Complex64;
use serde::Serialize;
use std::cell::Cell;
use std::f64::consts::TAU;

use crate::analytic::AnalyticEngine;
use crate::error::{Error, Result};
use crate::geometry::wrap_phase;
use crate::source::SourceArray;

/// Purity an optimum must reach to count as magic.
pub const PURITY_THRESHOLD: f64 = 1e-6;

/// Objective evaluations spent on the coarse torus grid.
const GRID_BUDGET: f64 = 2.0e4;
const MAX_GRID_PER_AXIS: usize = 24;
const MIN_GRID_PER_AXIS: usize = 6;
/// Coarse-grid minima refined locally.
const REFINED_STARTS: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagicSearchResult {
    /// Canonical fixed-detector phases `delta_2..delta_N`.
    pub phases: Vec<f64>,
    /// Out-of-band harmonic energy at `phases`.
    pub purity: f64,
    pub evaluations: usize,
}

/// Spurious-harmonic energy `sum_{m not in {0, N-1}} |c_m|^2 / sum_{m >= 1} |c_m|^2`
/// of the scanned pattern for the given fixed phases.
///
/// The pattern is a trigonometric polynomial of degree `N-1` in `delta1`, so
/// `2N` equally spaced samples give its coefficients exactly.
pub fn spurious_energy(engine: &AnalyticEngine, src: &SourceArray, fixed: &[f64]) -> Result<f64> {
    let n = src.n_sources();
    let k = 2 * n;
    let mut phases = Vec::with_capacity(n);
    phases.push(0.0);
    phases.extend_from_slice(fixed);
    let mut samples = Vec::with_capacity(k);
    for i in 0..k {
        phases[0] = TAU * i as f64 / k as f64;
        samples.push(engine.evaluate(src, &phases)?);
    }
    let mut total = 0.0;
    let mut outside = 0.0;
    let mut dc = 0.0;
    for m in 0..=n {
        let c: Complex64 = samples
            .iter()
            .enumerate()
            .map(|(i, &g)| g * Complex64::from_polar(1.0, -(m as f64) * TAU * i as f64 / k as f64))
            .sum::<Complex64>()
            / k as f64;
        let e = c.norm_sqr();
        if m == 0 {
            dc = e;
        } else {
            total += e;
        }
        if m != 0 && m != n - 1 {
            outside += e;
        }
    }
    // a flat pattern carries no fringe at all and counts as fully spurious
    Ok(if total > 1e-24 * dc {
        outside / total
    } else {
        1.0
    })
}

/// Canonical representative of a fixed-phase set under common shifts,
/// reflection `delta -> -delta` and detector relabelling: the
/// lexicographically smallest sorted tuple in `[0, 2 pi)` with a zero entry.
pub fn canonicalize(phases: &[f64]) -> Vec<f64> {
    const SNAP: f64 = 1e-9;
    let mut best: Option<Vec<f64>> = None;
    for &sign in &[1.0, -1.0] {
        for anchor in phases {
            let mut cand: Vec<f64> = phases
                .iter()
                .map(|p| {
                    let w = wrap_phase(sign * (p - anchor));
                    if TAU - w < SNAP || w < SNAP {
                        0.0
                    } else {
                        w
                    }
                })
                .collect();
            cand.sort_by(f64::total_cmp);
            let better = match &best {
                None => true,
                Some(b) => cand
                    .iter()
                    .zip(b)
                    .find(|(x, y)| (*x - *y).abs() > SNAP)
                    .is_some_and(|(x, y)| x < y),
            };
            if better {
                best = Some(cand);
            }
        }
    }
    best.unwrap_or_default()
}

pub(crate) fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    f: &mut F,
    start: &[f64],
    step: f64,
    max_iter: usize,
) -> (Vec<f64>, f64) {
    let dim = start.len();
    let mut simplex: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..dim {
        let mut p = start.to_vec();
        p[i] += step;
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    for _ in 0..max_iter {
        let mut order: Vec<usize> = (0..=dim).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        let size = simplex[1..]
            .iter()
            .map(|p| {
                p.iter()
                    .zip(&simplex[0])
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        if size < 1e-11 || values[dim] - values[0] < 1e-22 {
            break;
        }

        let centroid: Vec<f64> = (0..dim)
            .map(|k| simplex[..dim].iter().map(|p| p[k]).sum::<f64>() / dim as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[dim])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let reflected = along(-1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[dim] = expanded;
                values[dim] = fe;
            } else {
                simplex[dim] = reflected;
                values[dim] = fr;
            }
        } else if fr < values[dim - 1] {
            simplex[dim] = reflected;
            values[dim] = fr;
        } else {
            let contracted = if fr < values[dim] {
                along(-0.5)
            } else {
                along(0.5)
            };
            let fc = f(&contracted);
            if fc < values[dim].min(fr) {
                simplex[dim] = contracted;
                values[dim] = fc;
            } else {
                for i in 1..=dim {
                    let shrunk: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(p, b)| b + 0.5 * (p - b))
                        .collect();
                    values[i] = f(&shrunk);
                    simplex[i] = shrunk;
                }
            }
        }
    }
    let best = (0..=dim)
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    (simplex[best].clone(), values[best])
}

/// Searches the torus of fixed-detector phases (with `delta_2 = 0`) for the
/// arrangement with the least spurious harmonic energy, using the kind of
/// `src` to pick the engine.
pub fn magic_search(src: &SourceArray) -> Result<MagicSearchResult> {
    magic_search_with(src, &AnalyticEngine::default())
}

pub fn magic_search_with(src: &SourceArray, engine: &AnalyticEngine) -> Result<MagicSearchResult> {
    let n = src.n_sources();
    let dims = n - 2;
    let evaluations = Cell::new(0usize);
    // validates order and kind once; later evaluations cannot fail
    let mut objective = |free: &[f64]| -> f64 {
        evaluations.set(evaluations.get() + 1);
        let mut fixed = Vec::with_capacity(free.len() + 1);
        fixed.push(0.0);
        fixed.extend_from_slice(free);
        spurious_energy(engine, src, &fixed).unwrap_or(f64::INFINITY)
    };
    spurious_energy(engine, src, &vec![0.0; n - 1])?;

    if dims == 0 {
        let purity = objective(&[]);
        return Ok(MagicSearchResult {
            phases: vec![0.0],
            purity,
            evaluations: evaluations.get(),
        });
    }

    let per_axis = (GRID_BUDGET.powf(1.0 / dims as f64).floor() as usize)
        .clamp(MIN_GRID_PER_AXIS, MAX_GRID_PER_AXIS);
    let step = TAU / per_axis as f64;
    let total = per_axis.pow(dims as u32);
    let mut coarse: Vec<(f64, Vec<f64>)> = Vec::with_capacity(total);
    let mut point = vec![0.0; dims];
    for idx in 0..total {
        let mut rest = idx;
        for p in point.iter_mut() {
            *p = (rest % per_axis) as f64 * step;
            rest /= per_axis;
        }
        coarse.push((objective(&point), point.clone()));
    }
    coarse.sort_by(|a, b| {
        a.0.total_cmp(&b.0).then_with(|| {
            a.1.iter()
                .zip(&b.1)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });

    let mut best: Option<(Vec<f64>, f64)> = None;
    for (_, start) in coarse.iter().take(REFINED_STARTS) {
        let (x, fx) = nelder_mead(&mut objective, start, step / 2.0, 4000 * dims);
        if best.as_ref().is_none_or(|(_, fb)| fx < *fb) {
            best = Some((x, fx));
        }
    }
    let (free, _) = best.expect("at least one refinement start");
    let mut fixed = vec![0.0];
    fixed.extend(free);
    let phases = canonicalize(&fixed);
    let purity = spurious_energy(engine, src, &phases)?;
    if purity < PURITY_THRESHOLD {
        Ok(MagicSearchResult {
            phases,
            purity,
            evaluations: evaluations.get(),
        })
    } else {
        Err(Error::SearchFailed { phases, purity })
    }
}
