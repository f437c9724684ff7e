//! Coincidence post-selection and the `g^(N)` rate-ratio estimator.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::detect::{fill_click_probabilities, sample_into, DeadTimeState, SATURATION_PROBABILITY};
use super::params::ExperimentParams;
use super::speckle::{AmplitudeSampler, CircularGaussian, FieldModel};
use crate::analytic::{check_grid, CorrelationScan};
use crate::error::{domain, Error, Result};
use crate::source::{DetectorConfig, SourceArray, SourceKind};

/// Coherence cells simulated per independent random substream.
pub const CELLS_PER_CHUNK: u64 = 1 << 14;

/// Cells shorter than this are sampled window by window.
const STEPWISE_CELL: u64 = 16;

/// Smallest accepted number of windows per estimate.
pub const MIN_WINDOWS: u64 = 1000;

/// Raw counts for one grid point plus the derived estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoincidenceTally {
    pub singles: Vec<u64>,
    pub coincidences: u64,
    pub windows_simulated: u64,
    /// Cells in which some click probability exceeded one half.
    pub saturated_cells: u64,
    pub g_estimate: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Counts {
    singles: Vec<u64>,
    coincidences: u64,
    windows: u64,
    saturated_cells: u64,
}

impl Counts {
    fn new(n: usize) -> Self {
        Counts {
            singles: vec![0; n],
            ..Default::default()
        }
    }

    fn merge(&mut self, other: &Counts) {
        for (a, b) in self.singles.iter_mut().zip(&other.singles) {
            *a += b;
        }
        self.coincidences += other.coincidences;
        self.windows += other.windows;
        self.saturated_cells += other.saturated_cells;
    }

    /// `g = (C/W) / prod_j (S_j/W)`; the relative variance is taken as
    /// `1/C + sum_j 1/S_j` (independent Poisson counts).
    fn finish(self) -> Result<CoincidenceTally> {
        if let Some(j) = self.singles.iter().position(|&s| s == 0) {
            return Err(Error::InsufficientStatistics(format!(
                "detector {} recorded no clicks in {} windows",
                j + 1,
                self.windows
            )));
        }
        let w = self.windows as f64;
        let ratio = |c: f64| {
            self.singles
                .iter()
                .fold(c / w, |acc, &s| acc / (s as f64 / w))
        };
        let g = ratio(self.coincidences as f64);
        let singles_var: f64 = self.singles.iter().map(|&s| 1.0 / s as f64).sum();
        let std_error = if self.coincidences == 0 {
            // one count's worth of g as the floor
            ratio(1.0) * (1.0 + singles_var).sqrt()
        } else {
            g * (1.0 / self.coincidences as f64 + singles_var).sqrt()
        };
        Ok(CoincidenceTally {
            singles: self.singles,
            coincidences: self.coincidences,
            windows_simulated: self.windows,
            saturated_cells: self.saturated_cells,
            g_estimate: g,
            std_error,
        })
    }
}

fn substream(seed: u64, point: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((point << 32) | (chunk & 0xffff_ffff));
    rng
}

/// Detector fields drawn through the covariance factor of a [`FieldModel`].
struct CellSampler {
    n: usize,
    factor: Vec<Complex64>,
    mean_intensity: f64,
}

impl CellSampler {
    fn new(model: &FieldModel) -> Self {
        CellSampler {
            n: model.n_detectors(),
            factor: model.covariance_factor(),
            mean_intensity: model.mean_intensity(),
        }
    }

    #[inline]
    fn fill<R: rand::Rng>(
        &self,
        sampler: &mut CircularGaussian<R>,
        z: &mut [Complex64],
        intensities: &mut [f64],
    ) {
        for v in z.iter_mut() {
            *v = sampler.sample();
        }
        for (j, out) in intensities.iter_mut().enumerate() {
            let row = &self.factor[j * self.n..(j + 1) * self.n];
            let field: Complex64 = row.iter().zip(z.iter()).map(|(l, v)| l * v).sum();
            *out = field.norm_sqr();
        }
    }
}

/// Windows `< len` in which a Bernoulli(`p`) detector fires, drawn by
/// geometric skips between clicks.
fn click_windows<R: rand::Rng>(p: f64, len: u64, rng: &mut R, out: &mut Vec<u64>) {
    out.clear();
    if p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        out.extend(0..len);
        return;
    }
    let log_q = (-p).ln_1p();
    let mut at = 0u64;
    loop {
        let u: f64 = rng.random();
        let gap = ((1.0 - u).ln() / log_q).floor();
        if gap >= (len - at) as f64 {
            return;
        }
        at += gap as u64;
        out.push(at);
        at += 1;
        if at >= len {
            return;
        }
    }
}

/// Windows present in every sorted list.
fn common_windows(lists: &[Vec<u64>]) -> u64 {
    let (first, rest) = lists.split_first().expect("at least one detector");
    let mut cursors = vec![0usize; rest.len()];
    let mut count = 0;
    'outer: for &w in first {
        for (list, c) in rest.iter().zip(cursors.iter_mut()) {
            while *c < list.len() && list[*c] < w {
                *c += 1;
            }
            if *c == list.len() {
                break 'outer;
            }
            if list[*c] != w {
                continue 'outer;
            }
        }
        count += 1;
    }
    count
}

fn simulate_chunk(
    cells: &CellSampler,
    params: &ExperimentParams,
    point: u64,
    chunk: u64,
) -> Counts {
    let n = cells.n;
    let mut sampler = CircularGaussian(substream(params.rng_seed, point, chunk));
    let mut dead = DeadTimeState::new(n, params);
    // dead time couples consecutive windows, and short cells gain nothing
    // from skipping; both walk the windows one by one
    let stepwise = params.dead_windows() > 0 || params.windows_per_cell < STEPWISE_CELL;
    let mut counts = Counts::new(n);

    let per_cell = params.windows_per_cell;
    let first_window = chunk * CELLS_PER_CHUNK * per_cell;
    let end_window = (first_window + CELLS_PER_CHUNK * per_cell).min(params.n_windows);

    let mut z = vec![Complex64::new(0.0, 0.0); n];
    let mut intensities = vec![0.0; n];
    let mut clicks = vec![false; n];
    let mut probs = vec![0.0; n];
    let mut lists = vec![Vec::new(); n];

    let mut window = first_window;
    while window < end_window {
        cells.fill(&mut sampler, &mut z, &mut intensities);
        fill_click_probabilities(&intensities, cells.mean_intensity, params, &mut probs);
        if probs.iter().any(|&p| p > SATURATION_PROBABILITY) {
            counts.saturated_cells += 1;
        }
        let cell_end = (window + per_cell).min(end_window);
        if stepwise {
            while window < cell_end {
                if sample_into(&probs, &mut dead, &mut sampler.0, &mut clicks) {
                    counts.coincidences += 1;
                }
                for (s, &c) in counts.singles.iter_mut().zip(&clicks) {
                    *s += c as u64;
                }
                window += 1;
            }
        } else {
            for (j, list) in lists.iter_mut().enumerate() {
                click_windows(probs[j], cell_end - window, &mut sampler.0, list);
                counts.singles[j] += list.len() as u64;
            }
            counts.coincidences += common_windows(&lists);
            window = cell_end;
        }
    }
    counts.windows = end_window - first_window;
    counts
}

fn n_chunks(params: &ExperimentParams) -> u64 {
    let cells = params.n_windows.div_ceil(params.windows_per_cell);
    cells.div_ceil(CELLS_PER_CHUNK)
}

fn check_inputs(src: &SourceArray, cfg: &DetectorConfig, params: &ExperimentParams) -> Result<()> {
    if src.kind() != SourceKind::Tls {
        return Err(domain(
            "Monte Carlo coincidence simulation models thermal sources only",
        ));
    }
    cfg.check_matches(src)?;
    params.validate()?;
    if params.n_windows < MIN_WINDOWS {
        return Err(domain(format!(
            "need at least {MIN_WINDOWS} windows per estimate, got {}",
            params.n_windows
        )));
    }
    Ok(())
}

/// Tallies for every grid point. Work is split into (point, chunk) units,
/// each with its own substream keyed by `rng_seed`, so results do not depend
/// on scheduling or thread count.
fn simulate_points(
    src: &SourceArray,
    cfg: &DetectorConfig,
    grid: &[f64],
    params: &ExperimentParams,
) -> Vec<Counts> {
    let models: Vec<CellSampler> = grid
        .iter()
        .map(|&d1| CellSampler::new(&FieldModel::new(src, &cfg.phases_at(d1))))
        .collect();
    let chunks = n_chunks(params);
    let units: Vec<(usize, u64)> = (0..grid.len())
        .flat_map(|p| (0..chunks).map(move |c| (p, c)))
        .collect();
    let partial: Vec<Counts> = units
        .par_iter()
        .map(|&(p, c)| simulate_chunk(&models[p], params, p as u64, c))
        .collect();
    let mut totals = vec![Counts::new(cfg.len()); grid.len()];
    for (&(p, _), counts) in units.iter().zip(&partial) {
        totals[p].merge(counts);
    }
    totals
}

/// Estimates `g^(N)` at one scanned-detector phase.
pub fn estimate_g(
    src: &SourceArray,
    cfg: &DetectorConfig,
    delta1: f64,
    params: &ExperimentParams,
) -> Result<CoincidenceTally> {
    check_inputs(src, cfg, params)?;
    simulate_points(src, cfg, &[delta1], params)
        .pop()
        .expect("one grid point")
        .finish()
}

/// Monte Carlo scan with per-point standard errors, plus the raw tallies.
pub fn mc_scan_detailed(
    src: &SourceArray,
    cfg: &DetectorConfig,
    grid: &[f64],
    params: &ExperimentParams,
) -> Result<(CorrelationScan, Vec<CoincidenceTally>)> {
    check_inputs(src, cfg, params)?;
    check_grid(grid)?;
    let tallies = simulate_points(src, cfg, grid, params)
        .into_iter()
        .map(Counts::finish)
        .collect::<Result<Vec<_>>>()?;
    let values = tallies.iter().map(|t| t.g_estimate).collect();
    let errors = tallies.iter().map(|t| t.std_error).collect();
    let scan = CorrelationScan::new(
        grid.to_vec(),
        values,
        Some(errors),
        src.clone(),
        cfg.clone(),
    )?;
    Ok((scan, tallies))
}

pub fn mc_scan(
    src: &SourceArray,
    cfg: &DetectorConfig,
    grid: &[f64],
    params: &ExperimentParams,
) -> Result<CorrelationScan> {
    mc_scan_detailed(src, cfg, grid, params).map(|(scan, _)| scan)
}
