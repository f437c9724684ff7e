//! Pseudo-thermal field synthesis for one coherence cell.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{domain, Result};
use crate::source::{DetectorConfig, SourceArray, SourceKind};

/// Source of unit-mean-intensity complex amplitudes.
pub trait AmplitudeSampler {
    fn sample(&mut self) -> Complex64;
}

/// Circular complex Gaussian amplitudes with `<|a|^2> = 1`.
#[derive(Debug, Clone)]
pub struct CircularGaussian<R>(pub R);

impl<R: Rng> AmplitudeSampler for CircularGaussian<R> {
    #[inline]
    fn sample(&mut self) -> Complex64 {
        let re: f64 = self.0.sample(StandardNormal);
        let im: f64 = self.0.sample(StandardNormal);
        Complex64::new(re * FRAC_1_SQRT_2, im * FRAC_1_SQRT_2)
    }
}

/// Every amplitude equal to one: a fully coherent, deterministic field.
#[derive(Debug, Clone, Copy, Default)]
pub struct UnitAmplitudes;

impl AmplitudeSampler for UnitAmplitudes {
    fn sample(&mut self) -> Complex64 {
        Complex64::new(1.0, 0.0)
    }
}

/// One coherence-cell snapshot of the field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeckleRealization {
    /// Net amplitude of each source (sum over its sub-sources).
    pub amplitudes: Vec<Complex64>,
    pub detector_fields: Vec<Complex64>,
    /// `|detector_fields|^2`.
    pub intensities: Vec<f64>,
}

/// Propagation factors from every (sub-)source to every detector.
///
/// A slit of width `a` is split into `M` equal cells with a point emitter at
/// each centre, each carrying mean intensity `1/M`.
#[derive(Debug, Clone)]
pub struct FieldModel {
    n_sources: usize,
    n_sub: usize,
    n_detectors: usize,
    factors: Vec<Complex64>,
}

impl FieldModel {
    pub fn new(src: &SourceArray, phases: &[f64]) -> Self {
        let n_sources = src.n_sources();
        let n_sub = if src.slit_width() == 0.0 {
            1
        } else {
            src.sub_sources_per_slit()
        };
        let ratio = src.width_ratio();
        let weight = 1.0 / (n_sub as f64).sqrt();
        let offsets: Vec<f64> = (0..n_sub)
            .map(|s| ratio * ((s as f64 + 0.5) / n_sub as f64 - 0.5))
            .collect();
        let mut factors = Vec::with_capacity(phases.len() * n_sources * n_sub);
        for &delta in phases {
            for alpha in 0..n_sources {
                for &x in &offsets {
                    factors.push(Complex64::from_polar(weight, (alpha as f64 + x) * delta));
                }
            }
        }
        FieldModel {
            n_sources,
            n_sub,
            n_detectors: phases.len(),
            factors,
        }
    }

    pub fn n_emitters(&self) -> usize {
        self.n_sources * self.n_sub
    }

    pub fn n_detectors(&self) -> usize {
        self.n_detectors
    }

    /// Mean intensity at every detector for unit-intensity sources.
    pub fn mean_intensity(&self) -> f64 {
        self.n_sources as f64
    }

    /// Factor `L` (row-major, `n_detectors` square) with `L L^dag` equal to
    /// the detector-field covariance `F F^dag`. `L z` with unit circular
    /// Gaussian `z` has the same law as the summed sub-source fields.
    pub fn covariance_factor(&self) -> Vec<Complex64> {
        let (n, k) = (self.n_detectors, self.n_emitters());
        let f = DMatrix::from_row_slice(n, k, &self.factors);
        let cov = &f * f.adjoint();
        let eig = SymmetricEigen::new(cov);
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for m in 0..n {
                out.push(eig.eigenvectors[(j, m)] * eig.eigenvalues[m].max(0.0).sqrt());
            }
        }
        out
    }

    /// Draws emitter amplitudes into `amps` and writes detector intensities.
    #[inline]
    pub(crate) fn fill<S: AmplitudeSampler>(
        &self,
        sampler: &mut S,
        amps: &mut [Complex64],
        fields: &mut [Complex64],
        intensities: &mut [f64],
    ) {
        for a in amps.iter_mut() {
            *a = sampler.sample();
        }
        let k = amps.len();
        for j in 0..self.n_detectors {
            let row = &self.factors[j * k..(j + 1) * k];
            let field: Complex64 = row.iter().zip(amps.iter()).map(|(f, a)| f * a).sum();
            fields[j] = field;
            intensities[j] = field.norm_sqr();
        }
    }

    pub fn realize<S: AmplitudeSampler>(&self, sampler: &mut S) -> SpeckleRealization {
        let mut amps = vec![Complex64::new(0.0, 0.0); self.n_emitters()];
        let mut fields = vec![Complex64::new(0.0, 0.0); self.n_detectors];
        let mut intensities = vec![0.0; self.n_detectors];
        self.fill(sampler, &mut amps, &mut fields, &mut intensities);
        let weight = 1.0 / (self.n_sub as f64).sqrt();
        let amplitudes = amps
            .chunks(self.n_sub)
            .map(|c| c.iter().sum::<Complex64>() * weight)
            .collect();
        SpeckleRealization {
            amplitudes,
            detector_fields: fields,
            intensities,
        }
    }
}

/// One speckle realization with the scanned detector at `delta1`.
pub fn draw_realization<S: AmplitudeSampler>(
    src: &SourceArray,
    cfg: &DetectorConfig,
    delta1: f64,
    sampler: &mut S,
) -> Result<SpeckleRealization> {
    if src.kind() != SourceKind::Tls {
        return Err(domain("speckle synthesis models thermal sources only"));
    }
    cfg.check_matches(src)?;
    Ok(FieldModel::new(src, &cfg.phases_at(delta1)).realize(sampler))
}
