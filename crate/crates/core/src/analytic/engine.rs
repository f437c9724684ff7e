use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use super::coherence::coherence_from_phases;
use super::scan::{check_grid, CorrelationScan};
use crate::error::{domain, Error, Result};
use crate::permanent::permanent;
use crate::source::{DetectorConfig, SourceArray, SourceKind};

/// Default largest order evaluated by the permanent-based engines.
pub const DEFAULT_PERMANENT_CUTOFF: usize = 10;

/// Closed-form evaluation of `g^(N)` through matrix permanents.
///
/// Thermal arrays reduce to `perm(J)` of the coherence matrix (Gaussian
/// moment theorem). Single-photon arrays reduce to `|perm(U)|^2 / N^N` with
/// `U_{j alpha} = exp(i alpha delta_j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyticEngine {
    pub cutoff: usize,
}

impl Default for AnalyticEngine {
    fn default() -> Self {
        AnalyticEngine {
            cutoff: DEFAULT_PERMANENT_CUTOFF,
        }
    }
}

impl AnalyticEngine {
    pub fn with_cutoff(cutoff: usize) -> Self {
        AnalyticEngine { cutoff }
    }

    fn check_order(&self, n: usize) -> Result<()> {
        if n > self.cutoff {
            return Err(Error::Capacity {
                what: "permanent cutoff",
                order: n,
                limit: self.cutoff,
            });
        }
        Ok(())
    }

    /// `g^(N)` at an explicit phase tuple, one phase per detector.
    pub fn evaluate(&self, src: &SourceArray, phases: &[f64]) -> Result<f64> {
        if phases.len() != src.n_sources() {
            return Err(domain(format!(
                "{} phases for {} sources",
                phases.len(),
                src.n_sources()
            )));
        }
        self.check_order(phases.len())?;
        match src.kind() {
            SourceKind::Tls => Ok(tls_permanent(src, phases)),
            SourceKind::Spe => {
                if src.slit_width() != 0.0 {
                    return Err(domain(
                        "single-photon emitters must be point-like (slit width 0)",
                    ));
                }
                Ok(spe_permanent(phases))
            }
        }
    }

    pub fn g_tls(&self, src: &SourceArray, cfg: &DetectorConfig, delta1: f64) -> Result<f64> {
        if src.kind() != SourceKind::Tls {
            return Err(domain("g_tls called for a non-thermal source array"));
        }
        cfg.check_matches(src)?;
        self.evaluate(src, &cfg.phases_at(delta1))
    }

    pub fn g_spe(&self, src: &SourceArray, cfg: &DetectorConfig, delta1: f64) -> Result<f64> {
        if src.kind() != SourceKind::Spe {
            return Err(domain("g_spe called for a non single-photon source array"));
        }
        cfg.check_matches(src)?;
        self.evaluate(src, &cfg.phases_at(delta1))
    }

    /// Evaluates the engine matching `src.kind()` at every grid point.
    pub fn scan(
        &self,
        src: &SourceArray,
        cfg: &DetectorConfig,
        grid: &[f64],
    ) -> Result<CorrelationScan> {
        check_grid(grid)?;
        cfg.check_matches(src)?;
        let values = grid
            .par_iter()
            .map(|&d1| self.evaluate(src, &cfg.phases_at(d1)))
            .collect::<Result<Vec<_>>>()?;
        CorrelationScan::new(grid.to_vec(), values, None, src.clone(), cfg.clone())
    }
}

fn tls_permanent(src: &SourceArray, phases: &[f64]) -> f64 {
    let j = coherence_from_phases(src, phases);
    permanent(&j.entries).re
}

fn spe_permanent(phases: &[f64]) -> f64 {
    let n = phases.len();
    let u = DMatrix::from_fn(n, n, |j, alpha| {
        Complex64::from_polar(1.0, alpha as f64 * phases[j])
    });
    permanent(&u).norm_sqr() / (n as f64).powi(n as i32)
}

pub fn g_tls(src: &SourceArray, cfg: &DetectorConfig, delta1: f64) -> Result<f64> {
    AnalyticEngine::default().g_tls(src, cfg, delta1)
}

pub fn g_spe(src: &SourceArray, cfg: &DetectorConfig, delta1: f64) -> Result<f64> {
    AnalyticEngine::default().g_spe(src, cfg, delta1)
}

pub fn scan(src: &SourceArray, cfg: &DetectorConfig, grid: &[f64]) -> Result<CorrelationScan> {
    AnalyticEngine::default().scan(src, cfg, grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    fn src(n: usize, kind: SourceKind) -> SourceArray {
        SourceArray::new(n, 1.0, 1.0, kind).unwrap()
    }

    #[test]
    fn tls_golden_values() {
        let s2 = src(2, SourceKind::Tls);
        let c2 = DetectorConfig::with_fixed(&[0.0]).unwrap();
        assert!((g_tls(&s2, &c2, 0.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((g_tls(&s2, &c2, PI).unwrap() - 1.0).abs() < 1e-14);
        let s3 = src(3, SourceKind::Tls);
        let c3 = DetectorConfig::with_fixed(&[0.0, PI]).unwrap();
        assert!((g_tls(&s3, &c3, 0.0).unwrap() - 22.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn spe_golden_values() {
        let s2 = src(2, SourceKind::Spe);
        let c2 = DetectorConfig::with_fixed(&[0.0]).unwrap();
        assert!((g_spe(&s2, &c2, 0.0).unwrap() - 1.0).abs() < 1e-14);
        assert!(g_spe(&s2, &c2, PI).unwrap().abs() < 1e-14);
        let s3 = src(3, SourceKind::Spe);
        let c3 = DetectorConfig::with_fixed(&[FRAC_PI_4, 7.0 * FRAC_PI_4]).unwrap();
        assert!((g_spe(&s3, &c3, 0.0).unwrap() - 8.0 / 27.0).abs() < 1e-14);
        assert!(g_spe(&s3, &c3, FRAC_PI_2).unwrap().abs() < 1e-14);
    }

    #[test]
    fn scan_examples() {
        let s2 = src(2, SourceKind::Tls);
        let c2 = DetectorConfig::with_fixed(&[0.0]).unwrap();
        let sc = scan(&s2, &c2, &[0.0, FRAC_PI_2, PI]).unwrap();
        for (v, e) in sc.values().iter().zip([2.0, 1.5, 1.0]) {
            assert!((v - e).abs() < 1e-14);
        }
        let s3 = src(3, SourceKind::Tls);
        let c3 = DetectorConfig::with_fixed(&[0.0, PI]).unwrap();
        let sc = scan(&s3, &c3, &[0.0, FRAC_PI_2, PI]).unwrap();
        for (v, e) in sc
            .values()
            .iter()
            .zip([22.0 / 9.0, 34.0 / 27.0, 22.0 / 9.0])
        {
            assert!((v - e).abs() < 1e-14);
        }
        let p2 = src(2, SourceKind::Spe);
        let sc = scan(&p2, &c2, &[0.0, PI]).unwrap();
        assert!((sc.values()[0] - 1.0).abs() < 1e-14 && sc.values()[1].abs() < 1e-14);
        assert!(scan(&s2, &c2, &[1.0, 0.0]).is_err());
        assert!(scan(&s2, &c2, &[]).is_err());
    }

    #[test]
    fn capacity_and_kind_errors() {
        let big = src(11, SourceKind::Tls);
        let cfg = DetectorConfig::with_fixed(&[0.0; 10]).unwrap();
        assert!(matches!(
            g_tls(&big, &cfg, 0.0),
            Err(Error::Capacity { .. })
        ));
        let ten = src(10, SourceKind::Tls);
        let cfg10 = DetectorConfig::with_fixed(&[0.0; 9]).unwrap();
        assert!(g_tls(&ten, &cfg10, 0.0).is_ok());
        let s2 = src(2, SourceKind::Tls);
        let c2 = DetectorConfig::with_fixed(&[0.0]).unwrap();
        assert!(g_spe(&s2, &c2, 0.0).is_err());
        let wide = src(2, SourceKind::Spe).with_slit_width(0.1).unwrap();
        assert!(g_spe(&wide, &c2, 0.0).is_err());
        let c3 = DetectorConfig::with_fixed(&[0.0, 1.0]).unwrap();
        assert!(g_tls(&s2, &c3, 0.0).is_err());
    }

    #[test]
    fn all_equal_phases_give_factorial_bunching() {
        // perm of the all-ones matrix
        let s4 = src(4, SourceKind::Tls);
        let cfg = DetectorConfig::with_fixed(&[0.2; 3]).unwrap();
        assert!((g_tls(&s4, &cfg, 0.2).unwrap() - 24.0).abs() < 1e-12);
    }
}
