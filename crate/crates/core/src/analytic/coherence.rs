use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{domain, Result};
use crate::source::{DetectorConfig, SourceArray, SourceKind};

/// `sin(x)/x` with `sinc(0) = 1`.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Far-field coherence envelope of a uniformly lit slit for a phase
/// difference `dphi` between two detectors.
pub fn slit_envelope(dphi: f64, width_ratio: f64) -> f64 {
    if width_ratio == 0.0 {
        1.0
    } else {
        sinc(dphi * width_ratio / 2.0)
    }
}

/// Normalized mutual coherence between every pair of detectors.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceMatrix {
    pub entries: DMatrix<Complex64>,
    pub envelope: DMatrix<f64>,
}

impl CoherenceMatrix {
    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    pub fn max_hermitian_defect(&self) -> f64 {
        let n = self.order();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the symmetrized matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        let sym = (&self.entries + self.entries.adjoint()) * Complex64::new(0.5, 0.0);
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Coherence matrix of the thermal array with the scanned detector at `delta1`.
///
/// `J_ij = env(delta_i - delta_j) * (1/N) sum_alpha exp(i alpha (delta_i - delta_j))`.
pub fn coherence_matrix(
    src: &SourceArray,
    cfg: &DetectorConfig,
    delta1: f64,
) -> Result<CoherenceMatrix> {
    if src.kind() != SourceKind::Tls {
        return Err(domain(
            "coherence matrix route applies to thermal sources only",
        ));
    }
    cfg.check_matches(src)?;
    Ok(coherence_from_phases(src, &cfg.phases_at(delta1)))
}

pub(crate) fn coherence_from_phases(src: &SourceArray, phases: &[f64]) -> CoherenceMatrix {
    let n = phases.len();
    let n_src = src.n_sources();
    let ratio = src.width_ratio();
    let envelope = DMatrix::from_fn(n, n, |i, j| slit_envelope(phases[i] - phases[j], ratio));
    let entries = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            return Complex64::new(1.0, 0.0);
        }
        let dphi = phases[i] - phases[j];
        let sum: Complex64 = (0..n_src)
            .map(|alpha| Complex64::from_polar(1.0, alpha as f64 * dphi))
            .sum();
        sum * (envelope[(i, j)] / n_src as f64)
    });
    CoherenceMatrix { entries, envelope }
}
