//! Fixtures shared by the benchmarks.

use gncorr_core::{DetectorConfig, SourceArray, SourceKind};
use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense unimodular matrix with incommensurate phases, so no entries cancel
/// by symmetry.
pub fn phase_matrix(n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| {
        Complex64::from_polar(1.0, 0.37 * (i * j) as f64 + 0.11 * i as f64)
    })
}

/// The measured grating (250 um spacing, 25 um slits, 532 nm) with magic detectors.
pub fn grating(n: usize) -> (SourceArray, DetectorConfig) {
    let src = SourceArray::new(n, 250e-6, 532e-9, SourceKind::Tls)
        .and_then(|s| s.with_slit_width(25e-6))
        .expect("valid grating");
    let cfg = DetectorConfig::magic(&src, 0.0).expect("magic positions exist");
    (src, cfg)
}
