//! Higher-order intensity correlations of emitter arrays.
//!
//! The crate evaluates the `N`-th order correlation `g^(N)` of `N` single-photon
//! or thermal emitters exactly, reproduces the coincidence experiment by Monte
//! Carlo, and extracts fringe order, emitter spacing and resolution figures
//! from the resulting scans.
// `!(x > 0.0)` style guards reject NaN as well, which is the point
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod analytic;
mod error;
pub mod geometry;
pub mod mc;
pub mod permanent;
pub mod source;

pub use analysis::{
    count_peaks, fit_noon, fit_slit_geometry, magic_search, recover_spacing, resolution_report,
    FitResult, GeometryFit, MagicSearchResult, SpacingEstimate,
};
pub use analytic::{g_spe, g_tls, scan, AnalyticEngine, CorrelationScan};
pub use error::{Error, Result};
pub use geometry::{
    abbe_limit, aperture_all_detectors, aperture_scan_detector, magic_positions_spe,
    magic_positions_tls, ResolutionReport,
};
pub use mc::{estimate_g, mc_scan, CoincidenceTally, ExperimentParams};
pub use source::{DetectorConfig, DetectorGeometry, SourceArray, SourceKind};
