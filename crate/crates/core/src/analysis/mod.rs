//! Post-processing of correlation scans: fringe fits, peak counting,
//! magic-position search, spacing recovery and resolution reports.

mod fit;
pub(crate) mod magic;
mod peaks;
mod report;
mod spacing;

pub use fit::{fit_harmonic, fit_noon, FitResult, MIN_POINTS_PER_PERIOD};
pub use magic::{
    canonicalize, magic_search, magic_search_with, spurious_energy, MagicSearchResult,
    PURITY_THRESHOLD,
};
pub use peaks::{count_peaks, find_peaks, MIN_POINTS_PER_PEAK, MIN_PROMINENCE};
pub use report::{resolution_report, resolution_report_in_window, DEFAULT_MAX_HARMONIC};
pub use spacing::{
    fit_slit_geometry, recover_spacing, AngleScan, GeometryFit, SpacingEstimate, MAX_PAIR_SPREAD,
};
