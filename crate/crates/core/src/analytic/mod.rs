//! Exact `g^(N)` for single-photon and thermal emitter arrays, with
//! brute-force oracles and harmonic analysis of scans.

mod coherence;
mod engine;
mod harmonics;
mod oracle;
mod scan;

pub use coherence::{coherence_matrix, sinc, slit_envelope, CoherenceMatrix};
pub use engine::{g_spe, g_tls, scan, AnalyticEngine, DEFAULT_PERMANENT_CUTOFF};
pub use harmonics::{harmonic_decomposition, harmonic_visibility, out_of_band_energy};
pub use oracle::{oracle_spe, oracle_tls, SPE_ORACLE_MAX, TLS_ORACLE_MAX};
pub use scan::{check_grid, linspace, CorrelationScan};
