//! Emitter-chain and detector-arrangement descriptions.
//!
//! Detector phases are the canonical coordinate: `delta_j = k d sin(theta_j)`.
//! Angles are derived from them through [`crate::geometry`]. Detector `D_1`
//! in the usual numbering is index 0 here.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{domain, Result};

/// Default number of point sub-sources used to discretize a finite slit.
pub const DEFAULT_SUB_SOURCES: usize = 64;

/// Photon statistics of every emitter in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SourceKind {
    /// Single-photon emitters, each in the Fock state |1>.
    #[serde(rename = "SPE")]
    Spe,
    /// Thermal (chaotic) light with circular Gaussian field statistics.
    #[serde(rename = "TLS")]
    Tls,
}

impl SourceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SourceKind::Spe => "SPE",
            SourceKind::Tls => "TLS",
        }
    }
}

impl std::fmt::Display for SourceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for SourceKind {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "SPE" => Ok(SourceKind::Spe),
            "TLS" => Ok(SourceKind::Tls),
            other => Err(domain(format!(
                "unknown source kind `{other}` (expected SPE or TLS)"
            ))),
        }
    }
}

/// A chain of `N` equally spaced, statistically independent emitters.
///
/// Lengths are in metres. A slit width of zero denotes ideal point sources.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SourceArray {
    n_sources: usize,
    spacing: f64,
    slit_width: f64,
    wavelength: f64,
    kind: SourceKind,
    sub_sources_per_slit: usize,
}

impl SourceArray {
    pub fn new(n_sources: usize, spacing: f64, wavelength: f64, kind: SourceKind) -> Result<Self> {
        let src = SourceArray {
            n_sources,
            spacing,
            slit_width: 0.0,
            wavelength,
            kind,
            sub_sources_per_slit: DEFAULT_SUB_SOURCES,
        };
        src.validate()?;
        Ok(src)
    }

    pub fn with_slit_width(mut self, slit_width: f64) -> Result<Self> {
        self.slit_width = slit_width;
        self.validate()?;
        Ok(self)
    }

    pub fn with_sub_sources(mut self, sub_sources_per_slit: usize) -> Result<Self> {
        self.sub_sources_per_slit = sub_sources_per_slit;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kind(mut self, kind: SourceKind) -> Self {
        self.kind = kind;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.n_sources < 2 {
            return Err(domain(format!(
                "need at least 2 sources, got {}",
                self.n_sources
            )));
        }
        if !(self.spacing.is_finite() && self.spacing > 0.0) {
            return Err(domain(format!(
                "spacing must be positive, got {}",
                self.spacing
            )));
        }
        if !(self.wavelength.is_finite() && self.wavelength > 0.0) {
            return Err(domain(format!(
                "wavelength must be positive, got {}",
                self.wavelength
            )));
        }
        if !(self.slit_width >= 0.0 && self.slit_width < self.spacing) {
            return Err(domain(format!(
                "slit width must satisfy 0 <= a < d, got a = {} with d = {}",
                self.slit_width, self.spacing
            )));
        }
        if self.sub_sources_per_slit == 0 {
            return Err(domain("sub_sources_per_slit must be positive"));
        }
        Ok(())
    }

    pub fn n_sources(&self) -> usize {
        self.n_sources
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn slit_width(&self) -> f64 {
        self.slit_width
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn kind(&self) -> SourceKind {
        self.kind
    }

    pub fn sub_sources_per_slit(&self) -> usize {
        self.sub_sources_per_slit
    }

    /// Wavenumber `k = 2 pi / lambda`.
    pub fn wavenumber(&self) -> f64 {
        TAU / self.wavelength
    }

    /// Largest reachable detector phase, `k d`.
    pub fn kd(&self) -> f64 {
        self.wavenumber() * self.spacing
    }

    /// Slit width relative to the spacing, `a / d`.
    pub fn width_ratio(&self) -> f64 {
        self.slit_width / self.spacing
    }
}

/// Physical placement of the detectors on a screen at distance `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectorGeometry {
    pub distance: f64,
    pub lateral: Vec<f64>,
}

/// Phases of the `N` detectors, one of which is scanned.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetectorConfig {
    phases: Vec<f64>,
    scan_index: usize,
    geometry: Option<DetectorGeometry>,
}

impl DetectorConfig {
    /// `scan_index` is 0-based; the scanned detector's stored phase is only a
    /// placeholder that each evaluation replaces with its own `delta1`.
    pub fn new(phases: Vec<f64>, scan_index: usize) -> Result<Self> {
        if phases.len() < 2 {
            return Err(domain("need at least two detectors"));
        }
        if scan_index >= phases.len() {
            return Err(domain(format!(
                "scan index {scan_index} out of range for {} detectors",
                phases.len()
            )));
        }
        if phases.iter().any(|p| !p.is_finite()) {
            return Err(domain("detector phases must be finite"));
        }
        Ok(DetectorConfig {
            phases,
            scan_index,
            geometry: None,
        })
    }

    /// Scanned detector first, followed by the given fixed phases.
    pub fn with_fixed(fixed: &[f64]) -> Result<Self> {
        let mut phases = Vec::with_capacity(fixed.len() + 1);
        phases.push(0.0);
        phases.extend_from_slice(fixed);
        Self::new(phases, 0)
    }

    /// Detectors on a screen at distance `distance`, at lateral offsets
    /// `lateral` from the optical axis.
    pub fn from_geometry(
        src: &SourceArray,
        distance: f64,
        lateral: Vec<f64>,
        scan_index: usize,
    ) -> Result<Self> {
        if !(distance.is_finite() && distance > 0.0) {
            return Err(domain(format!(
                "screen distance must be positive, got {distance}"
            )));
        }
        let phases = lateral
            .iter()
            .map(|&x| crate::geometry::phase_from_angle(src, x.atan2(distance)))
            .collect::<Result<Vec<_>>>()?;
        let mut cfg = Self::new(phases, scan_index)?;
        cfg.geometry = Some(DetectorGeometry { distance, lateral });
        Ok(cfg)
    }

    /// Magic arrangement for `src`, with every fixed phase shifted by `offset`.
    pub fn magic(src: &SourceArray, offset: f64) -> Result<Self> {
        let fixed = match src.kind() {
            SourceKind::Tls => crate::geometry::magic_positions_tls(src.n_sources())?,
            SourceKind::Spe => crate::geometry::magic_positions_spe(src.n_sources())?,
        };
        let shifted: Vec<f64> = fixed.iter().map(|p| p + offset).collect();
        Self::with_fixed(&shifted)
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn scan_index(&self) -> usize {
        self.scan_index
    }

    pub fn geometry(&self) -> Option<&DetectorGeometry> {
        self.geometry.as_ref()
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Phases of every detector except the scanned one, in index order.
    pub fn fixed_phases(&self) -> Vec<f64> {
        self.phases
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != self.scan_index)
            .map(|(_, &p)| p)
            .collect()
    }

    /// Full phase tuple with the scanned detector placed at `delta1`.
    pub fn phases_at(&self, delta1: f64) -> Vec<f64> {
        let mut phases = self.phases.clone();
        phases[self.scan_index] = delta1;
        phases
    }

    pub(crate) fn check_matches(&self, src: &SourceArray) -> Result<()> {
        if self.phases.len() != src.n_sources() {
            return Err(domain(format!(
                "{} detectors configured for {} sources",
                self.phases.len(),
                src.n_sources()
            )));
        }
        Ok(())
    }
}
