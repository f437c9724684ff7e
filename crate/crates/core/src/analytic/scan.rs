use serde::Serialize;

use crate::error::{domain, Result};
use crate::source::{DetectorConfig, SourceArray};

/// Sampled `g^(N)(delta1)` over a grid of scanned-detector phases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationScan {
    deltas: Vec<f64>,
    values: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uncertainties: Option<Vec<f64>>,
    source: SourceArray,
    detectors: DetectorConfig,
}

impl CorrelationScan {
    pub fn new(
        deltas: Vec<f64>,
        values: Vec<f64>,
        uncertainties: Option<Vec<f64>>,
        source: SourceArray,
        detectors: DetectorConfig,
    ) -> Result<Self> {
        check_grid(&deltas)?;
        if values.len() != deltas.len() {
            return Err(domain(format!(
                "{} values for {} grid points",
                values.len(),
                deltas.len()
            )));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(domain("correlation values must be finite and non-negative"));
        }
        if let Some(u) = &uncertainties {
            if u.len() != deltas.len() {
                return Err(domain(format!(
                    "{} uncertainties for {} grid points",
                    u.len(),
                    deltas.len()
                )));
            }
            if u.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
                return Err(domain("uncertainties must be finite and positive"));
            }
        }
        Ok(CorrelationScan {
            deltas,
            values,
            uncertainties,
            source,
            detectors,
        })
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn uncertainties(&self) -> Option<&[f64]> {
        self.uncertainties.as_deref()
    }

    pub fn source(&self) -> &SourceArray {
        &self.source
    }

    pub fn detectors(&self) -> &DetectorConfig {
        &self.detectors
    }

    pub fn len(&self) -> usize {
        self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.deltas.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

/// Grids must be non-empty, finite and strictly increasing.
pub fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(domain("scan grid is empty"));
    }
    if grid.iter().any(|x| !x.is_finite()) {
        return Err(domain("scan grid contains non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(domain("scan grid must be strictly increasing"));
    }
    Ok(())
}

/// `points` equally spaced values from `start` to `stop` inclusive.
pub fn linspace(start: f64, stop: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![start],
        _ => {
            let step = (stop - start) / (points - 1) as f64;
            (0..points)
                .map(|i| {
                    if i == points - 1 {
                        stop
                    } else {
                        start + i as f64 * step
                    }
                })
                .collect()
        }
    }
}
