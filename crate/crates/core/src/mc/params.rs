use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Operating point of the simulated coincidence experiment. Times in
/// seconds, rates in Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentParams {
    pub coherence_time: f64,
    /// Joint detection window.
    pub window: f64,
    /// Singles rate of a detector seeing the mean intensity.
    pub singles_rate: f64,
    /// Total number of detection windows simulated per grid point.
    pub n_windows: u64,
    /// Consecutive windows that share one speckle realization.
    pub windows_per_cell: u64,
    pub detector_efficiency: f64,
    /// Paralyzable dead time; zero disables it, infinity allows one click per stream.
    pub dead_time: f64,
    pub rng_seed: u64,
}

/// Joint detection window used for `n`-fold coincidences in the reference setup.
pub fn default_window(n: usize) -> f64 {
    match n {
        0..=2 => 50e-9,
        3 | 4 => 410e-9,
        _ => 850e-9,
    }
}

impl ExperimentParams {
    /// Reference operating point for an `n`-fold measurement: 100 us
    /// coherence time, 200 kHz singles, ideal detectors, one window per cell.
    pub fn for_order(n: usize) -> Self {
        ExperimentParams {
            coherence_time: 100e-6,
            window: default_window(n),
            singles_rate: 200e3,
            n_windows: 1_000_000,
            windows_per_cell: 1,
            detector_efficiency: 1.0,
            dead_time: 0.0,
            rng_seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(domain(format!("{name} must be positive, got {v}")))
            }
        };
        positive("coherence_time", self.coherence_time)?;
        positive("window", self.window)?;
        positive("singles_rate", self.singles_rate)?;
        if !(self.detector_efficiency > 0.0 && self.detector_efficiency <= 1.0) {
            return Err(domain(format!(
                "detector efficiency must lie in (0, 1], got {}",
                self.detector_efficiency
            )));
        }
        if !(self.dead_time >= 0.0) {
            return Err(domain(format!(
                "dead time must be non-negative, got {}",
                self.dead_time
            )));
        }
        if self.n_windows == 0 || self.windows_per_cell == 0 {
            return Err(domain("window counts must be positive"));
        }
        if self.windows_per_cell as f64 * self.window > self.coherence_time {
            return Err(domain(format!(
                "{} windows of {} s do not fit in one coherence time of {} s",
                self.windows_per_cell, self.window, self.coherence_time
            )));
        }
        Ok(())
    }

    /// Expected clicks per window at unit (mean) intensity, `eta r w`.
    pub fn mean_photons_per_window(&self) -> f64 {
        self.detector_efficiency * self.singles_rate * self.window
    }

    /// Windows a detector stays blind after a click.
    pub fn dead_windows(&self) -> u64 {
        if self.dead_time == 0.0 {
            0
        } else if self.dead_time.is_infinite() {
            u64::MAX
        } else {
            (self.dead_time / self.window).ceil() as u64
        }
    }
}
