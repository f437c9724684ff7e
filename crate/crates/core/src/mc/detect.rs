//! Semiclassical click model: Poissonian thinning of the classical intensity.

use rand::Rng;
use serde::Serialize;

use super::params::ExperimentParams;
use super::speckle::SpeckleRealization;

/// Click probabilities above this value put the estimator in its biased regime.
pub const SATURATION_PROBABILITY: f64 = 0.5;

/// Per-detector paralyzable dead-time counters, in windows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeadTimeState {
    blind_for: Vec<u64>,
    dead_windows: u64,
}

impl DeadTimeState {
    pub fn new(n_detectors: usize, params: &ExperimentParams) -> Self {
        DeadTimeState {
            blind_for: vec![0; n_detectors],
            dead_windows: params.dead_windows(),
        }
    }

    /// Applies dead time to the raw photon arrivals of one window and
    /// returns whether the detector registers a click.
    #[inline]
    fn gate(&mut self, j: usize, photon: bool) -> bool {
        if self.dead_windows == 0 {
            return photon;
        }
        let blind = self.blind_for[j] > 0;
        if blind {
            self.blind_for[j] -= 1;
        }
        if photon {
            // paralyzable: every arrival restarts the dead period
            self.blind_for[j] = self.dead_windows;
        }
        photon && !blind
    }
}

/// Outcome of one detection window.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Detection {
    pub clicks: Vec<bool>,
    /// Some detector's click probability exceeded [`SATURATION_PROBABILITY`].
    pub saturated: bool,
}

/// `p_j = 1 - exp(-eta r w I_j / <I>)` for intensities with mean `mean_intensity`.
pub fn click_probabilities(
    intensities: &[f64],
    mean_intensity: f64,
    params: &ExperimentParams,
) -> Vec<f64> {
    let mut out = vec![0.0; intensities.len()];
    fill_click_probabilities(intensities, mean_intensity, params, &mut out);
    out
}

#[inline]
pub(crate) fn fill_click_probabilities(
    intensities: &[f64],
    mean_intensity: f64,
    params: &ExperimentParams,
    out: &mut [f64],
) {
    let scale = params.mean_photons_per_window() / mean_intensity;
    for (p, &i) in out.iter_mut().zip(intensities) {
        *p = -(-scale * i).exp_m1();
    }
}

/// Samples one detection window for a speckle realization whose sources
/// have unit mean intensity.
pub fn sample_detections<R: Rng>(
    real: &SpeckleRealization,
    params: &ExperimentParams,
    dead: &mut DeadTimeState,
    rng: &mut R,
) -> Detection {
    let mean = real.amplitudes.len() as f64;
    let probs = click_probabilities(&real.intensities, mean, params);
    let saturated = probs.iter().any(|&p| p > SATURATION_PROBABILITY);
    let clicks = probs
        .iter()
        .enumerate()
        .map(|(j, &p)| {
            let photon = rng.random::<f64>() < p;
            dead.gate(j, photon)
        })
        .collect();
    Detection { clicks, saturated }
}

/// Fast path used by the estimator: writes clicks into `clicks` and returns
/// whether every detector fired.
#[inline]
pub(crate) fn sample_into<R: Rng>(
    probs: &[f64],
    dead: &mut DeadTimeState,
    rng: &mut R,
    clicks: &mut [bool],
) -> bool {
    let mut all = true;
    for (j, &p) in probs.iter().enumerate() {
        let photon = rng.random::<f64>() < p;
        let c = dead.gate(j, photon);
        clicks[j] = c;
        all &= c;
    }
    all
}
