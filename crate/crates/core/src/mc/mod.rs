//! Monte Carlo reproduction of the coincidence experiment with
//! pseudo-thermal sources.

mod detect;
mod estimate;
mod params;
mod speckle;

pub use detect::{
    click_probabilities, sample_detections, DeadTimeState, Detection, SATURATION_PROBABILITY,
};
pub use estimate::{
    estimate_g, mc_scan, mc_scan_detailed, CoincidenceTally, CELLS_PER_CHUNK, MIN_WINDOWS,
};
pub use params::{default_window, ExperimentParams};
pub use speckle::{
    draw_realization, AmplitudeSampler, CircularGaussian, FieldModel, SpeckleRealization,
    UnitAmplitudes,
};
