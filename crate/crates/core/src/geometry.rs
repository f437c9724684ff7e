//! Far-field geometry: phase/angle mapping, magic detector positions and the
//! aperture and resolution calculators used for the Abbe comparison.

use serde::Serialize;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::sync::Mutex;

use crate::error::{domain, Error, Result};
use crate::source::{DetectorConfig, SourceArray, SourceKind};

/// Relative slack when deciding whether a phase at the edge of `[-kd, kd]`
/// is reachable.
const REACH_SLACK: f64 = 1e-12;

/// Detector phase `delta = k d sin(theta)` for observation angle `theta`.
pub fn phase_from_angle(src: &SourceArray, theta: f64) -> Result<f64> {
    if !(theta.abs() <= FRAC_PI_2) {
        return Err(domain(format!(
            "angle {theta} rad lies outside [-pi/2, pi/2]"
        )));
    }
    Ok(src.kd() * theta.sin())
}

/// Inverse of [`phase_from_angle`]. Fails when `|delta| > k d`, i.e. the
/// fringe would lie beyond the physical half-circle.
pub fn angle_from_phase(src: &SourceArray, delta: f64) -> Result<f64> {
    let kd = src.kd();
    let s = delta / kd;
    if !s.is_finite() || s.abs() > 1.0 + REACH_SLACK {
        return Err(Error::UnreachablePhase { delta, kd });
    }
    Ok(s.clamp(-1.0, 1.0).asin())
}

/// Magic positions for thermal sources: `delta_j = 2 pi (j - 2)/(N - 1)` for
/// `j = 2..=N`, in `[0, 2 pi)`.
pub fn magic_positions_tls(n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(domain(format!("magic positions need N >= 2, got {n}")));
    }
    let step = TAU / (n - 1) as f64;
    Ok((0..n - 1).map(|i| i as f64 * step).collect())
}

/// Magic positions for single-photon emitters, with their provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MagicSet {
    pub phases: Vec<f64>,
    /// `true` when the phases come from the numerical search rather than a
    /// known closed form.
    pub numerical: bool,
    /// Out-of-band harmonic energy of the resulting scan.
    pub purity: f64,
}

/// Magic positions for single-photon emitters.
///
/// Closed forms are known for `N = 2` (`[0]`) and `N = 3` (`[pi/4, 7pi/4]`).
/// Larger `N` are located with [`crate::analysis::magic_search`]; if no pure
/// arrangement exists the search error (with the best candidate) is returned.
/// Successful searches are memoized for the lifetime of the process.
pub fn magic_positions_spe_detailed(n: usize) -> Result<MagicSet> {
    match n {
        0 | 1 => Err(domain(format!("magic positions need N >= 2, got {n}"))),
        2 => Ok(MagicSet {
            phases: vec![0.0],
            numerical: false,
            purity: 0.0,
        }),
        3 => Ok(MagicSet {
            phases: vec![FRAC_PI_4, 7.0 * FRAC_PI_4],
            numerical: false,
            purity: 0.0,
        }),
        _ => {
            static FOUND: Mutex<BTreeMap<usize, MagicSet>> = Mutex::new(BTreeMap::new());
            if let Some(hit) = FOUND.lock().unwrap_or_else(|e| e.into_inner()).get(&n) {
                return Ok(hit.clone());
            }
            let src = SourceArray::new(n, 1.0, 1.0, SourceKind::Spe)?;
            let found = crate::analysis::magic_search(&src)?;
            let set = MagicSet {
                phases: found.phases,
                numerical: true,
                purity: found.purity,
            };
            FOUND
                .lock()
                .unwrap_or_else(|e| e.into_inner())
                .insert(n, set.clone());
            Ok(set)
        }
    }
}

pub fn magic_positions_spe(n: usize) -> Result<Vec<f64>> {
    magic_positions_spe_detailed(n).map(|m| m.phases)
}

/// Aperture `sin[(theta_hi - theta_lo)/2]` swept by the scanned detector
/// while its phase covers `span = (lo, hi)`.
pub fn aperture_scan_detector(span: (f64, f64), src: &SourceArray) -> Result<f64> {
    let (lo, hi) = span;
    if hi < lo {
        return Err(domain(format!("phase interval [{lo}, {hi}] is reversed")));
    }
    if hi == lo {
        return Ok(0.0);
    }
    let theta_lo = angle_from_phase(src, lo)?;
    let theta_hi = angle_from_phase(src, hi)?;
    Ok(((theta_hi - theta_lo) / 2.0).sin())
}

/// Aperture `sin[(theta_N - theta_2)/2]` spanned by the fixed detectors.
///
/// Phases are used as stored. The modulo-2 pi freedom in placing the fixed
/// detectors (e.g. behind the object) is not exploited, so this is an upper
/// estimate for a given magic set.
pub fn aperture_all_detectors(cfg: &DetectorConfig, src: &SourceArray) -> Result<f64> {
    cfg.check_matches(src)?;
    let thetas = cfg
        .fixed_phases()
        .into_iter()
        .map(|p| angle_from_phase(src, p))
        .collect::<Result<Vec<_>>>()?;
    let lo = thetas.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = thetas.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(((hi - lo) / 2.0).sin())
}

fn check_aperture(aperture: f64) -> Result<()> {
    if !(aperture > 0.0 && aperture <= 1.0) {
        return Err(domain(format!(
            "aperture must lie in (0, 1], got {aperture}"
        )));
    }
    Ok(())
}

/// Classical minimal resolvable separation `lambda / (2 A)`.
pub fn abbe_limit(src: &SourceArray, aperture: f64) -> Result<f64> {
    check_aperture(aperture)?;
    Ok(src.wavelength() / (2.0 * aperture))
}

/// Error of the classical limit, `lambda / (4 A)`.
pub fn abbe_limit_error(src: &SourceArray, aperture: f64) -> Result<f64> {
    check_aperture(aperture)?;
    Ok(src.wavelength() / (4.0 * aperture))
}

/// Aperture needed to see adjacent principal maxima of the coherently
/// illuminated grating, `lambda / (2 d)`, capped at 1.
pub fn abbe_aperture(src: &SourceArray) -> f64 {
    (src.wavelength() / (2.0 * src.spacing())).min(1.0)
}

/// Slit separation from `m_peaks` fringes of an order-`n` pattern seen over
/// aperture `aperture`: returns `(d, bound)` with `d = M lambda / (2 A (N-1))`
/// and `bound = lambda / (4 A (N-1))`, valid while the peak-count error stays
/// below one half.
pub fn super_resolved_d(
    m_peaks: usize,
    aperture: f64,
    n: usize,
    wavelength: f64,
) -> Result<(f64, f64)> {
    if m_peaks < 1 {
        return Err(domain("need at least one counted peak"));
    }
    if n < 2 {
        return Err(domain(format!("order must be at least 2, got {n}")));
    }
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    check_aperture(aperture)?;
    let order = (n - 1) as f64;
    let d = m_peaks as f64 * wavelength / (2.0 * aperture * order);
    let bound = wavelength / (4.0 * aperture * order);
    Ok((d, bound))
}

/// Wrap a phase into `[0, 2 pi)`.
pub fn wrap_phase(p: f64) -> f64 {
    let w = p.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Wrap a phase into `(-pi, pi]`.
pub fn wrap_signed(p: f64) -> f64 {
    let w = wrap_phase(p);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Resolution figures of merit for one scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionReport {
    /// Aperture swept by the scanned detector over the counting window.
    pub aperture_scan: f64,
    /// Aperture spanned by the fixed detectors.
    pub aperture_all: f64,
    /// Classical limit `lambda/(2 A)` at `aperture_scan`.
    pub abbe_dmin: f64,
    /// Classical error `lambda/(4 A)` at `aperture_scan`.
    pub abbe_error: f64,
    pub recovered_d: f64,
    pub d_error_bound: f64,
    pub peak_count: usize,
    /// Order inferred from the fitted harmonic, `nu + 1`.
    pub inferred_n: usize,
    /// Phase window `[lo, hi)` the peaks were counted in.
    pub window: (f64, f64),
    /// `N - 1 > M`: the pattern resolves detail below the Abbe limit.
    pub beats_abbe: bool,
    /// Ratio of the classical error to the super-resolved error bound.
    pub gain_factor: f64,
}


#[cfg(test)]
mod proptests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn angle_phase_round_trip(d in 0.1f64..10.0, frac in -1.0f64..1.0) {
            let src = SourceArray::new(2, d, 1.0, SourceKind::Tls).unwrap();
            let delta = frac * src.kd();
            let back = phase_from_angle(&src, angle_from_phase(&src, delta).unwrap()).unwrap();
            prop_assert!((back - delta).abs() <= 1e-12 * delta.abs().max(1e-300) + 1e-15);
        }

        #[test]
        fn magic_differences_are_uniform(n in 2usize..12) {
            let m = magic_positions_tls(n).unwrap();
            for w in m.windows(2) {
                prop_assert!((w[1] - w[0] - TAU / (n - 1) as f64).abs() < 1e-15);
            }
        }

        #[test]
        fn two_source_recovery_is_abbe(m in 1usize..20, a in 0.01f64..1.0) {
            let src = SourceArray::new(2, 1.0, 532e-9, SourceKind::Tls).unwrap();
            let (d, _) = super_resolved_d(m, a, 2, 532e-9).unwrap();
            let abbe = abbe_limit(&src, a).unwrap();
            prop_assert!((d - m as f64 * abbe).abs() <= 1e-12 * d);
        }

        #[test]
        fn all_detector_aperture_is_bounded(n in 2usize..9, d in 0.5f64..4.0) {
            let src = SourceArray::new(n, d, 1.0, SourceKind::Tls).unwrap();
            let cfg = DetectorConfig::magic(&src, -PI).unwrap();
            let a = aperture_all_detectors(&cfg, &src).unwrap();
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
