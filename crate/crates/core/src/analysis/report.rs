use std::f64::consts::{PI, TAU};

use super::fit::fit_noon;
use super::peaks::count_peaks;
use crate::analytic::CorrelationScan;
use crate::error::{domain, Error, Result};
use crate::geometry::{
    abbe_limit, abbe_limit_error, aperture_all_detectors, aperture_scan_detector, super_resolved_d,
    ResolutionReport,
};

/// Highest harmonic tried when inferring the order of a scan.
pub const DEFAULT_MAX_HARMONIC: usize = 12;

/// Resolution figures for one period of the fitted fringe, centred on the
/// fitted maximum nearest `delta = 0` that leaves the window inside the scan.
pub fn resolution_report(scan: &CorrelationScan) -> Result<ResolutionReport> {
    let d = scan.deltas();
    let (first, last) = (d[0], d[d.len() - 1]);
    // N emitters produce no harmonic above N - 1; allowing more lets a short
    // scan be "explained" by a spurious fast fringe
    let top = DEFAULT_MAX_HARMONIC.min(scan.source().n_sources() - 1);
    if last - first < TAU / top as f64 * (1.0 - 1e-9) {
        return Err(Error::ResolutionInsufficient(format!(
            "scan [{first}, {last}] is shorter than one fringe of the fastest harmonic {top}"
        )));
    }
    let fit = fit_noon(scan, top)?;
    let nu = fit.harmonic as f64;
    let half = PI / nu;
    let tol = 1e-9 * (last - first);

    if last - first < 2.0 * half - tol {
        return Err(Error::ResolutionInsufficient(format!(
            "scan [{first}, {last}] is shorter than one fringe of harmonic {}",
            fit.harmonic
        )));
    }
    // maxima of cos(nu x + phase) sit at x_k = (2 pi k - phase) / nu; windows
    // centred on a maximum have their edges on minima
    let k0 = (fit.phase / TAU).round() as i64;
    let reach = 2 * fit.harmonic as i64 + 2;
    let mut centres: Vec<f64> = (k0 - reach..=k0 + reach)
        .map(|k| (TAU * k as f64 - fit.phase) / nu)
        .filter(|&c| c - half >= first - tol && c + half <= last + tol)
        .collect();
    centres.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    let centre = centres.first().copied().unwrap_or(0.5 * (first + last));
    let lo = (centre - half).max(first);
    let hi = (centre + half).min(last);
    build(scan, (lo, hi), fit.harmonic)
}

/// Resolution figures with peaks counted in an explicit phase window.
pub fn resolution_report_in_window(
    scan: &CorrelationScan,
    window: (f64, f64),
    max_harmonic: usize,
) -> Result<ResolutionReport> {
    let fit = fit_noon(scan, max_harmonic)?;
    build(scan, window, fit.harmonic)
}

fn build(scan: &CorrelationScan, window: (f64, f64), harmonic: usize) -> Result<ResolutionReport> {
    let src = scan.source();
    let peak_count = count_peaks(scan, window)?;
    if peak_count == 0 {
        return Err(Error::ResolutionInsufficient(format!(
            "no fringe maximum inside [{}, {})",
            window.0, window.1
        )));
    }
    let aperture_scan = aperture_scan_detector(window, src)?;
    if aperture_scan <= 0.0 {
        return Err(domain("counting window spans no aperture"));
    }
    let aperture_all = aperture_all_detectors(scan.detectors(), src)?;
    let inferred_n = harmonic + 1;
    let abbe_dmin = abbe_limit(src, aperture_scan)?;
    let abbe_error = abbe_limit_error(src, aperture_scan)?;
    let (recovered_d, d_error_bound) =
        super_resolved_d(peak_count, aperture_scan, inferred_n, src.wavelength())?;
    Ok(ResolutionReport {
        aperture_scan,
        aperture_all,
        abbe_dmin,
        abbe_error,
        recovered_d,
        d_error_bound,
        peak_count,
        inferred_n,
        window,
        beats_abbe: harmonic > peak_count,
        gain_factor: abbe_error / d_error_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{linspace, scan};
    use crate::source::{DetectorConfig, SourceArray, SourceKind};

    #[test]
    fn half_wavelength_reports() {
        for n in 2..=5 {
            let src = SourceArray::new(n, 0.5, 1.0, SourceKind::Tls).unwrap();
            let offset = if n == 2 { 0.0 } else { -PI };
            let cfg = DetectorConfig::magic(&src, offset).unwrap();
            let s = scan(&src, &cfg, &linspace(-PI, PI, 801)).unwrap();
            let r = resolution_report(&s).unwrap();
            assert_eq!(r.inferred_n, n);
            assert_eq!(r.peak_count, 1);
            assert!(
                (r.recovered_d - 0.5).abs() <= r.d_error_bound,
                "n={n} {r:?}"
            );
            assert!((r.gain_factor - (n - 1) as f64).abs() < 1e-9);
            assert_eq!(r.beats_abbe, n > 2);
        }
    }

    #[test]
    fn too_short_scan_is_rejected() {
        let src = SourceArray::new(2, 0.5, 1.0, SourceKind::Tls).unwrap();
        let cfg = DetectorConfig::magic(&src, 0.0).unwrap();
        let s = scan(&src, &cfg, &linspace(-1.0, 1.0, 9)).unwrap();
        assert!(resolution_report(&s).is_err());
        // densely sampled but shorter than the N = 3 fringe
        let src = SourceArray::new(3, 0.5, 1.0, SourceKind::Tls).unwrap();
        let cfg = DetectorConfig::magic(&src, 0.0).unwrap();
        let s = scan(&src, &cfg, &linspace(-0.5, 0.5, 201)).unwrap();
        assert!(matches!(
            resolution_report(&s),
            Err(Error::ResolutionInsufficient(_))
        ));
    }
}
