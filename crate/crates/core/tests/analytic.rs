use gncorr_core::analytic::{
    harmonic_decomposition, linspace, oracle_spe, oracle_tls, out_of_band_energy, scan,
    AnalyticEngine,
};
use gncorr_core::{fit_noon, DetectorConfig, SourceArray, SourceKind};
use proptest::prelude::*;
use std::f64::consts::{PI, TAU};

fn point_array(n: usize, kind: SourceKind) -> SourceArray {
    SourceArray::new(n, 1.0, 1.0, kind).unwrap()
}

fn phases(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

fn kind() -> impl Strategy<Value = SourceKind> {
    prop_oneof![Just(SourceKind::Spe), Just(SourceKind::Tls)]
}

fn order_and_phases() -> impl Strategy<Value = (SourceKind, Vec<f64>)> {
    (kind(), 2usize..=5).prop_flat_map(|(k, n)| (Just(k), phases(n)))
}

fn eval(kind: SourceKind, p: &[f64]) -> f64 {
    AnalyticEngine::default()
        .evaluate(&point_array(p.len(), kind), p)
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn engine_matches_oracle((k, p) in order_and_phases()) {
        let src = point_array(p.len(), k);
        let oracle = match k {
            SourceKind::Spe => oracle_spe(&src, &p).unwrap(),
            SourceKind::Tls => oracle_tls(&src, &p).unwrap(),
        };
        prop_assert!((eval(k, &p) - oracle).abs() < 1e-9);
    }

    #[test]
    fn global_shift_is_invisible((k, p) in order_and_phases(), c in -20.0..20.0f64) {
        let shifted: Vec<f64> = p.iter().map(|x| x + c).collect();
        prop_assert!((eval(k, &p) - eval(k, &shifted)).abs() < 1e-12);
    }

    #[test]
    fn detectors_are_exchangeable((k, p) in order_and_phases(), seed in any::<u64>()) {
        let mut q = p.clone();
        // deterministic shuffle driven by the generated seed
        let mut s = seed;
        for i in (1..q.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            q.swap(i, (s >> 33) as usize % (i + 1));
        }
        prop_assert!((eval(k, &p) - eval(k, &q)).abs() < 1e-12);
    }

    #[test]
    fn periodic_in_every_phase((k, p) in order_and_phases(), j in 0usize..5, m in -3i32..=3) {
        let j = j % p.len();
        let mut q = p.clone();
        q[j] += m as f64 * TAU;
        prop_assert!((eval(k, &p) - eval(k, &q)).abs() < 1e-12);
    }

    #[test]
    fn thermal_correlations_never_drop_below_one(p in (2usize..=5).prop_flat_map(phases)) {
        prop_assert!(eval(SourceKind::Tls, &p) >= 1.0 - 1e-12);
    }

    #[test]
    fn finite_slits_keep_thermal_bound(
        p in (2usize..=5).prop_flat_map(phases),
        ratio in 0.0..0.99f64,
    ) {
        let src = point_array(p.len(), SourceKind::Tls).with_slit_width(ratio).unwrap();
        let g = AnalyticEngine::default().evaluate(&src, &p).unwrap();
        prop_assert!(g >= 1.0 - 1e-12);
    }
}

#[test]
fn single_photon_magic_scans_stay_in_unit_range() {
    for n in 2..=3 {
        let src = point_array(n, SourceKind::Spe);
        let cfg = DetectorConfig::magic(&src, 0.0).unwrap();
        let s = scan(&src, &cfg, &linspace(0.0, TAU, 201)).unwrap();
        let max = s.values().iter().copied().fold(0.0, f64::max);
        assert!(s
            .values()
            .iter()
            .all(|&g| (-1e-15..=1.0 + 1e-12).contains(&g)));
        assert!(max > 0.1);
    }
}

#[test]
fn thermal_magic_scans_are_pure() {
    for n in 2..=6 {
        let src = point_array(n, SourceKind::Tls);
        let cfg = DetectorConfig::magic(&src, 0.0).unwrap();
        let s = scan(&src, &cfg, &linspace(0.0, TAU, 4 * n + 1)).unwrap();
        let coeffs = harmonic_decomposition(&s).unwrap();
        let outside = out_of_band_energy(&coeffs, &[0, n - 1]);
        assert!(outside < 1e-10, "n={n}: {outside}");
        assert!(coeffs[&(n - 1)].norm() > 0.05 * coeffs[&0].norm());

        let dense = scan(&src, &cfg, &linspace(-PI, PI, 16 * n + 1)).unwrap();
        let fit = fit_noon(&dense, 8).unwrap();
        assert_eq!(fit.harmonic, n - 1);
        assert!(fit.residual_rms < 1e-9, "n={n}: {}", fit.residual_rms);
    }
}

#[test]
fn low_order_visibilities() {
    let fitted = |n: usize, kind: SourceKind| {
        let src = point_array(n, kind);
        let cfg = DetectorConfig::magic(&src, 0.0).unwrap();
        let s = scan(&src, &cfg, &linspace(0.0, TAU, 97)).unwrap();
        fit_noon(&s, 6).unwrap().visibility
    };
    assert!((fitted(2, SourceKind::Tls) - 1.0 / 3.0).abs() < 1e-12);
    assert!((fitted(3, SourceKind::Tls) - 8.0 / 25.0).abs() < 1e-12);
    assert!((fitted(2, SourceKind::Spe) - 1.0).abs() < 1e-12);
    assert!((fitted(3, SourceKind::Spe) - 1.0).abs() < 1e-12);
}

#[test]
fn single_photon_magic_sets_from_search_are_pure() {
    for n in 4..=5 {
        let src = point_array(n, SourceKind::Spe);
        let cfg = DetectorConfig::magic(&src, 0.0).unwrap();
        let s = scan(&src, &cfg, &linspace(0.0, TAU, 4 * n + 1)).unwrap();
        let coeffs = harmonic_decomposition(&s).unwrap();
        assert!(out_of_band_energy(&coeffs, &[0, n - 1]) < 1e-10, "n={n}");
    }
}

#[test]
fn order_limits_are_reported() {
    let big = point_array(11, SourceKind::Tls);
    let p = vec![0.0; 11];
    assert!(AnalyticEngine::default().evaluate(&big, &p).is_err());
    assert!(AnalyticEngine::with_cutoff(11).evaluate(&big, &p).is_ok());
    assert!(oracle_tls(&point_array(7, SourceKind::Tls), &[0.0; 7]).is_err());
}
