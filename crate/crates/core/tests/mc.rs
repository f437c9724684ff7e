use gncorr_core::analytic::{linspace, scan};
use gncorr_core::mc::{mc_scan_detailed, CircularGaussian, FieldModel};
use gncorr_core::{
    estimate_g, fit_noon, mc_scan, DetectorConfig, ExperimentParams, SourceArray, SourceKind,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

fn setup(n: usize) -> (SourceArray, DetectorConfig) {
    let src = SourceArray::new(n, 1.0, 1.0, SourceKind::Tls).unwrap();
    let cfg = DetectorConfig::magic(&src, 0.0).unwrap();
    (src, cfg)
}

#[test]
fn speckle_amplitudes_have_unit_mean_intensity() {
    let (src, cfg) = setup(3);
    let model = FieldModel::new(&src, cfg.phases());
    let mut sampler = CircularGaussian(ChaCha8Rng::seed_from_u64(3));
    let draws = 20_000;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..draws {
        let r = model.realize(&mut sampler);
        for (f, i) in r.detector_fields.iter().zip(&r.intensities) {
            assert_eq!(f.norm_sqr(), *i);
        }
        for a in &r.amplitudes {
            sum += a.norm_sqr();
            sum_sq += a.norm_sqr().powi(2);
        }
    }
    let count = (draws * model.n_emitters()) as f64;
    let mean = sum / count;
    let sem = ((sum_sq / count - mean * mean) / count).sqrt();
    assert!((mean - 1.0).abs() < 5.0 * sem, "{mean} +- {sem}");
}

#[test]
fn monte_carlo_tracks_analytic_scan() {
    for n in 2..=3 {
        let (src, cfg) = setup(n);
        let grid = linspace(0.0, TAU, 21);
        let exact = scan(&src, &cfg, &grid).unwrap();
        let mut params = ExperimentParams::for_order(n);
        params.window = 50e-9;
        params.windows_per_cell = 20;
        params.n_windows = if n == 2 { 1_000_000 } else { 4_000_000 };
        let mut inside = 0;
        let mut total = 0;
        for seed in 0..3 {
            params.rng_seed = seed;
            let mc = mc_scan(&src, &cfg, &grid, &params).unwrap();
            let errs = mc.uncertainties().unwrap();
            for ((g, e), a) in mc.values().iter().zip(errs).zip(exact.values()) {
                total += 1;
                if (g - a).abs() <= 4.0 * e {
                    inside += 1;
                }
            }
        }
        assert!(
            inside as f64 >= 0.95 * total as f64,
            "n={n}: {inside}/{total}"
        );
    }
}

#[test]
fn tallies_do_not_depend_on_thread_count() {
    let (src, cfg) = setup(3);
    let grid = linspace(-PI, PI, 5);
    let mut params = ExperimentParams::for_order(3);
    params.n_windows = 50_000;
    params.rng_seed = 77;
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| mc_scan_detailed(&src, &cfg, &grid, &params).unwrap())
    };
    let (one, t1) = run(1);
    let (four, t4) = run(4);
    assert_eq!(t1, t4);
    assert_eq!(one, four);
    assert_eq!(run(1).1, t1);
    params.rng_seed = 78;
    assert_ne!(mc_scan_detailed(&src, &cfg, &grid, &params).unwrap().1, t1);
}

#[test]
fn halving_the_window_leaves_the_estimate_unchanged() {
    let (src, cfg) = setup(2);
    let mut within = 0;
    let (mut diff_sum, mut var_sum) = (0.0, 0.0);
    let seeds = 4;
    for seed in 0..seeds {
        let mut params = ExperimentParams::for_order(2);
        params.n_windows = 10_000_000;
        params.rng_seed = seed;
        let full = estimate_g(&src, &cfg, 0.0, &params).unwrap();
        params.window /= 2.0;
        params.n_windows *= 2;
        params.rng_seed = seed + 1000;
        let half = estimate_g(&src, &cfg, 0.0, &params).unwrap();
        let diff = full.g_estimate - half.g_estimate;
        if diff.abs() < full.std_error + half.std_error {
            within += 1;
        }
        diff_sum += diff;
        var_sum += full.std_error.powi(2) + half.std_error.powi(2);
    }
    let pooled = diff_sum / seeds as f64;
    let pooled_err = var_sum.sqrt() / seeds as f64;
    assert!(within >= 3, "{within}/{seeds}");
    assert!(pooled.abs() < 2.0 * pooled_err, "{pooled} +- {pooled_err}");
}

#[test]
fn dead_time_lowers_visibility() {
    let (src, cfg) = setup(2);
    let grid = linspace(0.0, TAU, 17);
    let mut params = ExperimentParams::for_order(2);
    params.singles_rate = 2e6;
    params.windows_per_cell = 50;
    params.n_windows = 2_000_000;
    params.rng_seed = 11;
    // dead times well below the 2.5 us shared-field cell
    let visibilities: Vec<f64> = [0.0, 50e-9, 200e-9]
        .iter()
        .map(|&dead| {
            params.dead_time = dead;
            let s = mc_scan(&src, &cfg, &grid, &params).unwrap();
            fit_noon(&s, 4).unwrap().visibility
        })
        .collect();
    assert!(
        visibilities.windows(2).all(|w| w[1] < w[0]),
        "{visibilities:?}"
    );
}

#[test]
fn too_few_windows_is_rejected() {
    let (src, cfg) = setup(2);
    let mut params = ExperimentParams::for_order(2);
    params.n_windows = 10;
    assert!(estimate_g(&src, &cfg, 0.0, &params).is_err());
    let spe = src.clone().with_kind(SourceKind::Spe);
    params.n_windows = 10_000;
    assert!(estimate_g(&spe, &cfg, 0.0, &params).is_err());
}
