//! Detector-level simulation properties: MAP run-length growth on
//! stationary data, truncation soundness, calibration self-consistency of
//! window verdicts, and confirmed detection of a planted variance change.

mod common;

use gpcpd::bocpd::{bocpd_run, BocpdConfig, HazardPolicy};
use gpcpd::cbocpd::{cbocpd_run, CbocpdConfig};
use gpcpd::glrt::{
    calibrate_empirical_thresholds, run_test, BreakTestEngine, CandidateSet, LrtOutcome, Verdict,
};
use gpcpd::kernels::KernelSpec;
use gpcpd::synth::{sample_piecewise_gp, ScenarioSpec, SegmentSpec};

fn k(sv: f64, l: f64, nv: f64) -> KernelSpec {
    KernelSpec::rbf(sv, l, nv).unwrap()
}

fn stationary(n: usize, kernel: KernelSpec, noise: f64, seed: u64) -> gpcpd::gp::Series {
    let spec = ScenarioSpec {
        total_length: n,
        segments: vec![SegmentSpec { start: 1, kernel }],
        noise_variance: noise,
        cp_draw_intervals: None,
        seed,
    };
    sample_piecewise_gp(&spec).unwrap().0
}

#[test]
fn map_run_length_grows_on_stationary_data() {
    let kernel = k(1.0, 3.0, 0.1);
    let hazard = HazardPolicy::constant(1.0 / 200.0).unwrap();
    let cfg = BocpdConfig {
        max_run_length: 64,
        ..BocpdConfig::default()
    };
    let burn_in = 20;
    let mut good = 0;
    let seeds = 20;
    for seed in 0..seeds {
        let x = stationary(150, k(1.0, 3.0, 0.0), 0.1, 500 + seed);
        let run = bocpd_run(&x, &kernel, &hazard, &cfg).unwrap();
        let monotone = run.map_path[burn_in..]
            .windows(2)
            .all(|w| w[1] >= w[0]);
        if monotone {
            good += 1;
        }
    }
    assert!(
        good * 10 >= seeds * 9,
        "monotone MAP growth in only {good}/{seeds} runs"
    );
}

#[test]
fn truncation_preserves_predictives_when_tail_mass_is_negligible() {
    let kernel = k(1.0, 3.0, 0.1);
    let hazard = HazardPolicy::constant(1.0 / 200.0).unwrap();
    let x = stationary(200, k(1.0, 3.0, 0.0), 0.1, 77);

    let untruncated = BocpdConfig {
        max_run_length: 400,
        mass_floor: 0.0,
        ..BocpdConfig::default()
    };
    let capped = BocpdConfig {
        max_run_length: 64,
        mass_floor: 0.0,
        ..BocpdConfig::default()
    };
    let full = bocpd_run(&x, &kernel, &hazard, &untruncated).unwrap();
    let trunc = bocpd_run(&x, &kernel, &hazard, &capped).unwrap();
    for t in 1..=x.len() {
        let row = full.posterior.log_row(t);
        let tail_mass: f64 = row.iter().skip(64).map(|lp| lp.exp()).sum();
        if tail_mass < 1e-8 {
            let a = full.predictives[t - 1];
            let b = trunc.predictives[t - 1];
            assert!(
                (a.mean - b.mean).abs() < 1e-6,
                "predictive means diverge at t={t}: {} vs {}",
                a.mean,
                b.mean
            );
        }
    }
}

#[test]
fn calibrated_verdicts_are_self_consistent_on_null_windows() {
    // Thresholds calibrated for a well-separated kernel pair; windows drawn
    // from the null should confirm "no change" almost always, and false
    // change confirmations stay near delta for any pair.
    let window = 51;
    let delta = 0.05;
    let null_k = k(1.0, 1.0, 0.1);
    let alt_k = k(6.0, 1.0, 0.1);
    let (r0, r1) =
        calibrate_empirical_thresholds(&null_k, &alt_k, window, delta, 1000, 404).unwrap();
    let cands = CandidateSet::new(window).unwrap();
    let engine = BreakTestEngine::new(&null_k, &alt_k, window, &cands).unwrap();
    let trials = 1000;
    let mut no_change = 0;
    let mut change = 0;
    for seed in 0..trials {
        let x = stationary(window, k(1.0, 1.0, 0.0), 0.1, 9000 + seed);
        let stats = engine.stats(x.values()).unwrap();
        let outcome = run_test(
            LrtOutcome::from_stats(engine.candidates().to_vec(), stats, None, vec![], vec![]),
            r0,
            r1,
        );
        match outcome.verdict_star().unwrap() {
            Verdict::NoChange => no_change += 1,
            Verdict::Change => change += 1,
            Verdict::Inconclusive => {}
        }
    }
    let no_change_rate = no_change as f64 / trials as f64;
    let change_rate = change as f64 / trials as f64;
    assert!(
        no_change_rate >= 1.0 - delta - 0.03,
        "NoChange rate {no_change_rate} below {}",
        1.0 - delta - 0.03
    );
    assert!(
        change_rate <= delta + 0.03,
        "false Change rate {change_rate} above {}",
        delta + 0.03
    );
}

#[test]
fn cbocpd_confirms_a_planted_variance_change() {
    // Variance 1 -> 4 at t = 100 in a 200-point series; a confirmed change
    // should land inside [90, 115] in most seeded runs.
    let null_k = k(1.0, 3.0, 0.1);
    let seeds = 50;
    let mut hits = 0;
    for seed in 0..seeds {
        let spec = ScenarioSpec {
            total_length: 200,
            segments: vec![
                SegmentSpec {
                    start: 1,
                    kernel: k(1.0, 3.0, 0.0),
                },
                SegmentSpec {
                    start: 100,
                    kernel: k(4.0, 3.0, 0.0),
                },
            ],
            noise_variance: 0.1,
            cp_draw_intervals: None,
            seed: 333 + seed,
        };
        let (x, _) = sample_piecewise_gp(&spec).unwrap();
        let mut cfg = CbocpdConfig::new(25, 0.05, 1.0 / 200.0, 12);
        cfg.mc_samples = 400;
        cfg.bocpd.max_run_length = 128;
        let run = cbocpd_run(&x, &null_k, &cfg).unwrap();
        if run
            .confirmed_changes
            .iter()
            .any(|c| (90..=115).contains(&c.time))
        {
            hits += 1;
        }
    }
    assert!(
        hits * 10 >= seeds * 8,
        "confirmed change near the truth in only {hits}/{seeds} runs"
    );
}

#[test]
fn synth_lag_one_covariance_matches_kernel() {
    // Sample covariance at lag 1 over seeds against k(1), within 3 SE.
    let kernel = k(1.0, 3.0, 0.0);
    let n = 200;
    let seeds = 200;
    let mut lag1 = Vec::with_capacity(seeds as usize);
    for seed in 0..seeds {
        let x = stationary(n, kernel, 0.0, 40_000 + seed);
        let v = x.values();
        let c: f64 = v.windows(2).map(|w| w[0] * w[1]).sum::<f64>() / (n - 1) as f64;
        lag1.push(c);
    }
    let m = lag1.iter().sum::<f64>() / lag1.len() as f64;
    let sd = (lag1.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (lag1.len() - 1) as f64)
        .sqrt();
    let se = sd / (lag1.len() as f64).sqrt();
    let expected = kernel.value_at_lag(1.0);
    assert!(
        (m - expected).abs() <= 3.0 * se,
        "lag-1 covariance {m} vs kernel {expected} (SE {se})"
    );
}
