//! Confirmatory BOCPD: sliding-window structural-break tests override the
//! hazard fed to the run-length recursion. A window centered at `t` whose
//! test confirms a change exactly at the center raises the reset
//! probability to `1 - delta`; a window where neither test fires lowers it
//! to `delta`; anything else leaves the constant hazard untouched.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bocpd::{run_with_hazards, BocpdConfig, BocpdRun, GpPredictiveModel};
use crate::error::{Error, Result};
use crate::glrt::{
    calibrate_empirical_thresholds, run_test, BreakTestEngine, CandidateSet, LrtOutcome, Verdict,
};
use crate::gp::{fit_hyperparameters, FitConfig, Series};
use crate::kernels::KernelSpec;

/// Log-grid resolution used to stabilize refitted window kernels so the
/// threshold cache can hit: ten grid points per decade (~12% spacing),
/// well under the Monte-Carlo noise of the calibrated thresholds.
pub const REFIT_GRID_PER_DECADE: f64 = 10.0;

#[derive(Debug, Clone, Serialize)]
pub struct CbocpdConfig {
    /// Half window size `m`; each test sees `2m + 1` points.
    pub half_window: usize,
    /// Error bound for the likelihood ratio tests (also the override
    /// hazard offsets).
    pub delta: f64,
    /// Constant hazard used outside confirmed windows.
    pub hazard_const: f64,
    /// Monte-Carlo draws per threshold calibration.
    pub mc_samples: usize,
    pub seed: u64,
    /// Refit the alternative kernel on each window's second half; when
    /// false the fixed alternative (or the null kernel) is used instead.
    pub refit_alternative: bool,
    /// Explicit alternative kernel for `refit_alternative = false`.
    pub fixed_alternative: Option<KernelSpec>,
    /// Forces `(r_h0, r_h1)` instead of calibrating; `(+inf, -inf)` makes
    /// every window inconclusive, reducing the run to plain BOCPD.
    pub threshold_override: Option<(f64, f64)>,
    pub bocpd: BocpdConfig,
}

impl CbocpdConfig {
    pub fn new(half_window: usize, delta: f64, hazard_const: f64, seed: u64) -> Self {
        CbocpdConfig {
            half_window,
            delta,
            hazard_const,
            mc_samples: 1000,
            seed,
            refit_alternative: true,
            fixed_alternative: None,
            threshold_override: None,
            bocpd: BocpdConfig::default(),
        }
    }

    pub fn validate(&self, series_len: usize) -> Result<()> {
        if self.half_window == 0 || 2 * self.half_window + 1 > series_len {
            return Err(Error::invalid(
                "half_window",
                format!(
                    "window {} does not fit a series of length {series_len}",
                    2 * self.half_window + 1
                ),
            ));
        }
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::invalid("delta", "must lie in (0, 0.5)"));
        }
        if !(self.hazard_const > 0.0 && self.hazard_const < 1.0) {
            return Err(Error::invalid("hazard_const", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// A window whose combined test reached a definite verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Confirmation {
    /// Window center (1-based step whose hazard was overridden).
    pub time: usize,
    pub stat: f64,
    pub threshold_h0: f64,
    pub threshold_h1: f64,
}

#[derive(Debug)]
pub struct CbocpdRun {
    pub bocpd: BocpdRun,
    /// Hazard actually applied at each step.
    pub hazards: Vec<f64>,
    pub confirmed_changes: Vec<Confirmation>,
    pub confirmed_nonchanges: Vec<Confirmation>,
    /// Windows that fell back to the constant hazard after a numerical
    /// failure.
    pub warnings: Vec<String>,
}

fn snap_log_grid(v: f64, per_decade: f64) -> f64 {
    if !(v > 0.0) || !v.is_finite() {
        return v;
    }
    10f64.powf((v.log10() * per_decade).round() / per_decade)
}

/// Alternative kernel for one window under the configured policy.
fn window_alternative(window: &Series, null_k: &KernelSpec, cfg: &CbocpdConfig) -> KernelSpec {
    if !cfg.refit_alternative {
        return cfg.fixed_alternative.unwrap_or(*null_k);
    }
    let w = window.len();
    let second_half = match window.slice(w / 2 + 1, w) {
        Ok(s) => s,
        Err(_) => return *null_k,
    };
    let fit_cfg = FitConfig {
        fit_noise: false,
        ..FitConfig::default()
    };
    let fitted = match fit_hyperparameters(&second_half, null_k, &fit_cfg) {
        Ok(f) => f.kernel,
        Err(_) => return *null_k,
    };
    KernelSpec {
        family: null_k.family,
        signal_variance: snap_log_grid(fitted.signal_variance, REFIT_GRID_PER_DECADE),
        length_scale: snap_log_grid(fitted.length_scale, REFIT_GRID_PER_DECADE),
        noise_variance: null_k.noise_variance,
    }
}

fn cache_key(null_k: &KernelSpec, alt_k: &KernelSpec, window_n: usize, cfg: &CbocpdConfig) -> String {
    // Hyperparameters rounded to 4 significant digits.
    format!(
        "{:.3e}/{:.3e}/{:.3e}|{:.3e}/{:.3e}/{:.3e}|{}|{:.3e}|{}|{}",
        null_k.signal_variance,
        null_k.length_scale,
        null_k.noise_variance,
        alt_k.signal_variance,
        alt_k.length_scale,
        alt_k.noise_variance,
        window_n,
        cfg.delta,
        cfg.mc_samples,
        cfg.seed
    )
}

struct CachedTest {
    engine: BreakTestEngine,
    r_h0: f64,
    r_h1: f64,
}

fn build_cached_test(
    null_k: &KernelSpec,
    alt_k: &KernelSpec,
    window_n: usize,
    cfg: &CbocpdConfig,
) -> Result<CachedTest> {
    let cands = CandidateSet::new(window_n)?;
    let engine = BreakTestEngine::new(null_k, alt_k, window_n, &cands)?;
    let (r_h0, r_h1) = match cfg.threshold_override {
        Some(pair) => pair,
        None => calibrate_empirical_thresholds(
            null_k,
            alt_k,
            window_n,
            cfg.delta,
            cfg.mc_samples,
            cfg.seed,
        )?,
    };
    Ok(CachedTest { engine, r_h0, r_h1 })
}

fn outcome_from_engine(test: &CachedTest, window: &[f64]) -> Result<LrtOutcome> {
    let stats = test.engine.stats(window)?;
    let outcome = LrtOutcome::from_stats(
        test.engine.candidates().to_vec(),
        stats,
        None,
        vec![],
        vec![],
    );
    Ok(run_test(outcome, test.r_h0, test.r_h1))
}

/// Structural-break verdict for a single window: the alternative kernel is
/// refit on the window's second half (or taken from the config), thresholds
/// come from the override or a fresh calibration, and the verdict bits are
/// set on the returned outcome.
pub fn window_verdict(window: &Series, null_k: &KernelSpec, cfg: &CbocpdConfig) -> Result<LrtOutcome> {
    let w = window.len();
    if w != 2 * cfg.half_window + 1 {
        return Err(Error::invalid(
            "window",
            format!("expected length {}, got {w}", 2 * cfg.half_window + 1),
        ));
    }
    let alt = window_alternative(window, null_k, cfg);
    let test = build_cached_test(null_k, &alt, w, cfg)?;
    outcome_from_engine(&test, window.values())
}

/// Runs CBOCPD over a series. The boundary steps (`t <= m` and
/// `t >= n - m`) keep the constant hazard; every interior step gets the
/// three-way override from its window's verdict.
pub fn cbocpd_run(x: &Series, null_k: &KernelSpec, cfg: &CbocpdConfig) -> Result<CbocpdRun> {
    null_k.validate()?;
    cfg.validate(x.len())?;
    let n = x.len();
    let m = cfg.half_window;
    let window_n = 2 * m + 1;
    let centers: Vec<usize> = ((m + 1)..(n - m)).collect();

    // Windows depend only on the raw data, so the alternative kernels can
    // be fit in parallel before the sequential pass.
    let alts: Vec<KernelSpec> = centers
        .par_iter()
        .map(|&t| {
            let window = x.slice(t - m, t + m).expect("window bounds checked");
            window_alternative(&window, null_k, cfg)
        })
        .collect();

    // Calibrate once per distinct kernel pair.
    let mut cache: HashMap<String, Result<CachedTest>> = HashMap::new();
    let mut keys: Vec<(String, KernelSpec)> = Vec::new();
    for alt in &alts {
        let key = cache_key(null_k, alt, window_n, cfg);
        if !cache.contains_key(&key) {
            cache.insert(key.clone(), Err(Error::invalid("cache", "pending")));
            keys.push((key, *alt));
        }
    }
    for (key, alt) in keys {
        let built = build_cached_test(null_k, &alt, window_n, cfg);
        cache.insert(key, built);
    }

    let mut hazards = vec![cfg.hazard_const; n];
    let mut confirmed_changes = Vec::new();
    let mut confirmed_nonchanges = Vec::new();
    let mut warnings = Vec::new();

    let outcomes: Vec<Result<LrtOutcome>> = centers
        .par_iter()
        .zip(alts.par_iter())
        .map(|(&t, alt)| {
            let key = cache_key(null_k, alt, window_n, cfg);
            match cache.get(&key) {
                Some(Ok(test)) => {
                    let window = x.slice(t - m, t + m)?;
                    outcome_from_engine(test, window.values())
                }
                Some(Err(_)) | None => Err(Error::invalid(
                    "window",
                    format!("threshold calibration failed for window at t={t}"),
                )),
            }
        })
        .collect();

    for (&t, outcome) in centers.iter().zip(outcomes) {
        match outcome {
            Ok(out) => {
                let center_is_max = out.t_star == m + 1;
                match out.verdict_star() {
                    Some(Verdict::Change) if center_is_max => {
                        hazards[t - 1] = 1.0 - cfg.delta;
                        confirmed_changes.push(Confirmation {
                            time: t,
                            stat: out.stat_max,
                            threshold_h0: out.threshold_h0.unwrap(),
                            threshold_h1: out.threshold_h1.unwrap(),
                        });
                    }
                    Some(Verdict::NoChange) => {
                        hazards[t - 1] = cfg.delta;
                        confirmed_nonchanges.push(Confirmation {
                            time: t,
                            stat: out.stat_max,
                            threshold_h0: out.threshold_h0.unwrap(),
                            threshold_h1: out.threshold_h1.unwrap(),
                        });
                    }
                    _ => {}
                }
            }
            Err(e) => {
                warnings.push(format!("window at t={t} fell back to constant hazard: {e}"));
            }
        }
    }

    let capacity = cfg.bocpd.max_run_length.min(n).max(1);
    let model = GpPredictiveModel::new(null_k, capacity)?;
    let bocpd = run_with_hazards(x, model, &hazards, &cfg.bocpd)?;

    Ok(CbocpdRun {
        bocpd,
        hazards,
        confirmed_changes,
        confirmed_nonchanges,
        warnings,
    })
}
