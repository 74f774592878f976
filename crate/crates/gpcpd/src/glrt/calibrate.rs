//! Monte-Carlo calibration of the empirical test thresholds, plus a
//! prefactored structural-break test engine reused by the online detector.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::glrt::CandidateSet;
use crate::kernels::{ChangeFamily, KernelSpec};
use crate::linalg::{cholesky, SpdFactorization};
use crate::rng::derive_rng;

/// Structural-break likelihood ratio test with the null and every
/// per-candidate alternative factored once, for repeated evaluation over
/// many windows or Monte-Carlo draws.
pub struct BreakTestEngine {
    n: usize,
    candidates: Vec<usize>,
    null_chol: SpdFactorization,
    null_log_det: f64,
    alt_chols: Vec<SpdFactorization>,
    alt_log_dets: Vec<f64>,
}

impl BreakTestEngine {
    pub fn new(null_k: &KernelSpec, alt_k: &KernelSpec, n: usize, cands: &CandidateSet) -> Result<Self> {
        if cands.series_len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: cands.series_len(),
            });
        }
        let family = ChangeFamily::StructuralBreak {
            pre: *null_k,
            post: *alt_k,
        };
        let null_chol = cholesky(&family.null_covariance(n)?)?;
        let null_log_det = null_chol.log_det();
        let mut alt_chols = Vec::with_capacity(cands.indices().len());
        let mut alt_log_dets = Vec::with_capacity(cands.indices().len());
        for &t in cands.indices() {
            let f = cholesky(&family.alternative_covariance(n, t)?)?;
            alt_log_dets.push(f.log_det());
            alt_chols.push(f);
        }
        Ok(BreakTestEngine {
            n,
            candidates: cands.indices().to_vec(),
            null_chol,
            null_log_det,
            alt_chols,
            alt_log_dets,
        })
    }

    #[inline]
    pub fn candidates(&self) -> &[usize] {
        &self.candidates
    }

    /// Per-candidate statistics for one window of data.
    pub fn stats(&self, x: &[f64]) -> Result<Vec<f64>> {
        let q0 = self.null_chol.quad_form(x)?;
        self.candidates
            .iter()
            .enumerate()
            .map(|(i, _)| {
                Ok(q0 - self.alt_chols[i].quad_form(x)? + self.null_log_det
                    - self.alt_log_dets[i])
            })
            .collect()
    }

    /// Maximizing candidate and its statistic (ties break to the smaller
    /// candidate).
    pub fn max_stat(&self, x: &[f64]) -> Result<(usize, f64)> {
        let stats = self.stats(x)?;
        let mut best = 0usize;
        for (i, &s) in stats.iter().enumerate() {
            if s > stats[best] {
                best = i;
            }
        }
        Ok((self.candidates[best], stats[best]))
    }

    fn sample_stat(&self, from_alt: Option<usize>, rng: &mut impl Rng) -> Result<f64> {
        let z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        let x = match from_alt {
            None => self.null_chol.lower_times(&z)?,
            Some(i) => self.alt_chols[i].lower_times(&z)?,
        };
        Ok(self.max_stat(&x)?.1)
    }
}

/// Linear interpolation between order statistics.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    let frac = h - lo as f64;
    sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
}

/// Calibrates the empirical thresholds for the structural-break test on a
/// window of length `window_n`:
///
/// * `r_h0` is the `1 - delta` quantile of the max statistic over draws
///   from the null kernel;
/// * `r_h1` is the `delta` quantile over draws with a break planted at the
///   window center (first regime `null_k`, second regime `alt_k`).
///
/// Deterministic given `seed`; replicates are evaluated in parallel with
/// per-replicate derived generators.
pub fn calibrate_empirical_thresholds(
    null_k: &KernelSpec,
    alt_k: &KernelSpec,
    window_n: usize,
    delta: f64,
    mc_samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if mc_samples < 200 {
        return Err(Error::invalid("mc_samples", "need at least 200 draws"));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", "must lie in (0, 1)"));
    }
    let cands = CandidateSet::new(window_n)?;
    let engine = BreakTestEngine::new(null_k, alt_k, window_n, &cands)?;
    let center = window_n / 2 + 1;
    let center_idx = engine
        .candidates
        .iter()
        .position(|&t| t == center)
        .ok_or_else(|| Error::invalid("window", "center is not a valid candidate"))?;

    let h0: Result<Vec<f64>> = (0..mc_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_rng(seed, 0, i as u64);
            engine.sample_stat(None, &mut rng)
        })
        .collect();
    let h1: Result<Vec<f64>> = (0..mc_samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = derive_rng(seed, 1, i as u64);
            engine.sample_stat(Some(center_idx), &mut rng)
        })
        .collect();
    let mut h0 = h0?;
    let mut h1 = h1?;
    h0.sort_by(|a, b| a.partial_cmp(b).unwrap());
    h1.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok((quantile(&h0, 1.0 - delta), quantile(&h1, delta)))
}
