//! Hypothesis tests for mean and covariance changes: per-candidate
//! likelihood-ratio statistics, theoretically justified thresholds, and
//! Monte-Carlo threshold calibration.

mod calibrate;
mod closed_form;
mod cov;
mod mean;
mod thresholds;

pub use calibrate::{calibrate_empirical_thresholds, BreakTestEngine};
pub use closed_form::{scaled_alpha, scaled_stat_profile, variance_lrt};
pub use cov::{cov_lrt, lrt_spectrum};
pub use mean::{mean_glrt, mean_threshold};
pub use thresholds::{theoretical_thresholds, ThresholdSpec};

use serde::Serialize;

use crate::error::{Error, Result};

/// Default candidate margin: both segments keep at least
/// `max(2, ceil(0.05 n))` points.
pub fn default_margin(n: usize) -> usize {
    let five_pct = (n as f64 * 0.05).ceil() as usize;
    five_pct.max(2)
}

/// Candidate change-point indices, all inside `(margin, n - margin]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CandidateSet {
    n: usize,
    margin: usize,
    indices: Vec<usize>,
}

impl CandidateSet {
    /// Every interior index under the default margin rule.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_margin(n, default_margin(n))
    }

    pub fn with_margin(n: usize, margin: usize) -> Result<Self> {
        let indices: Vec<usize> = ((margin + 1)..=n.saturating_sub(margin)).collect();
        Self::from_indices(n, margin, indices)
    }

    pub fn from_indices(n: usize, margin: usize, indices: Vec<usize>) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::invalid(
                "candidate set",
                format!("no candidates inside ({margin}, {}]", n.saturating_sub(margin)),
            ));
        }
        let mut prev = 0usize;
        for &t in &indices {
            if t <= margin || t > n - margin {
                return Err(Error::CandidateOutOfRange {
                    t,
                    lo: margin,
                    hi: n - margin,
                });
            }
            if t <= prev {
                return Err(Error::invalid(
                    "candidate set",
                    "indices must be strictly increasing",
                ));
            }
            prev = t;
        }
        Ok(CandidateSet { n, margin, indices })
    }

    #[inline]
    pub fn series_len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn margin(&self) -> usize {
        self.margin
    }

    #[inline]
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

/// Combined outcome of the two-threshold test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Change,
    NoChange,
    Inconclusive,
}

/// Per-candidate statistics, the maximizing candidate, and (once thresholds
/// are applied) the test verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct LrtOutcome {
    pub candidates: Vec<usize>,
    /// `2L_t` per candidate, aligned with `candidates`.
    pub stats: Vec<f64>,
    /// Estimated per-candidate nuisance parameter where the family has one
    /// (tail variance or covariance scale).
    pub estimates: Option<Vec<f64>>,
    /// Candidates whose statistic was pinned to `+inf` by a degenerate
    /// (all-zero) tail segment.
    pub degenerate: Vec<usize>,
    /// Candidates excluded because the scale estimate had no positive root.
    pub skipped: Vec<usize>,
    pub t_star: usize,
    pub stat_max: f64,
    pub threshold_h0: Option<f64>,
    pub threshold_h1: Option<f64>,
    pub verdict_t0: Option<bool>,
    pub verdict_t1: Option<bool>,
}

impl LrtOutcome {
    pub(crate) fn from_stats(
        candidates: Vec<usize>,
        stats: Vec<f64>,
        estimates: Option<Vec<f64>>,
        degenerate: Vec<usize>,
        skipped: Vec<usize>,
    ) -> Self {
        debug_assert_eq!(candidates.len(), stats.len());
        // Ties break toward the smallest candidate.
        let mut best = 0usize;
        for (i, &s) in stats.iter().enumerate() {
            if s > stats[best] {
                best = i;
            }
        }
        LrtOutcome {
            t_star: candidates[best],
            stat_max: stats[best],
            candidates,
            stats,
            estimates,
            degenerate,
            skipped,
            threshold_h0: None,
            threshold_h1: None,
            verdict_t0: None,
            verdict_t1: None,
        }
    }

    /// Verdict under the three-way rule, available once both verdict bits
    /// are set.
    pub fn verdict_star(&self) -> Option<Verdict> {
        match (self.verdict_t0, self.verdict_t1) {
            (Some(t0), Some(t1)) => Some(match (t0, t1) {
                (true, true) => Verdict::Change,
                (false, false) => Verdict::NoChange,
                _ => Verdict::Inconclusive,
            }),
            _ => None,
        }
    }
}

/// Applies a pair of thresholds to a computed outcome: the null-calibrated
/// test fires when `stat_max >= r_h0`, the alternative-calibrated one when
/// `stat_max >= r_h1`.
pub fn run_test(mut outcome: LrtOutcome, r_h0: f64, r_h1: f64) -> LrtOutcome {
    outcome.threshold_h0 = Some(r_h0);
    outcome.threshold_h1 = Some(r_h1);
    outcome.verdict_t0 = Some(outcome.stat_max >= r_h0);
    outcome.verdict_t1 = Some(outcome.stat_max >= r_h1);
    outcome
}
