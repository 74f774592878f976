//! Self-describing JSON reports emitted by the CLI: every report embeds the
//! resolved configuration and the library version.

use serde::Serialize;

use crate::bocpd::BocpdRun;
use crate::cbocpd::{CbocpdRun, Confirmation};
use crate::eval::ScoreSummary;
use crate::glrt::{LrtOutcome, Verdict};
use crate::gp::PredictiveGaussian;

pub fn library_version() -> &'static str {
    env!("CARGO_PKG_VERSION")
}

#[derive(Debug, Serialize)]
pub struct Report<C: Serialize, B: Serialize> {
    pub command: &'static str,
    pub version: &'static str,
    pub config: C,
    #[serde(flatten)]
    pub body: B,
}

impl<C: Serialize, B: Serialize> Report<C, B> {
    pub fn new(command: &'static str, config: C, body: B) -> Self {
        Report {
            command,
            version: library_version(),
            config,
            body,
        }
    }
}

/// Detection summary shared by the bocpd and cbocpd commands.
#[derive(Debug, Serialize)]
pub struct DetectionReport {
    /// Steps where the MAP run length collapsed after a long run.
    pub change_points: Vec<usize>,
    pub map_run_length: Vec<usize>,
    pub predictive_mean: Vec<f64>,
    pub predictive_variance: Vec<f64>,
    /// Hazard applied at each step (constant for plain bocpd).
    pub hazard: Vec<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub confirmed_changes: Vec<Confirmation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub confirmed_nonchanges: Vec<Confirmation>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scores: Option<ScoreSummary>,
}

fn traces(preds: &[PredictiveGaussian]) -> (Vec<f64>, Vec<f64>) {
    (
        preds.iter().map(|p| p.mean).collect(),
        preds.iter().map(|p| p.variance).collect(),
    )
}

impl DetectionReport {
    pub fn from_bocpd(run: &BocpdRun, hazard: Vec<f64>, scores: Option<ScoreSummary>) -> Self {
        let (mean, var) = traces(&run.predictives);
        DetectionReport {
            change_points: run.change_points.clone(),
            map_run_length: run.map_path.clone(),
            predictive_mean: mean,
            predictive_variance: var,
            hazard,
            confirmed_changes: Vec::new(),
            confirmed_nonchanges: Vec::new(),
            warnings: Vec::new(),
            scores,
        }
    }

    pub fn from_cbocpd(run: &CbocpdRun, scores: Option<ScoreSummary>) -> Self {
        let (mean, var) = traces(&run.bocpd.predictives);
        DetectionReport {
            change_points: run.bocpd.change_points.clone(),
            map_run_length: run.bocpd.map_path.clone(),
            predictive_mean: mean,
            predictive_variance: var,
            hazard: run.hazards.clone(),
            confirmed_changes: run.confirmed_changes.clone(),
            confirmed_nonchanges: run.confirmed_nonchanges.clone(),
            warnings: run.warnings.clone(),
            scores,
        }
    }
}

/// JSON view of a test outcome (infinite statistics serialize as null, with
/// the affected candidates listed under `degenerate`).
#[derive(Debug, Serialize)]
pub struct TestReport {
    pub t_star: usize,
    pub stat_max: f64,
    pub candidates: Vec<usize>,
    pub stats: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimates: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<usize>,
    pub threshold_h0: Option<f64>,
    pub threshold_h1: Option<f64>,
    pub verdict_t0: Option<bool>,
    pub verdict_t1: Option<bool>,
    pub verdict: Option<Verdict>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub no_valid_threshold: Option<bool>,
}

impl TestReport {
    pub fn new(outcome: &LrtOutcome, no_valid_threshold: Option<bool>) -> Self {
        TestReport {
            t_star: outcome.t_star,
            stat_max: outcome.stat_max,
            candidates: outcome.candidates.clone(),
            stats: outcome.stats.clone(),
            estimates: outcome.estimates.clone(),
            degenerate: outcome.degenerate.clone(),
            skipped: outcome.skipped.clone(),
            threshold_h0: outcome.threshold_h0,
            threshold_h1: outcome.threshold_h1,
            verdict_t0: outcome.verdict_t0,
            verdict_t1: outcome.verdict_t1,
            verdict: outcome.verdict_star(),
            no_valid_threshold,
        }
    }
}
