//! Bayesian online change point detection: run-length posterior recursion
//! in log space with a GP underlying predictive model and a per-step hazard.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gp::{PredictiveGaussian, Series};
use crate::kernels::{covariance_matrix, KernelSpec};
use crate::linalg::{cholesky, SpdFactorization};

/// Per-step reset probability: a constant base rate plus optional
/// per-time overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct HazardPolicy {
    base: f64,
    overrides: BTreeMap<usize, f64>,
}

impl HazardPolicy {
    pub fn constant(base: f64) -> Result<Self> {
        Self::with_overrides(base, BTreeMap::new())
    }

    pub fn with_overrides(base: f64, overrides: BTreeMap<usize, f64>) -> Result<Self> {
        if !(base > 0.0 && base < 1.0) {
            return Err(Error::invalid("hazard", "base must lie in (0, 1)"));
        }
        for (&t, &h) in &overrides {
            if !(h > 0.0 && h < 1.0) {
                return Err(Error::invalid(
                    "hazard",
                    format!("override at t={t} must lie in (0, 1)"),
                ));
            }
        }
        Ok(HazardPolicy { base, overrides })
    }

    #[inline]
    pub fn at(&self, t: usize) -> f64 {
        self.overrides.get(&t).copied().unwrap_or(self.base)
    }
}

/// Supplies `P(x_t | last r observations)` for every run length at once.
pub trait PredictiveModel {
    /// Predictive distributions for the next observation given run lengths
    /// `0..=max_r`, where run length `r` conditions on the last `r` entries
    /// of `history`.
    fn predictives(&self, history: &[f64], max_r: usize) -> Result<Vec<PredictiveGaussian>>;
}

/// GP predictive model over a stationary kernel on the unit-spaced index.
///
/// Because the kernel is stationary, the covariance of the last `r`
/// observations (ordered newest first) is the leading `r x r` block of one
/// fixed Toeplitz matrix, so a single Cholesky factorization of order
/// `max_run_length` serves every run length: per step, one forward
/// substitution against the reversed history yields all predictive means
/// and variances as prefix sums.
pub struct GpPredictiveModel {
    prior_var: f64,
    /// Forward-substitution image of the cross-covariance vector.
    u: Vec<f64>,
    /// Predictive variance by run length.
    var_by_r: Vec<f64>,
    chol: SpdFactorization,
}

impl GpPredictiveModel {
    pub fn new(kernel: &KernelSpec, max_run_length: usize) -> Result<Self> {
        kernel.validate()?;
        if max_run_length == 0 {
            return Err(Error::invalid("model", "max_run_length must be >= 1"));
        }
        let chol = cholesky(&covariance_matrix(kernel, max_run_length)?)?;
        let k_star: Vec<f64> = (1..=max_run_length)
            .map(|lag| kernel.value_at_lag(lag as f64))
            .collect();
        let u = chol.solve_lower(&k_star)?;
        let prior_var = kernel.signal_variance + kernel.noise_variance;
        let mut var_by_r = Vec::with_capacity(max_run_length + 1);
        let mut acc = 0.0;
        var_by_r.push(prior_var);
        for ui in &u {
            acc += ui * ui;
            var_by_r.push(prior_var - acc);
        }
        Ok(GpPredictiveModel {
            prior_var,
            u,
            var_by_r,
            chol,
        })
    }

    fn forward_prefix(&self, newest_first: &[f64]) -> Vec<f64> {
        // Forward substitution against the leading block of the factor.
        let mut v = newest_first.to_vec();
        for i in 0..v.len() {
            let mut s = v[i];
            for k in 0..i {
                s -= self.chol.lower(i, k) * v[k];
            }
            v[i] = s / self.chol.lower(i, i);
        }
        v
    }
}

impl PredictiveModel for GpPredictiveModel {
    fn predictives(&self, history: &[f64], max_r: usize) -> Result<Vec<PredictiveGaussian>> {
        if max_r > history.len() || max_r > self.u.len() {
            return Err(Error::invalid(
                "model",
                format!(
                    "max_r = {max_r} exceeds history ({}) or model capacity ({})",
                    history.len(),
                    self.u.len()
                ),
            ));
        }
        let newest_first: Vec<f64> = history.iter().rev().take(max_r).copied().collect();
        let v = self.forward_prefix(&newest_first);
        let mut out = Vec::with_capacity(max_r + 1);
        out.push(PredictiveGaussian {
            mean: 0.0,
            variance: self.prior_var,
        });
        let mut mean = 0.0;
        for r in 1..=max_r {
            mean += self.u[r - 1] * v[r - 1];
            out.push(PredictiveGaussian {
                mean,
                variance: self.var_by_r[r],
            });
        }
        Ok(out)
    }
}

/// Degenerate model whose predictive ignores the history; the run-length
/// posterior then reduces to the pure hazard chain.
pub struct ConstantPredictiveModel(pub PredictiveGaussian);

impl PredictiveModel for ConstantPredictiveModel {
    fn predictives(&self, _history: &[f64], max_r: usize) -> Result<Vec<PredictiveGaussian>> {
        Ok(vec![self.0; max_r + 1])
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
#[serde(default)]
pub struct BocpdConfig {
    /// Run lengths at or above this cap are merged into the cap bin.
    pub max_run_length: usize,
    /// Posterior entries below this linear mass are dropped, with the rest
    /// renormalized.
    pub mass_floor: f64,
    /// A change point is declared when the MAP run length falls below this...
    pub cp_drop_below: usize,
    /// ...after having been at least this large on the previous step.
    pub cp_min_before: usize,
}

impl Default for BocpdConfig {
    fn default() -> Self {
        BocpdConfig {
            max_run_length: 256,
            mass_floor: 1e-12,
            cp_drop_below: 3,
            cp_min_before: 10,
        }
    }
}

impl<'de> serde::Deserialize<'de> for BocpdConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(serde::Deserialize)]
        #[serde(default, deny_unknown_fields)]
        struct Raw {
            max_run_length: usize,
            mass_floor: f64,
            cp_drop_below: usize,
            cp_min_before: usize,
        }
        impl Default for Raw {
            fn default() -> Self {
                let d = BocpdConfig::default();
                Raw {
                    max_run_length: d.max_run_length,
                    mass_floor: d.mass_floor,
                    cp_drop_below: d.cp_drop_below,
                    cp_min_before: d.cp_min_before,
                }
            }
        }
        let raw = Raw::deserialize(d)?;
        Ok(BocpdConfig {
            max_run_length: raw.max_run_length,
            mass_floor: raw.mass_floor,
            cp_drop_below: raw.cp_drop_below,
            cp_min_before: raw.cp_min_before,
        })
    }
}

/// Run-length posterior trace: row `t` (1-based step) holds
/// `log P(r_t = r | x_{1:t})` for `r = 0..row_len`.
#[derive(Debug, Clone, Serialize)]
pub struct RunLengthPosterior {
    rows: Vec<Vec<f64>>,
}

impl RunLengthPosterior {
    #[inline]
    pub fn steps(&self) -> usize {
        self.rows.len()
    }

    /// Log posterior row at 1-based step `t`.
    pub fn log_row(&self, t: usize) -> &[f64] {
        &self.rows[t - 1]
    }

    /// Linear probability `P(r_t = r | x_{1:t})`, zero outside the stored
    /// support.
    pub fn prob(&self, t: usize, r: usize) -> f64 {
        self.rows[t - 1].get(r).map_or(0.0, |lp| lp.exp())
    }

    pub fn map_run_length(&self, t: usize) -> usize {
        let row = &self.rows[t - 1];
        let mut best = 0;
        for (r, &lp) in row.iter().enumerate() {
            if lp > row[best] {
                best = r;
            }
        }
        best
    }
}

fn log_sum_exp(values: &[f64]) -> f64 {
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + values.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Sequential BOCPD state machine. Steps must be applied in time order.
pub struct BocpdDetector<M: PredictiveModel> {
    model: M,
    cfg: BocpdConfig,
    history: Vec<f64>,
    /// Normalized log posterior over the current run length.
    log_post: Vec<f64>,
}

/// One step's outputs: the new posterior row and the pre-update mixture
/// predictive (moment-matched to a Gaussian) that scored `x_t`.
#[derive(Debug, Clone)]
pub struct StepOutcome {
    pub log_posterior: Vec<f64>,
    pub predictive: PredictiveGaussian,
}

impl<M: PredictiveModel> BocpdDetector<M> {
    pub fn new(model: M, cfg: BocpdConfig) -> Self {
        BocpdDetector {
            model,
            cfg,
            history: Vec::new(),
            // Before any data the run length is zero with certainty.
            log_post: vec![0.0],
        }
    }

    pub fn log_posterior(&self) -> &[f64] {
        &self.log_post
    }

    /// Advances the recursion by one observation under reset probability
    /// `hazard`. Growth weight is `1 - hazard`; reset mass accumulates over
    /// all previous run lengths.
    pub fn step(&mut self, x_t: f64, hazard: f64) -> Result<StepOutcome> {
        if !(hazard > 0.0 && hazard < 1.0) {
            return Err(Error::invalid("hazard", "must lie in (0, 1)"));
        }
        let prev_len = self.log_post.len();
        let max_r = prev_len - 1;
        let preds = self.model.predictives(&self.history, max_r)?;
        debug_assert_eq!(preds.len(), prev_len);

        // Mixture predictive for scoring x_t, moment-matched to a Gaussian.
        let mut mix_mean = 0.0;
        let mut mix_second = 0.0;
        for (lp, p) in self.log_post.iter().zip(&preds) {
            let w = lp.exp();
            mix_mean += w * p.mean;
            mix_second += w * (p.variance + p.mean * p.mean);
        }
        let predictive = PredictiveGaussian {
            mean: mix_mean,
            variance: mix_second - mix_mean * mix_mean,
        };

        let log_pi: Vec<f64> = preds.iter().map(|p| p.log_density(x_t)).collect();
        let ln_growth = (1.0 - hazard).ln();
        let ln_reset = hazard.ln();

        let cap = self.cfg.max_run_length;
        let new_len = (prev_len + 1).min(cap + 1);
        let mut new_log = vec![f64::NEG_INFINITY; new_len];
        // Reset branch.
        let joint: Vec<f64> = self
            .log_post
            .iter()
            .zip(&log_pi)
            .map(|(lp, li)| lp + li)
            .collect();
        new_log[0] = log_sum_exp(&joint) + ln_reset;
        // Growth branch; run lengths beyond the cap merge into the cap bin.
        for (r, j) in joint.iter().enumerate() {
            let dest = (r + 1).min(cap);
            let grown = j + ln_growth;
            new_log[dest] = if new_log[dest] == f64::NEG_INFINITY {
                grown
            } else {
                log_sum_exp(&[new_log[dest], grown])
            };
        }

        let norm = log_sum_exp(&new_log);
        for v in &mut new_log {
            *v -= norm;
        }
        if self.cfg.mass_floor > 0.0 {
            let floor = self.cfg.mass_floor.ln();
            let mut dropped = false;
            for v in &mut new_log {
                if *v < floor {
                    *v = f64::NEG_INFINITY;
                    dropped = true;
                }
            }
            if dropped {
                let renorm = log_sum_exp(&new_log);
                for v in &mut new_log {
                    if *v != f64::NEG_INFINITY {
                        *v -= renorm;
                    }
                }
            }
        }

        self.history.push(x_t);
        self.log_post = new_log.clone();
        Ok(StepOutcome {
            log_posterior: new_log,
            predictive,
        })
    }
}

/// Full-run outputs of the recursion.
#[derive(Debug, Clone)]
pub struct BocpdRun {
    pub posterior: RunLengthPosterior,
    /// Pre-update mixture predictive per step, aligned with the series.
    pub predictives: Vec<PredictiveGaussian>,
    /// MAP run length per step.
    pub map_path: Vec<usize>,
    /// Steps where the MAP run length collapsed after a long run.
    pub change_points: Vec<usize>,
}

pub(crate) fn run_with_hazards<M: PredictiveModel>(
    x: &Series,
    model: M,
    hazards: &[f64],
    cfg: &BocpdConfig,
) -> Result<BocpdRun> {
    if hazards.len() != x.len() {
        return Err(Error::Misalignment(format!(
            "{} hazard entries for {} observations",
            hazards.len(),
            x.len()
        )));
    }
    let mut det = BocpdDetector::new(model, *cfg);
    let mut rows = Vec::with_capacity(x.len());
    let mut predictives = Vec::with_capacity(x.len());
    for (i, &v) in x.values().iter().enumerate() {
        let out = det.step(v, hazards[i])?;
        rows.push(out.log_posterior);
        predictives.push(out.predictive);
    }
    let posterior = RunLengthPosterior { rows };
    let map_path: Vec<usize> = (1..=x.len()).map(|t| posterior.map_run_length(t)).collect();
    let change_points = declare_change_points(&map_path, cfg);
    Ok(BocpdRun {
        posterior,
        predictives,
        map_path,
        change_points,
    })
}

fn declare_change_points(map_path: &[usize], cfg: &BocpdConfig) -> Vec<usize> {
    let mut cps = Vec::new();
    for t in 1..map_path.len() {
        if map_path[t] < cfg.cp_drop_below && map_path[t - 1] >= cfg.cp_min_before {
            cps.push(t + 1); // 1-based step
        }
    }
    cps
}

/// Runs BOCPD over a whole series with a GP predictive model.
pub fn bocpd_run(
    x: &Series,
    kernel: &KernelSpec,
    hazard: &HazardPolicy,
    cfg: &BocpdConfig,
) -> Result<BocpdRun> {
    let capacity = cfg.max_run_length.min(x.len()).max(1);
    let model = GpPredictiveModel::new(kernel, capacity)?;
    let hazards: Vec<f64> = (1..=x.len()).map(|t| hazard.at(t)).collect();
    run_with_hazards(x, model, &hazards, cfg)
}
