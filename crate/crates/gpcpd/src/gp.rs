//! Zero-mean GP marginal likelihood, posterior predictive distribution, and
//! hyperparameter fitting by gradient ascent on the marginal likelihood.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{covariance_matrix, kernel_gradients, KernelSpec};
use crate::linalg::{cholesky, SymMatrix};

/// Observed series `x_1..x_n` on the implicit unit-spaced time index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    values: Vec<f64>,
}

impl Series {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("series", "must contain at least one value"));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid("series", format!("non-finite value {v}")));
        }
        Ok(Series { values })
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sub-series over 1-based inclusive index bounds.
    pub fn slice(&self, start: usize, end: usize) -> Result<Series> {
        if start < 1 || end > self.values.len() || start > end {
            return Err(Error::invalid(
                "series range",
                format!("[{start}, {end}] out of 1..={}", self.values.len()),
            ));
        }
        Series::new(self.values[start - 1..end].to_vec())
    }
}

/// One-dimensional Gaussian predictive distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictiveGaussian {
    pub mean: f64,
    pub variance: f64,
}

impl PredictiveGaussian {
    /// Log density of `x` under this Gaussian.
    pub fn log_density(&self, x: f64) -> f64 {
        let d = x - self.mean;
        -0.5 * ((2.0 * std::f64::consts::PI * self.variance).ln() + d * d / self.variance)
    }
}

/// Log marginal likelihood of the observations under a zero-mean GP with
/// kernel `k` (observation noise included in the covariance).
pub fn log_marginal_likelihood(k: &KernelSpec, x: &Series) -> Result<f64> {
    let n = x.len();
    let sigma = covariance_matrix(k, n)?;
    log_marginal_likelihood_with(&sigma, x.values())
}

pub(crate) fn log_marginal_likelihood_with(sigma: &SymMatrix, x: &[f64]) -> Result<f64> {
    let f = cholesky(sigma)?;
    let q = f.quad_form(x)?;
    let n = x.len() as f64;
    Ok(-0.5 * q - 0.5 * f.log_det() - 0.5 * n * (2.0 * std::f64::consts::PI).ln())
}

/// Posterior predictive distribution at (1-based) index `horizon_index`,
/// conditioning on `history` observed at indices `1..=history.len()`.
/// An empty history yields the prior `N(0, signal + noise)`.
pub fn posterior_predictive(
    k: &KernelSpec,
    history: &[f64],
    horizon_index: usize,
) -> Result<PredictiveGaussian> {
    let m = history.len();
    let prior_var = k.signal_variance + k.noise_variance;
    if m == 0 {
        return Ok(PredictiveGaussian {
            mean: 0.0,
            variance: prior_var,
        });
    }
    if horizon_index <= m {
        return Err(Error::invalid(
            "horizon",
            format!("index {horizon_index} must exceed history length {m}"),
        ));
    }
    let sigma = covariance_matrix(k, m)?;
    let f = cholesky(&sigma)?;
    let k_star: Vec<f64> = (1..=m)
        .map(|i| k.value_at_lag(horizon_index as f64 - i as f64))
        .collect();
    let w = f.solve_lower(&k_star)?;
    let v = f.solve_lower(history)?;
    let mean: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
    let variance = prior_var - w.iter().map(|a| a * a).sum::<f64>();
    Ok(PredictiveGaussian { mean, variance })
}

/// Settings for the marginal-likelihood ascent.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    pub max_iters: usize,
    /// Stop once the likelihood gain of an accepted step falls below this.
    pub tol: f64,
    /// Box bounds applied to every hyperparameter.
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// When false the noise variance is held at its initial value.
    pub fit_noise: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iters: 200,
            tol: 1e-6,
            lower_bound: 1e-4,
            upper_bound: 1e4,
            fit_noise: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FitResult {
    pub kernel: KernelSpec,
    pub log_marginal: f64,
    /// False when no ascent step improved on the initial kernel.
    pub improved: bool,
    pub iterations: usize,
}

fn clamped_kernel(theta: &[f64; 3], cfg: &FitConfig, family: &KernelSpec) -> KernelSpec {
    let lo = cfg.lower_bound.ln();
    let hi = cfg.upper_bound.ln();
    let c = |v: f64| v.clamp(lo, hi).exp();
    KernelSpec {
        family: family.family,
        signal_variance: c(theta[0]),
        length_scale: c(theta[1]),
        noise_variance: c(theta[2]),
    }
}

/// Marginal-likelihood gradient with respect to the raw hyperparameters
/// (signal variance, length scale, noise variance):
/// `dL/dtheta = 0.5 tr((alpha alpha^T - Sigma^{-1}) dSigma/dtheta)` with
/// `alpha = Sigma^{-1} x`.
pub fn log_marginal_gradient(k: &KernelSpec, x: &Series) -> Result<[f64; 3]> {
    let n = x.len();
    let sigma = covariance_matrix(k, n)?;
    let f = cholesky(&sigma)?;
    let alpha = f.solve(x.values())?;
    // Explicit inverse, column by column.
    let mut inv = vec![0.0; n * n];
    let mut unit = vec![0.0; n];
    for j in 0..n {
        unit[j] = 1.0;
        let col = f.solve(&unit)?;
        for i in 0..n {
            inv[i * n + j] = col[i];
        }
        unit[j] = 0.0;
    }
    let grads = kernel_gradients(k, n)?;
    let mut out = [0.0; 3];
    for (slot, g) in out.iter_mut().zip(grads.iter()) {
        let mut quad = 0.0;
        let mut tr = 0.0;
        for i in 0..n {
            let row = g.row(i);
            let ai = alpha[i];
            for j in 0..n {
                quad += ai * row[j] * alpha[j];
                tr += inv[i * n + j] * row[j];
            }
        }
        *slot = 0.5 * (quad - tr);
    }
    Ok(out)
}

/// Fits kernel hyperparameters by gradient ascent in log-parameter space
/// with a backtracking line search. Only improving steps are accepted, so
/// the returned kernel never scores below `init`; `improved` is false when
/// the search could not move at all.
pub fn fit_hyperparameters(x: &Series, init: &KernelSpec, cfg: &FitConfig) -> Result<FitResult> {
    init.validate()?;
    if x.len() < 4 {
        return Err(Error::invalid("series", "fitting needs at least 4 points"));
    }
    let lo = cfg.lower_bound.ln();
    let hi = cfg.upper_bound.ln();
    let mut theta = [
        init.signal_variance.ln().clamp(lo, hi),
        init.length_scale.ln().clamp(lo, hi),
        init.noise_variance.max(cfg.lower_bound).ln().clamp(lo, hi),
    ];
    let mut current = clamped_kernel(&theta, cfg, init);
    let mut best_l = log_marginal_likelihood(&current, x)?;
    let init_l = best_l;
    let mut iterations = 0;

    for _ in 0..cfg.max_iters {
        iterations += 1;
        let raw = match log_marginal_gradient(&current, x) {
            Ok(g) => g,
            Err(_) => break,
        };
        // Chain rule into log space: d/d(ln v) = v * d/dv.
        let grad = [
            raw[0] * current.signal_variance,
            raw[1] * current.length_scale,
            if cfg.fit_noise {
                raw[2] * current.noise_variance
            } else {
                0.0
            },
        ];
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();
        if gnorm2 < 1e-18 {
            break;
        }
        // Backtracking line search on the log-space parameters.
        let mut step = 1.0 / gnorm2.sqrt().max(1.0);
        let mut accepted = None;
        while step > 1e-12 {
            let cand_theta = [
                (theta[0] + step * grad[0]).clamp(lo, hi),
                (theta[1] + step * grad[1]).clamp(lo, hi),
                (theta[2] + step * grad[2]).clamp(lo, hi),
            ];
            let cand = clamped_kernel(&cand_theta, cfg, init);
            if let Ok(l) = log_marginal_likelihood(&cand, x) {
                if l > best_l {
                    accepted = Some((cand_theta, cand, l));
                    break;
                }
            }
            step *= 0.5;
        }
        match accepted {
            Some((t, k, l)) => {
                let gain = l - best_l;
                theta = t;
                current = k;
                best_l = l;
                if gain < cfg.tol {
                    break;
                }
            }
            None => break,
        }
    }

    Ok(FitResult {
        kernel: current,
        log_marginal: best_l,
        improved: best_l > init_l,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn k(sv: f64, l: f64, nv: f64) -> KernelSpec {
        KernelSpec::rbf(sv, l, nv).unwrap()
    }

    #[test]
    fn single_point_log_marginal() {
        let series = Series::new(vec![0.0]).unwrap();
        let l = log_marginal_likelihood(&k(0.5, 1.0, 0.5), &series).unwrap();
        assert_relative_eq!(l, -0.918939, epsilon = 1e-6);

        let series = Series::new(vec![2.0]).unwrap();
        let l = log_marginal_likelihood(&k(0.5, 1.0, 0.5), &series).unwrap();
        assert_relative_eq!(l, -2.918939, epsilon = 1e-6);
    }

    #[test]
    fn predictive_prior_cases() {
        let kern = k(1.5, 2.0, 0.25);
        let p = posterior_predictive(&kern, &[], 1).unwrap();
        assert_eq!(p.mean, 0.0);
        assert_relative_eq!(p.variance, 1.75, epsilon = 1e-12);

        // History far in the past decorrelates back to the prior.
        let p = posterior_predictive(&kern, &[3.0, -1.0], 1000).unwrap();
        assert!(p.mean.abs() < 1e-9);
        assert_relative_eq!(p.variance, 1.75, epsilon = 1e-9);
    }

    #[test]
    fn predictive_rejects_horizon_inside_history() {
        let kern = k(1.0, 1.0, 0.1);
        assert!(posterior_predictive(&kern, &[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn predictive_matches_joint_covariance_conditioning() {
        // Oracle: condition the explicit 4x4 joint Gaussian via a
        // Gauss-Jordan inverse of the 3x3 history block.
        let kern = k(1.3, 2.2, 0.15);
        let hist = [0.7, -0.4, 1.1];
        let p = posterior_predictive(&kern, &hist, 4).unwrap();

        let m = 3;
        let mut joint = vec![vec![0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                joint[i][j] = kern.value_at_lag(i as f64 - j as f64)
                    + if i == j { kern.noise_variance } else { 0.0 };
            }
        }
        let mut a: Vec<Vec<f64>> = (0..m).map(|i| joint[i][..m].to_vec()).collect();
        let mut inv: Vec<Vec<f64>> = (0..m)
            .map(|i| (0..m).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        for col in 0..m {
            let piv = a[col][col];
            for j in 0..m {
                a[col][j] /= piv;
                inv[col][j] /= piv;
            }
            for r in 0..m {
                if r != col {
                    let f = a[r][col];
                    for j in 0..m {
                        a[r][j] -= f * a[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
        let cross: Vec<f64> = (0..m).map(|i| joint[3][i]).collect();
        let mut w = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                w[i] += inv[i][j] * cross[j];
            }
        }
        let mean_oracle: f64 = w.iter().zip(&hist).map(|(a, b)| a * b).sum();
        let var_oracle = joint[3][3] - w.iter().zip(&cross).map(|(a, b)| a * b).sum::<f64>();

        assert_relative_eq!(p.mean, mean_oracle, epsilon = 1e-9);
        assert_relative_eq!(p.variance, var_oracle, epsilon = 1e-9);
    }

    #[test]
    fn predictive_variance_never_below_noise() {
        let kern = k(2.0, 4.0, 0.3);
        let hist: Vec<f64> = (0..40).map(|i| ((i as f64) * 0.7).sin()).collect();
        for m in 1..=hist.len() {
            let p = posterior_predictive(&kern, &hist[..m], m + 1).unwrap();
            assert!(p.variance >= kern.noise_variance - 1e-10);
        }
    }

    #[test]
    fn fit_from_local_optimum_stays_put() {
        let kern = k(1.0, 3.0, 0.2);
        let vals: Vec<f64> = (0..30).map(|i| ((i as f64) * 0.4).sin()).collect();
        let series = Series::new(vals).unwrap();
        // Converge tightly first, so the refit starts at a local optimum.
        let tight = FitConfig {
            tol: 1e-12,
            max_iters: 2000,
            ..FitConfig::default()
        };
        let cfg = FitConfig::default();
        let first = fit_hyperparameters(&series, &kern, &tight).unwrap();
        let second = fit_hyperparameters(&series, &first.kernel, &cfg).unwrap();
        assert!((second.kernel.signal_variance - first.kernel.signal_variance).abs() < 1e-4);
        assert!((second.kernel.length_scale - first.kernel.length_scale).abs() < 1e-4);
        assert!((second.kernel.noise_variance - first.kernel.noise_variance).abs() < 1e-4);
        assert!(second.log_marginal >= first.log_marginal);
    }

    #[test]
    fn fit_constant_zero_series_drives_signal_down() {
        let series = Series::new(vec![0.0; 50]).unwrap();
        let cfg = FitConfig::default();
        let fit = fit_hyperparameters(&series, &k(1.0, 3.0, 0.5), &cfg).unwrap();
        assert!(fit.kernel.signal_variance < 1e-2);
        assert!(fit.log_marginal >= log_marginal_likelihood(&k(1.0, 3.0, 0.5), &series).unwrap());
    }
}
