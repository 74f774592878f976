//! Scoring of one-step-ahead predictions (negative log likelihood and
//! squared error with confidence intervals) and the paired one-sided t-test
//! used to compare detectors across seeded runs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gp::{PredictiveGaussian, Series};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScoreSummary {
    /// Mean negative log predictive likelihood, nats per point.
    pub mean_nll: f64,
    pub mean_mse: f64,
    /// Half-widths of the 95% confidence intervals.
    pub ci95_nll: f64,
    pub ci95_mse: f64,
    pub n_points: usize,
}

fn mean_and_ci(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, 1.96 * var.sqrt() / n.sqrt())
}

/// Scores a predictive trace against the realized series over the 1-based
/// inclusive range `[start, end]`.
pub fn score(
    predictives: &[PredictiveGaussian],
    actual: &Series,
    start: usize,
    end: usize,
) -> Result<ScoreSummary> {
    if predictives.len() != actual.len() {
        return Err(Error::Misalignment(format!(
            "{} predictions for {} observations",
            predictives.len(),
            actual.len()
        )));
    }
    if start < 1 || end > actual.len() || start > end {
        return Err(Error::invalid(
            "eval range",
            format!("[{start}, {end}] out of 1..={}", actual.len()),
        ));
    }
    let mut nll = Vec::with_capacity(end - start + 1);
    let mut mse = Vec::with_capacity(end - start + 1);
    for t in start..=end {
        let p = &predictives[t - 1];
        let x = actual.values()[t - 1];
        nll.push(-p.log_density(x));
        let d = x - p.mean;
        mse.push(d * d);
    }
    let (mean_nll, ci95_nll) = mean_and_ci(&nll);
    let (mean_mse, ci95_mse) = mean_and_ci(&mse);
    Ok(ScoreSummary {
        mean_nll,
        mean_mse,
        ci95_nll,
        ci95_mse,
        n_points: nll.len(),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PairedComparison {
    /// Mean of `a - b` over paired runs.
    pub mean_difference: f64,
    pub t_stat: f64,
    /// One-sided p-value for the alternative `mean(a) < mean(b)`.
    pub p_value: f64,
    pub n_runs: usize,
}

/// Paired one-sided t-test on per-run scores, runs paired by seed. Small
/// p-values support "a scores lower than b".
pub fn paired_compare(a: &[f64], b: &[f64]) -> Result<PairedComparison> {
    if a.len() != b.len() {
        return Err(Error::Misalignment(format!(
            "paired lists of lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientRuns(a.len()));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    let sd = var.sqrt();
    if sd == 0.0 {
        // Degenerate t statistic: all differences identical.
        let p = if mean < 0.0 {
            0.0
        } else if mean > 0.0 {
            1.0
        } else {
            0.5
        };
        return Ok(PairedComparison {
            mean_difference: mean,
            t_stat: if mean == 0.0 {
                0.0
            } else {
                mean.signum() * f64::INFINITY
            },
            p_value: p,
            n_runs: a.len(),
        });
    }
    let t = mean / (sd / n.sqrt());
    Ok(PairedComparison {
        mean_difference: mean,
        t_stat: t,
        p_value: student_t_cdf(t, n - 1.0),
        n_runs: a.len(),
    })
}

/// CDF of Student's t distribution via the regularized incomplete beta
/// function.
pub fn student_t_cdf(t: f64, dof: f64) -> f64 {
    let x = dof / (dof + t * t);
    let tail = 0.5 * reg_inc_beta(0.5 * dof, 0.5, x);
    if t >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos approximation, g = 5, n = 6.
    const COEF: [f64; 6] = [
        76.180_091_729_471_46,
        -86.505_320_329_416_77,
        24.014_098_240_830_91,
        -1.231_739_572_450_155,
        0.120_865_097_386_617_5e-2,
        -0.539_523_938_495_3e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000_000_000_190_015;
    for c in COEF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.506_628_274_631_000_5 * ser / x).ln()
}

/// Regularized incomplete beta function `I_x(a, b)` by continued fraction.
fn reg_inc_beta(a: f64, b: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (1.0 - x).ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, 1.0 - x) / b
    }
}

/// Lentz's continued fraction for the incomplete beta function.
fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    const MAX_IT: usize = 300;
    const EPS: f64 = 1e-15;
    const FPMIN: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_IT {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}
