//! Kernel evaluation and covariance assembly, including the per-candidate
//! alternative covariances for each change family.
//!
//! Time indices are unit-spaced integers `1..=n`. A candidate `t` splits the
//! series so that `x_t` is the first point of the new regime: the first
//! regime covers indices `< t`, the second `>= t`. The scaled-covariance
//! family is the one exception — its closed-form scale estimate is derived
//! for blocks `1..=t` and `t+1..=n`, so that family scales the trailing
//! `n - t` indices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    Rbf,
}

/// RBF kernel hyperparameters plus the white observation-noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub signal_variance: f64,
    pub length_scale: f64,
    pub noise_variance: f64,
}

impl KernelSpec {
    pub fn rbf(signal_variance: f64, length_scale: f64, noise_variance: f64) -> Result<Self> {
        let spec = KernelSpec {
            family: KernelFamily::Rbf,
            signal_variance,
            length_scale,
            noise_variance,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.signal_variance > 0.0) || !self.signal_variance.is_finite() {
            return Err(Error::invalid("kernel", "signal_variance must be > 0"));
        }
        if !(self.length_scale > 0.0) || !self.length_scale.is_finite() {
            return Err(Error::invalid("kernel", "length_scale must be > 0"));
        }
        if !(self.noise_variance >= 0.0) || !self.noise_variance.is_finite() {
            return Err(Error::invalid("kernel", "noise_variance must be >= 0"));
        }
        Ok(())
    }

    /// Noise-free kernel value at integer lag `d`.
    #[inline]
    pub fn value_at_lag(&self, d: f64) -> f64 {
        let l = self.length_scale;
        self.signal_variance * (-d * d / (2.0 * l * l)).exp()
    }
}

/// Covariance matrix of `n` unit-spaced observations under `k`, observation
/// noise included on the diagonal.
pub fn covariance_matrix(k: &KernelSpec, n: usize) -> Result<SymMatrix> {
    let mut m = SymMatrix::from_fn(n, |i, j| k.value_at_lag(i as f64 - j as f64))?;
    m.add_diagonal(k.noise_variance);
    Ok(m)
}

/// Cross-block choice for the general change family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossKernel {
    Zero,
    Kernel(KernelSpec),
}

/// Scale of the trailing block in the scaled-covariance family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleParam {
    Fixed(f64),
    ToEstimate,
}

/// A family of alternative hypotheses, one covariance per candidate index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChangeFamily {
    /// Kernel `pre` below the candidate, `post` at and above it, `cross`
    /// in the off-diagonal block.
    GeneralChange {
        pre: KernelSpec,
        post: KernelSpec,
        cross: CrossKernel,
    },
    /// Two independent segments: `pre` then `post`, zero cross-covariance.
    StructuralBreak { pre: KernelSpec, post: KernelSpec },
    /// White series whose total variance switches from `pre_variance` to
    /// `post_variance`; `noise_variance` is added on the whole diagonal.
    VarianceOnly {
        pre_variance: f64,
        post_variance: f64,
        noise_variance: f64,
    },
    /// Null covariance with the trailing block scaled: rows and columns
    /// past index `t` are multiplied by `alpha` (so the trailing diagonal
    /// block picks up `alpha^2`).
    ScaledCovariance { base: KernelSpec, scale: ScaleParam },
}

impl ChangeFamily {
    pub fn validate(&self) -> Result<()> {
        match self {
            ChangeFamily::GeneralChange { pre, post, cross } => {
                pre.validate()?;
                post.validate()?;
                if let CrossKernel::Kernel(k) = cross {
                    k.validate()?;
                }
                Ok(())
            }
            ChangeFamily::StructuralBreak { pre, post } => {
                pre.validate()?;
                post.validate()
            }
            ChangeFamily::VarianceOnly {
                pre_variance,
                post_variance,
                noise_variance,
            } => {
                if !(*pre_variance > 0.0) || !(*post_variance > 0.0) {
                    return Err(Error::invalid("change family", "variances must be > 0"));
                }
                if !(*noise_variance >= 0.0) {
                    return Err(Error::invalid("change family", "noise must be >= 0"));
                }
                Ok(())
            }
            ChangeFamily::ScaledCovariance { base, scale } => {
                base.validate()?;
                if let ScaleParam::Fixed(a) = scale {
                    if !(*a > 0.0) || !a.is_finite() {
                        return Err(Error::invalid("change family", "scale must be > 0"));
                    }
                }
                Ok(())
            }
        }
    }

    /// Observation-noise variance shared by the null and every alternative.
    pub fn noise_variance(&self) -> f64 {
        match self {
            ChangeFamily::GeneralChange { pre, .. } => pre.noise_variance,
            ChangeFamily::StructuralBreak { pre, .. } => pre.noise_variance,
            ChangeFamily::VarianceOnly { noise_variance, .. } => *noise_variance,
            ChangeFamily::ScaledCovariance { base, .. } => base.noise_variance,
        }
    }

    /// Covariance of the series under the null hypothesis.
    pub fn null_covariance(&self, n: usize) -> Result<SymMatrix> {
        match self {
            ChangeFamily::GeneralChange { pre, .. }
            | ChangeFamily::StructuralBreak { pre, .. } => covariance_matrix(pre, n),
            ChangeFamily::VarianceOnly {
                pre_variance,
                noise_variance,
                ..
            } => SymMatrix::from_diag(&vec![pre_variance + noise_variance; n]),
            ChangeFamily::ScaledCovariance { base, .. } => covariance_matrix(base, n),
        }
    }

    /// Covariance under the alternative hypothesis with candidate `t`
    /// (1-based, `1 < t <= n`).
    pub fn alternative_covariance(&self, n: usize, t: usize) -> Result<SymMatrix> {
        if t <= 1 || t > n {
            return Err(Error::CandidateOutOfRange { t, lo: 1, hi: n });
        }
        let split = t - 1; // first 0-based index of the new regime
        match self {
            ChangeFamily::GeneralChange { pre, post, cross } => {
                let mut m = SymMatrix::from_fn(n, |i, j| {
                    let d = i as f64 - j as f64;
                    if i < split && j < split {
                        pre.value_at_lag(d)
                    } else if i >= split && j >= split {
                        post.value_at_lag(d)
                    } else {
                        match cross {
                            CrossKernel::Zero => 0.0,
                            CrossKernel::Kernel(k) => k.value_at_lag(d),
                        }
                    }
                })?;
                m.add_diagonal(pre.noise_variance);
                Ok(m)
            }
            ChangeFamily::StructuralBreak { pre, post } => {
                let mut m = SymMatrix::from_fn(n, |i, j| {
                    let d = i as f64 - j as f64;
                    if i < split && j < split {
                        pre.value_at_lag(d)
                    } else if i >= split && j >= split {
                        post.value_at_lag(d)
                    } else {
                        0.0
                    }
                })?;
                m.add_diagonal(pre.noise_variance);
                Ok(m)
            }
            ChangeFamily::VarianceOnly {
                pre_variance,
                post_variance,
                noise_variance,
            } => {
                let diag: Vec<f64> = (0..n)
                    .map(|i| {
                        let v = if i < split { *pre_variance } else { *post_variance };
                        v + noise_variance
                    })
                    .collect();
                SymMatrix::from_diag(&diag)
            }
            ChangeFamily::ScaledCovariance { base, scale } => {
                let alpha = match scale {
                    ScaleParam::Fixed(a) => *a,
                    ScaleParam::ToEstimate => {
                        return Err(Error::invalid(
                            "change family",
                            "scale must be resolved before assembling the covariance",
                        ))
                    }
                };
                let sigma = covariance_matrix(base, n)?;
                scaled_covariance(&sigma, t, alpha)
            }
        }
    }

    /// Alternative covariance with the post-change structure over the whole
    /// window (the extreme candidate); used for the eigenvalue bound behind
    /// the theoretical thresholds.
    pub fn full_alternative_covariance(&self, n: usize) -> Result<SymMatrix> {
        match self {
            ChangeFamily::GeneralChange { pre, post, .. }
            | ChangeFamily::StructuralBreak { pre, post } => {
                let mut m = SymMatrix::from_fn(n, |i, j| post.value_at_lag(i as f64 - j as f64))?;
                m.add_diagonal(pre.noise_variance);
                Ok(m)
            }
            ChangeFamily::VarianceOnly {
                post_variance,
                noise_variance,
                ..
            } => SymMatrix::from_diag(&vec![post_variance + noise_variance; n]),
            ChangeFamily::ScaledCovariance { base, scale } => {
                let alpha = match scale {
                    ScaleParam::Fixed(a) => *a,
                    ScaleParam::ToEstimate => 1.0,
                };
                let mut m = covariance_matrix(base, n)?;
                for i in 0..n {
                    for j in 0..=i {
                        m.set(i, j, m.get(i, j) * alpha * alpha);
                    }
                }
                Ok(m)
            }
        }
    }
}

/// Scales rows and columns of `sigma` past the (1-based) candidate `t`:
/// result = D sigma D with D = diag(1,...,1, alpha,...,alpha), where the
/// first block covers indices `1..=t`.
pub(crate) fn scaled_covariance(sigma: &SymMatrix, t: usize, alpha: f64) -> Result<SymMatrix> {
    let n = sigma.order();
    SymMatrix::from_fn(n, |i, j| {
        let fi = if i >= t { alpha } else { 1.0 };
        let fj = if j >= t { alpha } else { 1.0 };
        fi * fj * sigma.get(i, j)
    })
}

/// Gradients of the covariance matrix with respect to (signal variance,
/// length scale, noise variance), in that order.
pub fn kernel_gradients(k: &KernelSpec, n: usize) -> Result<[SymMatrix; 3]> {
    let l = k.length_scale;
    let d_signal = SymMatrix::from_fn(n, |i, j| {
        let d = i as f64 - j as f64;
        (-d * d / (2.0 * l * l)).exp()
    })?;
    let d_length = SymMatrix::from_fn(n, |i, j| {
        let d = i as f64 - j as f64;
        k.signal_variance * (-d * d / (2.0 * l * l)).exp() * d * d / (l * l * l)
    })?;
    let d_noise = SymMatrix::identity(n)?;
    Ok([d_signal, d_length, d_noise])
}
