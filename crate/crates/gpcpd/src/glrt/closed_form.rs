//! Closed-form likelihood-ratio statistics: the diagonal variance change
//! (tail variance profiled out) and the maximum-likelihood estimate of the
//! covariance scale.

use crate::error::{Error, Result};
use crate::glrt::{CandidateSet, LrtOutcome};
use crate::gp::Series;
use crate::kernels::{covariance_matrix, KernelSpec};
use crate::linalg::{cholesky, SpdFactorization};

/// Variance-change LRT for a white series with known pre-change variance
/// `a`. Candidate `t` tests the tail `x_{t+1..n}`:
/// `2L_t = sum_{i>t} (x_i^2/a - 1) + (n-t) ln(a (n-t) / sum_{i>t} x_i^2)`,
/// with the profiled tail variance `b_t = mean of squared tail values`
/// reported per candidate. An all-zero tail pins the statistic to `+inf`
/// and flags the candidate as degenerate.
pub fn variance_lrt(x: &Series, a: f64, cands: &CandidateSet) -> Result<LrtOutcome> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid("variance", "pre-change variance must be > 0"));
    }
    let n = x.len();
    if cands.series_len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cands.series_len(),
        });
    }
    let vals = x.values();
    let mut stats = Vec::with_capacity(cands.indices().len());
    let mut bhats = Vec::with_capacity(cands.indices().len());
    let mut degenerate = Vec::new();
    for &t in cands.indices() {
        if n - t < 2 {
            return Err(Error::CandidateOutOfRange {
                t,
                lo: cands.margin(),
                hi: n - 2,
            });
        }
        let tail = &vals[t..];
        let m = tail.len() as f64;
        let s2: f64 = tail.iter().map(|v| v * v).sum();
        if s2 == 0.0 {
            stats.push(f64::INFINITY);
            bhats.push(0.0);
            degenerate.push(t);
            continue;
        }
        bhats.push(s2 / m);
        stats.push((s2 / a - m) + m * (a * m / s2).ln());
    }
    Ok(LrtOutcome::from_stats(
        cands.indices().to_vec(),
        stats,
        Some(bhats),
        degenerate,
        vec![],
    ))
}

/// Maximum-likelihood scale for the scaled-covariance alternative at
/// candidate `t` (leading block `1..=t` unscaled, trailing `n - t` indices
/// scaled): the positive root of `(n-t) a^2 - b a - c = 0` with
/// `b = x_1' B x_2`, `c = x_2' C x_2` taken from the blocks of the null
/// precision matrix.
pub fn scaled_alpha(x: &Series, null_k: &KernelSpec, t: usize) -> Result<f64> {
    let f0 = cholesky(&covariance_matrix(null_k, x.len())?)?;
    scaled_alpha_with(&f0, x.values(), t)
}

pub(crate) fn scaled_alpha_with(f0: &SpdFactorization, x: &[f64], t: usize) -> Result<f64> {
    let n = x.len();
    if t < 1 || t >= n {
        return Err(Error::CandidateOutOfRange { t, lo: 0, hi: n - 1 });
    }
    // One solve against [0; x_2] exposes both precision blocks:
    // Sigma^{-1} [0; x_2] = [B x_2; C x_2].
    let mut tail_only = vec![0.0; n];
    tail_only[t..].copy_from_slice(&x[t..]);
    let z = f0.solve(&tail_only)?;
    let b: f64 = x[..t].iter().zip(&z[..t]).map(|(a, b)| a * b).sum();
    let c: f64 = x[t..].iter().zip(&z[t..]).map(|(a, b)| a * b).sum();
    // C is positive semi-definite, so c < 0 can only be roundoff.
    let c = c.max(0.0);
    let a = (n - t) as f64;
    let alpha = (b + (b * b + 4.0 * a * c).sqrt()) / (2.0 * a);
    if alpha > 0.0 && alpha.is_finite() {
        Ok(alpha)
    } else {
        Err(Error::NoPositiveRoot { t })
    }
}

/// The scaled-covariance statistic at candidate `t` as a function of the
/// scale: `2L_t(alpha) = x'S x - x_a'S x_a - 2(n-t) ln alpha` with
/// `S = Sigma^{-1}` and `x_a` the data with the tail divided by `alpha`.
pub fn scaled_stat_profile(x: &Series, null_k: &KernelSpec, t: usize, alpha: f64) -> Result<f64> {
    let n = x.len();
    if t < 1 || t >= n {
        return Err(Error::CandidateOutOfRange { t, lo: 0, hi: n - 1 });
    }
    if !(alpha > 0.0) {
        return Err(Error::invalid("scale", "alpha must be > 0"));
    }
    let f0 = cholesky(&covariance_matrix(null_k, n)?)?;
    let q0 = f0.quad_form(x.values())?;
    let x_scaled: Vec<f64> = x
        .values()
        .iter()
        .enumerate()
        .map(|(i, &v)| if i >= t { v / alpha } else { v })
        .collect();
    let q_alt = f0.quad_form(&x_scaled)?;
    Ok(q0 - q_alt - 2.0 * (n - t) as f64 * alpha.ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn variance_hand_example() {
        let x = Series::new(vec![0.0, 0.0, 2.0, 2.0]).unwrap();
        let cands = CandidateSet::from_indices(4, 1, vec![2]).unwrap();
        let out = variance_lrt(&x, 1.0, &cands).unwrap();
        let bhat = out.estimates.as_ref().unwrap()[0];
        assert_relative_eq!(bhat, 4.0, epsilon = 1e-12);
        assert_relative_eq!(out.stats[0], 6.0 + 2.0 * (2.0f64 / 8.0).ln(), epsilon = 1e-12);
        assert_relative_eq!(out.stats[0], 3.2274, epsilon = 1e-4);
    }

    #[test]
    fn variance_statistic_vanishes_when_tail_matches() {
        // Tail mean square exactly `a` gives b-hat = a and a zero statistic.
        let a = 2.5f64;
        let s = a.sqrt();
        let x = Series::new(vec![0.3, -0.7, s, -s, s, -s]).unwrap();
        let cands = CandidateSet::from_indices(6, 1, vec![2]).unwrap();
        let out = variance_lrt(&x, a, &cands).unwrap();
        assert_relative_eq!(out.estimates.as_ref().unwrap()[0], a, epsilon = 1e-12);
        assert!(out.stats[0].abs() < 1e-12);
    }

    #[test]
    fn variance_degenerate_tail_is_flagged() {
        let x = Series::new(vec![1.0, -2.0, 3.0, 0.0, 0.0]).unwrap();
        let cands = CandidateSet::from_indices(5, 1, vec![2, 3]).unwrap();
        let out = variance_lrt(&x, 1.0, &cands).unwrap();
        assert_eq!(out.degenerate, vec![3]);
        assert!(out.stats[1].is_infinite());
        assert_eq!(out.t_star, 3);
    }

    #[test]
    fn variance_rejects_short_tail() {
        let x = Series::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let cands = CandidateSet::from_indices(4, 1, vec![3]).unwrap();
        assert!(variance_lrt(&x, 1.0, &cands).is_err());
    }

    #[test]
    fn alpha_closed_form_trivial_cases() {
        // With b = 0 and c = a the root is 1; with c = 4a it is 2.
        // Engineered via an identity covariance and a crafted tail.
        let n = 6;
        let t = 3;
        let a = (n - t) as f64;
        // Identity null: B = 0 block, C = I, so b = 0 and c = |x_2|^2.
        let kern = KernelSpec::rbf(1.0 - 1e-12, 1e-3, 1e-12).unwrap();
        let mut vals = vec![0.5, -0.5, 0.25, 0.0, 0.0, 0.0];
        // c = a
        let v = (a / 3.0).sqrt();
        vals[3] = v;
        vals[4] = v;
        vals[5] = v;
        let alpha = scaled_alpha(&Series::new(vals.clone()).unwrap(), &kern, t).unwrap();
        assert_relative_eq!(alpha, 1.0, epsilon = 1e-6);
        // c = 4a
        let v = (4.0 * a / 3.0).sqrt();
        vals[3] = v;
        vals[4] = v;
        vals[5] = v;
        let alpha = scaled_alpha(&Series::new(vals).unwrap(), &kern, t).unwrap();
        assert_relative_eq!(alpha, 2.0, epsilon = 1e-6);
    }

    #[test]
    fn alpha_zero_tail_has_no_positive_root() {
        let kern = KernelSpec::rbf(1.0, 1e-3, 0.0).unwrap();
        let x = Series::new(vec![1.0, -1.0, 2.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            scaled_alpha(&x, &kern, 3),
            Err(Error::NoPositiveRoot { .. })
        ));
    }

    #[test]
    fn alpha_is_stationary_point_of_profile() {
        let kern = KernelSpec::rbf(1.4, 2.0, 0.1).unwrap();
        let x = Series::new(vec![0.3, 1.1, -0.8, 0.4, 2.0, -1.7, 0.9, 0.2, -0.6, 1.3]).unwrap();
        for t in 2..=8 {
            let alpha = scaled_alpha(&x, &kern, t).unwrap();
            let h = 1e-6 * alpha;
            let up = scaled_stat_profile(&x, &kern, t, alpha + h).unwrap();
            let down = scaled_stat_profile(&x, &kern, t, alpha - h).unwrap();
            let deriv = (up - down) / (2.0 * h);
            assert!(
                deriv.abs() < 1e-6,
                "profile derivative {deriv} at t={t}, alpha={alpha}"
            );
        }
    }
}
