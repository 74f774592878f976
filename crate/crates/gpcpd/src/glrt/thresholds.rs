//! Theoretical test thresholds from the subgaussian concentration bound.
//!
//! With the statistic's null expectation `n - tr(Sigma (Sigma'_t)^{-1}) +
//! ln(|Sigma|/|Sigma'_t|)` and alternative expectation
//! `tr(Sigma'_t Sigma^{-1}) - n + ln(|Sigma|/|Sigma'_t|)`, the thresholds
//! add or subtract the deviation term `C0 V^2 n sqrt(0.5 ln(2/delta))`,
//! where `C0` bounds `1/lambda_min(Sigma) + 1/lambda_min(Sigma'_t)` over
//! all candidates via eigenvalue interlacing.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::glrt::CandidateSet;
use crate::kernels::ChangeFamily;
use crate::linalg::{cholesky, sym_eigenvalues, trace_product_inv};

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThresholdSpec {
    pub delta: f64,
    /// Assumed bound `|x_t| <= V`.
    pub bound_v: f64,
    /// Eigenvalue constant dominating the subgaussian scale.
    pub c0: f64,
    pub r_h0: f64,
    pub r_h1: f64,
}

impl ThresholdSpec {
    /// True when some threshold can control both error types
    /// (`r_h0 <= r_h1`).
    pub fn has_valid_range(&self) -> bool {
        self.r_h0 <= self.r_h1
    }
}

pub fn theoretical_thresholds(
    family: &ChangeFamily,
    n: usize,
    delta: f64,
    bound_v: f64,
    cands: &CandidateSet,
) -> Result<ThresholdSpec> {
    family.validate()?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("delta", "must lie in (0, 1)"));
    }
    if !(bound_v > 0.0) {
        return Err(Error::invalid("bound V", "must be > 0"));
    }
    if cands.series_len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: cands.series_len(),
        });
    }

    let sigma = family.null_covariance(n)?;
    let f0 = cholesky(&sigma)?;
    let ld0 = f0.log_det();

    let mut term_h0 = f64::NEG_INFINITY;
    let mut term_h1 = f64::INFINITY;
    for &t in cands.indices() {
        let alt = family.alternative_covariance(n, t)?;
        let f_t = cholesky(&alt)?;
        let log_ratio = ld0 - f_t.log_det();
        let tr_null = trace_product_inv(&sigma, &f_t)?;
        let tr_alt = trace_product_inv(&alt, &f0)?;
        term_h0 = term_h0.max(n as f64 - tr_null + log_ratio);
        term_h1 = term_h1.min(tr_alt - n as f64 + log_ratio);
    }

    let lam_null = sym_eigenvalues(&sigma)?[0];
    let lam_alt_full = sym_eigenvalues(&family.full_alternative_covariance(n)?)?[0];
    let c0 = 1.0 / lam_null + 1.0 / lam_null.min(lam_alt_full);
    let deviation = c0 * bound_v * bound_v * n as f64 * (0.5 * (2.0 / delta).ln()).sqrt();

    Ok(ThresholdSpec {
        delta,
        bound_v,
        c0,
        r_h0: term_h0 + deviation,
        r_h1: term_h1 - deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{covariance_matrix, ChangeFamily, CrossKernel, KernelSpec};
    use approx::assert_relative_eq;

    fn k(sv: f64, l: f64, nv: f64) -> KernelSpec {
        KernelSpec::rbf(sv, l, nv).unwrap()
    }

    #[test]
    fn identical_alternative_leaves_only_the_deviation_term() {
        let kern = k(1.0, 2.0, 0.1);
        let fam = ChangeFamily::GeneralChange {
            pre: kern,
            post: kern,
            cross: CrossKernel::Kernel(kern),
        };
        let n = 12;
        let cands = CandidateSet::new(n).unwrap();
        let spec = theoretical_thresholds(&fam, n, 0.05, 2.0, &cands).unwrap();
        let sigma = covariance_matrix(&kern, n).unwrap();
        let lam = sym_eigenvalues(&sigma).unwrap()[0];
        let c0 = 2.0 / lam;
        let dev = c0 * 4.0 * n as f64 * (0.5 * (2.0f64 / 0.05).ln()).sqrt();
        assert_relative_eq!(spec.c0, c0, max_relative = 1e-9);
        assert_relative_eq!(spec.r_h0, dev, max_relative = 1e-8);
        assert_relative_eq!(spec.r_h1, -dev, max_relative = 1e-8);
        assert!(!spec.has_valid_range());
    }

    #[test]
    fn delta_near_one_limit_factor() {
        // sqrt(0.5 ln 2) appears as delta -> 1.
        let factor = (0.5 * (2.0f64 / (1.0 - 1e-12)).ln()).sqrt();
        assert_relative_eq!(factor, 0.5887, epsilon = 1e-4);
    }

    #[test]
    fn c0_dominates_every_candidate_constant() {
        // Lemma-style check: C_t <= C0 for all candidates, by direct
        // eigenvalue computation.
        let fam = ChangeFamily::StructuralBreak {
            pre: k(1.0, 3.0, 0.1),
            post: k(2.5, 1.2, 0.1),
        };
        let n = 16;
        let cands = CandidateSet::with_margin(n, 1).unwrap();
        let spec = theoretical_thresholds(&fam, n, 0.1, 1.0, &cands).unwrap();
        let sigma = fam.null_covariance(n).unwrap();
        let lam_null = sym_eigenvalues(&sigma).unwrap()[0];
        for &t in cands.indices() {
            let alt = fam.alternative_covariance(n, t).unwrap();
            let lam_alt = sym_eigenvalues(&alt).unwrap()[0];
            let c_t = 1.0 / lam_null + 1.0 / lam_alt;
            assert!(
                c_t <= spec.c0 * (1.0 + 1e-9),
                "C_t = {c_t} exceeds C0 = {}",
                spec.c0
            );
        }
    }
}
