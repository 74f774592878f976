//! Generalized likelihood ratio test for a single jump in the mean of a GP
//! with known covariance.

use crate::error::Result;
use crate::glrt::{run_test, CandidateSet, LrtOutcome};
use crate::gp::Series;
use crate::linalg::{cholesky, SymMatrix};

/// Threshold `R_{n,delta} = 1 + 2 [ln(2n/delta) + sqrt(ln(2n/delta))]`.
pub fn mean_threshold(n: usize, delta: f64) -> f64 {
    let g = (2.0 * n as f64 / delta).ln();
    1.0 + 2.0 * (g + g.sqrt())
}

/// Mean-change GLRT. The statistic at candidate `t` is
/// `|zeta_t' Sigma^{-1} x|^2 / (zeta_t' Sigma^{-1} zeta_t)` with the step
/// pattern `zeta_t(k) = sign(k - t)` (zero at the candidate itself). A
/// single threshold is used for both verdict bits, so the combined verdict
/// is always Change or NoChange.
pub fn mean_glrt(
    x: &Series,
    sigma: &SymMatrix,
    cands: &CandidateSet,
    delta: f64,
) -> Result<LrtOutcome> {
    let n = x.len();
    if sigma.order() != n {
        return Err(crate::error::Error::DimensionMismatch {
            expected: n,
            got: sigma.order(),
        });
    }
    let f = cholesky(sigma)?;
    let w = f.solve(x.values())?;
    let mut stats = Vec::with_capacity(cands.indices().len());
    for &t in cands.indices() {
        let zeta: Vec<f64> = (1..=n)
            .map(|k| (k as f64 - t as f64).signum() * if k == t { 0.0 } else { 1.0 })
            .collect();
        let num: f64 = zeta.iter().zip(&w).map(|(z, wi)| z * wi).sum();
        let den = f.quad_form(&zeta)?;
        stats.push(num * num / den);
    }
    let outcome = LrtOutcome::from_stats(cands.indices().to_vec(), stats, None, vec![], vec![]);
    let r = mean_threshold(n, delta);
    Ok(run_test(outcome, r, r))
}
