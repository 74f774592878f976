//! Covariance-change likelihood ratio statistic
//! `2L_t = x' Sigma^{-1} x - x' (Sigma'_t)^{-1} x + ln(|Sigma| / |Sigma'_t|)`
//! maximized over candidates, plus the spectrum characterizing its null and
//! alternative distributions.

use crate::error::Result;
use crate::glrt::closed_form::scaled_alpha_with;
use crate::glrt::{CandidateSet, LrtOutcome};
use crate::gp::Series;
use crate::kernels::{covariance_matrix, ChangeFamily, ScaleParam};
use crate::linalg::{cholesky, sym_eigenvalues, SymMatrix};

/// Per-candidate covariance LRT for any change family. Verdicts are left
/// unset; apply thresholds with [`crate::glrt::run_test`].
///
/// A scaled-covariance family with `ScaleParam::ToEstimate` plugs in the
/// closed-form maximum-likelihood scale per candidate; candidates whose
/// scale estimate has no positive root are skipped.
pub fn cov_lrt(x: &Series, family: &ChangeFamily, cands: &CandidateSet) -> Result<LrtOutcome> {
    family.validate()?;
    let n = x.len();
    if cands.series_len() != n {
        return Err(crate::error::Error::DimensionMismatch {
            expected: n,
            got: cands.series_len(),
        });
    }

    if let ChangeFamily::ScaledCovariance {
        base,
        scale: ScaleParam::ToEstimate,
    } = family
    {
        let sigma = covariance_matrix(base, n)?;
        let f0 = cholesky(&sigma)?;
        let q0 = f0.quad_form(x.values())?;
        let mut stats = Vec::with_capacity(cands.indices().len());
        let mut alphas = Vec::with_capacity(cands.indices().len());
        let mut skipped = Vec::new();
        for &t in cands.indices() {
            match scaled_alpha_with(&f0, x.values(), t) {
                Ok(alpha) => {
                    // (Sigma'_t)^{-1} = D_{1/a} Sigma^{-1} D_{1/a}, so the
                    // alternative quadratic form reuses the null factor.
                    let x_scaled: Vec<f64> = x
                        .values()
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| if i >= t { v / alpha } else { v })
                        .collect();
                    let q_alt = f0.quad_form(&x_scaled)?;
                    let tail = (n - t) as f64;
                    stats.push(q0 - q_alt - 2.0 * tail * alpha.ln());
                    alphas.push(alpha);
                }
                Err(crate::error::Error::NoPositiveRoot { .. }) => {
                    stats.push(f64::NEG_INFINITY);
                    alphas.push(f64::NAN);
                    skipped.push(t);
                }
                Err(e) => return Err(e),
            }
        }
        return Ok(LrtOutcome::from_stats(
            cands.indices().to_vec(),
            stats,
            Some(alphas),
            vec![],
            skipped,
        ));
    }

    let sigma = family.null_covariance(n)?;
    let f0 = cholesky(&sigma)?;
    let q0 = f0.quad_form(x.values())?;
    let ld0 = f0.log_det();
    let mut stats = Vec::with_capacity(cands.indices().len());
    for &t in cands.indices() {
        let alt = family.alternative_covariance(n, t)?;
        let f_t = cholesky(&alt)?;
        stats.push(q0 - f_t.quad_form(x.values())? + ld0 - f_t.log_det());
    }
    Ok(LrtOutcome::from_stats(
        cands.indices().to_vec(),
        stats,
        None,
        vec![],
        vec![],
    ))
}

/// Eigenvalues of `A^{1/2} B^{-1} A^{1/2}`, ascending. Computed as the
/// spectrum of the congruent symmetric matrix `L' B^{-1} L` with
/// `A = L L'`, which shares its eigenvalues.
pub fn lrt_spectrum(a: &SymMatrix, b: &SymMatrix) -> Result<Vec<f64>> {
    let n = a.order();
    if b.order() != n {
        return Err(crate::error::Error::DimensionMismatch {
            expected: n,
            got: b.order(),
        });
    }
    let fa = cholesky(a)?;
    let fb = cholesky(b)?;
    // Columns of B^{-1} L.
    let mut binv_l = vec![vec![0.0; n]; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        for (i, c) in col.iter_mut().enumerate() {
            *c = fa.lower(i, j);
        }
        let s = fb.solve(&col)?;
        for i in 0..n {
            binv_l[i][j] = s[i];
        }
    }
    let m = SymMatrix::from_fn(n, |i, j| {
        (0..n).map(|k| fa.lower(k, i) * binv_l[k][j]).sum::<f64>()
    })?;
    sym_eigenvalues(&m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{CrossKernel, KernelSpec};
    use approx::assert_relative_eq;

    fn k(sv: f64, l: f64, nv: f64) -> KernelSpec {
        KernelSpec::rbf(sv, l, nv).unwrap()
    }

    #[test]
    fn matching_kernels_score_zero() {
        let kern = k(1.2, 2.0, 0.1);
        let fam = ChangeFamily::GeneralChange {
            pre: kern,
            post: kern,
            cross: CrossKernel::Kernel(kern),
        };
        let x = Series::new(vec![0.4, -1.0, 0.8, 0.1, 2.0, -0.3, 0.9, -1.4]).unwrap();
        let cands = CandidateSet::new(8).unwrap();
        let out = cov_lrt(&x, &fam, &cands).unwrap();
        for s in &out.stats {
            assert!(s.abs() < 1e-10, "stat {s} should vanish");
        }
        assert_eq!(out.t_star, *cands.indices().first().unwrap());
    }

    #[test]
    fn zero_series_reduces_to_log_det_curve() {
        let fam = ChangeFamily::StructuralBreak {
            pre: k(1.0, 2.5, 0.1),
            post: k(3.0, 1.0, 0.1),
        };
        let n = 8;
        let x = Series::new(vec![0.0; n]).unwrap();
        let cands = CandidateSet::new(n).unwrap();
        let out = cov_lrt(&x, &fam, &cands).unwrap();
        let sigma = fam.null_covariance(n).unwrap();
        let ld0 = cholesky(&sigma).unwrap().log_det();
        for (i, &t) in cands.indices().iter().enumerate() {
            let alt = fam.alternative_covariance(n, t).unwrap();
            let ld_t = cholesky(&alt).unwrap().log_det();
            assert_relative_eq!(out.stats[i], ld0 - ld_t, epsilon = 1e-10);
        }
    }

    #[test]
    fn spectrum_examples() {
        let eye = SymMatrix::identity(2).unwrap();
        let twice = SymMatrix::from_diag(&[2.0, 2.0]).unwrap();
        let eig = lrt_spectrum(&eye, &twice).unwrap();
        assert_relative_eq!(eig[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(eig[1], 0.5, epsilon = 1e-12);

        // Identical matrices: all ones.
        let m = covariance_matrix(&k(1.5, 2.0, 0.2), 5).unwrap();
        for v in lrt_spectrum(&m, &m).unwrap() {
            assert_relative_eq!(v, 1.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn spectrum_is_positive_and_matches_trace_identity() {
        let a = covariance_matrix(&k(1.0, 3.0, 0.1), 6).unwrap();
        let fam = ChangeFamily::StructuralBreak {
            pre: k(1.0, 3.0, 0.1),
            post: k(2.0, 1.0, 0.1),
        };
        let b = fam.alternative_covariance(6, 4).unwrap();
        let eig = lrt_spectrum(&a, &b).unwrap();
        assert!(eig.iter().all(|&v| v > 0.0));
        // sum of eigenvalues of A B^{-1} equals tr(A B^{-1}).
        let fb = cholesky(&b).unwrap();
        let tr = crate::linalg::trace_product_inv(&a, &fb).unwrap();
        assert_relative_eq!(eig.iter().sum::<f64>(), tr, max_relative = 1e-8);
    }
}
