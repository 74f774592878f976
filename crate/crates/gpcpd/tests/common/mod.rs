//! Test-only oracles, deliberately independent of the library's
//! factorization paths: Gauss-Jordan inverses, LU and cofactor
//! determinants, a direct multivariate-normal log density, golden-section
//! maximization, and a two-sample Kolmogorov-Smirnov statistic.

#![allow(dead_code)]

use gpcpd::linalg::SymMatrix;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn test_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn sym_to_rows(m: &SymMatrix) -> Vec<Vec<f64>> {
    (0..m.order()).map(|i| m.row(i).to_vec()).collect()
}

/// Gauss-Jordan inverse with partial pivoting.
pub fn gauss_jordan_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut inv: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for col in 0..n {
        let piv_row = (col..n)
            .max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv_row);
        inv.swap(col, piv_row);
        let piv = m[col][col];
        assert!(piv.abs() > 0.0, "singular matrix in oracle inverse");
        for j in 0..n {
            m[col][j] /= piv;
            inv[col][j] /= piv;
        }
        for r in 0..n {
            if r != col {
                let f = m[r][col];
                if f != 0.0 {
                    for j in 0..n {
                        m[r][j] -= f * m[col][j];
                        inv[r][j] -= f * inv[col][j];
                    }
                }
            }
        }
    }
    inv
}

/// Determinant via LU elimination with partial pivoting.
pub fn lu_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut m: Vec<Vec<f64>> = a.to_vec();
    let mut det = 1.0;
    for col in 0..n {
        let piv_row = (col..n)
            .max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())
            .unwrap();
        if piv_row != col {
            m.swap(col, piv_row);
            det = -det;
        }
        let piv = m[col][col];
        if piv == 0.0 {
            return 0.0;
        }
        det *= piv;
        for r in (col + 1)..n {
            let f = m[r][col] / piv;
            if f != 0.0 {
                for j in col..n {
                    m[r][j] -= f * m[col][j];
                }
            }
        }
    }
    det
}

/// Determinant by cofactor expansion along the first row (n <= 7).
pub fn cofactor_det(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    let mut det = 0.0;
    for j in 0..n {
        let minor: Vec<Vec<f64>> = (1..n)
            .map(|r| {
                (0..n)
                    .filter(|&c| c != j)
                    .map(|c| a[r][c])
                    .collect::<Vec<f64>>()
            })
            .collect();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        det += sign * a[0][j] * cofactor_det(&minor);
    }
    det
}

/// Zero-mean multivariate normal log density from explicit inverses, no
/// Cholesky anywhere.
pub fn mvn_log_density(x: &[f64], cov: &[Vec<f64>]) -> f64 {
    let n = x.len();
    let inv = gauss_jordan_inverse(cov);
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += x[i] * inv[i][j] * x[j];
        }
    }
    let log_det = lu_det(cov).ln();
    -0.5 * (quad + log_det + n as f64 * (2.0 * std::f64::consts::PI).ln())
}

/// Smallest eigenvalue bound check helper: quadratic form x'Ax.
pub fn quad(a: &[Vec<f64>], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            s += x[i] * a[i][j] * x[j];
        }
    }
    s
}

/// Golden-section search for the maximizer of a unimodal function.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - phi * (hi - lo);
    let mut d = lo + phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    b.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        let fa = i as f64 / a.len() as f64;
        let fb = j as f64 / b.len() as f64;
        d = d.max((fa - fb).abs());
    }
    d
}

/// Draws x ~ N(0, cov) using the oracle-side lower factor obtained by
/// plain (unpivoted) Cholesky on row vectors.
pub fn sample_mvn(cov: &[Vec<f64>], rng: &mut impl Rng) -> Vec<f64> {
    let n = cov.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut d = cov[j][j];
        for k in 0..j {
            d -= l[j][k] * l[j][k];
        }
        assert!(d > 0.0, "oracle sampler needs a positive definite matrix");
        l[j][j] = d.sqrt();
        for i in (j + 1)..n {
            let mut s = cov[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k];
            }
            l[i][j] = s / l[j][j];
        }
    }
    let z: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    (0..n)
        .map(|i| (0..=i).map(|k| l[i][k] * z[k]).sum())
        .collect()
}
