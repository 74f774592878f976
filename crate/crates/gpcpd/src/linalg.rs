//! Dense symmetric linear algebra: Cholesky factorization with a jitter
//! ladder, triangular solves, quadratic forms, and a symmetric eigensolver
//! (Householder tridiagonalization followed by implicit-shift QL).
//!
//! Matrix orders here are bounded by detection window sizes, so everything
//! is stored dense and computed without blocking.

use crate::error::{Error, Result};

/// Dense symmetric matrix. Construction keeps the two triangles identical.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn zeros(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("matrix order", "order must be >= 1"));
        }
        Ok(SymMatrix {
            n,
            data: vec![0.0; n * n],
        })
    }

    pub fn identity(n: usize) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        Ok(m)
    }

    pub fn from_diag(diag: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        for (i, &v) in diag.iter().enumerate() {
            m.data[i * m.n + i] = v;
        }
        Ok(m)
    }

    /// Builds the matrix from `f(i, j)` evaluated on the lower triangle and
    /// mirrored, so the result is symmetric by construction.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        Ok(m)
    }

    /// Builds from explicit rows, rejecting anything that is not exactly
    /// symmetric.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix order", "order must be >= 1"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::invalid(
                        "symmetric matrix",
                        format!("entries ({i},{j}) and ({j},{i}) differ"),
                    ));
                }
            }
        }
        let mut m = Self::zeros(n)?;
        for i in 0..n {
            m.data[i * n..(i + 1) * n].copy_from_slice(&rows[i]);
        }
        Ok(m)
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    /// Sets both `(i, j)` and `(j, i)`.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            self.data[i * self.n + i] += v;
        }
    }

    pub fn mat_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect())
    }
}

/// Lower-triangular Cholesky factor of a (possibly jittered) SPD matrix.
#[derive(Debug, Clone)]
pub struct SpdFactorization {
    n: usize,
    /// Row-major lower triangle; entries above the diagonal are zero.
    lower: Vec<f64>,
    jitter: f64,
}

/// Multipliers applied to the base jitter `1e-10 * trace / n`.
const JITTER_LADDER: [f64; 4] = [1.0, 10.0, 100.0, 1000.0];

/// Cholesky factorization with a diagonal jitter ladder. The plain
/// factorization is attempted first; if a pivot fails, increasing multiples
/// of `1e-10 * trace / n` are added to the diagonal until one succeeds.
pub fn cholesky(m: &SymMatrix) -> Result<SpdFactorization> {
    let n = m.order();
    let base = 1e-10 * m.trace() / n as f64;
    // A zero-trace matrix still deserves a nonzero ladder rung.
    let base = if base > 0.0 { base } else { 1e-10 };
    let mut max_tried = 0.0;
    for jitter in std::iter::once(0.0).chain(JITTER_LADDER.iter().map(|k| k * base)) {
        max_tried = jitter;
        if let Some(lower) = try_cholesky(m, jitter) {
            return Ok(SpdFactorization { n, lower, jitter });
        }
    }
    Err(Error::NotPositiveDefinite {
        max_jitter: max_tried,
    })
}

fn try_cholesky(m: &SymMatrix, jitter: f64) -> Option<Vec<f64>> {
    let n = m.order();
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = m.get(j, j) + jitter;
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in (j + 1)..n {
            let mut s = m.get(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Some(l)
}

impl SpdFactorization {
    #[inline]
    pub fn order(&self) -> usize {
        self.n
    }

    /// Jitter added to the diagonal before the factorization succeeded
    /// (zero when the matrix factored as given).
    #[inline]
    pub fn jitter_applied(&self) -> f64 {
        self.jitter
    }

    #[inline]
    pub fn lower(&self, i: usize, j: usize) -> f64 {
        self.lower[i * self.n + j]
    }

    /// Log-determinant of the factored (jittered) matrix.
    pub fn log_det(&self) -> f64 {
        let n = self.n;
        2.0 * (0..n).map(|i| self.lower[i * n + i].ln()).sum::<f64>()
    }

    /// Solves `L y = b` by forward substitution.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: b.len(),
            });
        }
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s -= self.lower[i * n + k] * y[k];
            }
            y[i] = s / self.lower[i * n + i];
        }
        Ok(y)
    }

    /// Solves the full system `M x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let mut x = self.solve_lower(b)?;
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= self.lower[k * n + i] * x[k];
            }
            x[i] = s / self.lower[i * n + i];
        }
        Ok(x)
    }

    /// Quadratic form `x^T M^{-1} x`, computed as the squared norm of the
    /// forward-substitution image so it is nonnegative by construction.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        let y = self.solve_lower(x)?;
        Ok(y.iter().map(|v| v * v).sum())
    }

    /// Multiplies the lower factor into a vector (`L z`), e.g. for turning
    /// standard normals into a correlated Gaussian sample.
    pub fn lower_times(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: z.len(),
            });
        }
        let n = self.n;
        Ok((0..n)
            .map(|i| {
                (0..=i)
                    .map(|k| self.lower[i * n + k] * z[k])
                    .sum::<f64>()
            })
            .collect())
    }
}

/// Trace of `A B^{-1}` via column solves against the factorization of `B`.
pub fn trace_product_inv(a: &SymMatrix, b: &SpdFactorization) -> Result<f64> {
    if a.order() != b.order() {
        return Err(Error::DimensionMismatch {
            expected: b.order(),
            got: a.order(),
        });
    }
    let n = a.order();
    let mut tr = 0.0;
    for i in 0..n {
        let y = b.solve(a.row(i))?;
        tr += y[i];
    }
    Ok(tr)
}

/// All eigenvalues of a symmetric matrix, ascending. Householder reduction
/// to tridiagonal form, then QL with implicit shifts; total sweep count is
/// capped at `30 n`.
pub fn sym_eigenvalues(m: &SymMatrix) -> Result<Vec<f64>> {
    let n = m.order();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| m.row(i).to_vec()).collect();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut a, &mut d, &mut e);
    ql_implicit(&mut d, &mut e, 30 * n)?;
    d.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(d)
}

/// Householder reduction of a symmetric matrix to tridiagonal form,
/// eigenvalues-only variant (no transform accumulation). On return `d`
/// holds the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(a: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a[i][k].abs()).sum();
            if scale == 0.0 {
                e[i] = a[i][l];
            } else {
                for k in 0..=l {
                    a[i][k] /= scale;
                    h += a[i][k] * a[i][k];
                }
                let mut f = a[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a[i][l] = f - g;
                f = 0.0;
                for j in 0..=l {
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a[j][k] * a[i][k];
                    }
                    for k in (j + 1)..=l {
                        g += a[k][j] * a[i][k];
                    }
                    e[j] = g / h;
                    f += e[j] * a[i][j];
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let fj = a[i][j];
                    let gj = e[j] - hh * fj;
                    e[j] = gj;
                    for k in 0..=j {
                        a[j][k] -= fj * e[k] + gj * a[i][k];
                    }
                }
            }
        } else {
            e[i] = a[i][l];
        }
        d[i] = h;
    }
    e[0] = 0.0;
    for i in 0..n {
        d[i] = a[i][i];
    }
}

/// QL iteration with implicit shifts on a tridiagonal matrix.
fn ql_implicit(d: &mut [f64], e: &mut [f64], max_sweeps: usize) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut total = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            total += 1;
            if total > max_sweeps {
                return Err(Error::ConvergenceFailure(max_sweeps));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut underflowed = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflowed = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                f = (d[i] - g) * s + 2.0 * c * b;
                p = s * f;
                d[i + 1] = g + p;
                g = c * f - b;
            }
            if underflowed {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
