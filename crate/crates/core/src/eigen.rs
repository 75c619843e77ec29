//! Full eigendecomposition of symmetric tridiagonal matrices.
//!
//! Implicit QL iteration with Wilkinson-type shifts. Plane rotations are
//! accumulated into column-major eigenvector storage so every update touches
//! two contiguous columns.

use crate::error::{Error, Result};
use crate::hamiltonian::TridiagonalHamiltonian;

/// Residual tolerance relative to `max|diag| + 2 max|offdiag|`.
pub const TOL_REL: f64 = 1e-11;

/// QL sweeps allowed before an eigenvalue is declared non-convergent.
pub const MAX_SWEEPS_PER_EIGENVALUE: usize = 50;

/// Eigenvalues closer than this (times the matrix scale) are treated as one
/// cluster and re-orthogonalized together.
pub const CLUSTER_TOL_REL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct SpectralResult {
    eigenvalues: Vec<f64>,
    // column-major, column i pairs with eigenvalues[i]
    vectors: Vec<f64>,
    n: usize,
    max_residual: f64,
}

impl SpectralResult {
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, i: usize) -> &[f64] {
        &self.vectors[i * self.n..(i + 1) * self.n]
    }

    pub fn eigenvectors(&self) -> impl Iterator<Item = &[f64]> {
        self.vectors.chunks_exact(self.n)
    }

    /// `max_i ||H v_i - lambda_i v_i||_2`.
    pub fn max_residual(&self) -> f64 {
        self.max_residual
    }

    pub fn into_eigenvalues(self) -> Vec<f64> {
        self.eigenvalues
    }
}

/// Eigenvalues ascending with orthonormal eigenvectors.
pub fn eig_all(h: &TridiagonalHamiltonian) -> Result<SpectralResult> {
    let n = h.len();
    let mut d = h.diag().to_vec();
    let mut e = padded_offdiag(h);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        z[i * n + i] = 1.0;
    }
    ql_implicit(&mut d, &mut e, Some(&mut z))?;

    let order = stable_order(&d);
    let eigenvalues: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let mut vectors = Vec::with_capacity(n * n);
    for &i in &order {
        vectors.extend_from_slice(&z[i * n..(i + 1) * n]);
    }
    drop(z);

    let scale = h.scale();
    reorthogonalize_clusters(&eigenvalues, &mut vectors, n, CLUSTER_TOL_REL * scale);

    let max_residual = eigenvalues
        .iter()
        .zip(vectors.chunks_exact(n))
        .map(|(&lambda, v)| residual_norm(h, lambda, v))
        .fold(0.0f64, f64::max);
    let bound = TOL_REL * scale;
    if max_residual > bound {
        return Err(Error::ResidualBound {
            residual: max_residual,
            bound,
        });
    }

    Ok(SpectralResult {
        eigenvalues,
        vectors,
        n,
        max_residual,
    })
}

/// Eigenvalues only, ascending. Runs the same QL iteration as [`eig_all`]
/// without accumulating rotations, so the values agree bit for bit.
pub fn eig_values_only(h: &TridiagonalHamiltonian) -> Result<Vec<f64>> {
    let mut d = h.diag().to_vec();
    let mut e = padded_offdiag(h);
    ql_implicit(&mut d, &mut e, None)?;
    let order = stable_order(&d);
    Ok(order.iter().map(|&i| d[i]).collect())
}

fn padded_offdiag(h: &TridiagonalHamiltonian) -> Vec<f64> {
    let mut e = h.offdiag().to_vec();
    e.push(0.0);
    e
}

fn stable_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    order
}

/// Implicit QL on `(d, e)` where `e[i]` couples rows `i` and `i + 1` and
/// `e[n-1]` is scratch. On return `d` holds the (unsorted) eigenvalues.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut sweeps = 0;
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
            sweeps += 1;
            if sweeps > MAX_SWEEPS_PER_EIGENVALUE {
                return Err(Error::NoConvergence { index: l });
            }

            // Wilkinson shift from the leading 2x2 block.
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));

            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;

                if let Some(z) = z.as_deref_mut() {
                    rotate_columns(z, n, i, c, s);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

#[inline]
fn rotate_columns(z: &mut [f64], n: usize, i: usize, c: f64, s: f64) {
    let (left, right) = z.split_at_mut((i + 1) * n);
    let col_i = &mut left[i * n..];
    let col_j = &mut right[..n];
    for (zi, zj) in col_i.iter_mut().zip(col_j.iter_mut()) {
        let f = *zj;
        *zj = s * *zi + c * f;
        *zi = c * *zi - s * f;
    }
}

fn reorthogonalize_clusters(values: &[f64], vectors: &mut [f64], n: usize, tol: f64) {
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            modified_gram_schmidt(&mut vectors[start * n..end * n], n);
        }
        start = end;
    }
}

fn modified_gram_schmidt(block: &mut [f64], n: usize) {
    let k = block.len() / n;
    for j in 0..k {
        let (done, rest) = block.split_at_mut(j * n);
        let v = &mut rest[..n];
        for q in done.chunks_exact(n) {
            let proj: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= proj * qi;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            v.iter_mut().for_each(|x| *x /= norm);
        }
    }
}

fn residual_norm(h: &TridiagonalHamiltonian, lambda: f64, v: &[f64]) -> f64 {
    let d = h.diag();
    let e = h.offdiag();
    let n = v.len();
    let mut sum = 0.0;
    for i in 0..n {
        let mut r = (d[i] - lambda) * v[i];
        if i > 0 {
            r += e[i - 1] * v[i - 1];
        }
        if i + 1 < n {
            r += e[i] * v[i + 1];
        }
        sum += r * r;
    }
    sum.sqrt()
}
