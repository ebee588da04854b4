//! Small dense symmetric positive definite matrices.
//!
//! Everything here is sized for `n <= 8`: matrices are stored row-major in a
//! flat `Vec<f64>` and the eigendecomposition is a cyclic Jacobi sweep with
//! a fixed `(p, q)` visiting order, so results are bit-reproducible.

use crate::error::{Error, Result};

/// Largest supported matrix order.
pub const MAX_DIM: usize = 8;

/// Relative cutoff `lambda_min > SPD_THRESHOLD * lambda_max`.
pub const SPD_THRESHOLD: f64 = 1e-12;

const SYMMETRY_TOL: f64 = 1e-14;
const MAX_SWEEPS: usize = 100;

/// A symmetric positive definite `n x n` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix {
    n: usize,
    entries: Vec<f64>,
}

impl SpdMatrix {
    /// Validates symmetry and positive definiteness.
    ///
    /// Entries whose mirror differs by at most `1e-14` (relative to the
    /// largest entry) are accepted and the lower triangle is overwritten by
    /// the upper one, so the stored matrix is exactly symmetric.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n == 0 || n > MAX_DIM {
            return Err(Error::UnsupportedDimension { n, max: MAX_DIM });
        }
        if entries.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                got: entries.len(),
            });
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidSpec("matrix has non-finite entries".into()));
        }
        let scale = entries.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
        let mut entries = entries;
        for i in 0..n {
            for j in (i + 1)..n {
                let diff = (entries[i * n + j] - entries[j * n + i]).abs();
                if diff > SYMMETRY_TOL * scale {
                    return Err(Error::AsymmetricInput { i, j, diff });
                }
                entries[j * n + i] = entries[i * n + j];
            }
        }
        let m = SpdMatrix { n, entries };
        // positive definiteness is a property of the spectrum
        let (values, _) = jacobi_eigen(&m);
        check_spectrum(&values)?;
        Ok(m)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::new(n, entries)
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut entries = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            entries[i * n + i] = v;
        }
        Self::new(n, entries)
    }

    /// Builds `Q diag(values) Q^T` without re-running the SPD check.
    fn from_spectrum(n: usize, vectors: &[f64], values: &[f64]) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for (k, &lam) in values.iter().enumerate() {
                    s += vectors[i * n + k] * lam * vectors[j * n + k];
                }
                entries[i * n + j] = s;
                entries[j * n + i] = s;
            }
        }
        SpdMatrix { n, entries }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        mat_vec(self.n, &self.entries, x)
    }

    /// Quadratic form `(M x, x)`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(&self.mul_vec(x), x)
    }

    /// Returns `a * self`.
    pub fn scaled(&self, a: f64) -> Result<Self> {
        Self::new(self.n, self.entries.iter().map(|v| v * a).collect())
    }
}

/// Eigendecomposition of an [`SpdMatrix`] with the derived matrix functions.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdDecomposition {
    n: usize,
    eigenvalues: Vec<f64>,
    /// Column `k` (row-major `[i * n + k]`) is the eigenvector of `eigenvalues[k]`.
    eigenvectors: Vec<f64>,
    sqrt: SpdMatrix,
    inv_sqrt: SpdMatrix,
    inverse: SpdMatrix,
    det_sqrt: f64,
    log_det_sqrt: f64,
}

impl SpdDecomposition {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// The `k`-th unit eigenvector.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.eigenvectors[i * self.n + k]).collect()
    }

    /// Row-major eigenvector matrix `Q` (columns are eigenvectors).
    pub fn eigenvector_matrix(&self) -> &[f64] {
        &self.eigenvectors
    }

    pub fn sqrt(&self) -> &SpdMatrix {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &SpdMatrix {
        &self.inv_sqrt
    }

    pub fn inverse(&self) -> &SpdMatrix {
        &self.inverse
    }

    /// `det A^{1/2}`.
    pub fn det_sqrt(&self) -> f64 {
        self.det_sqrt
    }

    pub fn log_det_sqrt(&self) -> f64 {
        self.log_det_sqrt
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.n - 1]
    }
}

/// Cyclic Jacobi eigendecomposition.
pub fn decompose(m: &SpdMatrix) -> Result<SpdDecomposition> {
    let n = m.n;
    let (values, vectors) = jacobi_eigen(m);
    check_spectrum(&values)?;

    let sqrt_vals: Vec<f64> = values.iter().map(|v| v.sqrt()).collect();
    let inv_sqrt_vals: Vec<f64> = sqrt_vals.iter().map(|v| 1.0 / v).collect();
    let inv_vals: Vec<f64> = values.iter().map(|v| 1.0 / v).collect();
    let log_det_sqrt = 0.5 * values.iter().map(|v| v.ln()).sum::<f64>();

    Ok(SpdDecomposition {
        n,
        sqrt: SpdMatrix::from_spectrum(n, &vectors, &sqrt_vals),
        inv_sqrt: SpdMatrix::from_spectrum(n, &vectors, &inv_sqrt_vals),
        inverse: SpdMatrix::from_spectrum(n, &vectors, &inv_vals),
        det_sqrt: sqrt_vals.iter().product(),
        log_det_sqrt,
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

/// `|||A^{-1/2}||| = lambda_min(A)^{-1/2}`.
pub fn spectral_norm_inv_sqrt(d: &SpdDecomposition) -> f64 {
    1.0 / d.lambda_min().sqrt()
}

fn check_spectrum(values: &[f64]) -> Result<()> {
    let min = values[0];
    let max = values[values.len() - 1];
    if !(min > 0.0) || min <= SPD_THRESHOLD * max {
        return Err(Error::NotPositiveDefinite { min, max });
    }
    Ok(())
}

/// Returns ascending eigenvalues and the row-major eigenvector matrix.
///
/// Sweeps visit `(p, q)` for `p < q` in row order. Ties in the final sort keep
/// the Jacobi index order (stable sort), and each eigenvector is signed so its
/// first nonzero component is positive.
fn jacobi_eigen(m: &SpdMatrix) -> (Vec<f64>, Vec<f64>) {
    let n = m.n;
    let mut a = m.entries.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|p| ((p + 1)..n).map(move |q| (p, q)))
            .map(|(p, q)| a[p * n + q] * a[p * n + q])
            .sum();
        let diag: f64 = (0..n).map(|i| a[i * n + i] * a[i * n + i]).sum();
        if off <= f64::EPSILON * f64::EPSILON * diag * 1e-4 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]));
    let values: Vec<f64> = order.iter().map(|&k| a[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        let sign = (0..n)
            .map(|i| v[i * n + k])
            .find(|x| x.abs() > 1e-300)
            .map_or(1.0, f64::signum);
        for i in 0..n {
            vectors[i * n + col] = sign * v[i * n + k];
        }
    }
    (values, vectors)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn mat_vec(n: usize, m: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum())
        .collect()
}

pub fn mat_mul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

/// Relative Frobenius distance `||a - b|| / ||b||`.
pub fn rel_frobenius(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// An orthonormal basis whose first vector is `first / |first|`.
///
/// Returned row-major with basis vectors as columns. Built by Gram-Schmidt
/// against the coordinate axes in index order.
pub fn orthonormal_basis_with(first: &[f64]) -> Vec<f64> {
    let n = first.len();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    let len = norm(first);
    basis.push(first.iter().map(|x| x / len).collect());
    let mut axis = 0;
    while basis.len() < n {
        let mut e = vec![0.0; n];
        e[axis] = 1.0;
        axis += 1;
        for _ in 0..2 {
            for b in &basis {
                let proj = dot(&e, b);
                for (ei, bi) in e.iter_mut().zip(b) {
                    *ei -= proj * bi;
                }
            }
        }
        let l = norm(&e);
        if l > 1e-8 {
            basis.push(e.iter().map(|x| x / l).collect());
        }
    }
    let mut out = vec![0.0; n * n];
    for (col, b) in basis.iter().enumerate() {
        for i in 0..n {
            out[i * n + col] = b[i];
        }
    }
    out
}
