//! Minimal dense linear algebra for small `d x d` problems.
//!
//! Ambient dimensions here are single digits, so a flat row-major buffer and
//! straightforward loops beat pulling in a full linear-algebra crate.

use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Square row-major matrix of order `dim`.
///
/// Serializes as nested row arrays, the natural JSON form for reports.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    dim: usize,
    data: Vec<f64>,
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[f64]> = self.data.chunks_exact(self.dim.max(1)).collect();
        rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Matrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(D::Error::custom("matrix rows must form a square"));
        }
        Ok(Matrix { dim, data: rows.into_iter().flatten().collect() })
    }
}

impl Matrix {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![0.0; dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// `u v^T` scaled by `c`, added to the identity times `s`: `s*I + c*u*v^T`.
    pub fn scaled_identity_plus_outer(dim: usize, s: f64, c: f64, u: &[f64], v: &[f64]) -> Self {
        let mut m = Matrix::from_fn(dim, |i, j| c * u[i] * v[j]);
        for i in 0..dim {
            m.data[i * dim + i] += s;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn mul(&self, rhs: &Matrix) -> Matrix {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions must agree");
        let d = self.dim;
        Matrix::from_fn(d, |i, j| (0..d).map(|k| self.get(i, k) * rhs.get(k, j)).sum())
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.dim, v.len(), "matrix/vector dimensions must agree");
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Largest entrywise absolute difference from `other`.
    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise absolute deviation of `Q^T Q` from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        self.transpose().mul(self).max_abs_diff(&Matrix::identity(self.dim))
    }

    /// Largest entrywise asymmetry `|m_ij - m_ji|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix { dim: self.dim, data: self.data.iter().map(|x| c * x).collect() }
    }

    /// Eigenvalues of a symmetric matrix by the cyclic Jacobi method,
    /// returned in ascending order.
    pub fn symmetric_eigenvalues(&self) -> Vec<f64> {
        let d = self.dim;
        let mut a = self.clone();
        for _sweep in 0..100 {
            let mut off = 0.0;
            for i in 0..d {
                for j in (i + 1)..d {
                    off += a.get(i, j) * a.get(i, j);
                }
            }
            if off < 1e-30 {
                break;
            }
            for p in 0..d {
                for q in (p + 1)..d {
                    let apq = a.get(p, q);
                    if apq.abs() < 1e-300 {
                        continue;
                    }
                    let app = a.get(p, p);
                    let aqq = a.get(q, q);
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for k in 0..d {
                        let akp = a.get(k, p);
                        let akq = a.get(k, q);
                        a.set(k, p, c * akp - s * akq);
                        a.set(k, q, s * akp + c * akq);
                    }
                    for k in 0..d {
                        let apk = a.get(p, k);
                        let aqk = a.get(q, k);
                        a.set(p, k, c * apk - s * aqk);
                        a.set(q, k, s * apk + c * aqk);
                    }
                }
            }
        }
        let mut eigs: Vec<f64> = (0..d).map(|i| a.get(i, i)).collect();
        eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        eigs
    }
}

pub fn dot(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len(), "vector lengths must agree");
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

pub fn sub(u: &[f64], v: &[f64]) -> Vec<f64> {
    u.iter().zip(v).map(|(a, b)| a - b).collect()
}

pub fn axpy(acc: &mut [f64], c: f64, v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += c * b;
    }
}
