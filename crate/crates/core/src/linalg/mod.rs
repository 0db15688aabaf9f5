//! Small dense-matrix kernels: storage, LU solves, symmetric eigensolvers,
//! and a Sturm-sequence tridiagonal path.
//!
//! Everything here is sized for occupation-number sector blocks (a few
//! hundred rows at most), so the implementations favour determinism and
//! clarity over blocking or parallelism.

mod symeig;
mod tridiag;

pub use tridiag::{sturm_count_below, Tridiagonal};

use crate::math;
use crate::prelude::*;

/// Dense row-major matrix of `f64`.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Mat { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), rows * cols);
        Mat { rows, cols, data }
    }

    /// Rank-one matrix `s * v vᵀ`, exactly symmetric entry by entry.
    pub fn outer(v: &[f64], s: f64) -> Self {
        let n = v.len();
        let mut m = Mat::zeros(n, n);
        for r in 0..n {
            for c in r..n {
                let val = s * v[r] * v[c];
                m.set(r, c, val);
                m.set(c, r, val);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn add_to(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] += v;
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    out.data[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![0.0; self.rows];
        for r in 0..self.rows {
            let mut acc = 0.0;
            for c in 0..self.cols {
                acc += self.get(r, c) * v[c];
            }
            out[r] = acc;
        }
        out
    }

    pub fn add_scaled(&self, other: &Mat, s: f64) -> Mat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (o, x) in out.data.iter_mut().zip(other.data.iter()) {
            *o += s * x;
        }
        out
    }

    pub fn scale(&self, s: f64) -> Mat {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x *= s;
        }
        out
    }

    /// Maximum absolute column sum.
    pub fn norm_one(&self) -> f64 {
        let mut best = 0.0f64;
        for c in 0..self.cols {
            let mut s = 0.0;
            for r in 0..self.rows {
                s += math::abs(self.get(r, c));
            }
            best = best.max(s);
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, &x| m.max(math::abs(x)))
    }

    /// Spectral norm (largest singular value), via the symmetric eigenproblem
    /// of AᵀA for rectangular input and of A itself when symmetric.
    pub fn norm_two(&self) -> f64 {
        if self.rows == self.cols && self.is_symmetric(0.0) {
            let (vals, _) = self.sym_eigen();
            return vals
                .iter()
                .fold(0.0f64, |m, &x| m.max(math::abs(x)));
        }
        let gram = self.transpose().matmul(self);
        let (vals, _) = gram.sym_eigen();
        let top = vals.iter().fold(0.0f64, |m, &x| m.max(x));
        math::sqrt(top.max(0.0))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for r in 0..self.rows {
            for c in (r + 1)..self.cols {
                if math::abs(self.get(r, c) - self.get(c, r)) > tol {
                    return false;
                }
            }
        }
        true
    }

    /// Eigen-decomposition of a symmetric matrix: Householder tridiagonal
    /// reduction followed by the implicit QL sweep. Returns eigenvalues in
    /// ascending order and the matching eigenvector columns.
    pub fn sym_eigen(&self) -> (Vec<f64>, Mat) {
        symeig::sym_eigen(self)
    }

    /// Symmetric positive-semidefinite square root.
    pub fn sym_sqrt(&self) -> Mat {
        let (vals, vecs) = self.sym_eigen();
        let n = self.rows;
        let mut out = Mat::zeros(n, n);
        for k in 0..n {
            let s = math::sqrt(vals[k].max(0.0));
            if s == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = vecs.get(r, k) * s;
                if vr == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += vr * vecs.get(c, k);
                }
            }
        }
        out
    }

    /// Solve `A x = b` for several right-hand sides via LU with partial
    /// pivoting. Returns `None` when a pivot collapses entirely.
    pub fn lu_solve(&self, rhs: &Mat) -> Option<Mat> {
        assert_eq!(self.rows, self.cols);
        assert_eq!(self.rows, rhs.rows);
        let n = self.rows;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for k in 0..n {
            let mut piv = k;
            let mut best = math::abs(a.get(k, k));
            for r in (k + 1)..n {
                let v = math::abs(a.get(r, k));
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best == 0.0 {
                return None;
            }
            if piv != k {
                for c in 0..n {
                    let t = a.get(k, c);
                    a.set(k, c, a.get(piv, c));
                    a.set(piv, c, t);
                }
                for c in 0..b.cols {
                    let t = b.get(k, c);
                    b.set(k, c, b.get(piv, c));
                    b.set(piv, c, t);
                }
            }
            let d = a.get(k, k);
            for r in (k + 1)..n {
                let f = a.get(r, k) / d;
                if f == 0.0 {
                    continue;
                }
                a.set(r, k, 0.0);
                for c in (k + 1)..n {
                    a.add_to(r, c, -f * a.get(k, c));
                }
                for c in 0..b.cols {
                    b.add_to(r, c, -f * b.get(k, c));
                }
            }
        }
        for k in (0..n).rev() {
            let d = a.get(k, k);
            for c in 0..b.cols {
                let mut s = b.get(k, c);
                for j in (k + 1)..n {
                    s -= a.get(k, j) * b.get(j, c);
                }
                b.set(k, c, s / d);
            }
        }
        Some(b)
    }

    pub fn lu_inverse(&self) -> Option<Mat> {
        self.lu_solve(&Mat::identity(self.rows))
    }

    /// Smallest absolute eigenvalue of a symmetric matrix.
    pub fn smallest_abs_eigenvalue(&self) -> f64 {
        let (vals, _) = self.sym_eigen();
        vals.iter()
            .fold(f64::INFINITY, |m, &x| m.min(math::abs(x)))
    }

    /// Smallest eigenvalue of a symmetric matrix.
    pub fn smallest_eigenvalue(&self) -> f64 {
        let (vals, _) = self.sym_eigen();
        vals[0]
    }

    /// Singular values in descending order. Symmetric input avoids the Gram
    /// square (which would halve the accuracy of the small values).
    pub fn singular_values(&self) -> Vec<f64> {
        if self.rows == self.cols && self.is_symmetric(0.0) {
            let (vals, _) = self.sym_eigen();
            let mut sv: Vec<f64> = vals.iter().map(|&x| math::abs(x)).collect();
            sv.sort_by(|a, b| b.partial_cmp(a).expect("finite singular values"));
            return sv;
        }
        let gram = if self.rows >= self.cols {
            self.transpose().matmul(self)
        } else {
            self.matmul(&self.transpose())
        };
        let (vals, _) = gram.sym_eigen();
        let mut sv: Vec<f64> = vals
            .iter()
            .map(|&x| math::sqrt(x.max(0.0)))
            .collect();
        sv.reverse();
        sv
    }

    pub fn sub_block(&self, rows: &[usize], cols: &[usize]) -> Mat {
        Mat::from_fn(rows.len(), cols.len(), |r, c| self.get(rows[r], cols[c]))
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    math::sqrt(dot(v, v))
}

pub fn scale_in_place(v: &mut [f64], s: f64) {
    for x in v.iter_mut() {
        *x *= s;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lu_solves_small_system() {
        let a = Mat::from_rows(3, 3, vec![2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let b = Mat::from_rows(3, 1, vec![1.0, 2.0, 3.0]);
        let x = a.lu_solve(&b).unwrap();
        let r = a.matmul(&x).add_scaled(&b, -1.0);
        assert!(r.max_abs() < 1e-13);
    }

    #[test]
    fn lu_detects_singular() {
        let a = Mat::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(a.lu_inverse().is_none());
    }

    #[test]
    fn sym_sqrt_squares_back() {
        let a = Mat::from_rows(2, 2, vec![2.0, 0.5, 0.5, 1.0]);
        let s = a.sym_sqrt();
        let diff = s.matmul(&s).add_scaled(&a, -1.0);
        assert!(diff.max_abs() < 1e-12);
    }

    #[test]
    fn spectral_norm_of_projector_is_one() {
        let v = [3.0 / 5.0, 4.0 / 5.0];
        let p = Mat::outer(&v, 1.0);
        assert!((p.norm_two() - 1.0).abs() < 1e-12);
    }
}
