//! Symmetric tridiagonal eigenpairs by Sturm-sequence bisection plus
//! inverse iteration.

use crate::math;
use crate::prelude::*;

/// Symmetric tridiagonal matrix held as diagonal and off-diagonal bands.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl Tridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len());
        Tridiagonal { diag, off }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * v[i];
            if i > 0 {
                acc += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                acc += self.off[i] * v[i + 1];
            }
            out[i] = acc;
        }
        out
    }

    pub fn norm_one(&self) -> f64 {
        let n = self.dim();
        let mut best = 0.0f64;
        for i in 0..n {
            let mut s = math::abs(self.diag[i]);
            if i > 0 {
                s += math::abs(self.off[i - 1]);
            }
            if i + 1 < n {
                s += math::abs(self.off[i]);
            }
            best = best.max(s);
        }
        best
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { math::abs(self.off[i - 1]) } else { 0.0 };
            let right = if i + 1 < n { math::abs(self.off[i]) } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// k-th smallest eigenvalue (0-based) by Sturm bisection.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let n = self.dim();
        assert!(k < n);
        if n == 1 {
            return self.diag[0];
        }
        let (mut lo, mut hi) = self.gershgorin();
        lo -= 1.0;
        hi += 1.0;
        for _ in 0..220 {
            let mid = 0.5 * (lo + hi);
            if (hi - lo) < 2.0 * f64::EPSILON * math::abs(mid).max(1.0) {
                break;
            }
            if sturm_count_below(&self.diag, &self.off, mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector for an isolated eigenvalue via inverse iteration with a
    /// pivoted tridiagonal solve. Deterministic start vector; the sign is
    /// fixed afterwards by the caller's convention.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            return vec![1.0];
        }
        let scale = self.norm_one().max(1.0);
        let mut v = vec![1.0 / math::sqrt(n as f64); n];
        // a slightly off-eigenvalue shift keeps the solve well defined
        let shift = lambda + 1e-13 * scale;
        for _ in 0..4 {
            let mut w = solve_shifted(&self.diag, &self.off, shift, &v);
            let nrm = super::norm(&w);
            if !nrm.is_finite() || nrm == 0.0 {
                break;
            }
            super::scale_in_place(&mut w, 1.0 / nrm);
            v = w;
        }
        v
    }
}

/// Number of eigenvalues strictly below `x` (Sturm sequence via the LDLᵀ
/// pivot signs).
pub fn sturm_count_below(diag: &[f64], off: &[f64], x: f64) -> usize {
    let n = diag.len();
    if n == 0 {
        return 0;
    }
    let guard = 1e-300;
    let mut count = 0usize;
    let mut q = diag[0] - x;
    if q < 0.0 {
        count += 1;
    }
    for i in 1..n {
        let q_safe = if math::abs(q) < guard {
            if q >= 0.0 {
                guard
            } else {
                -guard
            }
        } else {
            q
        };
        q = (diag[i] - x) - off[i - 1] * off[i - 1] / q_safe;
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Solve (T - shift) x = b with partial pivoting (two superdiagonals fill in).
fn solve_shifted(diag: &[f64], off: &[f64], shift: f64, b: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = vec![0.0; n]; // main diagonal of U
    let mut u1 = vec![0.0; n]; // first superdiagonal
    let mut u2 = vec![0.0; n]; // second superdiagonal (from row swaps)
    let mut rhs = b.to_vec();

    for i in 0..n {
        d[i] = diag[i] - shift;
        u1[i] = if i + 1 < n { off[i] } else { 0.0 };
    }

    for i in 0..(n - 1) {
        let sub = off[i]; // T[i+1, i] before elimination
        if math::abs(sub) > math::abs(d[i]) {
            // swap rows i and i+1
            let (a0, a1, a2) = (d[i], u1[i], u2[i]);
            d[i] = sub;
            u1[i] = d[i + 1];
            u2[i] = u1[i + 1];
            d[i + 1] = a1;
            u1[i + 1] = a2;
            let t = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = t;
            // after the swap the value to eliminate is a0
            let f = a0 / d[i];
            d[i + 1] = a1 - f * u1[i];
            u1[i + 1] = a2 - f * u2[i];
            rhs[i + 1] -= f * rhs[i];
        } else {
            let piv = if d[i] == 0.0 { 1e-300 } else { d[i] };
            let f = sub / piv;
            d[i + 1] -= f * u1[i];
            if i + 2 < n {
                // u1[i+1] stays, u2[i] is zero in the unswapped case
            }
            rhs[i + 1] -= f * rhs[i];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = rhs[i];
        if i + 1 < n {
            s -= u1[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= u2[i] * x[i + 2];
        }
        let piv = if d[i] == 0.0 { 1e-300 } else { d[i] };
        x[i] = s / piv;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sturm_count_2x2() {
        // [[1,-1],[-1,3]]: eigenvalues about 0.586 and 3.414
        let d = [1.0, 3.0];
        let e = [-1.0];
        assert_eq!(sturm_count_below(&d, &e, 0.0), 0);
        assert_eq!(sturm_count_below(&d, &e, 1.0), 1);
        assert_eq!(sturm_count_below(&d, &e, 4.0), 2);
    }

    #[test]
    fn chain_eigenvalues_match_closed_form() {
        // free chain: eigenvalues 2 cos(k pi / (n+1))
        let n = 40;
        let t = Tridiagonal::new(vec![0.0; n], vec![-1.0; n - 1]);
        for k in [0usize, 1, n / 2, n - 1] {
            let exact = {
                // ascending order
                let j = n - k;
                2.0 * (j as f64 * core::f64::consts::PI / (n as f64 + 1.0)).cos()
            };
            let got = t.eigenvalue(k);
            assert!(
                (got - exact).abs() < 1e-11,
                "k={k} got={got} exact={exact}"
            );
        }
    }

    #[test]
    fn eigenvector_residual_small() {
        let n = 60;
        let diag: Vec<f64> = (0..n).map(|i| (i as f64) * 0.37).collect();
        let off: Vec<f64> = (0..n - 1).map(|i| -1.0 - 0.01 * (i as f64)).collect();
        let t = Tridiagonal::new(diag, off);
        let lam = t.eigenvalue(0);
        let v = t.eigenvector(lam);
        let tv = t.matvec(&v);
        let mut res = 0.0f64;
        for i in 0..n {
            res += (tv[i] - lam * v[i]) * (tv[i] - lam * v[i]);
        }
        assert!(res.sqrt() < 1e-10 * (1.0 + t.norm_one()));
    }
}
