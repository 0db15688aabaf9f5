//! Symmetric eigensolver: Householder reduction to tridiagonal form (tred2)
//! followed by the implicit tridiagonal QL algorithm with Wilkinson shifts
//! (tql2), following the classic EISPACK/JAMA routines.

use super::Mat;
use crate::math;
use crate::prelude::*;

pub fn sym_eigen(a: &Mat) -> (Vec<f64>, Mat) {
    assert_eq!(a.rows(), a.cols());
    let n = a.rows();
    if n == 0 {
        return (Vec::new(), Mat::zeros(0, 0));
    }
    let mut v = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e);
    (d, v)
}

fn tred2(n: usize, v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    for j in 0..n {
        d[j] = v.get(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += math::abs(*item);
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for item in d.iter_mut().take(i) {
                *item /= scale;
                h += *item * *item;
            }
            let f = d[i - 1];
            let mut g = math::sqrt(h);
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                v.set(j, i, f);
                let mut g = e[j] + v.get(j, j) * f;
                for k in (j + 1)..i {
                    g += v.get(k, j) * d[k];
                    e[k] += v.get(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    let val = v.get(k, j) - (f * e[k] + g * d[k]);
                    v.set(k, j, val);
                }
                d[j] = v.get(i - 1, j);
                v.set(i, j, 0.0);
            }
        }
        d[i] = h;
    }

    for i in 0..(n - 1) {
        let t = v.get(i, i);
        v.set(n - 1, i, t);
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = v.get(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += v.get(k, i + 1) * v.get(k, j);
                }
                for k in 0..=i {
                    let val = v.get(k, j) - g * d[k];
                    v.set(k, j, val);
                }
            }
        }
        for k in 0..=i {
            v.set(k, i + 1, 0.0);
        }
    }
    for j in 0..n {
        d[j] = v.get(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

fn tql2(n: usize, v: &mut Mat, d: &mut [f64], e: &mut [f64]) {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0f64;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(math::abs(d[l]) + math::abs(e[l]));
        let mut m = l;
        while m < n {
            if math::abs(e[m]) <= eps * tst1 {
                break;
            }
            m += 1;
        }

        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                assert!(iter < 200, "tql2 failed to converge");

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = math::hypot(p, 1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m.min(n - 1)];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = math::hypot(p, e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    for k in 0..n {
                        h = v.get(k, i + 1);
                        let vi = v.get(k, i);
                        v.set(k, i + 1, s * vi + c * h);
                        v.set(k, i, c * vi - s * h);
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if math::abs(e[l]) <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }

    // Sort eigenvalues ascending, carrying eigenvectors along.
    for i in 0..n.saturating_sub(1) {
        let mut k = i;
        let mut p = d[i];
        for j in (i + 1)..n {
            if d[j] < p {
                k = j;
                p = d[j];
            }
        }
        if k != i {
            d[k] = d[i];
            d[i] = p;
            for r in 0..n {
                let t = v.get(r, i);
                v.set(r, i, v.get(r, k));
                v.set(r, k, t);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_2x2_known() {
        // [[1,-1],[-1,3]] has eigenvalues 2 -/+ sqrt(2)
        let a = Mat::from_rows(2, 2, vec![1.0, -1.0, -1.0, 3.0]);
        let (vals, vecs) = a.sym_eigen();
        assert!((vals[0] - (2.0 - 2.0f64.sqrt())).abs() < 1e-12);
        assert!((vals[1] - (2.0 + 2.0f64.sqrt())).abs() < 1e-12);
        for k in 0..2 {
            let v: Vec<f64> = (0..2).map(|r| vecs.get(r, k)).collect();
            let av = a.matvec(&v);
            for r in 0..2 {
                assert!((av[r] - vals[k] * v[r]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eigen_reconstructs_matrix() {
        let n = 12;
        let a = Mat::from_fn(n, n, |r, c| {
            1.0 / ((r + c + 1) as f64) + if r == c { 2.0 } else { 0.0 }
        });
        let (vals, vecs) = a.sym_eigen();
        let mut rebuilt = Mat::zeros(n, n);
        for k in 0..n {
            for r in 0..n {
                for c in 0..n {
                    rebuilt.add_to(r, c, vals[k] * vecs.get(r, k) * vecs.get(c, k));
                }
            }
        }
        let diff = rebuilt.add_scaled(&a, -1.0);
        assert!(diff.max_abs() < 1e-10);
    }

    #[test]
    fn zero_matrix_has_zero_spectrum() {
        let a = Mat::zeros(4, 4);
        let (vals, vecs) = a.sym_eigen();
        assert!(vals.iter().all(|&v| v == 0.0));
        // columns stay orthonormal
        for k in 0..4 {
            let v: Vec<f64> = (0..4).map(|r| vecs.get(r, k)).collect();
            assert!((super::super::norm(&v) - 1.0).abs() < 1e-14);
        }
    }
}
