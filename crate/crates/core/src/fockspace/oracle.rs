//! Brute-force ground-state oracles.
//!
//! Tridiagonal inputs go through Sturm-sequence bisection plus inverse
//! iteration; dense inputs through Householder tridiagonalization and the
//! implicit QL sweep. Results are deterministic: the eigenvector is
//! normalized and its sign fixed by making the first nonzero component
//! (the condensate component, for sector bases) nonnegative.

use crate::linalg::{self, Mat, Tridiagonal};
use crate::math;
use crate::prelude::*;
use crate::{Error, Result};

/// Relative residual budget of the oracle contract.
pub const ORACLE_RESIDUAL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub vector: Vec<f64>,
    /// `||(A - lambda) v||` actually achieved.
    pub residual: f64,
}

fn fix_sign(v: &mut [f64]) {
    for &x in v.iter() {
        if x != 0.0 {
            if x < 0.0 {
                linalg::scale_in_place(v, -1.0);
            }
            return;
        }
    }
}

/// Lowest eigenpair of a symmetric tridiagonal matrix.
pub fn ground_state_tridiag(t: &Tridiagonal) -> Result<(f64, Vec<f64>)> {
    let gs = ground_state_tridiag_full(t)?;
    Ok((gs.energy, gs.vector))
}

pub fn ground_state_tridiag_full(t: &Tridiagonal) -> Result<GroundState> {
    let lambda = t.eigenvalue(0);
    let mut v = t.eigenvector(lambda);
    let nrm = linalg::norm(&v);
    if !(nrm > 0.0) || !nrm.is_finite() {
        return Err(Error::Solver {
            message: "inverse iteration produced a degenerate vector".into(),
            residual: f64::INFINITY,
        });
    }
    linalg::scale_in_place(&mut v, 1.0 / nrm);
    fix_sign(&mut v);
    let residual = tridiag_residual(t, lambda, &v);
    let budget = ORACLE_RESIDUAL * (1.0 + t.norm_one());
    if residual > budget {
        return Err(Error::Solver {
            message: format!("tridiagonal oracle residual above budget {budget:e}"),
            residual,
        });
    }
    Ok(GroundState {
        energy: lambda,
        vector: v,
        residual,
    })
}

fn tridiag_residual(t: &Tridiagonal, lambda: f64, v: &[f64]) -> f64 {
    let tv = t.matvec(v);
    let mut acc = 0.0;
    for i in 0..v.len() {
        let d = tv[i] - lambda * v[i];
        acc += d * d;
    }
    math::sqrt(acc)
}

/// Lowest eigenpair of a dense symmetric matrix.
pub fn ground_state_dense(a: &Mat) -> Result<(f64, Vec<f64>)> {
    let gs = ground_state_dense_full(a)?;
    Ok((gs.energy, gs.vector))
}

pub fn ground_state_dense_full(a: &Mat) -> Result<GroundState> {
    assert!(a.is_symmetric(0.0), "oracle requires a symmetric input");
    let (vals, vecs) = a.sym_eigen();
    let lambda = vals[0];
    let mut v: Vec<f64> = (0..a.rows()).map(|r| vecs.get(r, 0)).collect();
    let nrm = linalg::norm(&v);
    linalg::scale_in_place(&mut v, 1.0 / nrm);
    fix_sign(&mut v);
    let av = a.matvec(&v);
    let mut acc = 0.0;
    for i in 0..v.len() {
        let d = av[i] - lambda * v[i];
        acc += d * d;
    }
    let residual = math::sqrt(acc);
    let budget = ORACLE_RESIDUAL * (1.0 + a.norm_one());
    if residual > budget {
        return Err(Error::Solver {
            message: format!("dense oracle residual above budget {budget:e}"),
            residual,
        });
    }
    Ok(GroundState {
        energy: lambda,
        vector: v,
        residual,
    })
}

/// The `count` lowest eigenvalues of a dense symmetric matrix, ascending.
pub fn lowest_eigenvalues(a: &Mat, count: usize) -> Vec<f64> {
    let (vals, _) = a.sym_eigen();
    vals.into_iter().take(count).collect()
}
