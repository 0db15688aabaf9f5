//! Occupation-number sector bases, ladder-operator assembly of the
//! Bogoliubov Hamiltonians as finite matrices, and exact-diagonalization
//! oracles.
//!
//! The working Hilbert space is the symmetric pair sector: for every
//! interacting pair of modes `{+j, -j}` the two occupations are equal,
//! `n_j = n_{-j} = p`. The interaction terms and the number operators all
//! preserve `n_j - n_{-j}`, and the condensate state lies in this sector,
//! so the ground state does too; a small-N check against the full
//! unsymmetrized basis backs this up in the tests.

mod basis;
mod operators;
mod oracle;

pub use basis::{sector_count, GeneralBasis, SectorBasis, DEFAULT_STATE_CAP};
pub use operators::{
    assemble_full_interaction, assemble_hbog, assemble_hbog_general, assemble_sum_hhat,
    pair_tridiagonal, pair_tridiagonal_with_deficit, w_lower_block, ModeLists, SparseOperator,
};
pub use oracle::{
    ground_state_dense, ground_state_dense_full, ground_state_tridiag, ground_state_tridiag_full,
    lowest_eigenvalues, GroundState, ORACLE_RESIDUAL,
};

use crate::math;
use crate::prelude::*;
use crate::{Error, Result};

/// Box, particle number and density. Units are fixed once and for all:
/// hbar = 1, m = 1/2, coupling = 1/density, so kinetic energies are
/// `k_j^2 = (2 pi |j| / L)^2` and every energy below is in these units.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    /// Particle count N (even, at least 4).
    pub n: u32,
    /// Spatial dimension d >= 1.
    pub dim: u32,
    /// Box side L.
    pub box_len: f64,
    /// Density N / L^d.
    pub rho: f64,
}

impl ModelParams {
    pub fn new(n: u32, dim: u32, box_len: f64) -> Result<Self> {
        if n % 2 != 0 || n < 4 {
            return Err(Error::InvalidModel(format!(
                "particle count N must be even and >= 4, got {n}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidModel("dimension d must be >= 1".into()));
        }
        if !(box_len > 0.0) {
            return Err(Error::InvalidModel(format!(
                "box side L must be positive, got {box_len}"
            )));
        }
        let volume = math::powi(box_len, dim as i32);
        let rho = n as f64 / volume;
        // rho * L^d must reproduce N within one unit of integer rounding
        debug_assert!(math::abs(rho * volume - n as f64) < 1.0);
        Ok(ModelParams {
            n,
            dim,
            box_len,
            rho,
        })
    }

    /// Smallest nonzero kinetic energy on the momentum lattice, `(2 pi / L)^2`.
    pub fn delta0(&self) -> f64 {
        let k = 2.0 * core::f64::consts::PI / self.box_len;
        k * k
    }
}

/// One unordered pair of interacting modes `{+j, -j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModePair {
    /// Lattice vector in Z^d, not zero.
    pub j: Vec<i64>,
    /// Kinetic energy k_j^2 = (2 pi |j| / L)^2.
    pub k2: f64,
    /// Fourier component phi_j > 0 of the pair potential.
    pub phi: f64,
    /// Strong-interaction ratio eps_j = k_j^2 / phi_j.
    pub eps: f64,
}

impl ModePair {
    pub fn new(j: Vec<i64>, box_len: f64, phi: f64) -> Result<Self> {
        if j.iter().all(|&c| c == 0) {
            return Err(Error::InvalidModel(
                "mode pair lattice vector must be nonzero".into(),
            ));
        }
        if !(phi > 0.0) {
            return Err(Error::InvalidModel(format!(
                "phi_j must be strictly positive for an interacting pair, got {phi} \
                 (omit non-interacting modes from the pair list)"
            )));
        }
        let k2 = kinetic_energy(&j, box_len);
        Ok(ModePair {
            j,
            k2,
            phi,
            eps: k2 / phi,
        })
    }

    /// Pair with phi chosen so that eps takes the requested value.
    pub fn with_eps(j: Vec<i64>, box_len: f64, eps: f64) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::InvalidModel(format!(
                "eps must be positive, got {eps}"
            )));
        }
        let k2 = kinetic_energy(&j, box_len);
        ModePair::new(j, box_len, k2 / eps)
    }
}

pub fn kinetic_energy(j: &[i64], box_len: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    let norm2: f64 = j.iter().map(|&c| (c * c) as f64).sum();
    (two_pi / box_len) * (two_pi / box_len) * norm2
}

/// The model: box, particle number, zero-mode component, and the ordered
/// list of interacting pairs (the cascade order `j_1, ..., j_M`).
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub params: ModelParams,
    /// Zero-mode Fourier component phi_0 >= 0; only enters the additive
    /// constant `c_N`, never the assembled matrices.
    pub phi0: f64,
    pub pairs: Vec<ModePair>,
}

impl PotentialSpec {
    pub fn new(params: ModelParams, phi0: f64, pairs: Vec<ModePair>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::InvalidModel(
                "at least one interacting pair is required".into(),
            ));
        }
        if !(phi0 >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "phi_0 must be nonnegative, got {phi0}"
            )));
        }
        for pair in &pairs {
            if pair.j.len() != params.dim as usize {
                return Err(Error::InvalidModel(format!(
                    "pair vector {:?} has dimension {} but the box has d={}",
                    pair.j,
                    pair.j.len(),
                    params.dim
                )));
            }
        }
        for a in 0..pairs.len() {
            for b in (a + 1)..pairs.len() {
                let same = pairs[a].j == pairs[b].j;
                let negated = pairs[a]
                    .j
                    .iter()
                    .zip(pairs[b].j.iter())
                    .all(|(x, y)| *x == -*y);
                if same || negated {
                    return Err(Error::InvalidModel(format!(
                        "pair vectors {:?} and {:?} name the same unordered pair",
                        pairs[a].j, pairs[b].j
                    )));
                }
            }
        }
        Ok(PotentialSpec {
            params,
            phi0,
            pairs,
        })
    }

    pub fn mode_count(&self) -> usize {
        self.pairs.len()
    }

    /// The additive constant subtracted before the Hamiltonian is split,
    /// `c_N = -phi_0 (N - 1) / 2`. Reported, never added to matrices.
    pub fn c_n(&self) -> f64 {
        -self.phi0 * (self.params.n as f64 - 1.0) / 2.0
    }

    /// True when eps and N are inside the proof's comfort zone; outside it
    /// the computations still run, the oracle stays valid.
    pub fn regime_ok(&self, pair_index: usize) -> bool {
        let eps = self.pairs[pair_index].eps;
        let n = self.params.n as f64;
        eps <= 0.3 && 1.0 / n <= math::powf(eps, 11.0 / 8.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn odd_n_rejected() {
        assert!(matches!(
            ModelParams::new(5, 1, 1.0),
            Err(Error::InvalidModel(_))
        ));
        assert!(matches!(
            ModelParams::new(2, 1, 1.0),
            Err(Error::InvalidModel(_))
        ));
        assert!(ModelParams::new(4, 1, 1.0).is_ok());
    }

    #[test]
    fn zero_phi_pair_rejected() {
        assert!(ModePair::new(vec![1], 1.0, 0.0).is_err());
        assert!(ModePair::new(vec![0], 1.0, 1.0).is_err());
    }

    #[test]
    fn duplicate_and_negated_pairs_rejected() {
        let params = ModelParams::new(10, 1, 1.0).unwrap();
        let a = ModePair::new(vec![1], 1.0, 5.0).unwrap();
        let b = ModePair::new(vec![-1], 1.0, 5.0).unwrap();
        assert!(PotentialSpec::new(params.clone(), 0.0, vec![a.clone(), b]).is_err());
        assert!(PotentialSpec::new(params, 0.0, vec![a.clone(), a]).is_err());
    }

    #[test]
    fn c_n_matches_closed_form() {
        let params = ModelParams::new(10, 1, 1.0).unwrap();
        let pair = ModePair::new(vec![1], 1.0, 5.0).unwrap();
        let spec = PotentialSpec::new(params, 2.0, vec![pair]).unwrap();
        assert_eq!(spec.c_n(), -2.0 * 9.0 / 2.0);
    }

    #[test]
    fn eps_constructor_inverts() {
        let pair = ModePair::with_eps(vec![1], 1.0, 0.1).unwrap();
        assert!((pair.eps - 0.1).abs() < 1e-15);
        let k2 = kinetic_energy(&[1], 1.0);
        assert!((pair.phi - k2 / 0.1).abs() < 1e-9);
    }
}
