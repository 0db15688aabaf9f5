//! Operator-level Feshbach-Schur flow on finite sector matrices: the
//! per-pair elimination of occupation slices, the fixed-point energies
//! `z^(m)`, the cascade vector, and the measured counterparts of the gap
//! and positivity statements.

mod flow;
mod solve;
mod verify;

pub use flow::{feshbach_step, run_dense_chain, run_pair_flow, FlowDiag, FlowState, ProjectorSet};
pub use solve::{
    build_ground_state_vector, cascade_all_modes, cascade_with_basis, solve_zm, CascadeStep,
    GroundStateResult, ZmSolve,
};
pub use verify::{
    verify_final_rank_one, verify_inverted_block_positivity, verify_property4_infspec,
    InfspecReport, PositivityReport, RankOneReport,
};

use crate::prelude::*;

/// Contraction factor of the gap recursion.
pub const GAMMA: f64 = 0.5;

/// Near-singular threshold for complement blocks, relative to the block's
/// one-norm.
pub const COLLISION_THRESHOLD: f64 = 1e-10;

/// Measured spectral gaps per cascade step, with the analytic recursion
/// overlaid for user-supplied constants.
#[derive(Debug, Clone)]
pub struct GapLedger {
    /// Smallest nonzero-mode kinetic energy.
    pub delta0: f64,
    pub gamma: f64,
    pub c_perp: f64,
    pub c_iii: f64,
    /// Measured gap of the m-pair intermediate Hamiltonian (second lowest
    /// oracle eigenvalue minus lowest), indexed by step.
    pub measured: Vec<f64>,
    /// Recursion overlay `D_m = gamma D_{m-1} - c_perp/(ln N)^{1/2}
    /// - (2/gamma)^m c_iii/(ln N)^{1/4}`.
    pub recursion: Vec<f64>,
    /// `U_{j_m} = k^2 + phi` per step.
    pub u_pair: Vec<f64>,
}

impl GapLedger {
    pub fn new(delta0: f64, c_perp: f64, c_iii: f64) -> Self {
        GapLedger {
            delta0,
            gamma: GAMMA,
            c_perp,
            c_iii,
            measured: Vec::new(),
            recursion: Vec::new(),
            u_pair: Vec::new(),
        }
    }

    pub(crate) fn push_step(&mut self, n: u32, measured_gap: f64, u: f64) {
        use crate::math;
        let m = self.recursion.len() + 1;
        let prev = if m == 1 {
            self.delta0
        } else {
            self.recursion[m - 2]
        };
        let ln_n = math::ln(n as f64);
        let next = self.gamma * prev
            - self.c_perp / math::sqrt(ln_n)
            - math::powi(2.0 / self.gamma, m as i32) * self.c_iii / math::powf(ln_n, 0.25);
        self.recursion.push(next);
        self.measured.push(measured_gap);
        self.u_pair.push(u);
    }

    /// Measured gap after `m` steps; `m = 0` returns the kinetic floor.
    pub fn measured_delta(&self, m: usize) -> f64 {
        if m == 0 {
            self.delta0
        } else {
            self.measured[m - 1]
        }
    }
}
