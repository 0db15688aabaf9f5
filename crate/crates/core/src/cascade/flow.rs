//! The per-pair Feshbach-Schur flow.
//!
//! For the pair being integrated out, the sector basis splits into slices
//! of constant pair occupation `p`; the slice with `p = (N - i)/2` carries
//! the occupation label `i` (particles outside the pair). The flow walks
//! `i = 0, 2, ..., N-2`, eliminating one slice per step. Because the
//! interaction couples adjacent slices only, the reduced Hamiltonian always
//! equals the bare operator plus one dense correction block on the next
//! slice; only those small blocks are ever formed.

use super::COLLISION_THRESHOLD;
use crate::fockspace::{assemble_hbog, PotentialSpec, SectorBasis, SparseOperator};
use crate::linalg::Mat;
use crate::prelude::*;
use crate::{Error, Result};

/// One Feshbach-Schur step on an explicit symmetric matrix:
/// `F(K - z) = P(K-z)P - P K Pbar (Pbar (K-z) Pbar)^{-1} Pbar K P`,
/// returned as the dense block on the `p` index list. The complement block
/// is inverted exactly (LU); a near-null eigenvalue is an isospectral
/// collision, reported with z.
pub fn feshbach_step(k: &Mat, p: &[usize], p_bar: &[usize], z: f64) -> Result<Mat> {
    let mut kz = k.clone();
    for d in 0..k.rows() {
        kz.add_to(d, d, -z);
    }
    let kpp = kz.sub_block(p, p);
    if p_bar.is_empty() {
        return Ok(kpp);
    }
    let kbb = kz.sub_block(p_bar, p_bar);
    let small = kbb.smallest_abs_eigenvalue();
    if small < COLLISION_THRESHOLD * kbb.norm_one().max(1.0) {
        return Err(Error::IsospectralCollision {
            index: p_bar.len() as u32,
            z,
            near_null: small,
        });
    }
    let kpb = k.sub_block(p, p_bar);
    let kbp = k.sub_block(p_bar, p);
    let solved = kbb.lu_solve(&kbp).ok_or(Error::IsospectralCollision {
        index: p_bar.len() as u32,
        z,
        near_null: 0.0,
    })?;
    Ok(kpp.add_scaled(&kpb.matmul(&solved), -1.0))
}

/// Occupation-slice projections for one pair: `q_low(i)` is the slice with
/// `N - i` particles in the pair modes, `q_high(i)` everything with fewer.
/// The odd half of each projection (`N - i - 1` particles) is vacuous in
/// the symmetric sector for even N, which the constructor asserts.
#[derive(Debug, Clone)]
pub struct ProjectorSet {
    pub pair: usize,
    /// `slices[t]` holds the basis indices with `i = 2t`, i.e. pair
    /// occupation `p = (N - 2t) / 2`.
    pub slices: Vec<Vec<usize>>,
    pub n: u32,
}

impl ProjectorSet {
    pub fn build(basis: &SectorBasis, pair: usize) -> Self {
        let n = basis.n;
        let mut slices = Vec::with_capacity(n as usize / 2 + 1);
        let mut covered = 0usize;
        for t in 0..=(n / 2) {
            let p = n / 2 - t;
            let idx = basis.slice_indices(pair, p);
            covered += idx.len();
            slices.push(idx);
        }
        // every state has an even pair occupation: the slices cover the basis
        assert_eq!(covered, basis.len(), "odd-occupancy slice must be vacuous");
        ProjectorSet { pair, slices, n }
    }

    /// Basis indices of `Q^(i,i+1)` (pair occupation `N - i`).
    pub fn q_low(&self, i: u32) -> &[usize] {
        &self.slices[(i / 2) as usize]
    }

    /// Basis indices of `Q^(>i+1)` (pair occupation below `N - i - 1`).
    pub fn q_high(&self, i: u32) -> Vec<usize> {
        let mut out = Vec::new();
        for t in (i / 2 + 1)..=(self.n / 2) {
            out.extend_from_slice(&self.slices[t as usize]);
        }
        out
    }

    /// The zero-pair-occupation subspace `Q^(>N-1)`.
    pub fn zero_occupancy(&self) -> &[usize] {
        &self.slices[(self.n / 2) as usize]
    }
}

/// Per-slice diagnostics recorded while the flow runs.
#[derive(Debug, Clone)]
pub struct FlowDiag {
    pub i: u32,
    /// `||R_i^{1/2} W_{i,i-2} R_{i-2}^{1/2}|| * ||transpose||`.
    pub block_norm_product: f64,
    /// Norm of the closed-form Neumann sum `(1 - R^{1/2} G R^{1/2})^{-1}`.
    pub gamma_check_norm: f64,
    /// Relative disagreement between the recursion route and the direct
    /// block-inverse route for `Gamma_{i,i}`.
    pub gamma_route_rel_diff: f64,
}

/// State of one completed pair flow: resolvent blocks, correction blocks,
/// eliminated-block inverses, coupling blocks, and the reduced operator on
/// the zero-occupation subspace.
#[derive(Debug, Clone)]
pub struct FlowState {
    /// 0-based index of the pair being integrated out.
    pub pair: usize,
    /// Number of active pairs (this pair plus all earlier ones).
    pub active_count: usize,
    pub z: f64,
    pub z_prev: f64,
    /// Shift energy `w = z + z_prev`.
    pub shift: f64,
    pub projectors: ProjectorSet,
    /// `r_blocks[t]` is `R_{i,i}(w)` for `i = 2t`, `t <= (N-2)/2`.
    pub r_blocks: Vec<Mat>,
    pub r_sqrts: Vec<Mat>,
    /// `gammas[t]` is `Gamma_{i,i}(w)` for `i = 2t >= 2`; index 0 unused.
    pub gammas: Vec<Option<Mat>>,
    /// `b_blocks[t]` inverts the eliminated block of `K^(i-2)` on slice `i = 2t`.
    pub b_blocks: Vec<Mat>,
    /// `w_blocks[t]` is the coupling `W_{i+2,i} = H[slice(i+2), slice(i)]`.
    pub w_blocks: Vec<Mat>,
    /// `Gamma_{N,N}(w)` on the zero-occupation subspace.
    pub gamma_nn: Mat,
    /// `K^(N-2)(w)` dense on the zero-occupation subspace.
    pub k_final: Mat,
    pub diagnostics: Vec<FlowDiag>,
    /// The assembled Hamiltonian the flow reduced (kept for residual checks).
    pub hamiltonian: SparseOperator,
}

/// Run the flow for pair `active_count - 1` of `spec`, with pairs
/// `0 .. active_count` interacting, at spectral value `z` relative to the
/// previous cumulative energy `z_prev`.
pub fn run_pair_flow(
    spec: &PotentialSpec,
    basis: &SectorBasis,
    active_count: usize,
    z: f64,
    z_prev: f64,
) -> Result<FlowState> {
    assert!(active_count >= 1 && active_count <= basis.mode_count);
    let pair = active_count - 1;
    let active: Vec<usize> = (0..active_count).collect();
    let h = assemble_hbog(spec, basis, &active);
    let w = z + z_prev;
    let n = basis.n;
    let projectors = ProjectorSet::build(basis, pair);

    let steps = (n / 2) as usize; // slices 0 .. N-2 get eliminated
    let mut r_blocks = Vec::with_capacity(steps);
    let mut r_sqrts = Vec::with_capacity(steps);
    let mut gammas: Vec<Option<Mat>> = Vec::with_capacity(steps);
    let mut b_blocks = Vec::with_capacity(steps);
    let mut w_blocks = Vec::with_capacity(steps);
    let mut diagnostics = Vec::new();

    for t in 0..steps {
        let i = 2 * t as u32;
        let slice = &projectors.slices[t];
        let next = &projectors.slices[t + 1];

        // bare resolvent block of (H - w) on this slice
        let mut bare = h.block(slice, slice);
        for d in 0..bare.rows() {
            bare.add_to(d, d, -w);
        }
        let (bare_vals, _) = bare.sym_eigen();
        if bare_vals[0] <= 0.0 {
            return Err(Error::Admissibility { index: i, z });
        }
        let r = bare.lu_inverse().ok_or(Error::Admissibility { index: i, z })?;
        let r_sqrt = r.sym_sqrt();

        // eliminated block of K^(i-2): bare minus the accumulated correction
        let block = match gammas.last() {
            Some(Some(g)) if t > 0 => bare.add_scaled(g, -1.0),
            _ => bare.clone(),
        };
        let small = block.smallest_abs_eigenvalue();
        if small < COLLISION_THRESHOLD * block.norm_one().max(1.0) {
            return Err(Error::IsospectralCollision {
                index: i,
                z,
                near_null: small,
            });
        }
        let b_inv = block.lu_inverse().ok_or(Error::IsospectralCollision {
            index: i,
            z,
            near_null: small,
        })?;

        // coupling to the next slice and the new correction block
        let w_up = h.block(next, slice);
        let gamma_next = w_up.matmul(&b_inv).matmul(&w_up.transpose());

        // diagnostics for this slice
        if t > 0 {
            let gamma_i = gamma_or_zero(&gammas[t], slice.len());
            let w_in = &w_blocks[t - 1]; // W_{i,i-2}: slice(i-2) -> slice(i)
            let sandwiched = r_sqrt.matmul(w_in).matmul(&r_sqrts[t - 1]);
            let nrm = sandwiched.norm_two();
            let block_norm_product = nrm * nrm;

            let s = r_sqrt.matmul(&gamma_i).matmul(&r_sqrt);
            let (s_vals, _) = s.sym_eigen();
            let s_top = s_vals[s_vals.len() - 1];
            if s_top >= 1.0 {
                return Err(Error::DivergentSeries { index: i, z });
            }
            let gamma_check_norm = 1.0 / (1.0 - s_top);

            // route A: Neumann closed form from the previous level
            let prev_gamma = gamma_or_zero(&gammas[t - 1], projectors.slices[t - 1].len());
            let rs_prev = &r_sqrts[t - 1];
            let s_prev = rs_prev.matmul(&prev_gamma).matmul(rs_prev);
            let mut eye = Mat::identity(s_prev.rows());
            eye = eye.add_scaled(&s_prev, -1.0);
            let inv = eye
                .lu_inverse()
                .ok_or(Error::DivergentSeries { index: i, z })?;
            let route_a = w_in
                .matmul(rs_prev)
                .matmul(&inv)
                .matmul(rs_prev)
                .matmul(&w_in.transpose());
            let scale = gamma_i.max_abs().max(1e-300);
            let gamma_route_rel_diff = route_a.add_scaled(&gamma_i, -1.0).max_abs() / scale;

            diagnostics.push(FlowDiag {
                i,
                block_norm_product,
                gamma_check_norm,
                gamma_route_rel_diff,
            });
        }

        r_blocks.push(r);
        r_sqrts.push(r_sqrt);
        if t == 0 {
            gammas.push(None);
        }
        gammas.push(Some(gamma_next));
        b_blocks.push(b_inv);
        w_blocks.push(w_up);
    }

    // K^(N-2) on the zero-occupation subspace
    let zero = projectors.zero_occupancy();
    let mut k_final = h.block(zero, zero);
    for d in 0..k_final.rows() {
        k_final.add_to(d, d, -w);
    }
    let gamma_nn = gammas[steps].take().expect("final correction present");
    k_final = k_final.add_scaled(&gamma_nn, -1.0);

    Ok(FlowState {
        pair,
        active_count,
        z,
        z_prev,
        shift: w,
        projectors,
        r_blocks,
        r_sqrts,
        gammas,
        b_blocks,
        w_blocks,
        gamma_nn,
        k_final,
        diagnostics,
        hamiltonian: h,
    })
}

fn gamma_or_zero(g: &Option<Mat>, dim: usize) -> Mat {
    g.clone().unwrap_or_else(|| Mat::zeros(dim, dim))
}

impl FlowState {
    /// `Gamma_{i,i}(w)` for even `i >= 2`.
    pub fn gamma(&self, i: u32) -> &Mat {
        self.gammas[(i / 2) as usize]
            .as_ref()
            .expect("gamma defined for i >= 2")
    }

    /// `R_{i,i}(w)` for even `i <= N-2`.
    pub fn r_block(&self, i: u32) -> &Mat {
        &self.r_blocks[(i / 2) as usize]
    }

    /// Inverse of the eliminated block of `K^(i-2)` on slice `i`.
    pub fn b_block(&self, i: u32) -> &Mat {
        &self.b_blocks[(i / 2) as usize]
    }

    /// Coupling block `W_{i+2,i}` (from slice `i` down to slice `i+2`).
    pub fn w_block_up(&self, i: u32) -> &Mat {
        &self.w_blocks[(i / 2) as usize]
    }

    /// Norm distances between the truncated Neumann sums
    /// `S_L = sum_{l<=L} R (Gamma R)^l` and the exact block inverse at
    /// slice `i`; the sequence is monotone when the sandwiched norm is < 1.
    pub fn neumann_partial_distances(&self, i: u32, l_max: usize) -> Vec<f64> {
        let t = (i / 2) as usize;
        let r = &self.r_blocks[t];
        let gamma = gamma_or_zero(&self.gammas[t], r.rows());
        let b = &self.b_blocks[t];
        let gr = gamma.matmul(r);
        let mut term = r.clone();
        let mut sum = r.clone();
        let mut out = Vec::with_capacity(l_max + 1);
        out.push(sum.add_scaled(b, -1.0).norm_two());
        for _ in 0..l_max {
            term = term.matmul(&gr);
            sum = sum.add_scaled(&term, 1.0);
            out.push(sum.add_scaled(b, -1.0).norm_two());
        }
        out
    }
}

/// Reference implementation of the whole chain by repeated generic
/// `feshbach_step` calls on the dense assembled matrix. Small cases only;
/// the slice flow must reproduce its `K^(N-2)`.
pub fn run_dense_chain(
    spec: &PotentialSpec,
    basis: &SectorBasis,
    active_count: usize,
    z: f64,
    z_prev: f64,
) -> Result<Mat> {
    let pair = active_count - 1;
    let active: Vec<usize> = (0..active_count).collect();
    let h = assemble_hbog(spec, basis, &active).to_dense();
    let w = z + z_prev;
    let projectors = ProjectorSet::build(basis, pair);
    let n = basis.n;

    // positions of retained states inside the running matrix
    let mut retained: Vec<usize> = (0..basis.len()).collect();
    let mut k = h;
    for t in 0..(n / 2) as usize {
        let i = 2 * t as u32;
        let low: Vec<usize> = retained
            .iter()
            .enumerate()
            .filter(|(_, &g)| projectors.q_low(i).contains(&g))
            .map(|(loc, _)| loc)
            .collect();
        let high: Vec<usize> = retained
            .iter()
            .enumerate()
            .filter(|(_, &g)| !projectors.q_low(i).contains(&g))
            .map(|(loc, _)| loc)
            .collect();
        // feshbach_step subtracts z from the whole diagonal, so apply the
        // shift once and pass z = 0 on later steps
        let shift = if t == 0 { w } else { 0.0 };
        k = feshbach_step(&k, &high, &low, shift)?;
        retained = high.iter().map(|&loc| retained[loc]).collect();
    }
    Ok(k)
}
