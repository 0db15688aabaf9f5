//! Fixed-point energies on the reduced operators and the ground-state
//! cascade.

use super::flow::{run_pair_flow, FlowState};
use super::{GapLedger, COLLISION_THRESHOLD, GAMMA};
use crate::fockspace::{
    assemble_hbog, ground_state_dense_full, lowest_eigenvalues, PotentialSpec, SectorBasis,
};
use crate::linalg::{self, Mat};
use crate::math;
use crate::prelude::*;
use crate::threemode;
use crate::{Error, Result};

/// Outcome of the final Feshbach step on the zero-occupation subspace.
#[derive(Debug, Clone)]
pub(crate) struct FinalStep {
    /// `f(z) = <psi|K|psi> - <psi|K Pbar (Pbar K Pbar)^{-1} Pbar K|psi>`.
    pub f_value: f64,
    /// Smallest eigenvalue of the complement block (infinity when the
    /// complement is empty).
    pub pbar_smallest_eig: f64,
    /// Correction `-(Pbar K Pbar)^{-1} Pbar K psi_hat` in subspace
    /// coordinates, for the unit vector.
    pub correction: Vec<f64>,
}

/// Orthonormal basis of the complement of a unit vector, as the trailing
/// columns of the Householder reflector that maps `e_0` onto it.
fn complement_basis(psi_hat: &[f64]) -> Mat {
    let q = psi_hat.len();
    let mut v = psi_hat.to_vec();
    let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
    v[0] += sign;
    let vv = linalg::dot(&v, &v);
    // columns 1..q of (I - 2 v v^T / v^T v), which is orthogonal and maps
    // e_0 to -sign * psi_hat
    Mat::from_fn(q, q - 1, |r, c| {
        let col = c + 1;
        let delta = if r == col { 1.0 } else { 0.0 };
        delta - 2.0 * v[r] * v[col] / vv
    })
}

impl FlowState {
    /// The final Feshbach step with the rank-one projection onto `psi_hat`
    /// (unit vector in zero-occupation subspace coordinates).
    pub(crate) fn final_step(&self, psi_hat: &[f64]) -> Result<FinalStep> {
        let k = &self.k_final;
        let q = k.rows();
        assert_eq!(psi_hat.len(), q);
        let u = k.matvec(psi_hat);
        let c1 = linalg::dot(psi_hat, &u);
        if q == 1 {
            return Ok(FinalStep {
                f_value: c1,
                pbar_smallest_eig: f64::INFINITY,
                correction: vec![0.0],
            });
        }
        let basis = complement_basis(psi_hat);
        // M = Q^T K Q on the complement, u_t = Q^T K psi
        let kq = k.matmul(&basis);
        let m = basis.transpose().matmul(&kq);
        let u_t = basis.transpose().matvec(&u);
        let small = m.smallest_eigenvalue();
        let small_abs = m.smallest_abs_eigenvalue();
        if small_abs < COLLISION_THRESHOLD * m.norm_one().max(1.0) {
            return Err(Error::IsospectralCollision {
                index: self.projectors.n,
                z: self.z,
                near_null: small_abs,
            });
        }
        let rhs = Mat::from_rows(u_t.len(), 1, u_t.clone());
        let y = m.lu_solve(&rhs).ok_or(Error::IsospectralCollision {
            index: self.projectors.n,
            z: self.z,
            near_null: small_abs,
        })?;
        let y_col: Vec<f64> = (0..y.rows()).map(|r| y.get(r, 0)).collect();
        let f_value = c1 - linalg::dot(&u_t, &y_col);
        let correction: Vec<f64> = {
            let back = basis.matvec(&y_col);
            back.iter().map(|&x| -x).collect()
        };
        Ok(FinalStep {
            f_value,
            pbar_smallest_eig: small,
            correction,
        })
    }

    /// The structural final operator `K^(N) = f(z) |psi><psi|` on the
    /// zero-occupation subspace.
    pub fn final_rank_one(&self, psi_hat: &[f64]) -> Result<Mat> {
        let step = self.final_step(psi_hat)?;
        Ok(Mat::outer(psi_hat, step.f_value))
    }

    /// Value of the reduced fixed-point function at this flow's z.
    pub fn f_bog(&self, psi_hat: &[f64]) -> Result<f64> {
        Ok(self.final_step(psi_hat)?.f_value)
    }
}

#[derive(Debug, Clone)]
pub struct ZmSolve {
    pub z_m: f64,
    pub iterations: u32,
    pub f_residual: f64,
    pub bracket: (f64, f64),
    /// Flow evaluated at the root.
    pub flow: FlowState,
}

/// Solve `f_bog(z + z_prev) = 0` for step `m` (1-based). `prev_vector` is
/// the previous un-normalized cascade vector in full-basis coordinates
/// (the condensate unit vector for m = 1); `delta_prev` the measured gap
/// below which the complement block must stay positive.
pub fn solve_zm(
    spec: &PotentialSpec,
    basis: &SectorBasis,
    m: usize,
    prev_vector: &[f64],
    z_prev: f64,
    delta_prev: f64,
) -> Result<ZmSolve> {
    let pair = &spec.pairs[m - 1];
    let (n, k2, phi) = (spec.params.n, pair.k2, pair.phi);
    let tol = threemode::default_fp_tol(phi);
    let z_hint = threemode::solve_ground_energy(n, k2, phi, tol)?.z_star;

    // psi_hat on the zero-occupation subspace of the new pair
    let projectors = super::flow::ProjectorSet::build(basis, m - 1);
    let zero = projectors.zero_occupancy().to_vec();
    let mut psi_hat: Vec<f64> = zero.iter().map(|&g| prev_vector[g]).collect();
    let nrm = linalg::norm(&psi_hat);
    assert!(
        nrm > 0.0,
        "previous vector must live in the zero-occupation subspace"
    );
    {
        let outside: f64 = linalg::norm(prev_vector);
        debug_assert!((outside - nrm).abs() <= 1e-12 * nrm.max(1.0));
    }
    linalg::scale_in_place(&mut psi_hat, 1.0 / nrm);

    let lo0 = z_hint - phi;
    let margin = 1e-6 * phi;
    let hi_flow = threemode::z_max(n, k2, phi) - margin;
    let hi0 = (z_hint + GAMMA * delta_prev - margin).min(hi_flow);

    let eval = |z: f64| -> Result<(FlowState, f64)> {
        let flow = run_pair_flow(spec, basis, m, z, z_prev)?;
        let step = flow.final_step(&psi_hat)?;
        if step.pbar_smallest_eig <= 0.0 {
            return Err(Error::GapRegime {
                smallest: step.pbar_smallest_eig,
                required: (1.0 - GAMMA) * delta_prev,
            });
        }
        Ok((flow, step.f_value))
    };

    let mut lo = lo0;
    let (mut flow_best, mut f_lo) = eval(lo)?;
    let mut guard = 0;
    while f_lo <= 0.0 {
        lo = z_hint - phi * math::powi(2.0, guard + 1);
        let r = eval(lo)?;
        flow_best = r.0;
        f_lo = r.1;
        guard += 1;
        if guard > 40 {
            return Err(Error::Regime(
                "no sign change below the fixed-point bracket".into(),
            ));
        }
    }

    let mut hi = hi0;
    let mut best = (lo, f_lo);
    let mut iterations = 0u32;
    for _ in 0..200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        match eval(mid) {
            Ok((flow, f_mid)) => {
                if math::abs(f_mid) < math::abs(best.1) {
                    best = (mid, f_mid);
                    flow_best = flow;
                }
                if f_mid > 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if math::abs(f_mid) <= tol {
                    break;
                }
            }
            // every failure mode of the flow marks z as too high
            Err(Error::DivergentSeries { .. })
            | Err(Error::Admissibility { .. })
            | Err(Error::IsospectralCollision { .. })
            | Err(Error::GapRegime { .. }) => {
                hi = mid;
            }
            Err(e) => return Err(e),
        }
        if hi - lo < 1e-16 * math::abs(lo).max(1.0) {
            break;
        }
    }

    let f_residual = math::abs(best.1);
    if f_residual > tol {
        return Err(Error::Solver {
            message: format!("fixed-point bisection for step {m} stalled at z={}", best.0),
            residual: f_residual,
        });
    }
    Ok(ZmSolve {
        z_m: best.0,
        iterations,
        f_residual,
        bracket: (lo0, hi0),
        flow: flow_best,
    })
}

/// Apply the reconstruction factors of the completed flow to the previous
/// cascade vector: the rank-one correction on the zero-occupation subspace,
/// then the chain of inverse-block times interaction factors, slice by
/// slice. Returns the un-normalized vector in full-basis coordinates.
pub fn build_ground_state_vector(flow: &FlowState, prev_vector: &[f64]) -> Result<Vec<f64>> {
    let zero = flow.projectors.zero_occupancy().to_vec();
    let dim = prev_vector.len();
    let n = flow.projectors.n;

    let psi_prev_sub: Vec<f64> = zero.iter().map(|&g| prev_vector[g]).collect();
    let nrm = linalg::norm(&psi_prev_sub);
    let psi_hat: Vec<f64> = psi_prev_sub.iter().map(|&x| x / nrm).collect();
    let step = flow.final_step(&psi_hat)?;

    // v0 = psi_prev - (Pbar K Pbar)^{-1} Pbar K psi_prev
    let v0: Vec<f64> = psi_prev_sub
        .iter()
        .zip(step.correction.iter())
        .map(|(&a, &c)| a + nrm * c)
        .collect();

    let mut out = vec![0.0; dim];
    for (loc, &g) in zero.iter().enumerate() {
        out[g] = v0[loc];
    }

    // u_1 = -B_{N-2} W*_{N-2,N} v0, then down the slices
    let mut u = v0;
    for r in 1..=(n / 2) {
        let i = n - 2 * r; // destination slice
        let w_up = flow.w_block_up(i); // W_{i+2,i}: slice(i) -> slice(i+2)
        let coupled = w_up.transpose().matvec(&u);
        let b = flow.b_block(i);
        let mut next = b.matvec(&coupled);
        for x in next.iter_mut() {
            *x = -*x;
        }
        let slice = &flow.projectors.slices[(i / 2) as usize];
        for (loc, &g) in slice.iter().enumerate() {
            out[g] += next[loc];
        }
        u = next;
    }
    Ok(out)
}

/// One completed cascade step.
#[derive(Debug, Clone)]
pub struct CascadeStep {
    /// 1-based step index.
    pub m: usize,
    /// Fixed-point increment `z^(m)`.
    pub z_m: f64,
    /// Cumulative ground-state energy of the m-pair Hamiltonian.
    pub z_cumulative: f64,
    /// Un-normalized cascade vector in full-basis coordinates.
    pub vector: Vec<f64>,
    pub norm: f64,
    /// Brute-force ground energy of the intermediate Hamiltonian.
    pub oracle_energy: f64,
    /// Overlap of the normalized cascade vector with the oracle eigenvector.
    pub oracle_overlap: f64,
    /// `||(H - z) psi|| / ||psi||`.
    pub residual: f64,
    pub h_norm_one: f64,
    /// Second-lowest minus lowest oracle eigenvalue.
    pub measured_gap: f64,
    pub f_residual: f64,
    pub solver_iterations: u32,
    /// `<psi, N_+ psi> / ||psi||^2`.
    pub number_expectation: f64,
}

#[derive(Debug, Clone)]
pub struct GroundStateResult {
    pub steps: Vec<CascadeStep>,
    pub ledger: GapLedger,
}

impl GroundStateResult {
    pub fn final_step(&self) -> &CascadeStep {
        self.steps.last().expect("cascade has at least one step")
    }
}

/// Run the whole cascade over the spec's pair order.
pub fn cascade_all_modes(spec: &PotentialSpec) -> Result<GroundStateResult> {
    let basis = SectorBasis::build(spec)?;
    cascade_with_basis(spec, &basis)
}

pub fn cascade_with_basis(spec: &PotentialSpec, basis: &SectorBasis) -> Result<GroundStateResult> {
    let mut ledger = GapLedger::new(spec.params.delta0(), 1.0, 1.0);
    let mut steps: Vec<CascadeStep> = Vec::new();

    let mut prev_vector = vec![0.0; basis.len()];
    prev_vector[basis.index_of_eta] = 1.0;
    let mut z_cum = 0.0;

    for m in 1..=spec.mode_count() {
        let delta_prev = ledger.measured_delta(m - 1);
        let solve = solve_zm(spec, basis, m, &prev_vector, z_cum, delta_prev)?;
        let z_cum_next = z_cum + solve.z_m;
        let vector = build_ground_state_vector(&solve.flow, &prev_vector)?;
        let norm = linalg::norm(&vector);

        // oracle on the intermediate Hamiltonian
        let active: Vec<usize> = (0..m).collect();
        let h = assemble_hbog(spec, basis, &active);
        let dense = h.to_dense();
        let oracle = ground_state_dense_full(&dense)?;
        let low2 = lowest_eigenvalues(&dense, 2);
        let measured_gap = low2[1] - low2[0];

        let psi_hat: Vec<f64> = vector.iter().map(|&x| x / norm).collect();
        let oracle_overlap = math::abs(linalg::dot(&psi_hat, &oracle.vector));
        let hv = h.matvec(&vector);
        let mut res2 = 0.0;
        for s in 0..vector.len() {
            let d = hv[s] - z_cum_next * vector[s];
            res2 += d * d;
        }
        let residual = math::sqrt(res2) / norm;

        let number_expectation = basis.number_expectation(&vector);
        ledger.push_step(
            spec.params.n,
            measured_gap,
            spec.pairs[m - 1].k2 + spec.pairs[m - 1].phi,
        );

        steps.push(CascadeStep {
            m,
            z_m: solve.z_m,
            z_cumulative: z_cum_next,
            vector: vector.clone(),
            norm,
            oracle_energy: oracle.energy,
            oracle_overlap,
            residual,
            h_norm_one: h.norm_one(),
            measured_gap,
            f_residual: solve.f_residual,
            solver_iterations: solve.iterations,
            number_expectation,
        });

        prev_vector = vector;
        z_cum = z_cum_next;
    }

    Ok(GroundStateResult { steps, ledger })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::{ground_state_tridiag, pair_tridiagonal, ModePair, ModelParams};

    fn spec1(n: u32, k2: f64, phi: f64) -> PotentialSpec {
        let l = 2.0 * std::f64::consts::PI / k2.sqrt();
        let params = ModelParams::new(n, 1, l).unwrap();
        let pair = ModePair::new(vec![1], l, phi).unwrap();
        PotentialSpec::new(params, 0.0, vec![pair]).unwrap()
    }

    fn spec2(n: u32, eps: f64) -> PotentialSpec {
        let params = ModelParams::new(n, 1, 1.0).unwrap();
        let p1 = ModePair::with_eps(vec![1], 1.0, eps).unwrap();
        let p2 = ModePair::with_eps(vec![2], 1.0, eps).unwrap();
        PotentialSpec::new(params, 0.0, vec![p1, p2]).unwrap()
    }

    #[test]
    fn first_step_matches_scalar_fixed_point() {
        let (n, k2, phi) = (40u32, 1.0, 10.0);
        let spec = spec1(n, k2, phi);
        let basis = SectorBasis::build(&spec).unwrap();
        let mut eta = vec![0.0; basis.len()];
        eta[basis.index_of_eta] = 1.0;
        let solve = solve_zm(&spec, &basis, 1, &eta, 0.0, spec.params.delta0()).unwrap();
        let scalar = threemode::solve_ground_energy(n, k2, phi, threemode::default_fp_tol(phi))
            .unwrap()
            .z_star;
        assert!(
            (solve.z_m - scalar).abs() <= 1e-9 * scalar.abs(),
            "matrix root {} vs scalar root {}",
            solve.z_m,
            scalar
        );
    }

    #[test]
    fn cascade_single_pair_overlaps_oracle() {
        let (n, k2, phi) = (40u32, 1.0, 10.0);
        let spec = spec1(n, k2, phi);
        let result = cascade_all_modes(&spec).unwrap();
        let step = result.final_step();
        assert!(step.oracle_overlap >= 1.0 - 1e-10);
        assert!(step.norm >= 1.0);
        assert!(step.residual <= 1e-8 * step.h_norm_one);
        // leading component along the condensate has coefficient one
        assert!((step.vector[0] - 1.0).abs() < 1e-12);
        let t = pair_tridiagonal(&spec, 0);
        let (lam, _) = ground_state_tridiag(&t).unwrap();
        assert!((step.z_cumulative - lam).abs() <= 1e-9 * lam.abs());
    }

    #[test]
    fn cascade_two_pairs_small_n_matches_dense_oracle() {
        let spec = spec2(8, 0.1);
        let result = cascade_all_modes(&spec).unwrap();
        let s2 = result.final_step();
        assert!(
            (s2.z_cumulative - s2.oracle_energy).abs() <= 1e-8 * s2.oracle_energy.abs(),
            "cascade {} vs oracle {}",
            s2.z_cumulative,
            s2.oracle_energy
        );
    }

    #[test]
    fn cascade_two_pairs_matches_dense_oracle() {
        let spec = spec2(20, 0.1);
        let result = cascade_all_modes(&spec).unwrap();
        assert_eq!(result.steps.len(), 2);
        let s2 = &result.steps[1];
        assert!(
            (s2.z_cumulative - s2.oracle_energy).abs() <= 1e-8 * s2.oracle_energy.abs(),
            "cascade {} vs oracle {}",
            s2.z_cumulative,
            s2.oracle_energy
        );
        // norm chain grows
        assert!(result.steps[1].norm >= result.steps[0].norm);
        assert!(result.steps[0].norm >= 1.0);
        // number bound from the gap ledger
        let bound =
            (spec.pairs[0].phi + spec.pairs[1].phi) / result.ledger.delta0;
        assert!(s2.number_expectation <= bound);
    }

    #[test]
    fn fixed_point_increment_approaches_scalar_root_with_n() {
        // |z^(2) - z_2| shrinks as N grows
        let mut prev_gap = f64::INFINITY;
        for n in [20u32, 40, 80] {
            let spec = spec2(n, 0.1);
            let result = cascade_all_modes(&spec).unwrap();
            let z2 = result.steps[1].z_m;
            let pair = &spec.pairs[1];
            let scalar = threemode::solve_ground_energy(
                n,
                pair.k2,
                pair.phi,
                threemode::default_fp_tol(pair.phi),
            )
            .unwrap()
            .z_star;
            let gap = (z2 - scalar).abs();
            assert!(gap < prev_gap, "N={n}: {gap} !< {prev_gap}");
            prev_gap = gap;
        }
    }

    #[test]
    fn reconstruction_orders_match_cascade_order_swap() {
        // final energies agree when the cascade order is swapped; N must be
        // large enough that the second step's increment stays inside the
        // admissible window of the weaker pair
        let spec_a = spec2(32, 0.1);
        let params = ModelParams::new(32, 1, 1.0).unwrap();
        let p1 = ModePair::with_eps(vec![2], 1.0, 0.1).unwrap();
        let p2 = ModePair::with_eps(vec![1], 1.0, 0.1).unwrap();
        let spec_b = PotentialSpec::new(params, 0.0, vec![p1, p2]).unwrap();
        let ra = cascade_all_modes(&spec_a).unwrap();
        let rb = cascade_all_modes(&spec_b).unwrap();
        let ea = ra.final_step().z_cumulative;
        let eb = rb.final_step().z_cumulative;
        assert!((ea - eb).abs() <= 1e-8 * ea.abs(), "{ea} vs {eb}");
    }

    #[test]
    fn final_rank_one_is_structurally_rank_one() {
        let (n, k2, phi) = (20u32, 1.0, 10.0);
        let spec = spec1(n, k2, phi);
        let basis = SectorBasis::build(&spec).unwrap();
        let mut eta = vec![0.0; basis.len()];
        eta[basis.index_of_eta] = 1.0;
        let solve = solve_zm(&spec, &basis, 1, &eta, 0.0, spec.params.delta0()).unwrap();
        let kn = solve.flow.final_rank_one(&[1.0]).unwrap();
        assert_eq!(kn.rows(), 1);
        assert!(kn.get(0, 0).abs() <= threemode::default_fp_tol(phi));
    }
}
