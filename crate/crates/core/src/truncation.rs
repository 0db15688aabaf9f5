//! Truncated expansions and their error laws: the depth-h window recursion
//! for the correction blocks, the zero-mode-deficit scalar family with its
//! sensitivity bound, and the bare-operator expansion of the cascade vector.

use crate::cascade::{build_ground_state_vector, FlowState, GroundStateResult};
use crate::fockspace::{w_lower_block, PotentialSpec, SectorBasis};
use crate::linalg::{self, Mat};
use crate::math;
use crate::prelude::*;
use crate::threemode::{bogoliubov_energy, z_max};
use crate::{Error, Result};

/// Knobs of the truncated expansions.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationParams {
    /// Truncation depth (even, >= 2, with N - h - 4 >= 0).
    pub h: u32,
    /// Outer chain cutoff.
    pub jbar: u32,
    /// Target relative error of the bare expansion.
    pub zeta: f64,
    /// Zero-mode deficit, treated as a real parameter.
    pub dn0: f64,
}

impl TruncationParams {
    pub fn validate(&self, n: u32) -> Result<()> {
        if self.h % 2 != 0 || self.h < 2 {
            return Err(Error::InvalidModel(format!(
                "truncation depth h must be even and >= 2, got {}",
                self.h
            )));
        }
        if n < self.h + 4 {
            return Err(Error::InvalidModel(format!(
                "N - h - 4 must be nonnegative (N={n}, h={})",
                self.h
            )));
        }
        if !(self.zeta > 0.0) {
            return Err(Error::InvalidModel("zeta must be positive".into()));
        }
        if self.dn0 < 0.0 || self.dn0 > self.h as f64 {
            return Err(Error::InvalidModel(format!(
                "dn0 must lie in [0, h], got {}",
                self.dn0
            )));
        }
        Ok(())
    }

    /// Default `h = jbar = floor(sqrt(ln N))` rounded down to even,
    /// floored at 2.
    pub fn defaults_for(n: u32, zeta: f64) -> Self {
        let raw = math::floor(math::sqrt(math::ln(n as f64))) as u32;
        let h = (raw - raw % 2).max(2);
        TruncationParams {
            h,
            jbar: h,
            zeta,
            dn0: 0.0,
        }
    }
}

/// Depth-h window family `[Gamma^(i)]_{tau_h}` for `i = N-2-h .. N-2`.
#[derive(Debug, Clone)]
pub struct GammaTauFamily {
    pub h: u32,
    /// `blocks[t]` lives on the slice with `i = N - 2 - h + 2t`.
    pub blocks: Vec<Mat>,
    /// `||Gamma^(N-2) - [Gamma^(N-2)]_{tau_h}||` against the flow's exact block.
    pub residual: f64,
}

fn horner_neumann(gamma: &Mat, r: &Mat, terms: u32) -> Mat {
    // sum_{l=0}^{terms-1} (Gamma R)^l via nested evaluation
    let dim = gamma.rows();
    let gr = gamma.matmul(r);
    let mut s = Mat::identity(dim);
    for _ in 1..terms {
        s = Mat::identity(dim).add_scaled(&gr.matmul(&s), 1.0);
    }
    s
}

/// Evaluate the window recursion on a completed flow:
/// base `W R_{N-4-h} W*`, then
/// `[Gamma_i] = W R_{i-2} sum_{l<h} ([Gamma_{i-2}] R_{i-2})^l W*`.
pub fn gamma_tau_h(flow: &FlowState, h: u32) -> Result<GammaTauFamily> {
    let n = flow.projectors.n;
    assert!(h % 2 == 0 && h >= 2);
    if n < h + 4 {
        return Err(Error::InvalidModel(format!(
            "window recursion needs N >= h + 4 (N={n}, h={h})"
        )));
    }
    let base_i = n - 2 - h;
    let mut blocks = Vec::with_capacity((h / 2 + 1) as usize);
    {
        let w = flow.w_block_up(base_i - 2); // W_{base, base-2}
        let r = flow.r_block(base_i - 2);
        blocks.push(w.matmul(r).matmul(&w.transpose()));
    }
    let mut i = base_i + 2;
    while i <= n - 2 {
        let prev = blocks.last().expect("window base present");
        let r = flow.r_block(i - 2);
        let w = flow.w_block_up(i - 2);
        let s = horner_neumann(prev, r, h);
        blocks.push(w.matmul(&r.matmul(&s)).matmul(&w.transpose()));
        i += 2;
    }
    let exact = flow.gamma(n - 2);
    let residual = blocks
        .last()
        .expect("window top present")
        .add_scaled(exact, -1.0)
        .norm_two();
    Ok(GammaTauFamily {
        h,
        blocks,
        residual,
    })
}

/// The same object evaluated by symbolically unrolling the recursion into a
/// flat sum of block products and summing the evaluated terms. Exponential
/// in h, so a term cap guards it; it exists purely as an independent check
/// of the window recursion.
pub fn gamma_tau_h_unrolled(flow: &FlowState, h: u32, term_cap: u128) -> Result<Mat> {
    let n = flow.projectors.n;
    let base_i = n - 2 - h;

    // predicted term counts per level
    let mut count: u128 = 1;
    let mut i = base_i + 2;
    while i <= n - 2 {
        let mut level: u128 = 0;
        let mut power: u128 = 1;
        for _ in 0..h {
            level = level.saturating_add(power);
            power = power.saturating_mul(count);
            if level > term_cap || power > term_cap {
                return Err(Error::Regime(format!(
                    "unrolled evaluation exceeds {term_cap} terms at h={h}"
                )));
            }
        }
        count = level;
        i += 2;
    }

    fn terms(flow: &FlowState, h: u32, base_i: u32, i: u32) -> Vec<Mat> {
        let w = flow.w_block_up(i - 2);
        let r = flow.r_block(i - 2);
        if i == base_i {
            return vec![w.matmul(r).matmul(&w.transpose())];
        }
        let prev = terms(flow, h, base_i, i - 2);
        let mut out = Vec::new();
        // l = 0
        out.push(w.matmul(r).matmul(&w.transpose()));
        // ordered tuples (t_1, ..., t_l) for 1 <= l <= h-1
        let mut tuples: Vec<Mat> = vec![r.clone()]; // running products R (T R)^l
        for _ in 1..h {
            let mut next_tuples = Vec::with_capacity(tuples.len() * prev.len());
            for partial in &tuples {
                for t in &prev {
                    let extended = partial.matmul(&t.matmul(r));
                    out.push(w.matmul(&extended).matmul(&w.transpose()));
                    next_tuples.push(extended);
                }
            }
            tuples = next_tuples;
        }
        out
    }

    let all = terms(flow, h, base_i, n - 2);
    let dim = all[0].rows();
    let mut sum = Mat::zeros(dim, dim);
    for t in &all {
        sum = sum.add_scaled(t, 1.0);
    }
    Ok(sum)
}

/// Scalar deficit family table.
#[derive(Debug, Clone)]
pub struct GTauTable {
    pub n: u32,
    pub k2: f64,
    pub phi: f64,
    pub z: f64,
    pub h: u32,
    pub dn0: f64,
    /// `values[t]` at `i = N - h - 4 + 2t`; `values[0] = 1`.
    pub values: Vec<f64>,
}

impl GTauTable {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("table never empty")
    }
}

/// The deficit-shifted factor
/// `[WW*]_{dn0}(i, z)` of the modified scalar recursion.
pub fn ww_star_dn0(i: u32, z: f64, n: u32, k2: f64, phi: f64, dn0: f64) -> Result<f64> {
    let nf = n as f64;
    let i_f = i as f64;
    let d1 = ((i_f - dn0) * phi / nf + k2) * (nf - i_f) - z;
    let d2 = ((i_f - 2.0 - dn0) * phi / nf + k2) * (nf - i_f + 2.0) - z;
    if d1 <= 0.0 || d2 <= 0.0 {
        return Err(Error::Admissibility { index: i, z });
    }
    let pref = (i_f - dn0 - 1.0) * (i_f - dn0) / (nf * nf) * phi * phi;
    let top = (nf - i_f + 2.0) * (nf - i_f + 2.0);
    Ok(pref * top / (4.0 * d1 * d2))
}

/// Evaluate the `[Gcheck]_{tau_h; dn0}` table over the window, with the
/// truncated geometric sums evaluated literally.
pub fn g_tau_dn0(z: f64, n: u32, k2: f64, phi: f64, h: u32, dn0: f64) -> Result<GTauTable> {
    let params = TruncationParams {
        h,
        jbar: h,
        zeta: 1.0,
        dn0,
    };
    params.validate(n)?;
    let eps = k2 / phi;
    let cap = bogoliubov_energy(k2, phi) + math::sqrt(eps) * phi * math::sqrt(eps * eps + 2.0 * eps)
        - (h as f64 + 4.0) * phi / n as f64;
    if z > cap {
        return Err(Error::Admissibility { index: n, z });
    }
    let base = n - h - 4;
    if (base as f64) < dn0 + 2.0 - 2.0 {
        // the smallest evaluated index is base + 2; its factor needs
        // i - dn0 - 2 >= 0
        return Err(Error::InvalidModel(format!(
            "deficit {dn0} too large for the window base i={base}"
        )));
    }
    let mut values = vec![1.0];
    let mut prev = 1.0;
    let mut i = base + 2;
    while i <= n - 2 {
        let x = ww_star_dn0(i, z, n, k2, phi, dn0)? * prev;
        // literal truncated geometric sum
        let mut s = 0.0;
        let mut pow = 1.0;
        for _ in 0..h {
            s += pow;
            pow *= x;
        }
        prev = s;
        values.push(prev);
        i += 2;
    }
    Ok(GTauTable {
        n,
        k2,
        phi,
        z,
        h,
        dn0,
        values,
    })
}

/// Finite-difference sensitivity of the deficit family.
#[derive(Debug, Clone)]
pub struct SensitivityReport {
    pub h: u32,
    pub n: u32,
    /// `(i, dn0, derivative, unit_bound)` where the unit bound is
    /// `h * 4^{i-N+h} / sqrt(N)`.
    pub points: Vec<(u32, f64, f64, f64)>,
    /// Smallest constant making the bound hold over all points.
    pub k_fit: f64,
}

/// Central finite differences of the table values in the deficit, compared
/// against the `K h g^{i-N+h} / sqrt(N)` envelope at `g = 4`.
pub fn dn0_sensitivity(z: f64, n: u32, k2: f64, phi: f64, h: u32) -> Result<SensitivityReport> {
    let step = 1e-3;
    let mut points = Vec::new();
    let mut k_fit = 0.0f64;
    for dn0_int in 1..h {
        let dn0 = dn0_int as f64;
        let plus = g_tau_dn0(z, n, k2, phi, h, dn0 + step)?;
        let minus = g_tau_dn0(z, n, k2, phi, h, dn0 - step)?;
        for (t, (vp, vm)) in plus.values.iter().zip(minus.values.iter()).enumerate() {
            let i = n - h - 4 + 2 * t as u32;
            let deriv = (vp - vm) / (2.0 * step);
            let unit = h as f64 * math::powi(4.0, i as i32 - n as i32 + h as i32)
                / math::sqrt(n as f64);
            if t == 0 {
                // base level is constant one
                debug_assert_eq!(deriv, 0.0);
            }
            if i >= n - h - 2 {
                points.push((i, dn0, deriv, unit));
                k_fit = k_fit.max(math::abs(deriv) / unit);
            }
        }
    }
    Ok(SensitivityReport {
        h,
        n,
        points,
        k_fit,
    })
}

/// How the expansion replaces the flow's inverse blocks.
pub enum ExpansionMode<'a> {
    /// The full truncation: identity for the final projection factor, chain
    /// depth `jbar`, everywhere-h-truncated correction blocks on the
    /// kinetic-only resolvents, all at `z = E_bog` per pair.
    Truncated { h: u32, jbar: u32 },
    /// The flow's exact blocks and full chain depth; isolates formula error
    /// from truncation error and must reproduce the cascade vector.
    Exact { flows: &'a [FlowState] },
}

#[derive(Debug, Clone)]
pub struct ExpansionReport {
    pub vector: Vec<f64>,
    /// `||psi - psi_zeta|| / ||psi||` against the cascade vector.
    pub rel_error: f64,
}

/// Evaluate the bare-operator expansion of the cascade vector.
pub fn bare_operator_expansion(
    spec: &PotentialSpec,
    basis: &SectorBasis,
    result: &GroundStateResult,
    mode: ExpansionMode<'_>,
) -> Result<ExpansionReport> {
    let mut v = vec![0.0; basis.len()];
    v[basis.index_of_eta] = 1.0;

    match mode {
        ExpansionMode::Exact { flows } => {
            assert_eq!(flows.len(), spec.mode_count());
            for flow in flows {
                v = build_ground_state_vector(flow, &v)?;
            }
        }
        ExpansionMode::Truncated { h, jbar } => {
            for m in 1..=spec.mode_count() {
                v = truncated_step(spec, basis, m, h, jbar, &v)?;
            }
        }
    }

    let psi = &result.final_step().vector;
    let mut diff2 = 0.0;
    for (a, b) in psi.iter().zip(v.iter()) {
        diff2 += (a - b) * (a - b);
    }
    let rel_error = math::sqrt(diff2) / linalg::norm(psi);
    Ok(ExpansionReport {
        vector: v,
        rel_error,
    })
}

/// One pair's truncated reconstruction factor applied to `v`.
fn truncated_step(
    spec: &PotentialSpec,
    basis: &SectorBasis,
    m: usize,
    h: u32,
    jbar: u32,
    v: &[f64],
) -> Result<Vec<f64>> {
    let n = basis.n;
    let pair = &spec.pairs[m - 1];
    let e_bog = bogoliubov_energy(pair.k2, pair.phi);
    debug_assert!(e_bog < z_max(n, pair.k2, pair.phi));
    let projectors = crate::cascade::ProjectorSet::build(basis, m - 1);

    // kinetic-only resolvents per slice: the earlier pairs' operators are
    // dropped wholesale, later pairs keep their kinetic energy
    let r_tilde = |i: u32| -> Mat {
        let slice = &projectors.slices[(i / 2) as usize];
        let nf = spec.params.n as f64;
        let mut r = Mat::zeros(slice.len(), slice.len());
        for (loc, &g) in slice.iter().enumerate() {
            let state = basis.state(g);
            let n0 = basis.n_zero(g);
            let mut diag = (pair.k2 + pair.phi * n0 as f64 / nf) * (2 * state[m - 1]) as f64;
            for l in m..basis.mode_count {
                diag += spec.pairs[l].k2 * (2 * state[l]) as f64;
            }
            diag -= e_bog;
            // Hhat0 >= 0 and E_bog < 0 keep this strictly positive
            assert!(diag > 0.0, "kinetic-only resolvent must be positive");
            r.set(loc, loc, 1.0 / diag);
        }
        r
    };

    // everywhere-h-truncated correction blocks, bottom of the ladder upward
    let steps = (n / 2) as usize;
    let mut gamma_h: Vec<Option<Mat>> = vec![None; steps + 1];
    let mut r_cache: Vec<Mat> = Vec::with_capacity(steps);
    for t in 0..steps {
        let i = 2 * t as u32;
        let r = r_tilde(i);
        let w = w_lower_block(spec, basis, m - 1, i);
        let next = match &gamma_h[t] {
            Some(g) => {
                let s = horner_neumann(g, &r, h);
                w.matmul(&r.matmul(&s)).matmul(&w.transpose())
            }
            None => w.matmul(&r).matmul(&w.transpose()),
        };
        gamma_h[t + 1] = Some(next);
        r_cache.push(r);
    }

    // truncated inverse blocks sum_{l<=h} R (Gamma R)^l
    let b_tilde = |i: u32| -> Mat {
        let t = (i / 2) as usize;
        let r = &r_cache[t];
        let gamma = gamma_h[t].clone().unwrap_or_else(|| Mat::zeros(r.rows(), r.cols()));
        let s = horner_neumann(&gamma, r, h + 1);
        r.matmul(&s)
    };

    // step i: the final projection factor becomes the identity
    let zero = projectors.zero_occupancy().to_vec();
    let v0: Vec<f64> = zero.iter().map(|&g| v[g]).collect();
    let mut out = vec![0.0; basis.len()];
    for (loc, &g) in zero.iter().enumerate() {
        out[g] = v0[loc];
    }

    let mut u = v0;
    for r in 1..=jbar.min(n / 2) {
        let i = n - 2 * r;
        let w_up = w_lower_block(spec, basis, m - 1, i);
        let coupled = w_up.transpose().matvec(&u);
        let b = b_tilde(i);
        let mut next = b.matvec(&coupled);
        for x in next.iter_mut() {
            *x = -*x;
        }
        let slice = &projectors.slices[(i / 2) as usize];
        for (loc, &g) in slice.iter().enumerate() {
            out[g] += next[loc];
        }
        u = next;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::{cascade_with_basis, run_pair_flow};
    use crate::fockspace::{ModePair, ModelParams};
    use crate::threemode;

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

    fn single_pair_flow(n: u32, k2: f64, phi: f64) -> (PotentialSpec, SectorBasis, FlowState) {
        let spec = spec1(n, k2, phi);
        let basis = SectorBasis::build(&spec).unwrap();
        let z = threemode::solve_ground_energy(n, k2, phi, threemode::default_fp_tol(phi))
            .unwrap()
            .z_star;
        let flow = run_pair_flow(&spec, &basis, 1, z, 0.0).unwrap();
        (spec, basis, flow)
    }

    #[test]
    fn window_base_is_w_r_w() {
        let (_, _, flow) = single_pair_flow(20, 1.0, 10.0);
        let h = 2;
        let fam = gamma_tau_h(&flow, h).unwrap();
        let n = 20;
        let base_i = n - 2 - h;
        let w = flow.w_block_up(base_i - 2);
        let expect = w.matmul(flow.r_block(base_i - 2)).matmul(&w.transpose());
        let diff = fam.blocks[0].add_scaled(&expect, -1.0).max_abs();
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn residual_decreases_in_h() {
        let (_, _, flow) = single_pair_flow(60, 1.0, 10.0);
        let mut prev = f64::INFINITY;
        for h in [2u32, 4, 6, 8] {
            let fam = gamma_tau_h(&flow, h).unwrap();
            assert!(fam.residual < prev, "h={h}: {} !< {prev}", fam.residual);
            prev = fam.residual;
        }
    }

    #[test]
    fn unrolled_evaluation_matches_recursion() {
        for (n, mode_count) in [(24u32, 1usize), (16, 2)] {
            let (spec, basis) = if mode_count == 1 {
                let s = spec1(n, 1.0, 10.0);
                let b = SectorBasis::build(&s).unwrap();
                (s, b)
            } else {
                let s = spec2(n, 0.1);
                let b = SectorBasis::build(&s).unwrap();
                (s, b)
            };
            let pair = &spec.pairs[mode_count - 1];
            let z_prev = if mode_count == 2 {
                cascade_with_basis(&spec, &basis).unwrap().steps[0].z_cumulative
            } else {
                0.0
            };
            let z = threemode::solve_ground_energy(
                n,
                pair.k2,
                pair.phi,
                threemode::default_fp_tol(pair.phi),
            )
            .unwrap()
            .z_star
                - 0.05 * pair.phi;
            let flow = run_pair_flow(&spec, &basis, mode_count, z, z_prev).unwrap();
            for h in [2u32, 4] {
                let fam = gamma_tau_h(&flow, h).unwrap();
                let unrolled = gamma_tau_h_unrolled(&flow, h, 1_000_000).unwrap();
                let top = fam.blocks.last().unwrap();
                let rel = unrolled.add_scaled(top, -1.0).max_abs() / top.max_abs().max(1e-300);
                assert!(rel <= 1e-12, "N={n} M={mode_count} h={h}: rel {rel}");
            }
        }
    }

    #[test]
    fn unrolled_evaluation_bails_beyond_cap() {
        let (_, _, flow) = single_pair_flow(24, 1.0, 10.0);
        assert!(matches!(
            gamma_tau_h_unrolled(&flow, 8, 1_000_000),
            Err(Error::Regime(_))
        ));
    }

    #[test]
    fn g_tau_base_and_deficit_monotonicity() {
        let (n, k2, phi) = (40u32, 1.0, 10.0);
        let h = 4u32;
        let z = bogoliubov_energy(k2, phi) - 0.5 * phi;
        let mut prev: Option<Vec<f64>> = None;
        for dn0 in [0.0, 1.0, 2.0, 3.0, 4.0] {
            let t = g_tau_dn0(z, n, k2, phi, h, dn0).unwrap();
            assert_eq!(t.values[0], 1.0);
            assert!(t.values.iter().all(|&v| v >= 1.0 && v.is_finite()));
            // non-increasing in the deficit, level by level
            if let Some(p) = &prev {
                for (a, b) in p.iter().zip(t.values.iter()) {
                    assert!(b <= a, "values increased in dn0: {b} > {a}");
                }
            }
            prev = Some(t.values);
        }
    }

    #[test]
    fn g_tau_approaches_full_table() {
        // widest window, zero deficit: the values line up with the
        // continued-fraction table
        let (n, k2, phi) = (40u32, 1.0, 10.0);
        let h = n - 4;
        let z = bogoliubov_energy(k2, phi) - 2.0 * phi;
        let tau = g_tau_dn0(z, n, k2, phi, h, 0.0).unwrap();
        let full = threemode::check_g(z, n, k2, phi).unwrap();
        // tau table starts at i = 0  (N - h - 4 = 0)
        assert_eq!(tau.values.len(), full.values.len());
        for (a, b) in tau.values.iter().zip(full.values.iter()) {
            assert!((a - b).abs() <= 1e-10 * b, "{a} vs {b}");
        }
    }

    #[test]
    fn deficit_factor_dominated_by_shifted_factor() {
        let (n, k2, phi) = (60u32, 1.0, 10.0);
        let h = 4u32;
        let z = bogoliubov_energy(k2, phi) - 0.8 * phi;
        let shift = (h as f64 + 4.0) * phi / n as f64;
        for i in [(n - h - 2), n - 4, n - 2] {
            for dn0 in [0.0, 1.0, 2.5, 4.0] {
                let lhs = ww_star_dn0(i, z, n, k2, phi, dn0).unwrap();
                let rhs = threemode::ww_star(i, z + shift, n, k2, phi).unwrap();
                assert!(lhs <= rhs + 1e-15, "i={i} dn0={dn0}: {lhs} > {rhs}");
            }
        }
    }

    #[test]
    fn sensitivity_base_level_flat_and_scaling() {
        let (k2, phi) = (1.0, 10.0);
        let h = 4u32;
        let mut prev_max: Option<f64> = None;
        for n in [60u32, 120, 240] {
            let z = bogoliubov_energy(k2, phi) - 0.5 * phi;
            let rep = dn0_sensitivity(z, n, k2, phi, h).unwrap();
            assert!(rep.k_fit.is_finite() && rep.k_fit > 0.0);
            let max_deriv = rep
                .points
                .iter()
                .map(|&(_, _, d, _)| d.abs())
                .fold(0.0f64, f64::max);
            if let Some(prev) = prev_max {
                assert!(max_deriv < prev, "derivatives must shrink with N");
            }
            prev_max = Some(max_deriv);
        }
    }

    #[test]
    fn exact_expansion_reproduces_cascade_vector() {
        let spec = spec1(40, 1.0, 10.0);
        let basis = SectorBasis::build(&spec).unwrap();
        let result = cascade_with_basis(&spec, &basis).unwrap();
        let flow = run_pair_flow(&spec, &basis, 1, result.steps[0].z_m, 0.0).unwrap();
        let rep = bare_operator_expansion(
            &spec,
            &basis,
            &result,
            ExpansionMode::Exact { flows: &[flow] },
        )
        .unwrap();
        assert!(rep.rel_error <= 1e-10, "rel error {}", rep.rel_error);
    }

    #[test]
    fn exact_expansion_reproduces_two_pair_vector() {
        let spec = spec2(16, 0.1);
        let basis = SectorBasis::build(&spec).unwrap();
        let result = cascade_with_basis(&spec, &basis).unwrap();
        let flow1 = run_pair_flow(&spec, &basis, 1, result.steps[0].z_m, 0.0).unwrap();
        let flow2 = run_pair_flow(
            &spec,
            &basis,
            2,
            result.steps[1].z_m,
            result.steps[0].z_cumulative,
        )
        .unwrap();
        let rep = bare_operator_expansion(
            &spec,
            &basis,
            &result,
            ExpansionMode::Exact {
                flows: &[flow1, flow2],
            },
        )
        .unwrap();
        assert!(rep.rel_error <= 1e-10, "rel error {}", rep.rel_error);
    }

    #[test]
    fn truncated_expansion_structure_small_orders() {
        // jbar = 1, h = 2: eta plus the first-order term only
        let spec = spec1(20, 1.0, 10.0);
        let basis = SectorBasis::build(&spec).unwrap();
        let result = cascade_with_basis(&spec, &basis).unwrap();
        let rep = bare_operator_expansion(
            &spec,
            &basis,
            &result,
            ExpansionMode::Truncated { h: 2, jbar: 1 },
        )
        .unwrap();
        // eta coefficient one, exactly one more slice populated
        assert_eq!(rep.vector[basis.index_of_eta], 1.0);
        let populated = rep.vector.iter().filter(|&&x| x != 0.0).count();
        assert_eq!(populated, 2);
        // the first-order coefficient is -(W* eta) / (H0 - E_bog) up to the
        // truncated correction, so it has the opposite sign of W*
        let p1 = basis.index_of(&[1]).unwrap();
        assert!(rep.vector[p1] < 0.0);
    }

    #[test]
    fn truncated_expansion_error_decreases_in_truncation_order() {
        let spec = spec1(100, 1.0, 10.0);
        let basis = SectorBasis::build(&spec).unwrap();
        let result = cascade_with_basis(&spec, &basis).unwrap();
        let mut prev = f64::INFINITY;
        for hj in [2u32, 4, 6, 10, 16] {
            let rep = bare_operator_expansion(
                &spec,
                &basis,
                &result,
                ExpansionMode::Truncated { h: hj, jbar: hj },
            )
            .unwrap();
            assert!(rep.rel_error < prev, "hj={hj}: {} !< {prev}", rep.rel_error);
            prev = rep.rel_error;
        }
    }

    #[test]
    fn truncated_expansion_error_decreases_in_n_once_tails_are_subdominant() {
        // at fixed shallow truncation the chain tail saturates upward with N;
        // once (jbar, h) are deep enough the remaining error is the
        // z -> E_bog replacement, which shrinks like 1/N
        let mut prev = f64::INFINITY;
        for n in [60u32, 120, 240] {
            let spec = spec1(n, 1.0, 10.0);
            let basis = SectorBasis::build(&spec).unwrap();
            let result = cascade_with_basis(&spec, &basis).unwrap();
            let rep = bare_operator_expansion(
                &spec,
                &basis,
                &result,
                ExpansionMode::Truncated { h: 16, jbar: 16 },
            )
            .unwrap();
            assert!(rep.rel_error < prev, "N={n}: {} !< {prev}", rep.rel_error);
            prev = rep.rel_error;
        }
    }
}
