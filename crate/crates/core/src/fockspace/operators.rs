//! Hamiltonian assembly on the enumerated bases.
//!
//! Every operator is emitted with both triangles produced from the same
//! formula, so symmetry holds exactly, entry by entry.

use super::basis::{GeneralBasis, SectorBasis};
use super::PotentialSpec;
use crate::linalg::{Mat, Tridiagonal};
use crate::math;
use crate::prelude::*;

/// Symmetric sparse operator in coordinate form.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    pub dim: usize,
    /// `(row, col, value)` triples; both triangles present.
    pub entries: Vec<(u32, u32, f64)>,
}

impl SparseOperator {
    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for &(r, c, val) in &self.entries {
            out[r as usize] += val * v[c as usize];
        }
        out
    }

    pub fn to_dense(&self) -> Mat {
        let mut m = Mat::zeros(self.dim, self.dim);
        for &(r, c, val) in &self.entries {
            m.add_to(r as usize, c as usize, val);
        }
        m
    }

    pub fn norm_one(&self) -> f64 {
        let mut col = vec![0.0f64; self.dim];
        for &(_, c, val) in &self.entries {
            col[c as usize] += math::abs(val);
        }
        col.iter().fold(0.0f64, |m, &x| m.max(x))
    }

    /// Largest `|A - A^T|` entry; zero for everything assembled here.
    pub fn asymmetry(&self) -> f64 {
        let dense = self.to_dense();
        let mut worst = 0.0f64;
        for r in 0..self.dim {
            for c in 0..self.dim {
                worst = worst.max(math::abs(dense.get(r, c) - dense.get(c, r)));
            }
        }
        worst
    }

    /// Dense sub-block on explicit row and column index lists.
    pub fn block(&self, rows: &[usize], cols: &[usize]) -> Mat {
        let mut row_pos = vec![usize::MAX; self.dim];
        for (k, &r) in rows.iter().enumerate() {
            row_pos[r] = k;
        }
        let mut col_pos = vec![usize::MAX; self.dim];
        for (k, &c) in cols.iter().enumerate() {
            col_pos[c] = k;
        }
        let mut out = Mat::zeros(rows.len(), cols.len());
        for &(r, c, val) in &self.entries {
            let rp = row_pos[r as usize];
            let cp = col_pos[c as usize];
            if rp != usize::MAX && cp != usize::MAX {
                out.add_to(rp, cp, val);
            }
        }
        out
    }
}

/// W* ladder amplitude for raising the pair occupation `p -> p + 1` while
/// the zero mode drops from `n0` to `n0 - 2`:
/// `(phi / N) * (p + 1) * sqrt(n0 (n0 - 1))`.
fn wstar_amplitude(phi: f64, n: f64, p: u32, n0: u32) -> f64 {
    debug_assert!(n0 >= 2);
    (phi / n) * (p as f64 + 1.0) * math::sqrt(n0 as f64 * (n0 as f64 - 1.0))
}

/// Single-pair block in the symmetric sector, indexed by `p = n_{j_m}`:
/// dimension N/2 + 1, diagonal `(k^2 + phi n0 / N) 2p`, off-diagonal the W*
/// amplitude above.
pub fn pair_tridiagonal(spec: &PotentialSpec, pair_index: usize) -> Tridiagonal {
    pair_tridiagonal_with_deficit(spec, pair_index, 0)
}

/// Same block with `deficit` particles frozen in spectator modes: the pair
/// and the zero mode share `N - deficit` particles while every `1/N` stays
/// at the full N. Used for the sector scans behind the infspec checks.
pub fn pair_tridiagonal_with_deficit(
    spec: &PotentialSpec,
    pair_index: usize,
    deficit: u32,
) -> Tridiagonal {
    let n = spec.params.n;
    assert!(deficit <= n);
    let budget = n - deficit;
    let pair = &spec.pairs[pair_index];
    let dim = (budget / 2 + 1) as usize;
    let nf = n as f64;
    let mut diag = Vec::with_capacity(dim);
    let mut off = Vec::with_capacity(dim.saturating_sub(1));
    for p in 0..dim as u32 {
        let n0 = budget - 2 * p;
        diag.push((pair.k2 + pair.phi * n0 as f64 / nf) * (2 * p) as f64);
        if p + 1 < dim as u32 {
            off.push(wstar_amplitude(pair.phi, nf, p, n0));
        }
    }
    Tridiagonal::new(diag, off)
}

/// Bogoliubov Hamiltonian on the symmetric sector basis with the interaction
/// switched on for `active` pairs only; kinetic energy of the inactive pairs
/// stays in.
pub fn assemble_hbog(spec: &PotentialSpec, basis: &SectorBasis, active: &[usize]) -> SparseOperator {
    assemble_sector(spec, basis, active, true)
}

/// `sum_{l in active} Hhat_{j_l}` — same as `assemble_hbog` but with the
/// kinetic energy of the inactive pairs stripped.
pub fn assemble_sum_hhat(
    spec: &PotentialSpec,
    basis: &SectorBasis,
    active: &[usize],
) -> SparseOperator {
    assemble_sector(spec, basis, active, false)
}

fn assemble_sector(
    spec: &PotentialSpec,
    basis: &SectorBasis,
    active: &[usize],
    inactive_kinetic: bool,
) -> SparseOperator {
    let nf = spec.params.n as f64;
    let m = basis.mode_count;
    let mut entries = Vec::new();
    let mut target = vec![0u32; m];
    for s in 0..basis.len() {
        let state = basis.state(s);
        let n0 = basis.n_zero(s);
        let mut diag = 0.0;
        for l in 0..m {
            let pair = &spec.pairs[l];
            let two_p = (2 * state[l]) as f64;
            if active.contains(&l) {
                diag += (pair.k2 + pair.phi * n0 as f64 / nf) * two_p;
            } else if inactive_kinetic {
                diag += pair.k2 * two_p;
            }
        }
        if diag != 0.0 {
            entries.push((s as u32, s as u32, diag));
        }
        // W* raises p_l by one, taking two particles out of the condensate
        if n0 >= 2 {
            for &l in active {
                target.copy_from_slice(state);
                target[l] += 1;
                if let Some(t) = basis.index_of(&target) {
                    let amp = wstar_amplitude(spec.pairs[l].phi, nf, state[l], n0);
                    entries.push((t as u32, s as u32, amp));
                    entries.push((s as u32, t as u32, amp));
                }
            }
        }
    }
    SparseOperator {
        dim: basis.len(),
        entries,
    }
}

/// Dense coupling block of W for one pair, from the slice with pair
/// occupation `p = (N - i)/2` down to the slice with `p - 1` (occupation
/// label `i + 2`). Entry `(t, s)` carries `<t| W |s>`.
pub fn w_lower_block(spec: &PotentialSpec, basis: &SectorBasis, pair: usize, i: u32) -> Mat {
    let n = basis.n;
    let nf = spec.params.n as f64;
    let phi = spec.pairs[pair].phi;
    let p_from = (n - i) / 2;
    let from = basis.slice_indices(pair, p_from);
    let to = basis.slice_indices(pair, p_from - 1);
    let mut out = Mat::zeros(to.len(), from.len());
    let mut target = vec![0u32; basis.mode_count];
    for (s_loc, &s) in from.iter().enumerate() {
        let state = basis.state(s);
        if state[pair] == 0 {
            continue;
        }
        target.copy_from_slice(state);
        target[pair] -= 1;
        let t = basis
            .index_of(&target)
            .expect("lowered state stays in the basis");
        let t_loc = to.iter().position(|&g| g == t).expect("slice membership");
        let n0 = basis.n_zero(s);
        // <t| W |s> = <s| W* |t> with the zero mode two higher on t
        out.set(
            t_loc,
            s_loc,
            wstar_amplitude(phi, nf, state[pair] - 1, n0 + 2),
        );
    }
    out
}

/// Signed mode lists for general bases.
pub struct ModeLists;

impl ModeLists {
    /// `+j_1, -j_1, ..., +j_M, -j_M`.
    pub fn pair_modes(spec: &PotentialSpec) -> Vec<Vec<i64>> {
        let mut modes = Vec::new();
        for p in &spec.pairs {
            modes.push(p.j.clone());
            modes.push(p.j.iter().map(|&c| -c).collect());
        }
        modes
    }

    /// Pair modes plus every nonzero pairwise sum; the smallest closure on
    /// which the cubic terms of V act nontrivially.
    pub fn extended_modes(spec: &PotentialSpec) -> Vec<Vec<i64>> {
        let base = Self::pair_modes(spec);
        let mut modes = base.clone();
        for a in &base {
            for b in &base {
                let sum: Vec<i64> = a.iter().zip(b.iter()).map(|(x, y)| x + y).collect();
                if sum.iter().any(|&c| c != 0) && !modes.contains(&sum) {
                    modes.push(sum);
                }
            }
        }
        modes
    }
}

/// Bogoliubov Hamiltonian on a general basis (pair symmetry not imposed).
/// Interaction terms run over the spec's pairs; kinetic energy over every
/// basis mode.
pub fn assemble_hbog_general(spec: &PotentialSpec, basis: &GeneralBasis) -> SparseOperator {
    let nf = spec.params.n as f64;
    let k = basis.modes.len();
    let kin: Vec<f64> = basis
        .modes
        .iter()
        .map(|j| super::kinetic_energy(j, spec.params.box_len))
        .collect();
    let phi_of_mode: Vec<f64> = basis
        .modes
        .iter()
        .map(|j| {
            spec.pairs
                .iter()
                .find(|p| {
                    p.j == *j || p.j.iter().zip(j.iter()).all(|(x, y)| *x == -*y)
                })
                .map(|p| p.phi)
                .unwrap_or(0.0)
        })
        .collect();

    let mut entries = Vec::new();
    let mut target = vec![0u32; k];
    for s in 0..basis.len() {
        let state = basis.state(s);
        let n0 = basis.n_zero(s);
        let mut diag = 0.0;
        for (l, &occ) in state.iter().enumerate() {
            diag += (kin[l] + phi_of_mode[l] * n0 as f64 / nf) * occ as f64;
        }
        if diag != 0.0 {
            entries.push((s as u32, s as u32, diag));
        }
        // W* for each unordered pair: a*_j a*_{-j} a_0 a_0
        if n0 >= 2 {
            for pair in &spec.pairs {
                let plus = basis.mode_index(&pair.j).expect("pair mode in basis");
                let minus_j: Vec<i64> = pair.j.iter().map(|&c| -c).collect();
                let minus = basis.mode_index(&minus_j).expect("pair mode in basis");
                target.copy_from_slice(state);
                target[plus] += 1;
                target[minus] += 1;
                if let Some(t) = basis.index_of(&target) {
                    let amp = (pair.phi / nf)
                        * math::sqrt((state[plus] + 1) as f64)
                        * math::sqrt((state[minus] + 1) as f64)
                        * math::sqrt(n0 as f64 * (n0 as f64 - 1.0));
                    entries.push((t as u32, s as u32, amp));
                    entries.push((s as u32, t as u32, amp));
                }
            }
        }
    }
    SparseOperator {
        dim: basis.len(),
        entries,
    }
}

/// The cubic and quartic interaction remainder `V = H - H_bog`, restricted
/// to the sector spanned by the general basis. Reference spectra only.
pub fn assemble_full_interaction(spec: &PotentialSpec, basis: &GeneralBasis) -> SparseOperator {
    let nf = spec.params.n as f64;
    let k = basis.modes.len();
    let mut transfers: Vec<(Vec<i64>, f64)> = Vec::new();
    for p in &spec.pairs {
        transfers.push((p.j.clone(), p.phi));
        transfers.push((p.j.iter().map(|&c| -c).collect(), p.phi));
    }

    let mut entries = Vec::new();
    let mut upper: Vec<(u32, u32, f64)> = Vec::new();
    let mut target = vec![0u32; k];

    for s in 0..basis.len() {
        let state = basis.state(s);
        let n0 = basis.n_zero(s);

        for (jvec, phi) in &transfers {
            let j_idx = basis.mode_index(jvec).expect("transfer mode in basis");

            // cubic: (phi_j / N) a*_{q+j} a*_0 a_q a_j  (q, q+j nonzero modes)
            if state[j_idx] >= 1 {
                for q_idx in 0..k {
                    let qj: Vec<i64> = basis.modes[q_idx]
                        .iter()
                        .zip(jvec.iter())
                        .map(|(x, y)| x + y)
                        .collect();
                    if qj.iter().all(|&c| c == 0) {
                        continue;
                    }
                    let Some(t_idx) = basis.mode_index(&qj) else {
                        continue;
                    };
                    target.copy_from_slice(state);
                    // annihilators first: a_j, then a_q
                    let amp_j = math::sqrt(target[j_idx] as f64);
                    target[j_idx] -= 1;
                    if target[q_idx] == 0 {
                        continue;
                    }
                    let amp_q = math::sqrt(target[q_idx] as f64);
                    target[q_idx] -= 1;
                    // creators: a*_0 raises the condensate by one, then a*_{q+j}
                    let amp_zero = math::sqrt((n0 + 1) as f64);
                    let amp_t = math::sqrt((target[t_idx] + 1) as f64);
                    target[t_idx] += 1;
                    if let Some(t) = basis.index_of(&target) {
                        let amp = (phi / nf) * amp_j * amp_q * amp_zero * amp_t;
                        // the adjoint term contributes the mirror entry
                        upper.push((t as u32, s as u32, amp));
                    }
                }
            }

            // quartic: (phi_j / 2N) a*_{q+j} a*_{p-j} a_q a_p, all modes nonzero
            for q_idx in 0..k {
                if state[q_idx] == 0 {
                    continue;
                }
                let qj: Vec<i64> = basis.modes[q_idx]
                    .iter()
                    .zip(jvec.iter())
                    .map(|(x, y)| x + y)
                    .collect();
                if qj.iter().all(|&c| c == 0) {
                    continue;
                }
                let Some(qj_idx) = basis.mode_index(&qj) else {
                    continue;
                };
                for p_idx in 0..k {
                    let pj: Vec<i64> = basis.modes[p_idx]
                        .iter()
                        .zip(jvec.iter())
                        .map(|(x, y)| x - y)
                        .collect();
                    if pj.iter().all(|&c| c == 0) {
                        continue;
                    }
                    let Some(pj_idx) = basis.mode_index(&pj) else {
                        continue;
                    };
                    target.copy_from_slice(state);
                    if target[p_idx] == 0 {
                        continue;
                    }
                    let amp_p = math::sqrt(target[p_idx] as f64);
                    target[p_idx] -= 1;
                    if target[q_idx] == 0 {
                        continue;
                    }
                    let amp_q = math::sqrt(target[q_idx] as f64);
                    target[q_idx] -= 1;
                    let amp_pj = math::sqrt((target[pj_idx] + 1) as f64);
                    target[pj_idx] += 1;
                    let amp_qj = math::sqrt((target[qj_idx] + 1) as f64);
                    target[qj_idx] += 1;
                    if let Some(t) = basis.index_of(&target) {
                        let amp = (phi / (2.0 * nf)) * amp_p * amp_q * amp_pj * amp_qj;
                        entries.push((t as u32, s as u32, amp));
                    }
                }
            }
        }
    }

    // the cubic terms were collected once per (term, adjoint) pair
    for &(r, c, v) in &upper {
        entries.push((r, c, v));
        entries.push((c, r, v));
    }

    SparseOperator {
        dim: basis.len(),
        entries,
    }
}
