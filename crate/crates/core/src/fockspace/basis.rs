//! Enumeration of occupation-number bases.

use super::PotentialSpec;
use crate::prelude::*;
use crate::{Error, Result};

/// Default cap on enumerated states.
pub const DEFAULT_STATE_CAP: usize = 2_000_000;

/// Basis of the symmetric pair sector: states are tuples `(p_1, ..., p_M)`
/// where `p_l` is the common occupation of modes `+j_l` and `-j_l` and
/// `sum 2 p_l <= N`; the remaining `N - sum 2 p_l` particles sit in the
/// zero mode. Enumeration is lexicographic, so the condensate state
/// `(0, ..., 0)` always comes first.
#[derive(Debug, Clone)]
pub struct SectorBasis {
    pub mode_count: usize,
    pub n: u32,
    /// Flat state storage, `mode_count` entries per state.
    occ: Vec<u32>,
    /// Index of the all-zero state.
    pub index_of_eta: usize,
    /// Total particles available to the enumerated modes (equals `n` unless
    /// a spectator deficit was requested).
    pub budget: u32,
}

impl SectorBasis {
    /// Lexicographic basis for all pairs of `spec`.
    pub fn build(spec: &PotentialSpec) -> Result<Self> {
        Self::build_with_cap(spec, DEFAULT_STATE_CAP)
    }

    pub fn build_with_cap(spec: &PotentialSpec, cap: usize) -> Result<Self> {
        Self::build_with_deficit(spec, spec.mode_count(), 0, cap)
    }

    /// Basis over the first `mode_count` pairs with `deficit` particles
    /// frozen outside the enumerated modes (used by the sector scans of the
    /// kinetic-stripped operators).
    pub fn build_with_deficit(
        spec: &PotentialSpec,
        mode_count: usize,
        deficit: u32,
        cap: usize,
    ) -> Result<Self> {
        let n = spec.params.n;
        assert!(deficit <= n);
        assert!(mode_count >= 1 && mode_count <= spec.mode_count());
        let budget = n - deficit;
        let count = sector_count(budget, mode_count);
        if count > cap as u128 {
            return Err(Error::Capacity {
                states: count,
                cap,
                n,
                modes: mode_count,
            });
        }
        let mut occ = Vec::with_capacity(count as usize * mode_count);
        let mut state = vec![0u32; mode_count];
        loop {
            occ.extend_from_slice(&state);
            if !next_state(&mut state, budget) {
                break;
            }
        }
        debug_assert_eq!(occ.len() as u128, count * mode_count as u128);
        Ok(SectorBasis {
            mode_count,
            n,
            occ,
            index_of_eta: 0,
            budget,
        })
    }

    pub fn len(&self) -> usize {
        if self.mode_count == 0 {
            0
        } else {
            self.occ.len() / self.mode_count
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn state(&self, idx: usize) -> &[u32] {
        &self.occ[idx * self.mode_count..(idx + 1) * self.mode_count]
    }

    /// Zero-mode occupation of the state.
    #[inline]
    pub fn n_zero(&self, idx: usize) -> u32 {
        let pairs: u32 = self.state(idx).iter().sum();
        self.budget - 2 * pairs
    }

    /// Position of a state tuple, by binary search over the lex order.
    pub fn index_of(&self, state: &[u32]) -> Option<usize> {
        let mut lo = 0usize;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.state(mid).cmp(state) {
                core::cmp::Ordering::Less => lo = mid + 1,
                core::cmp::Ordering::Greater => hi = mid,
                core::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// Indices of the states with `p_pair == p`, in enumeration order.
    pub fn slice_indices(&self, pair: usize, p: u32) -> Vec<usize> {
        (0..self.len())
            .filter(|&s| self.state(s)[pair] == p)
            .collect()
    }

    /// Expectation of the nonzero-mode number operator in `v`
    /// (un-normalized vector in basis coordinates).
    pub fn number_expectation(&self, v: &[f64]) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for s in 0..self.len() {
            let occ2 = v[s] * v[s];
            let pairs: u32 = self.state(s).iter().sum();
            num += occ2 * (2 * pairs) as f64;
            den += occ2;
        }
        num / den
    }
}

/// Number of states: stars and bars, `C(budget/2 + M, M)`.
pub fn sector_count(budget: u32, mode_count: usize) -> u128 {
    binomial(budget as u128 / 2 + mode_count as u128, mode_count as u128)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

fn next_state(state: &mut [u32], budget: u32) -> bool {
    // lexicographic odometer under sum 2 p_l <= budget
    let m = state.len();
    let mut used: u32 = 2 * state.iter().sum::<u32>();
    for l in (0..m).rev() {
        if used + 2 <= budget {
            state[l] += 1;
            return true;
        }
        used -= 2 * state[l];
        state[l] = 0;
    }
    false
}

/// General (unsymmetrized) occupation basis over an explicit list of signed
/// modes; used for the reference spectra of `H = H_bog + V`, which break the
/// pair symmetry.
#[derive(Debug, Clone)]
pub struct GeneralBasis {
    /// Signed mode lattice vectors (zero excluded), in a fixed order.
    pub modes: Vec<Vec<i64>>,
    pub n: u32,
    occ: Vec<u32>,
}

impl GeneralBasis {
    pub fn build(modes: Vec<Vec<i64>>, n: u32, cap: usize) -> Result<Self> {
        for m in &modes {
            if m.iter().all(|&c| c == 0) {
                return Err(Error::InvalidModel(
                    "general basis modes must be nonzero".into(),
                ));
            }
        }
        for a in 0..modes.len() {
            for b in (a + 1)..modes.len() {
                if modes[a] == modes[b] {
                    return Err(Error::InvalidModel("duplicate general basis mode".into()));
                }
            }
        }
        let k = modes.len();
        let count = binomial(n as u128 + k as u128, k as u128);
        if count > cap as u128 {
            return Err(Error::Capacity {
                states: count,
                cap,
                n,
                modes: k,
            });
        }
        let mut occ = Vec::new();
        let mut state = vec![0u32; k];
        loop {
            occ.extend_from_slice(&state);
            if !next_general(&mut state, n) {
                break;
            }
        }
        Ok(GeneralBasis { modes, n, occ })
    }

    pub fn len(&self) -> usize {
        if self.modes.is_empty() {
            0
        } else {
            self.occ.len() / self.modes.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn state(&self, idx: usize) -> &[u32] {
        let k = self.modes.len();
        &self.occ[idx * k..(idx + 1) * k]
    }

    #[inline]
    pub fn n_zero(&self, idx: usize) -> u32 {
        self.n - self.state(idx).iter().sum::<u32>()
    }

    pub fn index_of(&self, state: &[u32]) -> Option<usize> {
        let mut lo = 0usize;
        let mut hi = self.len();
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.state(mid).cmp(state) {
                core::cmp::Ordering::Less => lo = mid + 1,
                core::cmp::Ordering::Greater => hi = mid,
                core::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    pub fn mode_index(&self, j: &[i64]) -> Option<usize> {
        self.modes.iter().position(|m| m.as_slice() == j)
    }
}

fn next_general(state: &mut [u32], n: u32) -> bool {
    let k = state.len();
    let mut used: u32 = state.iter().sum();
    for l in (0..k).rev() {
        if used + 1 <= n {
            state[l] += 1;
            return true;
        }
        used -= state[l];
        state[l] = 0;
    }
    false
}
