//! Closed-form and recursive scalar quantities for a single interacting
//! pair: the mean-field energy, the continued-fraction tables feeding the
//! fixed-point function, the fixed-point energy itself, and the auxiliary
//! sequences and bounds that control the operator flow.

use crate::math;
use crate::prelude::*;
use crate::{Error, Result};

/// Coefficients entering the auxiliary sequences, pinned at `delta = 1 + sqrt(eps)`
/// unless stated otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSet {
    pub eps: f64,
    /// Exponent nu > 11/8 of the higher-order correction inside `a`.
    pub nu: f64,
    /// delta in (1, 1 + sqrt(eps)]; only the block bound exposes it.
    pub delta: f64,
    /// Theta = min(2 (nu - 11/8), 1/4).
    pub theta: f64,
    /// eta = 1 - sqrt(eps).
    pub eta_factor: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl CoefficientSet {
    /// Standard coefficients with the higher-order correction switched off.
    pub fn new(eps: f64) -> Self {
        Self::with_kappa(eps, 1.5, 0.0)
    }

    /// `a = 2 eps + kappa eps^nu`; the correction coefficient is a probe
    /// knob, not a pinned value.
    pub fn with_kappa(eps: f64, nu: f64, kappa: f64) -> Self {
        assert!(eps >= 0.0);
        assert!(nu > 11.0 / 8.0, "nu must exceed 11/8");
        let sqrt_eps = math::sqrt(eps);
        let delta = 1.0 + sqrt_eps;
        let theta = (2.0 * (nu - 11.0 / 8.0)).min(0.25);
        let root = math::sqrt(eps * eps + 2.0 * eps);
        // chi_[0,2)(delta) = 1 whenever eps < 1
        let chi = if delta < 2.0 { 1.0 } else { 0.0 };
        CoefficientSet {
            eps,
            nu,
            delta,
            theta,
            eta_factor: 1.0 - sqrt_eps,
            a: 2.0 * eps + kappa * math::powf(eps, nu),
            b: (1.0 + eps) * delta * chi * root,
            c: -(1.0 - delta * delta * chi) * (eps * eps + 2.0 * eps),
        }
    }

    /// Formal degenerate set `a = b = 0, c = 1` used by the limiting checks.
    pub fn degenerate() -> Self {
        CoefficientSet {
            eps: 0.0,
            nu: 1.5,
            delta: 1.0,
            theta: 0.25,
            eta_factor: 1.0,
            a: 0.0,
            b: 0.0,
            c: 1.0,
        }
    }

    /// Re-pin delta and recompute `b`, `c` at the new value (the block bound
    /// is the only consumer that varies it).
    pub fn with_delta(mut self, delta: f64) -> Self {
        let chi = if delta < 2.0 { 1.0 } else { 0.0 };
        let root2 = self.eps * self.eps + 2.0 * self.eps;
        self.delta = delta;
        self.b = (1.0 + self.eps) * delta * chi * math::sqrt(root2);
        self.c = -(1.0 - delta * delta * chi) * root2;
        self
    }

    /// `sqrt(eta a)` with the degenerate 0/0 read as 0.
    fn sqrt_eta_a(&self) -> f64 {
        math::sqrt(self.eta_factor * self.a)
    }

    /// `b / sqrt(eta a)`, 0 when b itself vanishes.
    fn b_over_sqrt_eta_a(&self) -> f64 {
        if self.b == 0.0 {
            0.0
        } else {
            self.b / self.sqrt_eta_a()
        }
    }
}

/// Mean-field pair ground-state energy
/// `E = -(k^2 + phi - sqrt(k^4 + 2 phi k^2))`, always <= 0.
pub fn bogoliubov_energy(k2: f64, phi: f64) -> f64 {
    assert!(k2 >= 0.0 && phi >= 0.0);
    -(k2 + phi - math::sqrt(k2 * k2 + 2.0 * phi * k2))
}

/// Upper end of the spectral window the scalar recursions are defined on:
/// `E + (delta - 1) phi sqrt(eps^2 + 2 eps)` at the pinned delta.
pub fn z_max(n: u32, k2: f64, phi: f64) -> f64 {
    let _ = n;
    let eps = k2 / phi;
    bogoliubov_energy(k2, phi) + math::sqrt(eps) * phi * math::sqrt(eps * eps + 2.0 * eps)
}

/// The scalar factor `W_{i,i-2} W*_{i-2,i}(z)` of the continued-fraction
/// recursion, for even `i` with `2 <= i <= N-2`; `i` counts the particles
/// outside the pair, `(N - i)/2` sits in each of the two pair modes.
pub fn ww_star(i: u32, z: f64, n: u32, k2: f64, phi: f64) -> Result<f64> {
    assert!(i % 2 == 0 && (2..=n - 2).contains(&i), "i out of range: {i}");
    let nf = n as f64;
    let i_f = i as f64;
    let half_out = (nf - i_f) / 2.0;
    let d1 = (i_f * phi / nf + k2) * (nf - i_f) - z;
    let d2 = ((i_f - 2.0) * phi / nf + k2) * (nf - i_f + 2.0) - z;
    if d1 <= 0.0 || d2 <= 0.0 {
        return Err(Error::Admissibility { index: i, z });
    }
    let pref = (i_f - 1.0) * i_f / (nf * nf) * phi * phi;
    Ok(pref * (half_out + 1.0) * (half_out + 1.0) / (d1 * d2))
}

/// Table of `Gcheck_{i,i}(z)` for even i from 0 to N-2.
#[derive(Debug, Clone)]
pub struct CheckGTable {
    pub z: f64,
    pub n: u32,
    /// `values[i/2]` is `Gcheck_{i,i}(z)`; `values[0] = 1`.
    pub values: Vec<f64>,
}

impl CheckGTable {
    pub fn last(&self) -> f64 {
        *self.values.last().expect("table never empty")
    }
}

/// Evaluate the continued-fraction table: each level is the closed-form
/// geometric sum `1 / (1 - ww_star(i, z) * Gcheck_{i-2,i-2}(z))`.
pub fn check_g(z: f64, n: u32, k2: f64, phi: f64) -> Result<CheckGTable> {
    let mut values = Vec::with_capacity((n as usize - 2) / 2 + 1);
    values.push(1.0);
    let mut prev = 1.0;
    let mut i = 2;
    while i <= n - 2 {
        let x = ww_star(i, z, n, k2, phi)? * prev;
        if x >= 1.0 {
            return Err(Error::DivergentSeries { index: i, z });
        }
        prev = 1.0 / (1.0 - x);
        values.push(prev);
        i += 2;
    }
    Ok(CheckGTable { z, n, values })
}

/// Fixed-point function
/// `f(z) = -z - (1 - 1/N) phi Gcheck_{N-2,N-2}(z) / (2 eps - 4/N + 2 - z/phi)`.
pub fn f_of_z(z: f64, n: u32, k2: f64, phi: f64) -> Result<f64> {
    let table = check_g(z, n, k2, phi)?;
    let nf = n as f64;
    let eps = k2 / phi;
    let denom = 2.0 * eps - 4.0 / nf + 2.0 - z / phi;
    Ok(-z - (1.0 - 1.0 / nf) * phi * table.last() / denom)
}

#[derive(Debug, Clone)]
pub struct FixedPointResult {
    pub z_star: f64,
    pub e_bog: f64,
    pub bracket: (f64, f64),
    pub iterations: u32,
    pub residual: f64,
    /// False when eps or N fall outside the proof's comfort zone; the
    /// computation itself stays valid.
    pub regime_ok: bool,
}

/// Locate the unique root of `f`. Bisection on the admissible interval;
/// evaluation failures above the root count as the high side, and the lower
/// bracket end widens downward by powers of two until the sign is positive.
pub fn solve_ground_energy(n: u32, k2: f64, phi: f64, tol: f64) -> Result<FixedPointResult> {
    let e_bog = bogoliubov_energy(k2, phi);
    let eps = k2 / phi;
    let regime_ok = eps <= 0.3 && 1.0 / (n as f64) <= math::powf(eps, 11.0 / 8.0);

    let mut lo = e_bog - phi;
    let hi_cap = z_max(n, k2, phi);

    // widen downward until f(lo) > 0
    let mut widen = phi;
    let mut f_lo = f_of_z(lo, n, k2, phi)?;
    let mut guard = 0;
    while f_lo <= 0.0 {
        widen *= 2.0;
        lo = e_bog - widen;
        f_lo = f_of_z(lo, n, k2, phi)?;
        guard += 1;
        if guard > 80 {
            return Err(Error::Regime(
                "no sign change below the admissible window; increase phi \
                 (smaller eps) or the particle number"
                    .into(),
            ));
        }
    }

    let bracket = (lo, hi_cap);
    let mut hi = hi_cap;
    let mut best = (lo, f_lo);
    let mut iterations = 0u32;
    for _ in 0..200 {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        match f_of_z(mid, n, k2, phi) {
            Ok(f_mid) => {
                if math::abs(f_mid) < math::abs(best.1) {
                    best = (mid, f_mid);
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
            // divergence of the table means z is too high
            Err(Error::DivergentSeries { .. }) | Err(Error::Admissibility { .. }) => {
                hi = mid;
            }
            Err(e) => return Err(e),
        }
        if hi - lo < 1e-16 * math::abs(lo).max(1.0) {
            break;
        }
    }

    let (z_star, residual) = (best.0, math::abs(best.1));
    if residual > tol {
        return Err(Error::Solver {
            message: format!("fixed-point bisection stalled at z={z_star}"),
            residual,
        });
    }
    Ok(FixedPointResult {
        z_star,
        e_bog,
        bracket,
        iterations,
        residual,
        regime_ok,
    })
}

/// Default fixed-point tolerance.
pub fn default_fp_tol(phi: f64) -> f64 {
    1e-12 * phi
}

#[derive(Debug, Clone)]
pub struct XSequence {
    pub n: u32,
    pub eps: f64,
    /// `values[j]` is `X_{2j}`, from `X_0 = 1` up to `X_{N-2}`.
    pub values: Vec<f64>,
}

/// The auxiliary sequence
/// `X_{2j+2} = 1 - 1 / (4 (1 + a - 2b/(N-2j-1) - (1-c)/(N-2j-1)^2) X_{2j})`.
pub fn x_sequence(n: u32, coeffs: &CoefficientSet) -> Result<XSequence> {
    let nf = n as f64;
    let mut values = vec![1.0];
    let mut x = 1.0;
    let mut j = 0u32;
    while 2 * j + 2 <= n - 2 {
        let m = nf - 2.0 * j as f64 - 1.0;
        let denom = 1.0 + coeffs.a - 2.0 * coeffs.b / m - (1.0 - coeffs.c) / (m * m);
        if denom <= 0.0 {
            return Err(Error::Regime(format!(
                "X recursion denominator vanished at j={j}: eps too large for N={n}"
            )));
        }
        x = 1.0 - 1.0 / (4.0 * denom * x);
        if x <= 0.0 {
            return Err(Error::Regime(format!(
                "X sequence left (0,1] at j={}: eps too large for N={n}",
                j + 1
            )));
        }
        values.push(x);
        j += 1;
    }
    Ok(XSequence {
        n,
        eps: coeffs.eps,
        values,
    })
}

/// Lower bound for `X_{2j}`:
/// `(1/2) [1 + sqrt(eta a) - (b / sqrt(eta a)) / (N - 2j - eps^Theta)]`.
pub fn x_lower_bound(j: u32, n: u32, coeffs: &CoefficientSet) -> f64 {
    let root = coeffs.sqrt_eta_a();
    let correction = if coeffs.b == 0.0 {
        0.0
    } else {
        coeffs.b_over_sqrt_eta_a()
            / (n as f64 - 2.0 * j as f64 - math::powf(coeffs.eps, coeffs.theta))
    };
    0.5 * (1.0 + root - correction)
}

/// Reported upper bound for the product of sandwiched-block norms at level i:
/// `1 / (4 (1 + a - 2b/(N-i+2) - (1-c)/(N-i+2)^2))` at the set's delta.
pub fn block_bound_rhs(i: u32, n: u32, coeffs: &CoefficientSet) -> f64 {
    assert!(i % 2 == 0 && (2..=n - 2).contains(&i));
    let m = (n - i + 2) as f64;
    1.0 / (4.0 * (1.0 + coeffs.a - 2.0 * coeffs.b / m - (1.0 - coeffs.c) / (m * m)))
}

#[derive(Debug, Clone)]
pub struct KzProducts {
    /// `(f, K_f, Z_{f-2}, K_f / (1 - Z_{f-2})^2)` for each even f in range.
    pub factors: Vec<(u32, f64, f64, f64)>,
    /// Running products of the last column.
    pub partials: Vec<f64>,
    /// Smallest decay constant c with `factor <= 1/(1 + c sqrt(eps))` over
    /// the fully-in-regime range `f <= N - 10/sqrt(eps)`; zero when eps = 0
    /// or no factor qualifies.
    pub measured_c: f64,
    /// True when every in-regime factor sits strictly below 1.
    pub decay_ok: bool,
}

/// Per-level factors `K_f / (1 - Z_{f-2})^2` and their running products.
pub fn kz_product(f_lo: u32, f_hi: u32, coeffs: &CoefficientSet, n: u32) -> KzProducts {
    assert!(f_lo % 2 == 0 && f_hi % 2 == 0 && f_lo <= f_hi);
    let nf = n as f64;
    let k_of = |i: f64| {
        let m = nf - i + 1.0;
        1.0 / (4.0 * (1.0 + coeffs.a - 2.0 * coeffs.b / m - (1.0 - coeffs.c) / (m * m)))
    };
    let z_of = |i: f64| {
        let m = nf - i + 3.0;
        let k_like = 1.0 / (4.0 * (1.0 + coeffs.a - 2.0 * coeffs.b / m - (1.0 - coeffs.c) / (m * m)));
        let lower =
            1.0 + coeffs.sqrt_eta_a()
                - coeffs.b_over_sqrt_eta_a() / (nf - i + 4.0 - math::powf(coeffs.eps, coeffs.theta));
        k_like * 2.0 / lower
    };

    let mut factors = Vec::new();
    let mut partials = Vec::new();
    let mut running = 1.0;
    let mut f = f_lo;
    while f <= f_hi {
        let kf = k_of(f as f64);
        let zf = z_of(f as f64);
        let factor = kf / ((1.0 - zf) * (1.0 - zf));
        running *= factor;
        factors.push((f, kf, zf, factor));
        partials.push(running);
        f += 2;
    }

    let sqrt_eps = math::sqrt(coeffs.eps);
    let cutoff = if sqrt_eps > 0.0 {
        nf - 10.0 / sqrt_eps
    } else {
        f64::NEG_INFINITY
    };
    let mut measured_c = f64::INFINITY;
    let mut any = false;
    for &(f, _, _, factor) in &factors {
        if (f as f64) <= cutoff && sqrt_eps > 0.0 {
            any = true;
            let c = (1.0 / factor - 1.0) / sqrt_eps;
            measured_c = measured_c.min(c);
        }
    }
    if !any {
        measured_c = 0.0;
    }
    let decay_ok = any && measured_c > 0.0;
    KzProducts {
        factors,
        partials,
        measured_c,
        decay_ok,
    }
}

#[derive(Debug, Clone)]
pub struct CjSeries {
    /// `(j, c_j)` for j = 2..=j_max.
    pub terms: Vec<(u32, f64)>,
    /// `ratios[idx] = c_{j+1} / c_j` aligned with `terms[idx]`.
    pub ratios: Vec<f64>,
    pub partial_sums: Vec<f64>,
}

/// Terms of the series controlling the ground-state expansion:
/// `c_j = prod_{l=2..j} 1 / (A_l sqrt(B_l))` with
/// `A_l = 1 + sqrt(eta a) - (b/sqrt(eta a)) / (2l - eps^Theta)` and
/// `B_l = 1 + a - 2b/(2l-1) - (1-c)/(2l-1)^2`.
pub fn series_cj(j_max: u32, coeffs: &CoefficientSet) -> CjSeries {
    assert!(j_max >= 2);
    let factor = |l: f64| {
        let a_l = 1.0 + coeffs.sqrt_eta_a()
            - coeffs.b_over_sqrt_eta_a() / (2.0 * l - math::powf(coeffs.eps, coeffs.theta));
        let m = 2.0 * l - 1.0;
        let b_l = 1.0 + coeffs.a - 2.0 * coeffs.b / m - (1.0 - coeffs.c) / (m * m);
        1.0 / (a_l * math::sqrt(b_l))
    };
    let mut terms = Vec::new();
    let mut partial_sums = Vec::new();
    let mut c = 1.0;
    let mut sum = 0.0;
    for j in 2..=j_max {
        c *= factor(j as f64);
        sum += c;
        terms.push((j, c));
        partial_sums.push(sum);
    }
    let ratios = (0..terms.len())
        .map(|idx| factor((terms[idx].0 + 1) as f64))
        .collect();
    CjSeries {
        terms,
        ratios,
        partial_sums,
    }
}
