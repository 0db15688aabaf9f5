//! Run configuration: JSON ingestion and validation.
//!
//! The schema ships in `schema/config.schema.json`; every constraint named
//! there is enforced here with a field-level message.

use bogflow_core::fockspace::{ModePair, ModelParams, PotentialSpec, DEFAULT_STATE_CAP};
use serde::Deserialize;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "N")]
    pub n: u32,
    pub d: u32,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(default)]
    pub phi0: f64,
    pub pairs: Vec<PairConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub truncation: TruncationConfig,
    #[serde(default)]
    pub scans: Scans,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub j: Vec<i64>,
    #[serde(default)]
    pub phi: Option<f64>,
    #[serde(default)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Fixed-point |f| tolerance; default `1e-12 * phi` per pair.
    #[serde(default)]
    pub fixed_point: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruncationConfig {
    #[serde(default)]
    pub h: Option<u32>,
    #[serde(default)]
    pub jbar: Option<u32>,
    #[serde(default = "default_zeta")]
    pub zeta: f64,
    #[serde(default)]
    pub dn0: f64,
}

fn default_zeta() -> f64 {
    0.1
}

impl Default for TruncationConfig {
    fn default() -> Self {
        TruncationConfig {
            h: None,
            jbar: None,
            zeta: default_zeta(),
            dn0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Scans {
    #[serde(default)]
    pub n_values: Option<Vec<u32>>,
    #[serde(default)]
    pub eps_values: Option<Vec<f64>>,
    #[serde(default)]
    pub h_values: Option<Vec<u32>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default)]
    pub include_v: bool,
    #[serde(default = "default_cap")]
    pub basis_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_STATE_CAP
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            include_v: false,
            basis_cap: default_cap(),
        }
    }
}

impl RunConfig {
    pub fn parse(raw: &str) -> Result<Self, String> {
        let cfg: RunConfig = serde_json::from_str(raw).map_err(|e| format!("config parse: {e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), String> {
        if self.n % 2 != 0 || self.n < 4 {
            return Err(format!(
                "field N: particle count must be even and >= 4, got {}",
                self.n
            ));
        }
        if self.d == 0 {
            return Err("field d: dimension must be >= 1".into());
        }
        if !(self.l > 0.0) {
            return Err(format!("field L: box side must be positive, got {}", self.l));
        }
        if !(self.phi0 >= 0.0) {
            return Err(format!("field phi0: must be nonnegative, got {}", self.phi0));
        }
        if self.pairs.is_empty() {
            return Err("field pairs: at least one interacting pair required".into());
        }
        for (idx, p) in self.pairs.iter().enumerate() {
            if p.j.len() != self.d as usize {
                return Err(format!(
                    "field pairs[{idx}].j: expected {} components, got {}",
                    self.d,
                    p.j.len()
                ));
            }
            if p.j.iter().all(|&c| c == 0) {
                return Err(format!("field pairs[{idx}].j: must be nonzero"));
            }
            match (p.phi, p.eps) {
                (Some(phi), None) if phi > 0.0 => {}
                (None, Some(eps)) if eps > 0.0 => {}
                (Some(_), Some(_)) => {
                    return Err(format!(
                        "field pairs[{idx}]: give exactly one of phi or eps"
                    ));
                }
                _ => {
                    return Err(format!(
                        "field pairs[{idx}]: needs a positive phi or a positive eps"
                    ));
                }
            }
        }
        for a in 0..self.pairs.len() {
            for b in (a + 1)..self.pairs.len() {
                let same = self.pairs[a].j == self.pairs[b].j;
                let neg = self.pairs[a]
                    .j
                    .iter()
                    .zip(self.pairs[b].j.iter())
                    .all(|(x, y)| *x == -*y);
                if same || neg {
                    return Err(format!(
                        "field pairs: entries {a} and {b} name the same unordered pair"
                    ));
                }
            }
        }
        if let Some(h) = self.truncation.h {
            if h % 2 != 0 || h < 2 {
                return Err(format!("field truncation.h: must be even and >= 2, got {h}"));
            }
        }
        if !(self.truncation.zeta > 0.0) {
            return Err("field truncation.zeta: must be positive".into());
        }
        if let Some(ns) = &self.scans.n_values {
            for &n in ns {
                if n % 2 != 0 || n < 4 {
                    return Err(format!("field scans.n_values: {n} is not an even N >= 4"));
                }
            }
        }
        Ok(())
    }

    /// Build the validated model, with per-pair phi resolved from eps when
    /// that form was used.
    pub fn to_spec(&self) -> Result<PotentialSpec, String> {
        self.to_spec_with_n(self.n)
    }

    pub fn to_spec_with_n(&self, n: u32) -> Result<PotentialSpec, String> {
        let params = ModelParams::new(n, self.d, self.l).map_err(|e| e.to_string())?;
        let mut pairs = Vec::with_capacity(self.pairs.len());
        for p in &self.pairs {
            let pair = match (p.phi, p.eps) {
                (Some(phi), None) => ModePair::new(p.j.clone(), self.l, phi),
                (None, Some(eps)) => ModePair::with_eps(p.j.clone(), self.l, eps),
                _ => unreachable!("validated"),
            }
            .map_err(|e| e.to_string())?;
            pairs.push(pair);
        }
        PotentialSpec::new(params, self.phi0, pairs).map_err(|e| e.to_string())
    }

    pub fn fp_tol(&self, phi: f64) -> f64 {
        self.tolerances
            .fixed_point
            .unwrap_or_else(|| bogflow_core::threemode::default_fp_tol(phi))
    }
}
