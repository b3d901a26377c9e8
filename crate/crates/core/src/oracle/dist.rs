use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spin::{bit, rc_weight_log, RandomClusterParams, SpinSystem};
use crate::graph::Graph;

/// Default cap on the number of enumerated variables.
pub const DEFAULT_MAX_VARS: usize = 20;

/// What the bits of a [`DistTable`] index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Vertices,
    OrientedEdges,
    Edges,
    Custom,
}

/// Exact distribution over `{0,1}^n`, indexed by bitmask.
#[derive(Debug, Clone, PartialEq)]
pub struct DistTable {
    pub n: usize,
    pub domain: Domain,
    pub probs: Vec<f64>,
    pub log_z: f64,
}

/// `ln Σ exp(x_i)`, `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: impl IntoIterator<Item = f64> + Clone) -> f64 {
    let max = xs.clone().into_iter().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.into_iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

impl DistTable {
    /// Normalizes unnormalized log-weights (one per bitmask).
    pub fn from_log_weights(n: usize, domain: Domain, log_w: Vec<f64>) -> Result<Self> {
        debug_assert_eq!(log_w.len(), 1usize << n);
        let log_z = log_sum_exp(log_w.iter().copied());
        if log_z == f64::NEG_INFINITY {
            return Err(Error::EmptySupport);
        }
        let probs = log_w.into_iter().map(|w| (w - log_z).exp()).collect();
        Ok(DistTable { n, domain, probs, log_z })
    }

    /// Normalizes nonnegative weights.
    pub fn from_weights(n: usize, domain: Domain, w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if !(total > 0.0) {
            return Err(Error::EmptySupport);
        }
        let probs = w.into_iter().map(|x| x / total).collect();
        Ok(DistTable { n, domain, probs, log_z: total.ln() })
    }

    pub fn point_mass(n: usize, domain: Domain, state: u64) -> Self {
        let mut probs = vec![0.0; 1 << n];
        probs[state as usize] = 1.0;
        DistTable { n, domain, probs, log_z: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn prob(&self, state: u64) -> f64 {
        self.probs[state as usize]
    }

    /// States with positive probability, ascending.
    pub fn support(&self) -> Vec<u64> {
        (0..self.probs.len() as u64).filter(|&s| self.probs[s as usize] > 0.0).collect()
    }

    pub fn min_positive(&self) -> f64 {
        self.probs.iter().copied().filter(|&p| p > 0.0).fold(f64::INFINITY, f64::min)
    }

    /// `P(X_i = 1)` for every coordinate.
    pub fn marginals(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.n];
        for (s, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                for (i, mi) in m.iter_mut().enumerate() {
                    if bit(s as u64, i) {
                        *mi += p;
                    }
                }
            }
        }
        m
    }

    /// Coordinates that take both values on the support.
    pub fn interior(&self) -> Vec<bool> {
        let (mut seen1, mut seen0) = (0u64, 0u64);
        for (s, &p) in self.probs.iter().enumerate() {
            if p > 0.0 {
                seen1 |= s as u64;
                seen0 |= !(s as u64);
            }
        }
        (0..self.n).map(|i| bit(seen1, i) && bit(seen0, i)).collect()
    }

    /// Restriction to states satisfying `keep`, renormalized.
    pub fn condition(&self, keep: impl Fn(u64) -> bool) -> Result<Self> {
        let w = (0..self.probs.len() as u64)
            .map(|s| if keep(s) { self.probs[s as usize] } else { 0.0 })
            .collect();
        let mut d = Self::from_weights(self.n, self.domain, w)?;
        d.log_z += self.log_z;
        Ok(d)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// `Σ_σ p(σ) f(σ)`.
    pub fn expect(&self, f: impl Fn(u64) -> f64) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(s, &p)| p * f(s as u64))
            .sum()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("state,prob\n");
        for (s, &p) in self.probs.iter().enumerate() {
            out.push_str(&format!("{:0width$b},{p:e}\n", s, width = self.n.max(1)));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::json!({
            "n": self.n,
            "domain": self.domain,
            "log_z": self.log_z,
            "probs": self.probs,
        })
        .to_string()
    }
}

/// Exact Gibbs distribution of a spin system.
pub fn enumerate(system: &SpinSystem) -> Result<DistTable> {
    enumerate_capped(system, DEFAULT_MAX_VARS)
}

pub fn enumerate_capped(system: &SpinSystem, max_vars: usize) -> Result<DistTable> {
    let n = system.n();
    if n > max_vars || n > 40 {
        return Err(Error::TooLarge { what: "vertices", size: n, cap: max_vars.min(40) });
    }
    let log_w = (0..1u64 << n).map(|s| system.log_weight_mask(s)).collect();
    DistTable::from_log_weights(n, Domain::Vertices, log_w)
}

/// Random-cluster distribution over edge subsets, optionally conditioned on
/// containing `forced` (edge-id bitmask).
pub fn enumerate_random_cluster(rc: &RandomClusterParams, g: &Graph, forced: u64) -> Result<DistTable> {
    let m = g.num_edges();
    if m > 24 {
        return Err(Error::TooLarge { what: "edges", size: m, cap: 24 });
    }
    let log_w = (0..1u64 << m)
        .map(|s| if s & forced == forced { rc_weight_log(rc, g, s) } else { f64::NEG_INFINITY })
        .collect();
    DistTable::from_log_weights(m, Domain::Edges, log_w)
}

/// Divergence between two distributions on the same space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Divergence {
    Tv,
    Chi2,
    Kl,
}

/// `D(ν ‖ μ)` for the chosen kind.
pub fn divergence(kind: Divergence, nu: &[f64], mu: &[f64]) -> Result<f64> {
    if nu.len() != mu.len() {
        return Err(Error::InvalidParams("distributions live on different spaces".into()));
    }
    match kind {
        Divergence::Tv => Ok(tv(nu, mu)),
        Divergence::Chi2 | Divergence::Kl => {
            let mut acc = 0.0;
            for (&a, &b) in nu.iter().zip(mu) {
                if a > 0.0 && b <= 0.0 {
                    return Err(Error::NotAbsolutelyContinuous);
                }
                if b > 0.0 {
                    acc += match kind {
                        Divergence::Chi2 => (a - b).powi(2) / b,
                        _ if a > 0.0 => a * (a / b).ln(),
                        _ => 0.0,
                    };
                }
            }
            Ok(acc.max(0.0))
        }
    }
}

pub fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}
