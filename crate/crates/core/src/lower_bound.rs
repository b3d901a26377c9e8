//! Influence lower bounds on regular bipartite graphs of large girth.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::{covariance, enumerate_capped, influence_matrix, sym_max_eigenvalue};
use crate::scalar::bisect;
use crate::spin::{SpinParams, SpinSystem};
use crate::tree::{critical_lambda, uniqueness};

/// Vertex cap for the enumeration behind a run.
pub const LOWER_BOUND_MAX_VERTICES: usize = 18;

/// `Σ_{i=1}^r Δ(Δ-1)^{i-1} ((1-δ)/(Δ-1))^i`.
pub fn truncated_lower_sum(delta: f64, max_degree: usize, r: usize) -> f64 {
    let dm = max_degree as f64 - 1.0;
    (1..=r)
        .map(|i| max_degree as f64 * dm.powi(i as i32 - 1) * ((1.0 - delta) / dm).powi(i as i32))
        .sum()
}

/// `Δ(1-δ)/((Δ-1)δ)`.
pub fn si_ceiling(delta: f64, max_degree: usize) -> f64 {
    let dd = max_degree as f64;
    dd * (1.0 - delta) / ((dd - 1.0) * delta)
}

/// Field `λ < λ_c` at which `(β, γ, λ)` is `d`-unique with exact slack
/// `delta`, found by bisection in `ln λ`.
pub fn tune_lambda_for_slack(beta: f64, gamma: f64, d: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    let (lambda_c, _) = critical_lambda(beta, gamma, d)?;
    let slack = |ln_l: f64| -> f64 {
        let p = SpinParams { beta, gamma, lambda: ln_l.exp() };
        uniqueness(&p, d).map(|r| r.slack).unwrap_or(f64::NAN)
    };
    let mut lo = lambda_c.ln() - 1.0;
    while slack(lo) < delta {
        lo -= 4.0;
        if lo < -700.0 {
            return Err(Error::Nonconvergent(0));
        }
    }
    let ln_l = bisect(lo, lambda_c.ln(), 1e-15, |x| slack(x) - delta);
    Ok(ln_l.exp())
}

/// Influence magnitudes between vertices at one graph distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceClass {
    pub distance: usize,
    pub pairs: usize,
    pub mean_abs: f64,
    pub min_abs: f64,
    pub max_abs: f64,
    /// `((1-δ)/(Δ-1))^distance`.
    pub tree_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundRun {
    pub n: usize,
    pub max_degree: usize,
    pub girth: Option<usize>,
    pub params: SpinParams<f64>,
    pub slack: f64,
    pub lambda_max: f64,
    pub ceiling: f64,
    pub r: usize,
    pub truncated_sum: f64,
    pub test_vector_quotient: f64,
    pub classes: Vec<DistanceClass>,
}

impl LowerBoundRun {
    /// `truncated_sum ≤ lambda_max ≤ ceiling` up to `tol`.
    pub fn sandwich_holds(&self, tol: f64) -> bool {
        self.truncated_sum <= self.lambda_max + tol && self.lambda_max <= self.ceiling + tol
    }

    pub fn classes_csv(&self) -> String {
        let mut out = String::from("distance,pairs,mean_abs,min_abs,max_abs,tree_limit\n");
        for c in &self.classes {
            out.push_str(&format!(
                "{},{},{:e},{:e},{:e},{:e}\n",
                c.distance, c.pairs, c.mean_abs, c.min_abs, c.max_abs, c.tree_limit
            ));
        }
        out
    }
}

/// Runs the influence measurement on a regular bipartite graph with `(β, γ)`
/// fixed and `λ` tuned so the slack at `Δ - 1` equals `slack_target`.
pub fn run_lower_bound_experiment(g: &Graph, slack_target: f64, beta: f64, gamma: f64) -> Result<LowerBoundRun> {
    let parts = g.bipartition();
    if parts.is_none() || !g.is_regular() || g.max_degree() < 2 {
        return Err(Error::NotBipartiteRegular);
    }
    let parts = parts.unwrap();
    if g.n() > LOWER_BOUND_MAX_VERTICES {
        return Err(Error::TooLarge { what: "vertices", size: g.n(), cap: LOWER_BOUND_MAX_VERTICES });
    }
    let max_degree = g.max_degree();
    let d = max_degree - 1;
    let lambda = tune_lambda_for_slack(beta, gamma, d, slack_target)?;
    let params = SpinParams::new(beta, gamma, lambda)?;
    let slack = uniqueness(&params, d)?.slack;
    let system = SpinSystem::free(g.clone(), params)?;
    let dist = enumerate_capped(&system, LOWER_BOUND_MAX_VERTICES)?;

    let (mean, cov) = covariance(&dist);
    let n = g.n();
    let var: Vec<f64> = mean.iter().map(|m| m * (1.0 - m)).collect();
    let sym = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { cov[(i, j)] / (var[i] * var[j]).sqrt() });
    let lambda_max = sym_max_eigenvalue(&sym);
    let x: Vec<f64> = parts.iter().map(|&side| if side { 1.0 } else { -1.0 }).collect();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += x[i] * sym[(i, j)] * x[j];
        }
    }
    let test_vector_quotient = quad / n as f64;

    let girth = g.girth();
    let r = girth.map_or(n, |gi| (gi / 2).saturating_sub(1));
    let psi = influence_matrix(&dist);
    let ratio = (1.0 - slack) / (max_degree as f64 - 1.0);
    let mut classes = Vec::new();
    let dists: Vec<Vec<usize>> = (0..n).map(|u| g.distances_from(u)).collect();
    for k in 1..=r.max(1) {
        let vals: Vec<f64> = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
            .filter(|&(u, v)| dists[u][v] == k)
            .map(|(u, v)| psi[(u, v)].abs())
            .collect();
        if vals.is_empty() {
            break;
        }
        classes.push(DistanceClass {
            distance: k,
            pairs: vals.len(),
            mean_abs: vals.iter().sum::<f64>() / vals.len() as f64,
            min_abs: vals.iter().copied().fold(f64::INFINITY, f64::min),
            max_abs: vals.iter().copied().fold(0.0, f64::max),
            tree_limit: ratio.powi(k as i32),
        });
    }

    Ok(LowerBoundRun {
        n,
        max_degree,
        girth,
        params,
        slack,
        lambda_max,
        ceiling: si_ceiling(slack, max_degree),
        r,
        truncated_sum: truncated_lower_sum(slack, max_degree, r),
        test_vector_quotient,
        classes,
    })
}
