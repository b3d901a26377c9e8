//! Localization quantities checked exactly on small instances: the down
//! operator, coupling independence, stability matrices, and evaluators for
//! the explicit gap, conservation and mixing bounds.

use std::collections::BTreeMap;
use std::f64::consts::E;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::{
    covariance, enumerate, hamming_w1, second_order_correlation, subset_correlation, sym_max_eigenvalue,
    Diagonal, DistTable,
};
use crate::scalar::integrate;
use crate::spin::{bit, Pinning, SpinParams, SpinSystem};
use crate::tree::{uniqueness, VertexTilting};

/// Relative tolerance used when deciding verdicts.
pub const VERDICT_TOL: f64 = 1e-9;

/// Support cap for [`coupling_independence_exact`].
pub const CI_MAX_SUPPORT: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    NotApplicable,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Holds => "holds",
            Verdict::Violated => "violated",
            Verdict::NotApplicable => "not_applicable",
        }
    }
}

/// A bound compared against a measured value. `margin` is positive when the
/// measurement sits on the asserted side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub formula_value: f64,
    pub measured_value: Option<f64>,
    pub verdict: Verdict,
    pub margin: Option<f64>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub constants: BTreeMap<String, f64>,
}

impl BoundReport {
    fn judged(name: &str, formula: f64, measured: f64, margin: f64, tol: f64) -> Self {
        let ok = margin >= -tol * formula.abs().max(1.0);
        BoundReport {
            name: name.to_string(),
            formula_value: formula,
            measured_value: Some(measured),
            verdict: if ok { Verdict::Holds } else { Verdict::Violated },
            margin: Some(margin),
            constants: BTreeMap::new(),
        }
    }

    /// `measured ≤ formula`.
    pub fn upper(name: &str, formula: f64, measured: f64, tol: f64) -> Self {
        Self::judged(name, formula, measured, formula - measured, tol)
    }

    /// `measured ≥ formula`.
    pub fn lower(name: &str, formula: f64, measured: f64, tol: f64) -> Self {
        Self::judged(name, formula, measured, measured - formula, tol)
    }

    pub fn not_applicable(name: &str, formula: f64) -> Self {
        BoundReport {
            name: name.to_string(),
            formula_value: formula,
            measured_value: None,
            verdict: Verdict::NotApplicable,
            margin: None,
            constants: BTreeMap::new(),
        }
    }

    pub fn with_constant(mut self, key: &str, value: f64) -> Self {
        self.constants.insert(key.to_string(), value);
        self
    }

    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }
}

/// CSV with columns `name,formula,measured,margin,verdict`.
pub fn reports_to_csv(reports: &[BoundReport]) -> String {
    let opt = |x: Option<f64>| x.map(|v| format!("{v:e}")).unwrap_or_default();
    let mut out = String::from("name,formula,measured,margin,verdict\n");
    for r in reports {
        out.push_str(&format!(
            "{},{:e},{},{},{}\n",
            r.name,
            r.formula_value,
            opt(r.measured_value),
            opt(r.margin),
            r.verdict.as_str()
        ));
    }
    out
}

/// Pushes a subset distribution through independent keep-coins: element `i`
/// survives with probability `theta[i]`.
pub fn down_operator(dist: &DistTable, theta: &[f64]) -> Result<DistTable> {
    if theta.len() != dist.n {
        return Err(Error::InvalidParams("one keep probability per element".into()));
    }
    if let Some(&t) = theta.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::ThetaOutOfRange(t));
    }
    let mut out = vec![0.0; dist.probs.len()];
    for (s, &p) in dist.probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        let s = s as u64;
        let mut t = s;
        loop {
            let mut w = p;
            for i in 0..dist.n {
                if bit(s, i) {
                    w *= if bit(t, i) { theta[i] } else { 1.0 - theta[i] };
                }
            }
            out[t as usize] += w;
            if t == 0 {
                break;
            }
            t = (t - 1) & s;
        }
    }
    DistTable::from_weights(dist.n, dist.domain, out)
}

/// Compares `λmax(Cor_μ)` with `λmax(Cor_{μD}) · max 1/θ_i`.
pub fn si_reduction_check(mu: &DistTable, theta: &[f64]) -> Result<BoundReport> {
    let pushed = down_operator(mu, theta)?;
    let lhs = subset_correlation(mu).lambda_max(Diagonal::Literal);
    let after = subset_correlation(&pushed).lambda_max(Diagonal::Literal);
    let inv = theta.iter().fold(1.0f64, |m, &t| m.max(1.0 / t));
    Ok(BoundReport::upper("si-reduction", after * inv, lhs, VERDICT_TOL)
        .with_constant("lambda_max_pushed", after)
        .with_constant("max_inverse_theta", inv))
}

fn compress(x: u64, mask: u64) -> usize {
    let mut out = 0usize;
    let mut k = 0;
    let mut m = mask;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if x & low != 0 {
            out |= 1 << k;
        }
        k += 1;
        m &= m - 1;
    }
    out
}

/// Worst Hamming `W1(μ^σ, μ^τ)` over pinnings `σ, τ` of a common set that
/// differ in one coordinate.
pub fn coupling_independence_exact(dist: &DistTable) -> Result<f64> {
    let support: Vec<(u64, f64)> =
        dist.probs.iter().enumerate().filter(|(_, &p)| p > 0.0).map(|(s, &p)| (s as u64, p)).collect();
    if support.len() > CI_MAX_SUPPORT {
        return Err(Error::TooLarge { what: "coupling-independence support", size: support.len(), cap: CI_MAX_SUPPORT });
    }
    let interior: Vec<usize> = dist.interior().iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    let mut worst = 0.0f64;
    for (ui, &u) in interior.iter().enumerate() {
        let others: Vec<usize> = interior.iter().enumerate().filter(|&(j, _)| j != ui).map(|(_, &v)| v).collect();
        let k = others.len();
        let full: u64 = if k == 0 { 0 } else { (1u64 << k) - 1 };
        let proj: Vec<(u64, bool, f64)> = support
            .iter()
            .map(|&(s, p)| {
                let o = others.iter().enumerate().fold(0u64, |acc, (j, &v)| acc | ((bit(s, v) as u64) << j));
                (o, bit(s, u), p)
            })
            .collect();
        for lam in 0..=full {
            let free = full & !lam;
            let dim = free.count_ones() as usize;
            let mut val = lam;
            loop {
                let mut a = vec![0.0; 1 << dim];
                let mut b = vec![0.0; 1 << dim];
                for &(o, su, p) in &proj {
                    if o & lam == val {
                        let idx = compress(o, free);
                        if su {
                            a[idx] += p;
                        } else {
                            b[idx] += p;
                        }
                    }
                }
                let (sa, sb): (f64, f64) = (a.iter().sum(), b.iter().sum());
                if sa > 0.0 && sb > 0.0 {
                    a.iter_mut().for_each(|x| *x /= sa);
                    b.iter_mut().for_each(|x| *x /= sb);
                    worst = worst.max(1.0 + hamming_w1(&a, &b, dim)?);
                }
                if val == 0 {
                    break;
                }
                val = (val - 1) & lam;
            }
        }
    }
    Ok(worst)
}

/// Largest eigenvalue of `D^{-1/2} Cov D^{-1/2}` with `D = diag(mean)`, over
/// coordinates of positive mean.
pub fn cov_over_mean_lambda_max(dist: &DistTable) -> f64 {
    let (mean, cov) = covariance(dist);
    let idx: Vec<usize> = (0..dist.n).filter(|&i| mean[i] > 0.0).collect();
    let m = DMatrix::from_fn(idx.len(), idx.len(), |a, b| cov[(idx[a], idx[b])] / (mean[idx[a]] * mean[idx[b]]).sqrt());
    sym_max_eigenvalue(&m)
}

/// How many pinnings the stability checks visit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityOptions {
    /// Exhaustive when the pinning space is at most this large, sampled
    /// otherwise.
    pub max_pinnings: usize,
    pub seed: u64,
}

impl Default for StabilityOptions {
    fn default() -> Self {
        StabilityOptions { max_pinnings: 256, seed: 0 }
    }
}

fn free_vertices(system: &SpinSystem) -> Result<Vec<usize>> {
    let forced = system.pinning.forced(system.n())?;
    Ok((0..system.n()).filter(|&v| forced[v].is_none()).collect())
}

/// Partial assignments on `free`, each entry 0 (unpinned), 1 or 2 (pinned to
/// 0 or 1), exhaustive or sampled.
fn pinning_codes(free: usize, ternary: bool, opts: &StabilityOptions) -> Vec<Vec<u8>> {
    let base: usize = if ternary { 3 } else { 2 };
    let total = (base as f64).powi(free as i32);
    let decode = |mut c: usize| -> Vec<u8> {
        (0..free)
            .map(|_| {
                let d = (c % base) as u8;
                c /= base;
                d
            })
            .collect()
    };
    if total <= opts.max_pinnings as f64 {
        (0..total as usize).map(decode).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let mut out = vec![vec![0u8; free]];
        while out.len() < opts.max_pinnings {
            out.push((0..free).map(|_| rng.random_range(0..base as u8)).collect());
        }
        out
    }
}

/// Checks along the vertex-field and edge-field processes at time `theta`:
///
/// * `vertex-cov-vs-ci`: `Cov((1-θ)*μ^S) ⪯ C diag(mean)` with `C` the exact
///   coupling-independence constant of the tilted law;
/// * `edge-pcor-vs-ci`: `λmax(Ψ₂((1/(1-θ))⊗μ^τ)) ≤ 2ΔC` with exact `C`;
/// * `edge-pcor-vs-formula`: the same with `C = 1 + Δ(1-s)/((Δ-1)sθ)`,
///   `s = √(βγ)`, applicable for critical parameters and `θ ≤ 1 - s`.
pub fn stability_matrix_checks(system: &SpinSystem, theta: f64, opts: &StabilityOptions) -> Result<Vec<BoundReport>> {
    if !(0.0..1.0).contains(&theta) {
        return Err(Error::ThetaOutOfRange(theta));
    }
    let g = &system.graph;
    let max_degree = g.max_degree();
    let free = free_vertices(system)?;
    let mut reports = Vec::new();

    let vertex_sys = system.with_params(system.params.vertex_tilt(1.0 - theta)?);
    let mut worst: Option<(f64, f64, f64)> = None;
    let mut visited = 0usize;
    for code in pinning_codes(free.len(), false, opts) {
        let mut pin = system.pinning.clone();
        pin.assignments.extend(free.iter().zip(&code).filter(|(_, &c)| c == 1).map(|(&v, _)| (v, true)));
        let dist = match enumerate(&vertex_sys.with_pinning(pin)?) {
            Ok(d) => d,
            Err(Error::EmptySupport) => continue,
            Err(e) => return Err(e),
        };
        if !dist.interior().contains(&true) {
            continue;
        }
        visited += 1;
        let lam = cov_over_mean_lambda_max(&dist);
        let c = coupling_independence_exact(&dist)?;
        if worst.is_none_or(|(m, _, _)| c - lam < m) {
            worst = Some((c - lam, c, lam));
        }
    }
    if let Some((_, c, lam)) = worst {
        reports.push(BoundReport::upper("vertex-cov-vs-ci", c, lam, VERDICT_TOL).with_constant("pinnings", visited as f64));
    }

    let tilt = 1.0 / (1.0 - theta);
    let edge_sys = system.with_params(system.params.edge_tilt(tilt)?);
    let mut worst_exact: Option<(f64, f64, f64)> = None;
    let mut max_lam = 0.0f64;
    let mut visited = 0usize;
    for code in pinning_codes(free.len(), true, opts) {
        let mut pin = system.pinning.clone();
        pin.assignments
            .extend(free.iter().zip(&code).filter(|(_, &c)| c > 0).map(|(&v, &c)| (v, c == 2)));
        let dist = match enumerate(&edge_sys.with_pinning(pin)?) {
            Ok(d) => d,
            Err(Error::EmptySupport) => continue,
            Err(e) => return Err(e),
        };
        if !dist.interior().contains(&true) {
            continue;
        }
        visited += 1;
        let lam = second_order_correlation(&dist, g).lambda_max(Diagonal::Literal);
        max_lam = max_lam.max(lam);
        let bound = 2.0 * max_degree as f64 * coupling_independence_exact(&dist)?;
        if worst_exact.is_none_or(|(m, _, _)| bound - lam < m) {
            worst_exact = Some((bound - lam, bound, lam));
        }
    }
    if let Some((_, bound, lam)) = worst_exact {
        reports.push(
            BoundReport::upper("edge-pcor-vs-ci", bound, lam, VERDICT_TOL).with_constant("pinnings", visited as f64),
        );
    }

    let p = system.params;
    let s = p.interaction().sqrt();
    let critical = max_degree >= 3
        && p.is_antiferromagnetic()
        && uniqueness(&p, max_degree - 1).is_ok_and(|r| r.slack.abs() <= 1e-6);
    if critical && theta > 0.0 && theta <= 1.0 - s + 1e-12 {
        let dd = max_degree as f64;
        let c = 1.0 + dd * (1.0 - s) / ((dd - 1.0) * s * theta);
        reports.push(BoundReport::upper("edge-pcor-vs-formula", 2.0 * dd * c, max_lam, VERDICT_TOL).with_constant("c", c));
    } else {
        reports.push(BoundReport::not_applicable("edge-pcor-vs-formula", f64::NAN));
    }
    Ok(reports)
}

fn check_sw_inputs(beta: f64, lambda: f64, delta: f64) -> Result<()> {
    if !(beta >= 1.0) || !beta.is_finite() {
        return Err(Error::NotFerromagnetic);
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    if !(lambda >= 0.0) || lambda > 1.0 - delta + 1e-12 {
        return Err(Error::LambdaTooLarge { lambda, limit: 1.0 - delta });
    }
    Ok(())
}

/// Stability rate of the Swendsen-Wang process at time `t`:
/// `min(2/δ² · (1-t)β/((1-t)β - 1), 6Δ/(eδ³))`.
pub fn sw_spectral_rate(beta: f64, max_degree: usize, delta: f64, t: f64) -> f64 {
    let s = (1.0 - t) * beta;
    let crude = 6.0 * max_degree as f64 / (E * delta.powi(3));
    if s <= 1.0 {
        return crude;
    }
    (2.0 / (delta * delta) * s / (s - 1.0)).min(crude)
}

/// `∫_0^{1-1/β} C(t)/(1-t) dt` in closed form.
pub fn sw_variance_integral(beta: f64, max_degree: usize, delta: f64) -> f64 {
    if beta <= 1.0 {
        return 0.0;
    }
    let dd = 3.0 * max_degree as f64;
    let ed = E * delta;
    let crude = 6.0 * max_degree as f64 / (E * delta.powi(3));
    let knee = dd / (dd - ed);
    if beta <= knee {
        crude * beta.ln()
    } else {
        crude * knee.ln() + 2.0 / (delta * delta) * ((beta - 1.0) * (dd - ed) / ed).ln()
    }
}

/// The same integral by adaptive quadrature in `t`.
pub fn sw_variance_integral_quadrature(beta: f64, max_degree: usize, delta: f64) -> f64 {
    if beta <= 1.0 {
        return 0.0;
    }
    let end = 1.0 - 1.0 / beta;
    let f = |t: f64| sw_spectral_rate(beta, max_degree, delta, t) / (1.0 - t);
    // Split at the kink so the quadrature sees smooth pieces.
    let knee = 3.0 * max_degree as f64 / (3.0 * max_degree as f64 - E * delta);
    let t_knee = 1.0 - knee / beta;
    if t_knee > 0.0 && t_knee < end {
        integrate(0.0, t_knee, 1e-12, &f) + integrate(t_knee, end, 1e-12, &f)
    } else {
        integrate(0.0, end, 1e-12, &f)
    }
}

/// Lower bound `exp(-I)/2` on the Swendsen-Wang spectral gap for the Ising
/// model with `β ≥ 1` and `λ ≤ 1 - δ` at maximum degree `Δ`.
pub fn sw_gap_lower_bound(beta: f64, lambda: f64, max_degree: usize, delta: f64) -> Result<f64> {
    check_sw_inputs(beta, lambda, delta)?;
    Ok((-sw_variance_integral(beta, max_degree, delta)).exp() / 2.0)
}

/// `∫_1^β min(2/(δ²(s-1)), C_b(s)/s) ds` with `C_b = 321Δ²/δ⁴` for
/// `s ≤ 1 + δ²/Δ²` and `∞` beyond, for `δ ∈ (0, 0.01)`.
pub fn sw_entropy_integral(beta: f64, max_degree: usize, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.01) {
        return Err(Error::DeltaOutOfRange(delta));
    }
    if !(beta >= 1.0) {
        return Err(Error::NotFerromagnetic);
    }
    let d2 = (max_degree as f64).powi(2);
    let crude = 321.0 * d2 / delta.powi(4);
    // Crossing of the two branches; it lies below 1 + δ²/Δ².
    let cross = 321.0 * d2 / (321.0 * d2 - 2.0 * delta * delta);
    if beta <= cross {
        Ok(crude * beta.ln())
    } else {
        Ok(crude * cross.ln() + 2.0 / (delta * delta) * ((beta - 1.0) / (cross - 1.0)).ln())
    }
}

fn check_critical(p: &SpinParams<f64>, max_degree: usize) -> Result<f64> {
    if max_degree < 3 {
        return Err(Error::InvalidParams("maximum degree must be at least 3".into()));
    }
    let rep = uniqueness(p, max_degree - 1)?;
    if rep.slack.abs() > 1e-6 {
        return Err(Error::NotCritical(rep.slack));
    }
    Ok(p.interaction().sqrt())
}

/// `c = 2Δ²(1-s)/((Δ-1)s)` with `s = √(βγ)`.
pub fn edge_field_exponent(s: f64, max_degree: usize) -> f64 {
    let dd = max_degree as f64;
    2.0 * dd * dd * (1.0 - s) / ((dd - 1.0) * s)
}

/// `(βγ)^{-Δ} (e n)^c`: conservation constant of the edge-field process up
/// to time `1 - √(βγ)` for critical parameters.
pub fn edge_field_r_bound(p: &SpinParams<f64>, max_degree: usize, n: usize) -> Result<f64> {
    if p.beta <= 0.0 {
        return Err(Error::HardConstraint);
    }
    let s = check_critical(p, max_degree)?;
    let c = edge_field_exponent(s, max_degree);
    Ok((s * s).powi(-(max_degree as i32)) * (E * n as f64).powf(c))
}

/// Checks `μ^{S,τ}(u)/μ^{S,τ}(ū) ≤ (1+δ)^{-k_u}` for every vertex not fixed
/// by `(S, τ)`, where `k_u` is the size of `u`'s component in `(V, S)`.
pub fn marginal_bound_check(
    g: &Graph,
    beta: f64,
    lambda: f64,
    delta: f64,
    mono_edges: &[(usize, usize)],
    tau: &[(usize, bool)],
) -> Result<BoundReport> {
    let dd = g.max_degree().max(1) as f64;
    let width = delta * delta / (dd * dd);
    let slack = 1e-12;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::RegimeViolation(format!("delta = {delta} outside (0, 1)")));
    }
    if beta < 1.0 - width - slack || beta > 1.0 + width + slack {
        return Err(Error::RegimeViolation(format!("beta = {beta} outside [1 - δ²/Δ², 1 + δ²/Δ²]")));
    }
    if !(lambda >= 0.0) || lambda > 1.0 - delta + slack {
        return Err(Error::RegimeViolation(format!("lambda = {lambda} above 1 - δ")));
    }
    let pin = Pinning { assignments: tau.to_vec(), mono_edges: mono_edges.to_vec(), oriented_events: Vec::new() };
    let system = SpinSystem::new(g.clone(), SpinParams::new(beta, beta, lambda)?, pin)?;
    let dist = enumerate(&system)?;
    let marg = dist.marginals();
    let comps = g.components_of_pairs(mono_edges)?;
    let mut label = vec![0usize; g.n()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            label[v] = i;
        }
    }
    let mut fixed_comp = vec![false; comps.len()];
    for &(v, _) in tau {
        fixed_comp[label[v]] = true;
    }
    let mut worst: Option<(f64, f64, f64, usize)> = None;
    for u in 0..g.n() {
        if fixed_comp[label[u]] {
            continue;
        }
        let k = comps[label[u]].len();
        let bound = (1.0 + delta).powi(-(k as i32));
        let ratio = marg[u] / (1.0 - marg[u]);
        let rel = ratio / bound;
        if worst.is_none_or(|(r, _, _, _)| rel > r) {
            worst = Some((rel, bound, ratio, k));
        }
    }
    Ok(match worst {
        Some((_, bound, ratio, k)) => {
            BoundReport::upper("marginal-bound", bound, ratio, 1e-12).with_constant("component_size", k as f64)
        }
        None => BoundReport::not_applicable("marginal-bound", f64::NAN),
    })
}

/// Bounds whose asymptotic expressions can be evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MixingBound {
    GlauberCritical,
    EdgeFieldMixing,
    GlauberViaEdge,
    GlauberViaVertex,
    SwMixing,
}

impl MixingBound {
    pub fn name(self) -> &'static str {
        match self {
            MixingBound::GlauberCritical => "glauber-critical",
            MixingBound::EdgeFieldMixing => "edge-field-mixing",
            MixingBound::GlauberViaEdge => "glauber-via-edge",
            MixingBound::GlauberViaVertex => "glauber-via-vertex",
            MixingBound::SwMixing => "sw-mixing",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingInputs {
    pub params: SpinParams<f64>,
    pub max_degree: usize,
    pub n: usize,
    #[serde(default)]
    pub bar_beta: Option<f64>,
    #[serde(default)]
    pub delta: Option<f64>,
}

/// `2 + 1/β` when `β > 0`, else `2 + γ + 1/γ`.
pub fn alpha(p: &SpinParams<f64>) -> f64 {
    if p.beta > 0.0 {
        2.0 + 1.0 / p.beta
    } else {
        2.0 + p.gamma + 1.0 / p.gamma
    }
}

/// `k = Δ(1 - bar_beta)` and `ε = 2k((k+1)Δ - k)/((Δ-1)(Δ-k))`.
pub fn edge_route_exponents(max_degree: usize, bar_beta: f64) -> (f64, f64) {
    let dd = max_degree as f64;
    let k = dd * (1.0 - bar_beta);
    let eps = 2.0 * k * ((k + 1.0) * dd - k) / ((dd - 1.0) * (dd - k));
    (k, eps)
}

/// Polynomial exponents `2k + 2 + ε` (edge route) and `2κ + 2` (vertex
/// route) at the threshold `bar_beta = 1 - (1 + √2)/Δ`.
pub fn headline_exponents(max_degree: usize) -> (f64, f64) {
    let dd = max_degree as f64;
    let bar = 1.0 - (1.0 + 2f64.sqrt()) / dd;
    let (k, eps) = edge_route_exponents(max_degree, bar);
    let beta_c = (dd - 2.0) / dd;
    let kappa = ((1.0 - bar * bar) / (beta_c * beta_c - bar * bar)).sqrt();
    (2.0 * k + 2.0 + eps, 2.0 * kappa + 2.0)
}

/// Evaluates the expression inside a big-O mixing bound. Verdicts are
/// `not_applicable` since the constants are unspecified.
pub fn mixing_bound(which: MixingBound, inputs: &MixingInputs) -> Result<BoundReport> {
    let p = inputs.params;
    let dd = inputs.max_degree as f64;
    let n = inputs.n as f64;
    let out_of_regime = |e: Error| Error::InputsOutOfRegime(format!("{}: {e}", which.name()));
    let log_lambda = (p.lambda + 1.0 / p.lambda).ln();
    let report = match which {
        MixingBound::GlauberCritical => {
            check_critical(&p, inputs.max_degree).map_err(out_of_regime)?;
            let a = alpha(&p);
            let exp = 2.0 * 2f64.sqrt() + 4.0;
            BoundReport::not_applicable(which.name(), (log_lambda + dd * a.ln()) * n.powf(exp))
                .with_constant("alpha", a)
                .with_constant("exponent", exp)
        }
        MixingBound::EdgeFieldMixing => {
            if p.beta <= 0.0 {
                return Err(out_of_regime(Error::HardConstraint));
            }
            let s = check_critical(&p, inputs.max_degree).map_err(out_of_regime)?;
            let c = edge_field_exponent(s, inputs.max_degree);
            let value = (log_lambda + dd * (2.0 + 1.0 / p.beta).ln())
                * (s * s).powi(-(inputs.max_degree as i32))
                * E.powf(c)
                * n.powf(c + 1.0);
            BoundReport::not_applicable(which.name(), value).with_constant("c", c)
        }
        MixingBound::GlauberViaEdge => {
            let s = check_critical(&p, inputs.max_degree).map_err(out_of_regime)?;
            let bar = inputs.bar_beta.ok_or_else(|| Error::InputsOutOfRegime("bar_beta is required".into()))?;
            let beta_c = (dd - 2.0) / dd;
            if !(bar > 0.0 && bar < beta_c) || s < bar - 1e-12 || s > beta_c + 1e-12 {
                return Err(Error::InputsOutOfRegime(format!(
                    "need 0 < bar_beta < (Δ-2)/Δ and sqrt(βγ) in [bar_beta, (Δ-2)/Δ], got bar_beta = {bar}, sqrt(βγ) = {s}"
                )));
            }
            if p.beta <= 0.0 {
                return Err(out_of_regime(Error::HardConstraint));
            }
            let (k, eps) = edge_route_exponents(inputs.max_degree, bar);
            let value = (log_lambda + dd * (2.0 + 1.0 / p.beta).ln())
                * (s * s).powi(-(inputs.max_degree as i32))
                * E.powf(2.0 * k + eps)
                * n.powf(2.0 * k + 2.0 + eps);
            BoundReport::not_applicable(which.name(), value).with_constant("k", k).with_constant("epsilon", eps)
        }
        MixingBound::GlauberViaVertex => {
            check_critical(&p, inputs.max_degree).map_err(out_of_regime)?;
            let bar = inputs.bar_beta.ok_or_else(|| Error::InputsOutOfRegime("bar_beta is required".into()))?;
            let vt = VertexTilting::new(p.beta, p.gamma, inputs.max_degree, bar).map_err(out_of_regime)?;
            let a = alpha(&p);
            let value = (log_lambda + dd * a.ln()) * n.powf(2.0 * vt.kappa + 2.0);
            BoundReport::not_applicable(which.name(), value).with_constant("kappa", vt.kappa).with_constant("alpha", a)
        }
        MixingBound::SwMixing => {
            let delta = inputs.delta.ok_or_else(|| Error::InputsOutOfRegime("delta is required".into()))?;
            if p.beta != p.gamma {
                return Err(out_of_regime(Error::NotFerromagnetic));
            }
            check_sw_inputs(p.beta, p.lambda, delta).map_err(out_of_regime)?;
            let i = sw_entropy_integral(p.beta, inputs.max_degree, delta).map_err(out_of_regime)?;
            let value = (p.beta * dd).powf(4.0 / (delta * delta)) * n.ln().max(1.0);
            BoundReport::not_applicable(which.name(), value).with_constant("entropy_integral", i)
        }
    };
    Ok(report)
}
