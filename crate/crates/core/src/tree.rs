//! Tree recursions, uniqueness fixed points, critical fields, the control
//! function and the vertex-tilting quantities. Everything here is generic
//! over the scalar type.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{saw_tree, Graph, PinnedTree, SawOptions};
use crate::scalar::{bisect, Real};
use crate::spin::SpinParams;

fn err_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Factor `(βR + 1) / (R + γ)` contributed by a child with ratio `R`, with
/// the limits `R = 0 → 1/γ` and `R = ∞ → β`.
pub fn child_factor<T: Real>(p: &SpinParams<T>, r: T) -> Result<T> {
    if r.is_infinite() {
        if p.gamma <= T::zero() {
            return Err(Error::IndeterminateLimit);
        }
        return Ok(p.beta);
    }
    Ok((p.beta * r + T::one()) / (r + p.gamma))
}

/// `R = λ Π (βR_i + 1) / (R_i + γ)`.
pub fn tree_ratio_recursion<T: Real>(p: &SpinParams<T>, child_ratios: &[T]) -> Result<T> {
    let mut r = p.lambda;
    for &c in child_ratios {
        if c < T::zero() || c.is_nan() {
            return Err(Error::NegativeArgument(err_f64(c)));
        }
        r = r * child_factor(p, c)?;
    }
    Ok(r)
}

/// `ψ(x) = (1 - βγ) x / ((βx + 1)(x + γ))`, the influence of a parent on a
/// child whose subtree ratio is `x`. Returns the mathematical limit at `∞`
/// (which is 1 when `β = 0`).
pub fn psi<T: Real>(p: &SpinParams<T>, x: T) -> T {
    let one = T::one();
    if x.is_infinite() {
        return if p.beta == T::zero() { one - p.beta * p.gamma } else { T::zero() };
    }
    (one - p.beta * p.gamma) * x / ((p.beta * x + one) * (x + p.gamma))
}

/// `f_d(x) = λ ((βx + 1) / (x + γ))^d`.
pub fn f_d<T: Real>(p: &SpinParams<T>, d: usize, x: T) -> T {
    p.lambda * ((p.beta * x + T::one()) / (x + p.gamma)).powi(d as i32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    UniqueWithSlack,
    Critical,
    NonUnique,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniquenessReport<T> {
    pub d: usize,
    pub x_hat: T,
    pub slack: T,
    pub classification: Classification,
}

/// Tolerance used to call a slack critical.
pub fn critical_tolerance<T: Real>() -> T {
    T::lit(1e-9).max(T::epsilon().sqrt())
}

/// Fixed point of `f_d` and its slack `1 - |f_d'(x̂)|`.
pub fn uniqueness<T: Real>(p: &SpinParams<T>, d: usize) -> Result<UniquenessReport<T>> {
    // βγ = 1 (a product law, slack 1) is accepted up to rounding.
    if p.interaction() > T::one() + T::epsilon() * T::lit(8.0) {
        return Err(Error::NotAntiferromagnetic(err_f64(p.interaction())));
    }
    if p.lambda <= T::zero() || d == 0 {
        return Err(Error::InvalidParams("uniqueness needs lambda > 0 and d >= 1".into()));
    }
    let top = p.lambda * p.gamma.powi(-(d as i32));
    let hi = top.max(T::one()) * T::lit(1.0 + 1e-6);
    let x_hat = bisect(T::zero(), hi, T::bisection_tol(), |x| f_d(p, d, x) - x);
    let slack = T::one() - T::from_count(d) * psi(p, x_hat);
    let tol = critical_tolerance::<T>();
    let classification = if slack > tol {
        Classification::UniqueWithSlack
    } else if slack >= -tol {
        Classification::Critical
    } else {
        Classification::NonUnique
    };
    Ok(UniquenessReport { d, x_hat, slack, classification })
}

/// Critical field `λ_c` and the matching fixed point `x_c` (the smaller root
/// of `d(1 - βγ)x = (βx + 1)(x + γ)`).
pub fn critical_lambda<T: Real>(beta: T, gamma: T, d: usize) -> Result<(T, T)> {
    let bg = beta * gamma;
    if !(bg < T::one()) {
        return Err(Error::NotAntiferromagnetic(err_f64(bg)));
    }
    if gamma <= T::zero() || beta < T::zero() {
        return Err(Error::InvalidParams("need beta >= 0 and gamma > 0".into()));
    }
    let df = T::from_count(d);
    let b = (df + T::one()) * bg - (df - T::one());
    if b >= T::zero() {
        return Err(Error::NoCriticalPoint);
    }
    if bg.sqrt() > (df - T::one()) / (df + T::one()) * (T::one() + T::lit(1e-12)) {
        return Err(Error::NoCriticalPoint);
    }
    // The roots merge at the boundary; rounding there is amplified by sqrt.
    let mut disc = b * b - T::lit(4.0) * bg;
    if disc.abs() <= T::lit(1e-10).max(T::epsilon()) * b * b {
        disc = T::zero();
    }
    if disc < T::zero() {
        return Err(Error::NoCriticalPoint);
    }
    let x_c = T::lit(2.0) * gamma / (-b + disc.sqrt());
    let lambda_c = x_c * ((x_c + gamma) / (beta * x_c + T::one())).powi(d as i32);
    Ok((lambda_c, x_c))
}

/// Lower bound `(θ - 1)s / (1 - s)`, `s = √(βγ)`, on the slack of the edge
/// tilt `(θβ, θγ, λ)` of critical parameters, for `θ ∈ [1, 1/s]`.
pub fn tilted_slack_lower_bound<T: Real>(p: &SpinParams<T>, d: usize, theta: T) -> Result<T> {
    let rep = uniqueness(p, d)?;
    if rep.slack.abs() > T::lit(1e-6).max(critical_tolerance::<T>()) {
        return Err(Error::NotCritical(err_f64(rep.slack)));
    }
    let s = p.interaction().sqrt();
    let upper = if s > T::zero() { T::one() / s } else { T::infinity() };
    if !(theta >= T::one() && theta <= upper * (T::one() + T::epsilon())) {
        return Err(Error::ThetaOutOfRange(err_f64(theta)));
    }
    Ok((theta - T::one()) * s / (T::one() - s))
}

/// `(Δ(1-δ)/((Δ-1)δ), 1 + Δ(1-δ)/((Δ-1)δ))`: spectral and coupling
/// independence constants for slack `δ` and maximum degree `Δ`.
pub fn si_ci_formula_bounds<T: Real>(delta: T, max_degree: usize) -> Result<(T, T)> {
    if !(delta > T::zero() && delta <= T::one()) || delta < T::lit(1e-12) {
        return Err(Error::DeltaOutOfRange(err_f64(delta)));
    }
    if max_degree < 2 {
        return Err(Error::InvalidParams("maximum degree must be at least 2".into()));
    }
    let dd = T::from_count(max_degree);
    let si = dd * (T::one() - delta) / ((dd - T::one()) * delta);
    Ok((si, T::one() + si))
}

/// Total influence at the root and root ratio, by the exact tree recursions.
pub fn ti_recursion<T: Real>(tree: &PinnedTree, p: &SpinParams<T>) -> Result<(T, T)> {
    if tree.pinning[tree.root].is_some() {
        return Err(Error::RootPinned);
    }
    let len = tree.len();
    let mut ratio = vec![T::zero(); len];
    let mut ti = vec![T::one(); len];
    for v in tree.bottom_up() {
        match tree.pinning[v] {
            Some(true) => {
                ratio[v] = T::infinity();
                ti[v] = T::zero();
            }
            Some(false) => {
                ratio[v] = T::zero();
                ti[v] = T::zero();
            }
            None => {
                let kids: Vec<T> = tree.children[v].iter().map(|&c| ratio[c]).collect();
                ratio[v] = tree_ratio_recursion(p, &kids)?;
                let mut acc = T::one();
                for &c in &tree.children[v] {
                    if tree.pinning[c].is_none() {
                        acc = acc + psi(p, ratio[c]).abs() * ti[c];
                    }
                }
                ti[v] = acc;
            }
        }
    }
    let r = ratio[tree.root];
    // A frozen root has a zero influence row.
    let total = if r == T::zero() || r.is_infinite() { T::one() } else { ti[tree.root] };
    Ok((total, r))
}

/// `max_r TI_r - 1` over unpinned roots of the self-avoiding-walk trees.
pub fn saw_si_bound<T: Real>(g: &Graph, p: &SpinParams<T>, pinning: &[Option<bool>]) -> Result<T> {
    if !p.is_antiferromagnetic() {
        return Err(Error::NotAntiferromagnetic(err_f64(p.interaction())));
    }
    let mut best = T::zero();
    for r in 0..g.n() {
        if pinning.get(r).copied().flatten().is_some() {
            continue;
        }
        let t = saw_tree(g, r, pinning, &SawOptions::default())?;
        let (ti, _) = ti_recursion(&t, p)?;
        best = best.max(ti - T::one());
    }
    Ok(best)
}

/// Potential function certifying total-influence bounds through the tree
/// recursion: `1/δ` up to `x̂`, `1 + (D/δ) ψ(f^{-1}(x))` up to `λγ^{-D}`,
/// zero beyond.
#[derive(Debug, Clone)]
pub struct ControlFunction<T> {
    pub params: SpinParams<T>,
    pub flipped: bool,
    pub max_degree: usize,
    pub d: usize,
    pub delta: T,
    pub x_hat: T,
    pub upper: T,
    tol: T,
}

impl<T: Real> ControlFunction<T> {
    /// Builds Ξ for maximum degree `Δ`, flipping the spins first when
    /// `λ > (γ/β)^{Δ/2}`.
    pub fn new(params: &SpinParams<T>, max_degree: usize) -> Result<Self> {
        if max_degree < 2 {
            return Err(Error::InvalidParams("maximum degree must be at least 2".into()));
        }
        let mut p = *params;
        let mut flipped = false;
        if p.beta > T::zero() {
            let limit = (p.gamma / p.beta).powf(T::from_count(max_degree) / T::lit(2.0));
            if p.lambda > limit {
                p = p.flip()?;
                flipped = true;
            }
        }
        let d = max_degree - 1;
        let rep = uniqueness(&p, d)?;
        if !(rep.slack > T::zero()) {
            return Err(Error::ZeroSlack);
        }
        let upper = p.lambda * p.gamma.powi(-(d as i32));
        Ok(ControlFunction {
            params: p,
            flipped,
            max_degree,
            d,
            delta: rep.slack,
            x_hat: rep.x_hat,
            upper,
            tol: T::bisection_tol(),
        })
    }

    pub fn psi(&self, x: T) -> T {
        psi(&self.params, x)
    }

    /// `y ∈ [0, x̂]` with `f_D(y) = x`, for `x ∈ [x̂, λγ^{-D}]`.
    pub fn f_inverse(&self, x: T) -> T {
        let p = self.params;
        bisect(T::zero(), self.x_hat, self.tol, |y| f_d(&p, self.d, y) - x)
    }

    pub fn xi(&self, x: T) -> Result<T> {
        if x < T::zero() || x.is_nan() {
            return Err(Error::NegativeArgument(err_f64(x)));
        }
        if x <= self.x_hat {
            return Ok(T::one() / self.delta);
        }
        // Ξ jumps to 0 past λγ^{-D}; roots equal to it in exact arithmetic
        // may round just above.
        if x <= self.upper * (T::one() + self.tol) {
            let y = self.f_inverse(x.min(self.upper));
            return Ok(T::one() + T::from_count(self.d) / self.delta * self.psi(y));
        }
        Ok(T::zero())
    }

    /// `ψ(x) Ξ(x)` with `ψ(∞)Ξ(∞) = 0`.
    pub fn xi_psi(&self, x: T) -> Result<T> {
        if x.is_infinite() {
            return Ok(T::zero());
        }
        Ok(self.psi(x) * self.xi(x)?)
    }

    /// `(1 - δ) / (δ (Δ - 1))`.
    pub fn xi_psi_bound(&self) -> T {
        (T::one() - self.delta) / (self.delta * T::from_count(self.d))
    }

    /// `Ξ(λ Π h(x_i)) - 1 - Σ ψ(x_i) Ξ(x_i)`; nonnegative for a valid control
    /// function.
    pub fn functional_gap(&self, xs: &[T]) -> Result<T> {
        let root = tree_ratio_recursion(&self.params, xs)?;
        let mut rhs = T::one();
        for &x in xs {
            rhs = rhs + self.xi_psi(x)?;
        }
        Ok(self.xi(root)? - rhs)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ControlReport {
    pub flipped: bool,
    pub delta: f64,
    pub x_hat: f64,
    pub trials: usize,
    /// Largest `1 + Σψ(x_i)Ξ(x_i) - Ξ(root)` seen (≤ 0 when all hold).
    pub worst_functional: f64,
    /// Largest `Ξψ - (1-δ)/(δ(Δ-1))` seen.
    pub worst_xi_psi: f64,
    pub max_xi_psi: f64,
    pub xi_psi_bound: f64,
    pub pass: bool,
}

/// Randomized check of the control-function inequalities. Children counts
/// range over `1..=D` when `max(β, γ) ≤ 1` and equal `D` otherwise.
pub fn verify_control_function<T: Real>(cf: &ControlFunction<T>, trials: usize, seed: u64) -> Result<ControlReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let p = cf.params;
    let small = p.beta <= T::one() && p.gamma <= T::one();
    let scale = cf.x_hat.to_f64().unwrap();
    let sample = |rng: &mut ChaCha8Rng| -> T {
        let u: f64 = rng.random();
        if u < 0.05 {
            T::zero()
        } else if u < 0.10 {
            T::infinity()
        } else if u < 0.15 {
            cf.x_hat
        } else {
            let e: f64 = rng.random_range(-8.0..8.0);
            T::lit(scale * 10f64.powf(e))
        }
    };
    let mut worst_functional = f64::NEG_INFINITY;
    let mut xs = Vec::with_capacity(cf.d);
    for _ in 0..trials {
        let k = if small { rng.random_range(1..=cf.d) } else { cf.d };
        xs.clear();
        for _ in 0..k {
            xs.push(sample(&mut rng));
        }
        let gap = cf.functional_gap(&xs)?;
        worst_functional = worst_functional.max(-gap.to_f64().unwrap());
    }
    // Ξψ on a grid around x̂ plus random points.
    let bound = cf.xi_psi_bound().to_f64().unwrap();
    let mut max_xi_psi: f64 = 0.0;
    let mut grid: Vec<T> = vec![cf.x_hat, cf.upper];
    for i in 0..=2000 {
        let e = -6.0 + 12.0 * i as f64 / 2000.0;
        grid.push(T::lit(scale * 10f64.powf(e)));
    }
    for i in 1..=200 {
        let h = 1e-9 * i as f64;
        grid.push(cf.x_hat * T::lit(1.0 + h));
        grid.push(cf.x_hat * T::lit(1.0 - h));
    }
    for _ in 0..trials.min(10_000) {
        grid.push(sample(&mut rng));
    }
    for x in grid {
        max_xi_psi = max_xi_psi.max(cf.xi_psi(x)?.to_f64().unwrap());
    }
    let worst_xi_psi = max_xi_psi - bound;
    let tol = 1e-9;
    Ok(ControlReport {
        flipped: cf.flipped,
        delta: cf.delta.to_f64().unwrap(),
        x_hat: scale,
        trials,
        worst_functional,
        worst_xi_psi,
        max_xi_psi,
        xi_psi_bound: bound,
        pass: worst_functional <= tol && worst_xi_psi <= tol,
    })
}

/// Quantities of the vertex-tilting analysis for `(β, γ)` at maximum degree
/// `Δ` with threshold `bar_beta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VertexTilting<T> {
    pub beta: T,
    pub gamma: T,
    pub max_degree: usize,
    pub bar_beta: T,
    pub beta_c: T,
    pub kappa: T,
    pub x_c: T,
    pub lambda_c: T,
    /// `Δ/(Δ-2)`.
    pub lower: T,
    /// `Δ(1-βγ)x_c / (γ - βx_c²)`.
    pub ratio_form: T,
    /// `√((1-βγ)/(β_c² - βγ))`.
    pub sqrt_form: T,
}

impl<T: Real> VertexTilting<T> {
    pub fn new(beta: T, gamma: T, max_degree: usize, bar_beta: T) -> Result<Self> {
        if max_degree < 3 {
            return Err(Error::InvalidParams("maximum degree must be at least 3".into()));
        }
        let dd = T::from_count(max_degree);
        if bar_beta > (dd - T::lit(2.1)) / dd {
            return Err(Error::BarBetaTooLarge(err_f64(bar_beta)));
        }
        let bg = beta * gamma;
        if bg.sqrt() > bar_beta * (T::one() + T::lit(1e-12)) {
            return Err(Error::InvalidParams("need sqrt(beta*gamma) <= bar_beta".into()));
        }
        let beta_c = (dd - T::lit(2.0)) / dd;
        let kappa = ((T::one() - bar_beta * bar_beta) / (beta_c * beta_c - bar_beta * bar_beta)).sqrt();
        let (lambda_c, x_c) = critical_lambda(beta, gamma, max_degree - 1)?;
        let ratio_form = dd * (T::one() - bg) * x_c / (gamma - beta * x_c * x_c);
        let sqrt_form = ((T::one() - bg) / (beta_c * beta_c - bg)).sqrt();
        Ok(VertexTilting {
            beta,
            gamma,
            max_degree,
            bar_beta,
            beta_c,
            kappa,
            x_c,
            lambda_c,
            lower: dd / (dd - T::lit(2.0)),
            ratio_form,
            sqrt_form,
        })
    }

    /// `λ(x) = x ((x + γ)/(βx + 1))^D`.
    pub fn lambda_of_x(&self, x: T) -> T {
        x * ((x + self.gamma) / (self.beta * x + T::one())).powi(self.max_degree as i32 - 1)
    }

    /// `δ(x) = 1 - D(1-βγ)x / ((βx + 1)(x + γ))`.
    pub fn delta_of_x(&self, x: T) -> T {
        let dm = T::from_count(self.max_degree - 1);
        T::one() - dm * (T::one() - self.beta * self.gamma) * x / ((self.beta * x + T::one()) * (x + self.gamma))
    }

    /// Whether `Δ/(Δ-2) ≤ ratio = sqrt ≤ κ ≤ 10` holds to relative `tol`.
    pub fn chain_holds(&self, tol: T) -> bool {
        let close = (self.ratio_form - self.sqrt_form).abs() <= tol * self.sqrt_form;
        close
            && self.lower <= self.sqrt_form * (T::one() + tol)
            && self.sqrt_form <= self.kappa * (T::one() + tol)
            && self.kappa <= T::lit(10.0)
    }
}
