use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::spin::bit;

use super::chains::TransitionMatrix;
use super::dist::{tv, DistTable};
use super::matrices::sym_eigenvalues;

/// Cap on exact mixing times.
pub const MIXING_CAP: u64 = 1_000_000;

/// Spectral gap `1 - λ₂` and absolute gap `1 - max_{i≥2} |λ_i|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub gap: f64,
    pub absolute: f64,
}

/// Gaps of a reversible chain from the eigenvalues of `Π^{1/2} P Π^{-1/2}`.
pub fn spectral_gap(p: &TransitionMatrix, pi: &[f64]) -> Result<Gap> {
    let d = p.dim();
    let residual = p.detailed_balance_residual(pi);
    if residual > 1e-8 {
        return Err(Error::NotReversible(residual));
    }
    if d <= 1 {
        return Ok(Gap { gap: 1.0, absolute: 1.0 });
    }
    let sq: Vec<f64> = pi.iter().map(|x| x.sqrt()).collect();
    let s = DMatrix::from_fn(d, d, |i, j| sq[i] * p.matrix[(i, j)] / sq[j]);
    let ev = sym_eigenvalues(&s);
    // Top eigenvalue is 1 (Perron); the rest give the gaps.
    let rest = &ev[..d - 1];
    let lambda2 = rest.last().copied().unwrap_or(0.0);
    let spread = rest.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(Gap { gap: 1.0 - lambda2, absolute: 1.0 - spread })
}

fn worst_tv(m: &DMatrix<f64>, pi: &[f64]) -> f64 {
    (0..m.nrows())
        .map(|i| {
            let row: Vec<f64> = m.row(i).iter().copied().collect();
            tv(&row, pi)
        })
        .fold(0.0, f64::max)
}

/// Smallest `t` with `max_x TV(P^t(x, ·), π) ≤ eps`, by binary lifting over
/// `P^{2^k}` (the worst-case distance is nonincreasing in `t`).
pub fn exact_mixing_time(p: &TransitionMatrix, pi: &[f64], eps: f64) -> Result<u64> {
    let d = p.dim();
    if worst_tv(&DMatrix::identity(d, d), pi) <= eps {
        return Ok(0);
    }
    let mut powers = vec![p.matrix.clone()];
    while worst_tv(powers.last().unwrap(), pi) > eps {
        if (1u64 << powers.len()) > 2 * MIXING_CAP {
            return Err(Error::Nonconvergent(MIXING_CAP));
        }
        let last = powers.last().unwrap();
        powers.push(last * last);
    }
    // Largest t whose distance still exceeds eps, built bit by bit.
    let mut t = 0u64;
    let mut acc = DMatrix::identity(d, d);
    for k in (0..powers.len()).rev() {
        let cand = &acc * &powers[k];
        if worst_tv(&cand, pi) > eps {
            acc = cand;
            t += 1 << k;
        }
    }
    let t = t + 1;
    if t > MIXING_CAP {
        return Err(Error::Nonconvergent(MIXING_CAP));
    }
    Ok(t)
}

/// Smallest `K` with `Var(f) ≤ K Σ_i E[Var(f | X_{-i})]`. Infinite when the
/// single-site Dirichlet form has a null space beyond constants.
pub fn at_variance_constant(dist: &DistTable) -> Result<f64> {
    let states = dist.support();
    let d = states.len();
    if d > 4096 {
        return Err(Error::TooLarge { what: "support", size: d, cap: 4096 });
    }
    if d == 1 {
        return Ok(1.0);
    }
    let idx: std::collections::HashMap<u64, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let mu: Vec<f64> = states.iter().map(|&s| dist.prob(s)).collect();
    let mut a = DMatrix::<f64>::zeros(d, d);
    for (i, &s) in states.iter().enumerate() {
        for v in 0..dist.n {
            if bit(s, v) {
                continue;
            }
            if let Some(&j) = idx.get(&(s | 1 << v)) {
                let w = mu[i] * mu[j] / (mu[i] + mu[j]);
                a[(i, i)] += w;
                a[(j, j)] += w;
                a[(i, j)] -= w;
                a[(j, i)] -= w;
            }
        }
    }
    let sq: Vec<f64> = mu.iter().map(|x| x.sqrt()).collect();
    let s = DMatrix::from_fn(d, d, |i, j| a[(i, j)] / (sq[i] * sq[j]));
    let ev = sym_eigenvalues(&s);
    let second = ev[1];
    if second <= 1e-12 {
        return Ok(f64::INFINITY);
    }
    Ok(1.0 / second)
}

/// Minimal `R` with `Var(f(Y₁)) ≤ R E[Var(f(Y₁) | Y_t)]`, as `1 / gap` of
/// the induced down-up chain.
pub fn conservation_constant_variance(p: &TransitionMatrix, pi: &[f64]) -> Result<f64> {
    if p.dim() <= 1 {
        return Ok(1.0);
    }
    let g = spectral_gap(p, pi)?;
    if g.gap <= 1e-14 {
        return Err(Error::ZeroGap);
    }
    Ok(1.0 / g.gap)
}

/// Same constant computed from an explicit channel: `joint[y][i]` is
/// `P(Y₁ = state_i, Y_t = y)`. Uses `E[Var(f | Y_t)] = fᵀ(diag μ - Σ_y J_y J_yᵀ / P(y))f`.
pub fn conservation_constant_from_channel(mu: &[f64], joint: &[Vec<f64>]) -> Result<f64> {
    let d = mu.len();
    if d <= 1 {
        return Ok(1.0);
    }
    let mut a = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(mu));
    for col in joint {
        let py: f64 = col.iter().sum();
        if py <= 0.0 {
            continue;
        }
        for i in 0..d {
            if col[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                a[(i, j)] -= col[i] * col[j] / py;
            }
        }
    }
    let sq: Vec<f64> = mu.iter().map(|x| x.sqrt()).collect();
    let s = DMatrix::from_fn(d, d, |i, j| a[(i, j)] / (sq[i] * sq[j]));
    let ev = sym_eigenvalues(&s);
    if ev[1] <= 1e-14 {
        return Err(Error::ZeroGap);
    }
    Ok(1.0 / ev[1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::ChainKind;
    use crate::graph::{Family, Graph};
    use crate::oracle::{enumerate, transition_matrix};
    use crate::spin::{SpinParams, SpinSystem};

    fn sys(g: Graph, b: f64, c: f64, l: f64) -> SpinSystem {
        SpinSystem::free(g, SpinParams::new(b, c, l).unwrap()).unwrap()
    }

    #[test]
    fn single_vertex_glauber() {
        let s = sys(Graph::empty(1), 1.0, 1.0, 1.0);
        let mu = enumerate(&s).unwrap();
        let p = transition_matrix(&s, &ChainKind::Glauber).unwrap();
        let pi = p.restrict(&mu);
        let g = spectral_gap(&p, &pi).unwrap();
        assert!((g.gap - 1.0).abs() < 1e-12);
        assert_eq!(exact_mixing_time(&p, &pi, 0.25).unwrap(), 1);
        assert!((at_variance_constant(&mu).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sw_rank_one() {
        let s = sys(Family::Cycle { n: 4 }.build().unwrap(), 1.0, 1.0, 0.5);
        let mu = enumerate(&s).unwrap();
        let p = transition_matrix(&s, &ChainKind::SwendsenWang).unwrap();
        let pi = p.restrict(&mu);
        assert!((spectral_gap(&p, &pi).unwrap().gap - 1.0).abs() < 1e-10);
        assert_eq!(exact_mixing_time(&p, &pi, 0.25).unwrap(), 1);
        assert!((conservation_constant_variance(&p, &pi).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mixing_time_monotone_in_eps() {
        let s = sys(Family::Path { n: 4 }.build().unwrap(), 3.0, 3.0, 1.0);
        let mu = enumerate(&s).unwrap();
        let p = transition_matrix(&s, &ChainKind::Glauber).unwrap();
        let pi = p.restrict(&mu);
        let mut last = u64::MAX;
        for eps in [0.01, 0.05, 0.1, 0.25, 0.4] {
            let t = exact_mixing_time(&p, &pi, eps).unwrap();
            assert!(t <= last);
            last = t;
        }
        // Brute-force check at eps = 1/4.
        let t = exact_mixing_time(&p, &pi, 0.25).unwrap();
        let mut m = DMatrix::identity(p.dim(), p.dim());
        for step in 1..=t {
            m = &m * &p.matrix;
            assert_eq!(worst_tv(&m, &pi) <= 0.25, step == t);
        }
    }

    #[test]
    fn at_constant_product_and_hardcore() {
        let prod = enumerate(&sys(Graph::empty(3), 1.0, 1.0, 0.3)).unwrap();
        assert!((at_variance_constant(&prod).unwrap() - 1.0).abs() < 1e-9);
        let hc = enumerate(&sys(Graph::new(2, &[(0, 1)]).unwrap(), 0.0, 1.0, 1.0)).unwrap();
        let k = at_variance_constant(&hc).unwrap();
        assert!(k.is_finite() && k >= 1.0);
    }

    #[test]
    fn gap_in_unit_interval() {
        let s = sys(Family::Cycle { n: 4 }.build().unwrap(), 0.2, 0.9, 1.3);
        let mu = enumerate(&s).unwrap();
        for kind in [ChainKind::Glauber, ChainKind::VertexField { theta: 0.5 }, ChainKind::EdgeField { theta: 0.3 }] {
            let p = transition_matrix(&s, &kind).unwrap();
            let g = spectral_gap(&p, &p.restrict(&mu)).unwrap();
            assert!(g.gap >= -1e-12 && g.gap <= 1.0 + 1e-9);
        }
    }
}
