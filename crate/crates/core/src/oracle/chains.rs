use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::dynamics::ChainKind;
use crate::error::{Error, Result};
use crate::spin::{bit, log_weight_free, EventFamily, SpinSystem};

use super::dist::{enumerate, DistTable};

/// Default cap on the support size of an exact transition matrix.
pub const DEFAULT_MAX_SUPPORT: usize = 4096;
/// Largest event family handled by the generic event-field construction.
pub const MAX_EVENTS: usize = 24;

/// Row-stochastic matrix over the support of a Gibbs distribution.
#[derive(Debug, Clone)]
pub struct TransitionMatrix {
    pub states: Vec<u64>,
    pub matrix: DMatrix<f64>,
    pub kind: ChainKind,
}

impl TransitionMatrix {
    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Stationary candidate: `dist` restricted to `states`.
    pub fn restrict(&self, dist: &DistTable) -> Vec<f64> {
        self.states.iter().map(|&s| dist.prob(s)).collect()
    }

    /// Row `i` as a dense table over all `2^n` states.
    pub fn row_table(&self, i: usize, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; 1 << n];
        for (j, &s) in self.states.iter().enumerate() {
            out[s as usize] = self.matrix[(i, j)];
        }
        out
    }

    pub fn index_of(&self, state: u64) -> Option<usize> {
        self.states.binary_search(&state).ok()
    }

    pub fn max_row_sum_error(&self) -> f64 {
        (0..self.dim()).map(|i| (self.matrix.row(i).sum() - 1.0).abs()).fold(0.0, f64::max)
    }

    /// `max_j |(πP)_j - π_j|`.
    pub fn stationarity_residual(&self, pi: &[f64]) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|j| ((0..d).map(|i| pi[i] * self.matrix[(i, j)]).sum::<f64>() - pi[j]).abs())
            .fold(0.0, f64::max)
    }

    /// `max_{i,j} |π_i P_ij - π_j P_ji|`.
    pub fn detailed_balance_residual(&self, pi: &[f64]) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in i + 1..d {
                worst = worst.max((pi[i] * self.matrix[(i, j)] - pi[j] * self.matrix[(j, i)]).abs());
            }
        }
        worst
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("from");
        for s in &self.states {
            out.push_str(&format!(",{s}"));
        }
        out.push('\n');
        for (i, s) in self.states.iter().enumerate() {
            out.push_str(&s.to_string());
            for j in 0..self.dim() {
                out.push_str(&format!(",{:e}", self.matrix[(i, j)]));
            }
            out.push('\n');
        }
        out
    }
}

/// Exact transition matrix of `kind` on the support of `system`'s Gibbs law.
pub fn transition_matrix(system: &SpinSystem, kind: &ChainKind) -> Result<TransitionMatrix> {
    transition_matrix_capped(system, kind, DEFAULT_MAX_SUPPORT)
}

pub fn transition_matrix_capped(system: &SpinSystem, kind: &ChainKind, cap: usize) -> Result<TransitionMatrix> {
    kind.validate(system)?;
    let dist = enumerate(system)?;
    let states = dist.support();
    if states.len() > cap {
        return Err(Error::TooLarge { what: "support", size: states.len(), cap });
    }
    let matrix = match kind {
        ChainKind::Glauber => glauber(system, &states),
        ChainKind::VertexField { theta } => vertex_field(system, &states, *theta)?,
        ChainKind::EdgeField { theta } => edge_field(system, &states, *theta)?,
        ChainKind::EventField { family } => event_field(system, &states, family)?,
        ChainKind::SwendsenWang => swendsen_wang(system, &states)?,
    };
    Ok(TransitionMatrix { states, matrix, kind: kind.clone() })
}

fn index_map(states: &[u64]) -> HashMap<u64, usize> {
    states.iter().enumerate().map(|(i, &s)| (s, i)).collect()
}

fn glauber(system: &SpinSystem, states: &[u64]) -> DMatrix<f64> {
    let n = system.n();
    let idx = index_map(states);
    let d = states.len();
    let mut m = DMatrix::zeros(d, d);
    if n == 0 {
        m[(0, 0)] = 1.0;
        return m;
    }
    for (i, &s) in states.iter().enumerate() {
        for v in 0..n {
            let s0 = s & !(1 << v);
            let s1 = s | (1 << v);
            let (l0, l1) = (system.log_weight_mask(s0), system.log_weight_mask(s1));
            let top = l0.max(l1);
            let (w0, w1) = ((l0 - top).exp(), (l1 - top).exp());
            let z = w0 + w1;
            for (t, w) in [(s0, w0), (s1, w1)] {
                if w > 0.0 {
                    m[(i, idx[&t])] += w / z / n as f64;
                }
            }
        }
    }
    m
}

/// Sparse law over support indices.
type UpLaw = Vec<(usize, f64)>;

/// Up-step law: `weights` restricted to states accepted by `keep`, normalized.
fn up_law(states: &[u64], log_w: &[f64], keep: impl Fn(u64) -> bool) -> UpLaw {
    let sel: Vec<usize> = (0..states.len()).filter(|&j| keep(states[j]) && log_w[j] > f64::NEG_INFINITY).collect();
    let top = sel.iter().map(|&j| log_w[j]).fold(f64::NEG_INFINITY, f64::max);
    let ws: Vec<f64> = sel.iter().map(|&j| (log_w[j] - top).exp()).collect();
    let z: f64 = ws.iter().sum();
    sel.into_iter().zip(ws).map(|(j, w)| (j, w / z)).collect()
}

fn check_theta(theta: f64) -> Result<()> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::InvalidTilt(theta));
    }
    Ok(())
}

/// Iterates over all submasks of `mask`, including 0 and `mask`.
fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut next = Some(mask);
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 { None } else { Some((cur - 1) & mask) };
        Some(cur)
    })
}

fn vertex_field(system: &SpinSystem, states: &[u64], theta: f64) -> Result<DMatrix<f64>> {
    check_theta(theta)?;
    let tilted = system.params.vertex_tilt(theta)?;
    let log_w: Vec<f64> = states.iter().map(|&s| log_weight_free(&tilted, &system.graph, |v| bit(s, v))).collect();
    let d = states.len();
    let mut m = DMatrix::zeros(d, d);
    let mut cache: HashMap<u64, UpLaw> = HashMap::new();
    for (i, &s) in states.iter().enumerate() {
        let occ = s.count_ones() as i32;
        for kept in submasks(s) {
            let k = kept.count_ones() as i32;
            let p = (1.0 - theta).powi(k) * theta.powi(occ - k);
            let law = cache.entry(kept).or_insert_with(|| up_law(states, &log_w, |t| t & kept == kept));
            for &(j, q) in law.iter() {
                m[(i, j)] += p * q;
            }
        }
    }
    Ok(m)
}

fn edge_field(system: &SpinSystem, states: &[u64], theta: f64) -> Result<DMatrix<f64>> {
    check_theta(theta)?;
    let g = &system.graph;
    let tilted = system.params.edge_tilt(1.0 / theta)?;
    let log_w: Vec<f64> = states.iter().map(|&s| log_weight_free(&tilted, g, |v| bit(s, v))).collect();
    let d = states.len();
    let mut m = DMatrix::zeros(d, d);
    let mut cache: HashMap<(u64, u64), UpLaw> = HashMap::new();
    for (i, &s) in states.iter().enumerate() {
        // Non-monochromatic edges, oriented from the 1-end to the 0-end.
        let active: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .filter(|&&(u, v)| bit(s, u) != bit(s, v))
            .map(|&(u, v)| if bit(s, u) { (u, v) } else { (v, u) })
            .collect();
        let k = active.len();
        for kept in 0..1u64 << k {
            let nk = kept.count_ones() as i32;
            let p = (1.0 - theta).powi(nk) * theta.powi(k as i32 - nk);
            let (mut ones, mut zeros) = (0u64, 0u64);
            for (b, &(u, v)) in active.iter().enumerate() {
                if bit(kept, b) {
                    ones |= 1 << u;
                    zeros |= 1 << v;
                }
            }
            let law = cache
                .entry((ones, zeros))
                .or_insert_with(|| up_law(states, &log_w, |t| t & ones == ones && t & zeros == 0));
            for &(j, q) in law.iter() {
                m[(i, j)] += p * q;
            }
        }
    }
    Ok(m)
}

fn swendsen_wang(system: &SpinSystem, states: &[u64]) -> Result<DMatrix<f64>> {
    let g = &system.graph;
    if g.num_edges() > 20 {
        return Err(Error::TooLarge { what: "edges", size: g.num_edges(), cap: 20 });
    }
    let (beta, lambda) = (system.params.beta, system.params.lambda);
    let p = 1.0 - 1.0 / beta;
    let idx = index_map(states);
    let d = states.len();
    let mut m = DMatrix::zeros(d, d);
    let mut cache: HashMap<u64, UpLaw> = HashMap::new();
    for (i, &s) in states.iter().enumerate() {
        let mono: u64 = g
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, &(u, v))| bit(s, u) == bit(s, v))
            .fold(0, |acc, (e, _)| acc | 1 << e);
        let k = mono.count_ones() as i32;
        for kept in submasks(mono) {
            let nk = kept.count_ones() as i32;
            let w = if p == 0.0 {
                if nk == 0 { 1.0 } else { 0.0 }
            } else {
                p.powi(nk) * (1.0 - p).powi(k - nk)
            };
            if w == 0.0 {
                continue;
            }
            let law = cache.entry(kept).or_insert_with(|| cluster_recolor_law(g, kept, lambda, &idx));
            for &(j, q) in law.iter() {
                m[(i, j)] += w * q;
            }
        }
    }
    Ok(m)
}

/// Law of the configuration after coloring every component of `(V, kept)`
/// all-1 with probability `λ^|C| / (1 + λ^|C|)`.
fn cluster_recolor_law(g: &crate::graph::Graph, kept: u64, lambda: f64, idx: &HashMap<u64, usize>) -> UpLaw {
    let labels = g.component_labels_mask(kept);
    let mut comps: Vec<u64> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for (v, &l) in labels.iter().enumerate() {
        let k = *slot.entry(l).or_insert_with(|| {
            comps.push(0);
            comps.len() - 1
        });
        comps[k] |= 1 << v;
    }
    let q: Vec<f64> = comps
        .iter()
        .map(|c| {
            let a = lambda.powi(c.count_ones() as i32);
            a / (1.0 + a)
        })
        .collect();
    let mut law = Vec::new();
    for choice in 0..1u64 << comps.len() {
        let mut state = 0u64;
        let mut pr = 1.0;
        for (c, (&mask, &qc)) in comps.iter().zip(&q).enumerate() {
            if bit(choice, c) {
                state |= mask;
                pr *= qc;
            } else {
                pr *= 1.0 - qc;
            }
        }
        if pr > 0.0 {
            if let Some(&j) = idx.get(&state) {
                law.push((j, pr));
            }
        }
    }
    law
}

/// Generic event-field chain. For each state `σ` with occurring set `Z(σ)`,
/// `P(σ, σ') = w(σ') Σ_{T ⊆ Z(σ) ∩ Z(σ')} P(T | σ) / W(T)` with
/// `w(σ') = μ(σ') Π_A θ_A^{[σ' ∈ A]}` and `W(T) = Σ_{Z(σ'') ⊇ T} w(σ'')`.
fn event_field(system: &SpinSystem, states: &[u64], family: &EventFamily) -> Result<DMatrix<f64>> {
    let m_events = family.len();
    if m_events > MAX_EVENTS {
        return Err(Error::TooLarge { what: "events", size: m_events, cap: MAX_EVENTS });
    }
    family.check_tilts()?;
    if let Some(&t) = family.tilts.iter().find(|&&t| t <= 0.0) {
        return Err(Error::InvalidTilt(t));
    }
    let zs: Vec<u64> = states.iter().map(|&s| family.occurring_mask(s)).collect();
    let log_theta: Vec<f64> = family.tilts.iter().map(|t| t.ln()).collect();
    let log_w: Vec<f64> = states
        .iter()
        .zip(&zs)
        .map(|(&s, &z)| {
            let base = system.log_weight_mask(s);
            base + (0..m_events).filter(|&a| bit(z, a)).map(|a| log_theta[a]).sum::<f64>()
        })
        .collect();
    let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = log_w.iter().map(|&l| (l - top).exp()).collect();

    let mut sup = vec![0.0f64; 1 << m_events];
    for (&z, &wi) in zs.iter().zip(&w) {
        sup[z as usize] += wi;
    }
    for b in 0..m_events {
        for mask in 0..sup.len() {
            if mask >> b & 1 == 0 {
                sup[mask] += sup[mask | 1 << b];
            }
        }
    }

    let d = states.len();
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        let z = zs[i];
        let bits: Vec<usize> = (0..m_events).filter(|&a| bit(z, a)).collect();
        let k = bits.len();
        let mut h = vec![0.0f64; 1 << k];
        for (j, hj) in h.iter_mut().enumerate() {
            let mut t = 0u64;
            let mut pd = 1.0;
            for (c, &a) in bits.iter().enumerate() {
                if j >> c & 1 == 1 {
                    t |= 1 << a;
                    pd *= 1.0 - family.tilts[a];
                } else {
                    pd *= family.tilts[a];
                }
            }
            let wt = sup[t as usize];
            if pd > 0.0 && wt > 0.0 {
                *hj = pd / wt;
            }
        }
        for c in 0..k {
            for j in 0..h.len() {
                if j >> c & 1 == 1 {
                    h[j] += h[j ^ 1 << c];
                }
            }
        }
        for j in 0..d {
            if w[j] == 0.0 {
                continue;
            }
            let u = z & zs[j];
            let mut compressed = 0usize;
            for (c, &a) in bits.iter().enumerate() {
                if bit(u, a) {
                    compressed |= 1 << c;
                }
            }
            m[(i, j)] = w[j] * h[compressed];
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Family, Graph};
    use crate::oracle::dist::tv;
    use crate::spin::{Pinning, SpinParams};

    fn sys(g: Graph, b: f64, c: f64, l: f64) -> SpinSystem {
        SpinSystem::free(g, SpinParams::new(b, c, l).unwrap()).unwrap()
    }

    #[test]
    fn glauber_single_vertex() {
        let p = transition_matrix(&sys(Graph::empty(1), 1.0, 1.0, 1.0), &ChainKind::Glauber).unwrap();
        assert!(p.matrix.iter().all(|&x| (x - 0.5).abs() < 1e-15));
    }

    #[test]
    fn sw_with_unit_beta_is_product() {
        let s = sys(Family::Cycle { n: 4 }.build().unwrap(), 1.0, 1.0, 0.4);
        let p = transition_matrix(&s, &ChainKind::SwendsenWang).unwrap();
        let q: f64 = 0.4 / 1.4;
        for i in 0..p.dim() {
            for (j, &t) in p.states.iter().enumerate() {
                let k = t.count_ones() as i32;
                let want = q.powi(k) * (1.0 - q).powi(4 - k);
                assert!((p.matrix[(i, j)] - want).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn vertex_field_near_one_resamples_from_mu() {
        let s = sys(Graph::new(2, &[(0, 1)]).unwrap(), 0.0, 1.0, 1.0);
        let mu = enumerate(&s).unwrap();
        let p = transition_matrix(&s, &ChainKind::VertexField { theta: 0.999 }).unwrap();
        let pi = p.restrict(&mu);
        for i in 0..p.dim() {
            let row: Vec<f64> = p.matrix.row(i).iter().copied().collect();
            assert!(tv(&row, &pi) < 1e-2);
        }
        assert!(matches!(
            transition_matrix(&s, &ChainKind::VertexField { theta: 0.0 }),
            Err(Error::InvalidTilt(_))
        ));
    }

    #[test]
    fn every_chain_is_reversible_on_a_pinned_cycle() {
        let g = Family::Cycle { n: 5 }.build().unwrap();
        let s = SpinSystem::new(g.clone(), SpinParams::new(0.4, 1.3, 0.8).unwrap(), Pinning::from_assignments([(2, false)]))
            .unwrap();
        let mu = enumerate(&s).unwrap();
        let kinds = [
            ChainKind::Glauber,
            ChainKind::VertexField { theta: 0.35 },
            ChainKind::EdgeField { theta: 0.6 },
            ChainKind::EventField { family: EventFamily::edge_monochromatic(&g, 0.45) },
        ];
        for k in &kinds {
            let p = transition_matrix(&s, k).unwrap();
            let pi = p.restrict(&mu);
            assert!(p.max_row_sum_error() < 1e-12, "{k:?}");
            assert!(p.stationarity_residual(&pi) < 1e-12, "{k:?}");
            assert!(p.detailed_balance_residual(&pi) < 1e-12, "{k:?}");
        }
    }

    #[test]
    fn submask_iteration() {
        let mut v: Vec<u64> = submasks(0b101).collect();
        v.sort();
        assert_eq!(v, vec![0, 1, 4, 5]);
        assert_eq!(submasks(0).collect::<Vec<_>>(), vec![0]);
    }
}
