//! Parameters, Gibbs weights, tilts, pinnings, event families and the
//! random-cluster weight.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scalar::Real;

/// Edge activities `beta` (1-1 edges), `gamma` (0-0 edges) and external
/// field `lambda` (per 1-spin).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinParams<T> {
    pub beta: T,
    pub gamma: T,
    pub lambda: T,
}

impl<T: Real> SpinParams<T> {
    /// Checks `beta >= 0`, `gamma > 0`, `lambda >= 0`, all finite.
    pub fn new(beta: T, gamma: T, lambda: T) -> Result<Self> {
        let p = SpinParams { beta, gamma, lambda };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.beta.is_finite() && self.gamma.is_finite() && self.lambda.is_finite();
        if !finite || self.beta < T::zero() || self.gamma <= T::zero() || self.lambda < T::zero() {
            return Err(Error::InvalidParams(format!(
                "need beta >= 0, gamma > 0, lambda >= 0; got ({}, {}, {})",
                self.beta, self.gamma, self.lambda
            )));
        }
        Ok(())
    }

    pub fn interaction(&self) -> T {
        self.beta * self.gamma
    }

    pub fn is_antiferromagnetic(&self) -> bool {
        self.interaction() < T::one()
    }

    pub fn is_ferromagnetic(&self) -> bool {
        self.interaction() > T::one()
    }

    pub fn is_hard_constraint(&self) -> bool {
        self.beta == T::zero()
    }

    /// `(θβ, θγ, λ)`.
    pub fn edge_tilt(&self, theta: T) -> Result<Self> {
        if !(theta > T::zero()) {
            return Err(Error::NonPositiveTilt(theta.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(SpinParams { beta: theta * self.beta, gamma: theta * self.gamma, lambda: self.lambda })
    }

    /// `(β, γ, θλ)`.
    pub fn vertex_tilt(&self, theta: T) -> Result<Self> {
        if !(theta > T::zero()) {
            return Err(Error::NonPositiveTilt(theta.to_f64().unwrap_or(f64::NAN)));
        }
        Ok(SpinParams { beta: self.beta, gamma: self.gamma, lambda: theta * self.lambda })
    }

    /// Exchanges the roles of the two spins: `(γ, β, 1/λ)`.
    pub fn flip(&self) -> Result<Self> {
        if self.lambda <= T::zero() {
            return Err(Error::ZeroField);
        }
        Ok(SpinParams { beta: self.gamma, gamma: self.beta, lambda: T::one() / self.lambda })
    }

    pub fn to_f64(&self) -> SpinParams<f64> {
        SpinParams {
            beta: self.beta.to_f64().unwrap(),
            gamma: self.gamma.to_f64().unwrap(),
            lambda: self.lambda.to_f64().unwrap(),
        }
    }

    pub fn cast<U: Real>(&self) -> SpinParams<U> {
        let p = self.to_f64();
        SpinParams { beta: U::lit(p.beta), gamma: U::lit(p.gamma), lambda: U::lit(p.lambda) }
    }
}

/// `count * ln(x)` with `0 * ln 0 = 0`.
#[inline]
pub fn xlogy(count: f64, x: f64) -> f64 {
    if count == 0.0 {
        0.0
    } else {
        count * x.ln()
    }
}

/// Counts of 1-1 edges, 0-0 edges and 1-spins.
pub fn mono_counts(g: &Graph, spin: impl Fn(usize) -> bool) -> (usize, usize, usize) {
    let (mut m1, mut m0) = (0, 0);
    for &(u, v) in g.edges() {
        match (spin(u), spin(v)) {
            (true, true) => m1 += 1,
            (false, false) => m0 += 1,
            _ => {}
        }
    }
    let ones = (0..g.n()).filter(|&v| spin(v)).count();
    (m1, m0, ones)
}

/// Unconstrained log-weight `m1 ln β + m0 ln γ + |σ| ln λ`.
pub fn log_weight_free(p: &SpinParams<f64>, g: &Graph, spin: impl Fn(usize) -> bool) -> f64 {
    let (m1, m0, ones) = mono_counts(g, spin);
    xlogy(m1 as f64, p.beta) + xlogy(m0 as f64, p.gamma) + xlogy(ones as f64, p.lambda)
}

/// Log-weight of a configuration under a pinning; `-inf` when it violates
/// the pinning or has zero weight.
pub fn log_weight(p: &SpinParams<f64>, g: &Graph, spin: impl Fn(usize) -> bool + Copy, pin: &Pinning) -> f64 {
    if !pin.satisfied_by(g, spin) {
        return f64::NEG_INFINITY;
    }
    log_weight_free(p, g, spin)
}

/// Reads bit `v` of a configuration mask.
#[inline]
pub fn bit(mask: u64, v: usize) -> bool {
    mask >> v & 1 == 1
}

/// Partial assignment plus monochromatic-edge and oriented-event conditions.
/// Edges are referenced by their endpoints.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pinning {
    #[serde(default)]
    pub assignments: Vec<(usize, bool)>,
    #[serde(default)]
    pub mono_edges: Vec<(usize, usize)>,
    /// `(u, v)` forces `σ_u = 1` and `σ_v = 0`.
    #[serde(default)]
    pub oriented_events: Vec<(usize, usize)>,
}

impl Pinning {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn from_assignments(a: impl IntoIterator<Item = (usize, bool)>) -> Self {
        Pinning { assignments: a.into_iter().collect(), ..Default::default() }
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty() && self.mono_edges.is_empty() && self.oriented_events.is_empty()
    }

    /// Spins forced by assignments and oriented events, per vertex.
    pub fn forced(&self, n: usize) -> Result<Vec<Option<bool>>> {
        let mut out = vec![None; n];
        let mut set = |v: usize, s: bool| -> Result<()> {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            match out[v] {
                Some(t) if t != s => Err(Error::InconsistentPinning(format!("vertex {v} forced both ways"))),
                _ => {
                    out[v] = Some(s);
                    Ok(())
                }
            }
        };
        for &(v, s) in &self.assignments {
            set(v, s)?;
        }
        for &(u, v) in &self.oriented_events {
            set(u, true)?;
            set(v, false)?;
        }
        Ok(out)
    }

    /// Checks internal consistency and that every referenced edge exists.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let forced = self.forced(g.n())?;
        for &(u, v) in self.mono_edges.iter().chain(&self.oriented_events) {
            if g.edge_id(u, v).is_none() {
                return Err(Error::EdgeNotInGraph(u, v));
            }
        }
        for &(u, v) in &self.mono_edges {
            if let (Some(a), Some(b)) = (forced[u], forced[v]) {
                if a != b {
                    return Err(Error::InconsistentPinning(format!("edge ({u}, {v}) forced monochromatic")));
                }
            }
        }
        Ok(())
    }

    pub fn satisfied_by(&self, _g: &Graph, spin: impl Fn(usize) -> bool) -> bool {
        self.assignments.iter().all(|&(v, s)| spin(v) == s)
            && self.mono_edges.iter().all(|&(u, v)| spin(u) == spin(v))
            && self.oriented_events.iter().all(|&(u, v)| spin(u) && !spin(v))
    }

    /// Vertex pinning as a partial map.
    pub fn vertex_map(&self, n: usize) -> Vec<Option<bool>> {
        let mut out = vec![None; n];
        for &(v, s) in &self.assignments {
            out[v] = Some(s);
        }
        out
    }
}

/// Graph, parameters and conditioning.
#[derive(Debug, Clone)]
pub struct SpinSystem {
    pub graph: Graph,
    pub params: SpinParams<f64>,
    pub pinning: Pinning,
}

impl SpinSystem {
    pub fn new(graph: Graph, params: SpinParams<f64>, pinning: Pinning) -> Result<Self> {
        params.validate()?;
        pinning.validate(&graph)?;
        Ok(SpinSystem { graph, params, pinning })
    }

    pub fn free(graph: Graph, params: SpinParams<f64>) -> Result<Self> {
        Self::new(graph, params, Pinning::none())
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn log_weight_mask(&self, sigma: u64) -> f64 {
        log_weight(&self.params, &self.graph, |v| bit(sigma, v), &self.pinning)
    }

    pub fn log_weight(&self, sigma: &[bool]) -> f64 {
        log_weight(&self.params, &self.graph, |v| sigma[v], &self.pinning)
    }

    pub fn with_params(&self, params: SpinParams<f64>) -> Self {
        SpinSystem { graph: self.graph.clone(), params, pinning: self.pinning.clone() }
    }

    pub fn with_pinning(&self, pinning: Pinning) -> Result<Self> {
        Self::new(self.graph.clone(), self.params, pinning)
    }
}

/// An event over configurations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Event {
    /// All listed vertices carry the listed spins.
    Literals(Vec<(usize, bool)>),
    /// Both endpoints agree.
    Monochromatic(usize, usize),
}

impl Event {
    pub fn holds(&self, spin: impl Fn(usize) -> bool) -> bool {
        match self {
            Event::Literals(lits) => lits.iter().all(|&(v, s)| spin(v) == s),
            Event::Monochromatic(u, v) => spin(*u) == spin(*v),
        }
    }

    /// The same event, expressed as pinning constraints.
    pub fn add_to(&self, pin: &mut Pinning) {
        match self {
            Event::Literals(lits) => pin.assignments.extend(lits.iter().copied()),
            Event::Monochromatic(u, v) => pin.mono_edges.push((*u, *v)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    VertexOccupied,
    OrientedEdge10,
    EdgeMonochromatic,
    Custom,
}

/// Family of events with per-event tilts (removal probabilities).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventFamily {
    pub kind: EventKind,
    pub events: Vec<Event>,
    pub tilts: Vec<f64>,
}

impl EventFamily {
    /// One event `σ_v = 1` per vertex.
    pub fn vertex_occupied(g: &Graph, theta: f64) -> Self {
        let events = (0..g.n()).map(|v| Event::Literals(vec![(v, true)])).collect();
        Self::uniform(EventKind::VertexOccupied, events, theta)
    }

    /// One event `σ_u = 1, σ_v = 0` per oriented edge, in oriented-index order.
    pub fn oriented_edge_10(g: &Graph, theta: f64) -> Self {
        let events = g
            .oriented_edges()
            .into_iter()
            .map(|(u, v)| Event::Literals(vec![(u, true), (v, false)]))
            .collect();
        Self::uniform(EventKind::OrientedEdge10, events, theta)
    }

    /// One event `σ_u = σ_v` per edge.
    pub fn edge_monochromatic(g: &Graph, theta: f64) -> Self {
        let events = g.edges().iter().map(|&(u, v)| Event::Monochromatic(u, v)).collect();
        Self::uniform(EventKind::EdgeMonochromatic, events, theta)
    }

    pub fn custom(events: Vec<Event>, tilts: Vec<f64>) -> Result<Self> {
        if events.len() != tilts.len() {
            return Err(Error::InvalidParams("one tilt per event".into()));
        }
        Ok(EventFamily { kind: EventKind::Custom, events, tilts })
    }

    fn uniform(kind: EventKind, events: Vec<Event>, theta: f64) -> Self {
        let tilts = vec![theta; events.len()];
        EventFamily { kind, events, tilts }
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn check_tilts(&self) -> Result<()> {
        for &t in &self.tilts {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::InvalidTilt(t));
            }
        }
        Ok(())
    }

    /// Ids of occurring events.
    pub fn occurring(&self, spin: impl Fn(usize) -> bool + Copy) -> Vec<usize> {
        (0..self.events.len()).filter(|&i| self.events[i].holds(spin)).collect()
    }

    /// Occurring events as a bitmask (needs at most 64 events).
    pub fn occurring_mask(&self, sigma: u64) -> u64 {
        debug_assert!(self.events.len() <= 64);
        let mut m = 0u64;
        for (i, e) in self.events.iter().enumerate() {
            if e.holds(|v| bit(sigma, v)) {
                m |= 1 << i;
            }
        }
        m
    }
}

/// Random-cluster parameters: edge probability `p` and vertex activity `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomClusterParams {
    pub p: f64,
    pub lambda: f64,
}

impl RandomClusterParams {
    pub fn new(p: f64, lambda: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&p) || !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParams(format!("need p in [0,1), lambda in [0,1]; got ({p}, {lambda})")));
        }
        Ok(RandomClusterParams { p, lambda })
    }

    /// Parameters coupled to the ferromagnetic Ising model `(β, β, λ)`.
    pub fn from_ising(beta: f64, lambda: f64) -> Result<Self> {
        if !(beta >= 1.0) {
            return Err(Error::NotFerromagnetic);
        }
        Self::new(1.0 - 1.0 / beta, lambda)
    }
}

/// `|S| ln p + |E \ S| ln(1-p) + Σ_C ln(1 + λ^{|C|})` for an edge-id bitmask.
pub fn rc_weight_log(rc: &RandomClusterParams, g: &Graph, s_mask: u64) -> f64 {
    let k = s_mask.count_ones() as f64;
    let rest = g.num_edges() as f64 - k;
    let mut total = xlogy(k, rc.p) + xlogy(rest, 1.0 - rc.p);
    let labels = g.component_labels_mask(s_mask);
    let mut sizes = vec![0usize; g.n()];
    for &l in &labels {
        sizes[l] += 1;
    }
    for &sz in sizes.iter().filter(|&&s| s > 0) {
        total += (1.0 + rc.lambda.powi(sz as i32)).ln();
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;

    fn k2() -> Graph {
        Graph::new(2, &[(0, 1)]).unwrap()
    }

    #[test]
    fn log_weight_examples() {
        let p = SpinParams::new(2.0f64, 2.0, 1.0).unwrap();
        assert!((log_weight(&p, &k2(), |_| true, &Pinning::none()) - 2f64.ln()).abs() < 1e-15);
        let unit = SpinParams::new(1.0, 1.0, 1.0).unwrap();
        let c4 = Family::Cycle { n: 4 }.build().unwrap();
        for s in 0..16u64 {
            assert_eq!(log_weight(&unit, &c4, |v| bit(s, v), &Pinning::none()), 0.0);
        }
        let hc = SpinParams::new(0.0, 1.0, 2.0).unwrap();
        assert_eq!(log_weight(&hc, &k2(), |_| true, &Pinning::none()), f64::NEG_INFINITY);
        assert!(SpinParams::new(1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn tilts_and_flip() {
        let p = SpinParams::new(2.0f64, 2.0, 1.0).unwrap();
        assert_eq!(p.edge_tilt(1.0).unwrap(), p);
        assert_eq!(p.edge_tilt(0.5).unwrap(), SpinParams::new(1.0, 1.0, 1.0).unwrap());
        let hc = SpinParams::new(0.0, 1.0, 4.0).unwrap();
        assert_eq!(hc.vertex_tilt(0.25).unwrap().lambda, 1.0);
        assert!(matches!(p.edge_tilt(0.0), Err(Error::NonPositiveTilt(_))));
        let q = SpinParams::new(2.0f64, 3.0, 0.5).unwrap();
        assert_eq!(q.flip().unwrap(), SpinParams::new(3.0, 2.0, 2.0).unwrap());
        assert_eq!(q.flip().unwrap().flip().unwrap(), q);
        assert_eq!(SpinParams::new(1.0, 1.0, 0.0).unwrap().flip(), Err(Error::ZeroField));
        let a = q.edge_tilt(0.3).unwrap().edge_tilt(0.7).unwrap();
        let b = q.edge_tilt(0.21).unwrap();
        assert!((a.beta - b.beta).abs() < 1e-15 && (a.gamma - b.gamma).abs() < 1e-15);
        let f: SpinParams<f32> = q.cast();
        assert_eq!(f.flip().unwrap().beta, 3.0f32);
    }

    #[test]
    fn tilt_weight_identities() {
        let g = Family::Cycle { n: 4 }.build().unwrap();
        let p = SpinParams::new(0.4, 1.7, 0.9).unwrap();
        let t = p.edge_tilt(0.6).unwrap();
        let v = p.vertex_tilt(0.3).unwrap();
        for s in 0..16u64 {
            let spin = |x| bit(s, x);
            let (m1, m0, ones) = mono_counts(&g, spin);
            let d = log_weight_free(&t, &g, spin) - log_weight_free(&p, &g, spin);
            assert!((d - (m1 + m0) as f64 * 0.6f64.ln()).abs() < 1e-12);
            let d = log_weight_free(&v, &g, spin) - log_weight_free(&p, &g, spin);
            assert!((d - ones as f64 * 0.3f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn events() {
        let g = k2();
        assert!(EventFamily::vertex_occupied(&g, 0.5).occurring(|_| false).is_empty());
        assert_eq!(EventFamily::edge_monochromatic(&g, 0.5).occurring(|_| true), vec![0]);
        let ori = EventFamily::oriented_edge_10(&g, 0.5);
        assert_eq!(ori.occurring(|v| v == 0), vec![0]);
        assert_eq!(ori.occurring(|v| v == 1), vec![1]);
        let c4 = Family::Cycle { n: 4 }.build().unwrap();
        let ori = EventFamily::oriented_edge_10(&c4, 0.5);
        for s in 0..16u64 {
            let (m1, m0, _) = mono_counts(&c4, |v| bit(s, v));
            assert_eq!(ori.occurring_mask(s).count_ones() as usize, 4 - m1 - m0);
        }
    }

    #[test]
    fn pinning_consistency() {
        let g = k2();
        let bad = Pinning { oriented_events: vec![(0, 1)], assignments: vec![(0, false)], ..Default::default() };
        assert!(matches!(bad.validate(&g), Err(Error::InconsistentPinning(_))));
        let bad = Pinning { mono_edges: vec![(0, 1)], assignments: vec![(0, false), (1, true)], ..Default::default() };
        assert!(bad.validate(&g).is_err());
        let json = r#"{"assignments": [[0, true]]}"#;
        let p: Pinning = serde_json::from_str(json).unwrap();
        assert_eq!(p.assignments, vec![(0, true)]);
    }

    #[test]
    fn rc_weight_examples() {
        let g = k2();
        let rc = RandomClusterParams::new(0.5, 1.0).unwrap();
        assert!((rc_weight_log(&rc, &g, 0) - (0.5f64.ln() + 2.0 * 2f64.ln())).abs() < 1e-15);
        let c4 = Family::Cycle { n: 4 }.build().unwrap();
        let rc = RandomClusterParams::new(0.0, 0.3).unwrap();
        assert!((rc_weight_log(&rc, &c4, 0) - 4.0 * 1.3f64.ln()).abs() < 1e-15);
        assert_eq!(rc_weight_log(&rc, &c4, 1), f64::NEG_INFINITY);
        let rc = RandomClusterParams::new(0.4, 0.0).unwrap();
        assert!((rc_weight_log(&rc, &c4, 0b11) - (2.0 * 0.4f64.ln() + 2.0 * 0.6f64.ln())).abs() < 1e-15);
    }
}
