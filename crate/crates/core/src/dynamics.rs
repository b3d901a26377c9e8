//! Samplers for Glauber, vertex-field, edge-field, event-field and
//! Swendsen-Wang dynamics.
//!
//! Randomness comes from ChaCha8 keyed by the chain seed. Every step uses its
//! own stream: `4 * step` for the down phase (and Glauber), `4 * step + 1`
//! for the up phase. Two implementations of the same chain therefore draw
//! identical down coins when they agree on how coins are consumed.

use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::spin::{bit, Event, EventFamily, SpinParams, SpinSystem};

/// Which dynamics to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChainKind {
    Glauber,
    /// Drops each 1-spin with probability `theta`.
    VertexField { theta: f64 },
    /// Drops each non-monochromatic edge with probability `theta`.
    EdgeField { theta: f64 },
    /// Drops each occurring event `A` with probability `tilts[A]`.
    EventField { family: EventFamily },
    SwendsenWang,
}

impl ChainKind {
    pub fn name(&self) -> &'static str {
        match self {
            ChainKind::Glauber => "glauber",
            ChainKind::VertexField { .. } => "vertex_field",
            ChainKind::EdgeField { .. } => "edge_field",
            ChainKind::EventField { .. } => "event_field",
            ChainKind::SwendsenWang => "swendsen_wang",
        }
    }

    pub fn validate(&self, system: &SpinSystem) -> Result<()> {
        match self {
            ChainKind::Glauber => Ok(()),
            ChainKind::VertexField { theta } | ChainKind::EdgeField { theta } => {
                if *theta > 0.0 && *theta < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidTilt(*theta))
                }
            }
            ChainKind::EventField { family } => {
                if let Some(&t) = family.tilts.iter().find(|&&t| !(t > 0.0 && t <= 1.0)) {
                    return Err(Error::InvalidTilt(t));
                }
                if family.tilts.len() != family.events.len() {
                    return Err(Error::InvalidParams("one tilt per event".into()));
                }
                let n = system.n();
                for e in &family.events {
                    let ok = match e {
                        Event::Literals(l) => l.iter().all(|&(v, _)| v < n),
                        Event::Monochromatic(u, v) => *u < n && *v < n,
                    };
                    if !ok {
                        return Err(Error::InvalidParams("event refers to a missing vertex".into()));
                    }
                }
                Ok(())
            }
            ChainKind::SwendsenWang => {
                let p = &system.params;
                let ok = p.beta == p.gamma
                    && p.beta >= 1.0
                    && (0.0..=1.0).contains(&p.lambda)
                    && system.pinning.is_empty();
                if ok {
                    Ok(())
                } else {
                    Err(Error::NotFerromagnetic)
                }
            }
        }
    }
}

/// How the up-step conditional law is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum UpMode {
    /// Exact sampling by enumerating the free variables.
    #[default]
    ExactEnumeration,
    /// Heat-bath updates on the conditioned system, started from the current
    /// state. `updates` defaults to `10 n ln n`.
    NestedGlauber { updates: Option<usize> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub kind: ChainKind,
    #[serde(default)]
    pub up_mode: UpMode,
    #[serde(default)]
    pub seed: u64,
}

/// Largest number of free variables enumerated by an exact up-step.
pub const MAX_EXACT_FREE: usize = 20;

/// Default single-site update budget for nested Glauber up-steps.
pub fn default_nested_updates(n: usize) -> usize {
    let n = n.max(2) as f64;
    (10.0 * n * n.ln()).ceil() as usize
}

fn step_rng(seed: u64, step: u64, phase: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(step.wrapping_mul(4).wrapping_add(phase));
    rng
}

/// Constraints of the system pinning, indexed per vertex.
#[derive(Debug, Clone)]
struct PinIndex {
    forced: Vec<Option<bool>>,
    mono: Vec<Vec<usize>>,
}

impl PinIndex {
    fn new(system: &SpinSystem) -> Result<Self> {
        let n = system.n();
        let forced = system.pinning.forced(n)?;
        let mut mono = vec![Vec::new(); n];
        for &(u, v) in &system.pinning.mono_edges {
            mono[u].push(v);
            mono[v].push(u);
        }
        Ok(PinIndex { forced, mono })
    }
}

/// Conditional law used by an up-step: `params` Gibbs weight times event
/// tilts, restricted to the system pinning plus `forced` spins and `mono`
/// equalities.
#[derive(Debug, Clone)]
pub struct UpProblem {
    pub params: SpinParams<f64>,
    pub forced: Vec<Option<bool>>,
    pub mono: Vec<(usize, usize)>,
    /// `(event, ln θ_A)` factors applied when the event occurs.
    pub event_tilts: Vec<(Event, f64)>,
}

impl UpProblem {
    fn log_weight(&self, g: &Graph, pins: &PinIndex, sigma: &[bool]) -> f64 {
        for (v, f) in self.forced.iter().enumerate() {
            if f.is_some_and(|s| sigma[v] != s) {
                return f64::NEG_INFINITY;
            }
        }
        for (v, f) in pins.forced.iter().enumerate() {
            if f.is_some_and(|s| sigma[v] != s) {
                return f64::NEG_INFINITY;
            }
        }
        for (u, partners) in pins.mono.iter().enumerate() {
            if partners.iter().any(|&w| sigma[w] != sigma[u]) {
                return f64::NEG_INFINITY;
            }
        }
        if self.mono.iter().any(|&(u, v)| sigma[u] != sigma[v]) {
            return f64::NEG_INFINITY;
        }
        let mut lw = crate::spin::log_weight_free(&self.params, g, |v| sigma[v]);
        for (e, lt) in &self.event_tilts {
            if e.holds(|v| sigma[v]) {
                lw += lt;
            }
        }
        lw
    }

    /// Exact law over completions of the free variables, as `(state, prob)`.
    pub fn exact_law(&self, g: &Graph, template: &[bool]) -> Result<Vec<(Vec<bool>, f64)>> {
        let pins = PinIndex { forced: vec![None; g.n()], mono: vec![Vec::new(); g.n()] };
        self.exact_law_with(g, &pins, template)
    }

    fn exact_law_with(&self, g: &Graph, pins: &PinIndex, template: &[bool]) -> Result<Vec<(Vec<bool>, f64)>> {
        let n = g.n();
        let mut base = template.to_vec();
        let mut free = Vec::new();
        for v in 0..n {
            match self.forced[v].or(pins.forced[v]) {
                Some(s) => base[v] = s,
                None => free.push(v),
            }
        }
        if free.len() > MAX_EXACT_FREE {
            return Err(Error::UpStepTooLarge(free.len()));
        }
        let mut out = Vec::with_capacity(1 << free.len());
        let mut lws = Vec::with_capacity(1 << free.len());
        for a in 0..1u64 << free.len() {
            let mut s = base.clone();
            for (i, &v) in free.iter().enumerate() {
                s[v] = bit(a, i);
            }
            let lw = self.log_weight(g, pins, &s);
            if lw > f64::NEG_INFINITY {
                lws.push(lw);
                out.push(s);
            }
        }
        if out.is_empty() {
            return Err(Error::InfeasibleState);
        }
        let top = lws.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let ws: Vec<f64> = lws.iter().map(|l| (l - top).exp()).collect();
        let z: f64 = ws.iter().sum();
        Ok(out.into_iter().zip(ws).map(|(s, w)| (s, w / z)).collect())
    }

    /// Log-weights of `sigma` with `sigma[v]` set to 0 and to 1, counting only
    /// terms that involve `v`.
    fn local(&self, g: &Graph, pins: &PinIndex, ev_of: &[Vec<usize>], sigma: &mut [bool], v: usize) -> (f64, f64) {
        let old = sigma[v];
        let mut out = [0.0f64; 2];
        for (slot, s) in [false, true].into_iter().enumerate() {
            sigma[v] = s;
            let mut lw = 0.0;
            if self.forced[v].is_some_and(|f| f != s) || pins.forced[v].is_some_and(|f| f != s) {
                lw = f64::NEG_INFINITY;
            }
            if pins.mono[v].iter().any(|&w| sigma[w] != s) {
                lw = f64::NEG_INFINITY;
            }
            if self.mono.iter().any(|&(a, b)| (a == v || b == v) && sigma[a] != sigma[b]) {
                lw = f64::NEG_INFINITY;
            }
            if lw > f64::NEG_INFINITY {
                if s {
                    lw += crate::spin::xlogy(1.0, self.params.lambda);
                }
                for &w in g.neighbors(v) {
                    if sigma[w] == s {
                        lw += crate::spin::xlogy(1.0, if s { self.params.beta } else { self.params.gamma });
                    }
                }
                for &i in &ev_of[v] {
                    let (e, lt) = &self.event_tilts[i];
                    if e.holds(|x| sigma[x]) {
                        lw += lt;
                    }
                }
            }
            out[slot] = lw;
        }
        sigma[v] = old;
        (out[0], out[1])
    }
}

fn heat_bath(rng: &mut impl Rng, l0: f64, l1: f64) -> Option<bool> {
    let top = l0.max(l1);
    if top == f64::NEG_INFINITY {
        return None;
    }
    let (w0, w1) = ((l0 - top).exp(), (l1 - top).exp());
    Some(rng.random::<f64>() * (w0 + w1) < w1)
}

/// Down-step outcome of a field chain.
#[derive(Debug, Clone)]
struct DownOutcome {
    problem: UpProblem,
}

/// One-step machinery for a fixed system and chain.
pub struct Sampler<'a> {
    system: &'a SpinSystem,
    spec: ChainSpec,
    pins: PinIndex,
    nested_updates: usize,
}

impl<'a> Sampler<'a> {
    pub fn new(system: &'a SpinSystem, spec: ChainSpec) -> Result<Self> {
        spec.kind.validate(system)?;
        let pins = PinIndex::new(system)?;
        let nested_updates = match spec.up_mode {
            UpMode::NestedGlauber { updates } => updates.unwrap_or_else(|| default_nested_updates(system.n())),
            UpMode::ExactEnumeration => 0,
        };
        Ok(Sampler { system, spec, pins, nested_updates })
    }

    pub fn spec(&self) -> &ChainSpec {
        &self.spec
    }

    pub fn nested_updates(&self) -> usize {
        self.nested_updates
    }

    /// Greedy feasible start: all zeros, then pinned spins, then 1-spins
    /// propagated along monochromatic conditions.
    pub fn initial_state(&self) -> Result<Vec<bool>> {
        let n = self.system.n();
        let mut s = vec![false; n];
        for (v, f) in self.pins.forced.iter().enumerate() {
            if let Some(x) = f {
                s[v] = *x;
            }
        }
        let mut stack: Vec<usize> = (0..n).filter(|&v| s[v]).collect();
        while let Some(v) = stack.pop() {
            for &w in &self.pins.mono[v] {
                if !s[w] {
                    s[w] = true;
                    stack.push(w);
                }
            }
        }
        if self.system.log_weight(&s) == f64::NEG_INFINITY {
            return Err(Error::InfeasibleState);
        }
        Ok(s)
    }

    /// Advances `sigma` by one step of the chain; `step` selects the RNG streams.
    pub fn step(&self, sigma: &mut Vec<bool>, step: u64) -> Result<()> {
        let seed = self.spec.seed;
        match &self.spec.kind {
            ChainKind::Glauber => glauber_update(self.system, &self.pins, sigma, &mut step_rng(seed, step, 0)),
            ChainKind::SwendsenWang => {
                swendsen_wang_step(self.system, sigma, &mut step_rng(seed, step, 0));
                Ok(())
            }
            _ => {
                let down = self.down(sigma, &mut step_rng(seed, step, 0));
                self.up(down, sigma, &mut step_rng(seed, step, 1))
            }
        }
    }

    fn down(&self, sigma: &[bool], rng: &mut impl Rng) -> DownOutcome {
        let g = &self.system.graph;
        let n = g.n();
        match &self.spec.kind {
            ChainKind::VertexField { theta } => {
                let mut forced = vec![None; n];
                for v in 0..n {
                    if sigma[v] && rng.random::<f64>() >= *theta {
                        forced[v] = Some(true);
                    }
                }
                let params = self.system.params.vertex_tilt(*theta).expect("validated tilt");
                DownOutcome { problem: UpProblem { params, forced, mono: vec![], event_tilts: vec![] } }
            }
            ChainKind::EdgeField { theta } => {
                let mut forced = vec![None; n];
                for &(u, v) in g.edges() {
                    if sigma[u] != sigma[v] && rng.random::<f64>() >= *theta {
                        forced[u] = Some(sigma[u]);
                        forced[v] = Some(sigma[v]);
                    }
                }
                let params = self.system.params.edge_tilt(1.0 / theta).expect("validated tilt");
                DownOutcome { problem: UpProblem { params, forced, mono: vec![], event_tilts: vec![] } }
            }
            ChainKind::EventField { family } => {
                let mut forced = vec![None; n];
                let mut mono = Vec::new();
                for (a, e) in family.events.iter().enumerate() {
                    if e.holds(|v| sigma[v]) && rng.random::<f64>() >= family.tilts[a] {
                        match e {
                            Event::Literals(l) => {
                                for &(v, s) in l {
                                    forced[v] = Some(s);
                                }
                            }
                            Event::Monochromatic(u, v) => mono.push((*u, *v)),
                        }
                    }
                }
                let event_tilts = family
                    .events
                    .iter()
                    .cloned()
                    .zip(family.tilts.iter().map(|t| t.ln()))
                    .filter(|(_, lt)| *lt != 0.0)
                    .collect();
                DownOutcome { problem: UpProblem { params: self.system.params, forced, mono, event_tilts } }
            }
            ChainKind::Glauber | ChainKind::SwendsenWang => unreachable!("not a field chain"),
        }
    }

    fn up(&self, down: DownOutcome, sigma: &mut Vec<bool>, rng: &mut impl Rng) -> Result<()> {
        let g = &self.system.graph;
        let problem = down.problem;
        match self.spec.up_mode {
            UpMode::ExactEnumeration => {
                let law = problem.exact_law_with(g, &self.pins, sigma)?;
                let r: f64 = rng.random();
                let mut acc = 0.0;
                for (s, p) in &law {
                    acc += p;
                    if r < acc {
                        *sigma = s.clone();
                        return Ok(());
                    }
                }
                *sigma = law.last().expect("nonempty law").0.clone();
                Ok(())
            }
            UpMode::NestedGlauber { .. } => {
                let n = g.n();
                let mut ev_of = vec![Vec::new(); n];
                for (i, (e, _)) in problem.event_tilts.iter().enumerate() {
                    match e {
                        Event::Literals(l) => l.iter().for_each(|&(v, _)| ev_of[v].push(i)),
                        Event::Monochromatic(u, v) => {
                            ev_of[*u].push(i);
                            ev_of[*v].push(i);
                        }
                    }
                }
                for (v, f) in problem.forced.iter().enumerate() {
                    if let Some(s) = f {
                        sigma[v] = *s;
                    }
                }
                if n == 0 {
                    return Ok(());
                }
                for _ in 0..self.nested_updates {
                    let v = rng.random_range(0..n);
                    let (l0, l1) = problem.local(g, &self.pins, &ev_of, sigma, v);
                    match heat_bath(rng, l0, l1) {
                        Some(s) => sigma[v] = s,
                        None => return Err(Error::InfeasibleState),
                    }
                }
                Ok(())
            }
        }
    }

    /// Exact one-step law from `sigma` (as bitmask states), obtained by
    /// enumerating every down-step outcome and the exact up-step law. Small
    /// systems only.
    pub fn one_step_law(&self, sigma: u64) -> Result<HashMap<u64, f64>> {
        let g = &self.system.graph;
        let n = g.n();
        let s: Vec<bool> = (0..n).map(|v| bit(sigma, v)).collect();
        let mut law: HashMap<u64, f64> = HashMap::new();
        let mask_of = |x: &[bool]| x.iter().enumerate().fold(0u64, |m, (v, &b)| m | (b as u64) << v);
        match &self.spec.kind {
            ChainKind::Glauber => {
                for v in 0..n {
                    let mut t = s.clone();
                    let (l0, l1) = glauber_local(self.system, &self.pins, &mut t, v);
                    let top = l0.max(l1);
                    let (w0, w1) = ((l0 - top).exp(), (l1 - top).exp());
                    for (b, w) in [(false, w0), (true, w1)] {
                        if w > 0.0 {
                            t[v] = b;
                            *law.entry(mask_of(&t)).or_default() += w / (w0 + w1) / n as f64;
                        }
                    }
                }
                if n == 0 {
                    law.insert(0, 1.0);
                }
            }
            ChainKind::SwendsenWang => {
                let (beta, lambda) = (self.system.params.beta, self.system.params.lambda);
                let keep = 1.0 - 1.0 / beta;
                let mono: Vec<usize> = (0..g.num_edges()).filter(|&e| {
                    let (u, v) = g.edge(e);
                    s[u] == s[v]
                }).collect();
                for kept in 0..1u64 << mono.len() {
                    let nk = kept.count_ones() as i32;
                    let pk = keep.powi(nk) * (1.0 - keep).powi(mono.len() as i32 - nk);
                    if pk == 0.0 {
                        continue;
                    }
                    let edges: Vec<usize> = mono.iter().enumerate().filter(|(i, _)| bit(kept, *i)).map(|(_, &e)| e).collect();
                    let comps = g.components(&edges)?;
                    for choice in 0..1u64 << comps.len() {
                        let mut state = 0u64;
                        let mut pr = pk;
                        for (c, comp) in comps.iter().enumerate() {
                            let a = lambda.powi(comp.len() as i32);
                            let q = a / (1.0 + a);
                            if bit(choice, c) {
                                pr *= q;
                                comp.iter().for_each(|&v| state |= 1 << v);
                            } else {
                                pr *= 1.0 - q;
                            }
                        }
                        if pr > 0.0 {
                            *law.entry(state).or_default() += pr;
                        }
                    }
                }
            }
            _ => {
                for (prob, problem) in self.down_outcomes(&s) {
                    for (t, q) in problem.exact_law_with(g, &self.pins, &s)? {
                        *law.entry(mask_of(&t)).or_default() += prob * q;
                    }
                }
            }
        }
        Ok(law)
    }

    /// All down-step outcomes of a field chain with their probabilities, in
    /// the same coin order the sampler uses.
    fn down_outcomes(&self, sigma: &[bool]) -> Vec<(f64, UpProblem)> {
        let g = &self.system.graph;
        // Coins: (probability of removal, what keeping it forces).
        let coins: Vec<f64> = match &self.spec.kind {
            ChainKind::VertexField { theta } => (0..g.n()).filter(|&v| sigma[v]).map(|_| *theta).collect(),
            ChainKind::EdgeField { theta } => g.edges().iter().filter(|&&(u, v)| sigma[u] != sigma[v]).map(|_| *theta).collect(),
            ChainKind::EventField { family } => family
                .events
                .iter()
                .zip(&family.tilts)
                .filter(|(e, _)| e.holds(|v| sigma[v]))
                .map(|(_, &t)| t)
                .collect(),
            _ => unreachable!("not a field chain"),
        };
        let k = coins.len();
        let mut out = Vec::with_capacity(1 << k);
        for keep in 0..1u64 << k {
            let mut prob = 1.0;
            let mut draws = Vec::with_capacity(k);
            for (i, &t) in coins.iter().enumerate() {
                if bit(keep, i) {
                    prob *= 1.0 - t;
                    draws.push(t); // a draw >= t keeps the item
                } else {
                    prob *= t;
                    draws.push(0.0);
                }
            }
            if prob == 0.0 {
                continue;
            }
            let mut scripted = ScriptedDraws { values: draws, pos: 0 };
            out.push((prob, self.down_scripted(sigma, &mut scripted).problem));
        }
        out
    }

    fn down_scripted(&self, sigma: &[bool], draws: &mut ScriptedDraws) -> DownOutcome {
        self.down(sigma, draws)
    }
}

/// Replays fixed uniform draws through the `Rng` interface so that
/// enumeration reuses the sampler's own down-step code.
struct ScriptedDraws {
    values: Vec<f64>,
    pos: usize,
}

impl rand::RngCore for ScriptedDraws {
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn next_u64(&mut self) -> u64 {
        let x = self.values[self.pos];
        self.pos += 1;
        // `random::<f64>()` maps the top 53 bits to [0, 1).
        let scaled = (x * (1u64 << 53) as f64).ceil() as u64;
        scaled.min((1u64 << 53) - 1) << 11
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        rand::rand_core::impls::fill_bytes_via_next(self, dst)
    }
}

fn glauber_local(system: &SpinSystem, pins: &PinIndex, sigma: &mut [bool], v: usize) -> (f64, f64) {
    let problem = UpProblem { params: system.params, forced: vec![None; system.n()], mono: vec![], event_tilts: vec![] };
    let ev_of = vec![Vec::new(); system.n()];
    problem.local(&system.graph, pins, &ev_of, sigma, v)
}

fn glauber_update(system: &SpinSystem, pins: &PinIndex, sigma: &mut [bool], rng: &mut impl Rng) -> Result<()> {
    let n = system.n();
    if n == 0 {
        return Ok(());
    }
    let v = rng.random_range(0..n);
    let (l0, l1) = glauber_local(system, pins, sigma, v);
    match heat_bath(rng, l0, l1) {
        Some(s) => {
            sigma[v] = s;
            Ok(())
        }
        None => Err(Error::InfeasibleState),
    }
}

/// Heat-bath update at a uniformly random vertex.
pub fn glauber_step(system: &SpinSystem, sigma: &mut [bool], rng: &mut impl Rng) -> Result<()> {
    glauber_update(system, &PinIndex::new(system)?, sigma, rng)
}

/// One Swendsen-Wang step: keep each monochromatic edge with probability
/// `1 - 1/β`, then color each component all-1 with probability
/// `λ^|C| / (1 + λ^|C|)`.
pub fn swendsen_wang_step(system: &SpinSystem, sigma: &mut [bool], rng: &mut impl Rng) {
    let g = &system.graph;
    let n = g.n();
    let keep = 1.0 - 1.0 / system.params.beta;
    let mut uf = UnionFind::<usize>::new(n);
    for &(u, v) in g.edges() {
        if sigma[u] == sigma[v] && rng.random::<f64>() < keep {
            uf.union(u, v);
        }
    }
    let labels = uf.into_labeling();
    let mut size = vec![0usize; n];
    for &l in &labels {
        size[l] += 1;
    }
    let mut color: Vec<Option<bool>> = vec![None; n];
    for v in 0..n {
        let l = labels[v];
        let c = *color[l].get_or_insert_with(|| {
            let a = system.params.lambda.powi(size[l] as i32);
            rng.random::<f64>() < a / (1.0 + a)
        });
        sigma[v] = c;
    }
}

/// Which states a trajectory keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum RecordPolicy {
    #[default]
    All,
    Every { k: u64 },
    FinalOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub states: Vec<Vec<bool>>,
    pub step_count: u64,
    /// FNV-1a over every visited state, initial state included.
    pub checksum: u64,
    pub seed: u64,
    pub kind: ChainKind,
    pub up_mode: UpMode,
    /// Single-site updates per nested-Glauber up-step (0 when exact).
    pub nested_updates: usize,
}

const FNV_OFFSET: u64 = 0xcbf29ce484222325;
const FNV_PRIME: u64 = 0x100000001b3;

fn pack(sigma: &[bool]) -> Vec<u8> {
    let mut bytes = vec![0u8; sigma.len().div_ceil(8)];
    for (v, &b) in sigma.iter().enumerate() {
        if b {
            bytes[v / 8] |= 1 << (v % 8);
        }
    }
    bytes
}

fn fnv_update(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Hex encoding of a configuration, vertex 0 in the lowest bit of the first byte.
pub fn state_hex(sigma: &[bool]) -> String {
    pack(sigma).iter().map(|b| format!("{b:02x}")).collect()
}

impl Trajectory {
    /// One hex bitmask per line.
    pub fn dump_states(&self) -> String {
        let mut out = String::new();
        for s in &self.states {
            out.push_str(&state_hex(s));
            out.push('\n');
        }
        out
    }

    pub fn metadata_json(&self) -> String {
        serde_json::json!({
            "seed": self.seed,
            "kind": self.kind,
            "up_mode": self.up_mode,
            "nested_updates": self.nested_updates,
            "step_count": self.step_count,
            "checksum": format!("{:016x}", self.checksum),
            "recorded": self.states.len(),
        })
        .to_string()
    }
}

/// Runs `steps` steps from `initial` (or the greedy start).
pub fn run_chain(
    system: &SpinSystem,
    spec: &ChainSpec,
    steps: u64,
    record: RecordPolicy,
    initial: Option<Vec<bool>>,
) -> Result<Trajectory> {
    let sampler = Sampler::new(system, spec.clone())?;
    let mut sigma = match initial {
        Some(s) => {
            if s.len() != system.n() || system.log_weight(&s) == f64::NEG_INFINITY {
                return Err(Error::InfeasibleState);
            }
            s
        }
        None => sampler.initial_state()?,
    };
    let mut checksum = fnv_update(FNV_OFFSET, &pack(&sigma));
    let mut states = Vec::new();
    if record != RecordPolicy::FinalOnly {
        states.push(sigma.clone());
    }
    for t in 0..steps {
        sampler.step(&mut sigma, t)?;
        checksum = fnv_update(checksum, &pack(&sigma));
        match record {
            RecordPolicy::All => states.push(sigma.clone()),
            RecordPolicy::Every { k } if k > 0 && (t + 1) % k == 0 => states.push(sigma.clone()),
            _ => {}
        }
    }
    if record == RecordPolicy::FinalOnly {
        states.push(sigma.clone());
    }
    Ok(Trajectory {
        states,
        step_count: steps,
        checksum,
        seed: spec.seed,
        kind: spec.kind.clone(),
        up_mode: spec.up_mode,
        nested_updates: sampler.nested_updates(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Family;
    use crate::spin::Pinning;

    fn sys(g: Graph, b: f64, c: f64, l: f64) -> SpinSystem {
        SpinSystem::free(g, SpinParams::new(b, c, l).unwrap()).unwrap()
    }

    fn spec(kind: ChainKind, seed: u64) -> ChainSpec {
        ChainSpec { kind, up_mode: UpMode::ExactEnumeration, seed }
    }

    #[test]
    fn glauber_examples() {
        let s = sys(Graph::empty(1), 1.0, 1.0, 1.0);
        let mut ones = 0;
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20_000 {
            let mut x = vec![false];
            glauber_step(&s, &mut x, &mut rng).unwrap();
            ones += x[0] as usize;
        }
        assert!((ones as f64 / 20_000.0 - 0.5).abs() < 0.02);
        let hc = sys(Graph::new(2, &[(0, 1)]).unwrap(), 0.0, 1.0, 5.0);
        for seed in 0..50 {
            let mut x = vec![false, true];
            glauber_step(&hc, &mut x, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            assert!(!(x[0] && x[1]));
        }
    }

    #[test]
    fn sw_examples() {
        let s = sys(Family::Cycle { n: 4 }.build().unwrap(), 1.0, 1.0, 1.0);
        let law = Sampler::new(&s, spec(ChainKind::SwendsenWang, 0)).unwrap().one_step_law(0b1111).unwrap();
        assert_eq!(law.len(), 16);
        assert!(law.values().all(|&p| (p - 1.0 / 16.0).abs() < 1e-14));
        let z = sys(Family::Cycle { n: 4 }.build().unwrap(), 2.0, 2.0, 0.0);
        let mut x = vec![false; 4];
        for t in 0..20 {
            swendsen_wang_step(&z, &mut x, &mut step_rng(3, t, 0));
            assert_eq!(x, vec![false; 4]);
        }
        let anti = sys(Family::Cycle { n: 4 }.build().unwrap(), 0.5, 0.5, 1.0);
        assert!(matches!(Sampler::new(&anti, spec(ChainKind::SwendsenWang, 0)), Err(Error::NotFerromagnetic)));
    }

    #[test]
    fn scripted_draws_replay_coins() {
        let mut d = ScriptedDraws { values: vec![0.0, 0.3, 0.7], pos: 0 };
        assert!(d.random::<f64>() < 0.3);
        assert!(d.random::<f64>() >= 0.3);
        assert!(d.random::<f64>() >= 0.7);
    }

    #[test]
    fn run_chain_determinism() {
        let s = sys(Family::Cycle { n: 4 }.build().unwrap(), 0.0, 1.0, 1.0);
        let sp = spec(ChainKind::Glauber, 9);
        let a = run_chain(&s, &sp, 0, RecordPolicy::All, None).unwrap();
        assert_eq!(a.states, vec![vec![false; 4]]);
        let a = run_chain(&s, &sp, 500, RecordPolicy::All, None).unwrap();
        let b = run_chain(&s, &sp, 500, RecordPolicy::FinalOnly, None).unwrap();
        assert_eq!(a.checksum, b.checksum);
        assert_eq!(a.states.last(), b.states.last());
        let c = run_chain(&s, &spec(ChainKind::Glauber, 10), 500, RecordPolicy::All, None).unwrap();
        assert_ne!(a.checksum, c.checksum);
        assert_eq!(a.dump_states().lines().count(), 501);
        assert!(a.metadata_json().contains("\"checksum\""));
    }

    #[test]
    fn nested_glauber_mode_runs_and_stays_feasible() {
        let g = Family::Cycle { n: 6 }.build().unwrap();
        let s = SpinSystem::new(g.clone(), SpinParams::new(0.0, 1.0, 1.5).unwrap(), Pinning::from_assignments([(0, true)])).unwrap();
        for kind in [
            ChainKind::VertexField { theta: 0.5 },
            ChainKind::EdgeField { theta: 0.5 },
            ChainKind::EventField { family: EventFamily::oriented_edge_10(&g, 0.4) },
        ] {
            let sp = ChainSpec { kind, up_mode: UpMode::NestedGlauber { updates: None }, seed: 4 };
            let t = run_chain(&s, &sp, 50, RecordPolicy::All, None).unwrap();
            assert_eq!(t.nested_updates, default_nested_updates(6));
            for x in &t.states {
                assert!(s.log_weight(x) > f64::NEG_INFINITY);
            }
        }
    }

    #[test]
    fn initial_state_propagates_pins() {
        let g = Family::Path { n: 3 }.build().unwrap();
        let pin = Pinning { assignments: vec![(0, true)], mono_edges: vec![(0, 1)], ..Default::default() };
        let s = SpinSystem::new(g, SpinParams::new(2.0, 2.0, 1.0).unwrap(), pin).unwrap();
        let x = Sampler::new(&s, spec(ChainKind::Glauber, 0)).unwrap().initial_state().unwrap();
        assert_eq!(x, vec![true, true, false]);
    }
}
