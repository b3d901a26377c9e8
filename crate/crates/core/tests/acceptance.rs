//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero when a criterion outside `KNOWN_FAILURES` fails.
//!
//! Derived quantities are recomputed here by brute force (Gibbs weights,
//! influence matrices, random-cluster weights, eigenvalues, mixing times)
//! rather than read back from the library's own oracle.

use std::collections::HashMap;
use std::f64::consts::E;
use std::time::Instant;

use nalgebra::DMatrix;
use spinlab::dynamics::{ChainKind, ChainSpec, Sampler, UpMode};
use spinlab::experiment::{
    at_mixing_systems, coef_v_points, control_points, product_systems, saw_graphs, si_graphs, small_support_systems,
    sw_graphs, tilted_grid_points, SI_INTERACTIONS, SI_SLACKS, SW_BETAS, SW_LAMBDAS, TREE_PARAMS,
};
use spinlab::graph::{all_trees, small_graph_catalog};
use spinlab::lower_bound::{run_lower_bound_experiment, truncated_lower_sum, tune_lambda_for_slack};
use spinlab::oracle::{at_variance_constant, transition_matrix, TransitionMatrix};
use spinlab::stability::{edge_field_r_bound, sw_gap_lower_bound};
use spinlab::tree::{
    critical_lambda, saw_si_bound, ti_recursion, tilted_slack_lower_bound, uniqueness, verify_control_function,
    Classification, ControlFunction, VertexTilting,
};
use spinlab::{Event, EventFamily, Family, Graph, Pinning, PinnedTree, SpinParams, SpinSystem};

/// Criteria expected to fail, with the reason recorded alongside the code.
/// 12: T_mix(1/4) = 1 on single-vertex systems exceeds n K ln(1/μ_min) < 1.
const KNOWN_FAILURES: &[usize] = &[12];

fn bit(s: u64, v: usize) -> bool {
    s >> v & 1 == 1
}

/// Unnormalized Gibbs weights over all `2^n` masks, straight from the
/// definition.
fn gibbs_weights(g: &Graph, p: &SpinParams<f64>, pin: &Pinning) -> Vec<f64> {
    (0..1u64 << g.n())
        .map(|s| {
            if !pin.satisfied_by(g, |v| bit(s, v)) {
                return 0.0;
            }
            let (mut w, mut ones) = (1.0, 0);
            for &(u, v) in g.edges() {
                match (bit(s, u), bit(s, v)) {
                    (true, true) => w *= p.beta,
                    (false, false) => w *= p.gamma,
                    _ => {}
                }
            }
            for v in 0..g.n() {
                ones += bit(s, v) as i32;
            }
            w * p.lambda.powi(ones)
        })
        .collect()
}

fn normalized(mut w: Vec<f64>) -> Vec<f64> {
    let z: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= z);
    w
}

fn gibbs(s: &SpinSystem) -> Vec<f64> {
    normalized(gibbs_weights(&s.graph, &s.params, &s.pinning))
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// `Ψ(u, v) = P(v | u = 1) - P(v | u = 0)`, zero on degenerate rows.
fn influence(mu: &[f64], n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    for u in 0..n {
        let (mut p1, mut p0) = (0.0, 0.0);
        let (mut c1, mut c0) = (vec![0.0; n], vec![0.0; n]);
        for (s, &w) in mu.iter().enumerate() {
            let s = s as u64;
            let (p, c) = if bit(s, u) { (&mut p1, &mut c1) } else { (&mut p0, &mut c0) };
            *p += w;
            for v in 0..n {
                if bit(s, v) {
                    c[v] += w;
                }
            }
        }
        if p1 <= 1e-300 || p0 <= 1e-300 {
            continue;
        }
        for v in 0..n {
            if v != u {
                m[(u, v)] = c1[v] / p1 - c0[v] / p0;
            }
        }
    }
    m
}

fn max_real_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().complex_eigenvalues().iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
}

/// `1 - λ₂` of a reversible matrix, from its symmetrization.
fn gap_of(tm: &TransitionMatrix, mu_full: &[f64]) -> f64 {
    let pi: Vec<f64> = tm.states.iter().map(|&s| mu_full[s as usize]).collect();
    let d = pi.len();
    if d <= 1 {
        return 1.0;
    }
    let s = DMatrix::from_fn(d, d, |i, j| pi[i].sqrt() * tm.matrix[(i, j)] / pi[j].sqrt());
    let sym = (&s + s.transpose()) * 0.5;
    let mut ev: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    1.0 - ev[d - 2]
}

struct Outcome {
    pass: bool,
    /// For a known failure: whether it still has the documented cause.
    explained: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, explained: false, detail }
}

// 1 ------------------------------------------------------------------------

fn mixed_family(g: &Graph) -> EventFamily {
    let mut events: Vec<Event> = (0..g.n()).map(|v| Event::Literals(vec![(v, true)])).collect();
    events.extend(g.edges().iter().map(|&(u, v)| Event::Monochromatic(u, v)));
    let tilts = (0..events.len()).map(|i| 0.2 + 0.15 * (i % 5) as f64).collect();
    EventFamily::custom(events, tilts).unwrap()
}

fn criterion_1() -> Outcome {
    let mut graphs: Vec<Graph> = small_graph_catalog(4).into_iter().filter(|g| g.n() <= 6).collect();
    graphs.push(Family::Complete { n: 4 }.build().unwrap());
    let mut systems = Vec::new();
    for g in &graphs {
        for (b, c, l) in [(0.0, 1.0, 1.5), (0.5, 1.2, 0.8), (2.0, 2.0, 0.6), (1.5, 1.5, 1.0)] {
            let p = SpinParams::new(b, c, l).unwrap();
            systems.push(SpinSystem::free(g.clone(), p).unwrap());
            if g.n() >= 3 {
                systems.push(SpinSystem::new(g.clone(), p, Pinning::from_assignments([(0, false)])).unwrap());
            }
        }
    }
    let mut worst: f64 = 0.0;
    let mut per_kind: HashMap<&'static str, usize> = HashMap::new();
    let mut max_support = 0;
    for s in &systems {
        let mu = gibbs(s);
        let mut kinds = vec![
            ChainKind::Glauber,
            ChainKind::VertexField { theta: 0.35 },
            ChainKind::EdgeField { theta: 0.55 },
            ChainKind::EventField { family: mixed_family(&s.graph) },
        ];
        if ChainKind::SwendsenWang.validate(s).is_ok() {
            kinds.push(ChainKind::SwendsenWang);
        }
        for k in kinds {
            let tm = transition_matrix(s, &k).unwrap();
            let pi: Vec<f64> = tm.states.iter().map(|&x| mu[x as usize]).collect();
            let d = pi.len();
            max_support = max_support.max(d);
            for j in 0..d {
                let flow: f64 = (0..d).map(|i| pi[i] * tm.matrix[(i, j)]).sum();
                worst = worst.max((flow - pi[j]).abs());
                for i in 0..d {
                    worst = worst.max((pi[i] * tm.matrix[(i, j)] - pi[j] * tm.matrix[(j, i)]).abs());
                }
            }
            *per_kind.entry(k.name()).or_default() += 1;
        }
    }
    let all_kinds = per_kind.len() == 5 && per_kind.values().all(|&c| c >= 20);
    outcome(
        worst <= 1e-10 && all_kinds && max_support <= 512,
        format!("{} systems, per-kind {:?}, max support {max_support}, worst residual {worst:.2e}", systems.len(), {
            let mut v: Vec<_> = per_kind.into_iter().collect();
            v.sort();
            v
        }),
    )
}

// 2 ------------------------------------------------------------------------

/// Occurring events as masks: vertices, oriented `10` edges or monochromatic
/// edges.
fn occurring(g: &Graph, which: usize, s: u64) -> u64 {
    match which {
        0 => s & ((1u64 << g.n()) - 1),
        1 => {
            let mut m = 0u64;
            for (i, &(u, v)) in g.edges().iter().enumerate() {
                if bit(s, u) && !bit(s, v) {
                    m |= 1 << (2 * i);
                }
                if bit(s, v) && !bit(s, u) {
                    m |= 1 << (2 * i + 1);
                }
            }
            m
        }
        _ => g.edges().iter().enumerate().filter(|(_, &(u, v))| bit(s, u) == bit(s, v)).fold(0, |m, (i, _)| m | 1 << i),
    }
}

fn criterion_2() -> Outcome {
    let times: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];
    let bases = [(0.5, 1.2, 0.8), (0.4, 0.7, 1.3), (2.0, 2.0, 0.6)];
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    let graphs = small_graph_catalog(4);
    for g in &graphs {
        for which in 0..3 {
            let (b, c, l) = bases[which];
            let mu = normalized(gibbs_weights(g, &SpinParams { beta: b, gamma: c, lambda: l }, &Pinning::none()));
            for &t in &times {
                let t: f64 = t;
                cases += 1;
                let mut joint: HashMap<u64, Vec<f64>> = HashMap::new();
                for (s, &w) in mu.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let a = occurring(g, which, s as u64);
                    let k = a.count_ones() as i32;
                    let mut sub = a;
                    loop {
                        let kept = sub.count_ones() as i32;
                        joint.entry(sub).or_insert_with(|| vec![0.0; mu.len()])[s] +=
                            w * t.powi(kept) * (1.0 - t).powi(k - kept);
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & a;
                    }
                }
                // Closed forms: (1-t)*μ pinned on T; (1/(1-t))⊗μ with the
                // oriented events of T; (1-t)⊗μ with T monochromatic.
                let tilted = match which {
                    0 => SpinParams { beta: b, gamma: c, lambda: l * (1.0 - t) },
                    1 => SpinParams { beta: b / (1.0 - t), gamma: c / (1.0 - t), lambda: l },
                    _ => SpinParams { beta: b * (1.0 - t), gamma: c * (1.0 - t), lambda: l },
                };
                for (mask, law) in joint {
                    let mut pin = Pinning::none();
                    match which {
                        0 => pin.assignments = (0..g.n()).filter(|&v| bit(mask, v)).map(|v| (v, true)).collect(),
                        1 => {
                            for (i, &(u, v)) in g.edges().iter().enumerate() {
                                if bit(mask, 2 * i) {
                                    pin.oriented_events.push((u, v));
                                }
                                if bit(mask, 2 * i + 1) {
                                    pin.oriented_events.push((v, u));
                                }
                            }
                        }
                        _ => {
                            pin.mono_edges =
                                g.edges().iter().enumerate().filter(|(i, _)| bit(mask, *i)).map(|(_, &e)| e).collect()
                        }
                    }
                    let closed = normalized(gibbs_weights(g, &tilted, &pin));
                    worst = worst.max(tv(&normalized(law), &closed));
                }
            }
        }
    }
    outcome(worst <= 1e-10, format!("{} graphs, {cases} (graph, process, t) cases, worst TV {worst:.2e}", graphs.len()))
}

// 3 ------------------------------------------------------------------------

fn components(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut label: Vec<usize> = (0..n).collect();
    fn find(l: &mut [usize], x: usize) -> usize {
        if l[x] == x {
            x
        } else {
            let r = find(l, l[x]);
            l[x] = r;
            r
        }
    }
    for &(u, v) in edges {
        let (a, b) = (find(&mut label, u), find(&mut label, v));
        label[a] = b;
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for v in 0..n {
        let r = find(&mut label, v);
        groups.entry(r).or_default().push(v);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort();
    out
}

fn criterion_3() -> Outcome {
    let graphs = small_graph_catalog(5);
    let mut worst: f64 = 0.0;
    let (mut cases, mut nonempty) = (0, 0);
    for g in &graphs {
        let m = g.num_edges();
        for (beta, lambda) in [(1.5, 0.4), (3.0, 1.0), (1.2, 0.7)] {
            let p = 1.0 - 1.0 / beta;
            let ising = SpinParams { beta, gamma: beta, lambda };
            for t in 0u64..1 << m {
                cases += 1;
                nonempty += (t != 0) as usize;
                let t_edges: Vec<(usize, usize)> = (0..m).filter(|&e| bit(t, e)).map(|e| g.edges()[e]).collect();
                let pin = Pinning { mono_edges: t_edges, ..Default::default() };
                let mu = normalized(gibbs_weights(g, &ising, &pin));
                let rc: Vec<f64> = normalized(
                    (0..1u64 << m)
                        .map(|s| {
                            if s & t != t {
                                return 0.0;
                            }
                            let es: Vec<(usize, usize)> = (0..m).filter(|&e| bit(s, e)).map(|e| g.edges()[e]).collect();
                            let k = es.len() as i32;
                            let cl: f64 =
                                components(g.n(), &es).iter().map(|c| 1.0 + lambda.powi(c.len() as i32)).product();
                            p.powi(k) * (1.0 - p).powi(m as i32 - k) * cl
                        })
                        .collect(),
                );
                let mut down = vec![0.0; 1 << m];
                for (s, &w) in mu.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let mono = occurring(g, 2, s as u64);
                    let open = mono & !t;
                    let mut sub = open;
                    loop {
                        let kept = sub.count_ones() as i32;
                        down[(t | sub) as usize] +=
                            w * p.powi(kept) * (1.0 - p).powi(open.count_ones() as i32 - kept);
                        if sub == 0 {
                            break;
                        }
                        sub = (sub - 1) & open;
                    }
                }
                let mut up = vec![0.0; 1 << g.n()];
                for (s, &w) in rc.iter().enumerate() {
                    if w == 0.0 {
                        continue;
                    }
                    let es: Vec<(usize, usize)> = (0..m).filter(|&e| bit(s as u64, e)).map(|e| g.edges()[e]).collect();
                    let comps = components(g.n(), &es);
                    for colour in 0u64..1 << comps.len() {
                        let mut prob = w;
                        let mut sigma = 0u64;
                        for (i, c) in comps.iter().enumerate() {
                            let a = lambda.powi(c.len() as i32);
                            if bit(colour, i) {
                                prob *= a / (1.0 + a);
                                for &v in c {
                                    sigma |= 1 << v;
                                }
                            } else {
                                prob /= 1.0 + a;
                            }
                        }
                        up[sigma as usize] += prob;
                    }
                }
                worst = worst.max(tv(&down, &rc)).max(tv(&up, &mu));
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("{} graphs, {cases} pinned cases ({nonempty} with nonempty T), worst TV {worst:.2e}", graphs.len()),
    )
}

// 4 ------------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let mut count = 0;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut best_ratio: f64 = 0.0;
    for (label, g) in si_graphs() {
        let dd = g.max_degree();
        if dd < 3 || g.n() > 8 {
            continue;
        }
        let n = g.n();
        let pins = [
            Pinning::none(),
            Pinning::from_assignments([(0, true)]),
            Pinning::from_assignments([(n - 1, false)]),
            Pinning::from_assignments([(1, false), (n - 2, true)]),
        ];
        for &(b, c) in &SI_INTERACTIONS {
            if c > 1.0 && !g.is_regular() {
                continue;
            }
            for &delta in &SI_SLACKS {
                let Ok(lambda) = tune_lambda_for_slack(b, c, dd - 1, delta) else { continue };
                let p = SpinParams { beta: b, gamma: c, lambda };
                let exact = uniqueness(&p, dd - 1).unwrap().slack;
                assert!((exact - delta).abs() < 1e-8, "{label}: slack {exact}");
                let ceiling = dd as f64 * (1.0 - exact) / ((dd as f64 - 1.0) * exact);
                for pin in &pins {
                    let w = gibbs_weights(&g, &p, pin);
                    if w.iter().sum::<f64>() == 0.0 {
                        continue;
                    }
                    let lm = max_real_eigenvalue(&influence(&normalized(w), n));
                    count += 1;
                    worst_excess = worst_excess.max(lm - ceiling);
                    best_ratio = best_ratio.max(lm / ceiling);
                }
            }
        }
    }
    outcome(
        count >= 200 && worst_excess <= 1e-9 && best_ratio >= 0.6,
        format!("{count} instances, max(λmax - ceiling) = {worst_excess:.3e}, best λmax/ceiling = {best_ratio:.3}"),
    )
}

// 5 ------------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let g = Family::Heawood.build().unwrap();
    let run = run_lower_bound_experiment(&g, 0.5, 0.0, 1.0).unwrap();
    let lower = 3.0 * 0.25 + 3.0 * 2.0 * 0.25f64.powi(2);
    let ceiling = 3.0 * 0.5 / (2.0 * 0.5);
    let lib_sum_ok = (truncated_lower_sum(0.5, 3, 2) - lower).abs() < 1e-12 && run.r == 2;
    let mu = normalized(gibbs_weights(&g, &run.params, &Pinning::none()));
    let psi = influence(&mu, g.n());
    let lm = max_real_eigenvalue(&psi);
    let mut dev: f64 = 0.0;
    for &(u, v) in g.edges() {
        for (a, b) in [(u, v), (v, u)] {
            dev = dev.max((psi[(a, b)].abs() / 0.25 - 1.0).abs());
        }
    }
    let agree = (lm - run.lambda_max).abs() < 1e-8;
    outcome(
        lib_sum_ok && agree && lm >= lower - 1e-9 && lm <= ceiling + 1e-9 && dev <= 0.10,
        format!(
            "λ = {:.6}, λmax = {lm:.4} in [{lower}, {ceiling}], library λmax agrees: {agree}, distance-1 deviation {:.2}%",
            run.params.lambda,
            dev * 100.0
        ),
    )
}

// 6 ------------------------------------------------------------------------

/// `exp(-∫_1^β min(2/(δ²(s-1)), 6Δ/(eδ³s)) ds) / 2` by composite Simpson.
fn sw_bound_quadrature(beta: f64, dd: usize, delta: f64) -> f64 {
    if beta <= 1.0 {
        return 0.5;
    }
    let rate = |s: f64| (2.0 / (delta * delta * (s - 1.0))).min(6.0 * dd as f64 / (E * delta.powi(3) * s));
    let n = 200_000;
    let h = (beta - 1.0) / n as f64;
    let mut sum = rate(1.0) + rate(beta);
    for i in 1..n {
        sum += rate(1.0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    (-(sum * h / 3.0)).exp() / 2.0
}

fn sw_gap(g: &Graph, beta: f64, lambda: f64) -> f64 {
    let s = SpinSystem::free(g.clone(), SpinParams::new(beta, beta, lambda).unwrap()).unwrap();
    gap_of(&transition_matrix(&s, &ChainKind::SwendsenWang).unwrap(), &gibbs(&s))
}

fn criterion_6() -> Outcome {
    let mut instances = 0;
    let mut worst_margin = f64::INFINITY;
    let mut formula_err: f64 = 0.0;
    for (_, g) in sw_graphs() {
        for &b in &SW_BETAS {
            for &l in &SW_LAMBDAS {
                let bound = sw_bound_quadrature(b, g.max_degree(), 1.0 - l);
                let lib = sw_gap_lower_bound(b, l, g.max_degree(), 1.0 - l).unwrap();
                formula_err = formula_err.max((lib / bound - 1.0).abs());
                worst_margin = worst_margin.min(sw_gap(&g, b, l) - bound);
                instances += 1;
            }
        }
    }
    let gaps: Vec<f64> = [4, 6, 8].iter().map(|&n| sw_gap(&Family::Path { n }.build().unwrap(), 2.0, 0.5)).collect();
    let hi = gaps.iter().copied().fold(0.0, f64::max);
    let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
    let variation = (hi - lo) / hi;
    outcome(
        worst_margin >= 0.0 && formula_err < 1e-6 && variation < 0.25,
        format!(
            "{instances} (graph, β, λ) cases, min(gap - bound) = {worst_margin:.3e}, closed form vs quadrature {formula_err:.1e}; path gaps {gaps:.4?} vary {:.1}%",
            variation * 100.0
        ),
    )
}

// 7 ------------------------------------------------------------------------

fn criterion_7() -> Outcome {
    let p: SpinParams<f64> = SpinParams { beta: 1.0 / 3.0, gamma: 1.0 / 3.0, lambda: 1.0 };
    let s = (p.beta * p.gamma).sqrt();
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, f) in [("K4", Family::Complete { n: 4 }), ("prism", Family::Prism { k: 3 })] {
        let g = f.build().unwrap();
        let (dd, n) = (g.max_degree() as f64, g.n() as f64);
        let formula = (p.beta * p.gamma).powf(-dd) * (E * n).powf(2.0 * dd * dd * (1.0 - s) / ((dd - 1.0) * s));
        let lib = edge_field_r_bound(&p, g.max_degree(), g.n()).unwrap();
        let system = SpinSystem::free(g.clone(), p).unwrap();
        let r = 1.0 / gap_of(&transition_matrix(&system, &ChainKind::EdgeField { theta: s }).unwrap(), &gibbs(&system));
        pass &= r <= formula && (lib / formula - 1.0).abs() < 1e-9;
        parts.push(format!("{label}: R = {r:.4} vs formula {formula:.3e}"));
    }
    outcome(pass, parts.join("; "))
}

// 8 ------------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let points = control_points();
    let mut worst_functional = f64::NEG_INFINITY;
    let mut worst_attain: f64 = 0.0;
    let mut flipped = 0;
    for (i, (p, dd)) in points.iter().enumerate() {
        let cf = ControlFunction::new(p, *dd).unwrap();
        let r = verify_control_function(&cf, 100_000, 1000 + i as u64).unwrap();
        let delta = uniqueness(&cf.params, dd - 1).unwrap().slack;
        let bound = (1.0 - delta) / (delta * (*dd as f64 - 1.0));
        worst_functional = worst_functional.max(r.worst_functional);
        worst_attain = worst_attain.max((r.max_xi_psi - bound).abs());
        flipped += r.flipped as usize;
    }
    outcome(
        points.len() == 20 && worst_functional <= 1e-9 && worst_attain <= 1e-6,
        format!(
            "{} points ({flipped} flipped) x 1e5 trials, worst functional excess {worst_functional:.2e}, max |maxΞψ - bound| {worst_attain:.2e}",
            points.len()
        ),
    )
}

// 9 ------------------------------------------------------------------------

fn pinning_of(pin: &[Option<bool>]) -> Pinning {
    Pinning::from_assignments(pin.iter().enumerate().filter_map(|(v, s)| s.map(|s| (v, s))))
}

fn criterion_9() -> Outcome {
    let trees = all_trees(9);
    let mut worst: f64 = 0.0;
    let mut comparisons = 0;
    for t in &trees {
        let n = t.n();
        let mut pins = vec![vec![None; n]];
        if let Some(leaf) = (0..n).rev().find(|&v| t.degree(v) == 1) {
            for s in [false, true] {
                let mut pin = vec![None; n];
                pin[leaf] = Some(s);
                pins.push(pin);
            }
        }
        for &(b, c, l) in &TREE_PARAMS {
            let p = SpinParams { beta: b, gamma: c, lambda: l };
            for pin in &pins {
                let w = gibbs_weights(t, &p, &pinning_of(pin));
                if w.iter().sum::<f64>() == 0.0 {
                    continue;
                }
                let psi = influence(&normalized(w), n);
                for r in (0..n).filter(|&r| pin[r].is_none()) {
                    let exact = 1.0 + psi.row(r).iter().map(|x| x.abs()).sum::<f64>();
                    let (ti, _) = ti_recursion(&PinnedTree::from_tree(t, r, pin).unwrap(), &p).unwrap();
                    worst = worst.max((ti - exact).abs());
                    comparisons += 1;
                }
            }
        }
    }
    let mut saw_margin = f64::INFINITY;
    let graphs = saw_graphs();
    for g in &graphs {
        let n = g.n();
        let mut pins = vec![vec![None; n]];
        if n >= 3 {
            let mut pin = vec![None; n];
            pin[n - 1] = Some(true);
            pins.push(pin);
        }
        for (b, c, l) in [(0.0, 1.0, 1.3), (0.4, 1.5, 0.7), (0.3, 0.9, 2.0)] {
            let p = SpinParams { beta: b, gamma: c, lambda: l };
            for pin in &pins {
                let w = gibbs_weights(g, &p, &pinning_of(pin));
                if w.iter().sum::<f64>() == 0.0 {
                    continue;
                }
                let psi = influence(&normalized(w), n);
                let mut exact = max_real_eigenvalue(&psi);
                for r in (0..n).filter(|&r| pin[r].is_none()) {
                    exact = exact.max(psi.row(r).iter().map(|x| x.abs()).sum::<f64>());
                }
                saw_margin = saw_margin.min(saw_si_bound(g, &p, pin).unwrap() - exact);
            }
        }
    }
    outcome(
        trees.len() == 95 && worst <= 1e-10 && saw_margin >= -1e-10,
        format!(
            "{} trees, {comparisons} rooted comparisons, worst |TI - exact| {worst:.2e}; {} SAW graphs, min(bound - exact) {saw_margin:.3e}",
            trees.len(),
            graphs.len()
        ),
    )
}

// 10 -----------------------------------------------------------------------

fn criterion_10() -> Outcome {
    let hc = uniqueness::<f64>(&SpinParams { beta: 0.0, gamma: 1.0, lambda: 4.0 }, 2).unwrap();
    let hc_ok = hc.classification == Classification::Critical && (hc.x_hat - 1.0).abs() < 1e-9;
    let lc = critical_lambda::<f64>(0.0, 1.0, 2).unwrap().0;
    let third = uniqueness::<f64>(&SpinParams { beta: 1.0 / 3.0, gamma: 1.0 / 3.0, lambda: 1.0 }, 2).unwrap();
    let third_ok = third.classification == Classification::Critical;
    let points = tilted_grid_points();
    let mut grid_margin = f64::INFINITY;
    let mut formula_err: f64 = 0.0;
    let mut cells = 0;
    for (p, d) in &points {
        let s = (p.beta * p.gamma).sqrt();
        for j in 0..20 {
            let theta = 1.0 + (1.0 / s - 1.0) * j as f64 / 19.0;
            let bound = tilted_slack_lower_bound(p, *d, theta).unwrap();
            formula_err = formula_err.max((bound - (theta - 1.0) * s / (1.0 - s)).abs());
            let tilted = SpinParams { beta: p.beta * theta, gamma: p.gamma * theta, lambda: p.lambda };
            grid_margin = grid_margin.min(uniqueness(&tilted, *d).unwrap().slack - bound);
            cells += 1;
        }
    }
    let coef = coef_v_points();
    let coef_fail = coef
        .iter()
        .filter(|&&(b, c, dd, bar)| {
            let vt = VertexTilting::new(b, c, dd, bar).unwrap();
            !(vt.chain_holds(1e-9) && vt.kappa <= 10.0 + 1e-9)
        })
        .count();
    outcome(
        hc_ok && (lc - 4.0).abs() < 1e-9 && third_ok && cells == 400 && grid_margin >= -1e-9 && formula_err < 1e-12
            && coef.len() == 50
            && coef_fail == 0,
        format!(
            "hardcore λc = {lc}, x̂ = {:.12}; (1/3,1/3,1) slack {:.1e}; {cells} tilted cells, min(measured - bound) {grid_margin:.3e}; coefV {}/{} hold",
            hc.x_hat,
            third.slack,
            coef.len() - coef_fail,
            coef.len()
        ),
    )
}

// 11 -----------------------------------------------------------------------

fn criterion_11() -> Outcome {
    let systems = small_support_systems(10);
    let mut worst: f64 = 0.0;
    let mut pairs = 0;
    let mut sw = 0;
    for s in &systems {
        let g = &s.graph;
        let mut list = Vec::new();
        for theta in [0.3, 0.7] {
            list.push((ChainKind::VertexField { theta }, EventFamily::vertex_occupied(g, theta)));
            list.push((ChainKind::EdgeField { theta }, EventFamily::oriented_edge_10(g, theta)));
        }
        if ChainKind::SwendsenWang.validate(s).is_ok() {
            list.push((ChainKind::SwendsenWang, EventFamily::edge_monochromatic(g, 1.0 / s.params.beta)));
            sw += 1;
        }
        for (dedicated, family) in list {
            let event = ChainKind::EventField { family };
            let a = transition_matrix(s, &dedicated).unwrap();
            let b = transition_matrix(s, &event).unwrap();
            let sampler =
                Sampler::new(s, ChainSpec { kind: event.clone(), up_mode: UpMode::ExactEnumeration, seed: 0 }).unwrap();
            for (i, &x) in a.states.iter().enumerate() {
                let ra: Vec<f64> = a.matrix.row(i).iter().copied().collect();
                let rb: Vec<f64> = b.matrix.row(i).iter().copied().collect();
                let law = sampler.one_step_law(x).unwrap();
                let rc: Vec<f64> = a.states.iter().map(|y| law.get(y).copied().unwrap_or(0.0)).collect();
                worst = worst.max(tv(&ra, &rb)).max(tv(&ra, &rc));
            }
            pairs += 1;
        }
    }
    outcome(
        worst <= 1e-10 && !systems.is_empty() && sw > 0,
        format!("{} systems (support 2..=10), {pairs} preset pairs ({sw} Swendsen-Wang), worst row TV {worst:.2e}", systems.len()),
    )
}

// 12 -----------------------------------------------------------------------

fn mixing_time(tm: &TransitionMatrix, mu: &[f64]) -> u64 {
    let pi: Vec<f64> = tm.states.iter().map(|&s| mu[s as usize]).collect();
    let d = pi.len();
    let mut power = DMatrix::<f64>::identity(d, d);
    for t in 0..100_000u64 {
        let worst = (0..d)
            .map(|i| 0.5 * (0..d).map(|j| (power[(i, j)] - pi[j]).abs()).sum::<f64>())
            .fold(0.0, f64::max);
        if worst <= 0.25 {
            return t;
        }
        power = &power * &tm.matrix;
    }
    u64::MAX
}

fn criterion_12() -> Outcome {
    let mut at_err: f64 = 0.0;
    let products = product_systems();
    for s in &products {
        let k = at_variance_constant(&spinlab::oracle::enumerate(s).unwrap()).unwrap();
        at_err = at_err.max((k - 1.0).abs());
    }
    let systems = at_mixing_systems();
    let mut violations = Vec::new();
    for s in &systems {
        let mu = gibbs(s);
        let k = at_variance_constant(&spinlab::oracle::enumerate(s).unwrap()).unwrap();
        let mu_min = mu.iter().copied().filter(|&x| x > 0.0).fold(1.0, f64::min);
        let bound = s.n() as f64 * k * (1.0 / mu_min).ln();
        let t = mixing_time(&transition_matrix(s, &ChainKind::Glauber).unwrap(), &mu);
        if t as f64 > bound {
            violations.push((s.n(), t, bound));
        }
    }
    let only_single = violations.iter().all(|&(n, _, _)| n == 1);
    let mut o = outcome(
        at_err <= 1e-9 && violations.is_empty(),
        format!(
            "AT on {} product laws: max |K - 1| {at_err:.1e}; mixing inequality on {} systems: {} violations{}",
            products.len(),
            systems.len(),
            violations.len(),
            if violations.is_empty() {
                String::new()
            } else {
                format!(
                    " (all single-vertex: {only_single}; e.g. n = {}, T_mix = {}, n K ln(1/μmin) = {:.4})",
                    violations[0].0, violations[0].1, violations[0].2
                )
            }
        ),
    );
    o.explained = at_err <= 1e-9 && only_single;
    o
}

fn main() {
    let criteria: [(usize, &str, fn() -> Outcome); 12] = [
        (1, "stationarity and reversibility", criterion_1),
        (2, "posterior-law identities", criterion_2),
        (3, "Edwards-Sokal coupling", criterion_3),
        (4, "tight spectral independence", criterion_4),
        (5, "SI lower bound on Heawood", criterion_5),
        (6, "Swendsen-Wang gap bound", criterion_6),
        (7, "edge-field conservation", criterion_7),
        (8, "control function", criterion_8),
        (9, "tree recursions", criterion_9),
        (10, "uniqueness arithmetic", criterion_10),
        (11, "chain equivalences", criterion_11),
        (12, "AT constants and mixing", criterion_12),
    ];
    let mut unexpected = Vec::new();
    for (id, name, f) in criteria {
        let start = Instant::now();
        let o = f();
        let known = KNOWN_FAILURES.contains(&id) && o.explained;
        let status = match (o.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        println!("criterion {id:>2} [{name}]: {status} ({:.1}s) {}", start.elapsed().as_secs_f64(), o.detail);
        if !o.pass && !known {
            unexpected.push(id);
        }
    }
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
