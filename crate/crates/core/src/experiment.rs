//! Config-driven verification suites and their report files.

use std::collections::HashMap;
use std::fs;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{run_chain, state_hex, ChainKind, ChainSpec, RecordPolicy, UpMode};
use crate::error::Error;
use crate::graph::{all_trees, small_graph_catalog, Family, Graph, PinnedTree};
use crate::lower_bound::{run_lower_bound_experiment, si_ceiling, truncated_lower_sum, tune_lambda_for_slack};
use crate::oracle::{
    at_variance_constant, conservation_constant_variance, enumerate_capped, enumerate_random_cluster,
    exact_mixing_time, influence_lambda_max, spectral_gap, total_influence, transition_matrix_capped, tv,
    DistTable,
};
use crate::spin::{bit, EventFamily, Pinning, RandomClusterParams, SpinParams, SpinSystem};
use crate::stability::{
    edge_field_r_bound, mixing_bound, reports_to_csv, stability_matrix_checks, sw_gap_lower_bound, BoundReport,
    MixingBound, MixingInputs, StabilityOptions, Verdict,
};
use crate::tree::{
    critical_lambda, saw_si_bound, ti_recursion, tilted_slack_lower_bound, uniqueness, verify_control_function,
    Classification, ControlFunction, VertexTilting,
};

/// Default enumeration cap, overridden by `max_states` or `SPINLAB_MAX_STATES`.
pub const DEFAULT_MAX_STATES: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("unknown suite `{0}` (see `spinlab list`)")]
    UnknownSuite(String),
    #[error(transparent)]
    Model(#[from] Error),
}

type Outcome<T> = std::result::Result<T, ExperimentError>;

fn io_err(path: &Path, e: std::io::Error) -> ExperimentError {
    ExperimentError::Io { path: path.display().to_string(), message: e.to_string() }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeListSpec {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFileSpec {
    /// JSON graph (`.json`) or one `u v` pair per line.
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    Family(Family),
    Edges(EdgeListSpec),
    File(GraphFileSpec),
}

impl GraphSource {
    pub fn load(&self) -> Outcome<Graph> {
        match self {
            GraphSource::Family(f) => Ok(f.build()?),
            GraphSource::Edges(e) => Ok(Graph::new(e.n, &e.edges)?),
            GraphSource::File(f) => {
                let text = fs::read_to_string(&f.path).map_err(|e| io_err(&f.path, e))?;
                if f.path.extension().is_some_and(|x| x == "json") {
                    Ok(Graph::from_json(&text)?)
                } else {
                    Ok(Graph::from_edge_lines(&text, None)?)
                }
            }
        }
    }
}

/// One run: which suite plus optional overrides. Fields a suite does not
/// use are ignored by it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub graph: Option<GraphSource>,
    #[serde(default)]
    pub params: Option<SpinParams<f64>>,
    #[serde(default)]
    pub pinning: Option<Pinning>,
    #[serde(default)]
    pub chain: Option<ChainSpec>,
    /// Target uniqueness slack.
    #[serde(default)]
    pub slack: Option<f64>,
    /// Restricts built-in graph lists to this maximum degree.
    #[serde(default)]
    pub max_degree: Option<usize>,
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub steps: Option<u64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub tolerance: Option<f64>,
    #[serde(default)]
    pub max_states: Option<usize>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn for_suite(id: &str) -> Self {
        ExperimentConfig { experiment: id.to_string(), ..Default::default() }
    }

    /// Parses JSON, reporting line and column on failure.
    pub fn from_json(text: &str) -> Outcome<Self> {
        serde_json::from_str(text).map_err(|e| {
            ExperimentError::ConfigInvalid(format!("line {}, column {}: {e}", e.line(), e.column()))
        })
    }

    pub fn from_file(path: &Path) -> Outcome<Self> {
        let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
        Self::from_json(&text)
    }
}

pub struct SuiteInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub certifies: &'static str,
}

pub const SUITES: &[SuiteInfo] = &[
    SuiteInfo {
        id: "verify-stationarity",
        description: "exact stationarity and detailed balance of all five chain kinds on the small-system matrix",
        certifies: "Def field-dynamics-down-up-chain, Def SW-chain",
    },
    SuiteInfo {
        id: "posterior-identities",
        description: "posterior law of Y_1 given Y_t against the tilted pinned model, all graphs with |E| <= 4",
        certifies: "Prop posterior-FD, Prop posterior-edge-field-dynamics, Lemma SW-posterior",
    },
    SuiteInfo {
        id: "edwards-sokal",
        description: "both directions of the Ising / random-cluster coupling with pinned edge sets, |E| <= 5",
        certifies: "Prop ES-coupling",
    },
    SuiteInfo {
        id: "si-upper",
        description: "influence-matrix eigenvalue against the slack ceiling over sampled graphs and pinnings",
        certifies: "Thm optimal-SI",
    },
    SuiteInfo {
        id: "lower-bound-heawood",
        description: "influence eigenvalue sandwich and distance classes on the Heawood graph",
        certifies: "Thm SI-lowerbound",
    },
    SuiteInfo {
        id: "sw-gap-bound",
        description: "exact Swendsen-Wang gap against the explicit gap bound, plus path-size stability",
        certifies: "Thm SW-main",
    },
    SuiteInfo {
        id: "edge-field-conservation",
        description: "exact conservation constant of edge-field dynamics against its formula",
        certifies: "Lemma AC-var-edge-FD",
    },
    SuiteInfo {
        id: "control-function",
        description: "randomized functional inequality and Xi*psi maximum over 20 parameter points",
        certifies: "Lemma STD-max, Lemma STD-sol",
    },
    SuiteInfo {
        id: "tree-recursions",
        description: "total-influence recursion on all trees up to 9 vertices; SAW bound domination",
        certifies: "Lemma graph-to-tree-comparison",
    },
    SuiteInfo {
        id: "uniqueness",
        description: "criticality examples, tilted slack grid and vertex-tilting inequality chain",
        certifies: "Lemma interaction-to-unique-slack, Lemma coefV",
    },
    SuiteInfo {
        id: "chain-equivalence",
        description: "event-field presets against the dedicated chains on systems with <= 10 configurations",
        certifies: "Example exm:event-FD",
    },
    SuiteInfo {
        id: "at-mixing",
        description: "approximate tensorization on product laws and the mixing-time inequality",
        certifies: "Prop lem:AT-prod-dist, eq AT-implies-mixing",
    },
    SuiteInfo {
        id: "stability",
        description: "covariance and second-order correlation stability checks for one system",
        certifies: "Lemma spectral-stable-matrix-form, Lemma CI-under-otimes",
    },
    SuiteInfo {
        id: "mixing-bounds",
        description: "evaluates the asymptotic mixing-time expressions for one system",
        certifies: "headline mixing theorems (expressions only)",
    },
    SuiteInfo { id: "sample", description: "runs one chain and records its trajectory", certifies: "none" },
];

pub fn suite_info(id: &str) -> Option<&'static SuiteInfo> {
    SUITES.iter().find(|s| s.id == id)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub certifies: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub checks: Vec<BoundReport>,
    pub notes: Vec<String>,
}

impl SuiteReport {
    fn new(id: &str, columns: &[&str]) -> Self {
        SuiteReport {
            suite: id.to_string(),
            certifies: suite_info(id).map_or("", |s| s.certifies).to_string(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn violations(&self) -> usize {
        self.checks.iter().filter(|c| c.verdict == Verdict::Violated).count()
    }

    pub fn passed(&self) -> bool {
        self.violations() == 0
    }

    pub fn check(&self, name: &str) -> Option<&BoundReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn table_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Writes `<suite>.csv`, `<suite>-checks.csv` and `<suite>.json`.
    pub fn write(&self, dir: &Path) -> Outcome<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
        let json = serde_json::to_string_pretty(self).map_err(|e| ExperimentError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        let files = [
            (dir.join(format!("{}.csv", self.suite)), self.table_csv()),
            (dir.join(format!("{}-checks.csv", self.suite)), reports_to_csv(&self.checks)),
            (dir.join(format!("{}.json", self.suite)), json),
        ];
        let mut paths = Vec::new();
        for (path, body) in files {
            fs::write(&path, body).map_err(|e| io_err(&path, e))?;
            paths.push(path);
        }
        Ok(paths)
    }
}

struct Ctx {
    seed: u64,
    tol: Option<f64>,
    max_states: usize,
}

impl Ctx {
    fn tol(&self, default: f64) -> f64 {
        self.tol.unwrap_or(default)
    }

    fn enumerate(&self, system: &SpinSystem) -> Outcome<DistTable> {
        let vars = usize::BITS as usize - 1 - self.max_states.max(1).leading_zeros() as usize;
        Ok(enumerate_capped(system, vars.min(30))?)
    }

    fn matrix(&self, system: &SpinSystem, kind: &ChainKind) -> Outcome<crate::oracle::TransitionMatrix> {
        Ok(transition_matrix_capped(system, kind, self.max_states)?)
    }
}

/// Runs the suite named in `cfg.experiment`.
pub fn run(cfg: &ExperimentConfig) -> Outcome<SuiteReport> {
    let ctx = Ctx {
        seed: cfg.seed.unwrap_or(0),
        tol: cfg.tolerance,
        max_states: cfg.max_states.unwrap_or(DEFAULT_MAX_STATES),
    };
    match cfg.experiment.as_str() {
        "verify-stationarity" => verify_stationarity(cfg, &ctx),
        "posterior-identities" => posterior_identities(cfg, &ctx),
        "edwards-sokal" => edwards_sokal(cfg, &ctx),
        "si-upper" => si_upper(cfg, &ctx),
        "lower-bound-heawood" => lower_bound(cfg, &ctx),
        "sw-gap-bound" => sw_gap(cfg, &ctx),
        "edge-field-conservation" => edge_field_conservation(cfg, &ctx),
        "control-function" => control_function(cfg, &ctx),
        "tree-recursions" => tree_recursions(cfg, &ctx),
        "uniqueness" => uniqueness_suite(cfg, &ctx),
        "chain-equivalence" => chain_equivalence(cfg, &ctx),
        "at-mixing" => at_mixing(cfg, &ctx),
        "stability" => stability(cfg, &ctx),
        "mixing-bounds" => mixing_bounds(cfg),
        "sample" => sample(cfg),
        other => Err(ExperimentError::UnknownSuite(other.to_string())),
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

/// Short label listing the edges, e.g. `n3:0-1|1-2`.
pub fn graph_label(g: &Graph) -> String {
    let edges: Vec<String> = g.edges().iter().map(|(u, v)| format!("{u}-{v}")).collect();
    format!("n{}:{}", g.n(), edges.join("|"))
}

fn pinning_label(p: &Pinning) -> String {
    let mut parts: Vec<String> = p.assignments.iter().map(|&(v, s)| format!("{v}={}", s as u8)).collect();
    parts.extend(p.mono_edges.iter().map(|(u, v)| format!("{u}~{v}")));
    parts.extend(p.oriented_events.iter().map(|(u, v)| format!("{u}>{v}")));
    if parts.is_empty() {
        "-".into()
    } else {
        parts.join(" ")
    }
}

fn params_of(cfg: &ExperimentConfig, default: (f64, f64, f64)) -> Outcome<SpinParams<f64>> {
    match cfg.params {
        Some(p) => {
            p.validate()?;
            Ok(p)
        }
        None => Ok(SpinParams::new(default.0, default.1, default.2)?),
    }
}

fn graph_of(cfg: &ExperimentConfig, default: Family) -> Outcome<Graph> {
    match &cfg.graph {
        Some(src) => src.load(),
        None => Ok(default.build()?),
    }
}

fn max_check(name: &str, values: impl IntoIterator<Item = f64>, tol: f64) -> BoundReport {
    let worst = values.into_iter().fold(0.0, f64::max);
    BoundReport::upper(name, tol, worst, 0.0)
}

// ---------------------------------------------------------------------------
// verify-stationarity

/// Graphs with at most four edges, the 4-cycle and K4.
fn stationarity_graphs() -> Vec<Graph> {
    let mut out: Vec<Graph> = small_graph_catalog(4).into_iter().filter(|g| g.n() <= 6).collect();
    out.push(Family::Complete { n: 4 }.build().expect("K4"));
    out
}

fn mixed_event_family(g: &Graph) -> EventFamily {
    use crate::spin::Event;
    let mut events: Vec<Event> = (0..g.n()).map(|v| Event::Literals(vec![(v, true)])).collect();
    events.extend(g.edges().iter().map(|&(u, v)| Event::Monochromatic(u, v)));
    let tilts = (0..events.len()).map(|i| 0.25 + 0.5 * ((i * 7 % 5) as f64) / 4.0).collect();
    EventFamily::custom(events, tilts).expect("tilts in range")
}

fn verify_stationarity(cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let tol = ctx.tol(1e-10);
    let params = [(0.0, 1.0, 1.5), (0.5, 1.2, 0.8), (2.0, 2.0, 0.6)];
    let mut systems = Vec::new();
    for g in stationarity_graphs() {
        for &(b, c, l) in &params {
            let p = SpinParams::new(b, c, l)?;
            systems.push(SpinSystem::free(g.clone(), p)?);
            if g.n() >= 3 {
                let pin = Pinning::from_assignments([(g.n() - 1, false)]);
                systems.push(SpinSystem::new(g.clone(), p, pin)?);
            }
        }
    }
    if let (Some(src), Some(p)) = (&cfg.graph, cfg.params) {
        systems = vec![SpinSystem::new(src.load()?, p, cfg.pinning.clone().unwrap_or_default())?];
    }
    let rows: Vec<Outcome<Vec<(String, f64, f64, f64)>>> = systems
        .par_iter()
        .map(|s| {
            let mut kinds = vec![
                ChainKind::Glauber,
                ChainKind::VertexField { theta: 0.4 },
                ChainKind::EdgeField { theta: 0.3 },
                ChainKind::EventField { family: mixed_event_family(&s.graph) },
            ];
            if ChainKind::SwendsenWang.validate(s).is_ok() {
                kinds.push(ChainKind::SwendsenWang);
            }
            let dist = ctx.enumerate(s)?;
            kinds
                .iter()
                .map(|k| {
                    let tm = ctx.matrix(s, k)?;
                    let pi = tm.restrict(&dist);
                    Ok((
                        k.name().to_string(),
                        tm.stationarity_residual(&pi),
                        tm.detailed_balance_residual(&pi),
                        tm.max_row_sum_error(),
                    ))
                })
                .collect()
        })
        .collect();
    let mut report = SuiteReport::new(
        "verify-stationarity",
        &["graph", "params", "pinning", "chain", "support", "stationarity", "detailed_balance", "row_sum"],
    );
    let (mut worst_st, mut worst_db) = (Vec::new(), Vec::new());
    for (s, r) in systems.iter().zip(rows) {
        let support = ctx.enumerate(s)?.support().len();
        for (name, st, db, rs) in r? {
            worst_st.push(st);
            worst_db.push(db);
            report.rows.push(vec![
                graph_label(&s.graph),
                format!("{}/{}/{}", s.params.beta, s.params.gamma, s.params.lambda),
                pinning_label(&s.pinning),
                name,
                support.to_string(),
                num(st),
                num(db),
                num(rs),
            ]);
        }
    }
    report.checks.push(max_check("stationarity", worst_st, tol));
    report.checks.push(max_check("detailed-balance", worst_db, tol));
    report.notes.push(format!("{} systems", systems.len()));
    Ok(report)
}

// ---------------------------------------------------------------------------
// posterior-identities

/// The three processes whose posterior has a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Process {
    Vertex,
    Edge,
    SwendsenWang,
}

impl Process {
    pub fn name(self) -> &'static str {
        match self {
            Process::Vertex => "vertex-field",
            Process::Edge => "edge-field",
            Process::SwendsenWang => "swendsen-wang",
        }
    }

    fn family(self, g: &Graph) -> EventFamily {
        match self {
            Process::Vertex => EventFamily::vertex_occupied(g, 1.0),
            Process::Edge => EventFamily::oriented_edge_10(g, 1.0),
            Process::SwendsenWang => EventFamily::edge_monochromatic(g, 1.0),
        }
    }

    /// Tilted parameters of the posterior at keep probability `t`.
    fn posterior_params(self, p: &SpinParams<f64>, t: f64) -> crate::Result<SpinParams<f64>> {
        match self {
            Process::Vertex => p.vertex_tilt(1.0 - t),
            Process::Edge => p.edge_tilt(1.0 / (1.0 - t)),
            Process::SwendsenWang => p.edge_tilt(1.0 - t),
        }
    }
}

/// Largest TV between `Law(Y_1 | Y_t = T)` from the joint law and the tilted
/// model pinned on `T`, over all reachable `T`.
pub fn posterior_identity_gap(system: &SpinSystem, process: Process, t: f64) -> crate::Result<f64> {
    let g = &system.graph;
    let dist = crate::oracle::enumerate(system)?;
    let family = process.family(g);
    let mut joint: HashMap<u64, Vec<f64>> = HashMap::new();
    for s in dist.support() {
        let a = family.occurring_mask(s);
        let k = a.count_ones() as i32;
        let mut sub = a;
        loop {
            let kept = sub.count_ones() as i32;
            let w = dist.prob(s) * t.powi(kept) * (1.0 - t).powi(k - kept);
            joint.entry(sub).or_insert_with(|| vec![0.0; dist.probs.len()])[s as usize] += w;
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & a;
        }
    }
    let tilted = process.posterior_params(&system.params, t)?;
    let mut worst: f64 = 0.0;
    for (mask, mut law) in joint {
        let z: f64 = law.iter().sum();
        law.iter_mut().for_each(|x| *x /= z);
        let mut pin = system.pinning.clone();
        for (i, e) in family.events.iter().enumerate() {
            if bit(mask, i) {
                e.add_to(&mut pin);
            }
        }
        let closed = crate::oracle::enumerate(&SpinSystem::new(g.clone(), tilted, pin)?)?;
        worst = worst.max(tv(&law, &closed.probs));
    }
    Ok(worst)
}

pub const POSTERIOR_TIMES: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

fn posterior_identities(_cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let tol = ctx.tol(1e-10);
    let graphs = small_graph_catalog(4);
    let cases = [
        (Process::Vertex, SpinParams::new(0.5, 1.2, 0.8)?),
        (Process::Edge, SpinParams::new(0.4, 0.7, 1.3)?),
        (Process::SwendsenWang, SpinParams::new(2.0, 2.0, 0.6)?),
    ];
    let jobs: Vec<(usize, usize, f64)> = (0..graphs.len())
        .flat_map(|gi| (0..cases.len()).flat_map(move |ci| POSTERIOR_TIMES.map(|t| (gi, ci, t))))
        .collect();
    let gaps: Vec<Outcome<f64>> = jobs
        .par_iter()
        .map(|&(gi, ci, t)| {
            let (proc_, p) = cases[ci];
            let s = SpinSystem::free(graphs[gi].clone(), p)?;
            Ok(posterior_identity_gap(&s, proc_, t)?)
        })
        .collect();
    let mut report = SuiteReport::new("posterior-identities", &["graph", "process", "t", "max_tv"]);
    let mut per_process: Vec<Vec<f64>> = vec![Vec::new(); cases.len()];
    for (&(gi, ci, t), gap) in jobs.iter().zip(gaps) {
        let gap = gap?;
        per_process[ci].push(gap);
        report.rows.push(vec![graph_label(&graphs[gi]), cases[ci].0.name().into(), num(t), num(gap)]);
    }
    for (ci, vals) in per_process.into_iter().enumerate() {
        report.checks.push(max_check(&format!("posterior-{}", cases[ci].0.name()), vals, tol));
    }
    report.notes.push(format!("{} graphs", graphs.len()));
    Ok(report)
}

// ---------------------------------------------------------------------------
// edwards-sokal

/// TVs of both coupling directions for Ising `(β, β, λ)` conditioned on the
/// edges in `t_mask` being monochromatic: `(Ising -> RC, RC -> Ising)`.
pub fn edwards_sokal_gaps(g: &Graph, beta: f64, lambda: f64, t_mask: u64) -> crate::Result<(f64, f64)> {
    let m = g.num_edges();
    let rc = RandomClusterParams::from_ising(beta, lambda)?;
    let t_edges: Vec<(usize, usize)> = (0..m).filter(|&e| bit(t_mask, e)).map(|e| g.edge(e)).collect();
    let pin = Pinning { mono_edges: t_edges, ..Default::default() };
    let ising = crate::oracle::enumerate(&SpinSystem::new(g.clone(), SpinParams::new(beta, beta, lambda)?, pin)?)?;
    let rc_law = enumerate_random_cluster(&rc, g, t_mask)?;

    let mut pushed = vec![0.0; 1 << m];
    for s in ising.support() {
        let mono = (0..m).filter(|&e| bit(s, g.edge(e).0) == bit(s, g.edge(e).1)).fold(0u64, |a, e| a | 1 << e);
        let open = mono & !t_mask;
        let k = open.count_ones() as i32;
        let mut sub = open;
        loop {
            let kept = sub.count_ones() as i32;
            pushed[(t_mask | sub) as usize] += ising.prob(s) * rc.p.powi(kept) * (1.0 - rc.p).powi(k - kept);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & open;
        }
    }

    let mut lifted = vec![0.0; 1 << g.n()];
    for (sm, &w) in rc_law.probs.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        let edges: Vec<usize> = (0..m).filter(|&e| bit(sm as u64, e)).collect();
        let comps = g.components(&edges)?;
        for colour in 0u64..1 << comps.len() {
            let mut prob = w;
            let mut s = 0u64;
            for (i, c) in comps.iter().enumerate() {
                let a = lambda.powi(c.len() as i32);
                if bit(colour, i) {
                    prob *= a / (1.0 + a);
                    s |= c.iter().fold(0u64, |acc, &v| acc | 1 << v);
                } else {
                    prob *= 1.0 / (1.0 + a);
                }
            }
            lifted[s as usize] += prob;
        }
    }
    Ok((tv(&pushed, &rc_law.probs), tv(&lifted, &ising.probs)))
}

fn edwards_sokal(_cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let tol = ctx.tol(1e-10);
    let graphs = small_graph_catalog(5);
    let params = [(1.5, 0.4), (3.0, 1.0), (1.2, 0.7)];
    let jobs: Vec<(usize, usize)> =
        (0..graphs.len()).flat_map(|gi| (0..params.len()).map(move |pi| (gi, pi))).collect();
    let results: Vec<Outcome<(f64, f64, usize)>> = jobs
        .par_iter()
        .map(|&(gi, pi)| {
            let g = &graphs[gi];
            let (b, l) = params[pi];
            let (mut a, mut c) = (0.0f64, 0.0f64);
            for t in 0u64..1 << g.num_edges() {
                let (x, y) = edwards_sokal_gaps(g, b, l, t)?;
                a = a.max(x);
                c = c.max(y);
            }
            Ok((a, c, 1 << g.num_edges()))
        })
        .collect();
    let mut report = SuiteReport::new(
        "edwards-sokal",
        &["graph", "beta", "lambda", "pinned_sets", "ising_to_rc_tv", "rc_to_ising_tv"],
    );
    let (mut down, mut up) = (Vec::new(), Vec::new());
    for (&(gi, pi), r) in jobs.iter().zip(results) {
        let (a, c, count) = r?;
        down.push(a);
        up.push(c);
        let (b, l) = params[pi];
        report.rows.push(vec![graph_label(&graphs[gi]), num(b), num(l), count.to_string(), num(a), num(c)]);
    }
    report.checks.push(max_check("ising-to-random-cluster", down, tol));
    report.checks.push(max_check("random-cluster-to-ising", up, tol));
    Ok(report)
}

// ---------------------------------------------------------------------------
// si-upper

/// Built-in graphs with maximum degree at least 3 and at most 8 vertices.
pub fn si_graphs() -> Vec<(String, Graph)> {
    let fams = [
        ("star4", Family::Star { n: 4 }),
        ("star5", Family::Star { n: 5 }),
        ("k4", Family::Complete { n: 4 }),
        ("k5", Family::Complete { n: 5 }),
        ("k23", Family::CompleteBipartite { a: 2, b: 3 }),
        ("k33", Family::CompleteBipartite { a: 3, b: 3 }),
        ("prism3", Family::Prism { k: 3 }),
        ("tree2x2", Family::BalancedTree { branching: 2, depth: 2 }),
        ("rr8", Family::RandomRegular { n: 8, degree: 3, seed: 1 }),
    ];
    let mut out: Vec<(String, Graph)> = fams.iter().map(|(l, f)| (l.to_string(), f.build().expect("family"))).collect();
    let known: Vec<String> = out.iter().map(|(_, g)| graph_label(g)).collect();
    out.extend(
        small_graph_catalog(4)
            .into_iter()
            .filter(|g| g.max_degree() >= 3 && !known.contains(&graph_label(g)))
            .map(|g| (graph_label(&g), g)),
    );
    out
}

pub const SI_SLACKS: [f64; 3] = [0.2, 0.5, 0.8];
pub const SI_INTERACTIONS: [(f64, f64); 4] = [(0.0, 1.0), (0.1, 1.0), (0.2, 0.3), (0.05, 1.5)];

fn random_pinnings(n: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Pinning> {
    let mut out = vec![Pinning::none()];
    let mut tries = 0;
    while out.len() < count + 1 && tries < 50 {
        tries += 1;
        let k = rng.random_range(1..=2.min(n - 1).max(1));
        let mut a: Vec<(usize, bool)> = Vec::new();
        while a.len() < k {
            let v = rng.random_range(0..n);
            if !a.iter().any(|&(w, _)| w == v) {
                a.push((v, rng.random::<bool>()));
            }
        }
        a.sort();
        let p = Pinning::from_assignments(a);
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Clone)]
struct SiInstance {
    label: String,
    system: SpinSystem,
    slack: f64,
    max_degree: usize,
}

fn si_upper(cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let tol = ctx.tol(1e-9);
    let graphs: Vec<(String, Graph)> = match &cfg.graph {
        Some(src) => {
            let g = src.load()?;
            vec![(graph_label(&g), g)]
        }
        None => si_graphs().into_iter().filter(|(_, g)| cfg.max_degree.is_none_or(|d| g.max_degree() == d)).collect(),
    };
    let slacks: Vec<f64> = cfg.slack.map_or(SI_SLACKS.to_vec(), |s| vec![s]);
    let pairs: Vec<(f64, f64)> = cfg.params.map_or(SI_INTERACTIONS.to_vec(), |p| vec![(p.beta, p.gamma)]);
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let mut instances = Vec::new();
    let mut skipped = 0usize;
    for (label, g) in &graphs {
        let dd = g.max_degree();
        if dd < 3 {
            skipped += 1;
            continue;
        }
        let pins = match &cfg.pinning {
            Some(p) => vec![p.clone()],
            None => random_pinnings(g.n(), 3, &mut rng),
        };
        for &(b, c) in &pairs {
            if c > 1.0 && !g.is_regular() {
                continue;
            }
            for &delta in &slacks {
                let Ok(lambda) = tune_lambda_for_slack(b, c, dd - 1, delta) else {
                    skipped += 1;
                    continue;
                };
                let p = SpinParams::new(b, c, lambda)?;
                for pin in &pins {
                    let Ok(system) = SpinSystem::new(g.clone(), p, pin.clone()) else { continue };
                    instances.push(SiInstance { label: label.clone(), system, slack: delta, max_degree: dd });
                }
            }
        }
    }
    let measured: Vec<Outcome<Option<(f64, f64)>>> = instances
        .par_iter()
        .map(|inst| match ctx.enumerate(&inst.system) {
            Ok(d) => {
                let exact = uniqueness(&inst.system.params, inst.max_degree - 1)?.slack;
                Ok(Some((influence_lambda_max(&d), exact)))
            }
            Err(ExperimentError::Model(Error::EmptySupport)) => Ok(None),
            Err(e) => Err(e),
        })
        .collect();
    let mut report = SuiteReport::new(
        "si-upper",
        &["graph", "beta", "gamma", "lambda", "slack", "pinning", "lambda_max", "ceiling", "ratio"],
    );
    let mut best = 0.0f64;
    let mut count = 0usize;
    for (inst, m) in instances.iter().zip(measured) {
        let Some((lm, exact)) = m? else { continue };
        count += 1;
        let ceiling = si_ceiling(exact, inst.max_degree);
        best = best.max(lm / ceiling);
        let p = inst.system.params;
        report.rows.push(vec![
            inst.label.clone(),
            num(p.beta),
            num(p.gamma),
            num(p.lambda),
            num(exact),
            pinning_label(&inst.system.pinning),
            num(lm),
            num(ceiling),
            num(lm / ceiling),
        ]);
        let name = format!("si[{}|{}/{}/{}|{}]", inst.label, p.beta, p.gamma, inst.slack, pinning_label(&inst.system.pinning));
        report.checks.push(BoundReport::upper(&name, ceiling, lm, tol).with_constant("slack", exact));
    }
    report.notes.push(format!("instances={count} skipped={skipped} best_ratio={best}"));
    Ok(report)
}

// ---------------------------------------------------------------------------
// lower-bound-heawood

fn lower_bound(cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let g = graph_of(cfg, Family::Heawood)?;
    let (b, c) = cfg.params.map_or((0.0, 1.0), |p| (p.beta, p.gamma));
    let delta = cfg.slack.unwrap_or(0.5);
    if 1usize << g.n() > ctx.max_states {
        return Err(Error::TooLarge { what: "states", size: 1 << g.n(), cap: ctx.max_states }.into());
    }
    let run = run_lower_bound_experiment(&g, delta, b, c)?;
    let tol = ctx.tol(1e-9);
    let mut report = SuiteReport::new(
        "lower-bound-heawood",
        &["distance", "pairs", "mean_abs", "min_abs", "max_abs", "tree_limit"],
    );
    for cl in &run.classes {
        report.rows.push(vec![
            cl.distance.to_string(),
            cl.pairs.to_string(),
            num(cl.mean_abs),
            num(cl.min_abs),
            num(cl.max_abs),
            num(cl.tree_limit),
        ]);
    }
    let lower = truncated_lower_sum(run.slack, run.max_degree, run.r);
    report.checks.push(BoundReport::lower("truncated-sum", lower, run.lambda_max, tol).with_constant("r", run.r as f64));
    report.checks.push(BoundReport::upper("ceiling", run.ceiling, run.lambda_max, tol));
    report.checks.push(BoundReport::upper("test-vector", run.lambda_max, run.test_vector_quotient, tol));
    if let Some(first) = run.classes.first() {
        let dev = ((first.max_abs / first.tree_limit) - 1.0).abs().max(((first.min_abs / first.tree_limit) - 1.0).abs());
        report.checks.push(BoundReport::upper("distance-1-deviation", 0.10, dev, 0.0));
    }
    report.notes.push(format!(
        "n={} degree={} girth={:?} lambda={} slack={} lambda_max={}",
        run.n, run.max_degree, run.girth, run.params.lambda, run.slack, run.lambda_max
    ));
    Ok(report)
}

// ---------------------------------------------------------------------------
// sw-gap-bound

pub const SW_BETAS: [f64; 4] = [1.0, 1.5, 2.0, 4.0];
pub const SW_LAMBDAS: [f64; 3] = [0.0, 0.25, 0.5];

pub fn sw_graphs() -> Vec<(&'static str, Graph)> {
    [
        ("k2", Family::Path { n: 2 }),
        ("path3", Family::Path { n: 3 }),
        ("c4", Family::Cycle { n: 4 }),
        ("star4", Family::Star { n: 4 }),
    ]
    .into_iter()
    .map(|(l, f)| (l, f.build().expect("family")))
    .collect()
}

/// Exact spectral gap of Swendsen-Wang on the free Ising system.
pub fn sw_exact_gap(g: &Graph, beta: f64, lambda: f64) -> crate::Result<f64> {
    let s = SpinSystem::free(g.clone(), SpinParams::new(beta, beta, lambda)?)?;
    let dist = crate::oracle::enumerate(&s)?;
    let tm = crate::oracle::transition_matrix(&s, &ChainKind::SwendsenWang)?;
    Ok(spectral_gap(&tm, &tm.restrict(&dist))?.gap)
}

fn sw_gap(cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let tol = ctx.tol(1e-9);
    let graphs: Vec<(String, Graph)> = match &cfg.graph {
        Some(src) => {
            let g = src.load()?;
            vec![(graph_label(&g), g)]
        }
        None => sw_graphs().into_iter().map(|(l, g)| (l.to_string(), g)).collect(),
    };
    let pairs: Vec<(f64, f64)> = match cfg.params {
        Some(p) => vec![(p.beta, p.lambda)],
        None => SW_BETAS.iter().flat_map(|&b| SW_LAMBDAS.map(|l| (b, l))).collect(),
    };
    let jobs: Vec<(usize, f64, f64)> =
        (0..graphs.len()).flat_map(|gi| pairs.iter().map(move |&(b, l)| (gi, b, l))).collect();
    let res: Vec<Outcome<(f64, f64)>> = jobs
        .par_iter()
        .map(|&(gi, b, l)| {
            let g = &graphs[gi].1;
            let bound = sw_gap_lower_bound(b, l, g.max_degree(), 1.0 - l)?;
            Ok((sw_exact_gap(g, b, l)?, bound))
        })
        .collect();
    let mut report = SuiteReport::new("sw-gap-bound", &["graph", "beta", "lambda", "exact_gap", "bound"]);
    for (&(gi, b, l), r) in jobs.iter().zip(res) {
        let (gap, bound) = r?;
        let label = &graphs[gi].0;
        report.rows.push(vec![label.clone(), num(b), num(l), num(gap), num(bound)]);
        report.checks.push(BoundReport::lower(&format!("sw-gap[{label}|{b}|{l}]"), bound, gap, tol));
    }
    if cfg.graph.is_none() && cfg.params.is_none() {
        let gaps: Vec<Outcome<f64>> = [4usize, 6, 8]
            .par_iter()
            .map(|&n| Ok(sw_exact_gap(&Family::Path { n }.build()?, 2.0, 0.5)?))
            .collect();
        let gaps: Vec<f64> = gaps.into_iter().collect::<Outcome<_>>()?;
        let hi = gaps.iter().copied().fold(0.0, f64::max);
        let lo = gaps.iter().copied().fold(f64::INFINITY, f64::min);
        for (n, g) in [4, 6, 8].iter().zip(&gaps) {
            report.rows.push(vec![format!("path{n}"), "2".into(), "0.5".into(), num(*g), String::new()]);
        }
        report.checks.push(BoundReport::upper("path-gap-variation", 0.25, (hi - lo) / hi, 0.0));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// edge-field-conservation

/// Exact conservation constant of the edge-field process at time
/// `1 - √(βγ)`, i.e. the down-up chain removing each event with
/// probability `√(βγ)`.
pub fn edge_field_exact_r(system: &SpinSystem) -> crate::Result<f64> {
    let s = system.params.interaction().sqrt();
    let dist = crate::oracle::enumerate(system)?;
    let tm = crate::oracle::transition_matrix(system, &ChainKind::EdgeField { theta: s })?;
    conservation_constant_variance(&tm, &tm.restrict(&dist))
}

fn edge_field_conservation(cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let tol = ctx.tol(1e-9);
    let p = params_of(cfg, (1.0 / 3.0, 1.0 / 3.0, 1.0))?;
    let graphs: Vec<(String, Graph)> = match &cfg.graph {
        Some(src) => {
            let g = src.load()?;
            vec![(graph_label(&g), g)]
        }
        None => vec![
            ("k4".into(), Family::Complete { n: 4 }.build()?),
            ("prism3".into(), Family::Prism { k: 3 }.build()?),
        ],
    };
    let mut report = SuiteReport::new("edge-field-conservation", &["graph", "n", "degree", "exact_r", "formula"]);
    for (label, g) in graphs {
        let system = SpinSystem::free(g.clone(), p)?;
        ctx.enumerate(&system)?;
        let exact = edge_field_exact_r(&system)?;
        let formula = edge_field_r_bound(&p, g.max_degree(), g.n())?;
        report.rows.push(vec![label.clone(), g.n().to_string(), g.max_degree().to_string(), num(exact), num(formula)]);
        report.checks.push(BoundReport::upper(&format!("edge-field-r[{label}]"), formula, exact, tol));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// control-function

/// Twenty `(β, γ, λ, Δ)` points with positive slack, including flipped ones.
pub fn control_points() -> Vec<(SpinParams<f64>, usize)> {
    let raw = [
        (0.0, 1.0, 0.5, 3),
        (0.0, 1.0, 1.0, 3),
        (0.0, 1.0, 2.0, 3),
        (0.0, 1.0, 3.0, 3),
        (0.0, 1.0, 3.9, 3),
        (0.0, 1.0, 0.3, 4),
        (0.0, 1.0, 1.0, 4),
        (0.0, 1.0, 1.5, 4),
        (0.0, 1.0, 0.2, 5),
        (0.0, 1.0, 0.8, 5),
        (0.0, 1.0, 0.2, 6),
        (0.2, 0.8, 0.5, 3),
        (0.2, 0.8, 2.0, 3),
        (0.1, 1.0, 1.0, 3),
        (0.1, 1.0, 5.0, 3),
        (0.5, 1.5, 0.5, 3),
        (0.3, 0.5, 4.0, 3),
        (0.2, 0.6, 10.0, 3),
        (0.05, 2.0, 0.3, 3),
        (0.3, 0.6, 0.2, 4),
    ];
    raw.iter().map(|&(b, c, l, d)| (SpinParams { beta: b, gamma: c, lambda: l }, d)).collect()
}

fn control_function(cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let trials = cfg.trials.unwrap_or(100_000);
    let points: Vec<(SpinParams<f64>, usize)> = match cfg.params {
        Some(p) => vec![(p, cfg.max_degree.unwrap_or(3))],
        None => control_points(),
    };
    let res: Vec<Outcome<crate::tree::ControlReport>> = points
        .par_iter()
        .enumerate()
        .map(|(i, (p, d))| {
            let cf = ControlFunction::new(p, *d)?;
            Ok(verify_control_function(&cf, trials, ctx.seed.wrapping_add(i as u64))?)
        })
        .collect();
    let mut report = SuiteReport::new(
        "control-function",
        &["beta", "gamma", "lambda", "degree", "flipped", "slack", "worst_functional", "max_xi_psi", "bound"],
    );
    for ((p, d), r) in points.iter().zip(res) {
        let r = r?;
        let tag = format!("{}/{}/{}/{d}", p.beta, p.gamma, p.lambda);
        report.rows.push(vec![
            num(p.beta),
            num(p.gamma),
            num(p.lambda),
            d.to_string(),
            r.flipped.to_string(),
            num(r.delta),
            num(r.worst_functional),
            num(r.max_xi_psi),
            num(r.xi_psi_bound),
        ]);
        report.checks.push(BoundReport::upper(&format!("functional[{tag}]"), 0.0, r.worst_functional, ctx.tol(1e-9)));
        report.checks.push(BoundReport::upper(&format!("xi-psi-max[{tag}]"), r.xi_psi_bound, r.max_xi_psi, 1e-9));
        report.checks.push(BoundReport::upper(
            &format!("xi-psi-attained[{tag}]"),
            1e-6,
            (r.max_xi_psi - r.xi_psi_bound).abs(),
            0.0,
        ));
    }
    report.notes.push(format!("{trials} trials per point"));
    Ok(report)
}

// ---------------------------------------------------------------------------
// tree-recursions

pub const TREE_PARAMS: [(f64, f64, f64); 3] = [(0.0, 1.0, 1.3), (0.4, 1.5, 0.7), (2.0, 0.5, 1.1)];

/// Largest `|TI_recursion - TI_exact|` over roots and single-leaf pinnings.
pub fn tree_recursion_gap(tree: &Graph, p: &SpinParams<f64>) -> crate::Result<f64> {
    let n = tree.n();
    let mut pins: Vec<Vec<Option<bool>>> = vec![vec![None; n]];
    if let Some(leaf) = (0..n).rev().find(|&v| tree.degree(v) == 1) {
        for s in [false, true] {
            let mut pin = vec![None; n];
            pin[leaf] = Some(s);
            pins.push(pin);
        }
    }
    let mut worst: f64 = 0.0;
    for pin in &pins {
        let assignments: Vec<(usize, bool)> = pin.iter().enumerate().filter_map(|(v, s)| s.map(|s| (v, s))).collect();
        let system = SpinSystem::new(tree.clone(), *p, Pinning::from_assignments(assignments))?;
        let dist = match crate::oracle::enumerate(&system) {
            Ok(d) => d,
            Err(Error::EmptySupport) => continue,
            Err(e) => return Err(e),
        };
        for r in (0..n).filter(|&r| pin[r].is_none()) {
            let pt = PinnedTree::from_tree(tree, r, pin)?;
            let (ti, _) = ti_recursion(&pt, p)?;
            worst = worst.max((ti - total_influence(&dist, r)).abs());
        }
    }
    Ok(worst)
}

/// Test graphs for the SAW comparison.
pub fn saw_graphs() -> Vec<Graph> {
    let mut out = small_graph_catalog(4);
    for f in [Family::Complete { n: 4 }, Family::Cycle { n: 5 }, Family::Prism { k: 3 }, Family::CompleteBipartite { a: 3, b: 3 }] {
        out.push(f.build().expect("family"));
    }
    out
}

/// `saw_si_bound - max(λmax(Ψ), max_r TI_r - 1)` (nonnegative when the SAW
/// bound dominates).
pub fn saw_domination_margin(g: &Graph, p: &SpinParams<f64>, pin: &[Option<bool>]) -> crate::Result<Option<f64>> {
    let assignments: Vec<(usize, bool)> = pin.iter().enumerate().filter_map(|(v, s)| s.map(|s| (v, s))).collect();
    let system = SpinSystem::new(g.clone(), *p, Pinning::from_assignments(assignments))?;
    let dist = match crate::oracle::enumerate(&system) {
        Ok(d) => d,
        Err(Error::EmptySupport) => return Ok(None),
        Err(e) => return Err(e),
    };
    let bound = saw_si_bound(g, p, pin)?;
    let mut exact = influence_lambda_max(&dist);
    for r in (0..g.n()).filter(|&r| pin[r].is_none()) {
        exact = exact.max(total_influence(&dist, r) - 1.0);
    }
    Ok(Some(bound - exact))
}

fn tree_recursions(_cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let tol = ctx.tol(1e-10);
    let trees = all_trees(9);
    let params: Vec<SpinParams<f64>> =
        TREE_PARAMS.iter().map(|&(b, c, l)| SpinParams::new(b, c, l)).collect::<crate::Result<_>>()?;
    let gaps: Vec<Outcome<f64>> = trees
        .par_iter()
        .map(|t| {
            let mut w: f64 = 0.0;
            for p in &params {
                w = w.max(tree_recursion_gap(t, p)?);
            }
            Ok(w)
        })
        .collect();
    let mut report = SuiteReport::new("tree-recursions", &["kind", "graph", "value"]);
    let mut worst = Vec::new();
    for (t, g) in trees.iter().zip(gaps) {
        let g = g?;
        worst.push(g);
        report.rows.push(vec!["ti-gap".into(), graph_label(t), num(g)]);
    }
    report.checks.push(max_check("ti-recursion-vs-exact", worst, tol));

    let anti: Vec<SpinParams<f64>> = [(0.0, 1.0, 1.3), (0.4, 1.5, 0.7), (0.3, 0.9, 2.0)]
        .iter()
        .map(|&(b, c, l)| SpinParams::new(b, c, l))
        .collect::<crate::Result<_>>()?;
    let graphs = saw_graphs();
    let margins: Vec<Outcome<f64>> = graphs
        .par_iter()
        .map(|g| {
            let mut m = f64::INFINITY;
            let mut pins = vec![vec![None; g.n()]];
            if g.n() >= 3 {
                let mut pin = vec![None; g.n()];
                pin[g.n() - 1] = Some(true);
                pins.push(pin);
            }
            for p in &anti {
                for pin in &pins {
                    if let Some(x) = saw_domination_margin(g, p, pin)? {
                        m = m.min(x);
                    }
                }
            }
            Ok(m)
        })
        .collect();
    let mut worst = f64::INFINITY;
    for (g, m) in graphs.iter().zip(margins) {
        let m = m?;
        worst = worst.min(m);
        report.rows.push(vec!["saw-margin".into(), graph_label(g), num(m)]);
    }
    report.checks.push(BoundReport::lower("saw-bound-domination", 0.0, worst, tol));
    report.notes.push(format!("{} trees, {} SAW graphs", trees.len(), graphs.len()));
    Ok(report)
}

// ---------------------------------------------------------------------------
// uniqueness

/// Critical `(β, γ, λ_c, d)` points with `β > 0` for the tilted slack grid.
pub fn tilted_grid_points() -> Vec<(SpinParams<f64>, usize)> {
    let mut out = Vec::new();
    for d in [2usize, 3, 4] {
        for b in [0.05, 0.1, 0.2, 1.0 / 3.0] {
            for c in [0.3, 0.6, 1.0] {
                if out.len() >= 20 {
                    return out;
                }
                if let Ok((l, _)) = critical_lambda(b, c, d) {
                    out.push((SpinParams { beta: b, gamma: c, lambda: l }, d));
                }
            }
        }
    }
    out
}

/// Margins `measured slack - lower bound` over 20 θ values in `[1, 1/s]`.
pub fn tilted_slack_margins(p: &SpinParams<f64>, d: usize) -> crate::Result<Vec<(f64, f64, f64)>> {
    let s = p.interaction().sqrt();
    (0..20)
        .map(|j| {
            let theta = 1.0 + (1.0 / s - 1.0) * j as f64 / 19.0;
            let bound = tilted_slack_lower_bound(p, d, theta)?;
            let measured = uniqueness(&p.edge_tilt(theta)?, d)?.slack;
            Ok((theta, bound, measured))
        })
        .collect()
}

/// Fifty `(β, γ, Δ, bar_beta)` points for the vertex-tilting chain.
pub fn coef_v_points() -> Vec<(f64, f64, usize, f64)> {
    let mut out = Vec::new();
    for dd in [3usize, 4, 5, 6, 8] {
        let top = (dd as f64 - 2.1) / dd as f64;
        for bar in [0.5 * top, top] {
            for r in [0.25, 0.5, 1.0, 2.0, 4.0] {
                out.push((0.9 * bar * r, 0.9 * bar / r, dd, bar));
            }
        }
    }
    out
}

fn uniqueness_suite(_cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let tol = ctx.tol(1e-9);
    let mut report = SuiteReport::new("uniqueness", &["kind", "point", "theta", "bound", "measured"]);
    let hc = uniqueness::<f64>(&SpinParams::new(0.0, 1.0, 4.0)?, 2)?;
    report.checks.push(BoundReport::upper("hardcore-critical-x-hat", 0.0, (hc.x_hat - 1.0).abs(), tol));
    report.checks.push(BoundReport::upper(
        "hardcore-critical-class",
        0.0,
        (hc.classification != Classification::Critical) as u8 as f64,
        0.0,
    ));
    let third = uniqueness(&SpinParams::new(1.0 / 3.0, 1.0 / 3.0, 1.0)?, 2)?;
    report.checks.push(BoundReport::upper(
        "third-critical-class",
        0.0,
        (third.classification != Classification::Critical) as u8 as f64,
        0.0,
    ));
    let mut margins = Vec::new();
    for (p, d) in tilted_grid_points() {
        for (theta, bound, measured) in tilted_slack_margins(&p, d)? {
            margins.push(measured - bound);
            report.rows.push(vec![
                "tilted".into(),
                format!("{}/{}/{}/{d}", p.beta, p.gamma, p.lambda),
                num(theta),
                num(bound),
                num(measured),
            ]);
        }
    }
    let worst = margins.iter().copied().fold(f64::INFINITY, f64::min);
    report.checks.push(BoundReport::lower("tilted-slack-grid", 0.0, worst, tol).with_constant("points", margins.len() as f64));
    let mut failures = 0usize;
    let pts = coef_v_points();
    for &(b, c, dd, bar) in &pts {
        let vt = VertexTilting::new(b, c, dd, bar)?;
        let ok = vt.chain_holds(1e-9);
        failures += !ok as usize;
        report.rows.push(vec![
            "coef-v".into(),
            format!("{b}/{c}/{dd}/{bar}"),
            num(vt.kappa),
            num(vt.lower),
            num(vt.ratio_form),
        ]);
    }
    report.checks.push(BoundReport::upper("coef-v-chain", 0.0, failures as f64, 0.0).with_constant("points", pts.len() as f64));
    Ok(report)
}

// ---------------------------------------------------------------------------
// chain-equivalence

/// Systems with between 2 and `max_support` feasible configurations.
pub fn small_support_systems(max_support: usize) -> Vec<SpinSystem> {
    let params = [(0.0, 1.0, 1.2), (0.5, 1.2, 0.8), (2.0, 2.0, 0.6), (1.5, 1.5, 1.0)];
    let mut out = Vec::new();
    for g in small_graph_catalog(4) {
        let n = g.n();
        let mut pins = vec![Pinning::none(), Pinning::from_assignments([(0, true)]), Pinning::from_assignments([(0, false)])];
        if n > 1 {
            pins.push(Pinning::from_assignments([(n - 1, false)]));
        }
        for &(b, c, l) in &params {
            let p = SpinParams { beta: b, gamma: c, lambda: l };
            for pin in &pins {
                let Ok(s) = SpinSystem::new(g.clone(), p, pin.clone()) else { continue };
                if let Ok(d) = crate::oracle::enumerate(&s) {
                    let k = d.support().len();
                    if (2..=max_support).contains(&k) {
                        out.push(s);
                    }
                }
            }
        }
    }
    out
}

/// Pairs `(dedicated, event-field preset)` applicable to a system.
pub fn preset_pairs(s: &SpinSystem) -> Vec<(ChainKind, ChainKind)> {
    let g = &s.graph;
    let mut out = Vec::new();
    for theta in [0.3, 0.7] {
        out.push((
            ChainKind::VertexField { theta },
            ChainKind::EventField { family: EventFamily::vertex_occupied(g, theta) },
        ));
        out.push((
            ChainKind::EdgeField { theta },
            ChainKind::EventField { family: EventFamily::oriented_edge_10(g, theta) },
        ));
    }
    if ChainKind::SwendsenWang.validate(s).is_ok() {
        out.push((
            ChainKind::SwendsenWang,
            ChainKind::EventField { family: EventFamily::edge_monochromatic(g, 1.0 / s.params.beta) },
        ));
    }
    out
}

/// Largest row TV between two chains on the same system.
pub fn row_tv_gap(s: &SpinSystem, a: &ChainKind, b: &ChainKind) -> crate::Result<f64> {
    let ma = crate::oracle::transition_matrix(s, a)?;
    let mb = crate::oracle::transition_matrix(s, b)?;
    let mut worst: f64 = 0.0;
    for i in 0..ma.dim() {
        let ra: Vec<f64> = ma.matrix.row(i).iter().copied().collect();
        let rb: Vec<f64> = mb.matrix.row(i).iter().copied().collect();
        worst = worst.max(tv(&ra, &rb));
    }
    Ok(worst)
}

fn chain_equivalence(_cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let tol = ctx.tol(1e-10);
    let systems = small_support_systems(10);
    let res: Vec<Outcome<Vec<(String, f64)>>> = systems
        .par_iter()
        .map(|s| {
            preset_pairs(s)
                .iter()
                .map(|(a, b)| Ok((a.name().to_string(), row_tv_gap(s, a, b)?)))
                .collect()
        })
        .collect();
    let mut report = SuiteReport::new("chain-equivalence", &["graph", "params", "pinning", "chain", "max_row_tv"]);
    let mut by_kind: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for (s, r) in systems.iter().zip(res) {
        for (name, gap) in r? {
            by_kind.entry(name.clone()).or_default().push(gap);
            report.rows.push(vec![
                graph_label(&s.graph),
                format!("{}/{}/{}", s.params.beta, s.params.gamma, s.params.lambda),
                pinning_label(&s.pinning),
                name,
                num(gap),
            ]);
        }
    }
    for (name, vals) in by_kind {
        report.checks.push(max_check(&format!("preset-{name}"), vals, tol));
    }
    report.notes.push(format!("{} systems", systems.len()));
    Ok(report)
}

// ---------------------------------------------------------------------------
// at-mixing

/// `(tmix, n K ln(1/μ_min))` for Glauber on one system.
pub fn at_mixing_pair(s: &SpinSystem) -> crate::Result<(u64, f64, f64)> {
    let dist = crate::oracle::enumerate(s)?;
    let k = at_variance_constant(&dist)?;
    let tm = crate::oracle::transition_matrix(s, &ChainKind::Glauber)?;
    let t = exact_mixing_time(&tm, &tm.restrict(&dist), 0.25)?;
    let bound = s.n() as f64 * k * (1.0 / dist.min_positive()).ln();
    Ok((t, bound, k))
}

pub fn at_mixing_systems() -> Vec<SpinSystem> {
    let params = [(0.0, 1.0, 1.0), (0.5, 1.2, 0.8), (2.0, 2.0, 0.6), (1.0, 1.0, 0.5)];
    let mut out = Vec::new();
    let mut graphs = small_graph_catalog(3);
    graphs.push(Family::Cycle { n: 4 }.build().expect("c4"));
    for g in graphs {
        for &(b, c, l) in &params {
            out.push(SpinSystem::free(g.clone(), SpinParams { beta: b, gamma: c, lambda: l }).expect("valid"));
        }
    }
    out
}

pub fn product_systems() -> Vec<SpinSystem> {
    let mut out = Vec::new();
    let graphs = [Family::Cycle { n: 4 }, Family::Complete { n: 4 }, Family::Star { n: 5 }, Family::Path { n: 3 }];
    for f in graphs {
        let g = f.build().expect("family");
        for (b, c, l) in [(1.0, 1.0, 0.7), (2.0, 0.5, 0.7), (1.0, 1.0, 3.0), (4.0, 0.25, 1.0)] {
            let p = SpinParams { beta: b, gamma: c, lambda: l };
            out.push(SpinSystem::free(g.clone(), p).expect("valid"));
            out.push(SpinSystem::new(g.clone(), p, Pinning::from_assignments([(0, true)])).expect("valid"));
        }
    }
    out.push(SpinSystem::free(Graph::empty(3), SpinParams { beta: 0.3, gamma: 2.0, lambda: 0.4 }).expect("valid"));
    out
}

fn at_mixing(_cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let mut report = SuiteReport::new("at-mixing", &["kind", "graph", "params", "value", "bound"]);
    let prod: Vec<Outcome<f64>> = product_systems()
        .par_iter()
        .map(|s| Ok(at_variance_constant(&ctx.enumerate(s)?)?))
        .collect();
    let mut worst = Vec::new();
    for (s, k) in product_systems().iter().zip(prod) {
        let k = k?;
        worst.push((k - 1.0).abs());
        report.rows.push(vec![
            "at-product".into(),
            graph_label(&s.graph),
            format!("{}/{}/{}", s.params.beta, s.params.gamma, s.params.lambda),
            num(k),
            "1".into(),
        ]);
    }
    report.checks.push(max_check("at-product", worst, ctx.tol(1e-9)));
    let systems = at_mixing_systems();
    let mix: Vec<Outcome<(u64, f64, f64)>> = systems.par_iter().map(|s| Ok(at_mixing_pair(s)?)).collect();
    let mut margin = f64::INFINITY;
    let mut violations = Vec::new();
    for (s, r) in systems.iter().zip(mix) {
        let (t, bound, _) = r?;
        let label = graph_label(&s.graph);
        if (t as f64) > bound {
            violations.push(format!("{label} {}/{}/{}", s.params.beta, s.params.gamma, s.params.lambda));
        }
        margin = margin.min(bound - t as f64);
        report.rows.push(vec![
            "mixing".into(),
            label,
            format!("{}/{}/{}", s.params.beta, s.params.gamma, s.params.lambda),
            t.to_string(),
            num(bound),
        ]);
    }
    report.checks.push(BoundReport::lower("at-mixing-inequality", 0.0, margin, 0.0));
    if !violations.is_empty() {
        report.notes.push(format!("mixing inequality fails on: {}", violations.join("; ")));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// stability, mixing-bounds, sample

fn stability(cfg: &ExperimentConfig, ctx: &Ctx) -> Outcome<SuiteReport> {
    let g = graph_of(cfg, Family::Complete { n: 4 })?;
    let p = params_of(cfg, (1.0 / 3.0, 1.0 / 3.0, 1.0))?;
    let theta = cfg.theta.unwrap_or(0.2);
    let system = SpinSystem::new(g, p, cfg.pinning.clone().unwrap_or_default())?;
    ctx.enumerate(&system)?;
    let opts = StabilityOptions { seed: ctx.seed, ..Default::default() };
    let mut report = SuiteReport::new("stability", &["name", "formula", "measured", "verdict"]);
    report.checks = stability_matrix_checks(&system, theta, &opts)?;
    for c in &report.checks {
        report.rows.push(vec![
            c.name.clone(),
            num(c.formula_value),
            c.measured_value.map_or(String::new(), num),
            c.verdict.as_str().into(),
        ]);
    }
    Ok(report)
}

fn mixing_bounds(cfg: &ExperimentConfig) -> Outcome<SuiteReport> {
    let g = graph_of(cfg, Family::Complete { n: 4 })?;
    let p = params_of(cfg, (1.0 / 3.0, 1.0 / 3.0, 1.0))?;
    let inputs = MixingInputs { params: p, max_degree: g.max_degree(), n: g.n(), bar_beta: None, delta: cfg.slack };
    let mut report = SuiteReport::new("mixing-bounds", &["bound", "value", "status"]);
    for which in [
        MixingBound::GlauberCritical,
        MixingBound::EdgeFieldMixing,
        MixingBound::GlauberViaEdge,
        MixingBound::GlauberViaVertex,
        MixingBound::SwMixing,
    ] {
        match mixing_bound(which, &inputs) {
            Ok(r) => {
                report.rows.push(vec![which.name().into(), num(r.formula_value), r.verdict.as_str().into()]);
                report.checks.push(r);
            }
            Err(e) => report.rows.push(vec![which.name().into(), String::new(), format!("\"{e}\"")]),
        }
    }
    Ok(report)
}

fn sample(cfg: &ExperimentConfig) -> Outcome<SuiteReport> {
    let g = graph_of(cfg, Family::Cycle { n: 6 })?;
    let p = params_of(cfg, (0.0, 1.0, 1.0))?;
    let system = SpinSystem::new(g, p, cfg.pinning.clone().unwrap_or_default())?;
    let mut spec = cfg.chain.clone().unwrap_or(ChainSpec {
        kind: ChainKind::Glauber,
        up_mode: UpMode::ExactEnumeration,
        seed: 0,
    });
    if let Some(s) = cfg.seed {
        spec.seed = s;
    }
    let steps = cfg.steps.unwrap_or(1000);
    let traj = run_chain(&system, &spec, steps, RecordPolicy::All, None)?;
    let mut report = SuiteReport::new("sample", &["step", "state"]);
    for (i, s) in traj.states.iter().enumerate() {
        report.rows.push(vec![i.to_string(), state_hex(s)]);
    }
    report.notes.push(traj.metadata_json());
    Ok(report)
}
