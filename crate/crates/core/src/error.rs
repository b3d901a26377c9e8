use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("edge ({0}, {1}) listed twice")]
    DuplicateEdge(usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("infeasible graph family: {0}")]
    InfeasibleFamily(String),
    #[error("edge ({0}, {1}) is not in the graph")]
    EdgeNotInGraph(usize, usize),
    #[error("root vertex is pinned")]
    RootPinned,
    #[error("self-avoiding walk tree exceeds {limit} nodes")]
    TreeTooLarge { limit: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("tilt must be positive, got {0}")]
    NonPositiveTilt(f64),
    #[error("flip needs a positive external field")]
    ZeroField,
    #[error("inconsistent pinning: {0}")]
    InconsistentPinning(String),
    #[error("state space too large: {what} = {size} exceeds cap {cap}")]
    TooLarge { what: &'static str, size: usize, cap: usize },
    #[error("no configuration has positive weight under the pinning")]
    EmptySupport,
    #[error("distribution is not absolutely continuous with respect to the reference")]
    NotAbsolutelyContinuous,
    #[error("invalid tilt {0}")]
    InvalidTilt(f64),
    #[error("chain is not reversible (detailed balance residual {0:e})")]
    NotReversible(f64),
    #[error("mixing time exceeds cap {0}")]
    Nonconvergent(u64),
    #[error("down-up chain has zero spectral gap")]
    ZeroGap,
    #[error("indeterminate limit in tree recursion")]
    IndeterminateLimit,
    #[error("parameters are not antiferromagnetic (beta*gamma = {0})")]
    NotAntiferromagnetic(f64),
    #[error("no critical point: uniqueness holds for every field")]
    NoCriticalPoint,
    #[error("theta {0} outside the admissible range")]
    ThetaOutOfRange(f64),
    #[error("control function needs positive slack")]
    ZeroSlack,
    #[error("negative argument {0}")]
    NegativeArgument(f64),
    #[error("slack {0} outside (0, 1]")]
    DeltaOutOfRange(f64),
    #[error("bar_beta {0} exceeds (Delta - 2.1) / Delta")]
    BarBetaTooLarge(f64),
    #[error("sampler reached an infeasible state")]
    InfeasibleState,
    #[error("exact up-step needs {0} free variables, too many to enumerate")]
    UpStepTooLarge(usize),
    #[error("parameters are not ferromagnetic Ising with field in [0, 1]")]
    NotFerromagnetic,
    #[error("external field {lambda} exceeds 1 - delta = {limit}")]
    LambdaTooLarge { lambda: f64, limit: f64 },
    #[error("parameters are not critical (slack {0:e})")]
    NotCritical(f64),
    #[error("hard-constraint parameters (beta = 0) are not allowed here")]
    HardConstraint,
    #[error("parameters outside the required regime: {0}")]
    RegimeViolation(String),
    #[error("inputs outside the evaluator's regime: {0}")]
    InputsOutOfRegime(String),
    #[error("graph is not a regular bipartite graph")]
    NotBipartiteRegular,
    #[error("irregular graph with gamma > 1 is not covered")]
    IrregularWithLargeGamma,
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
