//! Exact verification and sampling for two-spin systems on small graphs.
//!
//! The crate enumerates Gibbs distributions of the (β, γ, λ) two-spin model,
//! builds exact transition matrices for Glauber, field and Swendsen-Wang
//! dynamics, computes influence and correlation matrices, and evaluates the
//! closed-form spectral-independence and mixing bounds against those exact
//! quantities.

pub mod error;
pub mod experiment;
pub mod dynamics;
pub mod graph;
pub mod lower_bound;
pub mod oracle;
pub mod scalar;
pub mod spin;
pub mod stability;
pub mod tree;

pub use error::{Error, Result};
pub use graph::{Family, Graph, PinnedTree};
pub use scalar::Real;
pub use spin::{Event, EventFamily, EventKind, Pinning, RandomClusterParams, SpinParams, SpinSystem};

/// Parameters in double precision.
pub type Params = SpinParams<f64>;
/// Parameters in single precision.
pub type Params32 = SpinParams<f32>;
