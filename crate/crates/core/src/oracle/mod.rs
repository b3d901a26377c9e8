//! Brute-force ground truth on small instances.

mod chains;
mod dist;
mod matrices;
mod spectral;
mod transport;

pub use chains::{transition_matrix, transition_matrix_capped, TransitionMatrix, DEFAULT_MAX_SUPPORT, MAX_EVENTS};
pub use dist::{
    divergence, enumerate, enumerate_capped, enumerate_random_cluster, log_sum_exp, tv, DistTable, Divergence,
    Domain, DEFAULT_MAX_VARS,
};
pub use matrices::{
    covariance, influence_lambda_max, influence_matrix, second_order_correlation, subset_correlation,
    sw_correlation, sym_eigenvalues, sym_max_eigenvalue, total_influence, Diagonal, EventCorrelation,
};
pub use spectral::{
    at_variance_constant, conservation_constant_from_channel, conservation_constant_variance, exact_mixing_time,
    spectral_gap, Gap, MIXING_CAP,
};
pub use transport::{hamming_w1, MAX_TRANSPORT_DIM};
