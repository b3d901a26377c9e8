use nalgebra::{DMatrix, SymmetricEigen};

use crate::graph::Graph;
use crate::spin::bit;

use super::dist::DistTable;

/// Largest eigenvalue of a symmetric matrix (0 for an empty one).
pub fn sym_max_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let sym = (m + m.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Mean vector and covariance matrix of the coordinates.
pub fn covariance(dist: &DistTable) -> (Vec<f64>, DMatrix<f64>) {
    event_moments(dist, (0..dist.n).map(|i| move |s: u64| bit(s, i)).collect::<Vec<_>>().as_slice())
}

/// Probabilities and covariance matrix of a list of event indicators.
fn event_moments<F: Fn(u64) -> bool>(dist: &DistTable, events: &[F]) -> (Vec<f64>, DMatrix<f64>) {
    let k = events.len();
    let mut p = vec![0.0; k];
    let mut joint = DMatrix::<f64>::zeros(k, k);
    let mut hits = Vec::with_capacity(k);
    for (s, &w) in dist.probs.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        hits.clear();
        hits.extend((0..k).filter(|&i| events[i](s as u64)));
        for &i in &hits {
            p[i] += w;
            for &j in &hits {
                joint[(i, j)] += w;
            }
        }
    }
    let cov = DMatrix::from_fn(k, k, |i, j| joint[(i, j)] - p[i] * p[j]);
    (p, cov)
}

/// `Ψ(u, v) = P(X_v = 1 | X_u = 1) - P(X_v = 1 | X_u = 0)` on interior rows,
/// zero diagonal.
pub fn influence_matrix(dist: &DistTable) -> DMatrix<f64> {
    let (mean, cov) = covariance(dist);
    let interior = dist.interior();
    let n = dist.n;
    DMatrix::from_fn(n, n, |u, v| {
        if u == v || !interior[u] {
            0.0
        } else {
            cov[(u, v)] / (mean[u] * (1.0 - mean[u]))
        }
    })
}

/// Largest eigenvalue of the influence matrix, through its symmetric
/// similarity `D^{-1/2} (Cov - D) D^{-1/2}` on interior coordinates.
pub fn influence_lambda_max(dist: &DistTable) -> f64 {
    let (mean, cov) = covariance(dist);
    let idx: Vec<usize> = dist.interior().iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect();
    let var: Vec<f64> = idx.iter().map(|&i| mean[i] * (1.0 - mean[i])).collect();
    let m = DMatrix::from_fn(idx.len(), idx.len(), |a, b| {
        if a == b {
            0.0
        } else {
            cov[(idx[a], idx[b])] / (var[a] * var[b]).sqrt()
        }
    });
    sym_max_eigenvalue(&m).max(0.0)
}

/// `1 + Σ_v |Ψ(r, v)|`.
pub fn total_influence(dist: &DistTable, r: usize) -> f64 {
    let psi = influence_matrix(dist);
    1.0 + psi.row(r).iter().map(|x| x.abs()).sum::<f64>()
}

/// Whether the diagonal of an event correlation matrix is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagonal {
    /// `μ(A | A) - μ(A) = 1 - μ(A)`.
    Literal,
    Zeroed,
}

/// `M(A, B) = μ(B | A) - μ(B)` over a list of events, rows zero when
/// `μ(A) = 0`.
#[derive(Debug, Clone)]
pub struct EventCorrelation {
    pub probs: Vec<f64>,
    pub cov: DMatrix<f64>,
}

impl EventCorrelation {
    pub fn from_events<F: Fn(u64) -> bool>(dist: &DistTable, events: &[F]) -> Self {
        let (probs, cov) = event_moments(dist, events);
        EventCorrelation { probs, cov }
    }

    fn active(&self) -> Vec<usize> {
        (0..self.probs.len()).filter(|&i| self.probs[i] > 0.0).collect()
    }

    pub fn matrix(&self, diag: Diagonal) -> DMatrix<f64> {
        let k = self.probs.len();
        DMatrix::from_fn(k, k, |a, b| {
            if self.probs[a] <= 0.0 || (a == b && diag == Diagonal::Zeroed) {
                0.0
            } else {
                self.cov[(a, b)] / self.probs[a]
            }
        })
    }

    /// Largest eigenvalue via `P^{-1/2} Cov P^{-1/2}` on events of positive
    /// probability.
    pub fn lambda_max(&self, diag: Diagonal) -> f64 {
        let idx = self.active();
        let m = DMatrix::from_fn(idx.len(), idx.len(), |a, b| {
            if a == b && diag == Diagonal::Zeroed {
                0.0
            } else {
                let (i, j) = (idx[a], idx[b]);
                self.cov[(i, j)] / (self.probs[i] * self.probs[j]).sqrt()
            }
        });
        sym_max_eigenvalue(&m)
    }

    /// Largest absolute row sum of the matrix.
    pub fn max_row_sum(&self, diag: Diagonal) -> f64 {
        let m = self.matrix(diag);
        (0..m.nrows()).map(|r| m.row(r).iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max)
    }
}

/// Events `σ_u = 1, σ_v = 0` per oriented edge.
pub fn second_order_correlation(dist: &DistTable, g: &Graph) -> EventCorrelation {
    let events: Vec<_> = g
        .oriented_edges()
        .into_iter()
        .map(|(u, v)| move |s: u64| bit(s, u) && !bit(s, v))
        .collect();
    EventCorrelation::from_events(dist, &events)
}

/// Events `σ_u = σ_v` per edge.
pub fn sw_correlation(dist: &DistTable, g: &Graph) -> EventCorrelation {
    let events: Vec<_> =
        g.edges().iter().map(|&(u, v)| move |s: u64| bit(s, u) == bit(s, v)).collect();
    EventCorrelation::from_events(dist, &events)
}

/// Correlation matrix of a distribution over subsets: events `i ∈ S`, rows
/// zero unless the marginal lies in `(0, 1)`.
pub fn subset_correlation(dist: &DistTable) -> EventCorrelation {
    let events: Vec<_> = (0..dist.n).map(|i| move |s: u64| bit(s, i)).collect();
    let mut c = EventCorrelation::from_events(dist, &events);
    let interior = dist.interior();
    for (i, p) in c.probs.iter_mut().enumerate() {
        if !interior[i] {
            *p = 0.0;
        }
    }
    c
}
