//! Exact 1-Wasserstein distance under the Hamming metric.
//!
//! The Hamming metric is the shortest-path metric of the hypercube, so the
//! optimal transport problem is a min-cost transshipment on the hypercube
//! with unit arc costs. Solved by successive shortest paths with potentials.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Largest hypercube dimension accepted by [`hamming_w1`].
pub const MAX_TRANSPORT_DIM: usize = 16;

const MASS_EPS: f64 = 1e-15;

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

/// `W1(a, b)` for two probability vectors indexed by `{0,1}^dim` bitmasks,
/// with Hamming ground distance.
pub fn hamming_w1(a: &[f64], b: &[f64], dim: usize) -> Result<f64> {
    if dim > MAX_TRANSPORT_DIM {
        return Err(Error::TooLarge { what: "transport dimension", size: dim, cap: MAX_TRANSPORT_DIM });
    }
    let n = 1usize << dim;
    if a.len() != n || b.len() != n {
        return Err(Error::InvalidParams("transport vectors must have length 2^dim".into()));
    }
    let mut excess: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let imbalance: f64 = excess.iter().sum();
    if imbalance.abs() > 1e-9 {
        return Err(Error::InvalidParams(format!("masses differ by {imbalance}")));
    }
    // flow[v * dim + i]: flow on the arc v -> v ^ (1 << i).
    let mut flow = vec![0.0f64; n * dim];
    let mut pot = vec![0.0f64; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut pred: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();

    loop {
        let has_source = excess.iter().any(|&e| e > MASS_EPS);
        let has_sink = excess.iter().any(|&e| e < -MASS_EPS);
        if !has_source || !has_sink {
            break;
        }
        dist.fill(f64::INFINITY);
        pred.fill(None);
        done.fill(false);
        heap.clear();
        for v in 0..n {
            if excess[v] > MASS_EPS {
                dist[v] = 0.0;
                heap.push(Entry(0.0, v));
            }
        }
        let mut sink = None;
        while let Some(Entry(d, v)) = heap.pop() {
            if done[v] || d > dist[v] {
                continue;
            }
            done[v] = true;
            if excess[v] < -MASS_EPS {
                sink = Some(v);
                break;
            }
            for i in 0..dim {
                let w = v ^ (1 << i);
                // Cancelling flow w -> v costs -1, otherwise pushing costs +1.
                let cost = if flow[w * dim + i] > MASS_EPS { -1.0 } else { 1.0 };
                let reduced = (cost + pot[v] - pot[w]).max(0.0);
                let nd = d + reduced;
                if nd < dist[w] {
                    dist[w] = nd;
                    pred[w] = Some((v, i));
                    heap.push(Entry(nd, w));
                }
            }
        }
        let t = match sink {
            Some(t) => t,
            None => return Err(Error::Nonconvergent(0)),
        };
        let dt = dist[t];
        for v in 0..n {
            pot[v] += dist[v].min(dt);
        }
        // Bottleneck along the path.
        let mut amount = -excess[t];
        let mut v = t;
        while let Some((u, i)) = pred[v] {
            let back = flow[v * dim + i];
            if back > MASS_EPS {
                amount = amount.min(back);
            }
            v = u;
        }
        amount = amount.min(excess[v]);
        let mut v = t;
        while let Some((u, i)) = pred[v] {
            let back = flow[v * dim + i];
            if back > MASS_EPS {
                flow[v * dim + i] = if back - amount > MASS_EPS { back - amount } else { 0.0 };
            } else {
                flow[u * dim + i] += amount;
            }
            v = u;
        }
        excess[v] -= amount;
        excess[t] += amount;
    }
    Ok(flow.iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Kantorovich dual over integer 1-Lipschitz potentials, which is exact
    /// for graph metrics.
    fn dual_w1(a: &[f64], b: &[f64], dim: usize) -> f64 {
        let n = 1usize << dim;
        let span = dim as i32;
        let mut f = vec![0i32; n];
        let mut best = f64::NEG_INFINITY;
        fn rec(k: usize, f: &mut Vec<i32>, dim: usize, span: i32, a: &[f64], b: &[f64], best: &mut f64) {
            let n = f.len();
            if k == n {
                let v: f64 = (0..n).map(|x| f[x] as f64 * (a[x] - b[x])).sum();
                *best = best.max(v);
                return;
            }
            for val in -span..=span {
                let ok = (0..dim).all(|i| {
                    let w = k ^ (1 << i);
                    w > k || (f[w] - val).abs() <= 1
                });
                if ok {
                    f[k] = val;
                    rec(k + 1, f, dim, span, a, b, best);
                }
            }
        }
        rec(1, &mut f, dim, span, a, b, &mut best);
        best
    }

    fn random_prob(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        let mut v: Vec<f64> = (0..n).map(|_| if rng.random::<f64>() < 0.3 { 0.0 } else { rng.random() }).collect();
        v[rng.random_range(0..n)] += 0.1;
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
        v
    }

    #[test]
    fn point_masses() {
        let mut a = vec![0.0; 8];
        let mut b = vec![0.0; 8];
        a[0] = 1.0;
        b[7] = 1.0;
        assert!((hamming_w1(&a, &b, 3).unwrap() - 3.0).abs() < 1e-12);
        assert_eq!(hamming_w1(&a, &a, 3).unwrap(), 0.0);
        assert_eq!(hamming_w1(&[1.0], &[1.0], 0).unwrap(), 0.0);
    }

    #[test]
    fn matches_dual_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dim in 1..=3 {
            for _ in 0..25 {
                let a = random_prob(&mut rng, 1 << dim);
                let b = random_prob(&mut rng, 1 << dim);
                let primal = hamming_w1(&a, &b, dim).unwrap();
                let dual = dual_w1(&a, &b, dim);
                assert!((primal - dual).abs() < 1e-12, "dim {dim}: {primal} vs {dual}");
            }
        }
    }

    #[test]
    fn one_dimensional_is_mass_difference() {
        let w = hamming_w1(&[0.3, 0.7], &[0.8, 0.2], 1).unwrap();
        assert!((w - 0.5).abs() < 1e-15);
    }
}
