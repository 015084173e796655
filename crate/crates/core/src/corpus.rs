//! Random graph corpora for equivalence checks.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::{EdgeSpec, SignedGraph};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightDist {
    /// Integers in `[-k, k]`; produces many exact ties in `|w|`.
    Integers(i32),
    /// Uniform in `[-1, 1)`.
    Uniform,
    /// Uniform in `[lo, hi)`, with `0 < lo`; ties have probability zero.
    Positive(f64, f64),
}

impl WeightDist {
    fn sample<R: Rng>(self, rng: &mut R) -> f64 {
        match self {
            WeightDist::Integers(k) => rng.gen_range(-k..=k) as f64,
            WeightDist::Uniform => rng.gen_range(-1.0..1.0),
            WeightDist::Positive(lo, hi) => rng.gen_range(lo..hi),
        }
    }
}

/// Random simple graph on `n` nodes; each unordered pair is an edge with
/// probability `density`. Edges are shuffled so ids carry no structure, and a
/// random ~20% are flagged long-range.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, density: f64, weights: WeightDist) -> SignedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(density) {
                let w = weights.sample(rng);
                let (a, b) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
                edges.push(EdgeSpec {
                    is_local: rng.gen_bool(0.8),
                    ..EdgeSpec::signed(a, b, w)
                });
            }
        }
    }
    edges.shuffle(rng);
    SignedGraph::new(n, edges).expect("generated graph is simple")
}

/// Connected graph with positive weights: a random spanning tree plus extra edges.
pub fn random_connected_positive<R: Rng>(rng: &mut R, n: usize, extra_density: f64) -> SignedGraph {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut present = std::collections::HashSet::new();
    let mut edges = Vec::new();
    let sample = |rng: &mut R| WeightDist::Positive(0.05, 1.0).sample(rng);
    for i in 1..n {
        let (u, v) = (order[i], order[rng.gen_range(0..i)]);
        present.insert((u.min(v), u.max(v)));
        edges.push(EdgeSpec::signed(u, v, sample(rng)));
    }
    for u in 0..n {
        for v in u + 1..n {
            if !present.contains(&(u, v)) && rng.gen_bool(extra_density) {
                edges.push(EdgeSpec::signed(u, v, sample(rng)));
            }
        }
    }
    edges.shuffle(rng);
    SignedGraph::new(n, edges).expect("generated graph is simple")
}
