//! Segmentation scores: variation of information, adapted Rand, and the signed cut cost.

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{GaspError, Result};
use crate::graph::SignedGraph;
use crate::partition::Partition;

/// Joint label counts of a segmentation (rows) against a ground truth (columns).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ContingencyTable {
    pub joint: FxHashMap<(u32, u32), u64>,
    pub seg: FxHashMap<u32, u64>,
    pub gt: FxHashMap<u32, u64>,
    pub total: u64,
}

impl ContingencyTable {
    /// Voxels whose ground-truth label equals `ignore` are skipped.
    pub fn new(seg: &[u32], gt: &[u32], ignore: Option<u32>) -> Result<Self> {
        if seg.len() != gt.len() {
            return Err(GaspError::ShapeMismatch(format!(
                "segmentation has {} voxels, ground truth {}",
                seg.len(),
                gt.len()
            )));
        }
        let mut t = ContingencyTable::default();
        for (&s, &g) in seg.iter().zip(gt) {
            if Some(g) == ignore {
                continue;
            }
            *t.joint.entry((s, g)).or_default() += 1;
            *t.seg.entry(s).or_default() += 1;
            *t.gt.entry(g).or_default() += 1;
            t.total += 1;
        }
        if t.total == 0 {
            return Err(GaspError::EmptyOverlap);
        }
        Ok(t)
    }

    /// `(H(seg | gt), H(gt | seg))` in nats.
    pub fn variation_of_information(&self) -> (f64, f64) {
        let total = self.total as f64;
        let (mut split, mut merge) = (0.0, 0.0);
        for (&(s, g), &n) in &self.joint {
            let p = n as f64 / total;
            split -= p * (n as f64 / self.gt[&g] as f64).ln();
            merge -= p * (n as f64 / self.seg[&s] as f64).ln();
        }
        (split.max(0.0), merge.max(0.0))
    }

    pub fn adapted_rand(&self) -> f64 {
        let sq = |m: &FxHashMap<u32, u64>| m.values().map(|&n| (n as f64).powi(2)).sum::<f64>();
        let joint: f64 = self.joint.values().map(|&n| (n as f64).powi(2)).sum();
        let precision = joint / sq(&self.seg);
        let recall = joint / sq(&self.gt);
        2.0 * precision * recall / (precision + recall)
    }
}

pub fn variation_of_information(seg: &[u32], gt: &[u32], ignore: Option<u32>) -> Result<(f64, f64)> {
    Ok(ContingencyTable::new(seg, gt, ignore)?.variation_of_information())
}

pub fn adapted_rand(seg: &[u32], gt: &[u32], ignore: Option<u32>) -> Result<f64> {
    Ok(ContingencyTable::new(seg, gt, ignore)?.adapted_rand())
}

/// `sqrt((vi_split + vi_merge) * (1 - rand))`; lower is better.
pub fn combined_score(vi_split: f64, vi_merge: f64, rand: f64) -> f64 {
    ((vi_split + vi_merge) * (1.0 - rand)).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub vi_split: f64,
    pub vi_merge: f64,
    pub adapted_rand: f64,
    pub combined: f64,
}

pub fn evaluate(seg: &[u32], gt: &[u32], ignore: Option<u32>) -> Result<Scores> {
    let t = ContingencyTable::new(seg, gt, ignore)?;
    let (vi_split, vi_merge) = t.variation_of_information();
    let adapted_rand = t.adapted_rand();
    Ok(Scores {
        vi_split,
        vi_merge,
        adapted_rand,
        combined: combined_score(vi_split, vi_merge, adapted_rand),
    })
}

/// Sum of signed weights over edges cut by `p`.
pub fn signed_cut_cost(g: &SignedGraph, p: &Partition) -> f64 {
    g.edges()
        .iter()
        .filter(|e| p.root(e.u) != p.root(e.v))
        .map(|e| e.signed_weight())
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{EdgeSpec, NodeId};

    /// Every set partition of `n` elements as restricted growth strings.
    fn set_partitions(n: usize) -> Vec<Vec<u32>> {
        fn grow(prefix: &mut Vec<u32>, n: usize, out: &mut Vec<Vec<u32>>) {
            if prefix.len() == n {
                out.push(prefix.clone());
                return;
            }
            let next = prefix.iter().max().map_or(0, |m| m + 1);
            for l in 0..=next {
                prefix.push(l);
                grow(prefix, n, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        grow(&mut Vec::new(), n, &mut out);
        out
    }

    fn brute_conditional_entropy(a: &[u32], b: &[u32]) -> f64 {
        // H(a | b) = -sum over elements of (1/n) log P(a = a_x | b = b_x)
        let n = a.len() as f64;
        a.iter()
            .zip(b)
            .map(|(&ax, &bx)| {
                let same_b = b.iter().filter(|&&y| y == bx).count() as f64;
                let both = a.iter().zip(b).filter(|&(&ay, &by)| ay == ax && by == bx).count() as f64;
                -(both / same_b).ln() / n
            })
            .sum()
    }

    fn brute_rand(seg: &[u32], gt: &[u32]) -> f64 {
        // ordered pairs including (x, x)
        let mut together = [0.0f64; 3];
        for i in 0..seg.len() {
            for j in 0..seg.len() {
                let (s, g) = (seg[i] == seg[j], gt[i] == gt[j]);
                together[0] += (s && g) as u8 as f64;
                together[1] += s as u8 as f64;
                together[2] += g as u8 as f64;
            }
        }
        let (p, r) = (together[0] / together[1], together[0] / together[2]);
        2.0 * p * r / (p + r)
    }

    #[test]
    fn exhaustive_small_partitions() {
        for n in 1..=5 {
            let parts = set_partitions(n);
            for a in &parts {
                for b in &parts {
                    let (split, merge) = variation_of_information(a, b, None).unwrap();
                    assert!((split - brute_conditional_entropy(a, b)).abs() < 1e-12);
                    assert!((merge - brute_conditional_entropy(b, a)).abs() < 1e-12);
                    let rand = adapted_rand(a, b, None).unwrap();
                    assert!((rand - brute_rand(a, b)).abs() < 1e-12);
                    assert_eq!(rand == 1.0, a == b);
                }
            }
        }
    }

    #[test]
    fn documented_examples() {
        let gt = [1, 1, 1, 1];
        let halves = [1, 1, 2, 2];
        let (split, merge) = variation_of_information(&halves, &gt, None).unwrap();
        assert!((split - 2f64.ln()).abs() < 1e-12 && merge == 0.0);
        assert_eq!(variation_of_information(&gt, &halves, None).unwrap(), (merge, split));
        assert_eq!(variation_of_information(&halves, &halves, None).unwrap(), (0.0, 0.0));
        let singletons = [0, 1, 2, 3];
        assert!((adapted_rand(&singletons, &gt, None).unwrap() - 0.4).abs() < 1e-12);
        assert_eq!(adapted_rand(&[7, 7, 3], &[1, 1, 2], None).unwrap(), 1.0);
        assert_eq!(combined_score(0.0, 0.0, 1.0), 0.0);
        assert!((combined_score(0.6931, 0.0, 0.4) - 0.6448).abs() < 1e-4);
    }

    #[test]
    fn ignore_label_and_errors() {
        let (seg, gt) = ([1, 2, 3], [0, 5, 5]);
        assert_eq!(adapted_rand(&seg, &gt, None).unwrap() < 1.0, true);
        let (split, _) = variation_of_information(&seg, &gt, Some(0)).unwrap();
        assert!((split - 2f64.ln()).abs() < 1e-12);
        assert!(matches!(adapted_rand(&[1], &[0], Some(0)), Err(GaspError::EmptyOverlap)));
        assert!(matches!(adapted_rand(&[1], &[1, 2], None), Err(GaspError::ShapeMismatch(_))));
        let s = evaluate(&[1, 1, 2, 2], &[1, 1, 1, 1], None).unwrap();
        assert_eq!(s.combined, combined_score(s.vi_split, s.vi_merge, s.adapted_rand));
    }

    #[test]
    fn cut_cost() {
        let g = SignedGraph::new(3, [EdgeSpec::signed(0, 1, 2.0), EdgeSpec::signed(1, 2, 1.0), EdgeSpec::signed(0, 2, -1.5)]).unwrap();
        let mut p = Partition::new(3);
        assert_eq!(signed_cut_cost(&g, &p), 1.5);
        p.merge(NodeId(0), NodeId(1)).unwrap();
        assert_eq!(signed_cut_cost(&g, &p), -0.5);
        p.merge(NodeId(1), NodeId(2)).unwrap();
        assert_eq!(signed_cut_cost(&g, &p), 0.0);
    }
}
