//! Mutex Watershed: one sorted pass over the edges with mutual-exclusion sets.
//!
//! Produces the same clustering as [`crate::engine::gasp`] with the `AbsMax`
//! rule and cannot-link constraints, without maintaining a contracted graph.

use rustc_hash::FxHashSet;

use crate::graph::{NodeId, SignedGraph};
use crate::partition::Partition;

/// Mutual exclusions between current cluster roots.
#[derive(Debug, Clone, Default)]
pub struct ConstraintSets {
    sets: Vec<FxHashSet<u32>>,
}

impl ConstraintSets {
    pub fn new(n: usize) -> Self {
        ConstraintSets {
            sets: vec![FxHashSet::default(); n],
        }
    }

    pub fn excludes(&self, a: NodeId, b: NodeId) -> bool {
        let (sa, sb) = (&self.sets[a.index()], &self.sets[b.index()]);
        if sa.len() <= sb.len() {
            sa.contains(&b.0)
        } else {
            sb.contains(&a.0)
        }
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) {
        self.sets[a.index()].insert(b.0);
        self.sets[b.index()].insert(a.0);
    }

    /// Moves the exclusions of roots `a` and `b` onto `root`, which must be one of them.
    pub fn merge(&mut self, a: NodeId, b: NodeId, root: NodeId) {
        let other = if root == a { b } else { a };
        let mut kept = std::mem::take(&mut self.sets[root.index()]);
        let mut moved = std::mem::take(&mut self.sets[other.index()]);
        if moved.len() > kept.len() {
            std::mem::swap(&mut kept, &mut moved);
        }
        for c in moved {
            kept.insert(c);
        }
        // rename `other` to `root` in the sets that point at it
        for &c in &kept {
            let s = &mut self.sets[c as usize];
            if s.remove(&other.0) {
                s.insert(root.0);
            }
        }
        self.sets[root.index()] = kept;
    }

    pub fn get(&self, root: NodeId) -> &FxHashSet<u32> {
        &self.sets[root.index()]
    }
}

/// Edges visited by decreasing `|w|`, ties by ascending edge id.
pub fn mutex_watershed(g: &SignedGraph) -> Partition {
    let mut order: Vec<(f64, u32)> = g
        .edges()
        .iter()
        .map(|e| (e.signed_weight().abs(), e.id.0))
        .collect();
    order.sort_unstable_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut partition = Partition::new(g.node_count());
    let mut mutex = ConstraintSets::new(g.node_count());
    for (_, id) in order {
        let e = &g.edges()[id as usize];
        let (ru, rv) = (partition.find(e.u), partition.find(e.v));
        if ru == rv {
            continue;
        }
        if e.signed_weight() > 0.0 {
            if !mutex.excludes(ru, rv) {
                let root = partition.merge(ru, rv).expect("distinct roots");
                mutex.merge(ru, rv, root);
            }
        } else {
            mutex.add(ru, rv);
        }
    }
    partition
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeSpec;

    fn signed(n: usize, edges: &[(usize, usize, f64)]) -> SignedGraph {
        SignedGraph::new(n, edges.iter().map(|&(u, v, w)| EdgeSpec::signed(u, v, w))).unwrap()
    }

    #[test]
    fn mutex_blocks_weaker_attraction() {
        let g = signed(3, &[(0, 1, 2.0), (0, 2, -3.0), (1, 2, 1.0)]);
        assert_eq!(mutex_watershed(&g).labels(), vec![0, 0, 1]);
    }

    #[test]
    fn sign_extremes() {
        let pos = signed(4, &[(0, 1, 1.0), (1, 2, 3.0), (2, 3, 2.0)]);
        assert_eq!(mutex_watershed(&pos).cluster_count(), 1);
        let neg = signed(4, &[(0, 1, -1.0), (1, 2, -3.0), (2, 3, -2.0)]);
        assert_eq!(mutex_watershed(&neg).cluster_count(), 4);
    }

    #[test]
    fn constraints_follow_roots() {
        let mut c = ConstraintSets::new(5);
        c.add(NodeId(0), NodeId(1));
        c.add(NodeId(2), NodeId(1));
        c.add(NodeId(3), NodeId(4));
        c.merge(NodeId(0), NodeId(3), NodeId(3));
        assert!(c.excludes(NodeId(3), NodeId(1)));
        assert!(c.excludes(NodeId(1), NodeId(3)));
        assert!(c.excludes(NodeId(4), NodeId(3)));
        assert!(!c.get(NodeId(1)).contains(&0));
        assert!(c.get(NodeId(0)).is_empty());
        // symmetry
        for a in 0..5u32 {
            for &b in c.get(NodeId(a)) {
                assert!(c.get(NodeId(b)).contains(&a));
            }
        }
    }
}
