//! Union-find clustering of graph nodes.

use crate::error::{GaspError, Result};
use crate::graph::NodeId;

/// Disjoint sets over `[0, n)` with union by rank and path compression.
#[derive(Debug, Clone)]
pub struct Partition {
    parent: Vec<u32>,
    rank: Vec<u8>,
    clusters: usize,
}

impl Partition {
    pub fn new(n: usize) -> Self {
        Partition {
            parent: (0..n as u32).collect(),
            rank: vec![0; n],
            clusters: n,
        }
    }

    /// Partition whose clusters are the classes of equal labels.
    pub fn from_labels(labels: &[u32]) -> Self {
        let mut p = Partition::new(labels.len());
        let mut first = rustc_hash::FxHashMap::default();
        for (i, &l) in labels.iter().enumerate() {
            match first.get(&l) {
                Some(&j) => {
                    let (a, b) = (p.find(NodeId(j)), p.find(NodeId(i as u32)));
                    if a != b {
                        p.union_roots(a.0, b.0);
                    }
                }
                None => {
                    first.insert(l, i as u32);
                }
            }
        }
        p
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters
    }

    pub fn find(&mut self, u: NodeId) -> NodeId {
        let mut root = u.0;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = u.0;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        NodeId(root)
    }

    /// Root lookup without path compression.
    pub fn root(&self, u: NodeId) -> NodeId {
        let mut root = u.0;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        NodeId(root)
    }

    pub fn same_cluster(&mut self, u: NodeId, v: NodeId) -> bool {
        self.find(u) == self.find(v)
    }

    /// Unites the clusters of `u` and `v` and returns the new root.
    pub fn merge(&mut self, u: NodeId, v: NodeId) -> Result<NodeId> {
        let (a, b) = (self.find(u), self.find(v));
        if a == b {
            return Err(GaspError::SameCluster(u.index(), v.index()));
        }
        Ok(NodeId(self.union_roots(a.0, b.0)))
    }

    fn union_roots(&mut self, a: u32, b: u32) -> u32 {
        let (ra, rb) = (self.rank[a as usize], self.rank[b as usize]);
        let root = if ra < rb {
            self.parent[a as usize] = b;
            b
        } else {
            self.parent[b as usize] = a;
            if ra == rb {
                self.rank[a as usize] += 1;
            }
            a
        };
        self.clusters -= 1;
        root
    }

    /// Cluster label per node, numbered consecutively from 0 in order of first appearance.
    pub fn labels(&self) -> Vec<u32> {
        let mut label_of_root = vec![u32::MAX; self.parent.len()];
        let mut next = 0;
        (0..self.parent.len() as u32)
            .map(|i| {
                let r = self.root(NodeId(i)).index();
                if label_of_root[r] == u32::MAX {
                    label_of_root[r] = next;
                    next += 1;
                }
                label_of_root[r]
            })
            .collect()
    }

    /// Sizes of the clusters, indexed by [`Partition::labels`].
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let labels = self.labels();
        let mut sizes = vec![0; self.clusters];
        for l in labels {
            sizes[l as usize] += 1;
        }
        sizes
    }
}

impl PartialEq for Partition {
    /// Same clustering, regardless of internal roots.
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.labels() == other.labels()
    }
}
