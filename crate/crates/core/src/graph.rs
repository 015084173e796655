//! Immutable signed graphs.
//!
//! Every edge carries an attractive weight `w_plus` and a repulsive weight
//! `w_minus`; algorithms only look at their difference, the signed weight.
//! Edge ids are dense and follow input order, and downstream tie-breaking
//! refers to them, so the order in which edges are supplied is significant.

use rustc_hash::FxHashMap;

use crate::error::{GaspError, Result};

/// Dense node index in `[0, node_count)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i as u32)
    }
}

/// Dense edge index, assigned in input order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignedEdge {
    pub id: EdgeId,
    pub u: NodeId,
    pub v: NodeId,
    pub w_plus: f64,
    pub w_minus: f64,
    pub is_local: bool,
}

impl SignedEdge {
    /// `w_plus - w_minus`: positive means attraction, negative repulsion.
    #[inline]
    pub fn signed_weight(&self) -> f64 {
        signed_weight(self.w_plus, self.w_minus)
    }
}

#[inline]
pub fn signed_weight(w_plus: f64, w_minus: f64) -> f64 {
    w_plus - w_minus
}

/// Input record for [`SignedGraph::new`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeSpec {
    pub u: usize,
    pub v: usize,
    pub w_plus: f64,
    pub w_minus: f64,
    pub is_local: bool,
}

impl EdgeSpec {
    pub fn new(u: usize, v: usize, w_plus: f64, w_minus: f64, is_local: bool) -> Self {
        EdgeSpec {
            u,
            v,
            w_plus,
            w_minus,
            is_local,
        }
    }

    /// Local edge from a single signed weight, split into its positive and negative parts.
    pub fn signed(u: usize, v: usize, w: f64) -> Self {
        EdgeSpec::new(u, v, w.max(0.0), (-w).max(0.0), true)
    }
}

impl From<(usize, usize, f64, f64, bool)> for EdgeSpec {
    fn from((u, v, w_plus, w_minus, is_local): (usize, usize, f64, f64, bool)) -> Self {
        EdgeSpec::new(u, v, w_plus, w_minus, is_local)
    }
}

#[derive(Debug, Clone)]
pub struct SignedGraph {
    node_count: usize,
    edges: Vec<SignedEdge>,
    // CSR incidence: edges incident to node i are incident[offsets[i]..offsets[i + 1]]
    offsets: Vec<usize>,
    incident: Vec<EdgeId>,
}

impl SignedGraph {
    /// Builds a simple graph. Edge ids follow the order of `edges`.
    pub fn new<I, E>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = E>,
        E: Into<EdgeSpec>,
    {
        if node_count > u32::MAX as usize {
            return Err(GaspError::param("node_count", "exceeds 2^32 - 1"));
        }
        let iter = edges.into_iter();
        let mut out = Vec::with_capacity(iter.size_hint().0);
        let mut seen: FxHashMap<(u32, u32), usize> = FxHashMap::default();
        seen.reserve(iter.size_hint().0);
        for (i, spec) in iter.enumerate() {
            let spec: EdgeSpec = spec.into();
            for node in [spec.u, spec.v] {
                if node >= node_count {
                    return Err(GaspError::NodeOutOfRange {
                        edge: i,
                        node,
                        node_count,
                    });
                }
            }
            if spec.u == spec.v {
                return Err(GaspError::SelfLoop {
                    edge: i,
                    node: spec.u,
                });
            }
            let valid = |w: f64| w.is_finite() && w >= 0.0;
            if !valid(spec.w_plus) || !valid(spec.w_minus) {
                return Err(GaspError::InvalidWeight {
                    edge: i,
                    w_plus: spec.w_plus,
                    w_minus: spec.w_minus,
                });
            }
            let key = (spec.u.min(spec.v) as u32, spec.u.max(spec.v) as u32);
            if let Some(&first) = seen.get(&key) {
                return Err(GaspError::DuplicateEdge {
                    edge: i,
                    first,
                    u: spec.u,
                    v: spec.v,
                });
            }
            seen.insert(key, i);
            out.push(SignedEdge {
                id: EdgeId(i as u32),
                u: NodeId(spec.u as u32),
                v: NodeId(spec.v as u32),
                w_plus: spec.w_plus,
                w_minus: spec.w_minus,
                is_local: spec.is_local,
            });
        }
        Ok(Self::from_validated(node_count, out))
    }

    fn from_validated(node_count: usize, edges: Vec<SignedEdge>) -> Self {
        let mut degree = vec![0usize; node_count + 1];
        for e in &edges {
            degree[e.u.index() + 1] += 1;
            degree[e.v.index() + 1] += 1;
        }
        for i in 0..node_count {
            degree[i + 1] += degree[i];
        }
        let offsets = degree;
        let mut cursor = offsets.clone();
        let mut incident = vec![EdgeId(0); 2 * edges.len()];
        for e in &edges {
            for n in [e.u, e.v] {
                incident[cursor[n.index()]] = e.id;
                cursor[n.index()] += 1;
            }
        }
        SignedGraph {
            node_count,
            edges,
            offsets,
            incident,
        }
    }

    /// Same topology with every signed weight replaced by `weights[e]`.
    pub fn with_signed_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(GaspError::ShapeMismatch(format!(
                "{} weights for {} edges",
                weights.len(),
                self.edges.len()
            )));
        }
        let edges = self
            .edges
            .iter()
            .zip(weights)
            .map(|(e, &w)| SignedEdge {
                w_plus: w.max(0.0),
                w_minus: (-w).max(0.0),
                ..*e
            })
            .collect();
        Ok(SignedGraph {
            node_count: self.node_count,
            edges,
            offsets: self.offsets.clone(),
            incident: self.incident.clone(),
        })
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn edges(&self) -> &[SignedEdge] {
        &self.edges
    }

    #[inline]
    pub fn edge(&self, id: EdgeId) -> &SignedEdge {
        &self.edges[id.index()]
    }

    /// Ids of the edges incident to `node`, in ascending id order.
    #[inline]
    pub fn incident_edges(&self, node: NodeId) -> &[EdgeId] {
        &self.incident[self.offsets[node.index()]..self.offsets[node.index() + 1]]
    }

    /// `(neighbor, edge)` pairs around `node`.
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = (NodeId, EdgeId)> + '_ {
        self.incident_edges(node).iter().map(move |&id| {
            let e = &self.edges[id.index()];
            (if e.u == node { e.v } else { e.u }, id)
        })
    }

    pub fn adjacency_len(&self) -> usize {
        self.incident.len()
    }

    pub fn signed_weights(&self) -> Vec<f64> {
        self.edges.iter().map(SignedEdge::signed_weight).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_edge_graph() {
        let g = SignedGraph::new(2, [(0, 1, 2.0, 1.0, true)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edges()[0].signed_weight(), 1.0);
        assert_eq!(g.adjacency_len(), 2);
    }

    #[test]
    fn duplicate_pair_is_rejected_in_either_orientation() {
        let err = SignedGraph::new(3, [(0, 1, 1.0, 0.0, true), (0, 1, 2.0, 0.0, true)]);
        assert!(matches!(err, Err(GaspError::DuplicateEdge { edge: 1, first: 0, .. })));
        let err = SignedGraph::new(3, [(0, 1, 1.0, 0.0, true), (1, 0, 2.0, 0.0, true)]);
        assert!(matches!(err, Err(GaspError::DuplicateEdge { .. })));
    }

    #[test]
    fn self_loop_is_rejected() {
        let err = SignedGraph::new(1, [(0, 0, 1.0, 0.0, true)]);
        assert!(matches!(err, Err(GaspError::SelfLoop { edge: 0, node: 0 })));
    }

    #[test]
    fn out_of_range_and_negative_weights() {
        assert!(matches!(
            SignedGraph::new(2, [(0, 2, 1.0, 0.0, true)]),
            Err(GaspError::NodeOutOfRange { node: 2, .. })
        ));
        assert!(matches!(
            SignedGraph::new(2, [(0, 1, -1.0, 0.0, true)]),
            Err(GaspError::InvalidWeight { .. })
        ));
        assert!(matches!(
            SignedGraph::new(2, [(0, 1, f64::NAN, 0.0, true)]),
            Err(GaspError::InvalidWeight { .. })
        ));
    }

    #[test]
    fn signed_weight_cases() {
        assert_eq!(signed_weight(2.0, 1.0), 1.0);
        assert_eq!(signed_weight(0.0, 0.0), 0.0);
        assert_eq!(signed_weight(1.0, 3.0), -2.0);
    }

    #[test]
    fn adjacency_is_consistent() {
        let g = SignedGraph::new(
            4,
            [
                EdgeSpec::signed(0, 1, 1.0),
                EdgeSpec::signed(1, 2, -1.0),
                EdgeSpec::signed(3, 1, 0.5),
            ],
        )
        .unwrap();
        assert_eq!(g.adjacency_len(), 2 * g.edge_count());
        let around_1: Vec<_> = g.neighbors(NodeId(1)).map(|(n, _)| n.0).collect();
        assert_eq!(around_1, vec![0, 2, 3]);
        assert!(g.incident_edges(NodeId(3)).iter().all(|&e| {
            let e = g.edge(e);
            e.u == NodeId(3) || e.v == NodeId(3)
        }));
    }
}
