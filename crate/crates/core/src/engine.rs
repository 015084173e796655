//! Agglomeration by edge contraction over a signed graph.
//!
//! Clusters start as single nodes (or as the clusters of an initial
//! partition). Every contracted edge sits in an addressable max-heap keyed by
//! the absolute value of its interaction. Popping an edge either merges its
//! two clusters (positive interaction, mergeable, local if required) or
//! *retires* it: the edge leaves the heap but keeps its statistic in the
//! contracted adjacency. A retired edge only returns to the heap when a later
//! merge folds it together with a parallel edge.
//!
//! With cannot-link constraints enabled, retiring a non-positive edge also
//! clears its `can_be_merged` flag, and the flag is AND-ed into every
//! statistic the edge is later folded into.

use rustc_hash::FxHashMap;

use crate::error::{GaspError, Result};
use crate::graph::{NodeId, SignedGraph};
use crate::heap::AddressableHeap;
use crate::linkage::{combine, init_stat, EdgeStat, LinkageRule};
use crate::partition::Partition;

/// Marker in [`MergeLog::edge_merge_iteration`] for edges whose endpoints never joined.
pub const NEVER_MERGED: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaspOptions {
    pub rule: LinkageRule,
    pub add_cannot_link_constraints: bool,
    /// Only merge through edges that contain at least one local (grid-adjacent) original edge.
    pub enforce_local_merge: bool,
    pub record_merge_log: bool,
    /// Keep a folded edge retired if either of its parts was retired. Not the default semantics.
    pub strict_retirement: bool,
}

impl GaspOptions {
    pub fn new(rule: LinkageRule) -> Self {
        GaspOptions {
            rule,
            add_cannot_link_constraints: false,
            enforce_local_merge: false,
            record_merge_log: true,
            strict_retirement: false,
        }
    }

    pub fn with_constraints(mut self, on: bool) -> Self {
        self.add_cannot_link_constraints = on;
        self
    }

    pub fn with_local_merge(mut self, on: bool) -> Self {
        self.enforce_local_merge = on;
        self
    }

    pub fn with_merge_log(mut self, on: bool) -> Self {
        self.record_merge_log = on;
        self
    }
}

impl Default for GaspOptions {
    fn default() -> Self {
        GaspOptions::new(LinkageRule::Average)
    }
}

/// One merge. Clusters are named by their smallest node id, `root_a < root_b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeEvent {
    /// 1-based merge ordinal.
    pub iteration: u32,
    pub root_a: NodeId,
    pub root_b: NodeId,
    pub value: f64,
    /// Size of the merged cluster.
    pub size: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MergeLog {
    pub events: Vec<MergeEvent>,
    /// Per original edge: merge ordinal at which its endpoints joined one cluster,
    /// 0 if they started in the same initial cluster, [`NEVER_MERGED`] otherwise.
    pub edge_merge_iteration: Vec<u32>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EngineCounters {
    pub pushes: u64,
    pub pops: u64,
    pub merges: u64,
    pub retirements: u64,
    /// Folded edges pushed back although one of their parts had been retired.
    pub revivals: u64,
    /// True if some edge was retired before the final merge happened.
    pub retired_before_last_merge: bool,
}

#[derive(Debug, Clone)]
pub struct Agglomeration {
    pub partition: Partition,
    pub log: MergeLog,
    pub counters: EngineCounters,
}

/// Clusters and the statistics of the edges between them.
///
/// Each live cluster is represented by one node; contracted edges live in
/// slots (initially the original edge ids) and remember their endpoints.
#[derive(Debug, Clone)]
pub struct ContractedGraph {
    adjacency: Vec<FxHashMap<u32, u32>>,
    stats: Vec<EdgeStat>,
    ends: Vec<[u32; 2]>,
    live: Vec<bool>,
}

/// What [`ContractedGraph::update_neighbors`] did.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NeighborUpdate {
    pub folded: u32,
    pub rewired: u32,
    pub pushes: u32,
    pub revivals: u32,
}

impl ContractedGraph {
    /// Contracted graph of `g` under `initial` (singletons when `None`).
    /// Parallel edges between initial clusters are folded in ascending edge-id order.
    pub fn new(g: &SignedGraph, initial: Option<&Partition>, rule: LinkageRule) -> Self {
        let n = g.node_count();
        let m = g.edge_count();
        let mut adjacency: Vec<FxHashMap<u32, u32>> = vec![FxHashMap::default(); n];
        let mut stats = Vec::with_capacity(m);
        let mut ends = Vec::with_capacity(m);
        let rep: Vec<u32> = match initial {
            Some(p) => (0..n as u32).map(|i| p.root(NodeId(i)).0).collect(),
            None => (0..n as u32).collect(),
        };
        let mut live = vec![initial.is_none(); n];
        for &r in &rep {
            live[r as usize] = true;
        }
        for e in g.edges() {
            let slot = e.id.0;
            let stat = init_stat(e);
            stats.push(stat);
            let (a, b) = (rep[e.u.index()], rep[e.v.index()]);
            ends.push([a, b]);
            if a == b {
                continue;
            }
            match adjacency[a as usize].get(&b) {
                Some(&existing) => {
                    let folded = combine(&stats[existing as usize], &stat, rule);
                    stats[existing as usize] = folded;
                }
                None => {
                    adjacency[a as usize].insert(b, slot);
                    adjacency[b as usize].insert(a, slot);
                }
            }
        }
        ContractedGraph {
            adjacency,
            stats,
            ends,
            live,
        }
    }

    /// Heap holding every contracted edge, keyed by slot.
    pub fn seed_heap(&self) -> AddressableHeap {
        let mut heap = AddressableHeap::with_capacity(self.stats.len());
        for (a, nbrs) in self.adjacency.iter().enumerate() {
            for (&b, &slot) in nbrs {
                if (a as u32) < b {
                    let s = &self.stats[slot as usize];
                    heap.push(slot, s.priority(), s.tie_rank)
                        .expect("each slot is seeded once");
                }
            }
        }
        heap
    }

    pub fn is_live(&self, node: NodeId) -> bool {
        self.live[node.index()]
    }

    pub fn live_count(&self) -> usize {
        self.live.iter().filter(|&&l| l).count()
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.index()].len()
    }

    pub fn stat_between(&self, a: NodeId, b: NodeId) -> Option<&EdgeStat> {
        self.adjacency[a.index()]
            .get(&b.0)
            .map(|&slot| &self.stats[slot as usize])
    }

    pub fn slot_between(&self, a: NodeId, b: NodeId) -> Option<u32> {
        self.adjacency[a.index()].get(&b.0).copied()
    }

    pub fn stat(&self, slot: u32) -> &EdgeStat {
        &self.stats[slot as usize]
    }

    pub fn endpoints(&self, slot: u32) -> (NodeId, NodeId) {
        let [a, b] = self.ends[slot as usize];
        (NodeId(a), NodeId(b))
    }

    /// Neighbours of `node` with the stats of the connecting edges.
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = (NodeId, &EdgeStat)> + '_ {
        self.adjacency[node.index()]
            .iter()
            .map(|(&t, &slot)| (NodeId(t), &self.stats[slot as usize]))
    }

    /// Contracts the edge `(u, v)`: `v` disappears and its edges move to `u`.
    ///
    /// An edge to a neighbour shared by both is folded with [`combine`] and
    /// pushed with its new priority; an edge to a neighbour of `v` alone keeps
    /// its statistic and its heap state.
    pub fn update_neighbors(
        &mut self,
        heap: &mut AddressableHeap,
        u: NodeId,
        v: NodeId,
        rule: LinkageRule,
        strict_retirement: bool,
    ) -> NeighborUpdate {
        let (u, v) = (u.0, v.0);
        debug_assert!(self.live[u as usize] && self.live[v as usize] && u != v);
        let mut out = NeighborUpdate::default();
        if let Some(slot) = self.adjacency[u as usize].remove(&v) {
            self.adjacency[v as usize].remove(&u);
            heap.delete(slot);
        }
        let moved = std::mem::take(&mut self.adjacency[v as usize]);
        for (t, slot_vt) in moved {
            self.adjacency[t as usize].remove(&v);
            match self.adjacency[u as usize].get(&t).copied() {
                Some(slot_ut) => {
                    let vt_queued = heap.delete(slot_vt).is_some();
                    let ut_queued = heap.delete(slot_ut).is_some();
                    let folded = combine(
                        &self.stats[slot_ut as usize],
                        &self.stats[slot_vt as usize],
                        rule,
                    );
                    self.stats[slot_ut as usize] = folded;
                    out.folded += 1;
                    let revived = !(vt_queued && ut_queued);
                    if !(strict_retirement && revived) {
                        heap.push(slot_ut, folded.priority(), folded.tie_rank)
                            .expect("slot was just deleted");
                        out.pushes += 1;
                        if revived {
                            out.revivals += 1;
                        }
                    }
                }
                None => {
                    self.ends[slot_vt as usize] = [u, t];
                    self.adjacency[u as usize].insert(t, slot_vt);
                    self.adjacency[t as usize].insert(u, slot_vt);
                    out.rewired += 1;
                }
            }
        }
        self.live[v as usize] = false;
        out
    }
}

/// Runs the agglomeration to completion.
///
/// `initial`, when given, must cover every node of `g` and each of its
/// clusters must induce a connected subgraph.
pub fn gasp(
    g: &SignedGraph,
    opts: &GaspOptions,
    initial: Option<&Partition>,
) -> Result<Agglomeration> {
    let n = g.node_count();
    let mut partition = match initial {
        Some(p) => {
            check_initial_partition(g, p)?;
            p.clone()
        }
        None => Partition::new(n),
    };
    let mut graph = ContractedGraph::new(g, initial, opts.rule);
    let mut heap = graph.seed_heap();

    // smallest node id and size of each cluster, indexed by its representative
    let mut min_node: Vec<u32> = (0..n as u32).collect();
    let mut size = vec![1usize; n];
    if initial.is_some() {
        let mut rep_sizes = vec![0usize; n];
        for i in 0..n as u32 {
            let r = partition.root(NodeId(i)).index();
            min_node[r] = min_node[r].min(i);
            rep_sizes[r] += 1;
        }
        size = rep_sizes;
    }

    let mut counters = EngineCounters {
        pushes: heap.len() as u64,
        ..Default::default()
    };
    let mut events = Vec::new();
    let mut first_retire = None;
    let mut last_merge = None;

    while let Ok(top) = heap.pop_highest() {
        counters.pops += 1;
        let slot = top.key;
        let stat = *graph.stat(slot);
        let (a, b) = graph.endpoints(slot);
        debug_assert!(partition.find(a) != partition.find(b));
        let mergeable = stat.value > 0.0
            && stat.can_be_merged
            && (!opts.enforce_local_merge || stat.is_local);
        if !mergeable {
            if stat.value <= 0.0 && opts.add_cannot_link_constraints {
                graph.stats[slot as usize].can_be_merged = false;
            }
            counters.retirements += 1;
            first_retire.get_or_insert(counters.pops);
            continue;
        }

        // the node with more neighbours survives so that fewer edges move
        let (keep, gone) = match graph.degree(a).cmp(&graph.degree(b)) {
            std::cmp::Ordering::Less => (b, a),
            std::cmp::Ordering::Greater => (a, b),
            std::cmp::Ordering::Equal if a < b => (a, b),
            std::cmp::Ordering::Equal => (b, a),
        };
        let update = graph.update_neighbors(&mut heap, keep, gone, opts.rule, opts.strict_retirement);
        counters.pushes += update.pushes as u64;
        counters.revivals += update.revivals as u64;
        partition.merge(a, b)?;
        counters.merges += 1;
        last_merge = Some(counters.pops);

        let (ka, kb) = (min_node[keep.index()], min_node[gone.index()]);
        min_node[keep.index()] = ka.min(kb);
        size[keep.index()] += size[gone.index()];
        if opts.record_merge_log {
            events.push(MergeEvent {
                iteration: counters.merges as u32,
                root_a: NodeId(ka.min(kb)),
                root_b: NodeId(ka.max(kb)),
                value: stat.value,
                size: size[keep.index()],
            });
        }
    }
    counters.retired_before_last_merge = matches!((first_retire, last_merge), (Some(r), Some(m)) if r < m);

    let log = if opts.record_merge_log {
        let edge_merge_iteration = edge_merge_iterations(g, initial, &events);
        MergeLog {
            events,
            edge_merge_iteration,
        }
    } else {
        MergeLog::default()
    };
    Ok(Agglomeration {
        partition,
        log,
        counters,
    })
}

/// Every cluster of `p` must be a connected subgraph of `g`.
pub fn check_initial_partition(g: &SignedGraph, p: &Partition) -> Result<()> {
    if p.len() != g.node_count() {
        return Err(GaspError::PartitionSize {
            expected: g.node_count(),
            got: p.len(),
        });
    }
    let mut inside = Partition::new(g.node_count());
    for e in g.edges() {
        if p.root(e.u) == p.root(e.v) && inside.find(e.u) != inside.find(e.v) {
            inside.merge(e.u, e.v)?;
        }
    }
    if inside.cluster_count() == p.cluster_count() {
        return Ok(());
    }
    // some cluster splits into several pieces; report its smallest node
    let mut piece_of_cluster: FxHashMap<u32, u32> = FxHashMap::default();
    let mut bad = u32::MAX;
    for i in 0..g.node_count() as u32 {
        let c = p.root(NodeId(i)).0;
        let piece = inside.find(NodeId(i)).0;
        match piece_of_cluster.get(&c) {
            Some(&q) if q != piece => {
                let first = (0..=i).find(|&j| p.root(NodeId(j)).0 == c).unwrap_or(i);
                bad = bad.min(first);
            }
            Some(_) => {}
            None => {
                piece_of_cluster.insert(c, piece);
            }
        }
    }
    Err(GaspError::DisconnectedCluster(bad as usize))
}

/// Merge ordinal at which the endpoints of every edge joined.
///
/// Replays the merges on a union-by-size forest without path compression
/// where each link remembers when it was made; the join time of two nodes is
/// the latest link on the paths to their meeting point.
fn edge_merge_iterations(
    g: &SignedGraph,
    initial: Option<&Partition>,
    events: &[MergeEvent],
) -> Vec<u32> {
    let n = g.node_count();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    let mut link_time = vec![NEVER_MERGED; n];
    let mut weight = vec![1u32; n];
    fn root(parent: &[u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            x = parent[x as usize];
        }
        x
    }
    let mut link = |parent: &mut Vec<u32>, a: u32, b: u32, t: u32| {
        let (ra, rb) = (root(parent, a), root(parent, b));
        if ra == rb {
            return;
        }
        let (big, small) = if weight[ra as usize] >= weight[rb as usize] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        parent[small as usize] = big;
        link_time[small as usize] = t;
        weight[big as usize] += weight[small as usize];
    };
    if let Some(p) = initial {
        for i in 0..n as u32 {
            link(&mut parent, i, p.root(NodeId(i)).0, 0);
        }
    }
    for ev in events {
        link(&mut parent, ev.root_a.0, ev.root_b.0, ev.iteration);
    }
    g.edges()
        .iter()
        .map(|e| {
            let (mut a, mut b) = (e.u.0, e.v.0);
            let mut latest = 0;
            while a != b {
                let (ta, tb) = (link_time[a as usize], link_time[b as usize]);
                if ta == NEVER_MERGED && tb == NEVER_MERGED {
                    return NEVER_MERGED;
                }
                if ta <= tb {
                    latest = latest.max(ta);
                    a = parent[a as usize];
                } else {
                    latest = latest.max(tb);
                    b = parent[b as usize];
                }
            }
            latest
        })
        .collect()
}

/// One row of a linkage-matrix style merge tree.
///
/// Leaves are the node ids `0..n`; the cluster created by row `i` gets id `n + i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeTreeRow {
    pub a: usize,
    pub b: usize,
    pub value: f64,
    pub size: usize,
}

pub fn export_merge_tree(log: &MergeLog, node_count: usize) -> Vec<MergeTreeRow> {
    let mut uf = Partition::new(node_count);
    let mut tree_id: Vec<usize> = (0..node_count).collect();
    log.events
        .iter()
        .enumerate()
        .map(|(i, ev)| {
            let ra = uf.find(ev.root_a);
            let rb = uf.find(ev.root_b);
            let (ia, ib) = (tree_id[ra.index()], tree_id[rb.index()]);
            let r = uf
                .merge(ra, rb)
                .expect("merge log events join distinct clusters");
            tree_id[r.index()] = node_count + i;
            MergeTreeRow {
                a: ia.min(ib),
                b: ia.max(ib),
                value: ev.value,
                size: ev.size,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeSpec;

    fn signed(n: usize, edges: &[(usize, usize, f64)]) -> SignedGraph {
        SignedGraph::new(n, edges.iter().map(|&(u, v, w)| EdgeSpec::signed(u, v, w))).unwrap()
    }

    fn run(g: &SignedGraph, rule: LinkageRule, clc: bool) -> Agglomeration {
        gasp(g, &GaspOptions::new(rule).with_constraints(clc), None).unwrap()
    }

    #[test]
    fn triangle_average_keeps_node_two_apart() {
        let g = signed(3, &[(0, 1, 2.0), (1, 2, 1.0), (0, 2, -1.5)]);
        let out = run(&g, LinkageRule::Average, false);
        assert_eq!(out.partition.labels(), vec![0, 0, 1]);
        assert_eq!(out.log.events.len(), 1);
        assert_eq!(out.log.events[0].value, 2.0);
        assert_eq!(out.log.edge_merge_iteration, vec![1, NEVER_MERGED, NEVER_MERGED]);
    }

    #[test]
    fn triangle_max_merges_everything() {
        let g = signed(3, &[(0, 1, 2.0), (1, 2, 1.0), (0, 2, -1.5)]);
        let out = run(&g, LinkageRule::Max, false);
        assert_eq!(out.partition.cluster_count(), 1);
        assert_eq!(out.log.events[1].value, 1.0);
        assert_eq!(out.log.edge_merge_iteration, vec![1, 2, 2]);
    }

    #[test]
    fn sum_with_constraints_blocks_the_second_merge() {
        let g = signed(3, &[(0, 1, 2.0), (0, 2, -3.0), (1, 2, 1.0)]);
        let out = run(&g, LinkageRule::Sum, true);
        assert_eq!(out.partition.labels(), vec![0, 0, 1]);
        // unconstrained sum reaches the same clustering here: -3 + 1 < 0
        assert_eq!(run(&g, LinkageRule::Sum, false).partition.labels(), vec![0, 0, 1]);
    }

    #[test]
    fn sign_extremes() {
        let pos = signed(4, &[(0, 1, 1.0), (1, 2, 0.5), (2, 3, 2.0), (3, 0, 0.1)]);
        let neg = signed(4, &[(0, 1, -1.0), (1, 2, -0.5), (2, 3, -2.0)]);
        for rule in LinkageRule::ALL {
            for clc in [false, true] {
                assert_eq!(run(&pos, rule, clc).partition.cluster_count(), 1);
                assert_eq!(run(&neg, rule, clc).partition.cluster_count(), 4);
            }
        }
    }

    #[test]
    fn zero_weight_edges_never_merge() {
        let g = signed(2, &[(0, 1, 0.0)]);
        for rule in LinkageRule::ALL {
            assert_eq!(run(&g, rule, true).partition.cluster_count(), 2);
        }
    }

    #[test]
    fn update_neighbors_rewires_and_folds() {
        // 0-1 contracted; 2 is a common neighbour, 3 only touches 1
        let g = signed(4, &[(0, 1, 5.0), (0, 2, 1.0), (1, 2, -3.0), (1, 3, 2.0)]);
        let mut cg = ContractedGraph::new(&g, None, LinkageRule::Sum);
        let mut heap = cg.seed_heap();
        let top = heap.pop_highest().unwrap();
        assert_eq!(top.key, 0);
        let up = cg.update_neighbors(&mut heap, NodeId(0), NodeId(1), LinkageRule::Sum, false);
        assert_eq!((up.folded, up.rewired, up.pushes, up.revivals), (1, 1, 1, 0));
        assert!(!cg.is_live(NodeId(1)));
        assert_eq!(cg.stat_between(NodeId(0), NodeId(2)).unwrap().value, -2.0);
        assert_eq!(cg.stat_between(NodeId(3), NodeId(0)).unwrap().value, 2.0);
        assert!(cg.stat_between(NodeId(1), NodeId(3)).is_none());
        assert_eq!(heap.len(), 2);
        // the rewired edge kept its slot and priority
        let slot = cg.slot_between(NodeId(0), NodeId(3)).unwrap();
        assert_eq!(slot, 3);
        assert_eq!(cg.endpoints(slot), (NodeId(0), NodeId(3)));
    }

    #[test]
    fn retired_edge_is_revived_by_folding() {
        // 0-2 (-4) is popped and retired first; merging 1-2 folds it with 0-1 (+2)
        let g = signed(3, &[(0, 2, -4.0), (1, 2, 3.0), (0, 1, 2.0)]);
        let out = run(&g, LinkageRule::Sum, false);
        assert_eq!(out.partition.labels(), vec![0, 1, 1]);
        assert_eq!(out.counters.revivals, 1);
        assert_eq!(out.counters.retirements, 2);

        let mut cg = ContractedGraph::new(&g, None, LinkageRule::Sum);
        let mut heap = cg.seed_heap();
        assert_eq!(heap.pop_highest().unwrap().key, 0);
        assert_eq!(heap.pop_highest().unwrap().key, 1);
        let up = cg.update_neighbors(&mut heap, NodeId(2), NodeId(1), LinkageRule::Sum, false);
        assert_eq!((up.folded, up.pushes, up.revivals), (1, 1, 1));
        assert_eq!(cg.stat_between(NodeId(0), NodeId(2)).unwrap().value, -2.0);
        assert_eq!(heap.peek().unwrap().key, 0);

        // strict retirement keeps the folded edge out of the heap
        let mut cg = ContractedGraph::new(&g, None, LinkageRule::Sum);
        let mut heap = cg.seed_heap();
        heap.pop_highest().unwrap();
        heap.pop_highest().unwrap();
        let up = cg.update_neighbors(&mut heap, NodeId(2), NodeId(1), LinkageRule::Sum, true);
        assert_eq!((up.pushes, up.revivals), (0, 0));
        assert!(heap.is_empty());
    }

    #[test]
    fn local_merge_postpones_long_range_merges() {
        // 0-2 is a strong long-range edge; 0-1 and 1-2 are weak local ones
        let g = SignedGraph::new(
            3,
            [
                EdgeSpec::new(0, 2, 5.0, 0.0, false),
                EdgeSpec::new(0, 1, 1.0, 0.0, true),
                EdgeSpec::new(1, 2, 0.5, 0.0, true),
            ],
        )
        .unwrap();
        let opts = GaspOptions::new(LinkageRule::Average).with_local_merge(true);
        let out = gasp(&g, &opts, None).unwrap();
        assert_eq!(out.partition.cluster_count(), 1);
        let ev = &out.log.events;
        // 0-2 cannot merge first; 0-1 does, then {0,1}-2 is local and merges
        assert_eq!((ev[0].root_a, ev[0].root_b), (NodeId(0), NodeId(1)));
        assert_eq!(ev[1].value, 2.75);

        // no local connection at all: stays apart
        let g = SignedGraph::new(2, [EdgeSpec::new(0, 1, 5.0, 0.0, false)]).unwrap();
        assert_eq!(gasp(&g, &opts, None).unwrap().partition.cluster_count(), 2);
        let free = GaspOptions::new(LinkageRule::Average);
        assert_eq!(gasp(&g, &free, None).unwrap().partition.cluster_count(), 1);
    }

    #[test]
    fn initial_partition_is_checked_and_used() {
        let g = signed(4, &[(0, 1, 1.0), (1, 2, -1.0), (2, 3, 1.0), (0, 3, -0.5), (0, 2, 2.0)]);
        let bad = Partition::from_labels(&[0, 1, 1, 0]);
        assert!(gasp(&g, &GaspOptions::default(), Some(&bad)).is_ok());
        let path = signed(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let disconnected = Partition::from_labels(&[0, 1, 0]);
        assert!(matches!(
            gasp(&path, &GaspOptions::default(), Some(&disconnected)),
            Err(GaspError::DisconnectedCluster(0))
        ));
        let short = Partition::new(2);
        assert!(matches!(
            gasp(&path, &GaspOptions::default(), Some(&short)),
            Err(GaspError::PartitionSize { .. })
        ));

        // {0,1} and {2,3} pre-merged; between them: -1 (1-2), -0.5 (0-3), +2 (0-2)
        let init = Partition::from_labels(&[0, 0, 1, 1]);
        let out = gasp(&g, &GaspOptions::new(LinkageRule::Average), Some(&init)).unwrap();
        assert_eq!(out.partition.cluster_count(), 1);
        let v = out.log.events[0].value;
        assert!((v - 0.5 / 3.0).abs() < 1e-12);
        assert_eq!(out.log.events[0].size, 4);
        assert_eq!(out.log.edge_merge_iteration, vec![0, 1, 0, 1, 1]);
        let out = gasp(&g, &GaspOptions::new(LinkageRule::Min), Some(&init)).unwrap();
        assert_eq!(out.partition.cluster_count(), 2);
    }

    #[test]
    fn merge_tree_export() {
        let g = signed(3, &[(0, 1, 2.0), (1, 2, 1.0)]);
        let out = run(&g, LinkageRule::Average, false);
        let rows = export_merge_tree(&out.log, 3);
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].a, rows[0].b, rows[0].size), (0, 1, 2));
        assert_eq!((rows[1].a, rows[1].b, rows[1].size), (2, 3, 3));
        let neg = signed(3, &[(0, 1, -2.0)]);
        assert!(export_merge_tree(&run(&neg, LinkageRule::Sum, false).log, 3).is_empty());
    }

    #[test]
    fn counters_are_consistent() {
        let g = signed(5, &[(0, 1, 2.0), (1, 2, -1.0), (2, 3, 3.0), (3, 4, -2.0), (0, 4, 1.0), (1, 3, 0.5)]);
        for rule in LinkageRule::ALL {
            let out = run(&g, rule, false);
            let c = out.counters;
            assert!(c.pops <= c.pushes);
            assert_eq!(c.pops, c.merges + c.retirements);
            assert_eq!(c.merges as usize, 5 - out.partition.cluster_count());
            let repushes = c.pushes - g.edge_count() as u64;
            assert!(c.pops + c.merges <= g.edge_count() as u64 + 4 + repushes);
        }
    }
}
