//! Slow reference implementations used as ground truth in tests and in the
//! `oracle-check` command.
//!
//! [`gasp_reference`] keeps one explicit record per adjacent cluster pair and
//! finds the next pair by a linear scan instead of a heap, with the same
//! retirement semantics as the engine. [`cluster_interaction`] and
//! [`hac_reference`] evaluate linkages directly on the original edges.

use std::collections::BTreeMap;

use crate::engine::{Agglomeration, EngineCounters, GaspOptions, MergeEvent, MergeLog, NEVER_MERGED};
use crate::error::{GaspError, Result};
use crate::graph::{NodeId, SignedGraph};
use crate::linkage::{combine, init_stat, EdgeStat, LinkageRule};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy)]
struct PairState {
    stat: EdgeStat,
    queued: bool,
}

fn pair(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Same contract as [`crate::engine::gasp`], in O(iterations * pairs) time.
pub fn gasp_reference(
    g: &SignedGraph,
    opts: &GaspOptions,
    initial: Option<&Partition>,
) -> Result<Agglomeration> {
    let n = g.node_count();
    if let Some(p) = initial {
        crate::engine::check_initial_partition(g, p)?;
    }
    // every cluster is named by its smallest node
    let mut cluster: Vec<usize> = match initial {
        Some(p) => {
            let labels = p.labels();
            let mut first = vec![usize::MAX; n];
            for (i, &l) in labels.iter().enumerate() {
                first[l as usize] = first[l as usize].min(i);
            }
            labels.iter().map(|&l| first[l as usize]).collect()
        }
        None => (0..n).collect(),
    };
    let mut pairs: BTreeMap<(usize, usize), PairState> = BTreeMap::new();
    for e in g.edges() {
        let (a, b) = (cluster[e.u.index()], cluster[e.v.index()]);
        if a == b {
            continue;
        }
        let stat = init_stat(e);
        pairs
            .entry(pair(a, b))
            .and_modify(|s| s.stat = combine(&s.stat, &stat, opts.rule))
            .or_insert(PairState { stat, queued: true });
    }

    let mut merge_iteration: Vec<u32> = g
        .edges()
        .iter()
        .map(|e| {
            if cluster[e.u.index()] == cluster[e.v.index()] {
                0
            } else {
                NEVER_MERGED
            }
        })
        .collect();
    let mut counters = EngineCounters {
        pushes: pairs.len() as u64,
        ..Default::default()
    };
    let mut events = Vec::new();
    let mut first_retire = None;
    let mut last_merge = None;

    loop {
        let best = pairs
            .iter()
            .filter(|(_, s)| s.queued)
            .min_by(|x, y| {
                y.1.stat
                    .priority()
                    .total_cmp(&x.1.stat.priority())
                    .then(x.1.stat.tie_rank.cmp(&y.1.stat.tie_rank))
            })
            .map(|(&k, &s)| (k, s.stat));
        let Some(((a, b), stat)) = best else { break };
        counters.pops += 1;
        pairs.get_mut(&(a, b)).expect("present").queued = false;

        let mergeable =
            stat.value > 0.0 && stat.can_be_merged && (!opts.enforce_local_merge || stat.is_local);
        if !mergeable {
            if stat.value <= 0.0 && opts.add_cannot_link_constraints {
                pairs.get_mut(&(a, b)).expect("present").stat.can_be_merged = false;
            }
            counters.retirements += 1;
            first_retire.get_or_insert(counters.pops);
            continue;
        }

        // a < b: b's members join a
        counters.merges += 1;
        last_merge = Some(counters.pops);
        let k = counters.merges as u32;
        for e in g.edges() {
            let (cu, cv) = (cluster[e.u.index()], cluster[e.v.index()]);
            if pair(cu, cv) == (a, b) {
                merge_iteration[e.id.index()] = k;
            }
        }
        let mut size = 0;
        for c in cluster.iter_mut() {
            if *c == b {
                *c = a;
            }
            if *c == a {
                size += 1;
            }
        }
        pairs.remove(&(a, b));
        let moved: Vec<_> = pairs
            .keys()
            .filter(|&&(x, y)| x == b || y == b)
            .copied()
            .collect();
        for key in moved {
            let from_b = pairs.remove(&key).expect("present");
            let t = if key.0 == b { key.1 } else { key.0 };
            let target = pair(a, t);
            match pairs.get_mut(&target) {
                Some(from_a) => {
                    let revived = !(from_a.queued && from_b.queued);
                    from_a.stat = combine(&from_a.stat, &from_b.stat, opts.rule);
                    from_a.queued = !(opts.strict_retirement && revived);
                    if from_a.queued {
                        counters.pushes += 1;
                        if revived {
                            counters.revivals += 1;
                        }
                    }
                }
                None => {
                    pairs.insert(target, from_b);
                }
            }
        }
        if opts.record_merge_log {
            events.push(MergeEvent {
                iteration: k,
                root_a: NodeId(a as u32),
                root_b: NodeId(b as u32),
                value: stat.value,
                size,
            });
        }
    }
    counters.retired_before_last_merge =
        matches!((first_retire, last_merge), (Some(r), Some(m)) if r < m);

    let labels: Vec<u32> = cluster.iter().map(|&c| c as u32).collect();
    let log = if opts.record_merge_log {
        MergeLog {
            events,
            edge_merge_iteration: merge_iteration,
        }
    } else {
        MergeLog::default()
    };
    Ok(Agglomeration {
        partition: Partition::from_labels(&labels),
        log,
        counters,
    })
}

/// Linkage closed forms over a multiset of `(signed weight, edge id)` pairs.
pub fn closed_form(rule: LinkageRule, edges: &[(f64, u32)]) -> Option<f64> {
    if edges.is_empty() {
        return None;
    }
    let weights = edges.iter().map(|&(w, _)| w);
    Some(match rule {
        LinkageRule::Sum => weights.sum(),
        LinkageRule::Average => weights.sum::<f64>() / edges.len() as f64,
        LinkageRule::Max => weights.fold(f64::NEG_INFINITY, f64::max),
        LinkageRule::Min => weights.fold(f64::INFINITY, f64::min),
        LinkageRule::AbsMax => {
            edges
                .iter()
                .min_by(|x, y| y.0.abs().total_cmp(&x.0.abs()).then(x.1.cmp(&y.1)))
                .expect("non-empty")
                .0
        }
    })
}

/// Linkage between the clusters of `a` and `b`, computed from the original edges.
pub fn cluster_interaction(
    g: &SignedGraph,
    partition: &Partition,
    a: NodeId,
    b: NodeId,
    rule: LinkageRule,
) -> Result<f64> {
    let (ra, rb) = (partition.root(a), partition.root(b));
    let between: Vec<(f64, u32)> = g
        .edges()
        .iter()
        .filter(|e| {
            let (ru, rv) = (partition.root(e.u), partition.root(e.v));
            ra != rb && ((ru == ra && rv == rb) || (ru == rb && rv == ra))
        })
        .map(|e| (e.signed_weight(), e.id.0))
        .collect();
    closed_form(rule, &between).ok_or(GaspError::NotAdjacent(a.index(), b.index()))
}

/// Classic graph-based agglomerative clustering on a connected, positively weighted graph.
///
/// Repeatedly merges the adjacent pair with the largest linkage, recomputed
/// from scratch every iteration; ties go to the pair whose smallest
/// connecting edge id is smaller. Runs until a single cluster remains.
pub fn hac_reference(g: &SignedGraph, rule: LinkageRule) -> Result<MergeLog> {
    let n = g.node_count();
    for e in g.edges() {
        if e.signed_weight() <= 0.0 {
            return Err(GaspError::NonPositiveWeight(e.id.index()));
        }
    }
    let mut cluster: Vec<usize> = (0..n).collect();
    let mut events = Vec::new();
    let mut merge_iteration = vec![NEVER_MERGED; g.edge_count()];
    for k in 1..n as u32 {
        let mut between: BTreeMap<(usize, usize), Vec<(f64, u32)>> = BTreeMap::new();
        for e in g.edges() {
            let (cu, cv) = (cluster[e.u.index()], cluster[e.v.index()]);
            if cu != cv {
                between
                    .entry(pair(cu, cv))
                    .or_default()
                    .push((e.signed_weight(), e.id.0));
            }
        }
        let rank = |edges: &[(f64, u32)]| match rule {
            LinkageRule::AbsMax => {
                let v = closed_form(rule, edges).expect("non-empty");
                edges.iter().filter(|x| x.0 == v).map(|x| x.1).min().expect("present")
            }
            _ => edges.iter().map(|x| x.1).min().expect("non-empty"),
        };
        let ((a, b), value) = between
            .iter()
            .map(|(&key, edges)| (key, closed_form(rule, edges).expect("non-empty"), rank(edges)))
            .min_by(|x, y| y.1.total_cmp(&x.1).then(x.2.cmp(&y.2)))
            .map(|(key, v, _)| (key, v))
            .ok_or(GaspError::NotConnected)?;
        for (&(x, y), edges) in &between {
            if (x, y) == (a, b) {
                for &(_, id) in edges {
                    merge_iteration[id as usize] = k;
                }
            }
        }
        let mut size = 0;
        for c in cluster.iter_mut() {
            if *c == b {
                *c = a;
            }
            if *c == a {
                size += 1;
            }
        }
        events.push(MergeEvent {
            iteration: k,
            root_a: NodeId(a as u32),
            root_b: NodeId(b as u32),
            value,
            size,
        });
    }
    Ok(MergeLog {
        events,
        edge_merge_iteration: merge_iteration,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::gasp;
    use crate::graph::EdgeSpec;

    fn signed(n: usize, edges: &[(usize, usize, f64)]) -> SignedGraph {
        SignedGraph::new(n, edges.iter().map(|&(u, v, w)| EdgeSpec::signed(u, v, w))).unwrap()
    }

    #[test]
    fn triangles_agree_with_engine() {
        let cases = [
            (vec![(0, 1, 2.0), (1, 2, 1.0), (0, 2, -1.5)], LinkageRule::Average, false, vec![0, 0, 1]),
            (vec![(0, 1, 2.0), (1, 2, 1.0), (0, 2, -1.5)], LinkageRule::Max, false, vec![0, 0, 0]),
            (vec![(0, 1, 2.0), (0, 2, -3.0), (1, 2, 1.0)], LinkageRule::Sum, true, vec![0, 0, 1]),
        ];
        for (edges, rule, clc, expected) in cases {
            let g = signed(3, &edges);
            let opts = GaspOptions::new(rule).with_constraints(clc);
            let reference = gasp_reference(&g, &opts, None).unwrap();
            let engine = gasp(&g, &opts, None).unwrap();
            assert_eq!(reference.partition.labels(), expected);
            assert_eq!(engine.partition.labels(), expected);
            assert_eq!(reference.log, engine.log);
        }
    }

    #[test]
    fn trivial_graphs() {
        let pos = signed(3, &[(0, 1, 1.0), (1, 2, 1.0)]);
        let empty = SignedGraph::new(3, Vec::<EdgeSpec>::new()).unwrap();
        for rule in LinkageRule::ALL {
            let opts = GaspOptions::new(rule);
            assert_eq!(gasp_reference(&pos, &opts, None).unwrap().partition.cluster_count(), 1);
            assert_eq!(gasp_reference(&empty, &opts, None).unwrap().partition.cluster_count(), 3);
        }
    }

    #[test]
    fn cluster_interaction_closed_forms() {
        // clusters {0} and {1, 2}; edges 0-1 (+1) and 0-2 (-1.5)
        let g = signed(3, &[(0, 1, 1.0), (0, 2, -1.5), (1, 2, 4.0)]);
        let mut p = Partition::new(3);
        p.merge(NodeId(1), NodeId(2)).unwrap();
        let at = |rule| cluster_interaction(&g, &p, NodeId(0), NodeId(2), rule).unwrap();
        assert_eq!(at(LinkageRule::Sum), -0.5);
        assert_eq!(at(LinkageRule::Average), -0.25);
        assert_eq!(at(LinkageRule::AbsMax), -1.5);
        assert_eq!(at(LinkageRule::Max), 1.0);
        assert_eq!(at(LinkageRule::Min), -1.5);

        let single = signed(2, &[(0, 1, 3.0)]);
        let p = Partition::new(2);
        for rule in LinkageRule::ALL {
            assert_eq!(cluster_interaction(&single, &p, NodeId(0), NodeId(1), rule).unwrap(), 3.0);
        }
        let apart = signed(3, &[(0, 1, 3.0)]);
        assert!(matches!(
            cluster_interaction(&apart, &Partition::new(3), NodeId(0), NodeId(2), LinkageRule::Sum),
            Err(GaspError::NotAdjacent(0, 2))
        ));
    }

    #[test]
    fn hac_on_path_and_star() {
        let path = signed(3, &[(0, 1, 5.0), (1, 2, 3.0)]);
        let log = hac_reference(&path, LinkageRule::Average).unwrap();
        let got: Vec<_> = log.events.iter().map(|e| (e.root_a.0, e.root_b.0, e.value)).collect();
        assert_eq!(got, vec![(0, 1, 5.0), (0, 2, 3.0)]);

        let two = signed(2, &[(0, 1, 0.5)]);
        assert_eq!(hac_reference(&two, LinkageRule::Min).unwrap().events.len(), 1);

        // equal weights: merges follow edge ids
        let star = signed(5, &[(0, 3, 1.0), (0, 1, 1.0), (0, 4, 1.0), (0, 2, 1.0)]);
        for rule in [LinkageRule::Average, LinkageRule::Max, LinkageRule::Min, LinkageRule::Sum] {
            let log = hac_reference(&star, rule).unwrap();
            let order: Vec<_> = log.events.iter().map(|e| e.root_b.0).collect();
            assert_eq!(order, vec![3, 1, 4, 2]);
            let engine = gasp(&star, &GaspOptions::new(rule), None).unwrap();
            let engine_order: Vec<_> = engine.log.events.iter().map(|e| e.root_b.0).collect();
            assert_eq!(engine_order, order);
        }
    }

    #[test]
    fn hac_rejects_bad_inputs() {
        let signed_graph = signed(2, &[(0, 1, -0.5)]);
        assert!(matches!(
            hac_reference(&signed_graph, LinkageRule::Sum),
            Err(GaspError::NonPositiveWeight(0))
        ));
        let split = signed(3, &[(0, 1, 0.5)]);
        assert!(matches!(
            hac_reference(&split, LinkageRule::Sum),
            Err(GaspError::NotConnected)
        ));
    }
}
