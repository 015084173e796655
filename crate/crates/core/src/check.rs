//! Randomized cross-checks of the engine against the reference oracles.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{random_connected_positive, random_graph, WeightDist};
use crate::engine::{gasp, GaspOptions, MergeLog};
use crate::error::Result;
use crate::graph::SignedGraph;
use crate::linkage::LinkageRule;
use crate::mws::mutex_watershed;
use crate::oracle::{gasp_reference, hac_reference};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckConfig {
    pub graphs: usize,
    pub max_nodes: usize,
    pub seed: u64,
    /// Only connected positive graphs, compared against classic HAC.
    pub positive: bool,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            graphs: 200,
            max_nodes: 40,
            seed: 0,
            positive: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Divergence {
    pub graph: usize,
    pub variant: String,
    pub edges: Vec<(u32, u32, f64)>,
    pub engine: MergeLog,
    pub reference: MergeLog,
    pub engine_labels: Vec<u32>,
    pub reference_labels: Vec<u32>,
}

fn write_log(f: &mut fmt::Formatter<'_>, name: &str, log: &MergeLog) -> fmt::Result {
    writeln!(f, "  {name} merge log (iteration,root_a,root_b,value,size):")?;
    for e in &log.events {
        writeln!(f, "    {},{},{},{},{}", e.iteration, e.root_a.0, e.root_b.0, e.value, e.size)?;
    }
    Ok(())
}

impl fmt::Display for Divergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "divergence on graph {} ({})", self.graph, self.variant)?;
        writeln!(f, "  edges (u,v,w): {:?}", self.edges)?;
        writeln!(f, "  engine labels:    {:?}", self.engine_labels)?;
        writeln!(f, "  reference labels: {:?}", self.reference_labels)?;
        write_log(f, "engine", &self.engine)?;
        write_log(f, "reference", &self.reference)
    }
}

#[derive(Debug, Clone, Default)]
pub struct CheckReport {
    pub graphs: usize,
    pub comparisons: usize,
    pub divergences: Vec<Divergence>,
}

/// Same merges in the same order; values agree to `1e-9` relative.
pub fn logs_match(a: &MergeLog, b: &MergeLog) -> bool {
    a.events.len() == b.events.len()
        && a.events.iter().zip(&b.events).all(|(x, y)| {
            (x.root_a, x.root_b, x.size) == (y.root_a, y.root_b, y.size)
                && (x.value - y.value).abs() <= 1e-9 * x.value.abs().max(y.value.abs()).max(1.0)
        })
}

/// The graph for index `i` of a corpus.
pub fn corpus_graph(cfg: &CheckConfig, i: usize) -> SignedGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(crate::seed::hash_words(&[cfg.seed, i as u64]));
    let n = rng.gen_range(1..=cfg.max_nodes.max(1));
    if cfg.positive {
        let extra = rng.gen_range(0.0..0.3);
        return random_connected_positive(&mut rng, n, extra);
    }
    let density = rng.gen_range(0.05..0.6);
    let dist = if i % 2 == 0 {
        WeightDist::Integers(3)
    } else {
        WeightDist::Uniform
    };
    random_graph(&mut rng, n, density, dist)
}

pub fn run_check(cfg: &CheckConfig) -> Result<CheckReport> {
    let mut report = CheckReport {
        graphs: cfg.graphs,
        ..CheckReport::default()
    };
    for i in 0..cfg.graphs {
        let g = corpus_graph(cfg, i);
        let edges: Vec<(u32, u32, f64)> = g.edges().iter().map(|e| (e.u.0, e.v.0, e.signed_weight())).collect();
        let mut record = |variant: String, engine: MergeLog, reference: MergeLog, el: Vec<u32>, rl: Vec<u32>, same: bool| {
            report.comparisons += 1;
            if !same {
                report.divergences.push(Divergence {
                    graph: i,
                    variant,
                    edges: edges.clone(),
                    engine,
                    reference,
                    engine_labels: el,
                    reference_labels: rl,
                });
            }
        };
        if cfg.positive {
            for rule in [LinkageRule::Average, LinkageRule::Max, LinkageRule::Min, LinkageRule::Sum] {
                let out = gasp(&g, &GaspOptions::new(rule), None)?;
                let hac = hac_reference(&g, rule)?;
                let labels = out.partition.labels();
                let same = logs_match(&out.log, &hac) && out.partition.cluster_count() == 1;
                record(format!("{rule} vs HAC"), out.log, hac, labels, vec![0; g.node_count()], same);
            }
            continue;
        }
        for rule in LinkageRule::ALL {
            for constraints in [false, true] {
                let opts = GaspOptions::new(rule).with_constraints(constraints);
                let out = gasp(&g, &opts, None)?;
                let reference = gasp_reference(&g, &opts, None)?;
                let same = out.partition == reference.partition && logs_match(&out.log, &reference.log);
                record(
                    format!("{rule}, constraints={constraints}"),
                    out.log,
                    reference.log,
                    out.partition.labels(),
                    reference.partition.labels(),
                    same,
                );
            }
        }
        let constrained = gasp(&g, &GaspOptions::new(LinkageRule::AbsMax).with_constraints(true), None)?;
        let free = gasp(&g, &GaspOptions::new(LinkageRule::AbsMax), None)?;
        let mws = mutex_watershed(&g);
        let same = mws == constrained.partition;
        record(
            "mutex watershed vs absmax with constraints".into(),
            MergeLog::default(),
            constrained.log.clone(),
            mws.labels(),
            constrained.partition.labels(),
            same,
        );
        let same = free.partition == constrained.partition;
        record(
            "absmax without vs with constraints".into(),
            free.log,
            constrained.log,
            free.partition.labels(),
            constrained.partition.labels(),
            same,
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_corpora_agree() {
        let report = run_check(&CheckConfig {
            graphs: 40,
            max_nodes: 15,
            seed: 1,
            positive: false,
        })
        .unwrap();
        assert_eq!(report.comparisons, 40 * 12);
        assert!(report.divergences.is_empty(), "{}", report.divergences[0]);
        let report = run_check(&CheckConfig {
            graphs: 20,
            max_nodes: 15,
            seed: 1,
            positive: true,
        })
        .unwrap();
        assert!(report.divergences.is_empty(), "{}", report.divergences[0]);
    }

    #[test]
    fn corpus_is_reproducible() {
        let cfg = CheckConfig::default();
        assert_eq!(corpus_graph(&cfg, 5).edges(), corpus_graph(&cfg, 5).edges());
    }
}
