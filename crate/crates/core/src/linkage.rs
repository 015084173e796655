//! Linkage criteria and their pairwise update rules.
//!
//! A contracted edge aggregates every original edge running between two
//! clusters into an [`EdgeStat`]. When two clusters merge, the two stats
//! they hold towards a common neighbour are folded with [`combine`], which
//! reproduces the linkage evaluated over the union of original edges without
//! revisiting them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::GaspError;
use crate::graph::SignedEdge;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkageRule {
    Sum,
    AbsMax,
    Average,
    Max,
    Min,
}

impl LinkageRule {
    pub const ALL: [LinkageRule; 5] = [
        LinkageRule::Sum,
        LinkageRule::AbsMax,
        LinkageRule::Average,
        LinkageRule::Max,
        LinkageRule::Min,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LinkageRule::Sum => "sum",
            LinkageRule::AbsMax => "absmax",
            LinkageRule::Average => "average",
            LinkageRule::Max => "max",
            LinkageRule::Min => "min",
        }
    }
}

impl fmt::Display for LinkageRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LinkageRule {
    type Err = GaspError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sum" => Ok(LinkageRule::Sum),
            "absmax" => Ok(LinkageRule::AbsMax),
            "average" => Ok(LinkageRule::Average),
            "max" => Ok(LinkageRule::Max),
            "min" => Ok(LinkageRule::Min),
            _ => Err(GaspError::UnknownRule(s.to_string())),
        }
    }
}

/// Aggregate interaction carried by a contracted edge.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeStat {
    /// Current interaction; for `Average` this is already the mean.
    pub value: f64,
    /// Number of original edges folded into this stat.
    pub count: u64,
    pub is_local: bool,
    pub can_be_merged: bool,
    /// Heap tie-breaker. The smallest constituent original-edge id, except for
    /// `AbsMax`, which keeps the id of the edge whose weight it reports.
    pub tie_rank: u32,
}

impl EdgeStat {
    pub fn new(value: f64, tie_rank: u32) -> Self {
        EdgeStat {
            value,
            count: 1,
            is_local: true,
            can_be_merged: true,
            tie_rank,
        }
    }

    #[inline]
    pub fn priority(&self) -> f64 {
        self.value.abs()
    }
}

pub fn init_stat(e: &SignedEdge) -> EdgeStat {
    EdgeStat {
        value: e.signed_weight(),
        count: 1,
        is_local: e.is_local,
        can_be_merged: true,
        tie_rank: e.id.0,
    }
}

/// The update rule `f` for `rule`, plus flag and multiplicity bookkeeping.
pub fn combine(a: &EdgeStat, b: &EdgeStat, rule: LinkageRule) -> EdgeStat {
    let min_rank = a.tie_rank.min(b.tie_rank);
    let (value, tie_rank) = match rule {
        LinkageRule::Sum => (a.value + b.value, min_rank),
        LinkageRule::AbsMax => {
            let pick_a = match a.value.abs().total_cmp(&b.value.abs()) {
                std::cmp::Ordering::Greater => true,
                std::cmp::Ordering::Less => false,
                std::cmp::Ordering::Equal => (a.tie_rank, a.value) <= (b.tie_rank, b.value),
            };
            let chosen = if pick_a { a } else { b };
            (chosen.value, chosen.tie_rank)
        }
        LinkageRule::Average => {
            let total = (a.count + b.count) as f64;
            (
                (a.value * a.count as f64 + b.value * b.count as f64) / total,
                min_rank,
            )
        }
        LinkageRule::Max => (a.value.max(b.value), min_rank),
        LinkageRule::Min => (a.value.min(b.value), min_rank),
    };
    EdgeStat {
        value,
        count: a.count + b.count,
        is_local: a.is_local || b.is_local,
        can_be_merged: a.can_be_merged && b.can_be_merged,
        tie_rank,
    }
}

#[inline]
pub fn interaction_value(s: &EdgeStat) -> f64 {
    s.value
}
