//! Agglomerative partitioning of signed graphs.
//!
//! One edge-contraction algorithm, [`engine::gasp`], covers a family of
//! clustering methods: pick a [`LinkageRule`] (sum, absolute maximum,
//! average, max, min) and optionally turn on cannot-link constraints. The
//! crate also provides a fast Mutex Watershed solver for the absolute-maximum
//! case, slow reference oracles, affinity-volume ingestion for pixel/voxel
//! grid graphs, correlated-noise perturbations, and segmentation metrics.
//!
//! ```
//! use gasp::{gasp, EdgeSpec, GaspOptions, LinkageRule, SignedGraph};
//!
//! let g = SignedGraph::new(3, [
//!     EdgeSpec::signed(0, 1, 2.0),
//!     EdgeSpec::signed(1, 2, 1.0),
//!     EdgeSpec::signed(0, 2, -1.5),
//! ])?;
//! let out = gasp(&g, &GaspOptions::new(LinkageRule::Average), None)?;
//! assert_eq!(out.partition.labels(), vec![0, 0, 1]);
//! # Ok::<(), gasp::GaspError>(())
//! ```

pub mod affinity;
pub mod bench;
pub mod check;
pub mod corpus;
pub mod engine;
pub mod error;
pub mod graph;
pub mod heap;
pub mod io;
pub mod linkage;
pub mod metrics;
pub mod mws;
pub mod noise;
pub mod oracle;
pub mod partition;
pub mod seed;
pub mod synthetic;

pub use engine::{export_merge_tree, gasp, Agglomeration, GaspOptions, MergeEvent, MergeLog};
pub use error::{GaspError, Result};
pub use graph::{EdgeId, EdgeSpec, NodeId, SignedEdge, SignedGraph};
pub use linkage::{EdgeStat, LinkageRule};
pub use mws::mutex_watershed;
pub use partition::Partition;
