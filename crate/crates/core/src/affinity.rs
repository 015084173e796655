//! Affinity volumes and the grid graphs built from them.
//!
//! An affinity volume stores, for every voxel `x` and channel `c`, the
//! probability that `x` and `x + offset[c]` belong to the same object
//! (0 means boundary evidence). Unit offsets are local; everything else is
//! long-range and can be subsampled when the graph is built.

use std::collections::BinaryHeap;
use std::str::FromStr;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{GaspError, Result};
use crate::graph::{EdgeSpec, NodeId, SignedGraph};
use crate::partition::Partition;
use crate::seed;

pub type Offset = [i64; 3];

/// Default clamp applied before taking logits, so that p = 0 or 1 stays finite.
pub const CLAMP_EPS: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OffsetSpec {
    pub vector: Offset,
    pub is_local: bool,
}

impl OffsetSpec {
    pub fn new(vector: Offset) -> Self {
        let l1: i64 = vector.iter().map(|c| c.abs()).sum();
        OffsetSpec {
            vector,
            is_local: l1 == 1,
        }
    }
}

/// `C x Z x Y x X` affinities, channel-major, C order.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityVolume {
    shape: [usize; 3],
    offsets: Vec<OffsetSpec>,
    data: Vec<f64>,
}

impl AffinityVolume {
    pub fn new(shape: [usize; 3], offsets: Vec<Offset>, data: Vec<f64>) -> Result<Self> {
        if shape.iter().any(|&s| s == 0) {
            return Err(GaspError::ShapeMismatch(format!("empty volume shape {shape:?}")));
        }
        let voxels = shape.iter().product::<usize>();
        if voxels > u32::MAX as usize {
            return Err(GaspError::param("shape", "more than 2^32 - 1 voxels"));
        }
        for (i, o) in offsets.iter().enumerate() {
            if *o == [0, 0, 0] {
                return Err(GaspError::param("offsets", format!("offset {i} is zero")));
            }
            let neg = [-o[0], -o[1], -o[2]];
            if let Some(j) = offsets[..i].iter().position(|p| p == o || *p == neg) {
                return Err(GaspError::param(
                    "offsets",
                    format!("offset {i} {o:?} duplicates offset {j} {:?} up to sign", offsets[j]),
                ));
            }
        }
        if data.len() != voxels * offsets.len() {
            return Err(GaspError::ShapeMismatch(format!(
                "{} values for {} channels of shape {shape:?}",
                data.len(),
                offsets.len()
            )));
        }
        if let Some(i) = data.iter().position(|p| !(0.0..=1.0).contains(p)) {
            return Err(GaspError::param(
                "affinities",
                format!("value {} at index {i} outside [0, 1]", data[i]),
            ));
        }
        Ok(AffinityVolume {
            shape,
            offsets: offsets.into_iter().map(OffsetSpec::new).collect(),
            data,
        })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn voxel_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn channels(&self) -> usize {
        self.offsets.len()
    }

    pub fn offsets(&self) -> &[OffsetSpec] {
        &self.offsets
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// `[C, Z, Y, X]`.
    pub fn full_shape(&self) -> [usize; 4] {
        [self.channels(), self.shape[0], self.shape[1], self.shape[2]]
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.voxel_count();
        &self.data[c * n..(c + 1) * n]
    }

    /// Same geometry with new values (validated).
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        AffinityVolume::new(
            self.shape,
            self.offsets.iter().map(|o| o.vector).collect(),
            data,
        )
    }

    /// Voxel reached from `voxel` by `offset`, if inside the volume.
    #[inline]
    pub fn neighbor(&self, voxel: usize, offset: Offset) -> Option<usize> {
        let [_, ny, nx] = self.shape;
        let (z, y, x) = (voxel / (ny * nx), (voxel / nx) % ny, voxel % nx);
        let coords = [z as i64 + offset[0], y as i64 + offset[1], x as i64 + offset[2]];
        if coords
            .iter()
            .zip(self.shape)
            .any(|(&c, s)| c < 0 || c >= s as i64)
        {
            return None;
        }
        Some((coords[0] as usize * ny + coords[1] as usize) * nx + coords[2] as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mapping {
    Additive,
    Logarithmic,
}

impl FromStr for Mapping {
    type Err = GaspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "additive" | "add" => Ok(Mapping::Additive),
            "log" | "logarithmic" => Ok(Mapping::Logarithmic),
            _ => Err(GaspError::param("mapping", format!("{s:?} (expected additive or log)"))),
        }
    }
}

/// How affinities become signed weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MappingSpec {
    pub mode: Mapping,
    /// Bias: larger values push towards over-segmentation.
    pub beta: f64,
    pub clamp_eps: f64,
}

impl MappingSpec {
    pub fn new(mode: Mapping, beta: f64) -> Result<Self> {
        let spec = MappingSpec {
            mode,
            beta,
            clamp_eps: CLAMP_EPS,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn additive(beta: f64) -> Result<Self> {
        MappingSpec::new(Mapping::Additive, beta)
    }

    pub fn logarithmic(beta: f64) -> Result<Self> {
        MappingSpec::new(Mapping::Logarithmic, beta)
    }

    pub fn validate(&self) -> Result<()> {
        let beta_ok = match self.mode {
            Mapping::Additive => (0.0..=1.0).contains(&self.beta),
            Mapping::Logarithmic => self.beta > 0.0 && self.beta < 1.0,
        };
        if !beta_ok {
            return Err(GaspError::param("beta", format!("{} out of range for {:?}", self.beta, self.mode)));
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return Err(GaspError::param("clamp_eps", format!("{} not in (0, 0.5)", self.clamp_eps)));
        }
        Ok(())
    }
}

#[inline]
pub fn clamp_prob(p: f64, eps: f64) -> f64 {
    p.clamp(eps, 1.0 - eps)
}

#[inline]
pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Signed weight for affinity `p`.
pub fn map_weight(p: f64, spec: &MappingSpec) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(GaspError::param("p", format!("{p} outside [0, 1]")));
    }
    Ok(match spec.mode {
        Mapping::Additive => p - spec.beta,
        Mapping::Logarithmic => logit(clamp_prob(p, spec.clamp_eps)) - logit(spec.beta),
    })
}

/// A graph over the voxels of a volume, with the source of every edge.
#[derive(Debug, Clone)]
pub struct GridGraph {
    pub graph: SignedGraph,
    /// `(voxel, channel)` each edge was read from.
    pub edge_source: Vec<(u32, u32)>,
}

/// Whether the long-range candidate `(voxel, channel)` is kept at rate `p_long`.
#[inline]
pub fn keep_long_range(seed: u64, voxel: usize, channel: usize, p_long: f64) -> bool {
    seed::unit_f64(seed::hash_words(&[seed, voxel as u64, channel as u64])) < p_long
}

/// One node per voxel (C order). Edge ids follow `(channel, voxel)` order.
pub fn build_grid_graph(
    vol: &AffinityVolume,
    spec: &MappingSpec,
    p_long: f64,
    seed: u64,
) -> Result<GridGraph> {
    spec.validate()?;
    if !(0.0..=1.0).contains(&p_long) {
        return Err(GaspError::param("p_long", format!("{p_long} outside [0, 1]")));
    }
    let n = vol.voxel_count();
    let mut edges = Vec::new();
    let mut edge_source = Vec::new();
    for (c, off) in vol.offsets().iter().enumerate() {
        let values = vol.channel(c);
        for (voxel, &p) in values.iter().enumerate() {
            let Some(other) = vol.neighbor(voxel, off.vector) else {
                continue;
            };
            if !off.is_local && !keep_long_range(seed, voxel, c, p_long) {
                continue;
            }
            let w = map_weight(p, spec)?;
            edges.push(EdgeSpec {
                is_local: off.is_local,
                ..EdgeSpec::signed(voxel, other, w)
            });
            edge_source.push((voxel as u32, c as u32));
        }
    }
    Ok(GridGraph {
        graph: SignedGraph::new(n, edges)?,
        edge_source,
    })
}

/// Mean affinity per voxel over all channels.
pub fn mean_affinity(vol: &AffinityVolume) -> Vec<f64> {
    let n = vol.voxel_count();
    let mut mean = vec![0.0; n];
    for c in 0..vol.channels() {
        for (m, &p) in mean.iter_mut().zip(vol.channel(c)) {
            *m += p;
        }
    }
    let k = vol.channels().max(1) as f64;
    mean.iter_mut().for_each(|m| *m /= k);
    mean
}

/// Connected components over local neighbours whose mean affinities both exceed `threshold`.
pub fn premerge_components(vol: &AffinityVolume, threshold: f64) -> Result<Partition> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(GaspError::param("threshold", format!("{threshold} outside [0, 1]")));
    }
    let mean = mean_affinity(vol);
    let mut p = Partition::new(vol.voxel_count());
    for off in vol.offsets().iter().filter(|o| o.is_local) {
        for (voxel, &m) in mean.iter().enumerate() {
            if m <= threshold {
                continue;
            }
            if let Some(other) = vol.neighbor(voxel, off.vector) {
                let (a, b) = (NodeId(voxel as u32), NodeId(other as u32));
                if mean[other] > threshold && p.find(a) != p.find(b) {
                    p.merge(a, b)?;
                }
            }
        }
    }
    Ok(p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Frontier {
    weight: f64,
    edge: u32,
    target: u32,
    label: u32,
}

impl Eq for Frontier {}

impl Ord for Frontier {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then_with(|| other.edge.cmp(&self.edge))
    }
}

impl PartialOrd for Frontier {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Dissolves clusters smaller than `min_size` and grows the remaining ones into them.
///
/// Growth always takes the strongest signed edge from an assigned node to an
/// unassigned one (ties: smaller edge id). Nodes that cannot be reached from a
/// large cluster keep their label; labels of large clusters never change.
pub fn filter_small_segments(labels: &[u32], g: &SignedGraph, min_size: usize) -> Result<Vec<u32>> {
    if labels.len() != g.node_count() {
        return Err(GaspError::ShapeMismatch(format!(
            "{} labels for {} nodes",
            labels.len(),
            g.node_count()
        )));
    }
    let mut sizes: FxHashMap<u32, usize> = FxHashMap::default();
    for &l in labels {
        *sizes.entry(l).or_default() += 1;
    }
    let large = |l: u32| sizes[&l] >= min_size;
    let mut assigned: Vec<bool> = labels.iter().map(|&l| large(l)).collect();
    let mut out = labels.to_vec();
    let mut heap = BinaryHeap::new();
    let push_frontier = |heap: &mut BinaryHeap<Frontier>, assigned: &[bool], node: NodeId, label: u32| {
        for (t, e) in g.neighbors(node) {
            if !assigned[t.index()] {
                heap.push(Frontier {
                    weight: g.edge(e).signed_weight(),
                    edge: e.0,
                    target: t.0,
                    label,
                });
            }
        }
    };
    for i in 0..labels.len() {
        if assigned[i] {
            push_frontier(&mut heap, &assigned, NodeId(i as u32), out[i]);
        }
    }
    while let Some(f) = heap.pop() {
        let t = f.target as usize;
        if assigned[t] {
            continue;
        }
        assigned[t] = true;
        out[t] = f.label;
        push_frontier(&mut heap, &assigned, NodeId(f.target), f.label);
    }
    Ok(out)
}
