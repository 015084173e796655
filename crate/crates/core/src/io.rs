//! On-disk formats.
//!
//! Every binary file is a small JSON header at `PATH` plus a raw
//! little-endian payload in the sidecar `PATH.bin`:
//!
//! * graphs (`"sgr"`): one record per edge, `u: u64, v: u64`, then either
//!   `w_plus: f32, w_minus: f32` (`"split"`) or `w: f32` (`"signed"`), then a
//!   flags byte with bit 0 = is_local;
//! * affinities (`"aff"`): `f32` values in `[C, Z, Y, X]` C order;
//! * labels (`"labels"`): `u32` values in C order;
//!
//! Merge logs are CSV and per-edge merge iterations a bare `u32` array.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::affinity::{AffinityVolume, Offset};
use crate::engine::MergeLog;
use crate::error::{GaspError, Result};
use crate::graph::{EdgeSpec, SignedGraph};

const VERSION: u32 = 1;

/// Sidecar holding the binary payload of the file at `path`.
pub fn payload_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".bin");
    PathBuf::from(s)
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> GaspError + '_ {
    move |source| GaspError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn format_err(path: &Path, message: impl Into<String>) -> GaspError {
    GaspError::Format {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

fn payload_err(path: &Path, offset: usize, message: impl Into<String>) -> GaspError {
    GaspError::Payload {
        path: path.to_path_buf(),
        offset: offset as u64,
        message: message.into(),
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    w.write_all(bytes).and_then(|_| w.flush()).map_err(io_err(path))
}

fn write_header<H: Serialize>(path: &Path, header: &H) -> Result<()> {
    let mut text = serde_json::to_string(header).map_err(|e| format_err(path, e.to_string()))?;
    text.push('\n');
    write_file(path, text.as_bytes())
}

fn read_header<H: for<'de> Deserialize<'de>>(path: &Path, format: &str) -> Result<H> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| format_err(path, format!("invalid JSON header: {e}")))?;
    match value.get("format").and_then(|f| f.as_str()) {
        Some(f) if f == format => {}
        Some(f) => return Err(format_err(path, format!("expected format {format:?}, found {f:?}"))),
        None => return Err(format_err(path, "header has no \"format\" field")),
    }
    match value.get("version").and_then(|v| v.as_u64()) {
        Some(v) if v == u64::from(VERSION) => {}
        other => return Err(format_err(path, format!("unsupported version {other:?} (expected {VERSION})"))),
    }
    serde_json::from_value(value).map_err(|e| format_err(path, format!("invalid header: {e}")))
}

fn read_payload(path: &Path, expected: usize) -> Result<Vec<u8>> {
    let bin = payload_path(path);
    let bytes = fs::read(&bin).map_err(io_err(&bin))?;
    if bytes.len() < expected {
        return Err(payload_err(&bin, bytes.len(), format!("truncated payload, expected {expected} bytes")));
    }
    if bytes.len() > expected {
        return Err(payload_err(&bin, expected, format!("{} trailing bytes", bytes.len() - expected)));
    }
    Ok(bytes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightEncoding {
    Split,
    Signed,
}

impl WeightEncoding {
    fn record_len(self) -> usize {
        match self {
            WeightEncoding::Split => 25,
            WeightEncoding::Signed => 21,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SgrHeader {
    format: String,
    version: u32,
    nodes: u64,
    edges: u64,
    weights: WeightEncoding,
}

pub fn write_sgr(path: &Path, g: &SignedGraph, encoding: WeightEncoding) -> Result<()> {
    let mut bytes = Vec::with_capacity(g.edge_count() * encoding.record_len());
    for e in g.edges() {
        bytes.extend_from_slice(&u64::from(e.u.0).to_le_bytes());
        bytes.extend_from_slice(&u64::from(e.v.0).to_le_bytes());
        match encoding {
            WeightEncoding::Split => {
                bytes.extend_from_slice(&(e.w_plus as f32).to_le_bytes());
                bytes.extend_from_slice(&(e.w_minus as f32).to_le_bytes());
            }
            WeightEncoding::Signed => bytes.extend_from_slice(&(e.signed_weight() as f32).to_le_bytes()),
        }
        bytes.push(u8::from(e.is_local));
    }
    write_file(&payload_path(path), &bytes)?;
    write_header(
        path,
        &SgrHeader {
            format: "sgr".into(),
            version: VERSION,
            nodes: g.node_count() as u64,
            edges: g.edge_count() as u64,
            weights: encoding,
        },
    )
}

fn edge_of(err: &GaspError) -> Option<usize> {
    match *err {
        GaspError::SelfLoop { edge, .. }
        | GaspError::NodeOutOfRange { edge, .. }
        | GaspError::DuplicateEdge { edge, .. }
        | GaspError::InvalidWeight { edge, .. } => Some(edge),
        _ => None,
    }
}

pub fn read_sgr(path: &Path) -> Result<SignedGraph> {
    let h: SgrHeader = read_header(path, "sgr")?;
    let nodes = usize::try_from(h.nodes).map_err(|_| format_err(path, "node count too large"))?;
    let edges = usize::try_from(h.edges).map_err(|_| format_err(path, "edge count too large"))?;
    let rec = h.weights.record_len();
    let total = edges
        .checked_mul(rec)
        .ok_or_else(|| format_err(path, "edge count too large"))?;
    let bytes = read_payload(path, total)?;
    let bin = payload_path(path);
    let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let f32_at = |o: usize| f64::from(f32::from_le_bytes(bytes[o..o + 4].try_into().unwrap()));
    let mut specs = Vec::with_capacity(edges);
    for (i, o) in (0..total).step_by(rec).enumerate() {
        let (u, v) = (u64_at(o), u64_at(o + 8));
        if u >= h.nodes || v >= h.nodes {
            return Err(payload_err(&bin, o, format!("edge {i}: node index {} out of range", u.max(v))));
        }
        let (w_plus, w_minus, flags) = match h.weights {
            WeightEncoding::Split => (f32_at(o + 16), f32_at(o + 20), bytes[o + 24]),
            WeightEncoding::Signed => {
                let w = f32_at(o + 16);
                (w.max(0.0), (-w).max(0.0), bytes[o + 20])
            }
        };
        if flags > 1 {
            return Err(payload_err(&bin, o + rec - 1, format!("edge {i}: unknown flag bits {flags:#04x}")));
        }
        specs.push(EdgeSpec::new(u as usize, v as usize, w_plus, w_minus, flags & 1 == 1));
    }
    SignedGraph::new(nodes, specs).map_err(|e| match edge_of(&e) {
        Some(edge) => payload_err(&bin, edge * rec, e.to_string()),
        None => e,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AffHeader {
    format: String,
    version: u32,
    shape: [usize; 3],
    offsets: Vec<Offset>,
    dtype: String,
}

pub fn write_aff(path: &Path, vol: &AffinityVolume) -> Result<()> {
    let bytes: Vec<u8> = vol.data().iter().flat_map(|&p| (p as f32).to_le_bytes()).collect();
    write_file(&payload_path(path), &bytes)?;
    write_header(
        path,
        &AffHeader {
            format: "aff".into(),
            version: VERSION,
            shape: vol.shape(),
            offsets: vol.offsets().iter().map(|o| o.vector).collect(),
            dtype: "f32".into(),
        },
    )
}

pub fn read_aff(path: &Path) -> Result<AffinityVolume> {
    let h: AffHeader = read_header(path, "aff")?;
    if h.dtype != "f32" {
        return Err(format_err(path, format!("unsupported dtype {:?} (expected \"f32\")", h.dtype)));
    }
    let count = h
        .shape
        .iter()
        .try_fold(h.offsets.len(), |acc, &s| acc.checked_mul(s))
        .and_then(|c| c.checked_mul(4).map(|_| c))
        .ok_or_else(|| format_err(path, "volume too large"))?;
    let bytes = read_payload(path, count * 4)?;
    let data: Vec<f64> = bytes
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes(c.try_into().unwrap())))
        .collect();
    if let Some(i) = data.iter().position(|p| !(0.0..=1.0).contains(p)) {
        return Err(payload_err(&payload_path(path), i * 4, format!("affinity {} outside [0, 1]", data[i])));
    }
    AffinityVolume::new(h.shape, h.offsets, data).map_err(|e| format_err(path, e.to_string()))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LabelHeader {
    format: String,
    version: u32,
    shape: Vec<usize>,
    dtype: String,
}

/// A label array with its shape (`[N]` for graph nodes, `[Z, Y, X]` for volumes).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVolume {
    pub shape: Vec<usize>,
    pub labels: Vec<u32>,
}

pub fn write_labels(path: &Path, shape: &[usize], labels: &[u32]) -> Result<()> {
    if shape.iter().product::<usize>() != labels.len() {
        return Err(GaspError::ShapeMismatch(format!("{} labels for shape {shape:?}", labels.len())));
    }
    let bytes: Vec<u8> = labels.iter().flat_map(|l| l.to_le_bytes()).collect();
    write_file(&payload_path(path), &bytes)?;
    write_header(
        path,
        &LabelHeader {
            format: "labels".into(),
            version: VERSION,
            shape: shape.to_vec(),
            dtype: "u32".into(),
        },
    )
}

pub fn read_labels(path: &Path) -> Result<LabelVolume> {
    let h: LabelHeader = read_header(path, "labels")?;
    if h.dtype != "u32" {
        return Err(format_err(path, format!("unsupported dtype {:?} (expected \"u32\")", h.dtype)));
    }
    let count = h
        .shape
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .filter(|c| c.checked_mul(4).is_some())
        .ok_or_else(|| format_err(path, "volume too large"))?;
    let bytes = read_payload(path, count * 4)?;
    Ok(LabelVolume {
        shape: h.shape,
        labels: bytes
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
            .collect(),
    })
}

pub fn merge_log_csv(log: &MergeLog) -> String {
    let mut out = String::from("iteration,root_a,root_b,value,size\n");
    for e in &log.events {
        out.push_str(&format!("{},{},{},{},{}\n", e.iteration, e.root_a.0, e.root_b.0, e.value, e.size));
    }
    out
}

pub fn write_merge_log(path: &Path, log: &MergeLog) -> Result<()> {
    write_file(path, merge_log_csv(log).as_bytes())
}

/// Raw `u32` array, one entry per edge; `0xFFFFFFFF` marks edges that never merged.
pub fn write_edge_merge_map(path: &Path, iterations: &[u32]) -> Result<()> {
    let bytes: Vec<u8> = iterations.iter().flat_map(|i| i.to_le_bytes()).collect();
    write_file(path, &bytes)
}

pub fn read_edge_merge_map(path: &Path) -> Result<Vec<u32>> {
    let bytes = fs::read(path).map_err(io_err(path))?;
    if bytes.len() % 4 != 0 {
        return Err(payload_err(path, bytes.len() - bytes.len() % 4, "length is not a multiple of 4"));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|c| u32::from_le_bytes(c.try_into().unwrap()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{gasp, GaspOptions, NEVER_MERGED};
    use crate::graph::EdgeId;
    use crate::linkage::LinkageRule;

    fn triangle() -> SignedGraph {
        SignedGraph::new(
            3,
            [
                EdgeSpec::signed(0, 1, 2.0),
                EdgeSpec::new(1, 2, 1.5, 0.5, false),
                EdgeSpec::signed(0, 2, -1.5),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sgr_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.sgr");
        let g = triangle();
        write_sgr(&path, &g, WeightEncoding::Split).unwrap();
        assert_eq!(fs::metadata(payload_path(&path)).unwrap().len(), 75);
        assert_eq!(read_sgr(&path).unwrap().edges(), g.edges());

        write_sgr(&path, &g, WeightEncoding::Signed).unwrap();
        let back = read_sgr(&path).unwrap();
        assert_eq!(back.signed_weights(), g.signed_weights());
        assert_eq!((back.edge(EdgeId(1)).w_plus, back.edge(EdgeId(1)).w_minus), (1.0, 0.0));
        assert!(!back.edge(EdgeId(1)).is_local);
    }

    #[test]
    fn sgr_diagnostics() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.sgr");
        write_sgr(&path, &triangle(), WeightEncoding::Split).unwrap();

        let mut bytes = fs::read(payload_path(&path)).unwrap();
        bytes[25..33].copy_from_slice(&7u64.to_le_bytes());
        fs::write(payload_path(&path), &bytes).unwrap();
        match read_sgr(&path) {
            Err(GaspError::Payload { offset, .. }) => assert_eq!(offset, 25),
            other => panic!("{other:?}"),
        }

        bytes[25..33].copy_from_slice(&0u64.to_le_bytes());
        bytes[33..41].copy_from_slice(&1u64.to_le_bytes());
        fs::write(payload_path(&path), &bytes).unwrap();
        match read_sgr(&path) {
            Err(GaspError::Payload { offset, message, .. }) => {
                assert_eq!(offset, 25);
                assert!(message.contains("duplicate"));
            }
            other => panic!("{other:?}"),
        }

        fs::write(payload_path(&path), &bytes[..60]).unwrap();
        assert!(matches!(read_sgr(&path), Err(GaspError::Payload { offset: 60, .. })));

        fs::write(&path, "{\"format\":\"sgr\",\"version\":2}").unwrap();
        assert!(matches!(read_sgr(&path), Err(GaspError::Format { .. })));
        fs::write(&path, "not json").unwrap();
        let err = read_sgr(&path).unwrap_err().to_string();
        assert!(err.contains("g.sgr") && err.contains("line 1"), "{err}");
    }

    #[test]
    fn aff_and_label_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.aff");
        let vol = AffinityVolume::new([1, 2, 2], vec![[0, 0, 1], [0, 1, 0]], vec![0.0, 0.25, 0.5, 1.0, 0.75, 0.5, 0.25, 0.0]).unwrap();
        write_aff(&path, &vol).unwrap();
        assert_eq!(read_aff(&path).unwrap(), vol);
        assert!(matches!(read_labels(&path), Err(GaspError::Format { .. })));

        let lpath = dir.path().join("l.lbl");
        write_labels(&lpath, &[2, 2], &[3, 1, 4, 1]).unwrap();
        let back = read_labels(&lpath).unwrap();
        assert_eq!((back.shape, back.labels), (vec![2, 2], vec![3, 1, 4, 1]));
        assert!(write_labels(&lpath, &[3], &[1]).is_err());
    }

    #[test]
    fn merge_log_exports() {
        let out = gasp(&triangle(), &GaspOptions::new(LinkageRule::Average), None).unwrap();
        let log = out.log;
        let csv = merge_log_csv(&log);
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("iteration,root_a,root_b,value,size"));
        assert_eq!(lines.next(), Some("1,0,1,2,2"));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.bin");
        write_edge_merge_map(&path, &log.edge_merge_iteration).unwrap();
        let map = read_edge_merge_map(&path).unwrap();
        assert_eq!(map, log.edge_merge_iteration);
        assert_eq!(map[0], 1);
        assert!(map.contains(&NEVER_MERGED));
    }
}
