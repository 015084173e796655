//! C ABI for the gasp engine.
//!
//! Graphs and results are opaque handles owned by the caller and released
//! with the matching `*_free` function. Every fallible call returns a
//! [`GaspStatus`]; on failure a message is available from
//! [`gasp_last_error_message`] on the same thread until the next call.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;
use std::slice;

use gasp::metrics::evaluate;
use gasp::{gasp as run_gasp, mutex_watershed, EdgeSpec, GaspError, GaspOptions, LinkageRule, Partition, SignedGraph};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaspStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    InvalidGraph = 3,
    Io = 4,
    Format = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaspRule {
    Sum = 0,
    AbsMax = 1,
    Average = 2,
    Max = 3,
    Min = 4,
}

fn rule_from_raw(raw: u32) -> Result<LinkageRule, (GaspStatus, String)> {
    Ok(match raw {
        x if x == GaspRule::Sum as u32 => LinkageRule::Sum,
        x if x == GaspRule::AbsMax as u32 => LinkageRule::AbsMax,
        x if x == GaspRule::Average as u32 => LinkageRule::Average,
        x if x == GaspRule::Max as u32 => LinkageRule::Max,
        x if x == GaspRule::Min as u32 => LinkageRule::Min,
        _ => return Err((GaspStatus::InvalidArgument, format!("unknown rule {raw}"))),
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct GaspRunOptions {
    /// One of the `GaspRule` values.
    pub rule: u32,
    pub cannot_link_constraints: bool,
    pub enforce_local_merge: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct GaspScores {
    pub vi_split: f64,
    pub vi_merge: f64,
    pub adapted_rand: f64,
    pub combined: f64,
}

/// Opaque graph handle.
pub struct GaspGraph(SignedGraph);

/// Opaque clustering result.
pub struct GaspResult {
    labels: Vec<u32>,
    cluster_count: usize,
    merges: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(e: &GaspError) -> GaspStatus {
    match e {
        GaspError::Io { .. } => GaspStatus::Io,
        GaspError::Format { .. } | GaspError::Payload { .. } => GaspStatus::Format,
        GaspError::SelfLoop { .. }
        | GaspError::NodeOutOfRange { .. }
        | GaspError::DuplicateEdge { .. }
        | GaspError::InvalidWeight { .. } => GaspStatus::InvalidGraph,
        _ => GaspStatus::InvalidArgument,
    }
}

/// Runs `f`, turning errors and panics into a status plus the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), (GaspStatus, String)>) -> GaspStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GaspStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            GaspStatus::Panic
        }
    }
}

fn lib_err(e: GaspError) -> (GaspStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (GaspStatus, String) {
    (GaspStatus::NullPointer, format!("{what} is null"))
}

unsafe fn input<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], (GaspStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), (GaspStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Why the previous call on this thread failed, or NULL if it succeeded. Valid until the next call.
#[no_mangle]
pub extern "C" fn gasp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gasp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

unsafe fn edge_inputs<'a>(
    us: *const u64,
    vs: *const u64,
    is_local: *const u8,
    edge_count: usize,
) -> Result<(&'a [u64], &'a [u64], Option<&'a [u8]>), (GaspStatus, String)> {
    let us = input(us, edge_count, "us")?;
    let vs = input(vs, edge_count, "vs")?;
    let local = if is_local.is_null() {
        None
    } else {
        Some(input(is_local, edge_count, "is_local")?)
    };
    Ok((us, vs, local))
}

fn node_index(x: u64) -> Result<usize, (GaspStatus, String)> {
    usize::try_from(x).map_err(|_| (GaspStatus::InvalidGraph, format!("node index {x} too large")))
}

/// Graph from attractive and repulsive weight arrays of length `edge_count`.
/// `is_local` may be NULL (all edges local).
#[no_mangle]
pub unsafe extern "C" fn gasp_graph_new(
    node_count: usize,
    edge_count: usize,
    us: *const u64,
    vs: *const u64,
    w_plus: *const f64,
    w_minus: *const f64,
    is_local: *const u8,
    out: *mut *mut GaspGraph,
) -> GaspStatus {
    guard(|| {
        let (us, vs, local) = edge_inputs(us, vs, is_local, edge_count)?;
        let wp = input(w_plus, edge_count, "w_plus")?;
        let wm = input(w_minus, edge_count, "w_minus")?;
        let specs = (0..edge_count)
            .map(|i| {
                Ok(EdgeSpec::new(
                    node_index(us[i])?,
                    node_index(vs[i])?,
                    wp[i],
                    wm[i],
                    local.map_or(true, |l| l[i] != 0),
                ))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let g = SignedGraph::new(node_count, specs).map_err(lib_err)?;
        store(out, GaspGraph(g))
    })
}

/// Graph from signed weights `w = w_plus - w_minus`.
#[no_mangle]
pub unsafe extern "C" fn gasp_graph_new_signed(
    node_count: usize,
    edge_count: usize,
    us: *const u64,
    vs: *const u64,
    weights: *const f64,
    is_local: *const u8,
    out: *mut *mut GaspGraph,
) -> GaspStatus {
    guard(|| {
        let (us, vs, local) = edge_inputs(us, vs, is_local, edge_count)?;
        let w = input(weights, edge_count, "weights")?;
        let specs = (0..edge_count)
            .map(|i| {
                Ok(EdgeSpec {
                    is_local: local.map_or(true, |l| l[i] != 0),
                    ..EdgeSpec::signed(node_index(us[i])?, node_index(vs[i])?, w[i])
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let g = SignedGraph::new(node_count, specs).map_err(lib_err)?;
        store(out, GaspGraph(g))
    })
}

/// Loads a graph file (JSON header at `path`, payload at `path.bin`).
#[no_mangle]
pub unsafe extern "C" fn gasp_graph_load(path: *const c_char, out: *mut *mut GaspGraph) -> GaspStatus {
    guard(|| {
        if path.is_null() {
            return Err(null("path"));
        }
        let path = CStr::from_ptr(path)
            .to_str()
            .map_err(|_| (GaspStatus::InvalidArgument, "path is not valid UTF-8".to_string()))?;
        let g = gasp::io::read_sgr(Path::new(path)).map_err(lib_err)?;
        store(out, GaspGraph(g))
    })
}

/// Number of nodes, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn gasp_graph_node_count(graph: *const GaspGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.node_count())
}

/// Number of edges, or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn gasp_graph_edge_count(graph: *const GaspGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.edge_count())
}

#[no_mangle]
pub unsafe extern "C" fn gasp_graph_free(graph: *mut GaspGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

fn result_of(p: &Partition, merges: usize) -> GaspResult {
    GaspResult {
        labels: p.labels(),
        cluster_count: p.cluster_count(),
        merges,
    }
}

/// Partitions `graph`. `options` may be NULL (average linkage, no constraints).
#[no_mangle]
pub unsafe extern "C" fn gasp_run(
    graph: *const GaspGraph,
    options: *const GaspRunOptions,
    out: *mut *mut GaspResult,
) -> GaspStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let opts = match options.as_ref() {
            Some(o) => GaspOptions::new(rule_from_raw(o.rule)?)
                .with_constraints(o.cannot_link_constraints)
                .with_local_merge(o.enforce_local_merge),
            None => GaspOptions::default(),
        };
        let agg = run_gasp(&g.0, &opts.with_merge_log(false), None).map_err(lib_err)?;
        store(out, result_of(&agg.partition, agg.counters.merges as usize))
    })
}

/// Mutex Watershed; same partition as absolute-maximum linkage.
#[no_mangle]
pub unsafe extern "C" fn gasp_run_mws(graph: *const GaspGraph, out: *mut *mut GaspResult) -> GaspStatus {
    guard(|| {
        let g = graph.as_ref().ok_or_else(|| null("graph"))?;
        let p = mutex_watershed(&g.0);
        let merges = g.0.node_count() - p.cluster_count();
        store(out, result_of(&p, merges))
    })
}

/// Number of labels (graph nodes), or 0 for NULL.
#[no_mangle]
pub unsafe extern "C" fn gasp_result_len(result: *const GaspResult) -> usize {
    result.as_ref().map_or(0, |r| r.labels.len())
}

#[no_mangle]
pub unsafe extern "C" fn gasp_result_cluster_count(result: *const GaspResult) -> usize {
    result.as_ref().map_or(0, |r| r.cluster_count)
}

#[no_mangle]
pub unsafe extern "C" fn gasp_result_merge_count(result: *const GaspResult) -> usize {
    result.as_ref().map_or(0, |r| r.merges)
}

/// Copies the dense labels (0..cluster_count) into `buf`, which must hold `gasp_result_len` entries.
#[no_mangle]
pub unsafe extern "C" fn gasp_result_labels(result: *const GaspResult, buf: *mut u32, len: usize) -> GaspStatus {
    guard(|| {
        let r = result.as_ref().ok_or_else(|| null("result"))?;
        if len < r.labels.len() {
            return Err((
                GaspStatus::BufferTooSmall,
                format!("buffer holds {len} labels, result has {}", r.labels.len()),
            ));
        }
        if r.labels.is_empty() {
            return Ok(());
        }
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(r.labels.as_ptr(), buf, r.labels.len());
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn gasp_result_free(result: *mut GaspResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Scores `seg` against `gt` (both `len` labels). Ground-truth voxels equal to
/// `ignore_label` are skipped unless `ignore_label` is negative.
#[no_mangle]
pub unsafe extern "C" fn gasp_eval(
    seg: *const u32,
    gt: *const u32,
    len: usize,
    ignore_label: i64,
    out: *mut GaspScores,
) -> GaspStatus {
    guard(|| {
        let seg = input(seg, len, "seg")?;
        let gt = input(gt, len, "gt")?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let ignore = if ignore_label < 0 {
            None
        } else {
            Some(u32::try_from(ignore_label).map_err(|_| (GaspStatus::InvalidArgument, format!("ignore label {ignore_label} too large")))?)
        };
        let s = evaluate(seg, gt, ignore).map_err(lib_err)?;
        *out = GaspScores {
            vi_split: s.vi_split,
            vi_merge: s.vi_merge,
            adapted_rand: s.adapted_rand,
            combined: s.combined,
        };
        Ok(())
    })
}
