//! Robustness sweeps: perturb affinities with correlated noise, segment with
//! every linkage rule, and score against a ground truth.

use std::fmt::Write as _;
use std::time::Instant;

use rayon::prelude::*;

use crate::affinity::{build_grid_graph, filter_small_segments, AffinityVolume, MappingSpec};
use crate::engine::{gasp, GaspOptions};
use crate::error::{GaspError, Result};
use crate::linkage::LinkageRule;
use crate::metrics::evaluate;
use crate::noise::{bias_predictions, correlated_noise, Direction, NoiseSpec};
use crate::seed;

/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "GASP_THREADS";

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub rules: Vec<LinkageRule>,
    pub k_grid: Vec<f64>,
    pub p_long: Vec<f64>,
    pub samples: usize,
    pub direction: Direction,
    pub seed: u64,
    pub mapping: MappingSpec,
    pub constraints: bool,
    pub local_merge: bool,
    /// Segments smaller than this are absorbed by their neighbours; 0 or 1 disables.
    pub min_size: usize,
    pub ignore_label: Option<u32>,
    /// Noise spacing along `[c, z, y, x]`, plus octaves and persistence; the seed is per sample.
    pub noise_scales: [f64; 4],
    pub noise_octaves: u32,
    pub noise_persistence: f64,
}

impl BenchConfig {
    pub fn new(rules: Vec<LinkageRule>, k_grid: Vec<f64>, p_long: Vec<f64>, samples: usize) -> Self {
        BenchConfig {
            rules,
            k_grid,
            p_long,
            samples,
            direction: Direction::Under,
            seed: 0,
            mapping: MappingSpec::logarithmic(0.5).expect("valid default"),
            constraints: false,
            local_merge: false,
            min_size: 200,
            ignore_label: Some(0),
            noise_scales: [2.0, 4.0, 16.0, 16.0],
            noise_octaves: 3,
            noise_persistence: 0.5,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rules.is_empty() || self.k_grid.is_empty() || self.p_long.is_empty() || self.samples == 0 {
            return Err(GaspError::param("grid", "rules, K grid, p_long grid and samples must be non-empty"));
        }
        if let Some(k) = self.k_grid.iter().find(|k| !(k.is_finite() && **k >= 0.0)) {
            return Err(GaspError::param("K", format!("{k} is not a non-negative number")));
        }
        if let Some(p) = self.p_long.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(GaspError::param("p_long", format!("{p} outside [0, 1]")));
        }
        self.mapping.validate()?;
        self.noise_spec(0).validate()
    }

    fn noise_spec(&self, seed: u64) -> NoiseSpec {
        NoiseSpec {
            scales: self.noise_scales,
            octaves: self.noise_octaves,
            persistence: self.noise_persistence,
            seed,
        }
    }
}

/// Seed of one `(K, p_long, sample)` cell. All rules share it, so their runs see the same noise and edges.
pub fn sample_seed(seed: u64, k: f64, p_long: f64, sample: usize) -> u64 {
    seed::hash_words(&[seed, k.to_bits(), p_long.to_bits(), sample as u64])
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub rule: LinkageRule,
    pub k: f64,
    pub p_long: f64,
    pub sample: usize,
    pub vi_split: f64,
    pub vi_merge: f64,
    pub adapted_rand: f64,
    pub combined: f64,
    pub cluster_count: usize,
    pub runtime_ms: f64,
}

pub const ROW_HEADER: &str = "rule,K,p_long,sample,vi_split,vi_merge,adapted_rand,combined,cluster_count,runtime_ms";

/// Worker pool honouring [`THREADS_ENV`].
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| GaspError::param("GASP_THREADS", format!("{v:?} is not a positive integer")))?;
        builder = builder.num_threads(n);
    }
    builder
        .build()
        .map_err(|e| GaspError::param("GASP_THREADS", e.to_string()))
}

/// Perturbed volume of one cell; `K = 0` returns the input unchanged.
pub fn perturbed_volume(vol: &AffinityVolume, k: f64, direction: Direction, noise: &NoiseSpec) -> Result<AffinityVolume> {
    if k == 0.0 {
        return Ok(vol.clone());
    }
    let field = correlated_noise(vol.full_shape(), noise)?;
    bias_predictions(vol, &field, k, direction)
}

fn run_cell(vol: &AffinityVolume, gt: &[u32], cfg: &BenchConfig, k: f64, p_long: f64, sample: usize) -> Result<Vec<BenchRow>> {
    let cell_seed = sample_seed(cfg.seed, k, p_long, sample);
    let noisy = perturbed_volume(vol, k, cfg.direction, &cfg.noise_spec(cell_seed))?;
    let grid = build_grid_graph(&noisy, &cfg.mapping, p_long, cell_seed)?;
    cfg.rules
        .iter()
        .map(|&rule| {
            let opts = GaspOptions::new(rule)
                .with_constraints(cfg.constraints)
                .with_local_merge(cfg.local_merge)
                .with_merge_log(false);
            let start = Instant::now();
            let out = gasp(&grid.graph, &opts, None)?;
            let mut labels = out.partition.labels();
            if cfg.min_size > 1 {
                labels = filter_small_segments(&labels, &grid.graph, cfg.min_size)?;
            }
            let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
            let scores = evaluate(&labels, gt, cfg.ignore_label)?;
            let mut distinct = labels.clone();
            distinct.sort_unstable();
            distinct.dedup();
            Ok(BenchRow {
                rule,
                k,
                p_long,
                sample,
                vi_split: scores.vi_split,
                vi_merge: scores.vi_merge,
                adapted_rand: scores.adapted_rand,
                combined: scores.combined,
                cluster_count: distinct.len(),
                runtime_ms,
            })
        })
        .collect()
}

/// One row per `(rule, K, p_long, sample)`, ordered by rule (config order), K, p_long, sample.
pub fn run_bench(vol: &AffinityVolume, gt: &[u32], cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    cfg.validate()?;
    if gt.len() != vol.voxel_count() {
        return Err(GaspError::ShapeMismatch(format!(
            "ground truth has {} voxels, affinities {:?}",
            gt.len(),
            vol.shape()
        )));
    }
    let mut cells = Vec::new();
    for (ki, &k) in cfg.k_grid.iter().enumerate() {
        for (pi, &p) in cfg.p_long.iter().enumerate() {
            for s in 0..cfg.samples {
                cells.push((ki, k, pi, p, s));
            }
        }
    }
    let pool = thread_pool()?;
    let per_cell: Vec<Vec<BenchRow>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(_, k, _, p, s)| run_cell(vol, gt, cfg, k, p, s))
            .collect::<Result<_>>()
    })?;
    let mut keyed: Vec<((usize, usize, usize, usize), BenchRow)> = cells
        .iter()
        .zip(per_cell)
        .flat_map(|(&(ki, _, pi, _, s), rows)| {
            rows.into_iter()
                .enumerate()
                .map(move |(ri, row)| ((ri, ki, pi, s), row))
        })
        .collect();
    keyed.sort_by_key(|(key, _)| *key);
    Ok(keyed.into_iter().map(|(_, row)| row).collect())
}

/// Percentile with linear interpolation between closest ranks.
pub fn percentile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty sample");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub rule: LinkageRule,
    pub k: f64,
    pub p_long: f64,
    pub metric: &'static str,
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
}

pub const SUMMARY_HEADER: &str = "rule,K,p_long,metric,median,p25,p75";

const METRICS: [(&str, fn(&BenchRow) -> f64); 5] = [
    ("vi_split", |r| r.vi_split),
    ("vi_merge", |r| r.vi_merge),
    ("adapted_rand", |r| r.adapted_rand),
    ("combined", |r| r.combined),
    ("cluster_count", |r| r.cluster_count as f64),
];

/// Median and quartiles per `(rule, K, p_long)` and metric, in row order. Runtime is left out.
pub fn summarize(rows: &[BenchRow]) -> Vec<SummaryRow> {
    let mut groups: Vec<(LinkageRule, f64, f64, Vec<&BenchRow>)> = Vec::new();
    for row in rows {
        match groups
            .iter_mut()
            .find(|g| g.0 == row.rule && g.1.to_bits() == row.k.to_bits() && g.2.to_bits() == row.p_long.to_bits())
        {
            Some(g) => g.3.push(row),
            None => groups.push((row.rule, row.k, row.p_long, vec![row])),
        }
    }
    let mut out = Vec::new();
    for (rule, k, p_long, members) in groups {
        for (metric, get) in METRICS {
            let mut values: Vec<f64> = members.iter().map(|r| get(r)).collect();
            values.sort_by(f64::total_cmp);
            out.push(SummaryRow {
                rule,
                k,
                p_long,
                metric,
                median: percentile(&values, 0.5),
                p25: percentile(&values, 0.25),
                p75: percentile(&values, 0.75),
            });
        }
    }
    out
}

pub fn rows_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("{ROW_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{:.3}",
            r.rule, r.k, r.p_long, r.sample, r.vi_split, r.vi_merge, r.adapted_rand, r.combined, r.cluster_count, r.runtime_ms
        );
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = format!("{SUMMARY_HEADER}\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{},{},{}", r.rule, r.k, r.p_long, r.metric, r.median, r.p25, r.p75);
    }
    out
}
