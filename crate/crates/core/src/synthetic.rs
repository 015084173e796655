//! Planted segmentations with ideal affinities, for benchmarks without real data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::affinity::{AffinityVolume, Offset};
use crate::error::{GaspError, Result};

/// Three local offsets followed by a few long-range ones.
pub const DEFAULT_OFFSETS: [Offset; 8] = [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [2, 0, 0],
    [0, 4, 0],
    [0, 0, 4],
    [0, 8, 8],
    [0, 8, -8],
];

/// Voronoi cells of `segments` random seeds in a `[Z, Y, X]` volume, labelled from 1.
pub fn voronoi_labels(shape: [usize; 3], segments: usize, seed: u64) -> Result<Vec<u32>> {
    let n: usize = shape.iter().product();
    if segments == 0 || segments > n {
        return Err(GaspError::param("segments", format!("{segments} not in 1..={n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers: Vec<[f64; 3]> = (0..segments)
        .map(|_| [0, 1, 2].map(|a| rng.gen_range(0.0..shape[a] as f64)))
        .collect();
    let [_, ny, nx] = shape;
    Ok((0..n)
        .map(|i| {
            let p = [(i / (ny * nx)) as f64, ((i / nx) % ny) as f64, (i % nx) as f64];
            let d2 = |c: &[f64; 3]| (0..3).map(|a| (p[a] - c[a]).powi(2)).sum::<f64>();
            let best = (0..segments)
                .min_by(|&a, &b| d2(&centers[a]).total_cmp(&d2(&centers[b])))
                .unwrap();
            best as u32 + 1
        })
        .collect())
}

/// Affinity 1 between voxels with the same label, 0 across boundaries.
/// Pairs leaving the volume get 1; they never become edges.
pub fn ideal_affinities(labels: &[u32], shape: [usize; 3], offsets: &[Offset]) -> Result<AffinityVolume> {
    let n: usize = shape.iter().product();
    if labels.len() != n {
        return Err(GaspError::ShapeMismatch(format!("{} labels for shape {shape:?}", labels.len())));
    }
    let probe = AffinityVolume::new(shape, offsets.to_vec(), vec![1.0; n * offsets.len()])?;
    let mut data = Vec::with_capacity(n * offsets.len());
    for off in offsets {
        data.extend((0..n).map(|i| match probe.neighbor(i, *off) {
            Some(j) if labels[i] != labels[j] => 0.0,
            _ => 1.0,
        }));
    }
    probe.with_data(data)
}

/// Planted segmentation plus its ideal affinities.
#[derive(Debug, Clone)]
pub struct Planted {
    pub shape: [usize; 3],
    pub labels: Vec<u32>,
    pub affinities: AffinityVolume,
}

pub fn planted(shape: [usize; 3], segments: usize, offsets: &[Offset], seed: u64) -> Result<Planted> {
    let labels = voronoi_labels(shape, segments, seed)?;
    let affinities = ideal_affinities(&labels, shape, offsets)?;
    Ok(Planted {
        shape,
        labels,
        affinities,
    })
}
