//! Spatially correlated noise and biased affinity predictions.
//!
//! The noise is multi-octave value noise on seeded 4-D lattices (channel, z,
//! y, x). It is locally smooth but varies a lot over larger distances, which
//! is what the robustness experiments need.

use std::str::FromStr;

use rayon::prelude::*;

use crate::affinity::{clamp_prob, logit, sigmoid, AffinityVolume, CLAMP_EPS};
use crate::error::{GaspError, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    /// Lattice spacing of the first octave along `[c, z, y, x]`.
    pub scales: [f64; 4],
    pub octaves: u32,
    pub persistence: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(scales: [f64; 4], seed: u64) -> Self {
        NoiseSpec {
            scales,
            octaves: 3,
            persistence: 0.5,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.scales.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return Err(GaspError::param("scales", format!("{s} is not a positive number")));
        }
        if self.octaves == 0 {
            return Err(GaspError::param("octaves", "must be at least 1"));
        }
        if !(self.persistence > 0.0 && self.persistence <= 1.0) {
            return Err(GaspError::param("persistence", format!("{} not in (0, 1]", self.persistence)));
        }
        Ok(())
    }
}

#[inline]
fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Lattice cell and smoothed fraction for every index along one axis.
fn axis_cells(len: usize, spacing: f64) -> Vec<(u64, f64)> {
    (0..len)
        .map(|i| {
            let t = i as f64 / spacing;
            let cell = t.floor();
            (cell as u64, smoothstep(t - cell))
        })
        .collect()
}

/// Field of shape `[C, Z, Y, X]` (C order) with values in `[0, 1]`.
///
/// A constant field (possible when every axis fits in one lattice cell and
/// the corners coincide) is returned as all 0.5.
pub fn correlated_noise(shape: [usize; 4], spec: &NoiseSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let len: usize = shape.iter().product();
    let [_, nz, ny, nx] = shape;
    let mut field = vec![0.0; len];
    let mut amplitude = 1.0;
    for k in 0..spec.octaves {
        let cells: Vec<Vec<(u64, f64)>> = (0..4)
            .map(|a| axis_cells(shape[a], spec.scales[a] / f64::from(1u32 << k.min(31))))
            .collect();
        let lattice = |c: [u64; 4]| {
            seed::unit_f64(seed::hash_words(&[spec.seed, u64::from(k), c[0], c[1], c[2], c[3]]))
        };
        field.par_chunks_mut(nx.max(1)).enumerate().for_each(|(row, out)| {
            let (ci, zi, yi) = (row / (nz * ny), (row / ny) % nz, row % ny);
            let (c0, sc) = cells[0][ci];
            let (z0, sz) = cells[1][zi];
            let (y0, sy) = cells[2][yi];
            for (xi, o) in out.iter_mut().enumerate() {
                let (x0, sx) = cells[3][xi];
                let mut acc = 0.0;
                for corner in 0..16u32 {
                    let bit = |b: u32| u64::from((corner >> b) & 1);
                    let wt = |b: u32, s: f64| if bit(b) == 1 { s } else { 1.0 - s };
                    let w = wt(0, sc) * wt(1, sz) * wt(2, sy) * wt(3, sx);
                    if w != 0.0 {
                        acc += w * lattice([c0 + bit(0), z0 + bit(1), y0 + bit(2), x0 + bit(3)]);
                    }
                }
                *o += amplitude * acc;
            }
        });
        amplitude *= spec.persistence;
    }
    let (lo, hi) = field
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if hi > lo {
        field.par_iter_mut().for_each(|v| *v = (*v - lo) / (hi - lo));
    } else {
        field.iter_mut().for_each(|v| *v = 0.5);
    }
    Ok(field)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Raises affinities where the noise is positive (favours merging).
    Under,
    /// Lowers affinities where the noise is negative (favours splitting).
    Over,
}

impl FromStr for Direction {
    type Err = GaspError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "under" => Ok(Direction::Under),
            "over" => Ok(Direction::Over),
            _ => Err(GaspError::param("direction", format!("{s:?} (expected under or over)"))),
        }
    }
}

/// Biased prediction for a single affinity `p` and noise value `n`.
#[inline]
pub fn bias_value(p: f64, n: f64, k: f64, dir: Direction) -> f64 {
    let f = logit(clamp_prob(p, CLAMP_EPS));
    let big_n = logit(clamp_prob(n, CLAMP_EPS));
    let shifted = match dir {
        Direction::Under => f + (k * big_n.max(0.0)).abs(),
        Direction::Over => f - (k * (-big_n).max(0.0)).abs(),
    };
    sigmoid(shifted)
}

/// Applies [`bias_value`] voxel-wise; `noise` must have the volume's full `[C, Z, Y, X]` size.
pub fn bias_predictions(vol: &AffinityVolume, noise: &[f64], k: f64, dir: Direction) -> Result<AffinityVolume> {
    if noise.len() != vol.data().len() {
        return Err(GaspError::ShapeMismatch(format!(
            "noise has {} values, volume {:?} has {}",
            noise.len(),
            vol.full_shape(),
            vol.data().len()
        )));
    }
    if !(k.is_finite() && k >= 0.0) {
        return Err(GaspError::param("K", format!("{k} is not a non-negative number")));
    }
    let data = vol
        .data()
        .par_iter()
        .zip(noise.par_iter())
        .map(|(&p, &n)| bias_value(p, n, k, dir))
        .collect();
    vol.with_data(data)
}
