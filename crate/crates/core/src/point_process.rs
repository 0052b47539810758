//! The scaled cycle point measure of a permutation and the limiting
//! Poisson process on `X = ∪_k X_k`.
//!
//! A cycle `(i_1, ..., i_k)` written min-first becomes the point
//! `(i_1/n, ..., i_k/n)` at level `k`. In the limit, level `k` carries an
//! independent homogeneous Poisson process with intensity `θ_k` on `X_k`.

use std::collections::BTreeMap;

use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::{min_first, Permutation};
use crate::region::BoxUnion;
use crate::rng::RngStream;
use crate::weights::WeightSequence;

/// Points grouped by level. Serializes as
/// `{"n": ..., "levels": {"1": [[x]], "2": [[x1, x2]], ...}}`.
/// `n = 0` marks limit-process output (not lattice valued).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PointMeasure {
    pub n: usize,
    levels: BTreeMap<usize, Vec<Vec<f64>>>,
}

impl PointMeasure {
    /// Builds a measure from raw points; each must be min-first and of the
    /// length of its level.
    pub fn from_levels(n: usize, levels: BTreeMap<usize, Vec<Vec<f64>>>) -> Result<Self> {
        for (&k, points) in &levels {
            for p in points {
                if p.len() != k {
                    return Err(Error::DimensionMismatch {
                        expected: k,
                        actual: p.len(),
                    });
                }
                if p[1..].iter().any(|&x| x < p[0]) {
                    return Err(Error::InvalidArgument(format!(
                        "point {p:?} at level {k} is not min-first"
                    )));
                }
            }
        }
        Ok(PointMeasure { n, levels })
    }

    pub fn levels(&self) -> &BTreeMap<usize, Vec<Vec<f64>>> {
        &self.levels
    }

    /// Level-`k` points; empty if none are stored.
    pub fn restrict(&self, k: usize) -> &[Vec<f64>] {
        self.levels.get(&k).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn total_points(&self) -> usize {
        self.levels.values().map(Vec::len).sum()
    }

    /// Number of stored points inside `u`.
    pub fn count_in(&self, u: &BoxUnion) -> usize {
        self.levels
            .values()
            .flatten()
            .filter(|p| u.contains(p))
            .count()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &[f64])> {
        self.levels
            .iter()
            .flat_map(|(&k, pts)| pts.iter().map(move |p| (k, p.as_slice())))
    }
}

/// One point per cycle, scaled by `1/n`.
pub fn point_measure(perm: &Permutation) -> PointMeasure {
    let n = perm.n() as f64;
    let mut levels: BTreeMap<usize, Vec<Vec<f64>>> = BTreeMap::new();
    for cycle in perm.cycles() {
        levels
            .entry(cycle.len())
            .or_default()
            .push(cycle.iter().map(|&i| i as f64 / n).collect());
    }
    PointMeasure {
        n: perm.n(),
        levels,
    }
}

/// Samples the limiting Poisson process on levels `1..=k_max`: level `k`
/// gets `Poisson(θ_k / k)` points, each `k` iid uniforms rotated min-first.
pub fn simulate_limit_process(
    ws: &WeightSequence,
    k_max: usize,
    rng: &mut RngStream,
) -> PointMeasure {
    let mut levels = BTreeMap::new();
    for k in 1..=k_max {
        let count = poisson(ws.poisson_mean(k), rng);
        if count == 0 {
            continue;
        }
        let points: Vec<Vec<f64>> = (0..count)
            .map(|_| {
                let raw: Vec<f64> = (0..k).map(|_| rng.uniform()).collect();
                min_first(&raw)
            })
            .collect();
        levels.insert(k, points);
    }
    PointMeasure { n: 0, levels }
}

/// A Poisson draw that accepts a zero mean.
pub(crate) fn poisson(mean: f64, rng: &mut RngStream) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    let dist = Poisson::new(mean).expect("finite positive Poisson mean");
    dist.sample(rng) as usize
}
