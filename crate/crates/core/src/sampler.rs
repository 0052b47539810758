//! Exact sampling from the cycle-weighted measure on `S_n`.
//!
//! The cycle through the smallest unplaced element has length `k` with
//! probability `θ_k h_{m-k} / (m h_m)` when `m` elements remain. Its
//! `k - 1` companions are a uniform ordered sample of the remaining
//! elements, which makes every cyclic order equally likely.

use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::rng::RngStream;
use crate::weights::{norm_constants, NormalizationTable, WeightSequence};

/// `p_k`, `k = 1..=m`, for the length of the cycle containing the smallest
/// of `m` unplaced elements. Entry `k - 1` holds `p_k`.
pub fn cycle_length_distribution(table: &NormalizationTable, m: usize) -> Result<Vec<f64>> {
    if m == 0 || m > table.n_max() {
        return Err(Error::InvalidArgument(format!(
            "remaining size {m} outside 1..={}",
            table.n_max()
        )));
    }
    let log_hm = table.log_h(m);
    if log_hm.is_zero() {
        return Err(Error::DegenerateModel { n: m });
    }
    let offset = (m as f64).ln() + log_hm.log_value;
    Ok((1..=m)
        .map(|k| (table.log_theta(k) + table.log_h(m - k).log_value - offset).exp())
        .collect())
}

/// Draws one permutation of `[n]`; requires `h_n > 0` and `n <= table.n_max()`.
pub fn sample_permutation(
    table: &NormalizationTable,
    n: usize,
    rng: &mut RngStream,
) -> Result<Permutation> {
    if n == 0 || n > table.n_max() {
        return Err(Error::InvalidArgument(format!(
            "n = {n} outside 1..={}",
            table.n_max()
        )));
    }
    if table.log_h(n).is_zero() {
        return Err(Error::DegenerateModel { n });
    }

    // Unplaced elements (0-based) in an index-swap pool for O(1) removal.
    let mut pool: Vec<usize> = (0..n).collect();
    let mut pos: Vec<usize> = (0..n).collect();
    let mut placed = vec![false; n];
    let mut image = vec![0usize; n];
    let mut cycles = Vec::new();
    let mut cursor = 0;

    let remove = |pool: &mut Vec<usize>, pos: &mut Vec<usize>, e: usize| {
        let idx = pos[e];
        let last = pool.pop().expect("pool is non-empty");
        if last != e {
            pool[idx] = last;
            pos[last] = idx;
        }
    };

    while !pool.is_empty() {
        while placed[cursor] {
            cursor += 1;
        }
        let lead = cursor;
        remove(&mut pool, &mut pos, lead);
        placed[lead] = true;

        let m = pool.len() + 1;
        let k = draw_cycle_length(table, m, rng.uniform());

        let mut cycle = Vec::with_capacity(k);
        cycle.push(lead + 1);
        for _ in 1..k {
            let e = pool[rng.below(pool.len())];
            remove(&mut pool, &mut pos, e);
            placed[e] = true;
            cycle.push(e + 1);
        }
        for j in 0..k {
            image[cycle[j] - 1] = cycle[(j + 1) % k];
        }
        cycles.push(cycle);
    }
    Ok(Permutation::from_parts_unchecked(image, cycles))
}

/// Inverse-CDF draw from `cycle_length_distribution(table, m)`; `h_m > 0`.
fn draw_cycle_length(table: &NormalizationTable, m: usize, u: f64) -> usize {
    let offset = (m as f64).ln() + table.log_h(m).log_value;
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for k in 1..=m {
        let log_p = table.log_theta(k) + table.log_h(m - k).log_value - offset;
        if log_p == f64::NEG_INFINITY {
            continue;
        }
        last_positive = k;
        cumulative += log_p.exp();
        if u < cumulative {
            return k;
        }
    }
    // rounding left the total just below u
    last_positive
}

/// Bundles a weight sequence with its normalization table up to `n_max`.
#[derive(Debug, Clone)]
pub struct PermutationSampler {
    weights: WeightSequence,
    table: NormalizationTable,
}

impl PermutationSampler {
    pub fn new(weights: WeightSequence, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidArgument("n_max must be positive".into()));
        }
        let table = norm_constants(&weights, n_max);
        if table.log_h(n_max).is_zero() {
            return Err(Error::DegenerateModel { n: n_max });
        }
        Ok(PermutationSampler { weights, table })
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.weights
    }

    pub fn table(&self) -> &NormalizationTable {
        &self.table
    }

    pub fn n_max(&self) -> usize {
        self.table.n_max()
    }

    pub fn sample(&self, n: usize, rng: &mut RngStream) -> Result<Permutation> {
        sample_permutation(&self.table, n, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::TailRule;

    #[test]
    fn uniform_cycle_lengths_are_flat() {
        let table = norm_constants(&WeightSequence::Uniform, 5);
        let p = cycle_length_distribution(&table, 5).unwrap();
        for pk in &p {
            assert!((pk - 0.2).abs() < 1e-14);
        }
    }

    #[test]
    fn ewens_two_cycle_lengths() {
        let table = norm_constants(&WeightSequence::ewens(2.0).unwrap(), 2);
        let p = cycle_length_distribution(&table, 2).unwrap();
        assert!((p[0] - 2.0 / 3.0).abs() < 1e-14);
        assert!((p[1] - 1.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn distribution_sums_to_one() {
        for ws in [
            WeightSequence::polynomial(1.0, 1.0).unwrap(),
            WeightSequence::polynomial(2.0, -0.5).unwrap(),
            WeightSequence::ewens(0.3).unwrap(),
        ] {
            let table = norm_constants(&ws, 300);
            for m in [1, 2, 17, 300] {
                let s: f64 = cycle_length_distribution(&table, m).unwrap().iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "{ws} m={m} sum={s}");
            }
        }
    }

    #[test]
    fn zero_first_weight_is_degenerate_at_one() {
        let ws = WeightSequence::explicit(vec![0.0, 1.0], TailRule::Zero).unwrap();
        let table = norm_constants(&ws, 4);
        assert!(matches!(
            cycle_length_distribution(&table, 1),
            Err(Error::DegenerateModel { n: 1 })
        ));
        let mut rng = RngStream::new(0, 0);
        assert!(matches!(
            sample_permutation(&table, 3, &mut rng),
            Err(Error::DegenerateModel { n: 3 })
        ));
        // h_4 > 0: only products of transpositions have weight
        for i in 0..200 {
            let p = sample_permutation(&table, 4, &mut RngStream::new(1, i)).unwrap();
            assert!(p.cycles().iter().all(|c| c.len() == 2));
        }
    }

    #[test]
    fn size_one_is_identity() {
        let table = norm_constants(&WeightSequence::ewens(3.0).unwrap(), 1);
        let p = sample_permutation(&table, 1, &mut RngStream::new(5, 5)).unwrap();
        assert_eq!(p, Permutation::identity(1));
    }

    #[test]
    fn samples_are_valid_and_reproducible() {
        let sampler = PermutationSampler::new(WeightSequence::polynomial(1.0, 0.5).unwrap(), 500)
            .unwrap();
        for i in 0..50 {
            let a = sampler.sample(500, &mut RngStream::new(9, i)).unwrap();
            let b = sampler.sample(500, &mut RngStream::new(9, i)).unwrap();
            assert_eq!(a, b);
            let rebuilt = Permutation::from_image(a.image().to_vec()).unwrap();
            assert_eq!(rebuilt.cycles(), a.cycles());
            let total: usize = a.cycles().iter().map(Vec::len).sum();
            assert_eq!(total, 500);
        }
    }

    #[test]
    fn rejects_out_of_range_sizes() {
        let table = norm_constants(&WeightSequence::Uniform, 3);
        let mut rng = RngStream::new(0, 0);
        assert!(sample_permutation(&table, 0, &mut rng).is_err());
        assert!(sample_permutation(&table, 4, &mut rng).is_err());
        assert!(cycle_length_distribution(&table, 4).is_err());
    }
}
