//! Brute-force computations on `S_n` for `n <= 8`, used as ground truth.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::CompensatedSum;
use crate::permutation::Permutation;
use crate::statistics::Statistic;
use crate::weights::WeightSequence;

/// Largest `n` the oracle will enumerate.
pub const MAX_N: usize = 8;

fn check_size(n: usize) -> Result<()> {
    if n > MAX_N {
        return Err(Error::ResourceBound { n, max: MAX_N });
    }
    Ok(())
}

/// Calls `visit` with every one-line image of `S_n` (values `1..=n`), by
/// the iterative form of Heap's algorithm.
pub fn for_each_permutation(n: usize, mut visit: impl FnMut(&[usize])) {
    let mut a: Vec<usize> = (1..=n).collect();
    let mut c = vec![0usize; n];
    visit(&a);
    let mut i = 1;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                a.swap(0, i);
            } else {
                a.swap(c[i], i);
            }
            visit(&a);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Cycle lengths of a one-line image, found by marking.
fn cycle_lengths(image: &[usize]) -> Vec<usize> {
    let mut seen = vec![false; image.len()];
    let mut lengths = Vec::new();
    for start in 0..image.len() {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut j = start;
        while !seen[j] {
            seen[j] = true;
            j = image[j] - 1;
            len += 1;
        }
        lengths.push(len);
    }
    lengths
}

/// `Π_k θ_k^{C_k}`.
fn weight_of(ws: &WeightSequence, image: &[usize]) -> f64 {
    cycle_lengths(image).into_iter().map(|k| ws.theta(k)).product()
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `h_n = (1/n!) Σ_{π ∈ S_n} Π_k θ_k^{C_k(π)}` by full enumeration.
/// `h_0 = 1`.
pub fn enumerate_h(ws: &WeightSequence, n: usize) -> Result<f64> {
    check_size(n)?;
    if n == 0 {
        return Ok(1.0);
    }
    let mut total = CompensatedSum::new();
    for_each_permutation(n, |image| total.add(weight_of(ws, image)));
    Ok(total.total() / factorial(n))
}

/// An exact pmf over integer-vector statistic values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactDistribution {
    pub support: Vec<Vec<i64>>,
    pub probabilities: Vec<f64>,
}

impl ExactDistribution {
    pub fn probability(&self, value: &[i64]) -> f64 {
        self.support
            .iter()
            .position(|s| s.as_slice() == value)
            .map_or(0.0, |i| self.probabilities[i])
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[i64], f64)> {
        self.support
            .iter()
            .map(Vec::as_slice)
            .zip(self.probabilities.iter().copied())
    }
}

/// Exact pmf of `stat` under the Gibbs measure on `S_n`.
pub fn exact_statistic_distribution(
    ws: &WeightSequence,
    n: usize,
    stat: Statistic,
) -> Result<ExactDistribution> {
    check_size(n)?;
    if let Some(k) = stat.level() {
        let min = if matches!(stat, Statistic::MinRange(_) | Statistic::MaxRange(_)) { 2 } else { 1 };
        if k < min {
            return Err(Error::InvalidArgument(format!("{stat} needs k >= {min}")));
        }
    }
    let mut mass: BTreeMap<Vec<i64>, CompensatedSum> = BTreeMap::new();
    let mut total = CompensatedSum::new();
    let mut failure = None;
    for_each_permutation(n, |image| {
        let w = weight_of(ws, image);
        if w == 0.0 || failure.is_some() {
            return;
        }
        match Permutation::from_image(image.to_vec()) {
            Ok(perm) => {
                mass.entry(stat.key(&perm)).or_default().add(w);
                total.add(w);
            }
            Err(e) => failure = Some(e),
        }
    });
    if let Some(e) = failure {
        return Err(e);
    }
    let z = total.total();
    if z <= 0.0 {
        return Err(Error::DegenerateModel { n });
    }
    let (support, probabilities) = mass
        .into_iter()
        .map(|(k, s)| (k, s.total() / z))
        .unzip();
    Ok(ExactDistribution {
        support,
        probabilities,
    })
}

/// The probability that a random permutation contains given disjoint
/// cycles, computed twice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CycleProbability {
    /// Weight of the permutations containing every cycle over the total weight.
    pub enumerated: f64,
    /// `h_{n-s} (n-s)! / (h_n n!) · Π_j θ_{k_j}`, `s` the number of covered points.
    pub closed_form: f64,
}

fn validate_tuples(n: usize, cycles: &[Vec<usize>]) -> Result<usize> {
    let mut used = vec![false; n + 1];
    let mut covered = 0;
    for c in cycles {
        if c.is_empty() {
            return Err(Error::InvalidCycles("empty cycle".into()));
        }
        if c.iter().any(|&v| v < c[0]) {
            return Err(Error::InvalidCycles(format!("{c:?} does not start at its minimum")));
        }
        for &v in c {
            if v == 0 || v > n {
                return Err(Error::InvalidCycles(format!("element {v} outside 1..={n}")));
            }
            if used[v] {
                return Err(Error::InvalidCycles(format!("element {v} appears twice")));
            }
            used[v] = true;
        }
        covered += c.len();
    }
    Ok(covered)
}

/// `P(π contains every cycle in `cycles`)` by enumeration and by the
/// closed form.
pub fn exact_cycle_probability(
    ws: &WeightSequence,
    n: usize,
    cycles: &[Vec<usize>],
) -> Result<CycleProbability> {
    check_size(n)?;
    let covered = validate_tuples(n, cycles)?;
    let contains = |image: &[usize]| {
        cycles.iter().all(|c| {
            (0..c.len()).all(|i| image[c[i] - 1] == c[(i + 1) % c.len()])
        })
    };
    let mut total = CompensatedSum::new();
    let mut hits = CompensatedSum::new();
    for_each_permutation(n, |image| {
        let w = weight_of(ws, image);
        total.add(w);
        if contains(image) {
            hits.add(w);
        }
    });
    if total.total() <= 0.0 {
        return Err(Error::DegenerateModel { n });
    }
    let enumerated = hits.total() / total.total();

    let rest = n - covered;
    let h_n = enumerate_h(ws, n)?;
    let h_rest = enumerate_h(ws, rest)?;
    let theta_product: f64 = cycles.iter().map(|c| ws.theta(c.len())).product();
    let closed_form = h_rest * factorial(rest) / (h_n * factorial(n)) * theta_product;
    Ok(CycleProbability {
        enumerated,
        closed_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;
    use crate::weights::TailRule;

    #[test]
    fn heap_visits_every_permutation_once() {
        for n in 0..=6 {
            let mut seen = HashSet::new();
            for_each_permutation(n, |a| {
                assert!(seen.insert(a.to_vec()));
            });
            assert_eq!(seen.len() as f64, factorial(n));
        }
    }

    #[test]
    fn h_values() {
        assert!((enumerate_h(&WeightSequence::Uniform, 6).unwrap() - 1.0).abs() < 1e-14);
        let ewens2 = WeightSequence::ewens(2.0).unwrap();
        assert!((enumerate_h(&ewens2, 2).unwrap() - 3.0).abs() < 1e-14);
        let swap_only = WeightSequence::explicit(vec![0.0, 1.0], TailRule::Zero).unwrap();
        assert!((enumerate_h(&swap_only, 2).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            enumerate_h(&WeightSequence::Uniform, 9),
            Err(Error::ResourceBound { n: 9, max: 8 })
        ));
    }

    #[test]
    fn fixed_point_pmf_uniform_three() {
        let d = exact_statistic_distribution(&WeightSequence::Uniform, 3, Statistic::Count(1)).unwrap();
        assert_eq!(d.support, vec![vec![0], vec![1], vec![3]]);
        let expected = [2.0 / 6.0, 3.0 / 6.0, 1.0 / 6.0];
        for (p, e) in d.probabilities.iter().zip(expected) {
            assert!((p - e).abs() < 1e-15);
        }
    }

    #[test]
    fn fixed_point_pmf_ewens_two() {
        let ws = WeightSequence::ewens(2.0).unwrap();
        let d = exact_statistic_distribution(&ws, 2, Statistic::Count(1)).unwrap();
        assert!((d.probability(&[0]) - 1.0 / 3.0).abs() < 1e-15);
        assert!((d.probability(&[2]) - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(d.probability(&[1]), 0.0);
    }

    #[test]
    fn size_one_has_one_fixed_point() {
        for ws in [WeightSequence::Uniform, WeightSequence::ewens(0.3).unwrap()] {
            let d = exact_statistic_distribution(&ws, 1, Statistic::Count(1)).unwrap();
            assert_eq!(d.support, vec![vec![1]]);
            assert_eq!(d.probabilities, vec![1.0]);
        }
    }

    #[test]
    fn degenerate_model_is_reported() {
        let ws = WeightSequence::explicit(vec![0.0, 1.0], TailRule::Zero).unwrap();
        assert!(matches!(
            exact_statistic_distribution(&ws, 3, Statistic::CycleType),
            Err(Error::DegenerateModel { n: 3 })
        ));
    }

    #[test]
    fn distributions_sum_to_one() {
        let ws = WeightSequence::polynomial(1.0, 1.0).unwrap();
        for stat in [
            Statistic::CycleType,
            Statistic::Image,
            Statistic::Sum(2),
            Statistic::MinRange(2),
            Statistic::MaxSpacing,
        ] {
            let d = exact_statistic_distribution(&ws, 6, stat).unwrap();
            let s: f64 = d.probabilities.iter().sum();
            assert!((s - 1.0).abs() < 1e-12, "{stat}");
            assert!(d.probabilities.iter().all(|&p| p >= 0.0));
        }
    }

    #[test]
    fn cycle_probability_examples() {
        let p = exact_cycle_probability(&WeightSequence::Uniform, 3, &[vec![1, 2]]).unwrap();
        assert!((p.enumerated - 1.0 / 6.0).abs() < 1e-15);
        assert!((p.closed_form - 1.0 / 6.0).abs() < 1e-15);

        let p = exact_cycle_probability(&WeightSequence::Uniform, 4, &[vec![1, 2], vec![3, 4]]).unwrap();
        assert!((p.enumerated - 1.0 / 24.0).abs() < 1e-15);
        assert!((p.closed_form - 1.0 / 24.0).abs() < 1e-15);

        let ws = WeightSequence::ewens(1.7).unwrap();
        let n = 5;
        let p = exact_cycle_probability(&ws, n, &[vec![1, 4, 2, 5, 3]]).unwrap();
        let expected = ws.theta(n) / (enumerate_h(&ws, n).unwrap() * factorial(n));
        assert!((p.closed_form - expected).abs() < 1e-15);
        assert!((p.enumerated - expected).abs() < 1e-14);
    }

    #[test]
    fn cycle_tuples_are_validated() {
        let ws = WeightSequence::Uniform;
        assert!(matches!(
            exact_cycle_probability(&ws, 4, &[vec![2, 1]]),
            Err(Error::InvalidCycles(_))
        ));
        assert!(exact_cycle_probability(&ws, 4, &[vec![1, 2], vec![2, 3]]).is_err());
        assert!(exact_cycle_probability(&ws, 4, &[vec![1, 5]]).is_err());
        assert!(exact_cycle_probability(&ws, 4, &[vec![]]).is_err());
        assert!(exact_cycle_probability(&ws, 9, &[vec![1]]).is_err());
    }
}
