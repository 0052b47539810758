//! Permutations of `[n] = {1, ..., n}` with their min-first cycle decomposition.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// A bijection of `[n]`, `n >= 1`. Elements are 1-based.
///
/// Cycles are stored min-first (the smallest element leads its tuple) and
/// ordered by their leading element.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
    cycles: Vec<Vec<usize>>,
}

impl Permutation {
    pub fn identity(n: usize) -> Self {
        assert!(n >= 1, "permutations act on [n] with n >= 1");
        Permutation {
            image: (1..=n).collect(),
            cycles: (1..=n).map(|i| vec![i]).collect(),
        }
    }

    /// Builds from one-line notation: `image[i - 1] = σ(i)`.
    pub fn from_image(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty image".into()));
        }
        let mut seen = vec![false; n];
        for &v in &image {
            if v < 1 || v > n {
                return Err(Error::InvalidPermutation(format!(
                    "value {v} outside [1, {n}]"
                )));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::InvalidPermutation(format!("value {v} repeated")));
            }
        }
        let cycles = canonical_cycles(&image);
        Ok(Permutation { image, cycles })
    }

    /// Builds from disjoint cycles covering `[n]`; any rotation of a cycle is accepted.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut image = vec![0usize; n];
        for cycle in cycles {
            if cycle.is_empty() {
                return Err(Error::InvalidPermutation("empty cycle".into()));
            }
            for (j, &from) in cycle.iter().enumerate() {
                let to = cycle[(j + 1) % cycle.len()];
                if from < 1 || from > n {
                    return Err(Error::InvalidPermutation(format!(
                        "cycle element {from} outside [1, {n}]"
                    )));
                }
                if image[from - 1] != 0 {
                    return Err(Error::InvalidPermutation(format!(
                        "element {from} appears in two cycles"
                    )));
                }
                image[from - 1] = to;
            }
        }
        if let Some(i) = image.iter().position(|&v| v == 0) {
            return Err(Error::InvalidPermutation(format!(
                "element {} not covered by any cycle",
                i + 1
            )));
        }
        Permutation::from_image(image)
    }

    /// Trusted constructor for the sampler, which already produces
    /// canonical cycles.
    pub(crate) fn from_parts_unchecked(image: Vec<usize>, cycles: Vec<Vec<usize>>) -> Self {
        debug_assert_eq!(canonical_cycles(&image), cycles);
        Permutation { image, cycles }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `σ(i)` for `i` in `[n]`.
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1]
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    /// Number of `k`-cycles.
    pub fn count_cycles(&self, k: usize) -> usize {
        self.cycles.iter().filter(|c| c.len() == k).count()
    }

    /// `σ(1) σ(2) ... σ(n)` separated by spaces.
    pub fn to_oneline(&self) -> String {
        let parts: Vec<String> = self.image.iter().map(|v| v.to_string()).collect();
        parts.join(" ")
    }

    /// Cycle notation such as `(1,3,2)(4)`.
    pub fn to_cycle_notation(&self) -> String {
        let mut out = String::new();
        for cycle in &self.cycles {
            out.push('(');
            for (j, v) in cycle.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{v}");
            }
            out.push(')');
        }
        out
    }
}

fn canonical_cycles(image: &[usize]) -> Vec<Vec<usize>> {
    let n = image.len();
    let mut visited = vec![false; n];
    let mut cycles = Vec::new();
    for start in 1..=n {
        if visited[start - 1] {
            continue;
        }
        // scanning starts in increasing order, so `start` is the cycle minimum
        let mut cycle = vec![start];
        visited[start - 1] = true;
        let mut next = image[start - 1];
        while next != start {
            visited[next - 1] = true;
            cycle.push(next);
            next = image[next - 1];
        }
        cycles.push(cycle);
    }
    cycles
}

/// The canonical min-first decomposition of `perm`, recomputed from its image.
pub fn cycles_of(perm: &Permutation) -> Vec<Vec<usize>> {
    canonical_cycles(perm.image())
}

/// Rotates a cycle so that its minimum comes first.
pub fn min_first<T: PartialOrd + Copy>(cycle: &[T]) -> Vec<T> {
    if cycle.is_empty() {
        return Vec::new();
    }
    let start = (0..cycle.len())
        .fold(0, |best, i| if cycle[i] < cycle[best] { i } else { best });
    cycle[start..].iter().chain(&cycle[..start]).copied().collect()
}
