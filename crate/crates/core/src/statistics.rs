//! Finite-`n` cycle statistics, computed on the integer permutation.
//!
//! Conventions when nothing qualifies: with no `k`-cycles the minimum and
//! maximum ranges are `n` and `0`; with no fixed points the minimum and
//! maximum fixed point are `n + 1` and `0`, and both extreme spacings equal
//! `n + 1` (the single spacing spanning the whole interval).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::point_process::PointMeasure;

/// A family `f_m : X_m -> [0, ∞)`, `m <= max_level()`, integrated against a
/// point measure by [`additive_statistic`].
pub trait CycleFunctional: Sync {
    fn max_level(&self) -> usize;

    /// `f_level(point)`; only called for `level <= max_level()`.
    fn eval(&self, level: usize, point: &[f64]) -> f64;

    /// Whether every `f_m` is invariant under permuting coordinates.
    fn is_symmetric(&self) -> bool {
        false
    }
}

/// Sum of coordinates at one level, zero elsewhere. Integrates to `S_n^{(k)} / n`.
#[derive(Debug, Clone, Copy)]
pub struct ComponentSum {
    pub level: usize,
}

impl CycleFunctional for ComponentSum {
    fn max_level(&self) -> usize {
        self.level
    }

    fn eval(&self, level: usize, point: &[f64]) -> f64 {
        if level == self.level {
            point.iter().sum()
        } else {
            0.0
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// `1` at one level, zero elsewhere. Integrates to `C_k`.
#[derive(Debug, Clone, Copy)]
pub struct LevelIndicator {
    pub level: usize,
}

impl CycleFunctional for LevelIndicator {
    fn max_level(&self) -> usize {
        self.level
    }

    fn eval(&self, level: usize, _point: &[f64]) -> f64 {
        if level == self.level {
            1.0
        } else {
            0.0
        }
    }

    fn is_symmetric(&self) -> bool {
        true
    }
}

/// Wraps a closure `(level, point) -> value` as a functional.
pub struct FnFunctional<F> {
    max_level: usize,
    symmetric: bool,
    f: F,
}

impl<F: Fn(usize, &[f64]) -> f64 + Sync> FnFunctional<F> {
    pub fn new(max_level: usize, f: F) -> Self {
        FnFunctional {
            max_level,
            symmetric: false,
            f,
        }
    }

    pub fn symmetric(max_level: usize, f: F) -> Self {
        FnFunctional {
            max_level,
            symmetric: true,
            f,
        }
    }
}

impl<F: Fn(usize, &[f64]) -> f64 + Sync> CycleFunctional for FnFunctional<F> {
    fn max_level(&self) -> usize {
        self.max_level
    }

    fn eval(&self, level: usize, point: &[f64]) -> f64 {
        (self.f)(level, point)
    }

    fn is_symmetric(&self) -> bool {
        self.symmetric
    }
}

/// `Σ_{m <= k} Σ_{p at level m} f_m(p)`.
pub fn additive_statistic(pm: &PointMeasure, f: &dyn CycleFunctional) -> f64 {
    pm.iter()
        .filter(|(level, _)| *level <= f.max_level())
        .map(|(level, p)| f.eval(level, p))
        .sum()
}

/// `C_1, ..., C_{k_max}` (entry `k - 1` holds `C_k`).
pub fn cycle_counts(perm: &Permutation, k_max: usize) -> Vec<usize> {
    let mut counts = vec![0; k_max];
    for c in perm.cycles() {
        if c.len() <= k_max {
            counts[c.len() - 1] += 1;
        }
    }
    counts
}

/// `S_n^{(k)}`: the sum of all elements lying in `k`-cycles.
pub fn sum_of_k_cycles(perm: &Permutation, k: usize) -> usize {
    perm.cycles()
        .iter()
        .filter(|c| c.len() == k)
        .flatten()
        .sum()
}

/// `(r, R)`: the smallest and largest `max - min` over `k`-cycles, `k >= 2`;
/// `(n, 0)` when there are none.
pub fn cycle_ranges(perm: &Permutation, k: usize) -> (usize, usize) {
    assert!(k >= 2, "cycle ranges are defined for k >= 2");
    perm.cycles()
        .iter()
        .filter(|c| c.len() == k)
        .map(|c| c.iter().max().expect("non-empty") - c[0])
        .fold((perm.n(), 0), |(lo, hi), r| (lo.min(r), hi.max(r)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointSummary {
    /// `m_n`, or `n + 1` without fixed points.
    pub min: usize,
    /// `M_n`, or `0` without fixed points.
    pub max: usize,
    /// `δ_n`: smallest of the spacings `p_1, p_2 - p_1, ..., n + 1 - p_r`.
    pub min_spacing: usize,
    /// `Δ_n`: largest of those spacings.
    pub max_spacing: usize,
}

/// The spacings `p_1, p_2 - p_1, ..., n + 1 - p_r` between sorted fixed
/// points `p_1 < ... < p_r`, including both boundary gaps.
pub fn fixed_point_spacings(perm: &Permutation) -> Vec<usize> {
    let n = perm.n();
    let mut last = 0;
    let mut spacings = Vec::new();
    for i in (1..=n).filter(|&i| perm.apply(i) == i) {
        spacings.push(i - last);
        last = i;
    }
    spacings.push(n + 1 - last);
    spacings
}

pub fn fixed_point_summary(perm: &Permutation) -> FixedPointSummary {
    let n = perm.n();
    let spacings = fixed_point_spacings(perm);
    if spacings.len() == 1 {
        return FixedPointSummary {
            min: n + 1,
            max: 0,
            min_spacing: n + 1,
            max_spacing: n + 1,
        };
    }
    FixedPointSummary {
        min: spacings[0],
        max: n + 1 - spacings[spacings.len() - 1],
        min_spacing: *spacings.iter().min().expect("non-empty"),
        max_spacing: *spacings.iter().max().expect("non-empty"),
    }
}

/// Every statistic above for one permutation, up to level `k_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleStatistics {
    pub k_max: usize,
    pub counts: Vec<usize>,
    pub sums: Vec<usize>,
    /// `r_n^{(k)}` for `k = 2..=k_max`.
    pub min_range: Vec<usize>,
    /// `R_n^{(k)}` for `k = 2..=k_max`.
    pub max_range: Vec<usize>,
    pub fixed: FixedPointSummary,
}

impl CycleStatistics {
    pub fn compute(perm: &Permutation, k_max: usize) -> Self {
        let (min_range, max_range) = (2..=k_max).map(|k| cycle_ranges(perm, k)).unzip();
        CycleStatistics {
            k_max,
            counts: cycle_counts(perm, k_max),
            sums: (1..=k_max).map(|k| sum_of_k_cycles(perm, k)).collect(),
            min_range,
            max_range,
            fixed: fixed_point_summary(perm),
        }
    }
}

/// A closed set of statistic selectors shared by the oracle, the
/// experiment harness and the CLI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistic {
    /// `(C_1, ..., C_n)`.
    CycleType,
    /// The one-line image `σ(1) ... σ(n)`.
    Image,
    Count(usize),
    Sum(usize),
    MinRange(usize),
    MaxRange(usize),
    MinFixed,
    MaxFixed,
    MinSpacing,
    MaxSpacing,
}

impl Statistic {
    /// The statistic as an integer key (a vector for the multivariate ones).
    pub fn key(&self, perm: &Permutation) -> Vec<i64> {
        match self {
            Statistic::CycleType => cycle_counts(perm, perm.n())
                .into_iter()
                .map(|c| c as i64)
                .collect(),
            Statistic::Image => perm.image().iter().map(|&v| v as i64).collect(),
            _ => vec![self.scalar(perm).expect("scalar statistic") as i64],
        }
    }

    /// Integer value of a univariate statistic, `None` for vector ones.
    pub fn scalar(&self, perm: &Permutation) -> Option<usize> {
        Some(match *self {
            Statistic::CycleType | Statistic::Image => return None,
            Statistic::Count(k) => perm.count_cycles(k),
            Statistic::Sum(k) => sum_of_k_cycles(perm, k),
            Statistic::MinRange(k) => cycle_ranges(perm, k).0,
            Statistic::MaxRange(k) => cycle_ranges(perm, k).1,
            Statistic::MinFixed => fixed_point_summary(perm).min,
            Statistic::MaxFixed => fixed_point_summary(perm).max,
            Statistic::MinSpacing => fixed_point_summary(perm).min_spacing,
            Statistic::MaxSpacing => fixed_point_summary(perm).max_spacing,
        })
    }

    /// Whether `perm` sits at the "nothing qualifies" convention value:
    /// no `k`-cycles for sums and ranges, no fixed points for the
    /// fixed-point statistics.
    pub fn is_degenerate(&self, perm: &Permutation) -> bool {
        match *self {
            Statistic::CycleType | Statistic::Image | Statistic::Count(_) => false,
            Statistic::Sum(k) | Statistic::MinRange(k) | Statistic::MaxRange(k) => {
                perm.count_cycles(k) == 0
            }
            Statistic::MinFixed
            | Statistic::MaxFixed
            | Statistic::MinSpacing
            | Statistic::MaxSpacing => perm.count_cycles(1) == 0,
        }
    }

    /// The cycle length the statistic looks at.
    pub fn level(&self) -> Option<usize> {
        match *self {
            Statistic::Count(k)
            | Statistic::Sum(k)
            | Statistic::MinRange(k)
            | Statistic::MaxRange(k) => Some(k),
            Statistic::MinFixed
            | Statistic::MaxFixed
            | Statistic::MinSpacing
            | Statistic::MaxSpacing => Some(1),
            Statistic::CycleType | Statistic::Image => None,
        }
    }
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::CycleType => write!(f, "cycletype"),
            Statistic::Image => write!(f, "image"),
            Statistic::Count(k) => write!(f, "C_{k}"),
            Statistic::Sum(k) => write!(f, "S_{k}"),
            Statistic::MinRange(k) => write!(f, "r_{k}"),
            Statistic::MaxRange(k) => write!(f, "R_{k}"),
            Statistic::MinFixed => write!(f, "m"),
            Statistic::MaxFixed => write!(f, "M"),
            Statistic::MinSpacing => write!(f, "delta"),
            Statistic::MaxSpacing => write!(f, "Delta"),
        }
    }
}

/// Names match the `stats` CSV columns: `C_k`, `S_k`, `r_k`, `R_k`, `m`,
/// `M`, `delta`, `Delta`, plus `cycletype` and `image`. Case matters for
/// `r`/`R`, `m`/`M` and `delta`/`Delta`.
impl FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let level = |rest: &str, min: usize| {
            rest.parse::<usize>()
                .ok()
                .filter(|&k| k >= min)
                .ok_or_else(|| Error::parse(t, format!("expected a cycle length >= {min}")))
        };
        match t {
            "cycletype" => Ok(Statistic::CycleType),
            "image" => Ok(Statistic::Image),
            "m" => Ok(Statistic::MinFixed),
            "M" => Ok(Statistic::MaxFixed),
            "delta" => Ok(Statistic::MinSpacing),
            "Delta" => Ok(Statistic::MaxSpacing),
            _ => {
                if let Some(rest) = t.strip_prefix("C_") {
                    Ok(Statistic::Count(level(rest, 1)?))
                } else if let Some(rest) = t.strip_prefix("S_") {
                    Ok(Statistic::Sum(level(rest, 1)?))
                } else if let Some(rest) = t.strip_prefix("r_") {
                    Ok(Statistic::MinRange(level(rest, 2)?))
                } else if let Some(rest) = t.strip_prefix("R_") {
                    Ok(Statistic::MaxRange(level(rest, 2)?))
                } else {
                    Err(Error::parse(t, "unknown statistic"))
                }
            }
        }
    }
}
