//! Axis-aligned boxes inside the level spaces `X_k` and their finite unions.
//!
//! `X_k` is the set of `x ∈ [0,1]^k` whose first coordinate is the minimum.
//! The Lebesgue volume of `B ∩ X_k` for a box `B = Π [a_i, b_i]` is
//! `∫_{a_1}^{b_1} Π_{i>=2} (b_i - max(a_i, x))_+ dx`, integrated exactly
//! piece by piece between the breakpoints `{a_i, b_i}`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::weights::WeightSequence;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Self {
        Interval {
            lo,
            hi,
            lo_closed: true,
            hi_closed: true,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_closed { x >= self.lo } else { x > self.lo };
        let below = if self.hi_closed { x <= self.hi } else { x < self.hi };
        above && below
    }

    pub fn length(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }
}

/// A box at level `k`: one interval per coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxSpec {
    level: usize,
    intervals: Vec<Interval>,
}

impl BoxSpec {
    pub fn new(intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::InvalidArgument("a box needs at least one interval".into()));
        }
        for (i, iv) in intervals.iter().enumerate() {
            let ordered = 0.0 <= iv.lo && iv.lo <= iv.hi && iv.hi <= 1.0;
            if !ordered {
                return Err(Error::InvalidArgument(format!(
                    "interval {} = ({}, {}) must satisfy 0 <= a <= b <= 1",
                    i + 1,
                    iv.lo,
                    iv.hi
                )));
            }
        }
        Ok(BoxSpec {
            level: intervals.len(),
            intervals,
        })
    }

    /// Closed box `Π [a_i, b_i]`.
    pub fn closed(bounds: &[(f64, f64)]) -> Result<Self> {
        BoxSpec::new(bounds.iter().map(|&(a, b)| Interval::closed(a, b)).collect())
    }

    /// The whole space `X_k`.
    pub fn full(level: usize) -> Self {
        BoxSpec::closed(&vec![(0.0, 1.0); level]).expect("unit box is valid")
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// Membership of a level-`k` point, honouring endpoint flags and the
    /// min-first constraint of `X_k`.
    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.level
            && point[1..].iter().all(|&x| x >= point[0])
            && self.intervals.iter().zip(point).all(|(iv, &x)| iv.contains(x))
    }

    /// Lebesgue volume of `B ∩ X_k`.
    pub fn volume_in_level(&self) -> f64 {
        let first = self.intervals[0];
        let rest = &self.intervals[1..];
        if first.length() == 0.0 || rest.iter().any(|iv| iv.length() == 0.0) {
            return 0.0;
        }
        let mut breaks = vec![first.lo, first.hi];
        for iv in rest {
            for p in [iv.lo, iv.hi] {
                if p > first.lo && p < first.hi {
                    breaks.push(p);
                }
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();

        let mut total = 0.0;
        for w in breaks.windows(2) {
            let (l, r) = (w[0], w[1]);
            if r <= l {
                continue;
            }
            let mid = 0.5 * (l + r);
            // integrand on (l, r): Π constants × Π (b_i - x)
            let mut poly = vec![1.0];
            let mut vanishes = false;
            for iv in rest {
                if iv.hi <= mid {
                    vanishes = true;
                    break;
                } else if mid < iv.lo {
                    poly.iter_mut().for_each(|c| *c *= iv.hi - iv.lo);
                } else {
                    poly = times_linear(&poly, iv.hi);
                }
            }
            if !vanishes {
                total += integrate(&poly, l, r);
            }
        }
        total
    }

    /// Intersection with another box at the same level, `None` if it has
    /// zero volume. Endpoint flags are dropped (irrelevant for volume).
    fn intersect(&self, other: &BoxSpec) -> Option<BoxSpec> {
        debug_assert_eq!(self.level, other.level);
        let mut out = Vec::with_capacity(self.level);
        for (a, b) in self.intervals.iter().zip(&other.intervals) {
            let lo = a.lo.max(b.lo);
            let hi = a.hi.min(b.hi);
            if hi <= lo {
                return None;
            }
            out.push(Interval::closed(lo, hi));
        }
        Some(BoxSpec {
            level: self.level,
            intervals: out,
        })
    }
}

/// `p(x) · (b - x)` with ascending coefficients.
fn times_linear(poly: &[f64], b: f64) -> Vec<f64> {
    let mut out = vec![0.0; poly.len() + 1];
    for (i, &c) in poly.iter().enumerate() {
        out[i] += b * c;
        out[i + 1] -= c;
    }
    out
}

fn integrate(poly: &[f64], l: f64, r: f64) -> f64 {
    let mut rp = r;
    let mut lp = l;
    let mut total = 0.0;
    for (i, &c) in poly.iter().enumerate() {
        total += c * (rp - lp) / (i + 1) as f64;
        rp *= r;
        lp *= l;
    }
    total
}

/// Above this many boxes at one level the union volume switches from
/// inclusion-exclusion to an elementary-cell refinement.
const INCLUSION_EXCLUSION_LIMIT: usize = 12;

/// A finite union of boxes, possibly at different levels.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoxUnion {
    boxes: Vec<BoxSpec>,
}

impl BoxUnion {
    pub fn new(boxes: Vec<BoxSpec>) -> Self {
        BoxUnion { boxes }
    }

    pub fn empty() -> Self {
        BoxUnion::default()
    }

    pub fn single(b: BoxSpec) -> Self {
        BoxUnion { boxes: vec![b] }
    }

    pub fn boxes(&self) -> &[BoxSpec] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn max_level(&self) -> usize {
        self.boxes.iter().map(BoxSpec::level).max().unwrap_or(0)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(point))
    }

    fn by_level(&self) -> BTreeMap<usize, Vec<&BoxSpec>> {
        let mut map: BTreeMap<usize, Vec<&BoxSpec>> = BTreeMap::new();
        for b in &self.boxes {
            map.entry(b.level()).or_default().push(b);
        }
        map
    }

    /// Lebesgue volume of `U ∩ X_k` for each level present.
    pub fn volume_by_level(&self) -> BTreeMap<usize, f64> {
        self.by_level()
            .into_iter()
            .map(|(k, boxes)| {
                let v = if boxes.len() <= INCLUSION_EXCLUSION_LIMIT {
                    union_volume_inclusion_exclusion(&boxes)
                } else {
                    union_volume_refinement(&boxes)
                };
                (k, v)
            })
            .collect()
    }
}

fn union_volume_inclusion_exclusion(boxes: &[&BoxSpec]) -> f64 {
    fn recurse(boxes: &[&BoxSpec], start: usize, current: Option<BoxSpec>, depth: usize) -> f64 {
        let mut total = 0.0;
        for i in start..boxes.len() {
            let next = match &current {
                None => Some(boxes[i].clone()),
                Some(c) => c.intersect(boxes[i]),
            };
            if let Some(b) = next {
                let sign = if depth % 2 == 0 { 1.0 } else { -1.0 };
                total += sign * b.volume_in_level();
                total += recurse(boxes, i + 1, Some(b), depth + 1);
            }
        }
        total
    }
    recurse(boxes, 0, None, 0)
}

fn union_volume_refinement(boxes: &[&BoxSpec]) -> f64 {
    let level = boxes[0].level();
    let axes: Vec<Vec<f64>> = (0..level)
        .map(|d| {
            let mut pts: Vec<f64> = boxes
                .iter()
                .flat_map(|b| [b.intervals[d].lo, b.intervals[d].hi])
                .collect();
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            pts
        })
        .collect();
    let mut index = vec![0usize; level];
    let mut total = 0.0;
    'cells: loop {
        let cell: Vec<Interval> = (0..level)
            .map(|d| Interval::closed(axes[d][index[d]], axes[d][index[d] + 1]))
            .collect();
        let centre: Vec<f64> = cell.iter().map(|iv| 0.5 * (iv.lo + iv.hi)).collect();
        let covered = boxes.iter().any(|b| {
            b.intervals
                .iter()
                .zip(&centre)
                .all(|(iv, &x)| iv.lo <= x && x <= iv.hi)
        });
        if covered {
            total += BoxSpec {
                level,
                intervals: cell,
            }
            .volume_in_level();
        }
        for d in 0..level {
            index[d] += 1;
            if index[d] + 1 < axes[d].len() {
                continue 'cells;
            }
            index[d] = 0;
        }
        break;
    }
    total
}

/// `λ(U) = Σ_k θ_k · vol(U ∩ X_k)`.
pub fn intensity(ws: &WeightSequence, u: &BoxUnion) -> f64 {
    u.volume_by_level()
        .into_iter()
        .map(|(k, v)| ws.theta(k) * v)
        .sum()
}

/// `exp(-λ(U))`, the probability that the limiting Poisson process has no
/// point in `U`.
pub fn avoidance_limit(ws: &WeightSequence, u: &BoxUnion) -> f64 {
    (-intensity(ws, u)).exp()
}

impl fmt::Display for BoxSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "box:k={}", self.level)?;
        for iv in &self.intervals {
            write!(f, ";{},{}", iv.lo, iv.hi)?;
        }
        let open: Vec<String> = self
            .intervals
            .iter()
            .enumerate()
            .filter(|(_, iv)| !iv.hi_closed)
            .map(|(i, _)| (i + 1).to_string())
            .collect();
        if !open.is_empty() {
            write!(f, ";open={}", open.join(","))?;
        }
        Ok(())
    }
}

impl fmt::Display for BoxUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.boxes.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join(";"))
    }
}

/// Parses `box:k=<level>;<a1>,<b1>;...;<ak>,<bk>[;open=i,j]`, several of
/// which may follow each other separated by `;`. Listed indices get open
/// right endpoints. An empty string is the empty union.
impl FromStr for BoxUnion {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        struct Partial {
            level: usize,
            intervals: Vec<Interval>,
            open: Vec<usize>,
        }
        fn finish(p: Partial, token: &str) -> Result<BoxSpec> {
            if p.intervals.len() != p.level {
                return Err(Error::parse(
                    token,
                    format!("box declares k={} but has {} intervals", p.level, p.intervals.len()),
                ));
            }
            let mut intervals = p.intervals;
            for i in p.open {
                if i == 0 || i > intervals.len() {
                    return Err(Error::parse(i.to_string(), "open index out of range"));
                }
                intervals[i - 1].hi_closed = false;
            }
            BoxSpec::new(intervals).map_err(|e| Error::parse(token, e.to_string()))
        }

        let spec = s.trim().to_ascii_lowercase();
        let mut boxes = Vec::new();
        let mut current: Option<(Partial, String)> = None;
        for raw in spec.split(';') {
            let token = raw.trim();
            if token.is_empty() {
                continue;
            }
            if let Some(rest) = token.strip_prefix("box:") {
                if let Some((p, t)) = current.take() {
                    boxes.push(finish(p, &t)?);
                }
                let level = rest
                    .trim()
                    .strip_prefix("k=")
                    .and_then(|v| v.trim().parse::<usize>().ok())
                    .filter(|&k| k >= 1)
                    .ok_or_else(|| Error::parse(token, "expected `box:k=<level>` with level >= 1"))?;
                current = Some((
                    Partial {
                        level,
                        intervals: Vec::new(),
                        open: Vec::new(),
                    },
                    token.to_string(),
                ));
                continue;
            }
            let (partial, _) = current
                .as_mut()
                .ok_or_else(|| Error::parse(token, "expected `box:k=<level>` first"))?;
            if let Some(list) = token.strip_prefix("open=") {
                for idx in list.split(',') {
                    let i = idx
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| Error::parse(idx.trim(), "expected an interval index"))?;
                    partial.open.push(i);
                }
                continue;
            }
            let (a, b) = token
                .split_once(',')
                .ok_or_else(|| Error::parse(token, "expected `<a>,<b>`"))?;
            let parse = |v: &str| {
                v.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| Error::parse(v.trim(), "expected a real endpoint"))
            };
            let (a, b) = (parse(a)?, parse(b)?);
            if !(0.0 <= a && a <= b && b <= 1.0) {
                return Err(Error::parse(token, "endpoints must satisfy 0 <= a <= b <= 1"));
            }
            if partial.intervals.len() == partial.level {
                return Err(Error::parse(token, "more intervals than the declared level"));
            }
            partial.intervals.push(Interval::closed(a, b));
        }
        if let Some((p, t)) = current.take() {
            boxes.push(finish(p, &t)?);
        }
        Ok(BoxUnion { boxes })
    }
}
