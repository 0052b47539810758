//! Goodness-of-fit statistics.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch {
            expected: a,
            actual: b,
        });
    }
    Ok(())
}

/// `F_N(x) = #{samples <= x} / N` at each grid point.
pub fn empirical_cdf(samples: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len().max(1) as f64;
    grid.iter()
        .map(|&x| sorted.partition_point(|&s| s <= x) as f64 / n)
        .collect()
}

/// `max_i |ecdf_i - cdf_i|` over a shared grid.
pub fn ks_distance(ecdf: &[f64], cdf: &[f64]) -> Result<f64> {
    same_len(ecdf.len(), cdf.len())?;
    Ok(ecdf
        .iter()
        .zip(cdf)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Two-sample KS distance restricted to a grid.
pub fn ks_two_sample_on_grid(a: &[f64], b: &[f64], grid: &[f64]) -> f64 {
    let fa = empirical_cdf(a, grid);
    let fb = empirical_cdf(b, grid);
    ks_distance(&fa, &fb).expect("same grid")
}

/// `(1/2) Σ |p_i - q_i|`.
pub fn tv_distance(p: &[f64], q: &[f64]) -> Result<f64> {
    same_len(p.len(), q.len())?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Result of a chi-square test after pooling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Number of cells after pooling.
    pub cells: usize,
    /// Fewer than two cells survived pooling; the statistic is meaningless.
    pub insufficient: bool,
}

/// Minimum expected count per pooled cell.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pools adjacent cells left to right until each has expected count at
/// least [`MIN_EXPECTED`]; an underfull remainder joins the last cell.
pub fn pool_cells(observed: &[f64], expected: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    same_len(observed.len(), expected.len())?;
    let mut obs = Vec::new();
    let mut exp = Vec::new();
    let (mut o, mut e) = (0.0, 0.0);
    for (&oi, &ei) in observed.iter().zip(expected) {
        o += oi;
        e += ei;
        if e >= MIN_EXPECTED {
            obs.push(o);
            exp.push(e);
            o = 0.0;
            e = 0.0;
        }
    }
    if o > 0.0 || e > 0.0 {
        match (obs.last_mut(), exp.last_mut()) {
            (Some(lo), Some(le)) => {
                *lo += o;
                *le += e;
            }
            _ => {
                obs.push(o);
                exp.push(e);
            }
        }
    }
    Ok((obs, exp))
}

/// Pearson chi-square of observed against expected counts, with
/// `cells - 1` degrees of freedom and the p-value from the regularized
/// upper incomplete gamma function.
pub fn chi_square_gof(observed: &[f64], expected: &[f64]) -> Result<ChiSquare> {
    let (obs, exp) = pool_cells(observed, expected)?;
    let cells = obs.len();
    if cells < 2 {
        return Ok(ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
            cells,
            insufficient: true,
        });
    }
    let statistic: f64 = obs
        .iter()
        .zip(&exp)
        .map(|(o, e)| if *e > 0.0 { (o - e).powi(2) / e } else { 0.0 })
        .sum();
    let dof = cells - 1;
    let p_value = if statistic <= 0.0 {
        1.0
    } else {
        gamma_ur(dof as f64 / 2.0, statistic / 2.0)
    };
    Ok(ChiSquare {
        statistic,
        dof,
        p_value,
        cells,
        insufficient: false,
    })
}

/// Dvoretzky-Kiefer-Wolfowitz half-width `sqrt(ln(2/α) / (2N))`.
pub fn dkw_band(sample_size: usize, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * sample_size as f64)).sqrt()
}

/// `sqrt(p (1-p) / N)`.
pub fn binomial_se(p: f64, sample_size: usize) -> f64 {
    (p * (1.0 - p) / sample_size as f64).sqrt()
}

/// Sample mean and standard error of the mean.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Pearson correlation, `None` when either sample is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<Option<f64>> {
    same_len(x.len(), y.len())?;
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Ok(None);
    }
    Ok(Some(sxy / (sxx * syy).sqrt()))
}

/// `count` equispaced points strictly inside `(lo, hi)`, dropping any that
/// coincide with an atom.
pub fn interior_grid(lo: f64, hi: f64, count: usize, atoms: &[f64]) -> Vec<f64> {
    (1..=count)
        .map(|i| lo + (hi - lo) * i as f64 / (count + 1) as f64)
        .filter(|x| atoms.iter().all(|a| (x - a).abs() > 1e-12))
        .collect()
}
