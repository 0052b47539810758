//! Limiting distributions of cycle statistics.

pub mod bessel;
pub mod laplace;
pub mod quadrature;
pub mod spacings;

use std::fmt;

pub use bessel::{bessel_i, ln_bessel_i};
pub use laplace::{
    cdf_sum_fixed_points, laplace_additive, laplace_series_sum_fixed, laplace_sum_k, level_integral,
    Quadrature,
};
pub use spacings::{cdf_max_spacing, cdf_min_spacing, sample_limit_spacings, MixtureSample};

use crate::error::{Error, Result};
use crate::logspace::ln_factorial;
use crate::statistics::Statistic;
use crate::weights::WeightSequence;

/// Poisson pmf with mean `θ_k / k` at `j`.
pub fn poisson_count_pmf(theta_k: f64, k: usize, j: usize) -> f64 {
    let mean = theta_k / k as f64;
    if mean == 0.0 {
        return if j == 0 { 1.0 } else { 0.0 };
    }
    (j as f64 * mean.ln() - mean - ln_factorial(j)).exp()
}

fn range_kernel(x: f64, k: usize) -> f64 {
    let k_f = k as f64;
    k_f * x.powi(k as i32 - 1) - (k_f - 1.0) * x.powi(k as i32)
}

/// `P(r^{(k)} <= x) = 1 - exp{-(θ_k/k)(k x^{k-1} - (k-1) x^k)}` on `[0, 1)`.
pub fn cdf_min_range(x: f64, theta_k: f64, k: usize) -> f64 {
    assert!(k >= 2, "range laws need k >= 2");
    if x < 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        -(-theta_k / k as f64 * range_kernel(x, k)).exp_m1()
    }
}

/// `P(R^{(k)} <= x) = exp{(θ_k/k)(k x^{k-1} - (k-1) x^k - 1)}` on `[0, 1)`.
pub fn cdf_max_range(x: f64, theta_k: f64, k: usize) -> f64 {
    assert!(k >= 2, "range laws need k >= 2");
    if x < 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        (theta_k / k as f64 * (range_kernel(x, k) - 1.0)).exp()
    }
}

/// `P(m <= x) = 1 - e^{-θ_1 x}` on `[0, 1)`.
pub fn cdf_min_fixed_point(x: f64, theta_1: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        -(-theta_1 * x).exp_m1()
    }
}

/// `P(M <= x) = e^{θ_1 (x - 1)}` on `[0, 1)`.
pub fn cdf_max_fixed_point(x: f64, theta_1: f64) -> f64 {
    if x < 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        (theta_1 * (x - 1.0)).exp()
    }
}

/// A point mass carried by a limit law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// A limit law with a CDF that can be evaluated pointwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitLaw {
    SumFixed { theta_1: f64 },
    MinRange { theta_k: f64, k: usize },
    MaxRange { theta_k: f64, k: usize },
    MinFixed { theta_1: f64 },
    MaxFixed { theta_1: f64 },
    MinSpacing { theta_1: f64 },
    MaxSpacing { theta_1: f64 },
}

impl LimitLaw {
    /// Law of the scaled statistic `stat / n` under `ws`, when one is known
    /// in closed form.
    pub fn for_statistic(stat: Statistic, ws: &WeightSequence) -> Option<LimitLaw> {
        let theta_1 = ws.theta(1);
        Some(match stat {
            Statistic::Sum(1) => LimitLaw::SumFixed { theta_1 },
            Statistic::MinRange(k) => LimitLaw::MinRange { theta_k: ws.theta(k), k },
            Statistic::MaxRange(k) => LimitLaw::MaxRange { theta_k: ws.theta(k), k },
            Statistic::MinFixed => LimitLaw::MinFixed { theta_1 },
            Statistic::MaxFixed => LimitLaw::MaxFixed { theta_1 },
            Statistic::MinSpacing => LimitLaw::MinSpacing { theta_1 },
            Statistic::MaxSpacing => LimitLaw::MaxSpacing { theta_1 },
            _ => return None,
        })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match *self {
            LimitLaw::SumFixed { theta_1 } => cdf_sum_fixed_points(x, theta_1, bessel::DEFAULT_EPS),
            LimitLaw::MinRange { theta_k, k } => cdf_min_range(x, theta_k, k),
            LimitLaw::MaxRange { theta_k, k } => cdf_max_range(x, theta_k, k),
            LimitLaw::MinFixed { theta_1 } => cdf_min_fixed_point(x, theta_1),
            LimitLaw::MaxFixed { theta_1 } => cdf_max_fixed_point(x, theta_1),
            LimitLaw::MinSpacing { theta_1 } => cdf_min_spacing(x, theta_1),
            LimitLaw::MaxSpacing { theta_1 } => cdf_max_spacing(x, theta_1),
        }
    }

    /// Point masses of the law. Each one corresponds to the event that the
    /// relevant cycles are absent.
    pub fn atoms(&self) -> Vec<Atom> {
        let (location, mass) = match *self {
            LimitLaw::SumFixed { theta_1 } => (0.0, (-theta_1).exp()),
            LimitLaw::MinRange { theta_k, k } => (1.0, (-theta_k / k as f64).exp()),
            LimitLaw::MaxRange { theta_k, k } => (0.0, (-theta_k / k as f64).exp()),
            LimitLaw::MinFixed { theta_1 }
            | LimitLaw::MinSpacing { theta_1 }
            | LimitLaw::MaxSpacing { theta_1 } => (1.0, (-theta_1).exp()),
            LimitLaw::MaxFixed { theta_1 } => (0.0, (-theta_1).exp()),
        };
        vec![Atom { location, mass }]
    }

    /// Interval outside of which the CDF is constant at 0 or 1.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            LimitLaw::SumFixed { theta_1 } => (0.0, sum_fixed_upper(theta_1)),
            _ => (0.0, 1.0),
        }
    }
}

/// A point beyond which the CDF of `S^{(1)}` exceeds `1 - 1e-6`; the sum is
/// at most the Poisson count of uniforms.
fn sum_fixed_upper(theta_1: f64) -> f64 {
    let mut cdf = 0.0;
    let mut j = 0usize;
    while cdf < 1.0 - 1e-6 {
        cdf += poisson_count_pmf(theta_1, 1, j);
        j += 1;
    }
    j.max(1) as f64
}

impl fmt::Display for LimitLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitLaw::SumFixed { theta_1 } => write!(f, "S1(theta_1={theta_1})"),
            LimitLaw::MinRange { theta_k, k } => write!(f, "minrange(theta_{k}={theta_k})"),
            LimitLaw::MaxRange { theta_k, k } => write!(f, "maxrange(theta_{k}={theta_k})"),
            LimitLaw::MinFixed { theta_1 } => write!(f, "m(theta_1={theta_1})"),
            LimitLaw::MaxFixed { theta_1 } => write!(f, "M(theta_1={theta_1})"),
            LimitLaw::MinSpacing { theta_1 } => write!(f, "delta(theta_1={theta_1})"),
            LimitLaw::MaxSpacing { theta_1 } => write!(f, "Delta(theta_1={theta_1})"),
        }
    }
}

/// Builds a law from its CLI name. `k` is required for the range laws.
pub fn law_by_name(name: &str, theta: f64, k: Option<usize>) -> Result<LimitLaw> {
    if !(theta >= 0.0 && theta.is_finite()) {
        return Err(Error::InvalidArgument(format!("theta must be finite and >= 0, got {theta}")));
    }
    let level = || match k {
        Some(k) if k >= 2 => Ok(k),
        other => Err(Error::InvalidArgument(format!("range laws need k >= 2, got {other:?}"))),
    };
    Ok(match name {
        "S1" => LimitLaw::SumFixed { theta_1: theta },
        "minrange" => LimitLaw::MinRange { theta_k: theta, k: level()? },
        "maxrange" => LimitLaw::MaxRange { theta_k: theta, k: level()? },
        "m" => LimitLaw::MinFixed { theta_1: theta },
        "M" => LimitLaw::MaxFixed { theta_1: theta },
        "delta" => LimitLaw::MinSpacing { theta_1: theta },
        "Delta" => LimitLaw::MaxSpacing { theta_1: theta },
        other => return Err(Error::parse(other, "unknown law")),
    })
}
