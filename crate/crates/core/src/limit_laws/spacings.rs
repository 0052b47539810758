//! Limiting laws of the smallest and largest spacing between fixed points.

use rand_distr::{Distribution, Exp1};

use crate::logspace::ln_factorial;
use crate::point_process::poisson;
use crate::rng::RngStream;

/// Tail mass at which the Poisson mixture series are truncated.
pub const SERIES_TAIL: f64 = 1e-12;

/// One draw of the mixture: `ν ~ Poisson(θ_1)` and `X_1..X_{ν+1}` iid
/// unit exponentials.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureSample {
    pub nu: usize,
    pub x: Vec<f64>,
}

impl MixtureSample {
    pub fn draw(theta_1: f64, rng: &mut RngStream) -> Self {
        let nu = poisson(theta_1, rng) as usize;
        let x = (0..=nu)
            .map(|_| loop {
                let v: f64 = Exp1.sample(rng);
                if v > 0.0 {
                    break v;
                }
            })
            .collect();
        MixtureSample { nu, x }
    }

    /// `δ = X_{ν+1} / ((ν+1) Σ X_i)`.
    pub fn min_spacing(&self) -> f64 {
        let total: f64 = self.x.iter().sum();
        self.x[self.nu] / ((self.nu + 1) as f64 * total)
    }

    /// `Δ = Σ (X_i / i) / Σ X_i`.
    pub fn max_spacing(&self) -> f64 {
        let total: f64 = self.x.iter().sum();
        let weighted: f64 = self.x.iter().enumerate().map(|(i, x)| x / (i + 1) as f64).sum();
        weighted / total
    }
}

/// Draws `(δ, Δ)` from the limiting mixture.
pub fn sample_limit_spacings(theta_1: f64, rng: &mut RngStream) -> (f64, f64) {
    let sample = MixtureSample::draw(theta_1, rng);
    (sample.min_spacing(), sample.max_spacing())
}

/// `y^r` for `y > 0` and 0 otherwise, so that `pos_pow(0, 0) = 0`.
fn pos_pow(y: f64, r: usize) -> f64 {
    if y > 0.0 {
        y.powi(r as i32)
    } else {
        0.0
    }
}

/// Poisson(θ) weights `p_0, p_1, ...` up to the point where the remaining
/// tail is below `tail`.
pub(crate) fn poisson_weights(theta: f64, tail: f64) -> Vec<f64> {
    if theta == 0.0 {
        return vec![1.0];
    }
    let ln_theta = theta.ln();
    let mut weights = Vec::new();
    let mut r = 0usize;
    loop {
        let p = (r as f64 * ln_theta - theta - ln_factorial(r)).exp();
        weights.push(p);
        let q = theta / (r + 2) as f64;
        if q < 1.0 && p * q / (1.0 - q) < tail {
            break;
        }
        r += 1;
    }
    weights
}

/// `P(δ <= x) = 1 - Σ_r Pois_θ(r) (1 - (r+1)x)_+^r`.
pub fn cdf_min_spacing(x: f64, theta_1: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let survival: f64 = poisson_weights(theta_1, SERIES_TAIL)
        .iter()
        .enumerate()
        .map(|(r, p)| p * pos_pow(1.0 - (r + 1) as f64 * x, r))
        .sum();
    (1.0 - survival).clamp(0.0, 1.0)
}

/// `P(Δ <= x) = Σ_r Pois_θ(r) Σ_{j=0}^{r+1} (-1)^j C(r+1, j) (1 - jx)_+^r`.
pub fn cdf_max_spacing(x: f64, theta_1: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let total: f64 = poisson_weights(theta_1, SERIES_TAIL)
        .iter()
        .enumerate()
        .map(|(r, p)| {
            let mut binom = 1.0;
            let mut inner = 0.0;
            for j in 0..=r + 1 {
                let term = binom * pos_pow(1.0 - j as f64 * x, r);
                inner += if j % 2 == 0 { term } else { -term };
                binom *= (r + 1 - j) as f64 / (j + 1) as f64;
            }
            p * inner
        })
        .sum();
    total.clamp(0.0, 1.0)
}
