//! Modified Bessel functions of the first kind of integer order,
//! `I_j(x) = Σ_{m>=0} (x/2)^{2m+j} / (m! (m+j)!)`, by the ascending series.

use crate::error::{Error, Result};
use crate::logspace::ln_factorial;

/// Default relative truncation tolerance for the series.
pub const DEFAULT_EPS: f64 = 1e-16;

const RESCALE_AT: f64 = 1e250;

/// `ln I_j(x)` for `x >= 0`. Terms are accumulated relative to the leading
/// one and rescaled as they grow, so the result stays finite far beyond
/// the range where `I_j(x)` itself overflows.
pub fn ln_bessel_i(order: u32, x: f64, eps: f64) -> f64 {
    assert!(x >= 0.0, "Bessel argument must be non-negative, got {x}");
    if x == 0.0 {
        return if order == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    let j = order as f64;
    let half = 0.5 * x;
    let quarter_sq = half * half;
    let ln_lead = j * half.ln() - ln_factorial(order as usize);

    let mut ln_scale = 0.0;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 0.0;
    loop {
        let ratio = quarter_sq / ((m + 1.0) * (m + 1.0 + j));
        term *= ratio;
        sum += term;
        m += 1.0;
        if sum > RESCALE_AT {
            sum /= RESCALE_AT;
            term /= RESCALE_AT;
            ln_scale += RESCALE_AT.ln();
        }
        // later ratios are smaller, so the tail is a geometric bound away
        let next = quarter_sq / ((m + 1.0) * (m + 1.0 + j));
        if next < 1.0 && term * next / (1.0 - next) <= eps * sum {
            break;
        }
    }
    ln_lead + ln_scale + sum.ln()
}

/// `I_j(x)` for `x >= 0`, or [`Error::Overflow`] carrying `ln I_j(x)` when
/// the value does not fit in an f64.
pub fn bessel_i(order: u32, x: f64, eps: f64) -> Result<f64> {
    let ln_value = ln_bessel_i(order, x, eps);
    let value = ln_value.exp();
    if value.is_infinite() {
        return Err(Error::Overflow {
            log_value: ln_value,
        });
    }
    Ok(value)
}
