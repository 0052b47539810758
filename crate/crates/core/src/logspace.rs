//! Log-scale arithmetic for non-negative quantities.

use serde::{Deserialize, Serialize};

/// A non-negative real stored as its natural logarithm. Zero is `-inf`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct LogWeight {
    pub log_value: f64,
}

impl LogWeight {
    pub const ZERO: LogWeight = LogWeight {
        log_value: f64::NEG_INFINITY,
    };
    pub const ONE: LogWeight = LogWeight { log_value: 0.0 };

    pub fn from_value(value: f64) -> Self {
        debug_assert!(value >= 0.0, "LogWeight requires a non-negative value");
        LogWeight {
            log_value: value.ln(),
        }
    }

    pub fn from_log(log_value: f64) -> Self {
        LogWeight { log_value }
    }

    pub fn value(self) -> f64 {
        self.log_value.exp()
    }

    pub fn is_zero(self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }
}

impl std::ops::Mul for LogWeight {
    type Output = LogWeight;

    fn mul(self, rhs: LogWeight) -> LogWeight {
        if self.is_zero() || rhs.is_zero() {
            return LogWeight::ZERO;
        }
        LogWeight {
            log_value: self.log_value + rhs.log_value,
        }
    }
}

impl std::ops::Div for LogWeight {
    type Output = LogWeight;

    fn div(self, rhs: LogWeight) -> LogWeight {
        if self.is_zero() {
            return LogWeight::ZERO;
        }
        LogWeight {
            log_value: self.log_value - rhs.log_value,
        }
    }
}

/// `ln(Σ exp(x_i))`, returning `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

/// `ln(n!)`, exact summation for small `n`.
pub fn ln_factorial(n: usize) -> f64 {
    if n < 32 {
        (2..=n).map(|i| (i as f64).ln()).sum()
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// Neumaier-compensated summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}
