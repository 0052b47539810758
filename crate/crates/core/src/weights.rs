//! Cycle weights `θ_k` and the normalization constants `h_n`.
//!
//! A permutation `π` of `[n]` has probability `Π_k θ_k^{C_k(π)} / (h_n n!)`,
//! where `C_k(π)` counts its `k`-cycles. The constants are computed from
//! `n h_n = Σ_{k=1}^{n} θ_k h_{n-k}`, `h_0 = 1`, entirely in log scale.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::logspace::{log_sum_exp, LogWeight};

/// How an explicit weight list continues past its last entry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TailRule {
    ConstantFromLast,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum WeightSequence {
    /// `θ_k = 1`; the uniform measure on `S_n`.
    Uniform,
    /// `θ_k = θ`.
    Ewens { theta: f64 },
    /// `θ_k = c k^γ`.
    Polynomial { c: f64, gamma: f64 },
    /// `θ_1, θ_2, ...` given directly.
    Explicit { values: Vec<f64>, tail: TailRule },
}

impl WeightSequence {
    pub fn ewens(theta: f64) -> Result<Self> {
        if !(theta.is_finite() && theta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "ewens parameter must be positive and finite, got {theta}"
            )));
        }
        Ok(WeightSequence::Ewens { theta })
    }

    pub fn polynomial(c: f64, gamma: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "polynomial scale must be positive and finite, got {c}"
            )));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "polynomial exponent must be finite, got {gamma}"
            )));
        }
        Ok(WeightSequence::Polynomial { c, gamma })
    }

    pub fn explicit(values: Vec<f64>, tail: TailRule) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument(
                "explicit weight list must not be empty".into(),
            ));
        }
        if let Some(bad) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "explicit weights must be finite and non-negative, got {bad}"
            )));
        }
        Ok(WeightSequence::Explicit { values, tail })
    }

    /// The weight `θ_k` of a `k`-cycle, `k >= 1`.
    pub fn theta(&self, k: usize) -> f64 {
        assert!(k >= 1, "cycle lengths start at 1");
        match self {
            WeightSequence::Uniform => 1.0,
            WeightSequence::Ewens { theta } => *theta,
            WeightSequence::Polynomial { c, gamma } => c * (k as f64).powf(*gamma),
            WeightSequence::Explicit { values, tail } => match values.get(k - 1) {
                Some(v) => *v,
                None => match tail {
                    TailRule::ConstantFromLast => *values.last().expect("non-empty"),
                    TailRule::Zero => 0.0,
                },
            },
        }
    }

    pub fn log_theta(&self, k: usize) -> f64 {
        match self {
            WeightSequence::Polynomial { c, gamma } => c.ln() + gamma * (k as f64).ln(),
            _ => self.theta(k).ln(),
        }
    }

    /// Limiting Poisson mean `θ_k / k` of the number of `k`-cycles.
    pub fn poisson_mean(&self, k: usize) -> f64 {
        self.theta(k) / k as f64
    }

    /// `Σ_{k > k_max} θ_k / k` when it is finite, `None` when it diverges.
    ///
    /// This is the expected number of limit-process points that a
    /// simulation truncated at `k_max` leaves out.
    pub fn truncated_mass(&self, k_max: usize) -> Option<f64> {
        match self {
            WeightSequence::Uniform | WeightSequence::Ewens { .. } => None,
            WeightSequence::Polynomial { c, gamma } => {
                if *gamma >= 0.0 {
                    return None;
                }
                // c Σ k^{γ-1}: explicit terms, then an Euler-Maclaurin tail.
                let p = 1.0 - gamma;
                let cutoff = (k_max + 1).max(1000);
                let head: f64 = ((k_max + 1)..cutoff)
                    .map(|k| (k as f64).powf(-p))
                    .sum();
                let a = cutoff as f64;
                let tail = a.powf(1.0 - p) / (p - 1.0) + 0.5 * a.powf(-p)
                    + p * a.powf(-p - 1.0) / 12.0;
                Some(c * (head + tail))
            }
            WeightSequence::Explicit { values, tail } => {
                let listed: f64 = values
                    .iter()
                    .enumerate()
                    .skip(k_max)
                    .map(|(i, v)| v / (i + 1) as f64)
                    .sum();
                match tail {
                    TailRule::Zero => Some(listed),
                    TailRule::ConstantFromLast if *values.last().expect("non-empty") == 0.0 => {
                        Some(listed)
                    }
                    TailRule::ConstantFromLast => None,
                }
            }
        }
    }
}

impl fmt::Display for WeightSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSequence::Uniform => write!(f, "uniform"),
            WeightSequence::Ewens { theta } => write!(f, "ewens:{theta}"),
            WeightSequence::Polynomial { c, gamma } => write!(f, "poly:{c},{gamma}"),
            WeightSequence::Explicit { values, tail } => {
                let list: Vec<String> = values.iter().map(|v| v.to_string()).collect();
                let tail = match tail {
                    TailRule::ConstantFromLast => "const",
                    TailRule::Zero => "zero",
                };
                write!(f, "list:{};tail={tail}", list.join(","))
            }
        }
    }
}

fn parse_real(token: &str) -> Result<f64> {
    let t = token.trim();
    t.parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::parse(t, "expected a finite real number"))
}

/// Parses `uniform`, `ewens:<theta>`, `poly:<c>,<gamma>` or
/// `list:<v1>,<v2>,...[;tail=const|zero]`, case-insensitively.
/// A list without a tail rule continues with zeros.
impl FromStr for WeightSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let spec = s.trim().to_ascii_lowercase();
        let (kind, args) = match spec.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a)),
            None => (spec.as_str(), None),
        };
        let wrap = |e: Error, token: &str| match e {
            Error::InvalidArgument(reason) => Error::parse(token.trim(), reason),
            other => other,
        };
        match (kind, args) {
            ("uniform", None) => Ok(WeightSequence::Uniform),
            ("uniform", Some(a)) => Err(Error::parse(a, "uniform takes no arguments")),
            ("ewens", Some(a)) => {
                let theta = parse_real(a)?;
                WeightSequence::ewens(theta).map_err(|e| wrap(e, a))
            }
            ("poly", Some(a)) => {
                let parts: Vec<&str> = a.split(',').collect();
                if parts.len() != 2 {
                    return Err(Error::parse(a, "poly expects `<c>,<gamma>`"));
                }
                let c = parse_real(parts[0])?;
                let gamma = parse_real(parts[1])?;
                WeightSequence::polynomial(c, gamma).map_err(|e| wrap(e, parts[0]))
            }
            ("list", Some(a)) => {
                let (list, options) = match a.split_once(';') {
                    Some((l, o)) => (l, Some(o)),
                    None => (a, None),
                };
                let tail = match options.map(str::trim) {
                    None => TailRule::Zero,
                    Some(opt) => match opt.split_once('=') {
                        Some((key, value)) if key.trim() == "tail" => match value.trim() {
                            "const" => TailRule::ConstantFromLast,
                            "zero" => TailRule::Zero,
                            other => {
                                return Err(Error::parse(other, "tail must be `const` or `zero`"))
                            }
                        },
                        _ => return Err(Error::parse(opt, "expected `tail=const|zero`")),
                    },
                };
                let values = list
                    .split(',')
                    .map(|v| {
                        let x = parse_real(v)?;
                        if x < 0.0 {
                            return Err(Error::parse(v.trim(), "weights must be non-negative"));
                        }
                        Ok(x)
                    })
                    .collect::<Result<Vec<f64>>>()?;
                WeightSequence::explicit(values, tail).map_err(|e| wrap(e, list))
            }
            (k @ ("ewens" | "poly" | "list"), None) => {
                Err(Error::parse(k, "missing `:` and arguments"))
            }
            (other, _) => Err(Error::parse(
                other,
                "unknown weight kind (expected uniform, ewens, poly or list)",
            )),
        }
    }
}

/// `h_0, ..., h_{n_max}` in log scale, with `ln θ_k` cached for `k <= n_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationTable {
    n_max: usize,
    log_h: Vec<LogWeight>,
    log_theta: Vec<f64>,
}

impl NormalizationTable {
    pub fn new(ws: &WeightSequence, n_max: usize) -> Self {
        // index 0 is unused so that log_theta[k] = ln θ_k
        let mut log_theta = Vec::with_capacity(n_max + 1);
        log_theta.push(f64::NEG_INFINITY);
        log_theta.extend((1..=n_max).map(|k| ws.log_theta(k)));

        let mut log_h = Vec::with_capacity(n_max + 1);
        log_h.push(LogWeight::ONE);
        let mut terms = Vec::with_capacity(n_max);
        for n in 1..=n_max {
            terms.clear();
            terms.extend((1..=n).map(|k| log_theta[k] + log_h[n - k].log_value));
            let lse = log_sum_exp(&terms);
            log_h.push(LogWeight::from_log(lse - (n as f64).ln()));
        }
        NormalizationTable {
            n_max,
            log_h,
            log_theta,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn log_h(&self, n: usize) -> LogWeight {
        self.log_h[n]
    }

    pub fn h(&self, n: usize) -> f64 {
        self.log_h[n].value()
    }

    pub fn log_theta(&self, k: usize) -> f64 {
        self.log_theta[k]
    }

    /// First `n <= n_max` with `h_n = 0`, if any.
    pub fn first_degenerate(&self) -> Option<usize> {
        self.log_h.iter().position(|h| h.is_zero())
    }
}

/// Normalization constants `h_0..=h_{n_max}` for `ws`.
pub fn norm_constants(ws: &WeightSequence, n_max: usize) -> NormalizationTable {
    NormalizationTable::new(ws, n_max)
}

/// The ratios `h_{n-1}/h_n` for `n = 1..=n_max`. These should approach 1
/// for the limit theorems to apply at the working size.
pub fn stability_diagnostic(table: &NormalizationTable) -> Result<Vec<f64>> {
    if table.n_max() < 1 {
        return Err(Error::InvalidArgument(
            "stability diagnostic needs n_max >= 1".into(),
        ));
    }
    if let Some(n) = table.first_degenerate() {
        return Err(Error::DegenerateModel { n });
    }
    Ok((1..=table.n_max())
        .map(|n| (table.log_h(n - 1).log_value - table.log_h(n).log_value).exp())
        .collect())
}

/// A warning when `|h_{n-1}/h_n - 1| > tolerance` at size `n`.
pub fn stability_warning(table: &NormalizationTable, n: usize, tolerance: f64) -> Option<String> {
    if n == 0 || n > table.n_max() {
        return None;
    }
    let (prev, cur) = (table.log_h(n - 1), table.log_h(n));
    if cur.is_zero() {
        return Some(format!("h_{n} = 0: the model is degenerate at n = {n}"));
    }
    let ratio = (prev.log_value - cur.log_value).exp();
    ((ratio - 1.0).abs() > tolerance).then(|| {
        format!("h_{{n-1}}/h_n = {ratio:.6} at n = {n}; limit laws may be far from finite-n behaviour")
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    fn rising_factorial(theta: f64, n: usize) -> f64 {
        (0..n).map(|i| theta + i as f64).product()
    }

    fn factorial(n: usize) -> f64 {
        (1..=n).map(|i| i as f64).product()
    }

    #[test]
    fn theta_rules() {
        assert_eq!(WeightSequence::Uniform.theta(7), 1.0);
        assert_eq!(WeightSequence::ewens(2.0).unwrap().theta(3), 2.0);
        assert_eq!(WeightSequence::polynomial(1.0, -1.0).unwrap().theta(4), 0.25);
        let list = WeightSequence::explicit(vec![0.5, 2.0], TailRule::ConstantFromLast).unwrap();
        assert_eq!(list.theta(1), 0.5);
        assert_eq!(list.theta(9), 2.0);
        let list = WeightSequence::explicit(vec![0.5, 2.0], TailRule::Zero).unwrap();
        assert_eq!(list.theta(3), 0.0);
    }

    #[test]
    fn uniform_equals_ewens_one_and_flat_polynomial() {
        let e = WeightSequence::ewens(1.0).unwrap();
        let p = WeightSequence::polynomial(1.0, 0.0).unwrap();
        for k in 1..50 {
            assert_eq!(WeightSequence::Uniform.theta(k), e.theta(k));
            assert_eq!(WeightSequence::Uniform.theta(k), p.theta(k));
        }
    }

    #[test]
    fn uniform_normalization_is_one() {
        let table = norm_constants(&WeightSequence::Uniform, 5);
        for n in 0..=5 {
            assert!((table.h(n) - 1.0).abs() < 1e-14, "h_{n} = {}", table.h(n));
        }
    }

    #[test]
    fn ewens_two_h2_is_three() {
        let table = norm_constants(&WeightSequence::ewens(2.0).unwrap(), 2);
        assert!((table.h(2) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn ewens_matches_rising_factorial() {
        for theta in [0.5, 2.0, 7.5] {
            let ws = WeightSequence::ewens(theta).unwrap();
            let table = norm_constants(&ws, 60);
            for n in 0..=60 {
                let expected = rising_factorial(theta, n) / factorial(n);
                let rel = (table.h(n) - expected).abs() / expected;
                assert!(rel < 1e-10, "theta={theta} n={n} rel={rel}");
            }
        }
    }

    #[test]
    fn recurrence_identity_holds() {
        for ws in [
            WeightSequence::polynomial(1.0, 1.0).unwrap(),
            WeightSequence::polynomial(0.7, -0.5).unwrap(),
            WeightSequence::explicit(vec![0.3, 0.0, 2.0, 1.0], TailRule::ConstantFromLast).unwrap(),
        ] {
            let table = norm_constants(&ws, 40);
            for n in 1..=40 {
                let s: f64 = (1..=n).map(|k| ws.theta(k) * table.h(n - k)).sum();
                assert!((s / (n as f64 * table.h(n)) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn log_scale_survives_fast_growth() {
        // h_n = C(θ+n-1, n) for Ewens; here far beyond f64 range
        let (theta, n) = (500.0, 2000);
        let table = norm_constants(&WeightSequence::ewens(theta).unwrap(), n);
        let exact = ln_gamma(theta + n as f64) - ln_gamma(theta) - ln_gamma(n as f64 + 1.0);
        let got = table.log_h(n).log_value;
        assert!(exact > 1000.0);
        assert!((got - exact).abs() < 1e-10 * exact, "{got} vs {exact}");
    }

    #[test]
    fn stability_ratios() {
        let uniform = stability_diagnostic(&norm_constants(&WeightSequence::Uniform, 30)).unwrap();
        assert!(uniform.iter().all(|r| (r - 1.0).abs() < 1e-13));

        let theta = 2.0;
        let ratios =
            stability_diagnostic(&norm_constants(&WeightSequence::ewens(theta).unwrap(), 100))
                .unwrap();
        for (i, r) in ratios.iter().enumerate() {
            let n = (i + 1) as f64;
            assert!((r - n / (theta + n - 1.0)).abs() < 1e-12);
        }
        assert!((ratios[99] - 1.0).abs() < 0.05);
    }

    #[test]
    fn stability_flags_degenerate_and_empty() {
        let ws = WeightSequence::explicit(vec![0.0, 0.0, 3.0], TailRule::Zero).unwrap();
        let table = norm_constants(&ws, 2);
        assert_eq!(table.h(2), 0.0);
        assert!(matches!(
            stability_diagnostic(&table),
            Err(Error::DegenerateModel { n: 1 })
        ));
        assert!(stability_diagnostic(&norm_constants(&WeightSequence::Uniform, 0)).is_err());
    }

    #[test]
    fn stability_warning_threshold() {
        let table = norm_constants(&WeightSequence::ewens(2.0).unwrap(), 100);
        assert!(stability_warning(&table, 100, 0.05).is_none());
        assert!(stability_warning(&table, 3, 0.05).is_some());
    }

    #[test]
    fn parse_grammar() {
        assert_eq!("uniform".parse::<WeightSequence>().unwrap(), WeightSequence::Uniform);
        assert_eq!(" UNIFORM ".parse::<WeightSequence>().unwrap(), WeightSequence::Uniform);
        assert_eq!(
            "Ewens:2.5".parse::<WeightSequence>().unwrap(),
            WeightSequence::Ewens { theta: 2.5 }
        );
        assert_eq!(
            "poly:1,-0.5".parse::<WeightSequence>().unwrap(),
            WeightSequence::Polynomial { c: 1.0, gamma: -0.5 }
        );
        assert_eq!(
            "list:0,1,2;tail=const".parse::<WeightSequence>().unwrap(),
            WeightSequence::Explicit {
                values: vec![0.0, 1.0, 2.0],
                tail: TailRule::ConstantFromLast
            }
        );
        assert_eq!(
            "list:1.5".parse::<WeightSequence>().unwrap(),
            WeightSequence::Explicit {
                values: vec![1.5],
                tail: TailRule::Zero
            }
        );
    }

    #[test]
    fn parse_errors_name_token() {
        let cases = [
            ("ewens:abc", "abc"),
            ("ewens:-1", "-1"),
            ("poly:1", "1"),
            ("poly:0,1", "0"),
            ("list:1,x,2", "x"),
            ("list:1,-2", "-2"),
            ("list:1;tail=maybe", "maybe"),
            ("gauss:1", "gauss"),
            ("ewens", "ewens"),
        ];
        for (spec, token) in cases {
            match spec.parse::<WeightSequence>() {
                Err(Error::Parse { token: t, .. }) => assert_eq!(t, token, "spec {spec}"),
                other => panic!("{spec}: expected parse error, got {other:?}"),
            }
        }
    }

    #[test]
    fn display_round_trips() {
        for spec in ["uniform", "ewens:0.5", "poly:1,-0.5", "list:0,1,2;tail=const", "list:3;tail=zero"] {
            let ws: WeightSequence = spec.parse().unwrap();
            assert_eq!(ws.to_string().parse::<WeightSequence>().unwrap(), ws);
        }
    }

    #[test]
    fn truncated_mass() {
        assert!(WeightSequence::Uniform.truncated_mass(5).is_none());
        assert!(WeightSequence::polynomial(1.0, 0.5).unwrap().truncated_mass(5).is_none());
        let ws = WeightSequence::explicit(vec![1.0, 2.0, 3.0], TailRule::Zero).unwrap();
        assert!((ws.truncated_mass(1).unwrap() - 2.0).abs() < 1e-15);
        // Σ_{k>3} k^{-2} = π²/6 - 1 - 1/4 - 1/9
        let ws = WeightSequence::polynomial(1.0, -1.0).unwrap();
        let expected = std::f64::consts::PI.powi(2) / 6.0 - 1.0 - 0.25 - 1.0 / 9.0;
        assert!((ws.truncated_mass(3).unwrap() - expected).abs() < 1e-9);
    }
}
