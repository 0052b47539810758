//! Experiment reports: JSON for machines, aligned text for people, CSV for
//! raw per-replicate values.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::gof::ChiSquare;
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonKind {
    /// Empirical pmf against a theoretical pmf.
    Pmf,
    /// Empirical CDF against a CDF on a grid.
    Cdf,
    /// Empirical frequency of one event against its probability.
    Probability,
    /// Empirical mean of `exp(-t X)` against a Laplace transform.
    Laplace,
    /// Two empirical CDFs on a grid.
    TwoSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub x: f64,
    pub empirical: f64,
    pub theory: f64,
}

/// One comparison between an empirical distribution and a reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub statistic: String,
    pub kind: ComparisonKind,
    /// What was measured, e.g. `C_1 at n=2000`.
    pub empirical: String,
    /// The reference distribution, e.g. `Poisson(mean=1)`.
    pub theory: String,
    pub sample_size: usize,
    /// Size of the reference sample for two-sample comparisons.
    pub reference_size: Option<usize>,
    pub table: Vec<TableRow>,
    pub tv: Option<f64>,
    pub ks: Option<f64>,
    pub chi_square: Option<ChiSquare>,
    pub dkw_band: Option<f64>,
    pub abs_error: Option<f64>,
    pub standard_error: Option<f64>,
    /// Acceptance bound the comparison is judged against, when one applies.
    pub tolerance: Option<f64>,
    pub insufficient: bool,
}

impl Comparison {
    pub fn new(
        statistic: impl Into<String>,
        kind: ComparisonKind,
        empirical: impl Into<String>,
        theory: impl Into<String>,
        sample_size: usize,
    ) -> Self {
        Comparison {
            statistic: statistic.into(),
            kind,
            empirical: empirical.into(),
            theory: theory.into(),
            sample_size,
            reference_size: None,
            table: Vec::new(),
            tv: None,
            ks: None,
            chi_square: None,
            dkw_band: None,
            abs_error: None,
            standard_error: None,
            tolerance: None,
            insufficient: sample_size < 2,
        }
    }

    /// The headline discrepancy of this comparison.
    pub fn distance(&self) -> Option<f64> {
        self.tv.or(self.ks).or(self.abs_error)
    }

    /// Whether the headline discrepancy is within `tolerance`.
    pub fn within_tolerance(&self) -> Option<bool> {
        Some(self.distance()? <= self.tolerance?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Correlation {
    pub a: String,
    pub b: String,
    pub sample_size: usize,
    /// `None` when either statistic was constant.
    pub value: Option<f64>,
}

/// All comparisons made at one permutation size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub n: usize,
    pub replicates: usize,
    pub comparisons: Vec<Comparison>,
    pub correlations: Vec<Correlation>,
}

/// Per-replicate values for the CSV dump.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl RawTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub experiment: String,
    pub config: BTreeMap<String, String>,
    pub sections: Vec<Section>,
    /// Comparisons that do not depend on `n`, such as the limit-object
    /// channel.
    pub limit: Vec<Comparison>,
    #[serde(skip)]
    pub raw: RawTable,
    #[serde(skip)]
    pub runtime: Option<Duration>,
}

impl ExperimentReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn section(&self, n: usize) -> Option<&Section> {
        self.sections.iter().find(|s| s.n == n)
    }

    /// First comparison at size `n` for `statistic` of the given kind whose
    /// theory label starts with `theory_prefix`.
    pub fn find(
        &self,
        n: usize,
        statistic: &str,
        kind: ComparisonKind,
        theory_prefix: &str,
    ) -> Option<&Comparison> {
        self.section(n)?.comparisons.iter().find(|c| {
            c.statistic == statistic && c.kind == kind && c.theory.starts_with(theory_prefix)
        })
    }

    pub fn text_summary(&self) -> String {
        let header = [
            "n", "statistic", "kind", "reference", "N", "distance", "tolerance", "chi2", "dof", "p",
            "se",
        ];
        let fmt = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.4}"));
        let kind = |k: ComparisonKind| {
            match k {
                ComparisonKind::Pmf => "pmf",
                ComparisonKind::Cdf => "cdf",
                ComparisonKind::Probability => "prob",
                ComparisonKind::Laplace => "laplace",
                ComparisonKind::TwoSample => "two-sample",
            }
            .to_string()
        };
        let row = |n: String, c: &Comparison| {
            vec![
                n,
                c.statistic.clone(),
                kind(c.kind),
                c.theory.clone(),
                c.sample_size.to_string(),
                fmt(c.distance()),
                fmt(c.tolerance),
                fmt(c.chi_square.as_ref().map(|x| x.statistic)),
                c.chi_square.as_ref().map_or("-".into(), |x| x.dof.to_string()),
                c.chi_square.as_ref().map_or("-".into(), |x| format!("{:.3e}", x.p_value)),
                fmt(c.standard_error),
            ]
        };
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for s in &self.sections {
            rows.extend(s.comparisons.iter().map(|c| row(s.n.to_string(), c)));
        }
        rows.extend(self.limit.iter().map(|c| row("limit".into(), c)));

        let widths: Vec<usize> = (0..header.len())
            .map(|j| rows.iter().map(|r| r[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        let _ = writeln!(out, "experiment: {}", self.experiment);
        for (k, v) in &self.config {
            let _ = writeln!(out, "  {k} = {v}");
        }
        if let Some(t) = self.runtime {
            let _ = writeln!(out, "  runtime = {:.3}s", t.as_secs_f64());
        }
        for r in &rows {
            let line: Vec<String> = r
                .iter()
                .zip(&widths)
                .map(|(cell, w)| format!("{cell:<w$}"))
                .collect();
            let _ = writeln!(out, "{}", line.join("  ").trim_end());
        }
        let correlations: Vec<_> = self
            .sections
            .iter()
            .flat_map(|s| s.correlations.iter().map(move |c| (s.n, c)))
            .collect();
        if !correlations.is_empty() {
            let _ = writeln!(out, "correlations:");
            for (n, c) in correlations {
                let _ = writeln!(out, "  n={n} corr({}, {}) = {}", c.a, c.b, fmt(c.value));
            }
        }
        out
    }
}
