//! Experiment configuration as a flat `key=value` text file.
//!
//! ```text
//! # comment
//! experiment=cdf
//! weights=ewens:1
//! n=2000
//! replicates=10000
//! seed=42
//! workers=8
//! statistics=S_1,r_2,R_2
//! t=0.5,1,2
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::region::BoxUnion;
use crate::statistics::Statistic;
use crate::weights::WeightSequence;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Counts,
    Avoidance,
    Cdf,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExperimentKind::Counts => "counts",
            ExperimentKind::Avoidance => "avoidance",
            ExperimentKind::Cdf => "cdf",
        })
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "counts" => Ok(ExperimentKind::Counts),
            "avoidance" => Ok(ExperimentKind::Avoidance),
            "cdf" => Ok(ExperimentKind::Cdf),
            other => Err(Error::parse(other, "expected counts, avoidance or cdf")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub weights: WeightSequence,
    /// One size, or several for a convergence sweep.
    pub n: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub workers: usize,
    /// Largest cycle length tabulated by the counts experiment.
    pub k_max: usize,
    /// Statistics for the cdf experiment.
    pub statistics: Vec<Statistic>,
    /// Laplace arguments for `S_k` statistics in the cdf experiment.
    pub laplace_t: Vec<f64>,
    /// Region for the avoidance experiment.
    pub boxes: BoxUnion,
    /// Draws from the limit object (limit process or spacing mixture).
    pub limit_replicates: usize,
    /// Interior grid size for CDF comparisons.
    pub grid_points: usize,
    /// Allowance added to Monte Carlo error when comparing with limit laws.
    pub bias_allowance: f64,
    pub output: Option<String>,
    pub csv: Option<String>,
}

impl ExperimentConfig {
    pub fn new(kind: ExperimentKind, weights: WeightSequence, n: usize, replicates: usize) -> Self {
        ExperimentConfig {
            kind,
            weights,
            n: vec![n],
            replicates,
            seed: 0,
            workers: 1,
            k_max: 3,
            statistics: Vec::new(),
            laplace_t: Vec::new(),
            boxes: BoxUnion::empty(),
            limit_replicates: replicates,
            grid_points: 200,
            bias_allowance: 0.01,
            output: None,
            csv: None,
        }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        std::fs::read_to_string(path)?.parse()
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.replicates == 0 {
            return bad("replicates must be >= 1");
        }
        if self.workers == 0 {
            return bad("workers must be >= 1");
        }
        if self.n.is_empty() || self.n.contains(&0) {
            return bad("n must list sizes >= 1");
        }
        if self.k_max == 0 {
            return bad("k_max must be >= 1");
        }
        if self.grid_points == 0 {
            return bad("grid_points must be >= 1");
        }
        if self.laplace_t.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return bad("laplace arguments must be positive");
        }
        if self.kind == ExperimentKind::Cdf && self.statistics.is_empty() {
            return bad("cdf experiments need statistics=...");
        }
        Ok(())
    }

    /// Settings that determine the report, in canonical text form. Worker
    /// count and output paths are left out.
    pub fn canonical(&self) -> BTreeMap<String, String> {
        let join = |v: Vec<String>| v.join(",");
        let mut m = BTreeMap::new();
        m.insert("experiment".into(), self.kind.to_string());
        m.insert("weights".into(), self.weights.to_string());
        m.insert("n".into(), join(self.n.iter().map(ToString::to_string).collect()));
        m.insert("replicates".into(), self.replicates.to_string());
        m.insert("seed".into(), self.seed.to_string());
        m.insert("k_max".into(), self.k_max.to_string());
        m.insert("statistics".into(), join(self.statistics.iter().map(ToString::to_string).collect()));
        m.insert("t".into(), join(self.laplace_t.iter().map(ToString::to_string).collect()));
        m.insert("boxes".into(), self.boxes.to_string());
        m.insert("limit_replicates".into(), self.limit_replicates.to_string());
        m.insert("grid_points".into(), self.grid_points.to_string());
        m.insert("bias_allowance".into(), self.bias_allowance.to_string());
        m
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::parse(value, format!("invalid value for {key}")))
}

fn parse_list<T>(value: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let mut fields: BTreeMap<String, String> = BTreeMap::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(line, "expected key=value"))?;
            let key = key.trim().to_ascii_lowercase();
            if fields.insert(key.clone(), value.trim().to_string()).is_some() {
                return Err(Error::parse(key, "duplicate key"));
            }
        }
        let take = |k: &str| fields.get(k).map(String::as_str);
        let kind: ExperimentKind = take("experiment")
            .ok_or_else(|| Error::parse("experiment", "missing key"))?
            .parse()?;
        let weights: WeightSequence = take("weights").unwrap_or("uniform").parse()?;
        let n = parse_list(
            take("n").ok_or_else(|| Error::parse("n", "missing key"))?,
            |s| parse_num("n", s),
        )?;
        let replicates = parse_num("replicates", take("replicates").unwrap_or("1000"))?;
        let mut cfg = ExperimentConfig::new(kind, weights, 1, replicates);
        cfg.n = n;

        for (key, value) in &fields {
            match key.as_str() {
                "experiment" | "weights" | "n" | "replicates" => {}
                "seed" => cfg.seed = parse_num(key, value)?,
                "workers" => cfg.workers = parse_num(key, value)?,
                "k_max" => cfg.k_max = parse_num(key, value)?,
                "statistics" => cfg.statistics = parse_list(value, str::parse)?,
                "t" => cfg.laplace_t = parse_list(value, |s| parse_num(key, s))?,
                "boxes" => cfg.boxes = value.parse()?,
                "limit_replicates" => cfg.limit_replicates = parse_num(key, value)?,
                "grid_points" => cfg.grid_points = parse_num(key, value)?,
                "bias_allowance" => cfg.bias_allowance = parse_num(key, value)?,
                "output" => cfg.output = Some(value.clone()),
                "csv" => cfg.csv = Some(value.clone()),
                other => return Err(Error::parse(other, "unknown key")),
            }
        }
        if !fields.contains_key("limit_replicates") {
            cfg.limit_replicates = cfg.replicates;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_config() {
        let text = "\
# avoidance of two boxes
experiment = avoidance
weights = uniform
n = 100, 2000
replicates = 500
seed = 9
workers = 4
boxes = box:k=1;0,0.5;box:k=2;0,1;0.5,1
";
        let cfg: ExperimentConfig = text.parse().unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Avoidance);
        assert_eq!(cfg.n, vec![100, 2000]);
        assert_eq!(cfg.replicates, 500);
        assert_eq!(cfg.limit_replicates, 500);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.workers, 4);
        assert_eq!(cfg.boxes.boxes().len(), 2);
        assert!(!cfg.canonical().contains_key("workers"));
    }

    #[test]
    fn cdf_config_lists() {
        let cfg: ExperimentConfig = "experiment=cdf\nn=50\nstatistics=S_1, r_2,Delta\nt=0.5,1"
            .parse()
            .unwrap();
        assert_eq!(
            cfg.statistics,
            vec![Statistic::Sum(1), Statistic::MinRange(2), Statistic::MaxSpacing]
        );
        assert_eq!(cfg.laplace_t, vec![0.5, 1.0]);
    }

    #[test]
    fn rejects_bad_input() {
        for text in [
            "n=10",
            "experiment=counts",
            "experiment=counts\nn=10\nreplicates=0",
            "experiment=counts\nn=10\nworkers=0",
            "experiment=counts\nn=10\ncolour=red",
            "experiment=counts\nn=10\nn=11",
            "experiment=counts\nn=ten",
            "experiment=cdf\nn=10",
            "experiment=counts\nn=10\nnonsense",
            "experiment=cdf\nn=10\nstatistics=S_1\nt=-1",
        ] {
            assert!(text.parse::<ExperimentConfig>().is_err(), "{text:?}");
        }
    }
}
