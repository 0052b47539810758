use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use permcycles::harness::{run_experiment, ExperimentConfig};
use permcycles::limit_laws::{laplace_sum_k, law_by_name};
use permcycles::oracle::exact_statistic_distribution;
use permcycles::point_process::point_measure;
use permcycles::statistics::{CycleStatistics, Statistic};
use permcycles::weights::{norm_constants, stability_diagnostic};
use permcycles::{Error, PermutationSampler, Result, RngStream, WeightSequence};

#[derive(Parser)]
#[command(name = "permcycles", version, about = "Random permutations with cycle weights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Cycles,
    Oneline,
}

#[derive(Subcommand)]
enum Command {
    /// Sample permutations, one per line.
    Sample {
        #[arg(long)]
        weights: WeightSequence,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Cycles)]
        format: Format,
    },
    /// Sample permutations and write their cycle statistics as CSV.
    Stats {
        #[arg(long)]
        weights: WeightSequence,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Column groups: counts, sums, ranges, fixed.
        #[arg(long, value_delimiter = ',', default_value = "counts,sums,ranges,fixed")]
        emit: Vec<String>,
        /// Largest cycle length tabulated.
        #[arg(long, default_value_t = 3)]
        k_max: usize,
    },
    /// Sample one permutation and print its scaled cycle point measure as JSON.
    Points {
        #[arg(long)]
        weights: WeightSequence,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Print h_n and the stability ratio h_{n-1}/h_n as CSV.
    Norm {
        #[arg(long)]
        weights: WeightSequence,
        #[arg(long)]
        n_max: usize,
    },
    /// Evaluate limit laws.
    Limit {
        #[command(subcommand)]
        command: LimitCommand,
    },
    /// Exact pmf of a statistic by enumeration of S_n (n <= 8), as CSV.
    Exact {
        #[arg(long)]
        weights: WeightSequence,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        statistic: Statistic,
    },
    /// Run a Monte Carlo experiment described by a key=value config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Write raw per-replicate statistics here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write the JSON report here instead of the config's `output`.
        #[arg(long)]
        json: Option<PathBuf>,
        /// Override the config's worker count.
        #[arg(long)]
        workers: Option<usize>,
    },
}

#[derive(Subcommand)]
enum LimitCommand {
    /// CDF on a grid as CSV `x,F`.
    Cdf {
        /// S1, minrange, maxrange, m, M, delta or Delta.
        #[arg(long)]
        law: String,
        /// `theta=<θ>` plus `k=<k>` for the range laws.
        #[arg(long)]
        params: String,
        /// `a:b:step`.
        #[arg(long)]
        grid: String,
    },
    /// Laplace transform of the limiting k-cycle sum as CSV `t,value`.
    Laplace {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        theta: f64,
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
    },
}

fn parse_params(text: &str) -> Result<(f64, Option<usize>)> {
    let mut theta = None;
    let mut k = None;
    for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse { token: part.into(), reason: "expected key=value".into() })?;
        let bad = || Error::Parse { token: value.into(), reason: format!("invalid {key}") };
        match key.trim() {
            "theta" => theta = Some(value.trim().parse::<f64>().map_err(|_| bad())?),
            "k" => k = Some(value.trim().parse::<usize>().map_err(|_| bad())?),
            other => {
                return Err(Error::Parse { token: other.into(), reason: "unknown parameter".into() })
            }
        }
    }
    let theta = theta.ok_or_else(|| Error::Parse { token: text.into(), reason: "missing theta".into() })?;
    Ok((theta, k))
}

fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |reason: &str| Error::Parse { token: text.into(), reason: reason.into() };
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("expected a:b:step"))?;
    let [a, b, step] = parts[..] else {
        return Err(bad("expected a:b:step"));
    };
    if !(step > 0.0) || b < a {
        return Err(bad("need a <= b and step > 0"));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize;
    Ok((0..=count).map(|i| a + i as f64 * step).collect())
}

fn emit_stats(
    out: &mut impl Write,
    sampler: &PermutationSampler,
    n: usize,
    count: usize,
    seed: u64,
    emit: &[String],
    k_max: usize,
) -> Result<()> {
    for group in emit {
        if !["counts", "sums", "ranges", "fixed"].contains(&group.as_str()) {
            return Err(Error::Parse { token: group.clone(), reason: "unknown column group".into() });
        }
    }
    let wants = |g: &str| emit.iter().any(|e| e == g);
    let mut header = Vec::new();
    if wants("counts") {
        header.extend((1..=k_max).map(|k| format!("C_{k}")));
    }
    if wants("sums") {
        header.extend((1..=k_max).map(|k| format!("S_{k}")));
    }
    if wants("ranges") {
        header.extend((2..=k_max).map(|k| format!("r_{k}")));
        header.extend((2..=k_max).map(|k| format!("R_{k}")));
    }
    if wants("fixed") {
        header.extend(["m", "M", "delta", "Delta"].map(String::from));
    }
    writeln!(out, "{}", header.join(","))?;
    for i in 0..count {
        let perm = sampler.sample(n, &mut RngStream::new(seed, i as u64))?;
        let s = CycleStatistics::compute(&perm, k_max);
        let mut row: Vec<usize> = Vec::new();
        if wants("counts") {
            row.extend(&s.counts);
        }
        if wants("sums") {
            row.extend(&s.sums);
        }
        if wants("ranges") {
            row.extend(&s.min_range);
            row.extend(&s.max_range);
        }
        if wants("fixed") {
            row.extend([s.fixed.min, s.fixed.max, s.fixed.min_spacing, s.fixed.max_spacing]);
        }
        let cells: Vec<String> = row.iter().map(ToString::to_string).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Sample { weights, n, count, seed, format } => {
            let sampler = PermutationSampler::new(weights, n)?;
            for i in 0..count {
                let perm = sampler.sample(n, &mut RngStream::new(seed, i as u64))?;
                match format {
                    Format::Cycles => writeln!(out, "{}", perm.to_cycle_notation())?,
                    Format::Oneline => writeln!(out, "{}", perm.to_oneline())?,
                }
            }
        }
        Command::Stats { weights, n, count, seed, emit, k_max } => {
            let sampler = PermutationSampler::new(weights, n)?;
            emit_stats(&mut out, &sampler, n, count, seed, &emit, k_max)?;
        }
        Command::Points { weights, n, seed } => {
            let sampler = PermutationSampler::new(weights, n)?;
            let perm = sampler.sample(n, &mut RngStream::new(seed, 0))?;
            writeln!(out, "{}", serde_json::to_string(&point_measure(&perm))?)?;
        }
        Command::Norm { weights, n_max } => {
            let table = norm_constants(&weights, n_max);
            let ratios = stability_diagnostic(&table).ok();
            writeln!(out, "n,log_h,h,ratio")?;
            for n in 0..=n_max {
                let ratio = match (&ratios, n) {
                    (Some(r), 1..) => r[n - 1].to_string(),
                    _ => String::new(),
                };
                writeln!(out, "{n},{},{},{ratio}", table.log_h(n).log_value, table.h(n))?;
            }
        }
        Command::Limit { command: LimitCommand::Cdf { law, params, grid } } => {
            let (theta, k) = parse_params(&params)?;
            let law = law_by_name(&law, theta, k)?;
            writeln!(out, "x,F")?;
            for x in parse_grid(&grid)? {
                writeln!(out, "{x},{}", law.cdf(x))?;
            }
        }
        Command::Limit { command: LimitCommand::Laplace { k, theta, t } } => {
            if k == 0 || !(theta >= 0.0) || t.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::InvalidArgument("need k >= 1, theta >= 0 and t > 0".into()));
            }
            writeln!(out, "t,value")?;
            for t in t {
                writeln!(out, "{t},{}", laplace_sum_k(theta, k, t))?;
            }
        }
        Command::Exact { weights, n, statistic } => {
            let dist = exact_statistic_distribution(&weights, n, statistic)?;
            writeln!(out, "{statistic},probability")?;
            for (value, p) in dist.iter() {
                let key: Vec<String> = value.iter().map(ToString::to_string).collect();
                writeln!(out, "{},{p}", key.join(" "))?;
            }
        }
        Command::Experiment { config, csv, json, workers } => {
            let mut cfg = ExperimentConfig::from_file(&config)?;
            if let Some(w) = workers {
                cfg.workers = w;
            }
            let report = run_experiment(&cfg)?;
            let json_path = json.or_else(|| cfg.output.as_ref().map(PathBuf::from));
            let csv_path = csv.or_else(|| cfg.csv.as_ref().map(PathBuf::from));
            if let Some(path) = csv_path {
                fs::write(path, report.raw.to_csv())?;
            }
            match json_path {
                Some(path) => {
                    fs::write(path, report.to_json()? + "\n")?;
                    write!(out, "{}", report.text_summary())?;
                }
                None => {
                    eprint!("{}", report.text_summary());
                    writeln!(out, "{}", report.to_json()?)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
