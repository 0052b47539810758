//! Monte Carlo experiments. Replicate `i` always draws from its own RNG
//! substream and results are reduced in replicate order, so reports do not
//! depend on the number of workers.

use std::collections::HashMap;
use std::time::Instant;

use rayon::prelude::*;

use super::config::{ExperimentConfig, ExperimentKind};
use super::gof::{
    binomial_se, chi_square_gof, dkw_band, empirical_cdf, interior_grid, ks_distance,
    ks_two_sample_on_grid, mean_and_se, pearson, tv_distance,
};
use super::report::{
    Comparison, ComparisonKind, Correlation, ExperimentReport, RawTable, Section, TableRow,
};
use crate::error::{Error, Result};
use crate::limit_laws::{laplace_sum_k, poisson_count_pmf, LimitLaw, MixtureSample};
use crate::oracle::{self, ExactDistribution};
use crate::permutation::Permutation;
use crate::point_process::{point_measure, simulate_limit_process};
use crate::region::avoidance_limit;
use crate::rng::RngStream;
use crate::sampler::PermutationSampler;
use crate::statistics::{cycle_counts, Statistic};

/// Substream channels; each size in a sweep gets its own block.
const FINITE: u64 = 0;
const LIMIT: u64 = 1;
const MIXTURE: u64 = 2;
const CHANNEL_BLOCK: u64 = 16;

/// Significance level for reported DKW bands.
pub const DKW_ALPHA: f64 = 0.05;

fn channel(base: u64, n_index: usize) -> u64 {
    base + CHANNEL_BLOCK * (n_index as u64 + 1)
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot start {workers} workers: {e}")))
}

/// `f(0), ..., f(count - 1)` computed on the pool, in index order.
fn replicate<T: Send>(
    pool: &rayon::ThreadPool,
    count: usize,
    f: impl Fn(u64) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    pool.install(|| (0..count as u64).into_par_iter().map(f).collect())
}

/// Dispatches on the configured experiment kind.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.kind {
        ExperimentKind::Counts => run_counts_experiment(cfg),
        ExperimentKind::Avoidance => run_avoidance_experiment(cfg),
        ExperimentKind::Cdf => run_cdf_experiment(cfg),
    }
}

fn new_report(cfg: &ExperimentConfig) -> ExperimentReport {
    ExperimentReport {
        experiment: cfg.kind.to_string(),
        config: cfg.canonical(),
        sections: Vec::new(),
        limit: Vec::new(),
        raw: RawTable::default(),
        runtime: None,
    }
}

fn finite_sampler(cfg: &ExperimentConfig, n: usize, n_index: usize) -> Result<(PermutationSampler, u64)> {
    let sampler = PermutationSampler::new(cfg.weights.clone(), n)?;
    Ok((sampler, channel(FINITE, n_index)))
}

/// Compares integer observations with a pmf on `0..=support_max`, where
/// the last cell also carries the reference's upper tail.
fn pmf_comparison(
    mut cmp: Comparison,
    observed: &[usize],
    theory: impl Fn(usize) -> f64,
    upper_tail: impl Fn(usize) -> f64,
    support_max: usize,
) -> Result<Comparison> {
    let total = observed.len() as f64;
    let mut counts = vec![0.0; support_max + 1];
    for &v in observed {
        counts[v.min(support_max)] += 1.0;
    }
    let mut probs: Vec<f64> = (0..=support_max).map(&theory).collect();
    probs[support_max] += upper_tail(support_max);
    let emp: Vec<f64> = counts.iter().map(|c| c / total).collect();
    cmp.tv = Some(tv_distance(&emp, &probs)?);
    let expected: Vec<f64> = probs.iter().map(|p| p * total).collect();
    let chi = chi_square_gof(&counts, &expected)?;
    cmp.insufficient |= chi.insufficient;
    cmp.chi_square = Some(chi);
    cmp.table = emp
        .iter()
        .zip(&probs)
        .enumerate()
        .map(|(x, (&e, &t))| TableRow {
            x: x as f64,
            empirical: e,
            theory: t,
        })
        .collect();
    Ok(cmp)
}

/// Compares observed integer-vector keys with an exact pmf.
fn exact_comparison(mut cmp: Comparison, observed: &[Vec<i64>], exact: &ExactDistribution) -> Result<Comparison> {
    let index: HashMap<&[i64], usize> = exact
        .support
        .iter()
        .enumerate()
        .map(|(i, k)| (k.as_slice(), i))
        .collect();
    // a final cell with zero expectation collects impossible values
    let mut counts = vec![0.0; exact.len() + 1];
    for key in observed {
        let cell = index.get(key.as_slice()).copied().unwrap_or(exact.len());
        counts[cell] += 1.0;
    }
    let total = observed.len() as f64;
    let mut probs = exact.probabilities.clone();
    probs.push(0.0);
    let emp: Vec<f64> = counts.iter().map(|c| c / total).collect();
    cmp.tv = Some(tv_distance(&emp, &probs)?);
    let expected: Vec<f64> = probs.iter().map(|p| p * total).collect();
    let chi = chi_square_gof(&counts, &expected)?;
    cmp.insufficient |= chi.insufficient;
    cmp.chi_square = Some(chi);
    if exact.support.iter().all(|k| k.len() == 1) {
        cmp.table = exact
            .iter()
            .zip(&emp)
            .map(|((k, p), &e)| TableRow {
                x: k[0] as f64,
                empirical: e,
                theory: p,
            })
            .collect();
    }
    Ok(cmp)
}

fn probability_comparison(
    mut cmp: Comparison,
    hits: usize,
    theory: f64,
    allowance: f64,
) -> Comparison {
    let n = cmp.sample_size;
    let emp = hits as f64 / n as f64;
    let se = binomial_se(theory, n);
    cmp.abs_error = Some((emp - theory).abs());
    cmp.standard_error = Some(se);
    cmp.tolerance = Some(3.0 * se + allowance);
    cmp.table = vec![TableRow {
        x: 0.0,
        empirical: emp,
        theory,
    }];
    cmp
}

/// Samples permutations and compares cycle counts `C_1..C_{k_max}` with
/// independent Poisson(θ_k/k) laws; for `n <= 8` also with the exact
/// finite-`n` laws from the oracle.
pub fn run_counts_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let pool = build_pool(cfg.workers)?;
    let mut report = new_report(cfg);
    let k_max = cfg.k_max;
    let ws = &cfg.weights;
    report.raw.columns = ["n", "replicate"].iter().map(|s| s.to_string()).collect();
    report.raw.columns.extend((1..=k_max).map(|k| format!("C_{k}")));

    for (ni, &n) in cfg.n.iter().enumerate() {
        let (sampler, ch) = finite_sampler(cfg, n, ni)?;
        let keep_type = n <= oracle::MAX_N;
        let draws: Vec<(Vec<usize>, Vec<i64>)> = replicate(&pool, cfg.replicates, |i| {
            let perm = sampler.sample(n, &mut RngStream::with_channel(cfg.seed, ch, i))?;
            let counts = cycle_counts(&perm, k_max);
            let key = if keep_type { Statistic::CycleType.key(&perm) } else { Vec::new() };
            Ok((counts, key))
        })?;
        let size = draws.len();
        let mut section = Section {
            n,
            replicates: size,
            comparisons: Vec::new(),
            correlations: Vec::new(),
        };
        let columns: Vec<Vec<usize>> = (0..k_max)
            .map(|j| draws.iter().map(|d| d.0[j]).collect())
            .collect();

        for k in 1..=k_max {
            let observed = &columns[k - 1];
            let name = format!("C_{k}");
            let label = format!("{name} at n={n}");
            let theta_k = ws.theta(k);
            let mean = theta_k / k as f64;
            let mut reach = observed.iter().copied().max().unwrap_or(0);
            let mut cumulative: f64 = (0..=reach).map(|j| poisson_count_pmf(theta_k, k, j)).sum();
            while cumulative < 1.0 - 1e-12 {
                reach += 1;
                cumulative += poisson_count_pmf(theta_k, k, reach);
            }
            let tail = move |top: usize| {
                (1.0 - (0..=top).map(|j| poisson_count_pmf(theta_k, k, j)).sum::<f64>()).max(0.0)
            };
            let mut cmp = Comparison::new(&name, ComparisonKind::Pmf, &label, format!("Poisson(mean={mean})"), size);
            cmp.tolerance = Some(2.0 * dkw_band(size, DKW_ALPHA) + cfg.bias_allowance);
            section.comparisons.push(pmf_comparison(
                cmp,
                observed,
                |j| poisson_count_pmf(theta_k, k, j),
                tail,
                reach,
            )?);

            if n <= oracle::MAX_N && k <= n {
                let exact = oracle::exact_statistic_distribution(ws, n, Statistic::Count(k))?;
                let keys: Vec<Vec<i64>> = observed.iter().map(|&v| vec![v as i64]).collect();
                let cmp = Comparison::new(&name, ComparisonKind::Pmf, &label, "exact", size);
                section.comparisons.push(exact_comparison(cmp, &keys, &exact)?);
            }
        }

        if keep_type {
            let exact = oracle::exact_statistic_distribution(ws, n, Statistic::CycleType)?;
            let keys: Vec<Vec<i64>> = draws.iter().map(|d| d.1.clone()).collect();
            let cmp = Comparison::new("cycletype", ComparisonKind::Pmf, format!("cycle type at n={n}"), "exact", size);
            section.comparisons.push(exact_comparison(cmp, &keys, &exact)?);
        }

        let as_f64: Vec<Vec<f64>> = columns
            .iter()
            .map(|c| c.iter().map(|&v| v as f64).collect())
            .collect();
        for a in 0..k_max {
            for b in a + 1..k_max {
                section.correlations.push(Correlation {
                    a: format!("C_{}", a + 1),
                    b: format!("C_{}", b + 1),
                    sample_size: size,
                    value: pearson(&as_f64[a], &as_f64[b])?,
                });
            }
        }

        for (i, d) in draws.iter().enumerate() {
            let mut row = vec![n as f64, i as f64];
            row.extend(d.0.iter().map(|&c| c as f64));
            report.raw.rows.push(row);
        }
        report.sections.push(section);
    }
    report.runtime = Some(start.elapsed());
    Ok(report)
}

/// Estimates `P(Ψ_n(U) = 0)` and compares it with `exp(-λ(U))`; the same
/// probability is also estimated from the simulated limit process.
pub fn run_avoidance_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let pool = build_pool(cfg.workers)?;
    let mut report = new_report(cfg);
    let ws = &cfg.weights;
    let boxes = &cfg.boxes;
    let limit = avoidance_limit(ws, boxes);
    let theory = format!("exp(-lambda(U))={limit}");
    report.raw.columns = ["n", "replicate", "count_in_U"].iter().map(|s| s.to_string()).collect();

    for (ni, &n) in cfg.n.iter().enumerate() {
        let (sampler, ch) = finite_sampler(cfg, n, ni)?;
        let counts: Vec<usize> = replicate(&pool, cfg.replicates, |i| {
            let perm = sampler.sample(n, &mut RngStream::with_channel(cfg.seed, ch, i))?;
            Ok(point_measure(&perm).count_in(boxes))
        })?;
        let size = counts.len();
        let hits = counts.iter().filter(|&&c| c == 0).count();
        let label = format!("P(Psi_n(U)=0) at n={n}");
        let mut section = Section {
            n,
            replicates: size,
            comparisons: vec![probability_comparison(
                Comparison::new("avoidance", ComparisonKind::Probability, &label, &theory, size),
                hits,
                limit,
                cfg.bias_allowance,
            )],
            correlations: Vec::new(),
        };
        if n <= oracle::MAX_N {
            let exact = oracle::exact_statistic_distribution(ws, n, Statistic::Image)?;
            let mut p = 0.0;
            for (image, prob) in exact.iter() {
                let perm = Permutation::from_image(image.iter().map(|&v| v as usize).collect())?;
                if point_measure(&perm).count_in(boxes) == 0 {
                    p += prob;
                }
            }
            let cmp = Comparison::new("avoidance", ComparisonKind::Probability, &label, format!("exact={p}"), size);
            section.comparisons.push(probability_comparison(cmp, hits, p, 0.0));
        }
        for (i, c) in counts.iter().enumerate() {
            report.raw.rows.push(vec![n as f64, i as f64, *c as f64]);
        }
        report.sections.push(section);
    }

    if cfg.limit_replicates > 0 {
        let k_max = boxes.max_level();
        let hits = replicate(&pool, cfg.limit_replicates, |i| {
            let pm = simulate_limit_process(ws, k_max, &mut RngStream::with_channel(cfg.seed, LIMIT, i));
            Ok(pm.count_in(boxes) == 0)
        })?
        .into_iter()
        .filter(|&h| h)
        .count();
        let cmp = Comparison::new(
            "avoidance",
            ComparisonKind::Probability,
            "P(Psi(U)=0) for the simulated limit process",
            &theory,
            cfg.limit_replicates,
        );
        report.limit.push(probability_comparison(cmp, hits, limit, 0.0));
    }
    report.runtime = Some(start.elapsed());
    Ok(report)
}

/// Compares scaled statistics `X_n / n` with their limit laws: KS distance
/// on an interior grid, atom masses separately, Laplace transforms for
/// `S_k`, the spacing mixture for `delta`/`Delta`, and exact finite-`n`
/// pmfs for `n <= 8`.
pub fn run_cdf_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    let start = Instant::now();
    let pool = build_pool(cfg.workers)?;
    let mut report = new_report(cfg);
    let ws = &cfg.weights;
    let stats = &cfg.statistics;
    if let Some(bad) = stats.iter().find(|s| s.scalar(&Permutation::identity(1)).is_none()) {
        return Err(Error::InvalidArgument(format!("{bad} is not a scalar statistic")));
    }
    report.raw.columns = ["n", "replicate"].iter().map(|s| s.to_string()).collect();
    report.raw.columns.extend(stats.iter().map(ToString::to_string));

    let needs_mixture = stats
        .iter()
        .any(|s| matches!(s, Statistic::MinSpacing | Statistic::MaxSpacing));
    let mixture: Vec<(f64, f64)> = if needs_mixture && cfg.limit_replicates > 0 {
        let theta_1 = ws.theta(1);
        replicate(&pool, cfg.limit_replicates, |i| {
            let s = MixtureSample::draw(theta_1, &mut RngStream::with_channel(cfg.seed, MIXTURE, i));
            Ok((s.min_spacing(), s.max_spacing()))
        })?
    } else {
        Vec::new()
    };

    for (ni, &n) in cfg.n.iter().enumerate() {
        let (sampler, ch) = finite_sampler(cfg, n, ni)?;
        let draws: Vec<Vec<(usize, bool)>> = replicate(&pool, cfg.replicates, |i| {
            let perm = sampler.sample(n, &mut RngStream::with_channel(cfg.seed, ch, i))?;
            Ok(stats
                .iter()
                .map(|s| (s.scalar(&perm).expect("scalar"), s.is_degenerate(&perm)))
                .collect())
        })?;
        let size = draws.len();
        let mut section = Section {
            n,
            replicates: size,
            comparisons: Vec::new(),
            correlations: Vec::new(),
        };

        for (j, &stat) in stats.iter().enumerate() {
            let name = stat.to_string();
            let label = format!("{name}/n at n={n}");
            let raw: Vec<usize> = draws.iter().map(|d| d[j].0).collect();
            let scaled: Vec<f64> = raw.iter().map(|&v| v as f64 / n as f64).collect();
            let degenerate = draws.iter().filter(|d| d[j].1).count();

            if let Some(law) = LimitLaw::for_statistic(stat, ws) {
                let atoms = law.atoms();
                let (lo, hi) = law.support();
                let locations: Vec<f64> = atoms.iter().map(|a| a.location).collect();
                let grid = interior_grid(lo, hi, cfg.grid_points, &locations);
                let ecdf = empirical_cdf(&scaled, &grid);
                let cdf: Vec<f64> = grid.iter().map(|&x| law.cdf(x)).collect();
                let mut cmp = Comparison::new(&name, ComparisonKind::Cdf, &label, law.to_string(), size);
                cmp.ks = Some(ks_distance(&ecdf, &cdf)?);
                let band = dkw_band(size, DKW_ALPHA);
                cmp.dkw_band = Some(band);
                cmp.tolerance = Some(band + cfg.bias_allowance);
                cmp.table = grid
                    .iter()
                    .zip(ecdf.iter().zip(&cdf))
                    .map(|(&x, (&e, &t))| TableRow { x, empirical: e, theory: t })
                    .collect();
                section.comparisons.push(cmp);

                for atom in atoms {
                    let cmp = Comparison::new(
                        &name,
                        ComparisonKind::Probability,
                        format!("atom of {label}"),
                        format!("atom at {} of {law}", atom.location),
                        size,
                    );
                    section
                        .comparisons
                        .push(probability_comparison(cmp, degenerate, atom.mass, cfg.bias_allowance));
                }

                if !mixture.is_empty() && matches!(stat, Statistic::MinSpacing | Statistic::MaxSpacing) {
                    let reference: Vec<f64> = mixture
                        .iter()
                        .map(|m| if stat == Statistic::MinSpacing { m.0 } else { m.1 })
                        .collect();
                    let mut cmp = Comparison::new(
                        &name,
                        ComparisonKind::TwoSample,
                        &label,
                        format!("mixture sample of {law}"),
                        size,
                    );
                    cmp.reference_size = Some(reference.len());
                    cmp.ks = Some(ks_two_sample_on_grid(&scaled, &reference, &grid));
                    let (a, b) = (size as f64, reference.len() as f64);
                    let band = ((2.0 / DKW_ALPHA).ln() / 2.0 * (a + b) / (a * b)).sqrt();
                    cmp.dkw_band = Some(band);
                    cmp.tolerance = Some(band + cfg.bias_allowance);
                    section.comparisons.push(cmp);
                }
            }

            if let Statistic::Sum(k) = stat {
                let theta_k = ws.theta(k);
                for &t in &cfg.laplace_t {
                    let values: Vec<f64> = scaled.iter().map(|x| (-t * x).exp()).collect();
                    let (mean, se) = mean_and_se(&values);
                    let theory = laplace_sum_k(theta_k, k, t);
                    let mut cmp = Comparison::new(
                        &name,
                        ComparisonKind::Laplace,
                        format!("mean exp(-t {label}), t={t}"),
                        format!("laplace_sum_k(theta_{k}={theta_k}, t={t})"),
                        size,
                    );
                    cmp.abs_error = Some((mean - theory).abs());
                    cmp.standard_error = se.is_finite().then_some(se);
                    cmp.tolerance = Some(cfg.bias_allowance);
                    cmp.table = vec![TableRow { x: t, empirical: mean, theory }];
                    section.comparisons.push(cmp);
                }
            }

            if n <= oracle::MAX_N {
                let exact = oracle::exact_statistic_distribution(ws, n, stat)?;
                let keys: Vec<Vec<i64>> = raw.iter().map(|&v| vec![v as i64]).collect();
                let cmp = Comparison::new(&name, ComparisonKind::Pmf, format!("{name} at n={n}"), "exact", size);
                section.comparisons.push(exact_comparison(cmp, &keys, &exact)?);
            }
        }

        for (i, d) in draws.iter().enumerate() {
            let mut row = vec![n as f64, i as f64];
            row.extend(d.iter().map(|&(v, _)| v as f64));
            report.raw.rows.push(row);
        }
        report.sections.push(section);
    }
    report.runtime = Some(start.elapsed());
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{BoxSpec, BoxUnion};
    use crate::weights::WeightSequence;

    fn counts_cfg(n: usize, replicates: usize) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Counts, WeightSequence::Uniform, n, replicates);
        cfg.seed = 3;
        cfg
    }

    #[test]
    fn single_replicate_is_flagged_insufficient() {
        let report = run_counts_experiment(&counts_cfg(20, 1)).unwrap();
        let section = report.section(20).unwrap();
        assert_eq!(section.replicates, 1);
        assert_eq!(report.raw.rows.len(), 1);
        assert!(section.comparisons.iter().all(|c| c.insufficient));
    }

    #[test]
    fn full_cycle_probability_matches_oracle() {
        for n in 2..=5 {
            let mut cfg = counts_cfg(n, 20_000);
            cfg.weights = WeightSequence::ewens(1.5).unwrap();
            cfg.k_max = n;
            let report = run_counts_experiment(&cfg).unwrap();
            let name = format!("C_{n}");
            let c = report.find(n, &name, ComparisonKind::Pmf, "exact").unwrap();
            let p = c.chi_square.as_ref().unwrap().p_value;
            assert!(p > 1e-3, "n={n}: p={p}");
        }
    }

    #[test]
    fn reports_do_not_depend_on_workers() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Cdf, WeightSequence::ewens(0.8).unwrap(), 40, 300);
        cfg.statistics = vec![Statistic::Sum(1), Statistic::MaxRange(2), Statistic::MinSpacing];
        cfg.laplace_t = vec![1.0];
        cfg.limit_replicates = 200;
        cfg.n = vec![6, 40];
        let mut jsons = Vec::new();
        for workers in [1, 2, 8] {
            cfg.workers = workers;
            jsons.push(run_cdf_experiment(&cfg).unwrap().to_json().unwrap());
        }
        assert_eq!(jsons[0], jsons[1]);
        assert_eq!(jsons[0], jsons[2]);
    }

    #[test]
    fn empty_region_is_always_avoided() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Avoidance, WeightSequence::Uniform, 50, 200);
        cfg.boxes = BoxUnion::empty();
        let report = run_avoidance_experiment(&cfg).unwrap();
        let c = &report.section(50).unwrap().comparisons[0];
        assert_eq!(c.table[0].empirical, 1.0);
        assert_eq!(c.table[0].theory, 1.0);
        assert_eq!(report.limit[0].table[0].empirical, 1.0);
    }

    #[test]
    fn small_avoidance_matches_exact() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Avoidance, WeightSequence::ewens(2.0).unwrap(), 6, 50_000);
        cfg.boxes = BoxUnion::single(BoxSpec::closed(&[(0.0, 0.5)]).unwrap());
        let report = run_avoidance_experiment(&cfg).unwrap();
        let c = report.find(6, "avoidance", ComparisonKind::Probability, "exact").unwrap();
        assert!(c.abs_error.unwrap() <= 4.0 * c.standard_error.unwrap(), "{c:?}");
    }

    #[test]
    fn no_fixed_points_puts_all_mass_at_the_atom() {
        let ws = WeightSequence::explicit(vec![0.0, 1.0], crate::weights::TailRule::ConstantFromLast).unwrap();
        let mut cfg = ExperimentConfig::new(ExperimentKind::Cdf, ws, 30, 200);
        cfg.statistics = vec![Statistic::MinFixed];
        let report = run_cdf_experiment(&cfg).unwrap();
        assert!(report.raw.rows.iter().all(|r| r[2] == 31.0));
        let cdf = report.find(30, "m", ComparisonKind::Cdf, "m(").unwrap();
        assert_eq!(cdf.ks, Some(0.0));
        let atom = report.find(30, "m", ComparisonKind::Probability, "atom").unwrap();
        assert_eq!(atom.table[0].empirical, 1.0);
        assert_eq!(atom.table[0].theory, 1.0);
    }

    #[test]
    fn vector_statistics_are_rejected() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::Cdf, WeightSequence::Uniform, 10, 10);
        cfg.statistics = vec![Statistic::CycleType];
        assert!(run_cdf_experiment(&cfg).is_err());
    }
}
