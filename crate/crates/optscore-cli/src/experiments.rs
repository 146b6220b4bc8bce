//! The `experiment` subcommands: reproducible parameter sweeps comparing
//! theoretical values against computed ones. Each row is seeded by
//! `(seed, row index)` so output is independent of `--jobs`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use optscore::full_dist::{
    gap_instance, gap_mean_distribution, mean_vs_full_gap, optimal_full_dist,
};
use optscore::multi_dim::{
    estimate_prior_mean, max_over_separate_rule, perturbed_rule_loss, sample_count,
    separate_gap_instance, separate_rule,
};
use optscore::random::{random_bounded_v_shape, random_distribution};
use optscore::single_dim::{effort_benchmark, opt_value, pigeonhole_adversary};
use optscore::{objective, ConvexUtility, FiniteDistribution, Point, Rect};

use crate::table::{fmt_f64, ResultTable};
use crate::CliError;

fn row_seed(seed: u64, index: usize) -> u64 {
    (seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)).wrapping_add(0x6A09_E667)
}

/// Runs the per-row closures, optionally across a thread pool, keeping row
/// order deterministic.
fn run_rows<F>(jobs: usize, count: usize, f: F) -> Result<Vec<Vec<String>>, CliError>
where
    F: Fn(usize) -> Result<Vec<String>, CliError> + Sync,
{
    if jobs <= 1 || count <= 1 {
        return (0..count).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::usage(format!("cannot build a {jobs}-thread pool: {e}")))?;
    pool.install(|| {
        use rayon::prelude::*;
        (0..count).into_par_iter().map(&f).collect()
    })
}

pub fn sep_gap(ns: &[u32], jobs: usize) -> Result<ResultTable, CliError> {
    let mut table = ResultTable::new(vec![
        "n",
        "separate_formula",
        "separate_computed",
        "separate_deviation",
        "mos_formula",
        "mos_computed",
        "mos_deviation",
        "ratio",
    ]);
    let rows = run_rows(jobs, ns.len(), |i| {
        let n = ns[i];
        let gap = separate_gap_instance(n).map_err(CliError::from_core)?;
        let (sep_eval, mos_eval) = match &gap.dist {
            Some(dist) => {
                let rect = Rect::unit(n as usize);
                let mu = dist.mean();
                let sep = separate_rule(&mu, &rect)
                    .and_then(|r| r.objective(dist))
                    .map_err(CliError::from_core)?;
                let mos = max_over_separate_rule(&mu, &rect)
                    .and_then(|r| r.objective(dist))
                    .map_err(CliError::from_core)?;
                (sep, mos)
            }
            None => (gap.separate_objective, gap.max_over_separate_objective),
        };
        Ok(vec![
            n.to_string(),
            fmt_f64(gap.separate_objective),
            fmt_f64(sep_eval),
            fmt_f64((sep_eval - gap.separate_objective).abs()),
            fmt_f64(gap.max_over_separate_objective),
            fmt_f64(mos_eval),
            fmt_f64((mos_eval - gap.max_over_separate_objective).abs()),
            fmt_f64(gap.max_over_separate_objective / gap.separate_objective),
        ])
    })?;
    for row in rows {
        table.push_row(row);
    }
    Ok(table)
}

pub fn full_gap(eps_list: &[f64], jobs: usize) -> Result<ResultTable, CliError> {
    let mut table = ResultTable::new(vec![
        "epsilon",
        "mean_opt_formula",
        "mean_opt_computed",
        "mean_deviation",
        "full_lower_bound",
        "full_lp_value",
        "ratio_full_over_mean",
    ]);
    let rows = run_rows(jobs, eps_list.len(), |i| {
        let eps = eps_list[i];
        let gap = mean_vs_full_gap(eps).map_err(CliError::from_core)?;
        let computed = opt_value(&gap_mean_distribution(eps).map_err(CliError::from_core)?)
            .map_err(CliError::from_core)?;
        let lp = optimal_full_dist(&gap_instance(eps).map_err(CliError::from_core)?, 1.0)
            .map_err(CliError::from_core)?
            .objective();
        Ok(vec![
            fmt_f64(eps),
            fmt_f64(gap.mean_opt),
            fmt_f64(computed),
            fmt_f64((computed - gap.mean_opt).abs()),
            fmt_f64(gap.full_opt_lower),
            fmt_f64(lp),
            fmt_f64(lp / gap.mean_opt),
        ])
    })?;
    for row in rows {
        table.push_row(row);
    }
    Ok(table)
}

pub fn quad_worstcase(cs: &[f64], grid: usize, jobs: usize) -> Result<ResultTable, CliError> {
    if grid < 2 {
        return Err(CliError::usage("--grid must be at least 2".into()));
    }
    let mut table = ResultTable::new(vec![
        "c",
        "c_squared",
        "bruteforce_min",
        "deviation",
        "witness_mu",
        "witness_p",
    ]);
    let rows = run_rows(jobs, cs.len(), |idx| {
        let c = cs[idx];
        if !(c > 0.0 && c <= 0.5) {
            return Err(CliError::usage(format!("c must lie in (0, 1/2], got {c}")));
        }
        let mut min_obj = f64::INFINITY;
        let mut witness = (f64::NAN, f64::NAN);
        for i in 1..=grid {
            let mu = i as f64 / grid as f64;
            let reach = mu.max(1.0 - mu);
            for j in 1..=grid {
                let p = j as f64 / grid as f64;
                if p >= 1.0 {
                    continue;
                }
                let hi = mu + c * reach / (1.0 - p);
                let lo = mu - c * reach / p;
                if lo < -1e-12 || hi > 1.0 + 1e-12 {
                    continue;
                }
                let variance = p * (mu - lo).powi(2) + (1.0 - p) * (hi - mu).powi(2);
                if variance < min_obj {
                    min_obj = variance;
                    witness = (mu, p);
                }
            }
        }
        Ok(vec![
            fmt_f64(c),
            fmt_f64(c * c),
            fmt_f64(min_obj),
            fmt_f64((min_obj - c * c).abs()),
            fmt_f64(witness.0),
            fmt_f64(witness.1),
        ])
    })?;
    for row in rows {
        table.push_row(row);
    }
    Ok(table)
}

pub fn pi_adversary(
    ds: &[u32],
    num_random_rules: usize,
    seed: u64,
    jobs: usize,
) -> Result<ResultTable, CliError> {
    let mut utilities: Vec<(String, ConvexUtility)> =
        vec![("quadratic".to_string(), ConvexUtility::Quadratic)];
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in 0..num_random_rules {
        utilities.push((
            format!("v_shape_{i}"),
            ConvexUtility::VShaped(random_bounded_v_shape(&mut rng)),
        ));
    }
    let cases: Vec<(usize, u32)> = (0..utilities.len())
        .flat_map(|u| ds.iter().map(move |&d| (u, d)))
        .collect();
    let mut table = ResultTable::new(vec![
        "utility",
        "d",
        "objective",
        "cap_half_d_squared",
        "deviation_over_cap",
        "benchmark",
    ]);
    let rows = run_rows(jobs, cases.len(), |i| {
        let (u_idx, d) = cases[i];
        let (name, u) = &utilities[u_idx];
        let adv = pigeonhole_adversary(u, d).map_err(CliError::from_core)?;
        let obj = objective(u, &adv).map_err(CliError::from_core)?;
        let cap = 1.0 / (2.0 * (d * d) as f64);
        let bench = effort_benchmark(&adv).map_err(CliError::from_core)?;
        Ok(vec![
            name.clone(),
            d.to_string(),
            fmt_f64(obj),
            fmt_f64(cap),
            fmt_f64((obj - cap).max(0.0)),
            fmt_f64(bench),
        ])
    })?;
    for row in rows {
        table.push_row(row);
    }
    Ok(table)
}

pub fn robustness(
    eps_list: &[f64],
    trials: usize,
    dims: usize,
    seed: u64,
    jobs: usize,
) -> Result<ResultTable, CliError> {
    if dims == 0 {
        return Err(CliError::usage("--dims must be positive".into()));
    }
    let mut table = ResultTable::new(vec![
        "epsilon",
        "trials",
        "max_loss",
        "bound_3eps",
        "within_bound",
    ]);
    let rows = run_rows(jobs, eps_list.len(), |i| {
        let eps = eps_list[i];
        if !(eps > 0.0 && eps < 0.5) {
            return Err(CliError::usage(format!(
                "epsilon must lie in (0, 0.5), got {eps}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(row_seed(seed, i));
        let rect = Rect::unit(dims);
        let mut max_loss = 0.0_f64;
        for _ in 0..trials {
            let support = rng.random_range(2..7);
            let dist = random_distribution(&mut rng, &rect, support);
            let mu = dist.mean();
            let full = rng.random_range(0..dims);
            let coords: Vec<f64> = mu
                .coords()
                .iter()
                .enumerate()
                .map(|(k, &m)| {
                    let delta = if k == full {
                        eps
                    } else {
                        eps * rng.random::<f64>()
                    };
                    if m + delta <= 1.0 {
                        m + delta
                    } else {
                        m - delta
                    }
                })
                .collect();
            let mu_hat = Point::new(coords).map_err(CliError::from_core)?;
            let check = perturbed_rule_loss(&dist, &mu_hat).map_err(CliError::from_core)?;
            max_loss = max_loss.max(check.loss());
        }
        let bound = 3.0 * eps;
        Ok(vec![
            fmt_f64(eps),
            trials.to_string(),
            fmt_f64(max_loss),
            fmt_f64(bound),
            (max_loss <= bound + 1e-9).to_string(),
        ])
    })?;
    for row in rows {
        table.push_row(row);
    }
    Ok(table)
}

pub fn sampling(
    eps: f64,
    delta: f64,
    n: u32,
    trials: usize,
    seed: u64,
    jobs: usize,
) -> Result<ResultTable, CliError> {
    let k = sample_count(eps, delta, n).map_err(CliError::from_core)?;
    let rect = Rect::unit(n as usize);
    let dist = FiniteDistribution::uniform(rect.corners()).map_err(CliError::from_core)?;
    let mu = dist.mean();

    let failures: Vec<Vec<String>> = run_rows(jobs, trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(row_seed(seed, i));
        let samples: Vec<Point> = (0..k).map(|_| rng_sample(&dist, &mut rng)).collect();
        let estimate = estimate_prior_mean(&samples).map_err(CliError::from_core)?;
        Ok(vec![(estimate.linf_distance(&mu) > eps).to_string()])
    })?;
    let failed = failures.iter().filter(|row| row[0] == "true").count();
    let rate = failed as f64 / trials as f64;

    let mut table = ResultTable::new(vec![
        "epsilon",
        "delta",
        "n",
        "sample_count",
        "trials",
        "failure_rate",
        "within_delta",
    ]);
    table.push_row(vec![
        fmt_f64(eps),
        fmt_f64(delta),
        n.to_string(),
        k.to_string(),
        trials.to_string(),
        fmt_f64(rate),
        (rate <= delta).to_string(),
    ]);
    Ok(table)
}

fn rng_sample(dist: &FiniteDistribution, rng: &mut ChaCha8Rng) -> Point {
    dist.sample(rng).clone()
}
