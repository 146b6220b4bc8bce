//! The `optimize`, `evaluate`, and `bayes` subcommands.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use optscore::bayes::{posterior_mean_distribution, SignalModel};
use optscore::dist::exact_probability_normalize;
use optscore::full_dist::to_mean_instance;
use optscore::multi_dim::{
    build_lp, lp_optimal, max_over_separate_rule, menu_reports, separate_rule, MeanElicitInstance,
};
use optscore::rule::fit_kappa;
use optscore::single_dim::quadratic_rule;
use optscore::{
    objective, score_range, verify_proper, CanonicalScoringRule, FiniteDistribution, Point, Rect,
    Result as CoreResult, ScoringRule,
};

use crate::instance::Instance;
use crate::table::{fmt_coords, fmt_f64, ResultTable};
use crate::CliError;

/// Rule families `evaluate` can build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum RuleKind {
    Quadratic,
    VShaped,
    MaxOverSeparate,
    Separate,
    Lp,
}

/// A proper rule multiplied by a positive factor: rescales a unit-bounded
/// rule to an arbitrary score cap without touching incentives.
struct Scaled<S> {
    inner: S,
    factor: f64,
}

impl<S: ScoringRule> ScoringRule for Scaled<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn score(&self, report: &Point, state: &Point) -> CoreResult<f64> {
        Ok(self.factor * self.inner.score(report, state)?)
    }
}

/// Everything `evaluate` and `optimize` need from a loaded instance.
struct EvalContext {
    /// Distribution over posterior means.
    dist: FiniteDistribution,
    /// Report/state box (bounding box of the states; unit box for signal
    /// models regardless of the prior's support).
    rect: Rect,
    /// States used for κ tables, score ranges, and properness beliefs.
    states: Vec<Point>,
    /// State distribution, when the instance determines one.
    prior: Option<(Vec<Point>, Vec<f64>)>,
    bound: f64,
}

fn bounding_box(states: &[Point]) -> Result<Rect, CliError> {
    let n = states[0].dim();
    let mut lower = states[0].coords().to_vec();
    let mut upper = states[0].coords().to_vec();
    for s in states {
        for i in 0..n {
            lower[i] = lower[i].min(s[i]);
            upper[i] = upper[i].max(s[i]);
        }
    }
    Rect::new(lower, upper)
        .map_err(|e| CliError::infeasible_msg(format!("states span no box in some dimension: {e}")))
}

fn context(instance: &Instance, bound_override: Option<f64>) -> Result<EvalContext, CliError> {
    match instance {
        Instance::Mean(inst) => Ok(EvalContext {
            dist: inst.means().clone(),
            rect: bounding_box(inst.states())?,
            states: inst.states().to_vec(),
            prior: None,
            bound: inst.bound(),
        }),
        Instance::FullDist(full) => {
            let inst = to_mean_instance(full, bound_override.unwrap_or(1.0))
                .map_err(CliError::from_core)?;
            Ok(EvalContext {
                dist: inst.means().clone(),
                rect: bounding_box(inst.states())?,
                states: inst.states().to_vec(),
                prior: None,
                bound: inst.bound(),
            })
        }
        Instance::SignalModel(model) => {
            let dist = posterior_mean_distribution(model).map_err(CliError::from_core)?;
            let rect = Rect::unit(model.dim());
            Ok(EvalContext {
                dist,
                rect,
                states: model.states().to_vec(),
                prior: Some((model.states().to_vec(), model.prior().to_vec())),
                bound: bound_override.unwrap_or(1.0),
            })
        }
    }
}

/// The mean-elicitation instance behind any loaded instance; signal models
/// get the corners of the unit box as states, which is exact there because
/// the boundedness constraint of a convex utility binds at hull extremes.
fn as_mean_instance(
    instance: &Instance,
    ctx: &EvalContext,
) -> Result<MeanElicitInstance, CliError> {
    match instance {
        Instance::Mean(inst) => Ok(inst.clone()),
        Instance::FullDist(full) => to_mean_instance(full, ctx.bound).map_err(CliError::from_core),
        Instance::SignalModel(_) => {
            MeanElicitInstance::new(ctx.rect.corners(), ctx.dist.clone(), ctx.bound)
                .map_err(CliError::from_core)
        }
    }
}

/// Sum of per-dimension variances: the objective of the unit-box quadratic
/// rule. Only meaningful on the unit box.
fn quadratic_comparison(ctx: &EvalContext) -> Option<f64> {
    let unit =
        (0..ctx.rect.dim()).all(|i| ctx.rect.lower()[i] == 0.0 && ctx.rect.upper()[i] == 1.0);
    if !unit {
        return None;
    }
    let mean = ctx.dist.mean();
    let mut total = 0.0;
    for i in 0..ctx.dist.dim() {
        let mut second = 0.0;
        for (point, prob) in ctx.dist.iter() {
            second += prob * (point[i] - mean[i]).powi(2);
        }
        total += second;
    }
    Some(ctx.bound * total)
}

pub fn cmd_optimize(
    instance: &Instance,
    closed_form: bool,
    lp: bool,
    bound_override: Option<f64>,
    dump_lp: Option<&std::path::Path>,
) -> Result<ResultTable, CliError> {
    let ctx = context(instance, bound_override)?;
    let use_closed = if closed_form || lp {
        closed_form
    } else {
        ctx.dist.dim() == 1
    };

    let mut table = ResultTable::new(vec!["quantity", "value"]);
    table.push_row(vec![
        "method".to_string(),
        if use_closed { "closed-form" } else { "lp" }.into(),
    ]);
    let mu = ctx.dist.mean();
    table.push_row(vec!["prior_mean".to_string(), fmt_coords(mu.coords())]);

    if use_closed {
        if ctx.dist.dim() != 1 {
            return Err(CliError::usage(
                "closed-form optimization needs a one-dimensional instance; use --lp".into(),
            ));
        }
        // the optimal V-shape on the state hull, scaled to the score cap
        let rule = max_over_separate_rule(&mu, &ctx.rect).map_err(CliError::from_core)?;
        let opt = ctx.bound * rule.objective(&ctx.dist).map_err(CliError::from_core)?;
        let slope = ctx.bound * rule.dims()[0].slope;
        table.push_row(vec!["optimal_value".to_string(), fmt_f64(opt)]);
        table.push_row(vec![
            "v_shape_kink".to_string(),
            fmt_f64(rule.dims()[0].center),
        ]);
        table.push_row(vec!["v_shape_left_slope".to_string(), fmt_f64(-slope)]);
        table.push_row(vec!["v_shape_right_slope".to_string(), fmt_f64(slope)]);
        table.push_row(vec![
            "kappa".to_string(),
            fmt_f64(ctx.bound * rule.dims()[0].beta),
        ]);
        for warn in rule.degenerate_dimensions() {
            eprintln!("warning: prior mean sits on the boundary in dimension {warn}; slope capped");
        }
    } else {
        let inst = as_mean_instance(instance, &ctx)?;
        if let Some(path) = dump_lp {
            std::fs::write(path, build_lp(&inst).dump())
                .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
        }
        let sol = lp_optimal(&inst).map_err(CliError::from_core)?;
        table.push_row(vec!["optimal_value".to_string(), fmt_f64(sol.objective())]);
        let reports = menu_reports(&inst);
        for (i, report) in reports.iter().enumerate() {
            table.push_row(vec![format!("report_{i}"), fmt_coords(report.coords())]);
            table.push_row(vec![
                format!("allocation_{i}"),
                fmt_coords(sol.allocations()[i].coords()),
            ]);
            table.push_row(vec![format!("payment_{i}"), fmt_f64(sol.payments()[i])]);
        }
    }

    match quadratic_comparison(&ctx) {
        Some(q) => table.push_row(vec!["quadratic_objective".to_string(), fmt_f64(q)]),
        None => table.push_row(vec!["quadratic_objective".to_string(), "n/a".to_string()]),
    }
    Ok(table)
}

pub fn cmd_evaluate(
    instance: &Instance,
    kind: RuleKind,
    bound_override: Option<f64>,
    seed: u64,
) -> Result<ResultTable, CliError> {
    let ctx = context(instance, bound_override)?;
    let mu = ctx.dist.mean();
    let n = ctx.dist.dim();
    let b = ctx.bound;

    let mut params: Vec<(String, String)> = Vec::new();
    let (rule, obj): (Box<dyn ScoringRule>, f64) = match kind {
        RuleKind::Quadratic => {
            if n != 1 {
                return Err(CliError::usage(
                    "the quadratic rule is one-dimensional; use max-over-separate".into(),
                ));
            }
            let base = quadratic_rule();
            let obj = b * base.objective(&ctx.dist).map_err(CliError::from_core)?;
            (
                Box::new(Scaled {
                    inner: base,
                    factor: b,
                }),
                obj,
            )
        }
        RuleKind::VShaped => {
            if n != 1 {
                return Err(CliError::usage(
                    "the V-shaped rule is one-dimensional; use max-over-separate".into(),
                ));
            }
            let base = max_over_separate_rule(&mu, &ctx.rect).map_err(CliError::from_core)?;
            params.push(("v_shape_kink".into(), fmt_f64(base.dims()[0].center)));
            params.push(("v_shape_slope".into(), fmt_f64(b * base.dims()[0].slope)));
            let obj = b * base.objective(&ctx.dist).map_err(CliError::from_core)?;
            (
                Box::new(Scaled {
                    inner: base,
                    factor: b,
                }),
                obj,
            )
        }
        RuleKind::MaxOverSeparate => {
            let base = max_over_separate_rule(&mu, &ctx.rect).map_err(CliError::from_core)?;
            for (i, d) in base.dims().iter().enumerate() {
                params.push((format!("slope_{i}"), fmt_f64(b * d.slope)));
            }
            for i in base.degenerate_dimensions() {
                eprintln!("warning: degenerate dimension {i}: center on the boundary");
            }
            let obj = b * base.objective(&ctx.dist).map_err(CliError::from_core)?;
            (
                Box::new(Scaled {
                    inner: base,
                    factor: b,
                }),
                obj,
            )
        }
        RuleKind::Separate => {
            let base = separate_rule(&mu, &ctx.rect).map_err(CliError::from_core)?;
            let obj = b * base.objective(&ctx.dist).map_err(CliError::from_core)?;
            (
                Box::new(Scaled {
                    inner: base,
                    factor: b,
                }),
                obj,
            )
        }
        RuleKind::Lp => {
            let inst = as_mean_instance(instance, &ctx)?;
            let sol = lp_optimal(&inst).map_err(CliError::from_core)?;
            let utility = sol.utility().map_err(CliError::from_core)?;
            // κ over the evaluation states (the signal grid for signal
            // models), so prior expectations and ranges are well-defined
            let kappa = fit_kappa(&utility, &ctx.states, b).map_err(CliError::from_core)?;
            let obj = objective(&utility, &ctx.dist).map_err(CliError::from_core)?;
            params.push(("menu_size".into(), sol.allocations().len().to_string()));
            (Box::new(CanonicalScoringRule::new(utility, kappa, b)), obj)
        }
    };

    // expected score for truthfully reporting the prior mean
    let prior_report: Option<f64> = match &ctx.prior {
        Some((states, probs)) => {
            let mut acc = 0.0;
            for (state, &p) in states.iter().zip(probs) {
                acc += p * rule.score(&mu, state).map_err(CliError::from_core)?;
            }
            Some(acc)
        }
        // with a constant κ the expectation is state-free: u(μ_f) + κ
        None => match kind {
            RuleKind::VShaped | RuleKind::MaxOverSeparate | RuleKind::Separate => Some(b * 0.5),
            RuleKind::Quadratic | RuleKind::Lp => None,
        },
    };

    // properness on grids: report grid sized to the dimension, beliefs are
    // point masses at the states plus seeded mixtures
    let points_per_dim = match n {
        1 => 21,
        2 => 21,
        3 => 9,
        _ => 3,
    };
    let reports = ctx.rect.grid(points_per_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut beliefs: Vec<FiniteDistribution> = ctx
        .states
        .iter()
        .map(|s| FiniteDistribution::point_mass(s.clone()))
        .collect();
    for _ in 0..20 {
        let w = exact_probability_normalize(
            (0..ctx.states.len())
                .map(|_| rng.random::<f64>() + 1e-6)
                .collect(),
        );
        beliefs.push(FiniteDistribution::new(ctx.states.clone(), w).map_err(CliError::from_core)?);
    }
    let properness =
        verify_proper(rule.as_ref(), &reports, &beliefs).map_err(CliError::from_core)?;
    let (lo, hi) =
        score_range(rule.as_ref(), &reports, &ctx.states).map_err(CliError::from_core)?;

    let mut table = ResultTable::new(vec!["quantity", "value"]);
    table.push_row(vec!["rule".to_string(), format!("{kind:?}").to_lowercase()]);
    table.push_row(vec!["objective".to_string(), fmt_f64(obj)]);
    table.push_row(vec![
        "prior_report_score".to_string(),
        prior_report
            .map(fmt_f64)
            .unwrap_or_else(|| "n/a".to_string()),
    ]);
    table.push_row(vec![
        "proper_on_grids".to_string(),
        if properness.proper {
            "pass".to_string()
        } else {
            "FAIL".to_string()
        },
    ]);
    table.push_row(vec![
        "worst_properness_violation".to_string(),
        fmt_f64(properness.worst_violation),
    ]);
    table.push_row(vec!["score_min".to_string(), fmt_f64(lo)]);
    table.push_row(vec!["score_max".to_string(), fmt_f64(hi)]);
    for (k, v) in params {
        table.push_row(vec![k, v]);
    }
    Ok(table)
}

pub fn cmd_bayes(model: &SignalModel) -> Result<ResultTable, CliError> {
    let dist = posterior_mean_distribution(model).map_err(CliError::from_core)?;
    let mut table = ResultTable::new(vec!["index", "posterior_mean", "probability"]);
    for (i, (point, prob)) in dist.iter().enumerate() {
        table.push_row(vec![
            i.to_string(),
            fmt_coords(point.coords()),
            fmt_f64(prob),
        ]);
    }
    table.push_row(vec![
        "prior".to_string(),
        fmt_coords(dist.mean().coords()),
        fmt_f64(1.0),
    ]);
    Ok(table)
}
