//! Canonical scoring rules: construction, evaluation, and verification.
//!
//! A canonical scoring rule is built from a convex utility `u`, a
//! subgradient selection `ξ`, and a state function `κ`:
//!
//! ```text
//! S(r, θ) = u(r) + ξ(r)·(θ − r) + κ(θ)
//! ```
//!
//! Truthful reporting of the posterior mean maximizes the expected score,
//! whatever `κ` is; `κ` only moves scores into the feasible band `[0, B]`.
//! [`fit_kappa`] picks the `κ` that makes the minimum score at every tested
//! state exactly zero, and [`verify_proper`] checks properness on explicit
//! grids of reports and beliefs.

use crate::dist::FiniteDistribution;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::utility::{objective, Branch, ConvexUtility};
use crate::FEAS_TOL;

/// Tolerance for matching a state against a `κ` lookup table.
const STATE_MATCH_TOL: f64 = 1e-9;

/// Anything that maps a report and a realized state to a score.
///
/// Implemented by [`CanonicalScoringRule`] and by the indirect rule forms in
/// `multi_dim`; the verifiers below work against this interface.
pub trait ScoringRule {
    fn dim(&self) -> usize;
    fn score(&self, report: &Point, state: &Point) -> Result<f64>;

    /// Expected score of `report` when the state is drawn from `belief`.
    fn expected_score(&self, report: &Point, belief: &FiniteDistribution) -> Result<f64> {
        let mut acc = 0.0;
        for (state, prob) in belief.iter() {
            acc += prob * self.score(report, state)?;
        }
        Ok(acc)
    }
}

/// The state function `κ(θ)` of a canonical scoring rule.
#[derive(Debug, Clone, PartialEq)]
pub enum StateFn {
    /// `κ ≡ c`, the form required when composing per-dimension rules.
    Constant(f64),
    /// A table over a finite state set, as produced by [`fit_kappa`].
    Table(KappaTable),
    /// `κ(θ) = 1 − ‖θ‖²`, the closed form used by the quadratic rule.
    OneMinusSquaredNorm,
}

impl StateFn {
    pub fn eval(&self, state: &Point) -> Result<f64> {
        match self {
            StateFn::Constant(c) => Ok(*c),
            StateFn::Table(table) => table.lookup(state),
            StateFn::OneMinusSquaredNorm => {
                Ok(1.0 - state.coords().iter().map(|c| c * c).sum::<f64>())
            }
        }
    }
}

/// `κ` values tabulated over a finite state set.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaTable {
    states: Vec<Point>,
    values: Vec<f64>,
}

impl KappaTable {
    pub fn new(states: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        if states.is_empty() || states.len() != values.len() {
            return Err(Error::Domain(
                "kappa table needs one value per state".into(),
            ));
        }
        Ok(Self { states, values })
    }

    pub fn states(&self) -> &[Point] {
        &self.states
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lookup(&self, state: &Point) -> Result<f64> {
        self.states
            .iter()
            .position(|s| s.dim() == state.dim() && s.linf_distance(state) <= STATE_MATCH_TOL)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::Domain(format!("state {:?} not in kappa table", state.coords())))
    }
}

/// A bounded proper scoring rule in canonical form.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalScoringRule {
    utility: ConvexUtility,
    kappa: StateFn,
    bound: f64,
}

impl CanonicalScoringRule {
    pub fn new(utility: ConvexUtility, kappa: StateFn, bound: f64) -> Self {
        Self {
            utility,
            kappa,
            bound,
        }
    }

    pub fn utility(&self) -> &ConvexUtility {
        &self.utility
    }

    pub fn kappa(&self) -> &StateFn {
        &self.kappa
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// The incentive objective of this rule's utility on `dist`.
    pub fn objective(&self, dist: &FiniteDistribution) -> Result<f64> {
        objective(&self.utility, dist)
    }
}

impl ScoringRule for CanonicalScoringRule {
    fn dim(&self) -> usize {
        self.utility.dim()
    }

    /// `S(r, θ) = u(r) + ξ(r)·(θ − r) + κ(θ)`.
    fn score(&self, report: &Point, state: &Point) -> Result<f64> {
        let dim = self.utility.dim();
        report.check_dim(dim)?;
        state.check_dim(dim)?;
        let u = self.utility.value(report)?;
        let xi = self.utility.subgradient(report)?;
        let inner: f64 = xi
            .iter()
            .zip(state.coords())
            .zip(report.coords())
            .map(|((g, s), r)| g * (s - r))
            .sum();
        Ok(u + inner + self.kappa.eval(state)?)
    }
}

/// Fits the state function that zeroes the minimum score at every state:
/// `κ(θ) = −min_r [u(r) + ξ(r)·(θ − r)]`.
///
/// The minimum runs over the utility's own affine pieces when those are
/// enumerable, and over the given states as reports otherwise. Fails with
/// the worst `(report, state)` pair if some score would then have to exceed
/// `bound`.
pub fn fit_kappa(utility: &ConvexUtility, states: &[Point], bound: f64) -> Result<StateFn> {
    if states.is_empty() {
        return Err(Error::Domain("fit_kappa needs at least one state".into()));
    }
    for s in states {
        s.check_dim(utility.dim())?;
    }
    let branches: Vec<Branch> = match utility.branches() {
        Some(b) => b,
        None => states
            .iter()
            .map(|s| {
                Ok(Branch {
                    at: s.coords().to_vec(),
                    value: utility.value(s)?,
                    gradient: utility.subgradient(s)?,
                })
            })
            .collect::<Result<_>>()?,
    };

    let mut values = Vec::with_capacity(states.len());
    let mut worst_excess = 0.0;
    let mut worst: Option<(Vec<f64>, Vec<f64>)> = None;
    for state in states {
        let (mut min_val, mut min_at) = (f64::INFINITY, &branches[0].at);
        for b in &branches {
            let v = b.eval(state);
            if v < min_val {
                min_val = v;
                min_at = &b.at;
            }
        }
        // max score at this state is u(θ) − min branch value
        let excess = utility.value(state)? - min_val - bound;
        if excess > worst_excess {
            worst_excess = excess;
            worst = Some((min_at.clone(), state.coords().to_vec()));
        }
        values.push(-min_val);
    }
    if worst_excess > FEAS_TOL {
        let (report, state) = worst.expect("excess implies a witness");
        return Err(Error::BoundInfeasible {
            bound,
            excess: worst_excess,
            report,
            state,
        });
    }
    Ok(StateFn::Table(KappaTable::new(states.to_vec(), values)?))
}

/// Outcome of a properness check on finite grids.
#[derive(Debug, Clone)]
pub struct PropernessReport {
    /// No violation above `FEAS_TOL` was found.
    pub proper: bool,
    /// Largest observed `E[S(r′,θ)] − E[S(mean,θ)]` over all pairs.
    pub worst_violation: f64,
    /// `(belief index, report index)` of the worst violation, if any.
    pub witness: Option<(usize, usize)>,
}

/// Checks that for every belief `G` in `beliefs` and every deviation `r′`
/// in `reports`, truthfully reporting `mean(G)` is (weakly) better:
/// `E[S(mean(G), θ)] ≥ E[S(r′, θ)] − FEAS_TOL`.
pub fn verify_proper<S: ScoringRule + ?Sized>(
    rule: &S,
    reports: &[Point],
    beliefs: &[FiniteDistribution],
) -> Result<PropernessReport> {
    let mut worst = 0.0_f64;
    let mut witness = None;
    for (bi, belief) in beliefs.iter().enumerate() {
        let truthful = rule.expected_score(&belief.mean(), belief)?;
        for (ri, report) in reports.iter().enumerate() {
            let deviation = rule.expected_score(report, belief)? - truthful;
            if deviation > worst {
                worst = deviation;
                if deviation > FEAS_TOL {
                    witness = Some((bi, ri));
                }
            }
        }
    }
    Ok(PropernessReport {
        proper: worst <= FEAS_TOL,
        worst_violation: worst,
        witness,
    })
}

/// Minimum and maximum score of `rule` over all report/state pairs drawn
/// from the given grids.
pub fn score_range<S: ScoringRule + ?Sized>(
    rule: &S,
    reports: &[Point],
    states: &[Point],
) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for r in reports {
        for s in states {
            let v = rule.score(r, s)?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok((lo, hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::utility::VShapedUtility;

    fn pt(x: f64) -> Point {
        Point::scalar(x)
    }

    fn quadratic() -> CanonicalScoringRule {
        CanonicalScoringRule::new(ConvexUtility::Quadratic, StateFn::OneMinusSquaredNorm, 1.0)
    }

    #[test]
    fn quadratic_score_matches_closed_form() {
        // S(r, θ) = 1 − (θ − r)²
        let rule = quadratic();
        assert!((rule.score(&pt(0.5), &pt(1.0)).unwrap() - 0.75).abs() < 1e-15);
        assert!((rule.score(&pt(0.0), &pt(1.0)).unwrap() - 0.0).abs() < 1e-15);
        assert!((rule.score(&pt(0.3), &pt(0.3)).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn truthful_report_is_maximal_on_realized_state() {
        let rule = quadratic();
        let theta = pt(0.63);
        let truthful = rule.score(&theta, &theta).unwrap();
        for r in [0.0, 0.2, 0.5, 0.9, 1.0] {
            assert!(rule.score(&pt(r), &theta).unwrap() <= truthful + 1e-15);
        }
    }

    #[test]
    fn score_rejects_dimension_mismatch() {
        let rule = quadratic();
        let bad = Point::new(vec![0.1, 0.2]).unwrap();
        assert!(matches!(
            rule.score(&bad, &pt(0.5)),
            Err(Error::DimensionMismatch {
                expected: 1,
                got: 2
            })
        ));
    }

    #[test]
    fn v_shape_score_with_constant_kappa() {
        // symmetric V at 0.8 with slopes ∓0.625 and κ = 1/2
        let v = VShapedUtility::symmetric(0.8, 0.625).unwrap();
        let rule =
            CanonicalScoringRule::new(ConvexUtility::VShaped(v), StateFn::Constant(0.5), 1.0);
        let got = rule.score(&pt(1.0), &pt(1.0)).unwrap();
        assert!((got - 0.625).abs() < 1e-12);
    }

    #[test]
    fn fit_kappa_on_quadratic_recovers_one_minus_theta_sq() {
        let states = [pt(0.0), pt(1.0)];
        let kappa = fit_kappa(&ConvexUtility::Quadratic, &states, 1.0).unwrap();
        for s in &states {
            let expected = 1.0 - s[0] * s[0];
            assert!((kappa.eval(s).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn fit_kappa_on_v_shape() {
        let v = VShapedUtility::symmetric(0.5, 1.0).unwrap();
        let states = [pt(0.0), pt(1.0)];
        let kappa = fit_kappa(&ConvexUtility::VShaped(v), &states, 1.0).unwrap();
        assert!((kappa.eval(&pt(0.0)).unwrap() - 0.5).abs() < 1e-12);
        assert!((kappa.eval(&pt(1.0)).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fit_kappa_constant_utility_gives_zero() {
        let v = VShapedUtility::new(0.5, 0.0, 0.0).unwrap();
        let states = [pt(0.0), pt(0.5), pt(1.0)];
        let kappa = fit_kappa(&ConvexUtility::VShaped(v), &states, 1.0).unwrap();
        for s in &states {
            assert_eq!(kappa.eval(s).unwrap(), 0.0);
        }
    }

    #[test]
    fn fit_kappa_reports_infeasible_pair() {
        // slopes ∓2 need a bound of 2 on [0,1]; B = 1 must fail
        let v = VShapedUtility::symmetric(0.5, 2.0).unwrap();
        let states = [pt(0.0), pt(1.0)];
        let got = fit_kappa(&ConvexUtility::VShaped(v), &states, 1.0);
        match got {
            Err(Error::BoundInfeasible { excess, .. }) => assert!(excess > 0.5),
            other => panic!("expected bound infeasibility, got {other:?}"),
        }
    }

    #[test]
    fn scores_stay_in_band_after_fit_kappa() {
        let v = VShapedUtility::symmetric(0.8, 0.625).unwrap();
        let utility = ConvexUtility::VShaped(v);
        let states: Vec<Point> = (0..=20).map(|i| pt(i as f64 / 20.0)).collect();
        let kappa = fit_kappa(&utility, &states, 1.0).unwrap();
        let rule = CanonicalScoringRule::new(utility, kappa, 1.0);
        let (lo, hi) = score_range(&rule, &states, &states).unwrap();
        assert!(lo >= -1e-12, "min score {lo}");
        assert!(hi <= 1.0 + 1e-12, "max score {hi}");
        // some state attains score exactly zero
        assert!(lo.abs() < 1e-12);
    }

    /// A rule whose "subgradient" slopes the wrong way: built from a concave
    /// hump, so some deviation must beat truthful reporting.
    struct DecreasingSelectionRule;

    impl ScoringRule for DecreasingSelectionRule {
        fn dim(&self) -> usize {
            1
        }
        fn score(&self, report: &Point, state: &Point) -> Result<f64> {
            let (r, theta) = (report[0], state[0]);
            let u = -(r - 0.5) * (r - 0.5);
            let xi = -2.0 * (r - 0.5);
            Ok(u + xi * (theta - r))
        }
    }

    #[test]
    fn verify_proper_accepts_quadratic_and_rejects_decreasing_selection() {
        let reports: Vec<Point> = (0..=20).map(|i| pt(i as f64 / 20.0)).collect();
        let beliefs: Vec<FiniteDistribution> = (1..10)
            .map(|i| {
                let p = i as f64 / 10.0;
                FiniteDistribution::new_scalar(&[0.0, 1.0], &[1.0 - p, p]).unwrap()
            })
            .collect();

        let report = verify_proper(&quadratic(), &reports, &beliefs).unwrap();
        assert!(report.proper, "violation {}", report.worst_violation);
        assert!(report.witness.is_none());

        let report = verify_proper(&DecreasingSelectionRule, &reports, &beliefs).unwrap();
        assert!(!report.proper);
        assert!(report.worst_violation > FEAS_TOL);
        assert!(report.witness.is_some());
    }
}
