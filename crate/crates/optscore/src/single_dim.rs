//! Optimal scoring rules for a single-dimensional mean on `[0, 1]`.
//!
//! The bounded-score program has a closed-form solution here: optima are
//! V-shaped at the prior mean `μ` with slope gap `b − a = 1/max(μ, 1−μ)`,
//! and the optimal objective is
//!
//! ```text
//! OPT(f) = E[max(0, r − μ)] / max(μ, 1 − μ) ≤ 1/2.
//! ```
//!
//! This module also analyzes the prior-independent side: the quadratic
//! rule's exact worst case `c²` over distributions with optimum `c`, the
//! `min(1/2, 8c²/(1−4c)²)` cap on any prior-independent rule, the interval
//! partition adversary behind that cap, and a variant optimum under an
//! expected (rather than ex-post) score bound.

use crate::dist::FiniteDistribution;
use crate::error::{Error, Result};
use crate::num::CompensatedSum;
use crate::rule::{CanonicalScoringRule, StateFn};
use crate::utility::{ConvexUtility, PiecewiseLinearConvexUtility, VShapedUtility};
use crate::FEAS_TOL;

/// Parameters of an optimal V-shaped rule at prior mean `μ`: slopes `a` and
/// `b = a + 1/max(μ, 1−μ)` on `[0, 1]`. Every member of this family attains
/// the same (optimal) objective; the free parameter `a` trades off where
/// the induced scores sit inside `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptRuleSpec {
    pub mu: f64,
    pub left_slope: f64,
    pub right_slope: f64,
}

impl OptRuleSpec {
    /// The member with left slope `a`.
    pub fn with_left_slope(mu: f64, a: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Domain(format!("prior mean {mu} outside [0, 1]")));
        }
        if !a.is_finite() {
            return Err(Error::Domain("left slope must be finite".into()));
        }
        Ok(Self {
            mu,
            left_slope: a,
            right_slope: a + 1.0 / mu.max(1.0 - mu),
        })
    }

    /// The symmetric member `a = −b`, the default used by the builders: its
    /// constant `κ = 1/2` is what per-dimension composition requires.
    pub fn symmetric(mu: f64) -> Result<Self> {
        let c = 0.5 / mu.max(1.0 - mu);
        Self::with_left_slope(mu, -c)
    }

    pub fn slope_gap(&self) -> f64 {
        self.right_slope - self.left_slope
    }

    pub fn utility(&self) -> VShapedUtility {
        VShapedUtility::new(self.mu, self.left_slope, self.right_slope)
            .expect("slope gap is positive")
    }

    /// The two boundedness constraints for a unit score cap:
    /// `u(1) − u(0) − ξ(0) ≤ 1` and `u(0) − u(1) + ξ(1) ≤ 1`.
    pub fn satisfies_unit_bound(&self) -> bool {
        let u = self.utility();
        let (u0, u1) = (u.value(0.0), u.value(1.0));
        u1 - u0 - self.left_slope <= 1.0 + FEAS_TOL && u0 - u1 + self.right_slope <= 1.0 + FEAS_TOL
    }
}

/// The optimal bounded proper scoring rule for prior mean `mu`: symmetric
/// V-shape with slope `1/(2·max(μ, 1−μ))` and constant `κ = 1/2`. For
/// `μ ∈ {0, 1}` the distribution is a point mass and the zero rule is
/// returned.
pub fn optimal_v_shaped(mu: f64) -> Result<CanonicalScoringRule> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::Domain(format!("prior mean {mu} outside [0, 1]")));
    }
    if mu == 0.0 || mu == 1.0 {
        let zero = VShapedUtility::new(mu, 0.0, 0.0)?;
        return Ok(CanonicalScoringRule::new(
            ConvexUtility::VShaped(zero),
            StateFn::Constant(0.0),
            1.0,
        ));
    }
    let spec = OptRuleSpec::symmetric(mu)?;
    Ok(CanonicalScoringRule::new(
        ConvexUtility::VShaped(spec.utility()),
        StateFn::Constant(0.5),
        1.0,
    ))
}

/// The optimal objective value `E[max(0, r − μ)] / max(μ, 1 − μ)` for a
/// distribution over posterior means supported in `[0, 1]`.
pub fn opt_value(dist: &FiniteDistribution) -> Result<f64> {
    if dist.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: dist.dim(),
        });
    }
    let mu = dist.scalar_mean()?;
    let mut above = CompensatedSum::new();
    for (point, prob) in dist.iter() {
        let r = point[0];
        if !(-FEAS_TOL..=1.0 + FEAS_TOL).contains(&r) {
            return Err(Error::Domain(format!("support point {r} outside [0, 1]")));
        }
        above.add(prob * (r - mu).max(0.0));
    }
    Ok(above.value() / mu.max(1.0 - mu))
}

/// The benchmark `2·E[max(0, r − μ)]`, an upper bound on `OPT` within a
/// factor of two; the partition adversary is calibrated against it.
pub fn effort_benchmark(dist: &FiniteDistribution) -> Result<f64> {
    let mu = dist.scalar_mean()?;
    let mut above = CompensatedSum::new();
    for (point, prob) in dist.iter() {
        above.add(prob * (point[0] - mu).max(0.0));
    }
    Ok(2.0 * above.value())
}

/// The quadratic scoring rule `S(r, θ) = 1 − (θ − r)²` in canonical form:
/// `u(r) = r²`, `ξ(r) = 2r`, `κ(θ) = 1 − θ²`. Its incentive objective on
/// any distribution equals that distribution's variance.
pub fn quadratic_rule() -> CanonicalScoringRule {
    CanonicalScoringRule::new(ConvexUtility::Quadratic, StateFn::OneMinusSquaredNorm, 1.0)
}

/// Worst-case objective `c²` of the quadratic rule over all distributions
/// whose optimal objective value is `c ∈ (0, 1/2]`.
pub fn maxmin_quadratic_value(c: f64) -> Result<f64> {
    check_opt_level(c)?;
    Ok(c * c)
}

/// Cap `min(1/2, 8c²/(1−4c)²)` on the worst-case objective of *any*
/// prior-independent rule over distributions with optimum `c ∈ (0, 1/2]`;
/// always at most `32c²`, so the quadratic rule is a constant-factor
/// approximation of the best prior-independent rule.
pub fn pi_upper_bound(c: f64) -> Result<f64> {
    check_opt_level(c)?;
    let denom = 1.0 - 4.0 * c;
    let ratio = if denom == 0.0 {
        f64::INFINITY
    } else {
        8.0 * c * c / (denom * denom)
    };
    Ok(ratio.min(0.5))
}

fn check_opt_level(c: f64) -> Result<()> {
    if !(c > 0.0 && c <= 0.5) {
        return Err(Error::Domain(format!(
            "optimal objective level {c} outside (0, 1/2]"
        )));
    }
    Ok(())
}

/// The adversary that defeats any fixed convex bounded utility: partition
/// `[0, 1]` into `d` intervals, pick one where the derivative of `u`
/// increases by at most `2/d` (ties go to the rightmost such interval), and
/// return the uniform distribution on its endpoints.
///
/// The returned two-point distribution satisfies
/// `Obj(u, result) ≤ 1/(2d²)` while its benchmark is `1/(2d)`.
pub fn pigeonhole_adversary(u: &ConvexUtility, d: u32) -> Result<FiniteDistribution> {
    if u.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: u.dim(),
        });
    }
    if d == 0 {
        return Err(Error::Domain("need at least one interval".into()));
    }
    let (start, _) = u.derivative_range(0.0)?;
    let (_, end) = u.derivative_range(1.0)?;
    let total_increase = end - start;
    if total_increase > 2.0 + FEAS_TOL {
        return Err(Error::Domain(format!(
            "derivative increase {total_increase} exceeds the bound-1 budget of 2"
        )));
    }
    let d = d as usize;
    let mut best_k = 0;
    let mut best_increase = f64::INFINITY;
    for k in 0..d {
        let lo = k as f64 / d as f64;
        let hi = (k + 1) as f64 / d as f64;
        let (_, right_at_lo) = u.derivative_range(lo)?;
        let (left_at_hi, _) = u.derivative_range(hi)?;
        let increase = left_at_hi - right_at_lo;
        if increase <= best_increase {
            best_increase = increase;
            best_k = k; // later intervals win ties
        }
    }
    let lo = best_k as f64 / d as f64;
    let hi = (best_k + 1) as f64 / d as f64;
    FiniteDistribution::new_scalar(&[lo, hi], &[0.5, 0.5])
}

/// Returns `(Obj(u_q, dist), σ·OPT(dist))`; the first dominates the second,
/// so the quadratic rule is near-optimal on dispersed distributions.
pub fn variance_lower_bound_check(dist: &FiniteDistribution) -> Result<(f64, f64)> {
    let lhs = dist.variance()?;
    let rhs = dist.variance()?.sqrt() * opt_value(dist)?;
    debug_assert!(lhs >= rhs - FEAS_TOL);
    Ok((lhs, rhs))
}

/// The V-shaped optimum under an *expected* score bound: replaces `u` by
/// the V-shape at `μ` whose expected utility matches `u` separately below
/// and above the mean, hence with identical objective. Slopes are
///
/// ```text
/// a = −Σ_{r<μ} p·u(r) / Σ_{r<μ} p·(μ−r),   b = Σ_{r≥μ} p·u(r) / Σ_{r≥μ} p·(r−μ)
/// ```
///
/// with a slope of zero for a side that carries no mass. The construction
/// is verified on the output: objective preservation and the endpoint
/// dominance (`ũ ≤ u` and subgradient nesting at `0` and `1`) that lets
/// `ũ` inherit any feasible state function of `u`.
pub fn expected_bound_v_shape(
    u: &PiecewiseLinearConvexUtility,
    dist: &FiniteDistribution,
) -> Result<VShapedUtility> {
    if dist.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: dist.dim(),
        });
    }
    let mu = dist.scalar_mean()?;
    let at_mean = u.value(mu)?;
    if at_mean.abs() > FEAS_TOL {
        return Err(Error::Domain(format!(
            "utility must vanish at the mean, u({mu}) = {at_mean}"
        )));
    }
    if dist.is_point_mass() {
        // both sides are massless; the zero utility is feasible outright
        return VShapedUtility::new(mu, 0.0, 0.0);
    }

    let mut num_lo = CompensatedSum::new();
    let mut den_lo = CompensatedSum::new();
    let mut num_hi = CompensatedSum::new();
    let mut den_hi = CompensatedSum::new();
    for (point, prob) in dist.iter() {
        let r = point[0];
        let val = prob * u.value(r)?;
        if r < mu {
            num_lo.add(val);
            den_lo.add(prob * (mu - r));
        } else {
            num_hi.add(val);
            den_hi.add(prob * (r - mu));
        }
    }
    let a = if den_lo.value() > 0.0 {
        -num_lo.value() / den_lo.value()
    } else {
        0.0
    };
    let b = if den_hi.value() > 0.0 {
        num_hi.value() / den_hi.value()
    } else {
        0.0
    };
    let v = VShapedUtility::new(mu, a, b)?;

    // dominance at the endpoints lets the original κ stay feasible
    let (lo, hi) = u.domain();
    let checks = [
        v.value(lo) <= u.value(lo)? + FEAS_TOL,
        v.value(hi) <= u.value(hi)? + FEAS_TOL,
        v.slope_at(lo) >= u.right_slope(lo)? - FEAS_TOL,
        b <= u.left_slope(hi)? + FEAS_TOL,
    ];
    if checks.iter().any(|ok| !ok) {
        return Err(Error::Internal(format!(
            "expected-bound V-shape failed its feasibility re-check (a={a}, b={b})"
        )));
    }
    Ok(v)
}
