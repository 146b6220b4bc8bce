//! Convex utility functions and the incentive objective.
//!
//! Every proper scoring rule for the mean is generated by a convex utility
//! `u` on the report space: the rule pays the supporting hyperplane of `u`
//! picked out by the report, evaluated at the realized state. The expected
//! gain from refining a prior belief into a posterior is then
//!
//! ```text
//! Obj(u, f) = E_{r∼f}[u(r)] − u(μ_f)
//! ```
//!
//! where `f` is the distribution of posterior means and `μ_f` its mean.
//! This module holds the utility representations the crate constructs —
//! piecewise-linear and V-shaped functions in one dimension, maxima of
//! affine functions recovered from linear programs, and per-dimension
//! compositions — together with [`objective`].

use crate::dist::FiniteDistribution;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::num::CompensatedSum;

/// Slack allowed when checking that slopes are nondecreasing.
const CONVEXITY_TOL: f64 = 1e-12;
/// Slack allowed on domain-membership checks before clamping.
const DOMAIN_TOL: f64 = 1e-9;

/// A continuous convex piecewise-linear function on an interval.
///
/// Stored as knots `lo = k₀ < k₁ < … < k_m = hi` with one slope per
/// segment; slopes must be nondecreasing. The additive constant is fixed by
/// an anchor `(x, u(x))` at construction time.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearConvexUtility {
    knots: Vec<f64>,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl PiecewiseLinearConvexUtility {
    /// Builds the function from a domain, interior breakpoints, per-segment
    /// slopes (`breakpoints.len() + 1` of them), and an anchor value.
    pub fn new(
        domain: (f64, f64),
        breakpoints: &[f64],
        slopes: &[f64],
        anchor: (f64, f64),
    ) -> Result<Self> {
        let (lo, hi) = domain;
        if !lo.is_finite() || !hi.is_finite() || lo >= hi {
            return Err(Error::InvalidUtility(format!("bad domain [{lo}, {hi}]")));
        }
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::InvalidUtility(format!(
                "{} breakpoints need {} slopes, got {}",
                breakpoints.len(),
                breakpoints.len() + 1,
                slopes.len()
            )));
        }
        let mut knots = Vec::with_capacity(breakpoints.len() + 2);
        knots.push(lo);
        for &b in breakpoints {
            if !(b > lo && b < hi) {
                return Err(Error::InvalidUtility(format!(
                    "breakpoint {b} outside the open domain ({lo}, {hi})"
                )));
            }
            if let Some(&prev) = knots.last() {
                if b <= prev {
                    return Err(Error::InvalidUtility(
                        "breakpoints must be strictly increasing".into(),
                    ));
                }
            }
            knots.push(b);
        }
        knots.push(hi);
        for w in slopes.windows(2) {
            if !w[0].is_finite() || w[1] < w[0] - CONVEXITY_TOL {
                return Err(Error::InvalidUtility(format!(
                    "slopes must be nondecreasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if let Some(s) = slopes.iter().find(|s| !s.is_finite()) {
            return Err(Error::InvalidUtility(format!("non-finite slope {s}")));
        }
        let (ax, av) = anchor;
        if !(lo - DOMAIN_TOL..=hi + DOMAIN_TOL).contains(&ax) || !av.is_finite() {
            return Err(Error::InvalidUtility(format!(
                "anchor ({ax}, {av}) outside domain"
            )));
        }

        // Integrate slopes outward from the anchor to get knot values.
        let seg = segment_of(&knots, ax);
        let mut values = vec![0.0; knots.len()];
        values[seg] = av - slopes[seg] * (ax - knots[seg]);
        for i in (0..seg).rev() {
            values[i] = values[i + 1] - slopes[i] * (knots[i + 1] - knots[i]);
        }
        for i in seg + 1..knots.len() {
            values[i] = values[i - 1] + slopes[i - 1] * (knots[i] - knots[i - 1]);
        }
        Ok(Self {
            knots,
            values,
            slopes: slopes.to_vec(),
        })
    }

    /// Builds the function through the given `(knot, value)` pairs.
    pub fn from_knot_values(knots: &[f64], values: &[f64]) -> Result<Self> {
        if knots.len() < 2 || knots.len() != values.len() {
            return Err(Error::InvalidUtility(
                "need matching knots and values, at least two".into(),
            ));
        }
        let slopes: Vec<f64> = knots
            .windows(2)
            .zip(values.windows(2))
            .map(|(k, v)| (v[1] - v[0]) / (k[1] - k[0]))
            .collect();
        let interior = &knots[1..knots.len() - 1];
        Self::new(
            (knots[0], *knots.last().unwrap()),
            interior,
            &slopes,
            (knots[0], values[0]),
        )
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.knots[0], *self.knots.last().unwrap())
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    fn clamp_to_domain(&self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if x < lo - DOMAIN_TOL || x > hi + DOMAIN_TOL {
            return Err(Error::Domain(format!(
                "{x} outside utility domain [{lo}, {hi}]"
            )));
        }
        Ok(x.clamp(lo, hi))
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        let x = self.clamp_to_domain(x)?;
        let i = segment_of(&self.knots, x);
        Ok(self.values[i] + self.slopes[i] * (x - self.knots[i]))
    }

    /// Slope immediately to the right of `x`; at the right endpoint, the
    /// last slope. Reports at a kink are resolved to the right branch.
    pub fn right_slope(&self, x: f64) -> Result<f64> {
        let x = self.clamp_to_domain(x)?;
        let last = self.knots.len() - 2;
        let i = if x >= self.knots[last] {
            last
        } else {
            segment_of(&self.knots, x)
        };
        Ok(self.slopes[i])
    }

    /// Slope immediately to the left of `x`; at the left endpoint, the
    /// first slope.
    pub fn left_slope(&self, x: f64) -> Result<f64> {
        let x = self.clamp_to_domain(x)?;
        if x <= self.knots[0] {
            return Ok(self.slopes[0]);
        }
        // segment with knots[i] < x ≤ knots[i+1]
        let mut i = segment_of(&self.knots, x);
        if x == self.knots[i] && i > 0 {
            i -= 1;
        }
        Ok(self.slopes[i])
    }

    /// The function `x ↦ u(x) + slope·x + offset` (an affine shift keeps
    /// convexity and, for distributions, the incentive objective).
    pub fn affine_plus(&self, slope: f64, offset: f64) -> Self {
        Self {
            knots: self.knots.clone(),
            values: self
                .values
                .iter()
                .zip(&self.knots)
                .map(|(v, k)| v + slope * k + offset)
                .collect(),
            slopes: self.slopes.iter().map(|s| s + slope).collect(),
        }
    }
}

/// Index of the segment containing `x` (prefers the segment starting at `x`
/// when `x` is a knot, except at the right endpoint).
fn segment_of(knots: &[f64], x: f64) -> usize {
    let nseg = knots.len() - 1;
    match knots.binary_search_by(|k| k.total_cmp(&x)) {
        Ok(i) => i.min(nseg - 1),
        Err(i) => i.saturating_sub(1).min(nseg - 1),
    }
}

/// A V-shaped utility: `u(r) = a·(r − μ)` left of the kink `μ` and
/// `u(r) = b·(r − μ)` right of it, with `a ≤ b` for convexity and
/// `u(μ) = 0` by construction. Defined on all of `ℝ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VShapedUtility {
    mu: f64,
    left: f64,
    right: f64,
}

impl VShapedUtility {
    pub fn new(mu: f64, left_slope: f64, right_slope: f64) -> Result<Self> {
        if !mu.is_finite() || !left_slope.is_finite() || !right_slope.is_finite() {
            return Err(Error::InvalidUtility("non-finite V-shape parameter".into()));
        }
        if right_slope < left_slope - CONVEXITY_TOL {
            return Err(Error::InvalidUtility(format!(
                "V-shape slopes must satisfy a ≤ b, got a={left_slope}, b={right_slope}"
            )));
        }
        Ok(Self {
            mu,
            left: left_slope,
            right: right_slope,
        })
    }

    /// Symmetric slopes `∓slope` around the kink.
    pub fn symmetric(mu: f64, slope: f64) -> Result<Self> {
        Self::new(mu, -slope, slope)
    }

    pub fn kink(&self) -> f64 {
        self.mu
    }

    pub fn left_slope(&self) -> f64 {
        self.left
    }

    pub fn right_slope(&self) -> f64 {
        self.right
    }

    pub fn value(&self, r: f64) -> f64 {
        if r < self.mu {
            self.left * (r - self.mu)
        } else {
            self.right * (r - self.mu)
        }
    }

    /// Subgradient with the right-branch convention at the kink.
    pub fn slope_at(&self, r: f64) -> f64 {
        if r < self.mu {
            self.left
        } else {
            self.right
        }
    }

    /// Restriction to `[lo, hi]` as a piecewise-linear function.
    pub fn to_piecewise(&self, lo: f64, hi: f64) -> Result<PiecewiseLinearConvexUtility> {
        if self.mu > lo && self.mu < hi {
            PiecewiseLinearConvexUtility::new(
                (lo, hi),
                &[self.mu],
                &[self.left, self.right],
                (self.mu, 0.0),
            )
        } else if self.mu <= lo {
            PiecewiseLinearConvexUtility::new((lo, hi), &[], &[self.right], (lo, self.value(lo)))
        } else {
            PiecewiseLinearConvexUtility::new((lo, hi), &[], &[self.left], (hi, self.value(hi)))
        }
    }
}

/// A maximum of affine functions `u(r) = maxᵢ (xᵢ·r − pᵢ)`, the utility
/// shape recovered from the scoring-rule linear program. Each stored report
/// pins the hyperplane that supports the utility there.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxAffineUtility {
    gradients: Vec<Vec<f64>>,
    offsets: Vec<f64>,
    reports: Vec<Point>,
}

impl MaxAffineUtility {
    pub fn new(gradients: Vec<Vec<f64>>, offsets: Vec<f64>, reports: Vec<Point>) -> Result<Self> {
        if gradients.is_empty() || gradients.len() != offsets.len() {
            return Err(Error::InvalidUtility("need one offset per gradient".into()));
        }
        let dim = gradients[0].len();
        if dim == 0 {
            return Err(Error::InvalidUtility("zero-dimensional gradient".into()));
        }
        for g in &gradients {
            if g.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: g.len(),
                });
            }
            if g.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidUtility("non-finite gradient".into()));
            }
        }
        for r in &reports {
            r.check_dim(dim)?;
        }
        Ok(Self {
            gradients,
            offsets,
            reports,
        })
    }

    pub fn dim(&self) -> usize {
        self.gradients[0].len()
    }

    pub fn num_planes(&self) -> usize {
        self.gradients.len()
    }

    pub fn reports(&self) -> &[Point] {
        &self.reports
    }

    fn plane_value(&self, i: usize, r: &[f64]) -> f64 {
        dot(&self.gradients[i], r) - self.offsets[i]
    }

    /// Index of the supporting hyperplane at `r`; ties go to the smallest
    /// index so the selection is deterministic.
    pub fn active_index(&self, r: &[f64]) -> usize {
        let mut best = 0;
        let mut best_val = self.plane_value(0, r);
        for i in 1..self.num_planes() {
            let v = self.plane_value(i, r);
            if v > best_val {
                best = i;
                best_val = v;
            }
        }
        best
    }

    pub fn value(&self, r: &[f64]) -> f64 {
        (0..self.num_planes())
            .map(|i| self.plane_value(i, r))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// One affine piece of a convex utility: the supporting function
/// `g(θ) = value + gradient·(θ − at)` selected when the report sits where
/// this piece is active.
#[derive(Debug, Clone)]
pub struct Branch {
    pub at: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
}

impl Branch {
    pub fn eval(&self, state: &Point) -> f64 {
        self.value
            + self
                .gradient
                .iter()
                .zip(state.coords())
                .zip(&self.at)
                .map(|((g, s), a)| g * (s - a))
                .sum::<f64>()
    }
}

/// The convex utilities this crate constructs, with a common evaluation and
/// subgradient interface.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexUtility {
    /// A 1-d piecewise-linear convex function on an interval.
    Piecewise(PiecewiseLinearConvexUtility),
    /// A 1-d V-shape.
    VShaped(VShapedUtility),
    /// `u(r) = r²` on the line (the quadratic scoring rule's utility).
    Quadratic,
    /// A maximum of affine functions in `ℝⁿ`.
    MaxAffine(MaxAffineUtility),
    /// `u(r) = maxᵢ ûᵢ(rᵢ)` for per-dimension V-shapes.
    MaxOverDims(Vec<VShapedUtility>),
    /// `u(r) = scale · Σᵢ ûᵢ(rᵢ)` for per-dimension V-shapes.
    ScaledSumOverDims {
        parts: Vec<VShapedUtility>,
        scale: f64,
    },
}

impl ConvexUtility {
    pub fn dim(&self) -> usize {
        match self {
            ConvexUtility::Piecewise(_) | ConvexUtility::VShaped(_) | ConvexUtility::Quadratic => 1,
            ConvexUtility::MaxAffine(m) => m.dim(),
            ConvexUtility::MaxOverDims(parts) => parts.len(),
            ConvexUtility::ScaledSumOverDims { parts, .. } => parts.len(),
        }
    }

    pub fn value(&self, r: &Point) -> Result<f64> {
        r.check_dim(self.dim())?;
        match self {
            ConvexUtility::Piecewise(p) => p.value(r[0]),
            ConvexUtility::VShaped(v) => Ok(v.value(r[0])),
            ConvexUtility::Quadratic => Ok(r[0] * r[0]),
            ConvexUtility::MaxAffine(m) => Ok(m.value(r.coords())),
            ConvexUtility::MaxOverDims(parts) => Ok(parts
                .iter()
                .enumerate()
                .map(|(i, v)| v.value(r[i]))
                .fold(f64::NEG_INFINITY, f64::max)),
            ConvexUtility::ScaledSumOverDims { parts, scale } => Ok(scale
                * parts
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v.value(r[i]))
                    .sum::<f64>()),
        }
    }

    /// A supporting subgradient `ξ(r)`, resolved deterministically: 1-d
    /// kinks take the right branch, maxima take the smallest maximizing
    /// index.
    pub fn subgradient(&self, r: &Point) -> Result<Vec<f64>> {
        r.check_dim(self.dim())?;
        match self {
            ConvexUtility::Piecewise(p) => Ok(vec![p.right_slope(r[0])?]),
            ConvexUtility::VShaped(v) => Ok(vec![v.slope_at(r[0])]),
            ConvexUtility::Quadratic => Ok(vec![2.0 * r[0]]),
            ConvexUtility::MaxAffine(m) => Ok(m.gradients[m.active_index(r.coords())].clone()),
            ConvexUtility::MaxOverDims(parts) => {
                let i = argmax_dim(parts, r);
                let mut g = vec![0.0; parts.len()];
                g[i] = parts[i].slope_at(r[i]);
                Ok(g)
            }
            ConvexUtility::ScaledSumOverDims { parts, scale } => Ok(parts
                .iter()
                .enumerate()
                .map(|(i, v)| scale * v.slope_at(r[i]))
                .collect()),
        }
    }

    /// The affine pieces the subgradient selection can produce, when they
    /// are finitely enumerable. `None` for smooth or product-form utilities;
    /// callers then fall back to evaluating at explicit reports.
    pub fn branches(&self) -> Option<Vec<Branch>> {
        match self {
            ConvexUtility::Piecewise(p) => Some(
                (0..p.slopes.len())
                    .map(|i| Branch {
                        at: vec![p.knots[i]],
                        value: p.values[i],
                        gradient: vec![p.slopes[i]],
                    })
                    .collect(),
            ),
            ConvexUtility::VShaped(v) => Some(vec![
                Branch {
                    at: vec![v.mu],
                    value: 0.0,
                    gradient: vec![v.left],
                },
                Branch {
                    at: vec![v.mu],
                    value: 0.0,
                    gradient: vec![v.right],
                },
            ]),
            ConvexUtility::Quadratic => None,
            ConvexUtility::MaxAffine(m) => Some(
                m.reports
                    .iter()
                    .map(|rep| {
                        let i = m.active_index(rep.coords());
                        Branch {
                            at: rep.coords().to_vec(),
                            value: m.plane_value(i, rep.coords()),
                            gradient: m.gradients[i].clone(),
                        }
                    })
                    .collect(),
            ),
            ConvexUtility::MaxOverDims(parts) => {
                let centers: Vec<f64> = parts.iter().map(|v| v.mu).collect();
                let mut out = Vec::with_capacity(2 * parts.len());
                for (i, v) in parts.iter().enumerate() {
                    for slope in [v.left, v.right] {
                        let mut gradient = vec![0.0; parts.len()];
                        gradient[i] = slope;
                        out.push(Branch {
                            at: centers.clone(),
                            value: 0.0,
                            gradient,
                        });
                    }
                }
                Some(out)
            }
            ConvexUtility::ScaledSumOverDims { .. } => None,
        }
    }

    /// Left and right derivatives of a 1-d utility at `x`.
    pub fn derivative_range(&self, x: f64) -> Result<(f64, f64)> {
        match self {
            ConvexUtility::Piecewise(p) => Ok((p.left_slope(x)?, p.right_slope(x)?)),
            ConvexUtility::VShaped(v) => {
                if x < v.mu {
                    Ok((v.left, v.left))
                } else if x > v.mu {
                    Ok((v.right, v.right))
                } else {
                    Ok((v.left, v.right))
                }
            }
            ConvexUtility::Quadratic => Ok((2.0 * x, 2.0 * x)),
            ConvexUtility::MaxAffine(m) if m.dim() == 1 => {
                let max = m.value(&[x]);
                let scale = 1.0 + max.abs();
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for i in 0..m.num_planes() {
                    if (m.plane_value(i, &[x]) - max).abs() <= 1e-12 * scale {
                        lo = lo.min(m.gradients[i][0]);
                        hi = hi.max(m.gradients[i][0]);
                    }
                }
                Ok((lo, hi))
            }
            ConvexUtility::MaxOverDims(parts) | ConvexUtility::ScaledSumOverDims { parts, .. }
                if parts.len() == 1 =>
            {
                ConvexUtility::VShaped(parts[0]).derivative_range(x)
            }
            _ => Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim(),
            }),
        }
    }
}

/// Picks the dimension with maximal per-dimension utility; ties resolve to
/// the smallest index.
pub(crate) fn argmax_dim(parts: &[VShapedUtility], r: &Point) -> usize {
    let mut best = 0;
    let mut best_val = parts[0].value(r[0]);
    for (i, v) in parts.iter().enumerate().skip(1) {
        let val = v.value(r[i]);
        if val > best_val {
            best = i;
            best_val = val;
        }
    }
    best
}

/// The incentive objective `Obj(u, f) = Σᵢ pᵢ·u(rᵢ) − u(μ_f)`: the expected
/// score gain of a forecaster whose posterior mean is distributed as `f`
/// over one who reports the prior mean.
pub fn objective(utility: &ConvexUtility, dist: &FiniteDistribution) -> Result<f64> {
    if dist.dim() != utility.dim() {
        return Err(Error::DimensionMismatch {
            expected: utility.dim(),
            got: dist.dim(),
        });
    }
    let mut acc = CompensatedSum::new();
    for (point, prob) in dist.iter() {
        acc.add(prob * utility.value(point)?);
    }
    Ok(acc.value() - utility.value(&dist.mean())?)
}
