//! Finite-support distributions over posterior means.
//!
//! The optimizers in this crate never need full posterior beliefs: the
//! incentive objective `E[u(r)] − u(μ)` depends on the distribution of
//! posterior *means* alone. [`FiniteDistribution`] is that object — a list
//! of distinct support points with probabilities.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, Rect};
use crate::num::CompensatedSum;
use crate::PROB_TOL;

/// A finitely supported probability distribution over points in `ℝⁿ`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDistribution {
    support: Vec<Point>,
    probs: Vec<f64>,
    dim: usize,
}

impl FiniteDistribution {
    /// Builds a distribution, validating that probabilities are nonnegative
    /// and sum to one within `PROB_TOL`, that all points share a dimension,
    /// and that support points are pairwise distinct.
    pub fn new(support: Vec<Point>, probs: Vec<f64>) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if support.len() != probs.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} support points but {} probabilities",
                support.len(),
                probs.len()
            )));
        }
        let dim = support[0].dim();
        for p in &support {
            p.check_dim(dim)?;
        }
        let mut total = CompensatedSum::new();
        for &p in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::InvalidDistribution(format!("bad probability {p}")));
            }
            total.add(p);
        }
        let total = total.value();
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}, off by {:.3e}",
                total - 1.0
            )));
        }
        // sort-based duplicate detection; supports can be large
        let mut order: Vec<usize> = (0..support.len()).collect();
        order.sort_unstable_by(|&a, &b| {
            support[a]
                .coords()
                .iter()
                .zip(support[b].coords())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        for w in order.windows(2) {
            if support[w[0]] == support[w[1]] {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate support point {:?}",
                    support[w[0]].coords()
                )));
            }
        }
        Ok(Self {
            support,
            probs,
            dim,
        })
    }

    /// A 1-d distribution from scalar support values.
    pub fn new_scalar(values: &[f64], probs: &[f64]) -> Result<Self> {
        let support = values
            .iter()
            .map(|&v| Point::new(vec![v]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(support, probs.to_vec())
    }

    /// All mass on a single point.
    pub fn point_mass(p: Point) -> Self {
        let dim = p.dim();
        Self {
            support: vec![p],
            probs: vec![1.0],
            dim,
        }
    }

    /// Uniform over the given (distinct) points.
    pub fn uniform(support: Vec<Point>) -> Result<Self> {
        let n = support.len();
        let probs = exact_probability_normalize(vec![1.0; n]);
        Self::new(support, probs)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        false // the constructor rejects empty supports
    }

    pub fn support(&self) -> &[Point] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Point, f64)> {
        self.support.iter().zip(self.probs.iter().copied())
    }

    /// The probability-weighted mean `μ_f`.
    pub fn mean(&self) -> Point {
        let mut acc = vec![CompensatedSum::new(); self.dim];
        for (point, prob) in self.iter() {
            for (i, &c) in point.coords().iter().enumerate() {
                acc[i].add(prob * c);
            }
        }
        Point::new(acc.into_iter().map(|a| a.value()).collect())
            .expect("mean of finite points is finite")
    }

    /// Support values of a 1-d distribution as scalars.
    pub fn scalar_support(&self) -> Result<Vec<f64>> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.dim,
            });
        }
        Ok(self.support.iter().map(|p| p[0]).collect())
    }

    pub fn scalar_mean(&self) -> Result<f64> {
        self.mean().as_scalar()
    }

    /// Variance of a 1-d distribution.
    pub fn variance(&self) -> Result<f64> {
        let mu = self.scalar_mean()?;
        let mut acc = CompensatedSum::new();
        for (point, prob) in self.iter() {
            acc.add(prob * (point[0] - mu).powi(2));
        }
        Ok(acc.value())
    }

    pub fn is_point_mass(&self) -> bool {
        self.support.len() == 1
    }

    /// Whether every support point lies inside `rect` (within `tol`).
    pub fn within(&self, rect: &Rect, tol: f64) -> bool {
        self.support.iter().all(|p| rect.contains(p, tol))
    }

    /// Draws one support point according to the probabilities.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &Point {
        let u: f64 = rng.random();
        let mut cum = 0.0;
        for (point, prob) in self.iter() {
            cum += prob;
            if u < cum {
                return point;
            }
        }
        self.support.last().expect("non-empty support")
    }
}

/// Compensated sum of a probability vector.
pub fn probability_sum(probs: &[f64]) -> f64 {
    crate::num::sum_compensated(probs.iter().copied())
}

/// Scales raw nonnegative weights to probabilities summing to one, then
/// pushes any residual rounding into the largest entry so the compensated
/// sum is exact.
pub fn exact_probability_normalize(weights: Vec<f64>) -> Vec<f64> {
    let total: f64 = crate::num::sum_compensated(weights.iter().copied());
    assert!(total > 0.0, "weights must have positive total");
    let mut probs: Vec<f64> = weights.into_iter().map(|w| w / total).collect();
    let sum = crate::num::sum_compensated(probs.iter().copied());
    let residual = 1.0 - sum;
    let argmax = probs
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    probs[argmax] += residual;
    probs
}

/// Collapses a 1-d distribution to at most two point masses placed at the
/// conditional means below and above the prior mean:
/// `{E[r | r < μ] w.p. P(r < μ);  E[r | r ≥ μ] w.p. P(r ≥ μ)}`.
///
/// The mean and the optimal objective value are preserved, and the objective
/// of every convex utility weakly decreases (Jensen). A distribution with all
/// mass on one side collapses to a single point mass.
pub fn two_point_reduction(dist: &FiniteDistribution) -> Result<FiniteDistribution> {
    if dist.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: dist.dim(),
        });
    }
    let mu = dist.scalar_mean()?;
    let (mut mass_lo, mut mass_hi) = (CompensatedSum::new(), CompensatedSum::new());
    let (mut sum_lo, mut sum_hi) = (CompensatedSum::new(), CompensatedSum::new());
    for (point, prob) in dist.iter() {
        let r = point[0];
        if r < mu {
            mass_lo.add(prob);
            sum_lo.add(prob * r);
        } else {
            mass_hi.add(prob);
            sum_hi.add(prob * r);
        }
    }
    let (mass_lo, mass_hi) = (mass_lo.value(), mass_hi.value());
    if mass_lo <= 0.0 {
        return Ok(FiniteDistribution::point_mass(Point::scalar(mu)));
    }
    if mass_hi <= 0.0 {
        // cannot happen for a real mean, kept for numerical safety
        return Ok(FiniteDistribution::point_mass(Point::scalar(mu)));
    }
    let lo = sum_lo.value() / mass_lo;
    let hi = sum_hi.value() / mass_hi;
    FiniteDistribution::new_scalar(
        &[lo, hi],
        &exact_probability_normalize(vec![mass_lo, mass_hi]),
    )
}
