//! Points and rectangular report/state spaces.

use crate::error::{Error, Result};

/// A point in `ℝⁿ`: a report, a posterior mean, or a realized state.
#[derive(Debug, Clone, PartialEq)]
pub struct Point(Vec<f64>);

impl Point {
    /// A point from raw coordinates. Requires at least one finite coordinate.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("point needs at least one coordinate".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite coordinate in {coords:?}"
            )));
        }
        Ok(Self(coords))
    }

    /// A one-dimensional point.
    pub fn scalar(x: f64) -> Self {
        assert!(x.is_finite(), "scalar point must be finite");
        Self(vec![x])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    /// The single coordinate of a 1-d point.
    pub fn as_scalar(&self) -> Result<f64> {
        if self.0.len() != 1 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: self.0.len(),
            });
        }
        Ok(self.0[0])
    }

    pub fn dot(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// `‖self − other‖∞`.
    pub fn linf_distance(&self, other: &Point) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_dim(&self, expected: usize) -> Result<()> {
        if self.dim() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                got: self.dim(),
            });
        }
        Ok(())
    }
}

impl std::ops::Index<usize> for Point {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Vec<f64> {
        p.0
    }
}

/// An axis-aligned rectangle `⨂ᵢ [aᵢ, bᵢ]` serving as report and state space.
#[derive(Debug, Clone, PartialEq)]
pub struct Rect {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl Rect {
    /// Requires `aᵢ < bᵢ` in every dimension.
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::Domain(
                "bounds must be non-empty and of equal length".into(),
            ));
        }
        for (i, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !a.is_finite() || !b.is_finite() || a >= b {
                return Err(Error::Domain(format!(
                    "dimension {i}: need finite lower < upper, got [{a}, {b}]"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The unit cube `[0,1]ⁿ`.
    pub fn unit(dim: usize) -> Self {
        assert!(dim >= 1);
        Self {
            lower: vec![0.0; dim],
            upper: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn midpoint(&self) -> Point {
        Point(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
    }

    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        p.dim() == self.dim()
            && p.coords()
                .iter()
                .enumerate()
                .all(|(i, &c)| c >= self.lower[i] - tol && c <= self.upper[i] + tol)
    }

    pub fn strictly_contains(&self, p: &Point) -> bool {
        p.dim() == self.dim()
            && p.coords()
                .iter()
                .enumerate()
                .all(|(i, &c)| c > self.lower[i] && c < self.upper[i])
    }

    /// The `2ⁿ` corner points, in lexicographic (low-before-high) order.
    pub fn corners(&self) -> Vec<Point> {
        let n = self.dim();
        let mut out = Vec::with_capacity(1 << n);
        for mask in 0..(1usize << n) {
            let coords = (0..n)
                .map(|i| {
                    if mask >> i & 1 == 1 {
                        self.upper[i]
                    } else {
                        self.lower[i]
                    }
                })
                .collect();
            out.push(Point(coords));
        }
        out
    }

    /// An evenly spaced grid with `points_per_dim` points along each axis.
    pub fn grid(&self, points_per_dim: usize) -> Vec<Point> {
        assert!(points_per_dim >= 2);
        let n = self.dim();
        let mut out = Vec::with_capacity(points_per_dim.pow(n as u32));
        let mut idx = vec![0usize; n];
        loop {
            let coords = (0..n)
                .map(|i| {
                    let t = idx[i] as f64 / (points_per_dim - 1) as f64;
                    self.lower[i] + t * self.width(i)
                })
                .collect();
            out.push(Point(coords));
            let mut k = 0;
            loop {
                idx[k] += 1;
                if idx[k] < points_per_dim {
                    break;
                }
                idx[k] = 0;
                k += 1;
                if k == n {
                    return out;
                }
            }
        }
    }
}
