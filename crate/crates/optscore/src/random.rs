//! Seeded random generators for instances, distributions, and utilities.
//!
//! Used by the property suites and the experiment commands: supports drawn
//! uniformly in a box, probabilities from normalized uniform draws, states
//! at the box corners so means stay inside the hull by construction.

use rand::Rng;

use crate::dist::{exact_probability_normalize, FiniteDistribution};
use crate::geometry::{Point, Rect};
use crate::multi_dim::MeanElicitInstance;
use crate::utility::{PiecewiseLinearConvexUtility, VShapedUtility};

/// A random distribution with `support_size` distinct points in `rect`.
pub fn random_distribution<R: Rng + ?Sized>(
    rng: &mut R,
    rect: &Rect,
    support_size: usize,
) -> FiniteDistribution {
    assert!(support_size >= 1);
    let n = rect.dim();
    let mut support: Vec<Point> = Vec::with_capacity(support_size);
    while support.len() < support_size {
        let coords: Vec<f64> = (0..n)
            .map(|i| rect.lower()[i] + rng.random::<f64>() * rect.width(i))
            .collect();
        let p = Point::new(coords).expect("finite draws");
        if !support.contains(&p) {
            support.push(p);
        }
    }
    let weights: Vec<f64> = (0..support_size)
        .map(|_| rng.random::<f64>() + 1e-9)
        .collect();
    FiniteDistribution::new(support, exact_probability_normalize(weights))
        .expect("distinct support and normalized probabilities")
}

/// A random 1-d distribution on `[0, 1]`.
pub fn random_distribution_1d<R: Rng + ?Sized>(
    rng: &mut R,
    support_size: usize,
) -> FiniteDistribution {
    random_distribution(rng, &Rect::unit(1), support_size)
}

/// A random center-symmetric distribution on `rect`: each sampled point is
/// paired with its reflection through the midpoint at equal probability.
pub fn random_center_symmetric<R: Rng + ?Sized>(
    rng: &mut R,
    rect: &Rect,
    pairs: usize,
) -> FiniteDistribution {
    assert!(pairs >= 1);
    let n = rect.dim();
    let mid = rect.midpoint();
    let mut support: Vec<Point> = Vec::with_capacity(2 * pairs);
    let mut weights: Vec<f64> = Vec::with_capacity(2 * pairs);
    while support.len() < 2 * pairs {
        let coords: Vec<f64> = (0..n)
            .map(|i| rect.lower()[i] + rng.random::<f64>() * rect.width(i))
            .collect();
        let p = Point::new(coords).expect("finite draws");
        let reflected = Point::new((0..n).map(|i| 2.0 * mid[i] - p[i]).collect())
            .expect("reflection stays finite");
        if p == reflected || support.contains(&p) || support.contains(&reflected) {
            continue;
        }
        let w = rng.random::<f64>() + 1e-9;
        support.push(p);
        weights.push(w);
        support.push(reflected);
        weights.push(w);
    }
    FiniteDistribution::new(support, exact_probability_normalize(weights))
        .expect("paired support is distinct")
}

/// A random mean-elicitation instance on the unit box with corner states.
pub fn random_mean_instance<R: Rng + ?Sized>(
    rng: &mut R,
    dim: usize,
    support_size: usize,
    bound: f64,
) -> MeanElicitInstance {
    let rect = Rect::unit(dim);
    let means = random_distribution(rng, &rect, support_size);
    MeanElicitInstance::new(rect.corners(), means, bound).expect("corner states contain the box")
}

/// A random convex piecewise-linear utility on `[0, 1]` whose derivative
/// spans at most `max_derivative_span` (a span of 2 keeps the induced rule
/// boundable by 1).
pub fn random_convex_piecewise<R: Rng + ?Sized>(
    rng: &mut R,
    segments: usize,
    max_derivative_span: f64,
) -> PiecewiseLinearConvexUtility {
    assert!(segments >= 1);
    let mut breakpoints: Vec<f64> = (0..segments - 1)
        .map(|_| 0.05 + 0.9 * rng.random::<f64>())
        .collect();
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let first = -0.5 * max_derivative_span * rng.random::<f64>();
    let mut slopes = vec![first];
    for _ in 0..breakpoints.len() {
        let prev = *slopes.last().unwrap();
        let room = first + max_derivative_span - prev;
        slopes.push(prev + room * rng.random::<f64>());
    }
    let anchor = (rng.random::<f64>(), 0.0);
    PiecewiseLinearConvexUtility::new((0.0, 1.0), &breakpoints, &slopes, anchor)
        .expect("slopes are nondecreasing by construction")
}

/// A random V-shape on `[0, 1]` with derivative span at most 2, so that a
/// unit score bound is attainable.
pub fn random_bounded_v_shape<R: Rng + ?Sized>(rng: &mut R) -> VShapedUtility {
    let mu = 0.05 + 0.9 * rng.random::<f64>();
    let gap = 2.0 * rng.random::<f64>();
    let a = -gap * rng.random::<f64>();
    VShapedUtility::new(mu, a, a + gap).expect("gap is nonnegative")
}
