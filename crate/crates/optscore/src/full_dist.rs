//! Eliciting the full posterior distribution over a finite state space.
//!
//! Writing each of `d` states as its indicator vector in `ℝᵈ` turns a
//! reported distribution into a reported mean: the simplex is the convex
//! hull of the indicators, and a posterior's probability vector *is* its
//! mean in that encoding. Optimal full-distribution elicitation therefore
//! reduces to multi-dimensional mean elicitation ([`to_mean_instance`]),
//! and the same linear program solves it ([`optimal_full_dist`]).
//!
//! The reverse does not hold: [`mean_vs_full_gap`] builds a four-state
//! family where eliciting the scalar mean earns `(3/2)ε − ε²` while a rule
//! on the full distribution earns `1/2`, an unbounded ratio as `ε → 0`.

use crate::dist::FiniteDistribution;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::multi_dim::{lp_optimal, LpScoringSolution, MeanElicitInstance};
use crate::num::CompensatedSum;
use crate::PROB_TOL;

/// A distribution over posteriors on a finite, abstractly labeled state
/// space: posterior `j` is a probability vector over the states and occurs
/// with probability `probs[j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FullDistInstance {
    states: Vec<String>,
    posteriors: Vec<Vec<f64>>,
    probs: Vec<f64>,
}

impl FullDistInstance {
    pub fn new(states: Vec<String>, posteriors: Vec<Vec<f64>>, probs: Vec<f64>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::Instance("need at least one state".into()));
        }
        if posteriors.is_empty() || posteriors.len() != probs.len() {
            return Err(Error::Instance("need one probability per posterior".into()));
        }
        for (j, post) in posteriors.iter().enumerate() {
            if post.len() != states.len() {
                return Err(Error::Instance(format!(
                    "posterior {j} has {} entries for {} states",
                    post.len(),
                    states.len()
                )));
            }
            let mut total = CompensatedSum::new();
            for &p in post {
                if !p.is_finite() || p < 0.0 {
                    return Err(Error::Instance(format!(
                        "posterior {j}: bad probability {p}"
                    )));
                }
                total.add(p);
            }
            if (total.value() - 1.0).abs() > PROB_TOL {
                return Err(Error::Instance(format!(
                    "posterior {j} sums to {}, not 1",
                    total.value()
                )));
            }
        }
        let mut total = CompensatedSum::new();
        for &p in &probs {
            if !p.is_finite() || p < 0.0 {
                return Err(Error::Instance(format!("bad posterior probability {p}")));
            }
            total.add(p);
        }
        if (total.value() - 1.0).abs() > PROB_TOL {
            return Err(Error::Instance(format!(
                "posterior probabilities sum to {}, not 1",
                total.value()
            )));
        }
        Ok(Self {
            states,
            posteriors,
            probs,
        })
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn posteriors(&self) -> &[Vec<f64>] {
        &self.posteriors
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }
}

/// Encodes the instance for mean elicitation: states become the `d`
/// standard indicator vectors of `ℝᵈ`, posteriors become posterior-mean
/// points, probabilities carry over.
pub fn to_mean_instance(inst: &FullDistInstance, bound: f64) -> Result<MeanElicitInstance> {
    let d = inst.num_states();
    let states = (0..d)
        .map(|j| {
            let mut coords = vec![0.0; d];
            coords[j] = 1.0;
            Point::new(coords)
        })
        .collect::<Result<Vec<_>>>()?;
    let support = inst
        .posteriors
        .iter()
        .map(|p| Point::new(p.clone()))
        .collect::<Result<Vec<_>>>()?;
    let means = FiniteDistribution::new(support, inst.probs.clone())?;
    MeanElicitInstance::new(states, means, bound)
}

/// The optimal bounded proper scoring rule for eliciting the full
/// distribution: the mean-elicitation optimum on the indicator encoding.
pub fn optimal_full_dist(inst: &FullDistInstance, bound: f64) -> Result<LpScoringSolution> {
    lp_optimal(&to_mean_instance(inst, bound)?)
}

/// The two sides of the mean-versus-full-distribution comparison on the
/// gap family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanVsFullGap {
    /// Exact optimum for eliciting the scalar mean: `(3/2)ε − ε²`.
    pub mean_opt: f64,
    /// Objective of the high/low indicator rule on the full distribution.
    pub full_opt_lower: f64,
}

fn check_gap_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 0.5) {
        return Err(Error::Domain(format!("epsilon {epsilon} outside (0, 1/2]")));
    }
    Ok(())
}

/// The four-state gap family: states `{0, 1/2−ε, 1/2+ε, 1}` with point-mass
/// posteriors at the extremes w.p. `ε/2` each and at the inner pair w.p.
/// `(1−ε)/2` each.
pub fn gap_instance(epsilon: f64) -> Result<FullDistInstance> {
    check_gap_epsilon(epsilon)?;
    let labels = vec![
        "0".to_string(),
        format!("{}", 0.5 - epsilon),
        format!("{}", 0.5 + epsilon),
        "1".to_string(),
    ];
    let posteriors = (0..4)
        .map(|j| {
            let mut v = vec![0.0; 4];
            v[j] = 1.0;
            v
        })
        .collect();
    let probs = vec![
        epsilon / 2.0,
        (1.0 - epsilon) / 2.0,
        (1.0 - epsilon) / 2.0,
        epsilon / 2.0,
    ];
    FullDistInstance::new(labels, posteriors, probs)
}

/// The gap family's distribution of scalar posterior means. At `ε = 1/2`
/// the inner pair coincides with the extremes and the masses merge.
pub fn gap_mean_distribution(epsilon: f64) -> Result<FiniteDistribution> {
    check_gap_epsilon(epsilon)?;
    let values = [0.0, 0.5 - epsilon, 0.5 + epsilon, 1.0];
    let weights = [
        epsilon / 2.0,
        (1.0 - epsilon) / 2.0,
        (1.0 - epsilon) / 2.0,
        epsilon / 2.0,
    ];
    let mut support: Vec<f64> = Vec::with_capacity(4);
    let mut probs: Vec<f64> = Vec::with_capacity(4);
    for (v, w) in values.into_iter().zip(weights) {
        match support.iter().position(|&s| s == v) {
            Some(i) => probs[i] += w,
            None => {
                support.push(v);
                probs.push(w);
            }
        }
    }
    FiniteDistribution::new_scalar(&support, &probs)
}

/// Mean-elicitation optimum versus the full-distribution lower bound on the
/// gap family. The ratio `full/mean` grows without bound as `ε → 0`.
pub fn mean_vs_full_gap(epsilon: f64) -> Result<MeanVsFullGap> {
    check_gap_epsilon(epsilon)?;
    Ok(MeanVsFullGap {
        mean_opt: 1.5 * epsilon - epsilon * epsilon,
        full_opt_lower: 0.5,
    })
}
