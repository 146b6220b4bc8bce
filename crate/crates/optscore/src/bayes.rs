//! From signal structures to distributions over posterior means.
//!
//! A forecaster who exerts effort observes a signal about the true state
//! and updates a discrete prior by Bayes' rule. All the optimizers need
//! from that process is the induced distribution of posterior means, which
//! [`posterior_mean_distribution`] computes signal by signal.

use crate::dist::FiniteDistribution;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::num::CompensatedSum;
use crate::PROB_TOL;

/// Posterior means closer than this (in `‖·‖∞`) are merged into one
/// support point.
const MERGE_TOL: f64 = 1e-9;

/// A discrete prior over states together with a finite signal channel
/// `P(signal | state)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalModel {
    states: Vec<Point>,
    prior: Vec<f64>,
    likelihood: Vec<Vec<f64>>, // row per state, column per signal
}

impl SignalModel {
    /// Validates that the prior and every likelihood row are probability
    /// vectors (within `PROB_TOL`).
    pub fn new(states: Vec<Point>, prior: Vec<f64>, likelihood: Vec<Vec<f64>>) -> Result<Self> {
        if states.is_empty() {
            return Err(Error::InvalidDistribution(
                "signal model needs at least one state".into(),
            ));
        }
        if prior.len() != states.len() || likelihood.len() != states.len() {
            return Err(Error::InvalidDistribution(
                "prior and likelihood must have one entry per state".into(),
            ));
        }
        let dim = states[0].dim();
        for s in &states {
            s.check_dim(dim)?;
        }
        check_probability_vector(&prior, "prior")?;
        let num_signals = likelihood[0].len();
        if num_signals == 0 {
            return Err(Error::InvalidDistribution(
                "likelihood needs at least one signal".into(),
            ));
        }
        for (i, row) in likelihood.iter().enumerate() {
            if row.len() != num_signals {
                return Err(Error::InvalidDistribution(format!(
                    "likelihood row {i} has {} signals, expected {num_signals}",
                    row.len()
                )));
            }
            check_probability_vector(row, &format!("likelihood row {i}"))?;
        }
        Ok(Self {
            states,
            prior,
            likelihood,
        })
    }

    /// A 1-d model over scalar states.
    pub fn new_scalar(states: &[f64], prior: Vec<f64>, likelihood: Vec<Vec<f64>>) -> Result<Self> {
        let pts = states
            .iter()
            .map(|&s| Point::new(vec![s]))
            .collect::<Result<Vec<_>>>()?;
        Self::new(pts, prior, likelihood)
    }

    pub fn states(&self) -> &[Point] {
        &self.states
    }

    pub fn prior(&self) -> &[f64] {
        &self.prior
    }

    pub fn likelihood(&self) -> &[Vec<f64>] {
        &self.likelihood
    }

    pub fn num_signals(&self) -> usize {
        self.likelihood[0].len()
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    /// The prior mean `E[θ]`.
    pub fn prior_mean(&self) -> Point {
        let dim = self.dim();
        let mut acc = vec![CompensatedSum::new(); dim];
        for (state, &p) in self.states.iter().zip(&self.prior) {
            for (i, &c) in state.coords().iter().enumerate() {
                acc[i].add(p * c);
            }
        }
        Point::new(acc.into_iter().map(|a| a.value()).collect()).expect("finite mean")
    }

    /// Expectation of an arbitrary state function under the prior.
    pub fn prior_expectation(&self, f: impl Fn(&Point) -> f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for (state, &p) in self.states.iter().zip(&self.prior) {
            acc.add(p * f(state));
        }
        acc.value()
    }
}

fn check_probability_vector(v: &[f64], what: &str) -> Result<()> {
    let mut total = CompensatedSum::new();
    for &p in v {
        if !p.is_finite() || p < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "{what}: bad probability {p}"
            )));
        }
        total.add(p);
    }
    let total = total.value();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidDistribution(format!(
            "{what}: sums to {total}, off by {:.3e}",
            total - 1.0
        )));
    }
    Ok(())
}

/// For each signal `s` with positive marginal probability, emits the
/// posterior mean `E[θ | s]` with weight `P(s)`. Signals with zero marginal
/// probability are dropped; posterior means within `1e−9` of each other are
/// merged by summing their probabilities.
///
/// The mean of the result equals the prior mean (Bayesian plausibility).
pub fn posterior_mean_distribution(model: &SignalModel) -> Result<FiniteDistribution> {
    let dim = model.dim();
    let mut points: Vec<Point> = Vec::new();
    let mut probs: Vec<f64> = Vec::new();

    for s in 0..model.num_signals() {
        // accumulate P(s) and Σ_θ P(θ)·P(s|θ)·θ
        let mut marginal = CompensatedSum::new();
        let mut weighted = vec![CompensatedSum::new(); dim];
        for (idx, (state, &p)) in model.states.iter().zip(&model.prior).enumerate() {
            let w = p * model.likelihood[idx][s];
            marginal.add(w);
            for (i, &c) in state.coords().iter().enumerate() {
                weighted[i].add(w * c);
            }
        }
        let marginal = marginal.value();
        if marginal <= 0.0 {
            continue;
        }
        let mean = Point::new(weighted.into_iter().map(|a| a.value() / marginal).collect())?;
        match points
            .iter()
            .position(|p| p.linf_distance(&mean) <= MERGE_TOL)
        {
            Some(i) => probs[i] += marginal,
            None => {
                points.push(mean);
                probs.push(marginal);
            }
        }
    }
    if points.is_empty() {
        return Err(Error::InvalidDistribution(
            "all signals have zero probability".into(),
        ));
    }
    FiniteDistribution::new(points, probs)
}
