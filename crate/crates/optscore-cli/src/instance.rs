//! Instance files: the JSON schemas accepted on the command line and their
//! conversion into library types.
//!
//! Probability vectors are accepted as-is when they sum to one within
//! `1e−12`, renormalized with a warning when off by at most `1e−9`, and
//! rejected beyond that.

use std::path::Path;

use serde::{Deserialize, Serialize};

use optscore::bayes::SignalModel;
use optscore::dist::{exact_probability_normalize, probability_sum};
use optscore::full_dist::FullDistInstance;
use optscore::multi_dim::MeanElicitInstance;
use optscore::{FiniteDistribution, Point};

use crate::CliError;

const ACCEPT_TOL: f64 = 1e-9;
const EXACT_TOL: f64 = 1e-12;

fn default_bound() -> f64 {
    1.0
}

/// A point of the posterior-mean distribution with its probability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedPoint {
    pub point: Vec<f64>,
    pub prob: f64,
}

/// A posterior over the abstract states with its probability.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightedVector {
    pub vector: Vec<f64>,
    pub prob: f64,
}

/// State grid of a signal model: scalars or full points.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaGrid {
    Scalars(Vec<f64>),
    Points(Vec<Vec<f64>>),
}

/// The on-disk instance document, discriminated by `"kind"`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceFile {
    Mean {
        dim: usize,
        states: Vec<Vec<f64>>,
        means: Vec<WeightedPoint>,
        #[serde(default = "default_bound")]
        bound: f64,
    },
    FullDist {
        states: Vec<String>,
        posteriors: Vec<WeightedVector>,
    },
    SignalModel {
        theta_grid: ThetaGrid,
        prior: Vec<f64>,
        likelihood: Vec<Vec<f64>>,
    },
}

/// A loaded, validated instance.
#[derive(Debug, Clone)]
pub enum Instance {
    Mean(MeanElicitInstance),
    FullDist(FullDistInstance),
    SignalModel(SignalModel),
}

impl InstanceFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::schema(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::schema(format!("{}: {e}", path.display())))
    }

    /// Validates probabilities and builds the library-side instance.
    /// `bound_override` comes from `--bound` and wins over the file.
    pub fn into_instance(self, bound_override: Option<f64>) -> Result<Instance, CliError> {
        match self {
            InstanceFile::Mean {
                dim,
                states,
                means,
                bound,
            } => {
                if states.iter().any(|s| s.len() != dim) {
                    return Err(CliError::schema(format!(
                        "field states: every state needs {dim} coordinates"
                    )));
                }
                if means.iter().any(|m| m.point.len() != dim) {
                    return Err(CliError::schema(format!(
                        "field means: every point needs {dim} coordinates"
                    )));
                }
                let support = means
                    .iter()
                    .map(|m| Point::new(m.point.clone()))
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::schema(format!("field means: {e}")))?;
                let probs = accept_probabilities(
                    means.iter().map(|m| m.prob).collect(),
                    "means probabilities",
                )?;
                let dist = FiniteDistribution::new(support, probs)
                    .map_err(|e| CliError::schema(format!("field means: {e}")))?;
                let state_points = states
                    .into_iter()
                    .map(Point::new)
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| CliError::schema(format!("field states: {e}")))?;
                let bound = bound_override.unwrap_or(bound);
                let inst = MeanElicitInstance::new(state_points, dist, bound)
                    .map_err(CliError::infeasible)?;
                Ok(Instance::Mean(inst))
            }
            InstanceFile::FullDist { states, posteriors } => {
                let vectors = posteriors
                    .iter()
                    .map(|p| accept_probabilities(p.vector.clone(), "posterior vector"))
                    .collect::<Result<Vec<_>, _>>()?;
                let probs = accept_probabilities(
                    posteriors.iter().map(|p| p.prob).collect(),
                    "posterior probabilities",
                )?;
                let inst = FullDistInstance::new(states, vectors, probs)
                    .map_err(|e| CliError::schema(format!("field posteriors: {e}")))?;
                Ok(Instance::FullDist(inst))
            }
            InstanceFile::SignalModel {
                theta_grid,
                prior,
                likelihood,
            } => {
                let states: Vec<Point> = match theta_grid {
                    ThetaGrid::Scalars(v) => v
                        .into_iter()
                        .map(|x| Point::new(vec![x]))
                        .collect::<Result<_, _>>(),
                    ThetaGrid::Points(v) => v.into_iter().map(Point::new).collect::<Result<_, _>>(),
                }
                .map_err(|e| CliError::schema(format!("field theta_grid: {e}")))?;
                let prior = accept_probabilities(prior, "prior")?;
                let likelihood = likelihood
                    .into_iter()
                    .enumerate()
                    .map(|(i, row)| accept_probabilities(row, &format!("likelihood row {i}")))
                    .collect::<Result<Vec<_>, _>>()?;
                let model = SignalModel::new(states, prior, likelihood)
                    .map_err(|e| CliError::schema(format!("field likelihood: {e}")))?;
                Ok(Instance::SignalModel(model))
            }
        }
    }
}

/// The acceptance policy for probability vectors.
fn accept_probabilities(probs: Vec<f64>, what: &str) -> Result<Vec<f64>, CliError> {
    if probs.is_empty() {
        return Err(CliError::schema(format!(
            "{what}: empty probability vector"
        )));
    }
    if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(CliError::schema(format!("{what}: bad probability {p}")));
    }
    let deviation = (probability_sum(&probs) - 1.0).abs();
    if deviation > ACCEPT_TOL {
        return Err(CliError::schema(format!(
            "{what}: sums off by {deviation:.3e}, beyond the {ACCEPT_TOL:.0e} acceptance window"
        )));
    }
    if deviation > EXACT_TOL {
        eprintln!("warning: {what} renormalized (off by {deviation:.3e})");
        return Ok(exact_probability_normalize(probs));
    }
    Ok(probs)
}
