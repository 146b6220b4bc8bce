//! Bounded proper scoring rules that maximize the incentive to exert
//! effort.
//!
//! A forecaster either reports a prior mean or pays effort to learn a
//! posterior and report its mean. Among all proper scoring rules with
//! ex-post scores in `[0, B]`, this crate constructs the ones maximizing
//! the expected score difference between those two behaviors:
//!
//! * closed-form optima in one dimension (V-shapes at the prior mean) and
//!   for center-symmetric multi-dimensional distributions, in
//!   [`single_dim`] and [`multi_dim`];
//! * exact optima for finite instances via a linear program over
//!   allocation/payment menus ([`multi_dim::lp_optimal`], backed by the
//!   dense simplex in [`lp`]);
//! * the max-over-separate approximation and its choose-and-report form,
//!   with the separate-averaging gap and robustness analyses
//!   ([`multi_dim`]);
//! * the reduction from full-distribution elicitation to mean elicitation
//!   over indicator states ([`full_dist`]);
//! * prior-independent analysis of the quadratic rule ([`single_dim`]);
//! * Bayesian plumbing from priors and signal channels to distributions of
//!   posterior means ([`bayes`]).

pub mod bayes;
pub mod dist;
pub mod error;
pub mod full_dist;
pub mod geometry;
pub mod lp;
pub mod multi_dim;
mod num;
pub mod random;
pub mod rule;
pub mod single_dim;
pub mod utility;

/// Tolerance for probability normalization checks.
pub const PROB_TOL: f64 = 1e-12;

/// Tolerance for feasibility and equality checks on scores and objectives.
pub const FEAS_TOL: f64 = 1e-9;

pub use dist::{two_point_reduction, FiniteDistribution};
pub use error::{Error, Result};
pub use geometry::{Point, Rect};
pub use rule::{
    fit_kappa, score_range, verify_proper, CanonicalScoringRule, KappaTable, PropernessReport,
    ScoringRule, StateFn,
};
pub use utility::{objective, ConvexUtility, PiecewiseLinearConvexUtility, VShapedUtility};
