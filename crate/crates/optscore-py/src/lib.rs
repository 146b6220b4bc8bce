//! Python bindings for the optscore library: the main types and operations
//! exposed as an extension module named `optscore_py`.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyAny;

use optscore::bayes::{posterior_mean_distribution, SignalModel};
use optscore::full_dist::FullDistInstance;
use optscore::multi_dim::{self, MeanElicitInstance};
use optscore::{
    objective, verify_proper, CanonicalScoringRule, FiniteDistribution, Point, Rect,
    ScoringRule as _,
};
use optscore::{single_dim, two_point_reduction};

fn to_py_err(err: optscore::Error) -> PyErr {
    PyValueError::new_err(err.to_string())
}

fn point(coords: Vec<f64>) -> PyResult<Point> {
    Point::new(coords).map_err(to_py_err)
}

fn rect(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<Rect> {
    Rect::new(lower, upper).map_err(to_py_err)
}

/// A finite distribution over posterior means.
#[pyclass(
    name = "FiniteDistribution",
    module = "optscore_py",
    skip_from_py_object
)]
#[derive(Clone)]
struct PyFiniteDistribution {
    inner: FiniteDistribution,
}

#[pymethods]
impl PyFiniteDistribution {
    /// `FiniteDistribution(support, probs)` with `support` a list of
    /// coordinate lists (or plain floats in one dimension).
    #[new]
    fn new(support: Vec<Bound<'_, PyAny>>, probs: Vec<f64>) -> PyResult<Self> {
        let mut points = Vec::with_capacity(support.len());
        for item in support {
            let coords: Vec<f64> = match item.extract::<f64>() {
                Ok(x) => vec![x],
                Err(_) => item.extract()?,
            };
            points.push(point(coords)?);
        }
        let inner = FiniteDistribution::new(points, probs).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn support(&self) -> Vec<Vec<f64>> {
        self.inner
            .support()
            .iter()
            .map(|p| p.coords().to_vec())
            .collect()
    }

    #[getter]
    fn probs(&self) -> Vec<f64> {
        self.inner.probs().to_vec()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn mean(&self) -> Vec<f64> {
        self.inner.mean().coords().to_vec()
    }

    /// Variance of a one-dimensional distribution.
    fn variance(&self) -> PyResult<f64> {
        self.inner.variance().map_err(to_py_err)
    }

    /// The optimal bounded-score objective `E[max(0, r−μ)]/max(μ, 1−μ)`
    /// for supports inside `[0, 1]`.
    fn opt_value(&self) -> PyResult<f64> {
        single_dim::opt_value(&self.inner).map_err(to_py_err)
    }

    /// Collapse to the two conditional means around the prior mean.
    fn two_point_reduction(&self) -> PyResult<Self> {
        Ok(Self {
            inner: two_point_reduction(&self.inner).map_err(to_py_err)?,
        })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "FiniteDistribution(len={}, dim={})",
            self.inner.len(),
            self.inner.dim()
        )
    }
}

/// A discrete prior plus a signal channel.
#[pyclass(name = "SignalModel", module = "optscore_py")]
struct PySignalModel {
    inner: SignalModel,
}

#[pymethods]
impl PySignalModel {
    #[new]
    fn new(
        theta_grid: Vec<Bound<'_, PyAny>>,
        prior: Vec<f64>,
        likelihood: Vec<Vec<f64>>,
    ) -> PyResult<Self> {
        let mut states = Vec::with_capacity(theta_grid.len());
        for item in theta_grid {
            let coords: Vec<f64> = match item.extract::<f64>() {
                Ok(x) => vec![x],
                Err(_) => item.extract()?,
            };
            states.push(point(coords)?);
        }
        let inner = SignalModel::new(states, prior, likelihood).map_err(to_py_err)?;
        Ok(Self { inner })
    }

    fn prior_mean(&self) -> Vec<f64> {
        self.inner.prior_mean().coords().to_vec()
    }

    /// The induced distribution over posterior means.
    fn posterior_mean_distribution(&self) -> PyResult<PyFiniteDistribution> {
        Ok(PyFiniteDistribution {
            inner: posterior_mean_distribution(&self.inner).map_err(to_py_err)?,
        })
    }
}

/// A bounded proper scoring rule in canonical form.
#[pyclass(name = "CanonicalRule", module = "optscore_py")]
struct PyCanonicalRule {
    inner: CanonicalScoringRule,
}

#[pymethods]
impl PyCanonicalRule {
    #[getter]
    fn bound(&self) -> f64 {
        self.inner.bound()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.utility().dim()
    }

    /// `S(report, state)`.
    fn score(&self, report: Vec<f64>, state: Vec<f64>) -> PyResult<f64> {
        self.inner
            .score(&point(report)?, &point(state)?)
            .map_err(to_py_err)
    }

    /// Utility value of a report.
    fn utility(&self, report: Vec<f64>) -> PyResult<f64> {
        self.inner
            .utility()
            .value(&point(report)?)
            .map_err(to_py_err)
    }

    /// Incentive objective `E[u(r)] − u(μ_f)` on a distribution.
    fn objective(&self, dist: &PyFiniteDistribution) -> PyResult<f64> {
        self.inner.objective(&dist.inner).map_err(to_py_err)
    }

    /// Grid properness check; returns `(proper, worst_violation)`.
    fn verify_proper(
        &self,
        reports: Vec<Vec<f64>>,
        beliefs: Vec<PyRef<'_, PyFiniteDistribution>>,
    ) -> PyResult<(bool, f64)> {
        let reports = reports
            .into_iter()
            .map(point)
            .collect::<PyResult<Vec<_>>>()?;
        let beliefs: Vec<FiniteDistribution> = beliefs.iter().map(|b| b.inner.clone()).collect();
        let report = verify_proper(&self.inner, &reports, &beliefs).map_err(to_py_err)?;
        Ok((report.proper, report.worst_violation))
    }
}

/// The max-over-separate rule: per-dimension V-shapes, scoring only the
/// dimension whose report promises the highest expected score.
#[pyclass(name = "MaxOverSeparateRule", module = "optscore_py")]
struct PyMaxOverSeparateRule {
    inner: multi_dim::MaxOverSeparateRule,
}

#[pymethods]
impl PyMaxOverSeparateRule {
    #[getter]
    fn centers(&self) -> Vec<f64> {
        self.inner.dims().iter().map(|d| d.center).collect()
    }

    #[getter]
    fn slopes(&self) -> Vec<f64> {
        self.inner.dims().iter().map(|d| d.slope).collect()
    }

    fn score(&self, report: Vec<f64>, state: Vec<f64>) -> PyResult<f64> {
        self.inner
            .score(&point(report)?, &point(state)?)
            .map_err(to_py_err)
    }

    /// Which dimension a direct report would be scored on.
    fn chosen_dimension(&self, report: Vec<f64>) -> PyResult<usize> {
        self.inner
            .chosen_dimension(&point(report)?)
            .map_err(to_py_err)
    }

    /// The indirect form: report one dimension and one number.
    fn choose_and_report(&self, dim: usize, report: f64, state: Vec<f64>) -> PyResult<f64> {
        self.inner
            .score_chosen(dim, report, &point(state)?)
            .map_err(to_py_err)
    }

    fn objective(&self, dist: &PyFiniteDistribution) -> PyResult<f64> {
        self.inner.objective(&dist.inner).map_err(to_py_err)
    }

    fn to_canonical(&self) -> PyCanonicalRule {
        PyCanonicalRule {
            inner: self.inner.to_canonical(),
        }
    }
}

/// An optimal allocation/payment menu from the linear program.
#[pyclass(name = "LpSolution", module = "optscore_py")]
struct PyLpSolution {
    inner: multi_dim::LpScoringSolution,
}

#[pymethods]
impl PyLpSolution {
    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective()
    }

    #[getter]
    fn reports(&self) -> Vec<Vec<f64>> {
        self.inner
            .reports()
            .iter()
            .map(|p| p.coords().to_vec())
            .collect()
    }

    #[getter]
    fn allocations(&self) -> Vec<Vec<f64>> {
        self.inner
            .allocations()
            .iter()
            .map(|p| p.coords().to_vec())
            .collect()
    }

    #[getter]
    fn payments(&self) -> Vec<f64> {
        self.inner.payments().to_vec()
    }

    /// The recovered utility `u(r) = maxᵢ (xᵢ·r − pᵢ)` at a report.
    fn utility(&self, report: Vec<f64>) -> PyResult<f64> {
        let u = self.inner.utility().map_err(to_py_err)?;
        u.value(&point(report)?).map_err(to_py_err)
    }

    /// The induced canonical rule with `κ` fitted over the states.
    fn to_rule(&self) -> PyResult<PyCanonicalRule> {
        Ok(PyCanonicalRule {
            inner: self.inner.to_rule().map_err(to_py_err)?,
        })
    }
}

/// The optimal single-dimensional rule for prior mean `mu` on `[0, 1]`.
#[pyfunction]
fn optimal_v_shaped(mu: f64) -> PyResult<PyCanonicalRule> {
    Ok(PyCanonicalRule {
        inner: single_dim::optimal_v_shaped(mu).map_err(to_py_err)?,
    })
}

/// The quadratic rule `S(r, θ) = 1 − (θ − r)²`.
#[pyfunction]
fn quadratic_rule() -> PyCanonicalRule {
    PyCanonicalRule {
        inner: single_dim::quadratic_rule(),
    }
}

/// Worst case of the quadratic rule over distributions with optimum `c`.
#[pyfunction]
fn maxmin_quadratic_value(c: f64) -> PyResult<f64> {
    single_dim::maxmin_quadratic_value(c).map_err(to_py_err)
}

/// Cap on any prior-independent rule over distributions with optimum `c`.
#[pyfunction]
fn pi_upper_bound(c: f64) -> PyResult<f64> {
    single_dim::pi_upper_bound(c).map_err(to_py_err)
}

/// Max-over-separate rule for a prior mean on the box `[lower, upper]`.
#[pyfunction]
fn max_over_separate(
    mu: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
) -> PyResult<PyMaxOverSeparateRule> {
    let rule =
        multi_dim::max_over_separate_rule(&point(mu)?, &rect(lower, upper)?).map_err(to_py_err)?;
    Ok(PyMaxOverSeparateRule { inner: rule })
}

/// The separate (averaging) rule on the same per-dimension pieces.
#[pyfunction]
fn separate_rule(mu: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> PyResult<PyCanonicalRule> {
    let rule = multi_dim::separate_rule(&point(mu)?, &rect(lower, upper)?).map_err(to_py_err)?;
    Ok(PyCanonicalRule { inner: rule })
}

/// The optimal rule for center-symmetric distributions on a box.
#[pyfunction]
fn symmetric_v_shaped(lower: Vec<f64>, upper: Vec<f64>) -> PyResult<PyCanonicalRule> {
    let r = rect(lower, upper)?;
    let center = r.midpoint();
    Ok(PyCanonicalRule {
        inner: multi_dim::symmetric_v_shaped(&r, &center).map_err(to_py_err)?,
    })
}

/// Exact optimum for finite states and posterior means via linear program.
#[pyfunction]
#[pyo3(signature = (states, means, bound = 1.0))]
fn lp_optimal(
    states: Vec<Vec<f64>>,
    means: &PyFiniteDistribution,
    bound: f64,
) -> PyResult<PyLpSolution> {
    let states = states
        .into_iter()
        .map(point)
        .collect::<PyResult<Vec<_>>>()?;
    let inst = MeanElicitInstance::new(states, means.inner.clone(), bound).map_err(to_py_err)?;
    Ok(PyLpSolution {
        inner: multi_dim::lp_optimal(&inst).map_err(to_py_err)?,
    })
}

/// Exact optimum for eliciting a full distribution over labeled states.
#[pyfunction]
#[pyo3(signature = (posteriors, probs, bound = 1.0))]
fn optimal_full_dist(
    posteriors: Vec<Vec<f64>>,
    probs: Vec<f64>,
    bound: f64,
) -> PyResult<PyLpSolution> {
    let d = posteriors.first().map(Vec::len).unwrap_or(0);
    let labels = (0..d).map(|j| format!("s{j}")).collect();
    let inst = FullDistInstance::new(labels, posteriors, probs).map_err(to_py_err)?;
    let sol = optscore::full_dist::optimal_full_dist(&inst, bound).map_err(to_py_err)?;
    Ok(PyLpSolution { inner: sol })
}

/// `(separate objective, max-over-separate objective)` for the gap family.
#[pyfunction]
fn separate_gap(n: u32) -> PyResult<(f64, f64)> {
    let gap = multi_dim::separate_gap_instance(n).map_err(to_py_err)?;
    Ok((gap.separate_objective, gap.max_over_separate_objective))
}

/// `(mean-elicitation optimum, full-distribution lower bound)`.
#[pyfunction]
fn mean_vs_full_gap(epsilon: f64) -> PyResult<(f64, f64)> {
    let gap = optscore::full_dist::mean_vs_full_gap(epsilon).map_err(to_py_err)?;
    Ok((gap.mean_opt, gap.full_opt_lower))
}

/// Samples sufficient for an ε-accurate mean with probability 1 − δ.
#[pyfunction]
fn sample_count(epsilon: f64, delta: f64, n: u32) -> PyResult<u64> {
    multi_dim::sample_count(epsilon, delta, n).map_err(to_py_err)
}

/// Objective of a convex V-shaped utility on a distribution (left/right
/// slopes around a kink), without building the full rule.
#[pyfunction]
fn v_shape_objective(
    mu: f64,
    left_slope: f64,
    right_slope: f64,
    dist: &PyFiniteDistribution,
) -> PyResult<f64> {
    let v = optscore::VShapedUtility::new(mu, left_slope, right_slope).map_err(to_py_err)?;
    objective(&optscore::ConvexUtility::VShaped(v), &dist.inner).map_err(to_py_err)
}

#[pymodule]
fn optscore_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFiniteDistribution>()?;
    m.add_class::<PySignalModel>()?;
    m.add_class::<PyCanonicalRule>()?;
    m.add_class::<PyMaxOverSeparateRule>()?;
    m.add_class::<PyLpSolution>()?;
    m.add_function(wrap_pyfunction!(optimal_v_shaped, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_rule, m)?)?;
    m.add_function(wrap_pyfunction!(maxmin_quadratic_value, m)?)?;
    m.add_function(wrap_pyfunction!(pi_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(max_over_separate, m)?)?;
    m.add_function(wrap_pyfunction!(separate_rule, m)?)?;
    m.add_function(wrap_pyfunction!(symmetric_v_shaped, m)?)?;
    m.add_function(wrap_pyfunction!(lp_optimal, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_full_dist, m)?)?;
    m.add_function(wrap_pyfunction!(separate_gap, m)?)?;
    m.add_function(wrap_pyfunction!(mean_vs_full_gap, m)?)?;
    m.add_function(wrap_pyfunction!(sample_count, m)?)?;
    m.add_function(wrap_pyfunction!(v_shape_objective, m)?)?;
    Ok(())
}
