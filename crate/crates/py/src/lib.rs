//! Python module `potts_sos_py`.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use potts_sos::analysis::{self, Axis, RAxis};
use potts_sos::exactpoly::{self, parse_rational};
use potts_sos::solvers::{self, MultiStart, SolutionKind};
use potts_sos::{oracle, recursion, Error, FiniteTree, ReducedField};

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter(_) | Error::Dimension { .. } | Error::BoundaryLength { .. } => {
            PyValueError::new_err(e.to_string())
        }
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn fields(raw: Vec<Vec<f64>>) -> PyResult<Vec<ReducedField>> {
    raw.into_iter().map(|f| ReducedField::new(f).map_err(py_err)).collect()
}

#[pyclass(name = "ModelParams", frozen)]
pub struct PyModelParams {
    inner: potts_sos::ModelParams,
}

#[pymethods]
impl PyModelParams {
    #[new]
    #[pyo3(signature = (k, m, j, j_p, beta))]
    fn new(k: usize, m: usize, j: f64, j_p: f64, beta: f64) -> PyResult<Self> {
        Ok(Self { inner: potts_sos::ModelParams::new(k, m, j, j_p, beta).map_err(py_err)? })
    }

    #[staticmethod]
    fn from_theta_r(k: usize, m: usize, theta: f64, r: f64) -> PyResult<Self> {
        Ok(Self { inner: potts_sos::ModelParams::from_theta_r(k, m, theta, r).map_err(py_err)? })
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }
    #[getter]
    fn m(&self) -> usize {
        self.inner.m
    }
    #[getter]
    fn theta(&self) -> f64 {
        self.inner.theta
    }
    #[getter]
    fn r(&self) -> f64 {
        self.inner.r
    }
    #[getter]
    fn j(&self) -> f64 {
        self.inner.j
    }
    #[getter]
    fn j_p(&self) -> f64 {
        self.inner.j_p
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    fn is_degenerate(&self) -> bool {
        self.inner.is_degenerate()
    }

    fn __repr__(&self) -> String {
        let p = &self.inner;
        format!("ModelParams(k={}, m={}, theta={}, r={})", p.k, p.m, p.theta, p.r)
    }
}

#[pyclass(name = "CycleReport", frozen, get_all)]
pub struct PyCycleReport {
    /// `(z, w, residual)` with `z < w`.
    cycles: Vec<(f64, f64, f64)>,
    fixed_points: Vec<f64>,
    unresolved: Vec<f64>,
    degenerate: bool,
}

#[pyclass(name = "BipartiteSolution", frozen, get_all)]
pub struct PyBipartiteSolution {
    h: Vec<f64>,
    l: Vec<f64>,
    residual: f64,
    /// `"translation_invariant"` or `"two_periodic"`.
    kind: &'static str,
}

#[pyclass(name = "PhasePoint", frozen, get_all)]
pub struct PyPhasePoint {
    theta: f64,
    r: f64,
    d: f64,
    b: f64,
    classification: &'static str,
}

impl From<analysis::PhasePoint> for PyPhasePoint {
    fn from(p: analysis::PhasePoint) -> Self {
        Self { theta: p.theta, r: p.r, d: p.d, b: p.b, classification: p.classification.as_str() }
    }
}

/// One step of the boundary-law recursion, `F(h)`.
#[pyfunction]
fn boundary_map(h: Vec<f64>, theta: f64, r: f64) -> Vec<f64> {
    recursion::boundary_map(&h, theta, r)
}

/// Fields on level 1 obtained by propagating `boundary` from the outer sphere
/// of a tree of order `k` and radius `n`.
#[pyfunction]
fn propagate(k: usize, n: usize, boundary: Vec<Vec<f64>>, theta: f64, r: f64) -> PyResult<Vec<Vec<f64>>> {
    let tree = FiniteTree::new(k, n).map_err(py_err)?;
    let assignment = recursion::propagate(&tree, &fields(boundary)?, theta, r).map_err(py_err)?;
    Ok(assignment.sphere(&tree, 1).into_iter().map(ReducedField::into_inner).collect())
}

#[pyfunction]
#[pyo3(signature = (theta, r, k = 2))]
fn two_cycles(theta: f64, r: f64, k: usize) -> PyResult<PyCycleReport> {
    let rep = solvers::two_cycles(theta, r, k).map_err(py_err)?;
    Ok(PyCycleReport {
        cycles: rep.cycles.iter().map(|c| (c.z, c.w, c.residual)).collect(),
        fixed_points: rep.fixed_points,
        unresolved: rep.unresolved,
        degenerate: rep.degenerate,
    })
}

/// Translation-invariant solutions as `(field, residual)` pairs.
#[pyfunction]
#[pyo3(signature = (m, theta, r, k = 2, seeds = 7))]
fn ti_fixed_points(m: usize, theta: f64, r: f64, k: usize, seeds: usize) -> PyResult<Vec<(Vec<f64>, f64)>> {
    let rep = solvers::ti_fixed_points(m, theta, r, k, MultiStart { seeds_per_axis: seeds }).map_err(py_err)?;
    Ok(rep.solutions.into_iter().map(|s| (s.field.into_inner(), s.residual)).collect())
}

#[pyfunction]
#[pyo3(signature = (theta, r, k = 2, seeds = 5))]
fn bipartite_solve(theta: f64, r: f64, k: usize, seeds: usize) -> PyResult<Vec<PyBipartiteSolution>> {
    let rep = solvers::bipartite_solve(theta, r, k, MultiStart { seeds_per_axis: seeds }).map_err(py_err)?;
    Ok(rep
        .solutions
        .into_iter()
        .map(|s| PyBipartiteSolution {
            h: s.pair.h.into_inner(),
            l: s.pair.l.into_inner(),
            residual: s.residual,
            kind: match s.kind {
                SolutionKind::TranslationInvariant => "translation_invariant",
                SolutionKind::TwoPeriodic => "two_periodic",
            },
        })
        .collect())
}

/// Returns `(injective_on_samples, min_separation_ratio)`.
#[pyfunction]
#[pyo3(signature = (theta, r, samples = 1000, rng_seed = 0))]
fn injectivity_probe(theta: f64, r: f64, samples: usize, rng_seed: u64) -> PyResult<(bool, f64)> {
    let rep = solvers::injectivity_probe(theta, r, samples, rng_seed).map_err(py_err)?;
    Ok((rep.injective_on_samples, rep.min_separation_ratio))
}

/// `(a, b, c)` of the `k = 2` cycle quadratic.
#[pyfunction]
fn quadratic_coeffs(theta: f64, r: f64) -> PyResult<(f64, f64, f64)> {
    let q = analysis::quadratic_coeffs(theta, r).map_err(py_err)?;
    Ok((q.a, q.b, q.c))
}

#[pyfunction]
fn discriminant(theta: f64, r: f64) -> PyResult<f64> {
    analysis::discriminant(theta, r).map_err(py_err)
}

#[pyfunction]
fn theta_d() -> f64 {
    analysis::theta_d()
}

#[pyfunction]
fn classify(theta: f64, r: f64) -> PyResult<PyPhasePoint> {
    Ok(analysis::classify_point(theta, r).map_err(py_err)?.into())
}

/// Row-major scan; `r_range = None` uses `r = theta^2`.
#[pyfunction]
#[pyo3(signature = (theta_range, r_range = None))]
fn phase_scan(theta_range: (f64, f64, usize), r_range: Option<(f64, f64, usize)>) -> PyResult<Vec<PyPhasePoint>> {
    let axis = |(lo, hi, n): (f64, f64, usize)| Axis::new(lo, hi, n).map_err(py_err);
    let r_axis = match r_range {
        Some(range) => RAxis::Grid(axis(range)?),
        None => RAxis::ThetaSquared,
    };
    let points = analysis::phase_scan(axis(theta_range)?, r_axis).map_err(py_err)?;
    Ok(points.into_iter().map(Into::into).collect())
}

/// Exact quotient of the period-two numerator by the fixed-point numerator at
/// rational `theta`, `r` (strings such as `"3/10"`). Returns
/// `(quotient, closed_form, proportional)`.
#[pyfunction]
fn verify_quadratic(theta: &str, r: &str) -> PyResult<(String, String, bool)> {
    let theta = parse_rational(theta).map_err(py_err)?;
    let r = parse_rational(r).map_err(py_err)?;
    let check = exactpoly::verify_quadratic(&theta, &r).map_err(py_err)?;
    Ok((check.quotient, check.closed_form, check.proportional))
}

/// Max-norm gap between the inner marginal of `mu_n` and `mu_{n-1}`.
#[pyfunction]
fn compatibility_residual(
    params: &PyModelParams,
    n: usize,
    inner: Vec<Vec<f64>>,
    outer: Vec<Vec<f64>>,
) -> PyResult<f64> {
    oracle::compatibility_residual_general(
        &params.inner,
        n,
        &fields(inner)?,
        &fields(outer)?,
        oracle::DEFAULT_ENUMERATION_CAP,
    )
    .map_err(py_err)
}

#[pymodule]
fn potts_sos_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelParams>()?;
    m.add_class::<PyCycleReport>()?;
    m.add_class::<PyBipartiteSolution>()?;
    m.add_class::<PyPhasePoint>()?;
    m.add_function(wrap_pyfunction!(boundary_map, m)?)?;
    m.add_function(wrap_pyfunction!(propagate, m)?)?;
    m.add_function(wrap_pyfunction!(two_cycles, m)?)?;
    m.add_function(wrap_pyfunction!(ti_fixed_points, m)?)?;
    m.add_function(wrap_pyfunction!(bipartite_solve, m)?)?;
    m.add_function(wrap_pyfunction!(injectivity_probe, m)?)?;
    m.add_function(wrap_pyfunction!(quadratic_coeffs, m)?)?;
    m.add_function(wrap_pyfunction!(discriminant, m)?)?;
    m.add_function(wrap_pyfunction!(theta_d, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(phase_scan, m)?)?;
    m.add_function(wrap_pyfunction!(verify_quadratic, m)?)?;
    m.add_function(wrap_pyfunction!(compatibility_residual, m)?)?;
    Ok(())
}
