//! Python bindings. Structured results (plans, analyses, reports) come back
//! as plain dicts; states and unitaries are wrapped classes.

use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

use qcert::harness::{self, ExperimentKind, ExperimentSpec, InstanceKind};
use qcert::quantum::{self, EigenphaseList};
use qcert::repr::{self, Partition, StaircasePlan};
use qcert::state_set::{self, StateSet};
use qcert::unitary::{self, TestMode};

fn py_err(e: qcert::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn partition(parts: Vec<usize>) -> PyResult<Partition> {
    Partition::new(parts).map_err(py_err)
}

fn parse_mode(mode: &str, d: usize) -> PyResult<TestMode> {
    Ok(match mode {
        "known" => TestMode::for_dimension(d, true),
        "swap" => TestMode::for_dimension(d, false),
        "qubit-known" => TestMode::QubitKnown,
        "qubit-swap" => TestMode::QubitSwap,
        "qudit-known" => TestMode::QuditKnown,
        "qudit-swap" => TestMode::QuditSwap,
        other => return Err(PyValueError::new_err(format!("unknown mode {other:?}"))),
    })
}

#[pyclass(name = "PureState", frozen, from_py_object)]
#[derive(Clone)]
struct PyPureState(quantum::PureState);

#[pymethods]
impl PyPureState {
    /// Unit vector; raises ValueError if the amplitudes are not normalized.
    #[new]
    fn new(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        quantum::PureState::new(amplitudes).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn normalized(amplitudes: Vec<Complex64>) -> PyResult<Self> {
        quantum::PureState::normalized(amplitudes).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn random(d: usize, seed: u64) -> PyResult<Self> {
        quantum::PureState::random(d, &mut quantum::seeded_rng(seed)).map(Self).map_err(py_err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn amplitudes(&self) -> Vec<Complex64> {
        self.0.amplitudes().to_vec()
    }

    fn __repr__(&self) -> String {
        format!("PureState(dim={})", self.0.dim())
    }
}

#[pyclass(name = "Unitary", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyUnitary(quantum::UnitaryMatrix);

#[pymethods]
impl PyUnitary {
    /// Row-major square matrix of complex numbers.
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        let file = qcert::formats::UnitaryFile { dimension: rows.len(), matrix: rows };
        file.into_unitary().map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn identity(d: usize) -> Self {
        Self(quantum::UnitaryMatrix::identity(d))
    }

    #[staticmethod]
    fn haar(d: usize, seed: u64) -> PyResult<Self> {
        quantum::haar_random_unitary(d, seed).map(Self).map_err(py_err)
    }

    #[staticmethod]
    fn from_phases(phases: Vec<f64>) -> Self {
        Self(quantum::UnitaryMatrix::from_phases(&phases))
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn matrix(&self) -> Vec<Vec<Complex64>> {
        qcert::formats::UnitaryFile::from_unitary(&self.0).matrix
    }

    fn eigenphases(&self) -> PyResult<Vec<f64>> {
        quantum::eigenphases(&self.0).map(|p| p.as_slice().to_vec()).map_err(py_err)
    }

    fn with_global_phase(&self, gamma: f64) -> Self {
        Self(self.0.with_global_phase(gamma))
    }

    fn conjugate_by(&self, w: &PyUnitary) -> PyResult<Self> {
        self.0.conjugate_by(&w.0).map(Self).map_err(py_err)
    }

    fn __repr__(&self) -> String {
        format!("Unitary(dim={})", self.0.dim())
    }
}

#[pyfunction]
fn overlap(psi: &PyPureState, phi: &PyPureState) -> PyResult<f64> {
    quantum::overlap(&psi.0, &phi.0).map_err(py_err)
}

#[pyfunction]
fn trace_distance(psi: &PyPureState, phi: &PyPureState) -> PyResult<f64> {
    quantum::trace_distance_pure(&psi.0, &phi.0).map_err(py_err)
}

/// Distance up to global phase.
#[pyfunction]
fn unitary_distance(u: &PyUnitary, v: &PyUnitary) -> PyResult<f64> {
    quantum::unitary_distance(&u.0, &v.0).map_err(py_err)
}

#[pyfunction]
fn pair_at_distance(d: usize, epsilon: f64, seed: u64) -> PyResult<(PyUnitary, PyUnitary)> {
    let (u, v) = quantum::pair_at_distance(d, epsilon, seed).map_err(py_err)?;
    Ok((PyUnitary(u), PyUnitary(v)))
}

#[pyfunction]
fn partitions(n: usize, d: usize) -> Vec<Vec<usize>> {
    repr::partitions(n, d).into_iter().map(|p| p.parts().to_vec()).collect()
}

#[pyfunction]
fn dim_unitary_irrep(parts: Vec<usize>) -> PyResult<num_bigint::BigUint> {
    Ok(repr::dim_unitary_irrep(&partition(parts)?))
}

#[pyfunction]
fn dim_symmetric_irrep(parts: Vec<usize>) -> PyResult<num_bigint::BigUint> {
    Ok(repr::dim_symmetric_irrep(&partition(parts)?))
}

#[pyfunction]
fn weyl_character(parts: Vec<usize>, phases: Vec<f64>) -> PyResult<Complex64> {
    repr::weyl_character(&partition(parts)?, &EigenphaseList::wrapped(phases)).map_err(py_err)
}

#[pyfunction]
fn staircase_character(d: usize, s: usize, phases: Vec<f64>) -> PyResult<Complex64> {
    let plan = StaircasePlan::new(d, s).map_err(py_err)?;
    repr::staircase_character(&plan, &EigenphaseList::wrapped(phases)).map_err(py_err)
}

#[pyfunction]
fn plan_membership<'py>(py: Python<'py>, epsilon: f64, set_size: usize) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &state_set::plan_membership(epsilon, set_size).map_err(py_err)?)
}

/// `mode` is one of known, swap, qubit-known, qubit-swap, qudit-known, qudit-swap.
#[pyfunction]
#[pyo3(signature = (epsilon, dimension, mode = "known"))]
fn plan_unitary<'py>(py: Python<'py>, epsilon: f64, dimension: usize, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let mode = parse_mode(mode, dimension)?;
    to_py(py, &unitary::plan(mode, dimension, epsilon).map_err(py_err)?)
}

#[pyfunction]
#[pyo3(signature = (u, v, epsilon, mode = "known"))]
fn analyze<'py>(py: Python<'py>, u: &PyUnitary, v: &PyUnitary, epsilon: f64, mode: &str) -> PyResult<Bound<'py, PyAny>> {
    let mode = parse_mode(mode, u.0.dim())?;
    let plan = unitary::plan(mode, u.0.dim(), epsilon).map_err(py_err)?;
    to_py(py, &unitary::analyze(&u.0, &v.0, &plan).map_err(py_err)?)
}

/// Exact probability that the membership tester accepts `psi`.
#[pyfunction]
fn membership_accept_probability(states: Vec<PyPureState>, psi: &PyPureState, epsilon: f64) -> PyResult<f64> {
    let set = StateSet::new(states.into_iter().map(|s| s.0).collect()).map_err(py_err)?;
    let plan = state_set::plan_membership(epsilon, set.len()).map_err(py_err)?;
    let overlaps = set.overlaps(&psi.0).map_err(py_err)?;
    Ok(state_set::membership_accept_probability(&overlaps, &plan))
}

/// Seeded Monte Carlo campaign on a random instance; returns the report.
#[pyfunction]
#[pyo3(signature = (kind, epsilon, dimension, trials = 10_000, seed = 0, far = false, set_size = 8, mode = None))]
#[allow(clippy::too_many_arguments)]
fn simulate<'py>(
    py: Python<'py>,
    kind: &str,
    epsilon: f64,
    dimension: usize,
    trials: u64,
    seed: u64,
    far: bool,
    set_size: usize,
    mode: Option<&str>,
) -> PyResult<Bound<'py, PyAny>> {
    let kind = match kind {
        "state-set" => ExperimentKind::StateSetMembership,
        "unitary" => ExperimentKind::UnitaryEquality,
        other => return Err(PyValueError::new_err(format!("unknown experiment kind {other:?}"))),
    };
    let instance = if far { InstanceKind::Far } else { InstanceKind::Member };
    let mut spec = ExperimentSpec::new(kind, epsilon, dimension, seed)
        .with_trials(trials)
        .with_instance(instance)
        .with_set_size(set_size);
    if let Some(m) = mode {
        spec = spec.with_mode(parse_mode(m, dimension)?);
    }
    let report = py.detach(|| harness::run_experiment(spec)).map_err(py_err)?;
    to_py(py, &report)
}

#[pyfunction]
#[pyo3(signature = (seed = 0))]
fn oracle_verify<'py>(py: Python<'py>, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let checks = py.detach(|| harness::oracle_verify(seed)).map_err(py_err)?;
    to_py(py, &checks)
}

#[pymodule]
fn qcert_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPureState>()?;
    m.add_class::<PyUnitary>()?;
    m.add_function(wrap_pyfunction!(overlap, m)?)?;
    m.add_function(wrap_pyfunction!(trace_distance, m)?)?;
    m.add_function(wrap_pyfunction!(unitary_distance, m)?)?;
    m.add_function(wrap_pyfunction!(pair_at_distance, m)?)?;
    m.add_function(wrap_pyfunction!(partitions, m)?)?;
    m.add_function(wrap_pyfunction!(dim_unitary_irrep, m)?)?;
    m.add_function(wrap_pyfunction!(dim_symmetric_irrep, m)?)?;
    m.add_function(wrap_pyfunction!(weyl_character, m)?)?;
    m.add_function(wrap_pyfunction!(staircase_character, m)?)?;
    m.add_function(wrap_pyfunction!(plan_membership, m)?)?;
    m.add_function(wrap_pyfunction!(plan_unitary, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add_function(wrap_pyfunction!(membership_accept_probability, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_verify, m)?)?;
    Ok(())
}
