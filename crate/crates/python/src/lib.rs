//! Python bindings. Matrices cross the boundary as nested lists of Python
//! complex numbers; reports come back as plain dicts.

use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use crpoint::canon::{self, DEFAULT_TOL};
use crpoint::homotopy::{self, ConnectOptions, HomotopyPath, DEFAULT_MARGIN, DEFAULT_SAMPLES};
use crpoint::kernel::Mat2;
use crpoint::levi::{self, ModelKind, ScanOptions};
use crpoint::pairs::{self, SIGN_TOL};
use crpoint::selftest;
use crpoint::surface::{self, SurfaceGrid, SurfaceSpec};

create_exception!(crpoint_py, DegenerateError, PyValueError);
create_exception!(crpoint_py, NonGenericError, PyValueError);
create_exception!(crpoint_py, VerificationError, PyValueError);

fn to_py(e: crpoint::Error) -> PyErr {
    use crpoint::Error as E;
    let msg = e.to_string();
    match e {
        E::DegeneratePair | E::DegenerateA | E::DeltaZero(_) => DegenerateError::new_err(msg),
        E::NonGeneric(_) => NonGenericError::new_err(msg),
        E::PerturbationUncertified | E::SearchFailed { .. } | E::Uncertified => VerificationError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

fn mat(rows: [[Complex64; 2]; 2]) -> Mat2 {
    Mat2::new(rows[0][0], rows[0][1], rows[1][0], rows[1][1])
}

fn rows(m: &Mat2) -> [[Complex64; 2]; 2] {
    m.0
}

/// Serializes with the crate's JSON layout and parses it into Python objects.
fn to_dict<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = crpoint::json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn model_kind(name: &str) -> PyResult<ModelKind> {
    name.parse().map_err(|e: crpoint::Error| PyValueError::new_err(e.to_string()))
}

/// A coefficient pair (A, B) with B symmetric.
#[pyclass(name = "Pair", module = "crpoint_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPair {
    inner: pairs::MatrixPair,
}

#[pymethods]
impl PyPair {
    #[new]
    fn new(a: [[Complex64; 2]; 2], b: [[Complex64; 2]; 2]) -> PyResult<Self> {
        pairs::MatrixPair::new(mat(a), mat(b)).map(|inner| PyPair { inner }).map_err(to_py)
    }

    #[staticmethod]
    #[pyo3(signature = (seed, scale = 1.0))]
    fn random(seed: u64, scale: f64) -> Self {
        PyPair { inner: pairs::random_pair(seed, scale) }
    }

    #[staticmethod]
    fn model(sign: &str) -> PyResult<Self> {
        let sign = match sign {
            "elliptic" => pairs::Sign::Elliptic,
            "hyperbolic" => pairs::Sign::Hyperbolic,
            other => return Err(PyValueError::new_err(format!("unknown sign `{other}`"))),
        };
        homotopy::model_pair(sign).map(|inner| PyPair { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str(text)
            .map(|inner| PyPair { inner })
            .map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn to_json(&self) -> PyResult<String> {
        crpoint::json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter(A)]
    fn a(&self) -> [[Complex64; 2]; 2] {
        rows(&self.inner.a)
    }

    #[getter(B)]
    fn b(&self) -> [[Complex64; 2]; 2] {
        rows(&self.inner.b)
    }

    fn det4(&self) -> f64 {
        pairs::det4(&self.inner)
    }

    /// "elliptic", "hyperbolic" or "degenerate".
    #[pyo3(signature = (tol = SIGN_TOL))]
    fn sign(&self, tol: f64) -> &'static str {
        pairs::sign_class(&self.inner, tol).tag.as_str()
    }

    fn distance(&self, other: &PyPair) -> f64 {
        self.inner.distance(&other.inner)
    }

    fn __repr__(&self) -> String {
        format!("Pair(A={:?}, B={:?})", self.a(), self.b())
    }
}

/// (ζ, P) acting by (A, B) ↦ (ζ P*AP, ζ̄ PᵀBP).
#[pyclass(name = "GroupElement", module = "crpoint_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyGroupElement {
    inner: pairs::GroupElement,
}

#[pymethods]
impl PyGroupElement {
    #[new]
    fn new(zeta: Complex64, p: [[Complex64; 2]; 2]) -> PyResult<Self> {
        pairs::GroupElement::new(zeta, mat(p)).map(|inner| PyGroupElement { inner }).map_err(to_py)
    }

    #[staticmethod]
    fn random(seed: u64) -> Self {
        PyGroupElement { inner: pairs::random_group_element(seed) }
    }

    #[getter]
    fn zeta(&self) -> Complex64 {
        self.inner.zeta
    }

    #[getter(P)]
    fn p(&self) -> [[Complex64; 2]; 2] {
        rows(&self.inner.p)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    fn compose(&self, first: &PyGroupElement) -> Self {
        PyGroupElement { inner: self.inner.compose(&first.inner) }
    }

    fn inverse(&self) -> PyResult<Self> {
        self.inner.inverse().map(|inner| PyGroupElement { inner }).map_err(to_py)
    }

    fn act(&self, pair: &PyPair) -> PyResult<PyPair> {
        pairs::act(&self.inner, &pair.inner).map(|inner| PyPair { inner }).map_err(to_py)
    }
}

/// A certified piecewise path of pairs.
#[pyclass(name = "Path", module = "crpoint_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyPath {
    inner: HomotopyPath,
}

#[pymethods]
impl PyPath {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        let inner: HomotopyPath = serde_json::from_str(text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        inner.validate().map_err(to_py)?;
        Ok(PyPath { inner })
    }

    fn to_json(&self) -> PyResult<String> {
        crpoint::json::to_string(&self.inner).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    fn __call__(&self, t: f64) -> PyResult<PyPair> {
        self.inner.eval(t).map(|inner| PyPair { inner }).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.segments.len()
    }

    fn segment_kind(&self, i: usize) -> PyResult<String> {
        use homotopy::Segment;
        match self.inner.segments.get(i) {
            Some(Segment::Constant { .. }) => Ok("constant".into()),
            Some(Segment::Linear { .. }) => Ok("linear".into()),
            Some(Segment::GroupAction { .. }) => Ok("group_action".into()),
            Some(Segment::Catalog(r)) => Ok(r.name().into()),
            None => Err(PyIndexError::new_err(i)),
        }
    }

    #[getter]
    fn certificate<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &self.inner.certificate)
    }

    fn reversed(&self) -> Self {
        PyPath { inner: self.inner.reversed() }
    }

    fn flattened(&self) -> Self {
        PyPath { inner: self.inner.flattened() }
    }

    #[pyo3(signature = (samples = DEFAULT_SAMPLES, margin = DEFAULT_MARGIN))]
    fn certify<'py>(&self, py: Python<'py>, samples: usize, margin: f64) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &homotopy::verify_nondegenerate(&self.inner, samples, margin))
    }
}

#[pyfunction]
#[pyo3(signature = (pair, tol = SIGN_TOL))]
fn sign_class<'py>(py: Python<'py>, pair: &PyPair, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &pairs::sign_class(&pair.inner, tol))
}

/// Normal form as a dict plus the witness group element.
#[pyfunction]
#[pyo3(signature = (pair, tol = DEFAULT_TOL))]
fn normal_form<'py>(py: Python<'py>, pair: &PyPair, tol: f64) -> PyResult<(Bound<'py, PyAny>, PyGroupElement)> {
    let nf = canon::normal_form(&pair.inner, tol).map_err(to_py)?;
    Ok((to_dict(py, &nf)?, PyGroupElement { inner: nf.witness }))
}

#[pyfunction]
#[pyo3(signature = (pair, samples = DEFAULT_SAMPLES, margin = DEFAULT_MARGIN, seed = 0))]
fn connect_to_model(py: Python<'_>, pair: &PyPair, samples: usize, margin: f64, seed: u64) -> PyResult<PyPath> {
    let opts = ConnectOptions { samples, margin, seed, ..ConnectOptions::default() };
    let p = pair.inner;
    py.detach(|| homotopy::connect_to_model(&p, &opts)).map(|inner| PyPath { inner }).map_err(to_py)
}

/// Radial construction around path(0); n defaults to the computed requirement.
#[pyfunction]
#[pyo3(signature = (path, epsilon = 1.0, n = None, tol = 1e-9, seed = 0))]
fn surface_check<'py>(
    py: Python<'py>,
    path: &PyPath,
    epsilon: f64,
    n: Option<u32>,
    tol: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let path = path.inner.clone();
    let report = py
        .detach(|| {
            let spec = SurfaceSpec::new(surface::flatten(&path), epsilon, 1)?;
            let grid = SurfaceGrid::default();
            let n = match n {
                Some(n) => n,
                None => surface::bounds(&spec, &grid, tol)?.n_required,
            };
            surface::verify_no_new_complex_points(&spec.with_n(n)?, &grid, tol, seed)
        })
        .map_err(to_py)?;
    to_dict(py, &report)
}

/// Levi matrix of the model function at a point of ℂ³, as nested lists.
#[pyfunction]
fn levi_matrix(model: &str, point: [Complex64; 3]) -> PyResult<[[Complex64; 3]; 3]> {
    Ok(levi::levi_closed_form(model_kind(model)?, &point).0)
}

#[pyfunction]
#[pyo3(signature = (model, radius = 0.05, grid = 7, seed = 0))]
fn levi_scan<'py>(py: Python<'py>, model: &str, radius: f64, grid: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let kind = model_kind(model)?;
    let opts = ScanOptions { radius, gridsize: grid, seed, ..ScanOptions::default() };
    let report = py.detach(|| levi::positivity_scan(kind, &opts)).map_err(to_py)?;
    to_dict(py, &report)
}

/// The acceptance checks; `cases` caps the random case counts.
#[pyfunction]
#[pyo3(signature = (seed = 0, cases = None))]
fn run_selftest<'py>(py: Python<'py>, seed: u64, cases: Option<usize>) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let outcomes = py.detach(|| selftest::run_all(&selftest::Config { seed, cases }));
    outcomes
        .iter()
        .map(|o| {
            let d = PyDict::new(py);
            d.set_item("id", o.id)?;
            d.set_item("name", o.name)?;
            d.set_item("pass", o.pass)?;
            d.set_item("detail", &o.detail)?;
            d.set_item("seconds", o.seconds)?;
            Ok(d)
        })
        .collect()
}

#[pymodule]
fn crpoint_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPair>()?;
    m.add_class::<PyGroupElement>()?;
    m.add_class::<PyPath>()?;
    m.add_function(wrap_pyfunction!(sign_class, m)?)?;
    m.add_function(wrap_pyfunction!(normal_form, m)?)?;
    m.add_function(wrap_pyfunction!(connect_to_model, m)?)?;
    m.add_function(wrap_pyfunction!(surface_check, m)?)?;
    m.add_function(wrap_pyfunction!(levi_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(levi_scan, m)?)?;
    m.add_function(wrap_pyfunction!(run_selftest, m)?)?;
    m.add("DegenerateError", m.py().get_type::<DegenerateError>())?;
    m.add("NonGenericError", m.py().get_type::<NonGenericError>())?;
    m.add("VerificationError", m.py().get_type::<VerificationError>())?;
    Ok(())
}
