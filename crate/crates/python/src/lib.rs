//! Python bindings.
//!
//! Keys may be `str` or `bytes`; they come back as `str` when they are valid
//! UTF-8 and as `bytes` otherwise. Thresholds may be floats, ints or decimal
//! strings such as `"0.05"` or `"1/20"`; strings are converted exactly.

use chh_core::{
    exact_chh_multipass, exact_counts_naive, snapshot, ChhError, ChhReport, ExactChh, FrequencyTable, Fraction,
    SolverCase, TupleRecord, ZipfWorkloadSpec,
};
use pyo3::exceptions::{PyMemoryError, PyRuntimeError, PyTypeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyBytes, PyDict, PyString};

fn py_err(e: ChhError) -> PyErr {
    match e {
        ChhError::InvalidParameter(_) | ChhError::MalformedLine { .. } | ChhError::Snapshot(_) => {
            PyValueError::new_err(e.to_string())
        }
        ChhError::ResourceLimit(_) => PyMemoryError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn fraction(obj: &Bound<'_, PyAny>) -> PyResult<Fraction> {
    if let Ok(s) = obj.cast::<PyString>() {
        return s.to_str()?.parse().map_err(py_err);
    }
    if let Ok(v) = obj.extract::<u64>() {
        return Ok(Fraction::from_integer(v));
    }
    if let Ok(v) = obj.extract::<f64>() {
        return Fraction::from_f64(v).map_err(py_err);
    }
    Err(PyTypeError::new_err("expected a float, int or decimal string"))
}

fn key(obj: &Bound<'_, PyAny>) -> PyResult<Vec<u8>> {
    if let Ok(s) = obj.cast::<PyString>() {
        return Ok(s.to_str()?.as_bytes().to_vec());
    }
    if let Ok(b) = obj.cast::<PyBytes>() {
        return Ok(b.as_bytes().to_vec());
    }
    Err(PyTypeError::new_err("keys must be str or bytes"))
}

fn key_out<'py>(py: Python<'py>, k: &[u8]) -> Bound<'py, PyAny> {
    match std::str::from_utf8(k) {
        Ok(s) => PyString::new(py, s).into_any(),
        Err(_) => PyBytes::new(py, k).into_any(),
    }
}

fn tuples(obj: &Bound<'_, PyAny>) -> PyResult<Vec<TupleRecord>> {
    let mut out = Vec::new();
    for item in obj.try_iter()? {
        let item = item?;
        let (x, y): (Bound<'_, PyAny>, Bound<'_, PyAny>) = item.extract()?;
        out.push(TupleRecord::new(key(&x)?, key(&y)?));
    }
    Ok(out)
}

/// Sizes, thresholds and tolerances of a sketch.
#[pyclass(name = "Params", module = "chh", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyParams(chh_core::ChhParams);

#[pymethods]
impl PyParams {
    /// Caller-chosen table sizes; tolerances default to the tightest the
    /// sizes support.
    #[staticmethod]
    #[pyo3(signature = (phi1, phi2, s1, s2, eps1=None, eps2=None))]
    fn with_sizes(
        phi1: &Bound<'_, PyAny>,
        phi2: &Bound<'_, PyAny>,
        s1: u64,
        s2: u64,
        eps1: Option<&Bound<'_, PyAny>>,
        eps2: Option<&Bound<'_, PyAny>>,
    ) -> PyResult<Self> {
        let tolerances = match (eps1, eps2) {
            (Some(a), Some(b)) => Some((fraction(a)?, fraction(b)?)),
            (None, None) => None,
            _ => return Err(PyValueError::new_err("eps1 and eps2 must be given together")),
        };
        chh_core::ChhParams::with_sizes(&fraction(phi1)?, &fraction(phi2)?, s1, s2, tolerances)
            .map(PyParams)
            .map_err(py_err)
    }

    #[getter]
    fn s1(&self) -> u64 {
        self.0.s1
    }

    #[getter]
    fn s2(&self) -> u64 {
        self.0.s2
    }

    #[getter]
    fn phi1(&self) -> String {
        self.0.phi1.to_string()
    }

    #[getter]
    fn phi2(&self) -> String {
        self.0.phi2.to_string()
    }

    #[getter]
    fn eps1(&self) -> String {
        self.0.eps1.to_string()
    }

    #[getter]
    fn eps2(&self) -> String {
        self.0.eps2.to_string()
    }

    /// `"I"`, `"II"`, or `None` for caller-chosen sizes.
    #[getter]
    fn case(&self) -> Option<&'static str> {
        self.0.case().map(|c| match c {
            SolverCase::CaseI => "I",
            SolverCase::CaseII => "II",
        })
    }

    #[getter]
    fn alpha(&self) -> Option<String> {
        self.0.alpha().map(|a| a.to_string())
    }

    fn constraints<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let c = self.0.constraints();
        let d = PyDict::new(py);
        d.set_item("constraint1", c.constraint1)?;
        d.set_item("constraint2", c.constraint2)?;
        d.set_item("tolerances_valid", c.tolerances_valid)?;
        d.set_item("holds", c.holds())?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!(
            "Params(phi1={}, phi2={}, eps1={}, eps2={}, s1={}, s2={})",
            p.phi1, p.phi2, p.eps1, p.eps2, p.s1, p.s2
        )
    }
}

/// Space-minimal sizes for the given thresholds and tolerances.
#[pyfunction]
fn solve_params(
    phi1: &Bound<'_, PyAny>,
    phi2: &Bound<'_, PyAny>,
    eps1: &Bound<'_, PyAny>,
    eps2: &Bound<'_, PyAny>,
) -> PyResult<PyParams> {
    chh_core::solve_params(&fraction(phi1)?, &fraction(phi2)?, &fraction(eps1)?, &fraction(eps2)?)
        .map(PyParams)
        .map_err(py_err)
}

/// One-dimensional frequent-items summary.
#[pyclass(name = "MgSummary", module = "chh")]
struct PyMgSummary(chh_core::MgSummary);

#[pymethods]
impl PyMgSummary {
    #[new]
    fn new(capacity: usize) -> PyResult<Self> {
        chh_core::MgSummary::new(capacity).map(PyMgSummary).map_err(py_err)
    }

    /// Returns the number of entries touched by a decrement round (0 if none).
    fn update(&mut self, item: &Bound<'_, PyAny>) -> PyResult<usize> {
        Ok(self.0.update(&key(item)?))
    }

    fn estimate(&self, item: &Bound<'_, PyAny>) -> PyResult<u64> {
        Ok(self.0.estimate(&key(item)?))
    }

    fn entries<'py>(&self, py: Python<'py>) -> Vec<(Bound<'py, PyAny>, u64)> {
        self.0.entries().into_iter().map(|(k, c)| (key_out(py, &k), c)).collect()
    }

    #[getter]
    fn capacity(&self) -> usize {
        self.0.capacity()
    }

    #[getter]
    fn items_seen(&self) -> u64 {
        self.0.items_seen()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

type PyPrimary<'py> = (Bound<'py, PyAny>, u64, Vec<(Bound<'py, PyAny>, u64)>);

fn report_out<'py>(py: Python<'py>, report: &ChhReport) -> Vec<PyPrimary<'py>> {
    report
        .primaries
        .iter()
        .map(|p| {
            let pairs = p.pairs.iter().map(|q| (key_out(py, &q.key), q.est_count)).collect();
            (key_out(py, &p.key), p.est_count, pairs)
        })
        .collect()
}

/// Correlated heavy-hitter sketch over `(x, y)` tuples.
#[pyclass(name = "ChhSketch", module = "chh")]
struct PyChhSketch(chh_core::ChhSketch);

#[pymethods]
impl PyChhSketch {
    #[new]
    fn new(params: &PyParams) -> PyResult<Self> {
        chh_core::ChhSketch::new(params.0.clone()).map(PyChhSketch).map_err(py_err)
    }

    fn update(&mut self, x: &Bound<'_, PyAny>, y: &Bound<'_, PyAny>) -> PyResult<()> {
        self.0.update(&key(x)?, &key(y)?);
        Ok(())
    }

    /// Feeds every `(x, y)` pair of an iterable.
    fn extend(&mut self, stream: &Bound<'_, PyAny>) -> PyResult<()> {
        for item in stream.try_iter()? {
            let item = item?;
            let (x, y): (Bound<'_, PyAny>, Bound<'_, PyAny>) = item.extract()?;
            self.0.update(&key(&x)?, &key(&y)?);
        }
        Ok(())
    }

    fn estimate_primary(&self, d: &Bound<'_, PyAny>) -> PyResult<u64> {
        Ok(self.0.estimate_primary(&key(d)?))
    }

    fn estimate_pair(&self, d: &Bound<'_, PyAny>, s: &Bound<'_, PyAny>) -> PyResult<u64> {
        Ok(self.0.estimate_pair(&key(d)?, &key(s)?))
    }

    /// `[(d, est_d, [(s, est_ds), ...]), ...]` sorted by key.
    fn report<'py>(&self, py: Python<'py>) -> Vec<PyPrimary<'py>> {
        report_out(py, &self.0.report())
    }

    #[getter]
    fn params(&self) -> PyParams {
        PyParams(self.0.params().clone())
    }

    #[getter]
    fn n(&self) -> u64 {
        self.0.n()
    }

    fn stored_counters(&self) -> usize {
        self.0.stored_counters()
    }

    fn to_snapshot(&self) -> String {
        snapshot::to_string(&self.0)
    }

    #[staticmethod]
    fn from_snapshot(text: &str) -> PyResult<Self> {
        snapshot::from_str(text).map(PyChhSketch).map_err(py_err)
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

fn chh_out<'py>(py: Python<'py>, set: Vec<ExactChh>) -> Vec<(Bound<'py, PyAny>, Bound<'py, PyAny>, u64, u64)> {
    set.into_iter()
        .map(|c| (key_out(py, &c.d), key_out(py, &c.s), c.f_d, c.f_ds))
        .collect()
}

/// Exact correlated heavy-hitters of a list of tuples as
/// `[(d, s, f_d, f_ds), ...]`.
#[pyfunction]
#[pyo3(signature = (stream, phi1, phi2, method="multipass", max_tuples=chh_core::oracle::DEFAULT_TUPLE_CAP))]
fn exact_chh<'py>(
    py: Python<'py>,
    stream: &Bound<'py, PyAny>,
    phi1: &Bound<'py, PyAny>,
    phi2: &Bound<'py, PyAny>,
    method: &str,
    max_tuples: u64,
) -> PyResult<Vec<(Bound<'py, PyAny>, Bound<'py, PyAny>, u64, u64)>> {
    let records = tuples(stream)?;
    let (phi1, phi2) = (fraction(phi1)?, fraction(phi2)?);
    let set = match method {
        "multipass" => exact_chh_multipass(&records, &phi1, &phi2).map_err(py_err)?.chh,
        "naive" => exact_counts_naive(&records, max_tuples).map_err(py_err)?.chh_set(&phi1, &phi2),
        other => return Err(PyValueError::new_err(format!("unknown method {other:?}"))),
    };
    Ok(chh_out(py, set))
}

/// Seeded Zipf workload as a list of `(x, y)` string pairs.
#[pyfunction]
#[pyo3(signature = (n, primary_domain, secondary_domain, skew1=1.1, skew2=1.0, seed=0))]
fn generate_zipf(
    n: u64,
    primary_domain: u64,
    secondary_domain: u64,
    skew1: f64,
    skew2: f64,
    seed: u64,
) -> PyResult<Vec<(String, String)>> {
    let workload = chh_core::generate_zipf(ZipfWorkloadSpec {
        tuple_count: n,
        primary_domain,
        secondary_domain,
        primary_skew: skew1,
        secondary_skew: skew2,
        seed,
    })
    .map_err(py_err)?;
    Ok(workload
        .iter()
        .map(|t| {
            (
                String::from_utf8(t.x).expect("generated keys are ASCII"),
                String::from_utf8(t.y).expect("generated keys are ASCII"),
            )
        })
        .collect())
}

#[pymodule]
fn chh(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyParams>()?;
    m.add_class::<PyMgSummary>()?;
    m.add_class::<PyChhSketch>()?;
    m.add_function(wrap_pyfunction!(solve_params, m)?)?;
    m.add_function(wrap_pyfunction!(exact_chh, m)?)?;
    m.add_function(wrap_pyfunction!(generate_zipf, m)?)?;
    Ok(())
}
