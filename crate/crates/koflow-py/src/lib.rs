//! Python bindings. Matrices are nested lists of rows; representations are dicts with
//! keys `r`, `s`, `n`, `E`, `F` as printed by `koflow irrep`. Results are plain dicts.

use koflow::clifford::{check_relations, irreducible_rep, Chirality, CliffordRep, Signature};
use koflow::flow::{endpoint_flow, spectral_flow_report, FlowOptions};
use koflow::json::{rep_to_string, RepJson};
use koflow::pairs::{orthogonal_pair_parity, pair_index, projection_pair_index, ComplexStructure, ProjectionPair};
use koflow::{Error, Mat};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde_json::{json, Value};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::Invalid(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn wrap<T>(r: koflow::Result<T>) -> PyResult<T> {
    r.map_err(to_py_err)
}

/// Round trip through the `json` module.
fn to_py<'py>(py: Python<'py>, v: &Value) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (v.to_string(),))
}

fn from_py(obj: &Bound<'_, PyAny>) -> PyResult<Value> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

fn module_from_py(obj: &Bound<'_, PyAny>) -> PyResult<CliffordRep> {
    let rep: RepJson = serde_json::from_value(from_py(obj)?)
        .map_err(|e| PyValueError::new_err(format!("representation: {e}")))?;
    wrap(rep.to_rep())
}

fn mat(rows: Vec<Vec<f64>>) -> PyResult<Mat> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != m) {
        return Err(PyValueError::new_err("rows have different lengths"));
    }
    Ok(Mat::from_fn(n, m, |i, j| rows[i][j]))
}

fn chirality(c: Option<&str>) -> PyResult<Option<Chirality>> {
    match c {
        None => Ok(None),
        Some("+") | Some("plus") => Ok(Some(Chirality::Plus)),
        Some("-") | Some("minus") => Ok(Some(Chirality::Minus)),
        Some(other) => Err(PyValueError::new_err(format!("chirality must be '+' or '-', got {other:?}"))),
    }
}

fn class_json(c: &koflow::KOClass) -> Value {
    serde_json::to_value(c).expect("serializable")
}

/// Canonical irreducible representation of Cl_{r,s}.
#[pyfunction]
#[pyo3(signature = (r, s, chirality=None))]
fn irrep<'py>(py: Python<'py>, r: usize, s: usize, chirality: Option<&str>) -> PyResult<Bound<'py, PyAny>> {
    let rep = wrap(irreducible_rep(Signature::new(r, s), self::chirality(chirality)?))?;
    let v: Value = serde_json::from_str(&rep_to_string(&rep)).expect("valid JSON");
    to_py(py, &v)
}

/// Class of a module in its KO group.
#[pyfunction]
fn abs_class<'py>(py: Python<'py>, module: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let v = module_from_py(module)?;
    to_py(py, &class_json(&wrap(koflow::abs_class(&v))?))
}

/// Relation residuals of a representation given as a dict, without rejecting it.
#[pyfunction]
#[pyo3(signature = (module, tol=1e-12))]
fn check<'py>(py: Python<'py>, module: &Bound<'py, PyAny>, tol: f64) -> PyResult<Bound<'py, PyAny>> {
    let rep: RepJson = serde_json::from_value(from_py(module)?)
        .map_err(|e| PyValueError::new_err(format!("representation: {e}")))?;
    let v = wrap(rep.to_rep_unchecked())?;
    let report = wrap(check_relations(&v, tol))?;
    let class = if report.is_clean() { Some(class_json(&wrap(koflow::abs_class(&v))?)) } else { None };
    to_py(
        py,
        &json!({"valid": report.is_clean(), "max_residual": report.max_residual(), "class": class}),
    )
}

/// Index of a pair of complex structures anticommuting with the generators of `module`.
#[pyfunction]
#[pyo3(name = "pair_index", signature = (j0, j1, module=None))]
fn pair_index_of<'py>(
    py: Python<'py>,
    j0: Vec<Vec<f64>>,
    j1: Vec<Vec<f64>>,
    module: Option<&Bound<'py, PyAny>>,
) -> PyResult<Bound<'py, PyAny>> {
    let (a, b) = (mat(j0)?, mat(j1)?);
    let ctx = match module {
        Some(m) => module_from_py(m)?,
        None => CliffordRep::trivial(a.nrows()),
    };
    let s0 = wrap(ComplexStructure::new(a, ctx.clone()))?;
    let s1 = wrap(ComplexStructure::new(b, ctx))?;
    let idx = wrap(pair_index(&s0, &s1))?;
    to_py(py, &json!({"class": class_json(&idx.class), "kernel_dim": idx.kernel_dim()}))
}

/// `dim(ran P ∩ ker Q) − dim(ker P ∩ ran Q)`.
#[pyfunction]
fn projection_index(p: Vec<Vec<f64>>, q: Vec<Vec<f64>>) -> PyResult<i64> {
    let pp = wrap(ProjectionPair::new(mat(p)?, mat(q)?))?;
    wrap(projection_pair_index(&pp))
}

/// `dim ker(I + U0ᵀU1) mod 2`.
#[pyfunction]
fn orthogonal_parity(u0: Vec<Vec<f64>>, u1: Vec<Vec<f64>>) -> PyResult<u8> {
    Ok(wrap(orthogonal_pair_parity(&mat(u0)?, &mat(u1)?))?.value)
}

fn flow_summary<'py>(py: Python<'py>, path: &koflow::flow::SkewPath) -> PyResult<Bound<'py, PyAny>> {
    let report = wrap(spectral_flow_report(path, &FlowOptions::default()))?;
    let endpoint = wrap(endpoint_flow(path))?;
    to_py(
        py,
        &json!({
            "class": class_json(&report.class),
            "endpoint_class": class_json(&endpoint),
            "segments": report.segments.len(),
            "contributing": report.contributing().count(),
        }),
    )
}

/// Flow of the Kitaev ring with `n` sites under flux insertion.
#[pyfunction]
fn kitaev_flow<'py>(py: Python<'py>, n: usize) -> PyResult<Bound<'py, PyAny>> {
    flow_summary(py, &wrap(koflow::models::kitaev_path(n))?)
}

/// Flow of `(1 − 2t) F_{s+1}` on a Cl_{r,s+1} module.
#[pyfunction]
fn normalization_flow<'py>(py: Python<'py>, module: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let v = module_from_py(module)?;
    flow_summary(py, &wrap(koflow::props::normalization_path(&v))?)
}

/// Flux insertion through a ring of `n` sites carrying a Cl_{r,s+1} module.
#[pyfunction]
#[pyo3(signature = (module, n=4))]
fn flux_flow<'py>(py: Python<'py>, module: &Bound<'py, PyAny>, n: usize) -> PyResult<Bound<'py, PyAny>> {
    let v = module_from_py(module)?;
    flow_summary(py, &wrap(koflow::models::flux_path(&v, n))?)
}

/// Runs the command line in process and returns `(exit_code, stdout, stderr)`.
#[pyfunction]
fn cli(args: Vec<String>) -> (i32, String, String) {
    let out = koflow::cli::run_args(std::iter::once("koflow".to_string()).chain(args));
    (out.code, out.stdout, out.stderr)
}

#[pymodule]
#[pyo3(name = "koflow")]
fn koflow_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(irrep, m)?)?;
    m.add_function(wrap_pyfunction!(abs_class, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    m.add_function(wrap_pyfunction!(pair_index_of, m)?)?;
    m.add_function(wrap_pyfunction!(projection_index, m)?)?;
    m.add_function(wrap_pyfunction!(orthogonal_parity, m)?)?;
    m.add_function(wrap_pyfunction!(kitaev_flow, m)?)?;
    m.add_function(wrap_pyfunction!(normalization_flow, m)?)?;
    m.add_function(wrap_pyfunction!(flux_flow, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
