//! Python bindings: sampling, the deterministic law, spectra, edge ensembles,
//! local-law scans and community detection.

use num_complex::Complex64;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

use sbm_spectra::detect::{detect_once, DEFAULT_C};
use sbm_spectra::detlaw::{DeterministicLaw, ETA_FLOOR};
use sbm_spectra::edge::{edge_ensemble_with, tw1_cdf, ExtremalSolver, TwTable};
use sbm_spectra::model::{cumulant_profile, sample_adjacency, SampleOptions, SbmGraph, SbmParams};
use sbm_spectra::spectra::eigen_sym;
use sbm_spectra::verify::{strong_law_scan, GridSpec, STRONG_MARGIN};

fn to_py_err(e: impl Into<sbm_spectra::Error>) -> PyErr {
    let e = e.into();
    if e.is_numerical() {
        PyArithmeticError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn params(n: usize, k: usize, p_s: f64, p_d: f64, seed: u64) -> PyResult<SbmParams> {
    SbmParams::new(n, k, p_s, p_d, seed).map_err(to_py_err)
}

/// Serializes through the standard `json` module so nested records arrive as
/// plain dicts and lists.
fn to_python<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyValueError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// Rescaled adjacency matrix (or its centred version) as a list of rows.
#[pyfunction]
#[pyo3(signature = (n, k, p_s, p_d, seed = 0, centered = false, allow_disconnected = false))]
fn sample(
    n: usize,
    k: usize,
    p_s: f64,
    p_d: f64,
    seed: u64,
    centered: bool,
    allow_disconnected: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let p = params(n, k, p_s, p_d, seed)?;
    let m = if centered {
        if !allow_disconnected {
            p.check_connectivity().map_err(to_py_err)?;
        }
        SbmGraph::sample(&p, seed).map_err(to_py_err)?.centered()
    } else {
        sample_adjacency(&p, seed, SampleOptions { allow_disconnected }).map_err(to_py_err)?
    };
    Ok((0..n).map(|i| m.row(i).to_vec()).collect())
}

/// Eigenvalues of one centred sample, descending.
#[pyfunction]
#[pyo3(signature = (n, k, p_s, p_d, seed = 0))]
fn eigenvalues(n: usize, k: usize, p_s: f64, p_d: f64, seed: u64) -> PyResult<Vec<f64>> {
    let p = params(n, k, p_s, p_d, seed)?;
    let h = SbmGraph::sample(&p, seed).map_err(to_py_err)?.centered();
    Ok(eigen_sym(&h, false).map_err(to_py_err)?.eigenvalues().to_vec())
}

/// `q`, `xi4`, `c4`, `zeta` and `sigma` of the model.
#[pyfunction]
fn profile<'py>(py: Python<'py>, n: usize, k: usize, p_s: f64, p_d: f64) -> PyResult<Bound<'py, PyDict>> {
    let p = params(n, k, p_s, p_d, 0)?;
    let prof = cumulant_profile(&p).map_err(to_py_err)?;
    let d = PyDict::new(py);
    d.set_item("q", prof.q)?;
    d.set_item("xi4", prof.xi4)?;
    d.set_item("c4", prof.c4())?;
    d.set_item("zeta", prof.zeta)?;
    d.set_item("sigma", p.sigma())?;
    Ok(d)
}

/// Limiting spectral law with quartic correction.
#[pyclass(name = "Law", frozen)]
struct PyLaw {
    inner: DeterministicLaw,
}

#[pymethods]
impl PyLaw {
    #[new]
    #[pyo3(signature = (xi4, q, t = 0.0))]
    fn new(xi4: f64, q: f64, t: f64) -> PyResult<Self> {
        Ok(Self {
            inner: DeterministicLaw::new(xi4, q, t).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    fn from_coefficient(c4: f64) -> PyResult<Self> {
        Ok(Self {
            inner: DeterministicLaw::from_coefficient(c4).map_err(to_py_err)?,
        })
    }

    #[staticmethod]
    #[pyo3(signature = (n, k, p_s, p_d, t = 0.0))]
    fn for_model(n: usize, k: usize, p_s: f64, p_d: f64, t: f64) -> PyResult<Self> {
        let prof = cumulant_profile(&params(n, k, p_s, p_d, 0)?).map_err(to_py_err)?;
        Ok(Self {
            inner: DeterministicLaw::from_profile(&prof, t).map_err(to_py_err)?,
        })
    }

    #[getter]
    fn c4(&self) -> f64 {
        self.inner.c4()
    }

    #[getter]
    fn edge(&self) -> f64 {
        self.inner.edge()
    }

    #[getter]
    fn edge_asymptotic(&self) -> f64 {
        self.inner.edge_asymptotic()
    }

    fn mtilde(&self, energy: f64, eta: f64) -> PyResult<Complex64> {
        self.inner.mtilde(Complex64::new(energy, eta)).map_err(to_py_err)
    }

    #[pyo3(signature = (energy, eta_floor = ETA_FLOOR))]
    fn rho(&self, energy: f64, eta_floor: f64) -> PyResult<f64> {
        self.inner.rho(energy, eta_floor).map_err(to_py_err)
    }

    fn integrated_density(&self, e1: f64, e2: f64) -> PyResult<f64> {
        self.inner.integrated_density(e1, e2).map_err(to_py_err)
    }

    fn __repr__(&self) -> String {
        format!("Law(c4={}, edge={})", self.inner.c4(), self.inner.edge())
    }
}

/// Largest eigenvalues of `trials` centred samples with both edge
/// rescalings.
#[pyfunction]
#[pyo3(signature = (n, k, p_s, p_d, seed = 0, trials = 100, solver = "lanczos"))]
fn edge_ensemble<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    p_s: f64,
    p_d: f64,
    seed: u64,
    trials: usize,
    solver: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let solver = match solver {
        "lanczos" => ExtremalSolver::Lanczos,
        "dense" => ExtremalSolver::Dense,
        other => return Err(PyValueError::new_err(format!("unknown solver {other:?}"))),
    };
    let p = params(n, k, p_s, p_d, seed)?;
    let law = DeterministicLaw::from_profile(&cumulant_profile(&p).map_err(to_py_err)?, 0.0).map_err(to_py_err)?;
    let ens = py
        .detach(|| edge_ensemble_with(&p, trials, &law, solver))
        .map_err(to_py_err)?;
    let out = to_python(py, &ens)?;
    let summary = ens.summary(TwTable::embedded()).map_err(to_py_err)?;
    out.set_item("summary", to_python(py, &summary)?)?;
    Ok(out)
}

/// Tracy–Widom (β = 1) distribution function.
#[pyfunction]
fn tw1(s: f64) -> f64 {
    tw1_cdf(s, TwTable::embedded())
}

/// Strong local-law scan over the default grid.
#[pyfunction]
#[pyo3(signature = (n, k, p_s, p_d, seed = 0, trials = 20, margin = STRONG_MARGIN))]
fn strong_law<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    p_s: f64,
    p_d: f64,
    seed: u64,
    trials: usize,
    margin: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let p = params(n, k, p_s, p_d, seed)?;
    let report = py
        .detach(|| strong_law_scan(&p, &GridSpec::default(), trials, margin))
        .map_err(to_py_err)?;
    to_python(py, &report)
}

/// One detection trial: outlier count, gap report and (optionally) the
/// accuracy of spectral clustering.
#[pyfunction]
#[pyo3(signature = (n, k, p_s, p_d, seed = 0, c = DEFAULT_C, partition = true))]
fn detect<'py>(
    py: Python<'py>,
    n: usize,
    k: usize,
    p_s: f64,
    p_d: f64,
    seed: u64,
    c: f64,
    partition: bool,
) -> PyResult<Bound<'py, PyAny>> {
    let p = params(n, k, p_s, p_d, seed)?;
    let out = py.detach(|| detect_once(&p, seed, c, partition)).map_err(to_py_err)?;
    to_python(py, &out)
}

#[pymodule]
pub fn sbm_spectra_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(sample, m)?)?;
    m.add_function(wrap_pyfunction!(eigenvalues, m)?)?;
    m.add_function(wrap_pyfunction!(profile, m)?)?;
    m.add_function(wrap_pyfunction!(edge_ensemble, m)?)?;
    m.add_function(wrap_pyfunction!(tw1, m)?)?;
    m.add_function(wrap_pyfunction!(strong_law, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_class::<PyLaw>()?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}
