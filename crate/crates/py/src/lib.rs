//! Python bindings for `hyperavn`.
//!
//! Structured results (reports, bounds) are returned as plain `dict`s built
//! from their JSON form, so they pickle and print without extra glue.

use std::f64::consts::PI;

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyModule;

use hyperavn::apparatus::{
    coincidence_curve, extract_visibility, resonance_symmetry, DelayScanConfig,
};
use hyperavn::cli::{fitted_noise, AvnDocument};
use hyperavn::error::Error;
use hyperavn::harness::{self, exact_term_values, CompositeMode};
use hyperavn::lhv::{self, CLASSICAL_BOUND};
use hyperavn::linalg::expectation;
use hyperavn::observables::{cabello_operator, terms};
use hyperavn::states::{self, NoiseModel, PiFlavor};

fn to_py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidArgument(_)
        | Error::UndefinedVisibility(_)
        | Error::IncompleteTerms(_)
        | Error::DimensionMismatch { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn json_to_py<'py, T: serde::Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn parse_flavor(s: &str) -> PyResult<PiFlavor> {
    match s.to_ascii_lowercase().as_str() {
        "phi" => Ok(PiFlavor::Phi),
        "psi" => Ok(PiFlavor::Psi),
        other => Err(PyValueError::new_err(format!(
            "pi_flavor must be 'phi' or 'psi', got '{other}'"
        ))),
    }
}

/// A hyperentangled pair together with a noise model.
#[pyclass(module = "hyperavn_py", name = "State", frozen)]
struct PyState {
    state: states::HyperState,
    noise: NoiseModel,
}

impl PyState {
    fn rho(&self) -> PyResult<hyperavn::linalg::DensityMatrix> {
        states::apply_noise(&self.state, &self.noise).map_err(to_py_err)
    }
}

#[pymethods]
impl PyState {
    /// `noise` is one of `None` (pure), `"uniform"` (uses `v`), `"werner"`
    /// (uses `v_pi`, `v_k`) or `"fitted"` (per-DOF visibilities fitted to the
    /// published single-DOF terms).
    #[new]
    #[pyo3(signature = (pi_flavor="psi", theta=PI, phi=PI, noise=None, v=1.0, v_pi=1.0, v_k=1.0))]
    fn new(
        pi_flavor: &str,
        theta: f64,
        phi: f64,
        noise: Option<&str>,
        v: f64,
        v_pi: f64,
        v_k: f64,
    ) -> PyResult<Self> {
        let noise = match noise {
            None => NoiseModel::none(),
            Some("uniform") => NoiseModel::UniformVisibility { v },
            Some("werner") => NoiseModel::WernerPerDof { v_pi, v_k },
            Some("fitted") => fitted_noise(),
            Some(other) => {
                return Err(PyValueError::new_err(format!(
                    "unknown noise kind '{other}'"
                )))
            }
        };
        noise.validate().map_err(to_py_err)?;
        Ok(PyState {
            state: states::hyper_state(parse_flavor(pi_flavor)?, theta, phi),
            noise,
        })
    }

    #[getter]
    fn label(&self) -> String {
        self.state.label()
    }

    /// Sixteen amplitudes in the (π₁, k₁, π₂, k₂) basis order.
    fn amplitudes(&self) -> Vec<Complex64> {
        self.state.ket().amplitudes().to_vec()
    }

    /// Row-major 16×16 density matrix after noise.
    fn density_matrix(&self) -> PyResult<Vec<Vec<Complex64>>> {
        let rho = self.rho()?;
        let m = rho.matrix();
        Ok((0..m.dim())
            .map(|r| (0..m.dim()).map(|c| m.get(r, c)).collect())
            .collect())
    }

    fn purity(&self) -> PyResult<f64> {
        Ok(self.rho()?.purity())
    }

    /// Exact ⟨O⟩.
    fn expectation(&self) -> PyResult<f64> {
        expectation(&cabello_operator().matrix, &self.rho()?).map_err(to_py_err)
    }

    /// Exact expectation of each of the nine terms, without their signs.
    fn term_values(&self) -> PyResult<Vec<f64>> {
        exact_term_values(&self.rho()?).map_err(to_py_err)
    }

    /// +1 for a coincidence peak, −1 for a dip.
    fn resonance_symmetry(&self) -> f64 {
        resonance_symmetry(&self.state)
    }

    /// Simulated counting run; returns the report as a dict.
    #[pyo3(signature = (n_per_setting=harness::DEFAULT_EVENTS_PER_SETTING, seed=1, composite_mode="factorized"))]
    fn run_avn<'py>(
        &self,
        py: Python<'py>,
        n_per_setting: u64,
        seed: u64,
        composite_mode: &str,
    ) -> PyResult<Bound<'py, PyAny>> {
        let mode: CompositeMode = composite_mode.parse().map_err(to_py_err)?;
        let report = py
            .detach(|| harness::run_avn(&self.state, &self.noise, n_per_setting, seed, mode))
            .map_err(to_py_err)?;
        json_to_py(py, &AvnDocument::new(&report, None, None))
    }

    fn __repr__(&self) -> String {
        format!("State({}, noise={:?})", self.state.label(), self.noise)
    }
}

/// Term labels with their signs, in order.
#[pyfunction]
fn term_labels() -> Vec<(u8, i8, String)> {
    terms().iter().map(|t| (t.id, t.sign, t.label())).collect()
}

/// Row-major 16×16 matrix of the full operator.
#[pyfunction]
fn cabello_matrix() -> Vec<Vec<Complex64>> {
    let m = cabello_operator().matrix;
    (0..m.dim())
        .map(|r| (0..m.dim()).map(|c| m.get(r, c)).collect())
        .collect()
}

/// Exhaustive local-hidden-variable sweep.
#[pyfunction]
fn classical_bound(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    let report = py.detach(lhv::classical_bound);
    json_to_py(py, &report)
}

/// Aggregates a built-in reference dataset (`"fig3"` or `"note-in-proof"`).
#[pyfunction]
fn reference_report<'py>(py: Python<'py>, dataset: &str) -> PyResult<Bound<'py, PyAny>> {
    let data = harness::reference_dataset(dataset).map_err(to_py_err)?;
    let report = harness::aggregate(&data).map_err(to_py_err)?;
    json_to_py(py, &AvnDocument::new(&report, None, Some(dataset)))
}

/// Aggregates user-supplied `(term_id, value, stderr)` triples.
#[pyfunction]
fn aggregate<'py>(py: Python<'py>, estimates: Vec<(u8, f64, f64)>) -> PyResult<Bound<'py, PyAny>> {
    let data: Vec<_> = estimates
        .into_iter()
        .map(|(id, v, s)| harness::TermEstimate::new(id, v, s))
        .collect();
    let report = harness::aggregate(&data).map_err(to_py_err)?;
    json_to_py(py, &AvnDocument::new(&report, None, None))
}

/// Coincidence rate versus delay for a resonance of the given symmetry.
#[pyfunction]
#[pyo3(signature = (symmetry, visibility=0.90, baseline_rate=1000.0))]
fn scan_delay(symmetry: f64, visibility: f64, baseline_rate: f64) -> PyResult<Vec<(f64, f64)>> {
    let cfg = DelayScanConfig {
        visibility,
        baseline_rate,
        ..DelayScanConfig::default()
    };
    coincidence_curve(symmetry, &cfg).map_err(to_py_err)
}

#[pyfunction(name = "extract_visibility")]
fn py_extract_visibility(curve: Vec<(f64, f64)>) -> PyResult<f64> {
    extract_visibility(&curve).map_err(to_py_err)
}

#[pymodule]
pub fn hyperavn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyState>()?;
    m.add_function(wrap_pyfunction!(term_labels, m)?)?;
    m.add_function(wrap_pyfunction!(cabello_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(classical_bound, m)?)?;
    m.add_function(wrap_pyfunction!(reference_report, m)?)?;
    m.add_function(wrap_pyfunction!(aggregate, m)?)?;
    m.add_function(wrap_pyfunction!(scan_delay, m)?)?;
    m.add_function(wrap_pyfunction!(py_extract_visibility, m)?)?;
    m.add("CLASSICAL_BOUND", CLASSICAL_BOUND)?;
    Ok(())
}
