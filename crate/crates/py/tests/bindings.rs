use pyo3::prelude::*;
use pyo3::types::PyDict;

fn with_module<F: for<'py> FnOnce(Python<'py>, Bound<'py, PyAny>)>(f: F) {
    Python::initialize();
    Python::attach(|py| {
        let m = pyo3::wrap_pymodule!(hyperavn_py::hyperavn_py)(py);
        f(py, m.into_bound(py).into_any());
    });
}

#[test]
fn ideal_state_reaches_nine() {
    with_module(|_, m| {
        let st = m.getattr("State").unwrap().call0().unwrap();
        let o: f64 = st.call_method0("expectation").unwrap().extract().unwrap();
        assert!((o - 9.0).abs() < 1e-12);
        let label: String = st.getattr("label").unwrap().extract().unwrap();
        assert_eq!(label, "Psi- x psi-");
    });
}

#[test]
fn reports_come_back_as_dicts() {
    with_module(|_, m| {
        let r = m.call_method1("reference_report", ("fig3",)).unwrap();
        let d = r.cast::<PyDict>().unwrap();
        let o: f64 = d.get_item("o_value").unwrap().unwrap().extract().unwrap();
        assert!((o - 8.1138).abs() < 1e-3);
        let b = m.call_method0("classical_bound").unwrap();
        let max: i32 = b.get_item("max_value").unwrap().extract().unwrap();
        assert_eq!(max, 7);
    });
}

#[test]
fn invalid_input_raises_value_error() {
    with_module(|py, m| {
        let err = m
            .call_method1("reference_report", ("note-in-proof",))
            .unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
        let kwargs = PyDict::new(py);
        kwargs.set_item("noise", "uniform").unwrap();
        kwargs.set_item("v", 1.5).unwrap();
        let err = m
            .getattr("State")
            .unwrap()
            .call((), Some(&kwargs))
            .unwrap_err();
        assert!(err.is_instance_of::<pyo3::exceptions::PyValueError>(py));
    });
}

#[test]
fn seeded_runs_repeat() {
    with_module(|py, m| {
        let kwargs = PyDict::new(py);
        kwargs.set_item("noise", "fitted").unwrap();
        let st = m.getattr("State").unwrap().call((), Some(&kwargs)).unwrap();
        let a: f64 = st
            .call_method1("run_avn", (5000u64, 9u64))
            .unwrap()
            .get_item("o_value")
            .unwrap()
            .extract()
            .unwrap();
        let b: f64 = st
            .call_method1("run_avn", (5000u64, 9u64))
            .unwrap()
            .get_item("o_value")
            .unwrap()
            .extract()
            .unwrap();
        assert_eq!(a, b);
    });
}
