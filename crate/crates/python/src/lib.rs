//! Python bindings for the `haar_newton` solvers.

use std::sync::{Arc, Mutex};

use haar_newton::analysis;
use haar_newton::bench::{self, OutputFormat};
use haar_newton::{EvalCounters, FsVariant, Method, Outcome, StopCriteria, Trace};
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl ToString) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// First exception raised by a Python callable during a run.
type ErrorSlot = Arc<Mutex<Option<PyErr>>>;

fn py_scalar_fn(callable: Py<PyAny>, slot: ErrorSlot) -> haar_newton::problem::ScalarFn {
    Arc::new(move |x: f64| {
        Python::attach(|py| match callable.call1(py, (x,)).and_then(|v| v.extract::<f64>(py)) {
            Ok(v) => v,
            Err(e) => {
                slot.lock().unwrap().get_or_insert(e);
                f64::NAN
            }
        })
    })
}

/// A scalar equation `f(x) = 0` with its analytic derivative.
#[pyclass(module = "haar_newton_py", name = "Problem", frozen)]
struct PyProblem {
    inner: haar_newton::Problem,
    x0: Option<f64>,
    errors: ErrorSlot,
}

impl PyProblem {
    /// Re-raises the first exception a Python callable threw, if any.
    fn take_error(&self) -> PyResult<()> {
        match self.errors.lock().unwrap().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

#[pymethods]
impl PyProblem {
    #[new]
    fn new(name: String, f: Py<PyAny>, df: Py<PyAny>) -> PyResult<Self> {
        if name.is_empty() {
            return Err(value_err("problem name must be non-empty"));
        }
        let errors = ErrorSlot::default();
        let inner = haar_newton::Problem::from_arcs(
            name,
            py_scalar_fn(f, Arc::clone(&errors)),
            py_scalar_fn(df, Arc::clone(&errors)),
        );
        Ok(Self {
            inner,
            x0: None,
            errors,
        })
    }

    /// One of the built-in test equations `f1` .. `f7`.
    #[staticmethod]
    fn builtin(name: &str) -> PyResult<Self> {
        let entry = bench::suite_entry(name).map_err(value_err)?;
        Ok(Self {
            inner: entry.problem,
            x0: Some(entry.x0),
            errors: ErrorSlot::default(),
        })
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    /// Standard starting point of a built-in equation, `None` otherwise.
    #[getter]
    fn x0(&self) -> Option<f64> {
        self.x0
    }

    fn f(&self, py: Python<'_>, x: f64) -> PyResult<f64> {
        let v = py.detach(|| self.inner.f(x));
        self.take_error().map(|_| v)
    }

    fn df(&self, py: Python<'_>, x: f64) -> PyResult<f64> {
        let v = py.detach(|| self.inner.df(x));
        self.take_error().map(|_| v)
    }

    fn __repr__(&self) -> String {
        format!("Problem({:?})", self.inner.name())
    }
}

#[pyclass(module = "haar_newton_py", name = "Outcome", frozen)]
#[derive(Debug)]
struct PyOutcome {
    inner: Outcome,
}

#[pymethods]
impl PyOutcome {
    /// `Converged`, `Diverged`, `MaxIterReached` or `DerivativeBreakdown`.
    #[getter]
    fn status(&self) -> &'static str {
        self.inner.status.as_str()
    }

    #[getter]
    fn converged(&self) -> bool {
        self.inner.status.is_converged()
    }

    #[getter]
    fn root(&self) -> f64 {
        self.inner.root
    }

    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }

    #[getter]
    fn nfe(&self) -> u64 {
        self.inner.nfe
    }

    #[getter]
    fn n_f(&self) -> u64 {
        self.inner.trace.counters.n_f
    }

    #[getter]
    fn n_df(&self) -> u64 {
        self.inner.trace.counters.n_df
    }

    #[getter]
    fn iterates(&self) -> Vec<f64> {
        self.inner.trace.iterates.clone()
    }

    #[getter]
    fn residuals(&self) -> Vec<f64> {
        self.inner.trace.residuals.clone()
    }

    /// Table label: the root to 15 significant digits, `Diverse` or `Breakdown`.
    fn classify(&self) -> String {
        analysis::classify(&self.inner)
    }

    /// Computational order of convergence; measured against the final iterate unless `root` is given.
    #[pyo3(signature = (root=None))]
    fn coc(&self, root: Option<f64>) -> PyResult<f64> {
        analysis::coc(&self.inner.trace, root.unwrap_or(self.inner.root))
            .map_err(|e| PyArithmeticError::new_err(e.to_string()))
    }

    #[pyo3(signature = (root=None))]
    fn empirical_error_constant(&self, root: Option<f64>) -> PyResult<f64> {
        analysis::empirical_error_constant(&self.inner.trace, root.unwrap_or(self.inner.root))
            .map_err(|e| PyArithmeticError::new_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "Outcome(status={}, root={}, iterations={}, nfe={})",
            self.inner.status, self.inner.root, self.inner.iterations, self.inner.nfe
        )
    }
}

fn parse_method(label: &str, points: Option<usize>, fs_variant: Option<&str>) -> PyResult<Method> {
    let method: Method = label.parse().map_err(value_err)?;
    Ok(match (method, points, fs_variant) {
        (Method::HaarNewton { .. }, Some(0), _) => return Err(value_err("points must be at least 1")),
        (Method::HaarNewton { .. }, Some(points), _) => Method::HaarNewton { points },
        (Method::Fs(_), _, Some(v)) => Method::Fs(v.parse::<FsVariant>().map_err(value_err)?),
        (m, _, _) => m,
    })
}

/// Runs `method` on `problem` from `x0` (default: the built-in starting point).
#[pyfunction]
#[pyo3(signature = (problem, method="new", x0=None, *, points=None, fs_variant=None, tol=StopCriteria::DEFAULT_TOL, max_iter=StopCriteria::DEFAULT_MAX_ITER, escape_radius=StopCriteria::DEFAULT_ESCAPE_RADIUS))]
#[allow(clippy::too_many_arguments)]
fn iterate(
    py: Python<'_>,
    problem: &PyProblem,
    method: &str,
    x0: Option<f64>,
    points: Option<usize>,
    fs_variant: Option<&str>,
    tol: f64,
    max_iter: usize,
    escape_radius: f64,
) -> PyResult<PyOutcome> {
    let method = parse_method(method, points, fs_variant)?;
    let x0 = x0
        .or(problem.x0)
        .ok_or_else(|| value_err("x0 is required for user-defined problems"))?;
    let criteria = StopCriteria::new(tol, tol, max_iter, escape_radius).map_err(value_err)?;
    let inner = py.detach(|| haar_newton::iterate(method, &problem.inner, x0, &criteria));
    problem.take_error()?;
    Ok(PyOutcome { inner })
}

/// Applies one step of `method` at `x`; returns `(x_next, n_f, n_df)`.
#[pyfunction]
#[pyo3(signature = (problem, method, x, *, points=None, fs_variant=None))]
fn step(
    py: Python<'_>,
    problem: &PyProblem,
    method: &str,
    x: f64,
    points: Option<usize>,
    fs_variant: Option<&str>,
) -> PyResult<(f64, u64, u64)> {
    let method = parse_method(method, points, fs_variant)?;
    let mut counters = EvalCounters::new();
    let next = py.detach(|| method.step(&problem.inner, x, &mut counters));
    problem.take_error()?;
    let next = next.map_err(|e| PyArithmeticError::new_err(e.to_string()))?;
    Ok((next, counters.n_f, counters.n_df))
}

/// Haar-rule approximation of `∫_a^b g(t) dt` on `points` nodes.
#[pyfunction]
fn haar_indefinite_integral(py: Python<'_>, g: Py<PyAny>, a: f64, b: f64, points: usize) -> PyResult<f64> {
    let mut err = None;
    let v = haar_newton::haar_indefinite_integral(
        |t| match g.call1(py, (t,)).and_then(|v| v.extract::<f64>(py)) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                f64::NAN
            }
        },
        a,
        b,
        points,
    )
    .map_err(value_err)?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

#[pyfunction]
fn resolution_points(j1: u32) -> PyResult<usize> {
    haar_newton::resolution_points(j1).map_err(value_err)
}

#[pyfunction]
fn theoretical_error_constant(c2: f64, c3: f64, n_points: usize) -> PyResult<f64> {
    if n_points == 0 {
        return Err(value_err("n_points must be at least 1"));
    }
    Ok(analysis::theoretical_error_constant(c2, c3, n_points))
}

fn trace_from(iterates: Vec<f64>) -> Trace {
    let residuals = vec![f64::NAN; iterates.len()];
    Trace {
        iterates,
        residuals,
        counters: EvalCounters::default(),
    }
}

/// Computational order of convergence of an iterate sequence towards `root`.
#[pyfunction]
fn coc(iterates: Vec<f64>, root: f64) -> PyResult<f64> {
    analysis::coc(&trace_from(iterates), root).map_err(|e| PyArithmeticError::new_err(e.to_string()))
}

#[pyfunction]
fn empirical_error_constant(iterates: Vec<f64>, root: f64) -> PyResult<f64> {
    analysis::empirical_error_constant(&trace_from(iterates), root)
        .map_err(|e| PyArithmeticError::new_err(e.to_string()))
}

/// `(name, x0)` for each built-in equation.
#[pyfunction]
fn builtin_suite() -> Vec<(String, f64)> {
    bench::builtin_suite()
        .into_iter()
        .map(|e| (e.problem.name().to_string(), e.x0))
        .collect()
}

/// Runs the comparison grid and returns it rendered as `text`, `csv` or `json`.
#[pyfunction]
#[pyo3(signature = (functions=None, methods=None, format="csv", *, tol=StopCriteria::DEFAULT_TOL, max_iter=StopCriteria::DEFAULT_MAX_ITER))]
fn compare(
    py: Python<'_>,
    functions: Option<Vec<String>>,
    methods: Option<Vec<String>>,
    format: &str,
    tol: f64,
    max_iter: usize,
) -> PyResult<String> {
    let format: OutputFormat = format.parse().map_err(value_err)?;
    let suite = match functions {
        Some(names) => names
            .iter()
            .map(|n| bench::suite_entry(n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(value_err)?,
        None => bench::builtin_suite(),
    };
    let methods = match methods {
        Some(labels) => labels
            .iter()
            .map(|l| l.parse::<Method>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(value_err)?,
        None => Method::standard_lineup(),
    };
    let criteria = StopCriteria::with_tol(tol)
        .and_then(|c| StopCriteria::new(c.step_tol, c.residual_tol, max_iter, c.escape_radius))
        .map_err(value_err)?;
    Ok(py.detach(|| bench::format_table(&bench::run_comparison(&suite, &methods, &criteria), format)))
}

#[pymodule]
fn haar_newton_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProblem>()?;
    m.add_class::<PyOutcome>()?;
    m.add_function(wrap_pyfunction!(iterate, m)?)?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(haar_indefinite_integral, m)?)?;
    m.add_function(wrap_pyfunction!(resolution_points, m)?)?;
    m.add_function(wrap_pyfunction!(theoretical_error_constant, m)?)?;
    m.add_function(wrap_pyfunction!(coc, m)?)?;
    m.add_function(wrap_pyfunction!(empirical_error_constant, m)?)?;
    m.add_function(wrap_pyfunction!(builtin_suite, m)?)?;
    m.add_function(wrap_pyfunction!(compare, m)?)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_options() {
        assert_eq!(
            parse_method("new", Some(4), None).unwrap(),
            Method::HaarNewton { points: 4 }
        );
        assert_eq!(parse_method("new", None, None).unwrap(), Method::haar_newton());
        assert_eq!(
            parse_method("fs", None, Some("as-printed")).unwrap(),
            Method::Fs(FsVariant::AsPrinted)
        );
        assert_eq!(parse_method("wf", Some(8), Some("as-printed")).unwrap(), Method::Wf);
    }

    #[test]
    fn python_callables_drive_the_solver() {
        Python::initialize();
        Python::attach(|py| {
            let f = py
                .eval(c"lambda x: __import__('math').cos(x) - x", None, None)
                .unwrap()
                .unbind();
            let df = py
                .eval(c"lambda x: -__import__('math').sin(x) - 1.0", None, None)
                .unwrap()
                .unbind();
            let p = PyProblem::new("f2".into(), f, df).unwrap();
            let out = iterate(py, &p, "new", Some(1.2), None, None, 1e-15, 100, 1e8).unwrap();
            assert!(out.converged());
            assert!((out.root() - 0.739085133215161).abs() < 1e-12);
            assert_eq!(out.nfe(), 4 * out.iterations() as u64);
        });
    }

    #[test]
    fn python_exceptions_propagate() {
        Python::initialize();
        Python::attach(|py| {
            let f = py.eval(c"lambda x: 1.0 / 0.0", None, None).unwrap().unbind();
            let df = py.eval(c"lambda x: 1.0", None, None).unwrap().unbind();
            let p = PyProblem::new("bad".into(), f, df).unwrap();
            let err = iterate(py, &p, "newton", Some(1.0), None, None, 1e-15, 100, 1e8).unwrap_err();
            assert!(err.is_instance_of::<pyo3::exceptions::PyZeroDivisionError>(py));
        });
    }
}
