//! Python bindings: spaces, norm-power functionals, moduli estimators,
//! discrete conjugates and the verifier.

use bregman_core::moduli::{self, power_type_fit as fit_curve};
use bregman_core::verifier::{check_ids as ids, run_check as run_one, CurveCache};
use bregman_core::{EstimatorConfig, GaugeExponent, GridFunction, ModulusCurve, ModulusKind, RunOptions, Sense, SpaceSpec, SweepSpec};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: bregman_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn estimator(seed: u64, samples: usize) -> EstimatorConfig {
    EstimatorConfig {
        seed,
        samples,
        ..EstimatorConfig::default()
    }
}

/// Weighted `l_r` norm on `R^n`.
#[pyclass(name = "Space", frozen, skip_from_py_object, module = "bregman_py")]
#[derive(Clone)]
struct PySpace {
    inner: SpaceSpec,
}

#[pymethods]
impl PySpace {
    #[new]
    #[pyo3(signature = (dim, r, weights=None))]
    fn new(dim: usize, r: f64, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let inner = match weights {
            Some(w) if w.len() != dim => {
                return Err(PyValueError::new_err(format!("{} weights for dimension {dim}", w.len())));
            }
            Some(w) => SpaceSpec::with_weights(r, w),
            None => SpaceSpec::new(dim, r),
        }
        .map_err(err)?;
        Ok(PySpace { inner })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn r(&self) -> f64 {
        self.inner.r()
    }

    #[getter]
    fn r_conj(&self) -> f64 {
        self.inner.r_conj()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.weights().to_vec()
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    fn dual(&self) -> PySpace {
        PySpace { inner: self.inner.dual() }
    }

    fn norm(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.norm(&x).map_err(err)
    }

    fn dual_norm(&self, xstar: Vec<f64>) -> PyResult<f64> {
        self.inner.dual_norm(&xstar).map_err(err)
    }

    /// The selection `j_p(x)` of the duality mapping.
    fn duality_map(&self, p: f64, x: Vec<f64>) -> PyResult<Vec<f64>> {
        let p = GaugeExponent::new(p).map_err(err)?;
        bregman_core::duality_map(&self.inner, p, &x.into()).map(|j| j.into_coords()).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Space({})", self.inner.label())
    }
}

/// A convex functional on a space: `(1/p)||.||^p` or the norm itself.
#[pyclass(name = "Functional", frozen, skip_from_py_object, module = "bregman_py")]
#[derive(Clone)]
struct PyFunctional {
    inner: bregman_core::Functional,
}

#[pymethods]
impl PyFunctional {
    #[staticmethod]
    fn norm_power(space: &PySpace, p: f64) -> PyResult<Self> {
        let p = GaugeExponent::new(p).map_err(err)?;
        Ok(PyFunctional {
            inner: bregman_core::Functional::norm_power(space.inner.clone(), p),
        })
    }

    #[staticmethod]
    fn plain_norm(space: &PySpace) -> Self {
        PyFunctional {
            inner: bregman_core::Functional::plain_norm(space.inner.clone()),
        }
    }

    #[getter]
    fn space(&self) -> PySpace {
        PySpace {
            inner: self.inner.space().clone(),
        }
    }

    #[getter]
    fn label(&self) -> String {
        self.inner.label()
    }

    fn __call__(&self, x: Vec<f64>) -> PyResult<f64> {
        self.inner.eval(&x).map_err(err)
    }

    fn subgradient(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        self.inner.subgradient(&x).map(|j| j.into_coords()).map_err(err)
    }

    /// `F(y) - F(x) - <x*, y - x>`, with `x*` the subgradient at `x` unless given.
    #[pyo3(signature = (y, x, xstar=None))]
    fn bregman(&self, y: Vec<f64>, x: Vec<f64>, xstar: Option<Vec<f64>>) -> PyResult<f64> {
        let xstar = match xstar {
            Some(s) => s,
            None => self.inner.subgradient(&x).map_err(err)?.into_coords(),
        };
        self.inner.bregman(&xstar, &y, &x).map_err(err)
    }

    fn sym_bregman(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        self.inner.sym_bregman(&x, &y).map_err(err)
    }

    fn conjugate(&self) -> PyResult<PyFunctional> {
        self.inner.conjugate().map(|inner| PyFunctional { inner }).map_err(err)
    }

    fn young_gap(&self, x: Vec<f64>, xstar: Vec<f64>) -> PyResult<f64> {
        self.inner.young_gap(&x, &xstar).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Functional({})", self.inner.label())
    }
}

fn curve_dict<'py>(py: Python<'py>, c: &ModulusCurve) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("kind", c.kind.name())?;
    d.set_item("taus", c.taus.clone())?;
    d.set_item("values", c.values.clone())?;
    let w: Vec<Vec<Vec<f64>>> = c
        .witnesses
        .iter()
        .map(|ws| ws.iter().map(|p| p.coords().to_vec()).collect())
        .collect();
    d.set_item("witnesses", w)?;
    Ok(d)
}

/// Estimated `rho_X` on `taus`, as a dict with `taus`, `values`, `witnesses`.
#[pyfunction]
#[pyo3(signature = (space, taus, seed=42, samples=4096))]
fn space_rho<'py>(py: Python<'py>, space: &PySpace, taus: Vec<f64>, seed: u64, samples: usize) -> PyResult<Bound<'py, PyDict>> {
    let c = py
        .detach(|| moduli::space_rho(&space.inner, &taus, &estimator(seed, samples)))
        .map_err(err)?;
    curve_dict(py, &c)
}

/// Estimated `delta_X` on `eps` in `(0, 2]`.
#[pyfunction]
#[pyo3(signature = (space, eps, seed=42, samples=4096))]
fn space_delta<'py>(py: Python<'py>, space: &PySpace, eps: Vec<f64>, seed: u64, samples: usize) -> PyResult<Bound<'py, PyDict>> {
    let c = py
        .detach(|| moduli::space_delta(&space.inner, &eps, &estimator(seed, samples)))
        .map_err(err)?;
    curve_dict(py, &c)
}

fn func_curve<'py>(
    py: Python<'py>,
    f: &PyFunctional,
    x: Vec<f64>,
    taus: Vec<f64>,
    xstar: Option<Vec<f64>>,
    cfg: EstimatorConfig,
    delta: bool,
) -> PyResult<Bound<'py, PyDict>> {
    let x: bregman_core::Point = x.into();
    let xstar = match xstar {
        Some(s) => s.into(),
        None => f.inner.subgradient(&x).map_err(err)?,
    };
    let c = py
        .detach(|| {
            if delta {
                moduli::func_delta(&f.inner, &x, &xstar, &taus, &cfg)
            } else {
                moduli::func_rho(&f.inner, &x, &xstar, &taus, &cfg)
            }
        })
        .map_err(err)?;
    curve_dict(py, &c)
}

/// Estimated `rho_{F,x}^{x*}` on `taus`.
#[pyfunction]
#[pyo3(signature = (f, x, taus, xstar=None, seed=42, samples=4096))]
fn func_rho<'py>(py: Python<'py>, f: &PyFunctional, x: Vec<f64>, taus: Vec<f64>, xstar: Option<Vec<f64>>, seed: u64, samples: usize) -> PyResult<Bound<'py, PyDict>> {
    func_curve(py, f, x, taus, xstar, estimator(seed, samples), false)
}

/// Estimated `delta_{F,x}^{x*}` on `taus`.
#[pyfunction]
#[pyo3(signature = (f, x, taus, xstar=None, seed=42, samples=4096))]
fn func_delta<'py>(py: Python<'py>, f: &PyFunctional, x: Vec<f64>, taus: Vec<f64>, xstar: Option<Vec<f64>>, seed: u64, samples: usize) -> PyResult<Bound<'py, PyDict>> {
    func_curve(py, f, x, taus, xstar, estimator(seed, samples), true)
}

/// Power-type fit of a modulus on `(0, tau_max]`.
#[pyfunction]
#[pyo3(signature = (taus, values, tau_max, kind="func-rho"))]
fn power_type_fit<'py>(py: Python<'py>, taus: Vec<f64>, values: Vec<f64>, tau_max: f64, kind: &str) -> PyResult<Bound<'py, PyDict>> {
    if taus.len() != values.len() {
        return Err(PyValueError::new_err("taus and values differ in length"));
    }
    let kind = ModulusKind::parse(kind).map_err(err)?;
    let curve = ModulusCurve {
        kind,
        witnesses: Vec::new(),
        estimator: None,
        sense: Sense::for_kind(kind),
        taus,
        values,
    };
    let fit = fit_curve(&curve, tau_max).map_err(err)?;
    let d = PyDict::new(py);
    d.set_item("slope", fit.slope)?;
    d.set_item("exponent", fit.exponent)?;
    d.set_item("constant", fit.constant)?;
    d.set_item("points", fit.points)?;
    Ok(d)
}

/// Discrete Legendre transform of `x -> y` at the increasing `slopes`.
#[pyfunction]
fn legendre_transform(xs: Vec<f64>, ys: Vec<f64>, slopes: Vec<f64>) -> PyResult<Vec<f64>> {
    let f = GridFunction::new(xs, ys).map_err(err)?;
    bregman_core::legendre_transform(&f, &slopes)
        .map(|g| g.ys().to_vec())
        .map_err(err)
}

/// Convex lower envelope of `x -> y` on the same abscissae.
#[pyfunction]
fn biconjugate(xs: Vec<f64>, ys: Vec<f64>) -> PyResult<Vec<f64>> {
    let f = GridFunction::new(xs, ys).map_err(err)?;
    bregman_core::biconjugate(&f).map(|g| g.ys().to_vec()).map_err(err)
}

#[pyfunction]
fn check_ids() -> Vec<&'static str> {
    ids()
}

/// The default sweep, or one space and exponent when `r` is given.
#[allow(clippy::too_many_arguments)]
fn sweep(seed: u64, r: Option<f64>, dim: usize, p: Option<f64>, tau_bar: f64, grid: usize, samples: usize) -> PyResult<SweepSpec> {
    let mut s = SweepSpec::default_sweep(seed);
    s.tau_bar = tau_bar;
    s.grid = grid;
    s.directions = samples;
    if let Some(r) = r {
        s.spaces = vec![SpaceSpec::new(dim, r).map_err(err)?];
    }
    if let Some(p) = p {
        s.ps = vec![p];
    }
    s.validate().map_err(err)?;
    Ok(s)
}

/// Runs every check and returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (seed=42, r=None, dim=2, p=None, tau_bar=1.0, grid=100, samples=4096))]
#[allow(clippy::too_many_arguments)]
fn verify(py: Python<'_>, seed: u64, r: Option<f64>, dim: usize, p: Option<f64>, tau_bar: f64, grid: usize, samples: usize) -> PyResult<String> {
    let s = sweep(seed, r, dim, p, tau_bar, grid, samples)?;
    py.detach(|| bregman_core::run_all(&s, RunOptions::default()).and_then(|rep| rep.to_json()))
        .map_err(err)
}

/// Runs one check and returns its report as JSON text.
#[pyfunction]
#[pyo3(signature = (check_id, seed=42, r=None, dim=2, p=None, tau_bar=1.0, grid=100, samples=4096))]
#[allow(clippy::too_many_arguments)]
fn run_check(py: Python<'_>, check_id: &str, seed: u64, r: Option<f64>, dim: usize, p: Option<f64>, tau_bar: f64, grid: usize, samples: usize) -> PyResult<String> {
    let s = sweep(seed, r, dim, p, tau_bar, grid, samples)?;
    let rep = py
        .detach(|| run_one(check_id, &s, &CurveCache::new(s.estimator())))
        .map_err(err)?;
    serde_json::to_string_pretty(&rep).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
fn bregman_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PySpace>()?;
    m.add_class::<PyFunctional>()?;
    m.add_function(wrap_pyfunction!(space_rho, m)?)?;
    m.add_function(wrap_pyfunction!(space_delta, m)?)?;
    m.add_function(wrap_pyfunction!(func_rho, m)?)?;
    m.add_function(wrap_pyfunction!(func_delta, m)?)?;
    m.add_function(wrap_pyfunction!(power_type_fit, m)?)?;
    m.add_function(wrap_pyfunction!(legendre_transform, m)?)?;
    m.add_function(wrap_pyfunction!(biconjugate, m)?)?;
    m.add_function(wrap_pyfunction!(check_ids, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(run_check, m)?)?;
    Ok(())
}
