//! Python bindings for `kll-core`.
//!
//! Fields are exposed as opaque objects with coefficient accessors; reports
//! come back as plain dicts and lists built from their JSON form.

use std::path::PathBuf;

use kll_core::closure::ClosureConstants;
use kll_core::dynamics::{self, DynamicsError, Integrator};
use kll_core::harness::{self, RunConfig};
use kll_core::legendre_basis::{basis_for_nv, BasisSet};
use kll_core::moment_oracle::verify_closure_tables;
use kll_core::projections::moments;
use kll_core::spectral_core::checkpoint::{load, save_field, Checkpoint};
use kll_core::spectral_core::random::random_field;
use kll_core::spectral_core::{self as sc, x_norm};
use num_complex::Complex64;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

create_exception!(kll, KllError, PyException);

fn kll_err(e: impl std::fmt::Display) -> PyErr {
    KllError::new_err(e.to_string())
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    Ok(match v {
        Value::Null => py.None(),
        Value::Bool(b) => b.into_pyobject(py)?.to_owned().into_any().unbind(),
        Value::Number(n) => match n.as_i64() {
            Some(i) => i.into_pyobject(py)?.into_any().unbind(),
            None => n.as_f64().unwrap_or(f64::NAN).into_pyobject(py)?.into_any().unbind(),
        },
        Value::String(s) => s.into_pyobject(py)?.into_any().unbind(),
        Value::Array(a) => {
            let list = PyList::empty(py);
            for x in a {
                list.append(json_to_py(py, x)?)?;
            }
            list.into_any().unbind()
        }
        Value::Object(o) => {
            let d = PyDict::new(py);
            for (k, x) in o {
                d.set_item(k, json_to_py(py, x)?)?;
            }
            d.into_any().unbind()
        }
    })
}

/// Non-finite floats serialize to `null`; they come back as `None`.
fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    json_to_py(py, &serde_json::to_value(value).map_err(kll_err)?)
}

#[pyclass(name = "Band", module = "kll", frozen, eq, skip_from_py_object)]
#[derive(Clone, Copy, PartialEq)]
struct PyBand(sc::Band);

#[pymethods]
impl PyBand {
    #[new]
    fn new(n_x: usize, n_v: usize) -> PyResult<Self> {
        sc::Band::new(n_x, n_v).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    /// Radii `N = ε^{-γ}` with the strict cutoff.
    #[staticmethod]
    fn knudsen_scaling(epsilon: f64, gamma: f64) -> PyResult<Self> {
        sc::Band::knudsen_scaling(epsilon, gamma).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn n_x(&self) -> usize {
        self.0.x_radius()
    }

    #[getter]
    fn n_v(&self) -> usize {
        self.0.v_halfwidth()
    }

    fn x_count(&self) -> usize {
        self.0.x_count()
    }

    fn keeps(&self, n: [i64; 3], m: [i64; 3]) -> bool {
        self.0.keeps_x(n) && self.0.keeps_v(m)
    }

    fn __repr__(&self) -> String {
        format!("Band(n_x={}, n_v={})", self.0.x_radius(), self.0.v_halfwidth())
    }
}

#[pyclass(name = "SpectralField", module = "kll", skip_from_py_object)]
#[derive(Clone)]
struct PyField(sc::SpectralField);

impl PyField {
    fn check(&self, n: [i64; 3], m: [i64; 3]) -> PyResult<()> {
        let b = self.0.band();
        if b.keeps_x(n) && b.keeps_v(m) {
            Ok(())
        } else {
            Err(PyValueError::new_err(format!("mode (n = {n:?}, m = {m:?}) lies outside {:?}", b)))
        }
    }
}

#[pymethods]
impl PyField {
    #[staticmethod]
    fn zeros(band: &PyBand) -> Self {
        Self(sc::SpectralField::zeros(band.0))
    }

    #[staticmethod]
    fn constant(band: &PyBand, value: f64) -> Self {
        Self(sc::SpectralField::constant(band.0, value))
    }

    /// Real random field with coefficients decaying like `decay^(|n|_1 + |m|_1)`.
    #[staticmethod]
    #[pyo3(signature = (band, amplitude, decay = 0.5, seed = 0))]
    fn random(band: &PyBand, amplitude: f64, decay: f64, seed: u64) -> Self {
        Self(random_field(band.0, amplitude, decay, &mut ChaCha8Rng::seed_from_u64(seed)))
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        match load(&path).map_err(kll_err)? {
            Checkpoint::Spectral(f) => Ok(Self(f)),
            Checkpoint::X(_) => Err(KllError::new_err(format!("{} holds an x-only field", path.display()))),
        }
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        save_field(&path, &self.0).map_err(kll_err)
    }

    #[getter]
    fn band(&self) -> PyBand {
        PyBand(self.0.band())
    }

    fn get(&self, n: [i64; 3], m: [i64; 3]) -> PyResult<Complex64> {
        self.check(n, m)?;
        Ok(self.0.get(n, m))
    }

    /// With `real_pair`, the mirrored mode receives the conjugate.
    #[pyo3(signature = (n, m, value, real_pair = false))]
    fn set(&mut self, n: [i64; 3], m: [i64; 3], value: Complex64, real_pair: bool) -> PyResult<()> {
        self.check(n, m)?;
        if real_pair {
            self.0.set_real_pair(n, m, value);
        } else {
            self.0.set(n, m, value);
        }
        Ok(())
    }

    fn coefficients(&self) -> Vec<Complex64> {
        self.0.coeffs().to_vec()
    }

    /// `(||f||_{L^2}, ||f||_{H^1_x L^2_v})`.
    fn norms(&self) -> (f64, f64) {
        let n = x_norm(&self.0);
        (n.l2, n.h1)
    }

    fn reality_defect(&self) -> f64 {
        self.0.reality_defect()
    }

    fn max_abs_diff(&self, other: &PyField) -> f64 {
        self.0.max_abs_diff(&other.0)
    }

    fn __add__(&self, other: &PyField) -> PyResult<Self> {
        if self.0.band() != other.0.band() {
            return Err(PyValueError::new_err("band mismatch"));
        }
        Ok(Self(&self.0 + &other.0))
    }

    fn __mul__(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    fn __rmul__(&self, s: f64) -> Self {
        Self(self.0.scale(s))
    }

    fn __repr__(&self) -> String {
        let n = x_norm(&self.0);
        format!("SpectralField(n_x={}, n_v={}, h1={:.6e})", self.0.band().x_radius(), self.0.band().v_halfwidth(), n.h1)
    }
}

#[pyclass(name = "XField", module = "kll", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyXField(sc::XField);

#[pymethods]
impl PyXField {
    #[getter]
    fn n_x(&self) -> usize {
        self.0.x_radius()
    }

    fn get(&self, n: [i64; 3]) -> PyResult<Complex64> {
        if !self.0.keeps(n) {
            return Err(PyValueError::new_err(format!("mode {n:?} lies outside the band")));
        }
        Ok(self.0.get(n))
    }

    fn mean(&self) -> f64 {
        self.0.mean()
    }

    fn l2_norm(&self) -> f64 {
        self.0.l2_norm()
    }

    fn h1_norm(&self) -> f64 {
        self.0.h1_norm()
    }

    /// Point values on a uniform `m^3` grid, flattened with `x3` fastest.
    fn sample(&self, m: usize) -> Vec<f64> {
        self.0.sample(m)
    }
}

#[pyclass(name = "Basis", module = "kll", frozen)]
struct PyBasis(BasisSet);

#[pymethods]
impl PyBasis {
    #[new]
    fn new(n_v: usize) -> PyResult<Self> {
        basis_for_nv(n_v).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn n_v(&self) -> usize {
        self.0.n_v()
    }

    #[getter]
    fn c0(&self) -> f64 {
        self.0.c0
    }

    #[getter]
    fn c1(&self) -> f64 {
        self.0.c1
    }

    #[getter]
    fn c2(&self) -> f64 {
        self.0.c2
    }

    fn gram_residual(&self) -> f64 {
        self.0.gram_residual()
    }

    /// `{"rho", "u1", "u2", "u3", "theta"}` as x-fields.
    fn moments<'py>(&self, py: Python<'py>, f: &PyField) -> PyResult<Bound<'py, PyDict>> {
        let m = moments(&f.0, &self.0).map_err(kll_err)?;
        let d = PyDict::new(py);
        d.set_item("rho", PyXField(m.rho.clone()))?;
        for (i, c) in m.u.iter().enumerate() {
            d.set_item(format!("u{}", i + 1), PyXField(c.clone()))?;
        }
        d.set_item("theta", PyXField(m.theta))?;
        Ok(d)
    }

    fn __repr__(&self) -> String {
        format!("Basis(n_v={}, c1={:.12})", self.0.n_v(), self.0.c1)
    }
}

#[pyclass(name = "KineticParams", module = "kll", frozen, skip_from_py_object)]
#[derive(Clone, Copy)]
struct PyParams(dynamics::KineticParams);

#[pymethods]
impl PyParams {
    #[new]
    #[pyo3(signature = (epsilon, nu_star, kappa = 3f64.sqrt()))]
    fn new(epsilon: f64, nu_star: f64, kappa: f64) -> PyResult<Self> {
        dynamics::KineticParams::new(epsilon, nu_star, kappa).map(Self).map_err(|e| PyValueError::new_err(e.to_string()))
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.0.epsilon
    }

    #[getter]
    fn nu_star(&self) -> f64 {
        self.0.nu_star
    }

    #[getter]
    fn kappa(&self) -> f64 {
        self.0.kappa
    }

    /// Limit viscosity `ν*/12`.
    fn nu(&self) -> f64 {
        self.0.nu()
    }
}

fn integrator(name: &str) -> PyResult<Integrator> {
    name.parse().map_err(PyValueError::new_err)
}

/// One step of `imex` (Strang splitting) or `rk4`.
#[pyfunction]
#[pyo3(signature = (f, dt, params, basis, integrator = "imex"))]
fn step(f: &PyField, dt: f64, params: &PyParams, basis: &PyBasis, integrator: &str) -> PyResult<PyField> {
    let kind = self::integrator(integrator)?;
    dynamics::step(kind, &f.0, dt, &params.0, &basis.0).map(PyField).map_err(kll_err)
}

#[pyfunction]
fn rhs(f: &PyField, params: &PyParams, basis: &PyBasis) -> PyResult<PyField> {
    dynamics::rhs(&f.0, &params.0, &basis.0).map(PyField).map_err(kll_err)
}

/// Integrate to `t_end`; returns `(final_field, history)` where `history`
/// holds `t`, `energy_sq`, `dissipation_sq` and `margin` lists.
#[pyfunction]
#[pyo3(signature = (f0, params, basis, dt, t_end, integrator = "imex"))]
fn integrate<'py>(
    py: Python<'py>,
    f0: &PyField,
    params: &PyParams,
    basis: &PyBasis,
    dt: f64,
    t_end: f64,
    integrator: &str,
) -> PyResult<(PyField, Bound<'py, PyDict>)> {
    let opts = dynamics::RunOptions::new(self::integrator(integrator)?, dt, t_end);
    let mut none = |_: usize, _: f64, _: &sc::SpectralField| -> Result<(), DynamicsError> { Ok(()) };
    let (f, rec) = py
        .detach(|| dynamics::integrate(&f0.0, &params.0, &basis.0, &opts, &mut none))
        .map_err(kll_err)?;
    let d = PyDict::new(py);
    d.set_item("t", rec.times.clone())?;
    d.set_item("energy_sq", rec.energy_sq.clone())?;
    d.set_item("dissipation_sq", rec.dissipation_sq.clone())?;
    d.set_item("margin", rec.margins(&params.0))?;
    Ok((PyField(f), d))
}

/// `f0 / sqrt(1 + 2 κ² f0² t / ν*)`.
#[pyfunction]
fn homogeneous_solution(f0: f64, t: f64, params: &PyParams) -> f64 {
    dynamics::homogeneous_solution(f0, t, &params.0)
}

/// Closure constants of the band `N_v` together with their gaps to the limits.
#[pyfunction]
fn closure_constants(py: Python<'_>, n_v: usize) -> PyResult<Py<PyAny>> {
    let basis = basis_for_nv(n_v).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let k = ClosureConstants::compute(&basis).map_err(kll_err)?;
    let out = serde_json::json!({ "constants": k, "gaps": k.gaps() });
    json_to_py(py, &out)
}

/// Rows of the exact closure tables: `group`, `symbol`, `expected`,
/// `computed` (as text in `Q(√3, √5)`) and `pass`.
#[pyfunction]
fn verify_closure(py: Python<'_>) -> PyResult<Py<PyAny>> {
    to_py(py, &verify_closure_tables().rows)
}

/// Run a kinetic trajectory from TOML text. Returns `{"report", "series"}`.
#[pyfunction]
#[pyo3(signature = (config, overrides = Vec::new(), out = None))]
fn simulate(py: Python<'_>, config: &str, overrides: Vec<String>, out: Option<PathBuf>) -> PyResult<Py<PyAny>> {
    let cfg = RunConfig::from_toml(config, &overrides).map_err(|e| PyValueError::new_err(e.to_string()))?;
    let result = py.detach(|| harness::simulate(&cfg, out.as_deref())).map_err(kll_err)?;
    let value = serde_json::json!({ "report": result.report, "series": result.series });
    json_to_py(py, &value)
}

/// The `kll` command line; `argv` excludes the program name.
#[pyfunction]
fn run_cli(py: Python<'_>, argv: Vec<String>) -> i32 {
    py.detach(|| harness::run_cli(std::iter::once("kll".to_string()).chain(argv)))
}

#[pymodule]
fn kll(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("KllError", m.py().get_type::<KllError>())?;
    m.add_class::<PyBand>()?;
    m.add_class::<PyField>()?;
    m.add_class::<PyXField>()?;
    m.add_class::<PyBasis>()?;
    m.add_class::<PyParams>()?;
    m.add_function(wrap_pyfunction!(step, m)?)?;
    m.add_function(wrap_pyfunction!(rhs, m)?)?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(homogeneous_solution, m)?)?;
    m.add_function(wrap_pyfunction!(closure_constants, m)?)?;
    m.add_function(wrap_pyfunction!(verify_closure, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(run_cli, m)?)?;
    Ok(())
}
