//! Python bindings for `pitchflap`.

use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use pitchflap::ctcr;
use pitchflap::dde::{self, History, TimeSeries};
use pitchflap::optimize::{self, Range};
use pitchflap::quasipoly::extract_pq;
use pitchflap::rootfinder::{self, Region, RightmostScan};
use pitchflap::rotor::{self, ControlGains};
use pitchflap::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::InvalidParameter { .. } | Error::Window(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

/// Rotor constants; keyword arguments override the defaults.
#[pyclass(name = "RotorParams", from_py_object)]
#[derive(Clone)]
struct PyRotorParams {
    inner: rotor::RotorParams,
}

#[pymethods]
impl PyRotorParams {
    #[new]
    #[pyo3(signature = (*, r_g=None, c_h=None, gamma=None, lambda1=None, sigma=None, nu1_sq=None, act_gain=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        r_g: Option<f64>,
        c_h: Option<f64>,
        gamma: Option<f64>,
        lambda1: Option<f64>,
        sigma: Option<f64>,
        nu1_sq: Option<f64>,
        act_gain: Option<f64>,
    ) -> PyResult<Self> {
        let d = rotor::RotorParams::default();
        let inner = rotor::RotorParams {
            r_g: r_g.unwrap_or(d.r_g),
            c_h: c_h.unwrap_or(d.c_h),
            gamma: gamma.unwrap_or(d.gamma),
            lambda1: lambda1.unwrap_or(d.lambda1),
            sigma: sigma.unwrap_or(d.sigma),
            nu1_sq: nu1_sq.unwrap_or(d.nu1_sq),
            act_gain: act_gain.unwrap_or(d.act_gain),
        };
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn sigma(&self) -> f64 {
        self.inner.sigma
    }

    #[getter]
    fn nu1_sq(&self) -> f64 {
        self.inner.nu1_sq
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    #[getter]
    fn lambda1(&self) -> f64 {
        self.inner.lambda1
    }

    fn divergence_boundary(&self, sigma: f64) -> f64 {
        rotor::divergence_boundary(sigma, &self.inner)
    }

    /// `(nu1_sq, sigma)` on the flutter boundary.
    fn flutter_boundary(&self, omega_f: f64) -> PyResult<(f64, f64)> {
        rotor::flutter_boundary(omega_f, &self.inner).map_err(to_py)
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&self.inner).expect("plain struct")
    }

    fn __repr__(&self) -> String {
        format!("RotorParams({})", self.to_json())
    }
}

fn params_or_default(p: Option<PyRotorParams>) -> rotor::RotorParams {
    p.map(|p| p.inner).unwrap_or_default()
}

fn system(p: Option<PyRotorParams>, a: f64, b: f64, tau: f64) -> PyResult<rotor::DelaySystem> {
    rotor::build_delay_system(&params_or_default(p), ControlGains::new(a, b), tau).map_err(to_py)
}

fn scan(region: Option<(f64, f64, f64, f64)>, grid_step: f64) -> PyResult<RightmostScan> {
    let region = match region {
        Some((a, b, c, d)) => Region::new(a, b, c, d).map_err(to_py)?,
        None => Region::rotor_default(),
    };
    Ok(RightmostScan { region, grid_step })
}

/// Stability label and eigenvalues of the uncontrolled rotor.
#[pyfunction]
#[pyo3(signature = (params=None))]
fn classify<'py>(py: Python<'py>, params: Option<PyRotorParams>) -> PyResult<Bound<'py, PyDict>> {
    let c = rotor::classify_uncontrolled(&params_or_default(params)).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("label", c.label.to_string())?;
    d.set_item("divergent_modes", c.divergent_modes)?;
    d.set_item("flutter_pairs", c.flutter_pairs)?;
    d.set_item("marginal", c.marginal)?;
    d.set_item("eigenvalues", c.eigenvalues)?;
    Ok(d)
}

/// Crossing families, delay intervals and stable intervals on `[0, tau_max]`.
#[pyfunction]
#[pyo3(signature = (a, b, tau_max, params=None))]
fn stability_table<'py>(
    py: Python<'py>,
    a: f64,
    b: f64,
    tau_max: f64,
    params: Option<PyRotorParams>,
) -> PyResult<Bound<'py, PyDict>> {
    let t = ctcr::stability_table(&system(params, a, b, 0.0)?, tau_max).map_err(to_py)?;
    let crossings: Vec<(f64, f64, i8, Vec<f64>)> = t
        .crossings
        .iter()
        .map(|c| (c.omega_c, c.tau_core, c.rt, c.delays.clone()))
        .collect();
    let intervals: Vec<(f64, f64, usize)> = t.intervals.iter().map(|i| (i.tau_lo, i.tau_hi, i.nu)).collect();
    let d = PyDict::new(py);
    d.set_item("crossings", crossings)?;
    d.set_item("nu_zero", t.nu_zero)?;
    d.set_item("intervals", intervals)?;
    d.set_item("stable_intervals", t.stable_intervals)?;
    d.set_item("certified", t.certified)?;
    Ok(d)
}

/// Roots in `region = (re_min, re_max, im_min, im_max)`; returns
/// `(roots, certified)` with roots in the upper half only when `im_min == 0`.
#[pyfunction]
#[pyo3(signature = (a, b, tau, region, grid_step=0.01, params=None))]
fn find_roots(
    a: f64,
    b: f64,
    tau: f64,
    region: (f64, f64, f64, f64),
    grid_step: f64,
    params: Option<PyRotorParams>,
) -> PyResult<(Vec<Complex64>, bool)> {
    let qp = extract_pq(&system(params, a, b, tau)?).map_err(to_py)?;
    let region = Region::new(region.0, region.1, region.2, region.3).map_err(to_py)?;
    let set = rootfinder::find_roots(&qp, &region, grid_step).map_err(to_py)?;
    Ok((set.roots.iter().map(|r| r.s).collect(), set.certified))
}

/// `(root, certified)` of maximal real part.
#[pyfunction]
#[pyo3(signature = (a, b, tau, region=None, grid_step=0.01, params=None))]
fn rightmost_root(
    a: f64,
    b: f64,
    tau: f64,
    region: Option<(f64, f64, f64, f64)>,
    grid_step: f64,
    params: Option<PyRotorParams>,
) -> PyResult<(Complex64, bool)> {
    let qp = extract_pq(&system(params, a, b, tau)?).map_err(to_py)?;
    let r = rootfinder::rightmost_root(&qp, &scan(region, grid_step)?).map_err(to_py)?;
    Ok((r.root, r.certified))
}

fn history(name: &str) -> PyResult<History> {
    match name {
        "constant" => Ok(History::Constant),
        "zero" => Ok(History::Zero),
        _ => Err(PyValueError::new_err(format!(
            "history must be 'constant' or 'zero', got {name:?}"
        ))),
    }
}

/// Returns `(psi, states, diverged)`.
#[pyfunction]
#[pyo3(signature = (a, b, tau, x0, psi_end, step=dde::DEFAULT_STEP, history="constant", params=None))]
#[allow(clippy::too_many_arguments, clippy::type_complexity)]
fn simulate(
    a: f64,
    b: f64,
    tau: f64,
    x0: [f64; 4],
    psi_end: f64,
    step: f64,
    history: &str,
    params: Option<PyRotorParams>,
) -> PyResult<(Vec<f64>, Vec<[f64; 4]>, bool)> {
    let ts = dde::simulate(&system(params, a, b, tau)?, x0, psi_end, step, self::history(history)?).map_err(to_py)?;
    Ok((ts.psi, ts.states, ts.diverged))
}

/// Growth rate of `||x||` over `window` for samples from [`simulate`].
#[pyfunction]
fn growth_rate(psi: Vec<f64>, states: Vec<[f64; 4]>, window: (f64, f64)) -> PyResult<f64> {
    if psi.len() != states.len() || psi.len() < 2 {
        return Err(PyValueError::new_err("psi and states must have equal length >= 2"));
    }
    let ts = TimeSeries {
        step: psi[1] - psi[0],
        psi,
        states,
        tau: 0.0,
        history: History::Constant,
        diverged: false,
    };
    dde::growth_rate(&ts, window).map_err(to_py)
}

/// Delay minimizing the spectral abscissa inside the first stable interval.
#[pyfunction]
#[pyo3(signature = (a, b, tau_max=10.0, params=None))]
fn optimal_delay<'py>(
    py: Python<'py>,
    a: f64,
    b: f64,
    tau_max: f64,
    params: Option<PyRotorParams>,
) -> PyResult<Bound<'py, PyDict>> {
    let od = optimize::optimal_delay_auto(
        &params_or_default(params),
        ControlGains::new(a, b),
        tau_max,
        &RightmostScan::default(),
    )
    .map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("tau", od.tau)?;
    d.set_item("abscissa", od.abscissa)?;
    d.set_item("root", od.root)?;
    d.set_item("interval", od.interval)?;
    d.set_item("certified", od.certified)?;
    Ok(d)
}

/// Abscissa matrix over `a_range x b_range`, each `(lo, hi, n)`.
/// Uncertified cells are NaN.
#[pyfunction]
#[pyo3(signature = (tau, a_range, b_range, params=None))]
#[allow(clippy::type_complexity)]
fn sweep_gains(
    tau: f64,
    a_range: (f64, f64, usize),
    b_range: (f64, f64, usize),
    params: Option<PyRotorParams>,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>)> {
    let g = optimize::sweep_gain_surface(
        &params_or_default(params),
        tau,
        Range::new(a_range.0, a_range.1, a_range.2),
        Range::new(b_range.0, b_range.1, b_range.2),
        &RightmostScan::default(),
    )
    .map_err(to_py)?;
    Ok((g.a_values, g.b_values, g.values))
}

#[pymodule]
fn pitchflap_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRotorParams>()?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(stability_table, m)?)?;
    m.add_function(wrap_pyfunction!(find_roots, m)?)?;
    m.add_function(wrap_pyfunction!(rightmost_root, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(growth_rate, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_delay, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_gains, m)?)?;
    Ok(())
}
