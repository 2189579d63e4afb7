//! Simulation of `x'(psi) = A x(psi) + A_d x(psi - tau)`.
//!
//! Classical RK4 on a grid where the delay is an integer number of steps.
//! The delayed state at half steps comes from cubic Hermite interpolation of
//! stored nodes and slopes, so derivative jumps at multiples of `tau` always
//! fall on nodes.

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::rotor::DelaySystem;

pub const DIVERGENCE_NORM: f64 = 1e12;
pub const DEFAULT_STEP: f64 = 1e-3;

/// Initial function on `[-tau, 0)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum History {
    /// `x(psi) = x0` before the start.
    #[default]
    Constant,
    /// `x(psi) = 0` before the start.
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeSeries {
    pub psi: Vec<f64>,
    /// `[theta, beta, theta_dot, beta_dot]` per sample.
    pub states: Vec<[f64; 4]>,
    pub step: f64,
    pub tau: f64,
    pub history: History,
    /// Integration stopped early because the state norm exceeded [`DIVERGENCE_NORM`].
    pub diverged: bool,
}

impl TimeSeries {
    pub fn norms(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .collect()
    }

    pub fn last(&self) -> Option<[f64; 4]> {
        self.states.last().copied()
    }
}

struct Nodes<'a> {
    x: Vec<Vector4<f64>>,
    d_left: Vec<Vector4<f64>>,
    d_right: Vec<Vector4<f64>>,
    x0: Vector4<f64>,
    before: Vector4<f64>,
    sys: &'a DelaySystem,
}

impl Nodes<'_> {
    /// State at node `m`, approached from the left or from the right.
    fn value(&self, m: isize, right: bool) -> Vector4<f64> {
        match m {
            m if m < 0 => self.before,
            0 if right => self.x0,
            0 => self.before,
            m => self.x[m as usize],
        }
    }

    fn slope(&self, m: isize, right: bool) -> Vector4<f64> {
        match m {
            m if m < 0 => Vector4::zeros(),
            0 if !right => Vector4::zeros(),
            m if right => self.d_right[m as usize],
            m => self.d_left[m as usize],
        }
    }

    fn hermite_mid(&self, m: isize, h: f64) -> Vector4<f64> {
        let (y0, y1) = (self.value(m, true), self.value(m + 1, false));
        let (d0, d1) = (self.slope(m, true), self.slope(m + 1, false));
        (y0 + y1) * 0.5 + (d0 - d1) * (h / 8.0)
    }

    fn push(&mut self, x: Vector4<f64>, lag: usize) {
        let n = self.x.len() as isize;
        let m = n - lag as isize;
        let ax = self.sys.a * x;
        self.d_left.push(ax + self.sys.a_d * self.value(m, false));
        self.d_right.push(ax + self.sys.a_d * self.value(m, true));
        self.x.push(x);
    }
}

fn to_array(v: &Vector4<f64>) -> [f64; 4] {
    [v[0], v[1], v[2], v[3]]
}

fn rk4_ode(a: &Matrix4<f64>, x: &Vector4<f64>, h: f64) -> Vector4<f64> {
    let k1 = a * x;
    let k2 = a * (x + k1 * (h / 2.0));
    let k3 = a * (x + k2 * (h / 2.0));
    let k4 = a * (x + k3 * h);
    x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Integrates from `psi = 0` to `psi_end`. For `tau > 0` the step is shrunk to
/// `tau / ceil(tau / step)`.
pub fn simulate(sys: &DelaySystem, x0: [f64; 4], psi_end: f64, step: f64, history: History) -> Result<TimeSeries> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(invalid("step", format!("must be positive, got {step}")));
    }
    if !(psi_end >= 0.0 && psi_end.is_finite()) {
        return Err(invalid("psi_end", format!("must be non-negative, got {psi_end}")));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(invalid("x0", "non-finite initial state"));
    }
    let tau = sys.tau;
    let lag = if tau > 0.0 {
        (tau / step - 1e-9).ceil().max(1.0) as usize
    } else {
        0
    };
    let h = if lag > 0 { tau / lag as f64 } else { step };
    let n_steps = (psi_end / h - 1e-9).ceil().max(0.0) as usize;

    let x0v = Vector4::from_column_slice(&x0);
    let before = match history {
        History::Constant => x0v,
        History::Zero => Vector4::zeros(),
    };

    let mut psi = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    psi.push(0.0);
    states.push(x0);
    let mut diverged = false;

    if lag == 0 {
        let total = sys.undelayed();
        let mut x = x0v;
        for n in 0..n_steps {
            x = rk4_ode(&total, &x, h);
            if !(x.norm() <= DIVERGENCE_NORM) {
                diverged = true;
                break;
            }
            psi.push((n + 1) as f64 * h);
            states.push(to_array(&x));
        }
    } else {
        let mut nodes = Nodes {
            x: Vec::with_capacity(n_steps + 1),
            d_left: Vec::with_capacity(n_steps + 1),
            d_right: Vec::with_capacity(n_steps + 1),
            x0: x0v,
            before,
            sys,
        };
        nodes.push(x0v, lag);
        for n in 0..n_steps {
            let m = n as isize - lag as isize;
            let x = nodes.x[n];
            let mid = sys.a_d * nodes.hermite_mid(m, h);
            let end = sys.a_d * nodes.value(m + 1, false);
            let k1 = nodes.d_right[n];
            let k2 = sys.a * (x + k1 * (h / 2.0)) + mid;
            let k3 = sys.a * (x + k2 * (h / 2.0)) + mid;
            let k4 = sys.a * (x + k3 * h) + end;
            let next = x + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            if !(next.norm() <= DIVERGENCE_NORM) {
                diverged = true;
                break;
            }
            nodes.push(next, lag);
            psi.push((n + 1) as f64 * h);
            states.push(to_array(&next));
        }
    }

    Ok(TimeSeries {
        psi,
        states,
        step: h,
        tau,
        history,
        diverged,
    })
}

/// Exponential growth rate of `||x(psi)||` over `window`: least-squares slope
/// of the log-norm at its local maxima, or at every sample when the window
/// holds fewer than three maxima (monotone growth or decay).
pub fn growth_rate(ts: &TimeSeries, window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo < hi) {
        return Err(Error::Window(format!("empty window [{lo}, {hi}]")));
    }
    let last = *ts.psi.last().unwrap_or(&0.0);
    if hi > last + 0.5 * ts.step {
        let why = if ts.diverged {
            "trajectory diverged before"
        } else {
            "series ends before"
        };
        return Err(Error::Window(format!("{why} psi = {hi} (last sample {last})")));
    }
    let norms = ts.norms();
    let idx: Vec<usize> = (0..ts.psi.len())
        .filter(|&i| ts.psi[i] >= lo && ts.psi[i] <= hi)
        .collect();
    if idx.len() < 2 {
        return Err(Error::Window("fewer than two samples in window".into()));
    }
    if idx.iter().any(|&i| norms[i] == 0.0) {
        return Err(Error::Window("zero state inside window".into()));
    }

    let maxima: Vec<usize> = idx
        .iter()
        .copied()
        .filter(|&i| i > idx[0] && i < *idx.last().unwrap())
        .filter(|&i| norms[i] > norms[i - 1] && norms[i] >= norms[i + 1])
        .collect();
    let pick = if maxima.len() >= 3 { maxima } else { idx };

    let n = pick.len() as f64;
    let (sx, sy) = pick
        .iter()
        .fold((0.0, 0.0), |(sx, sy), &i| (sx + ts.psi[i], sy + norms[i].ln()));
    let (mx, my) = (sx / n, sy / n);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for &i in &pick {
        let dx = ts.psi[i] - mx;
        sxy += dx * (norms[i].ln() - my);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}
