//! Spectral-abscissa tuning of the delay and the feedback gains.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctcr::stability_table;
use crate::error::{invalid, Error, Result};
use crate::quasipoly::extract_pq;
use crate::rootfinder::{rightmost_root, Rightmost, RightmostScan};
use crate::rotor::{build_delay_system, ControlGains, RotorParams};

const GOLDEN: f64 = 0.618_033_988_749_894_9;

/// Rightmost root of the closed loop at `(gains, tau)`.
pub fn abscissa(params: &RotorParams, gains: ControlGains, tau: f64, scan: &RightmostScan) -> Result<Rightmost> {
    let sys = build_delay_system(params, gains, tau)?;
    let qp = extract_pq(&sys)?;
    rightmost_root(&qp, scan)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalDelay {
    pub tau: f64,
    pub abscissa: f64,
    pub root: Complex64,
    pub interval: (f64, f64),
    /// The coarse pre-samples were unimodal; otherwise a dense grid was used.
    pub unimodal: bool,
    pub evaluations: usize,
    pub certified: bool,
}

struct DelayObjective<'a> {
    params: &'a RotorParams,
    gains: ControlGains,
    scan: &'a RightmostScan,
    evals: usize,
    certified: bool,
}

impl DelayObjective<'_> {
    fn eval(&mut self, tau: f64) -> Result<Rightmost> {
        self.evals += 1;
        let r = abscissa(self.params, self.gains, tau, self.scan)?;
        self.certified &= r.certified;
        Ok(r)
    }
}

fn golden_section(obj: &mut DelayObjective, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut x1 = hi - GOLDEN * (hi - lo);
    let mut x2 = lo + GOLDEN * (hi - lo);
    let mut f1 = obj.eval(x1)?.abscissa;
    let mut f2 = obj.eval(x2)?.abscissa;
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - GOLDEN * (hi - lo);
            f1 = obj.eval(x1)?.abscissa;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + GOLDEN * (hi - lo);
            f2 = obj.eval(x2)?.abscissa;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn is_unimodal(v: &[f64]) -> bool {
    let k = v
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map_or(0, |(i, _)| i);
    v[..=k].windows(2).all(|w| w[1] <= w[0]) && v[k..].windows(2).all(|w| w[1] >= w[0])
}

/// Delay in `interval` minimizing the spectral abscissa, to `|dtau| < 1e-4`.
///
/// The interval must lie inside a stable interval of the delay-stability
/// table for these gains.
pub fn optimal_delay(
    params: &RotorParams,
    gains: ControlGains,
    interval: (f64, f64),
    scan: &RightmostScan,
) -> Result<OptimalDelay> {
    let (lo, hi) = interval;
    if !(lo >= 0.0 && lo < hi && hi.is_finite()) {
        return Err(invalid("interval", format!("bad delay interval [{lo}, {hi}]")));
    }
    let table = stability_table(&build_delay_system(params, gains, 0.0)?, hi + 1.0)?;
    let slack = 1e-6;
    let inside = table
        .stable_intervals
        .iter()
        .any(|&(a, b)| lo >= a - slack && hi <= b + slack);
    if !inside {
        return Err(Error::NoStableInterval(format!(
            "[{lo}, {hi}] is not inside a stable delay interval (stable: {:?})",
            table.stable_intervals
        )));
    }

    let mut obj = DelayObjective {
        params,
        gains,
        scan,
        evals: 0,
        certified: true,
    };
    let probe = |n: usize| -> Vec<f64> { (1..=n).map(|k| lo + (hi - lo) * k as f64 / (n + 1) as f64).collect() };
    let coarse = probe(11);
    let values = coarse
        .iter()
        .map(|&t| obj.eval(t).map(|r| r.abscissa))
        .collect::<Result<Vec<_>>>()?;
    let unimodal = is_unimodal(&values);

    let (grid, vals) = if unimodal {
        (coarse, values)
    } else {
        let dense = probe(200);
        let v = dense
            .iter()
            .map(|&t| obj.eval(t).map(|r| r.abscissa))
            .collect::<Result<Vec<_>>>()?;
        (dense, v)
    };
    let k = vals
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let b_lo = if k == 0 { lo } else { grid[k - 1] };
    let b_hi = if k + 1 == grid.len() { hi } else { grid[k + 1] };
    let tau = golden_section(&mut obj, b_lo, b_hi, 1e-4)?;
    let best = obj.eval(tau)?;
    Ok(OptimalDelay {
        tau,
        abscissa: best.abscissa,
        root: best.root,
        interval,
        unimodal,
        evaluations: obj.evals,
        certified: obj.certified,
    })
}

/// Runs the delay-stability table up to `tau_max` and optimizes the delay
/// inside its first stable interval.
pub fn optimal_delay_auto(
    params: &RotorParams,
    gains: ControlGains,
    tau_max: f64,
    scan: &RightmostScan,
) -> Result<OptimalDelay> {
    let table = stability_table(&build_delay_system(params, gains, 0.0)?, tau_max)?;
    let Some(interval) = table.first_stable() else {
        return Err(Error::NoStableInterval(format!(
            "no delay in [0, {tau_max}] stabilizes gains a = {}, b = {}",
            gains.a, gains.b
        )));
    };
    optimal_delay(params, gains, interval, scan)
}

/// Inclusive linear range sampled at `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Range {
    pub fn new(lo: f64, hi: f64, n: usize) -> Self {
        Self { lo, hi, n }
    }

    pub fn values(&self) -> Vec<f64> {
        match self.n {
            0 => Vec::new(),
            1 => vec![self.lo],
            n => (0..n)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (n - 1) as f64)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub tau: f64,
    pub a_values: Vec<f64>,
    pub b_values: Vec<f64>,
    /// `values[i][j]` at `(a_values[i], b_values[j])`; NaN where the rightmost
    /// root could not be certified.
    pub values: Vec<Vec<f64>>,
    pub certified: Vec<Vec<bool>>,
    /// `(a, b, abscissa)` of the smallest certified entry.
    pub argmin: Option<(f64, f64, f64)>,
}

impl SweepGrid {
    pub fn all_certified(&self) -> bool {
        self.certified.iter().flatten().all(|&c| c)
    }
}

pub fn sweep_gain_surface(
    params: &RotorParams,
    tau: f64,
    a_range: Range,
    b_range: Range,
    scan: &RightmostScan,
) -> Result<SweepGrid> {
    let a_values = a_range.values();
    let b_values = b_range.values();
    if a_values.iter().chain(&b_values).any(|v| !v.is_finite()) {
        return Err(invalid("range", "non-finite gain"));
    }
    let cells: Vec<(usize, usize)> = (0..a_values.len())
        .flat_map(|i| (0..b_values.len()).map(move |j| (i, j)))
        .collect();
    let results: Vec<Option<f64>> = cells
        .par_iter()
        .map(|&(i, j)| {
            abscissa(params, ControlGains::new(a_values[i], b_values[j]), tau, scan)
                .ok()
                .filter(|r| r.certified)
                .map(|r| r.abscissa)
        })
        .collect();

    let mut values = vec![vec![f64::NAN; b_values.len()]; a_values.len()];
    let mut certified = vec![vec![false; b_values.len()]; a_values.len()];
    let mut argmin: Option<(f64, f64, f64)> = None;
    for (&(i, j), r) in cells.iter().zip(results) {
        if let Some(v) = r {
            values[i][j] = v;
            certified[i][j] = true;
            if argmin.is_none_or(|m| v < m.2) {
                argmin = Some((a_values[i], b_values[j], v));
            }
        }
    }
    Ok(SweepGrid {
        tau,
        a_values,
        b_values,
        values,
        certified,
        argmin,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexResult {
    pub x: [f64; 3],
    pub fx: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

/// Nelder-Mead on three variables. Stops when every vertex lies within
/// `tol` of the best one or after `budget` evaluations. The returned point
/// is never worse than `x0`.
pub fn nelder_mead<F>(mut f: F, x0: [f64; 3], steps: [f64; 3], tol: f64, budget: usize) -> SimplexResult
where
    F: FnMut(&[f64; 3]) -> f64,
{
    let mut evals = 0;
    let mut call = |x: &[f64; 3], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<([f64; 3], f64)> = Vec::with_capacity(4);
    simplex.push((x0, call(&x0, &mut evals)));
    for k in 0..3 {
        let mut x = x0;
        x[k] += steps[k];
        simplex.push((x, call(&x, &mut evals)));
    }

    let lerp = |a: &[f64; 3], b: &[f64; 3], t: f64| -> [f64; 3] { std::array::from_fn(|i| a[i] + t * (b[i] - a[i])) };
    let mut exhausted = false;
    loop {
        // stable sort keeps x0 first among ties
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].0;
        let spread = simplex[1..]
            .iter()
            .map(|(x, _)| (0..3).map(|i| (x[i] - best[i]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread < tol {
            break;
        }
        if evals >= budget {
            exhausted = true;
            break;
        }
        let centroid: [f64; 3] = std::array::from_fn(|i| simplex[..3].iter().map(|(x, _)| x[i]).sum::<f64>() / 3.0);
        let (worst, f_worst) = simplex[3];
        let xr = lerp(&centroid, &worst, -1.0);
        let fr = call(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = lerp(&centroid, &worst, -2.0);
            let fe = call(&xe, &mut evals);
            simplex[3] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[2].1 {
            simplex[3] = (xr, fr);
        } else {
            let (xc, fc) = if fr < f_worst {
                let xc = lerp(&centroid, &xr, 0.5);
                (xc, call(&xc, &mut evals))
            } else {
                let xc = lerp(&centroid, &worst, 0.5);
                (xc, call(&xc, &mut evals))
            };
            if fc < f_worst.min(fr) {
                simplex[3] = (xc, fc);
            } else {
                for v in simplex.iter_mut().skip(1) {
                    let xs = lerp(&best, &v.0, 0.5);
                    *v = (xs, call(&xs, &mut evals));
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    SimplexResult {
        x: simplex[0].0,
        fx: simplex[0].1,
        evaluations: evals,
        budget_exhausted: exhausted,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointOptimum {
    pub gains: ControlGains,
    pub tau: f64,
    pub abscissa: f64,
    pub root: Complex64,
    pub initial_abscissa: f64,
    pub evaluations: usize,
    pub budget_exhausted: bool,
}

/// Gains in units of 1e-4 so all three coordinates have comparable scale.
const GAIN_UNIT: f64 = 1e-4;

/// Derivative-free local descent of the spectral abscissa over `(a, b, tau)`.
/// Uncertified or failed evaluations count as `+inf`.
pub fn optimize_joint(
    params: &RotorParams,
    init: (ControlGains, f64),
    budget: usize,
    scan: &RightmostScan,
) -> Result<JointOptimum> {
    let (g0, tau0) = init;
    let start = abscissa(params, g0, tau0, scan)?;
    if !start.certified || !start.abscissa.is_finite() {
        return Err(Error::Certification("initial point has no certified abscissa".into()));
    }
    let objective = |x: &[f64; 3]| -> f64 {
        if x[2] < 0.0 {
            return f64::INFINITY;
        }
        match abscissa(
            params,
            ControlGains::new(x[0] * GAIN_UNIT, x[1] * GAIN_UNIT),
            x[2],
            scan,
        ) {
            Ok(r) if r.certified => r.abscissa,
            _ => f64::INFINITY,
        }
    };
    let x0 = [g0.a / GAIN_UNIT, g0.b / GAIN_UNIT, tau0];
    let steps = [
        (0.1 * x0[0].abs()).max(0.25),
        (0.1 * x0[1].abs()).max(0.25),
        (0.05 * x0[2].abs()).max(0.01),
    ];
    let res = nelder_mead(objective, x0, steps, 1e-6, budget);
    let gains = ControlGains::new(res.x[0] * GAIN_UNIT, res.x[1] * GAIN_UNIT);
    let fin = abscissa(params, gains, res.x[2], scan)?;
    Ok(JointOptimum {
        gains,
        tau: res.x[2],
        abscissa: fin.abscissa,
        root: fin.root,
        initial_abscissa: start.abscissa,
        evaluations: res.evaluations + 2,
        budget_exhausted: res.budget_exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_finds_quadratic_minimum() {
        let f = |x: &[f64; 3]| (x[0] - 1.0).powi(2) + 2.0 * (x[1] + 0.5).powi(2) + 0.5 * (x[2] - 3.0).powi(2);
        let r = nelder_mead(f, [0.0, 0.0, 0.0], [0.5, 0.5, 0.5], 1e-8, 5000);
        assert!(!r.budget_exhausted);
        assert!((r.x[0] - 1.0).abs() < 1e-6 && (r.x[1] + 0.5).abs() < 1e-6 && (r.x[2] - 3.0).abs() < 1e-6);
    }

    #[test]
    fn simplex_keeps_start_at_minimum() {
        let f = |x: &[f64; 3]| x.iter().map(|v| v * v).sum::<f64>();
        let r = nelder_mead(f, [0.0; 3], [0.1; 3], 1e-6, 1000);
        assert_eq!(r.x, [0.0; 3]);
        assert_eq!(r.fx, 0.0);
    }

    #[test]
    fn simplex_budget_flag() {
        let f = |x: &[f64; 3]| x.iter().map(|v| v * v).sum::<f64>();
        let r = nelder_mead(f, [5.0; 3], [0.1; 3], 1e-12, 20);
        assert!(r.budget_exhausted);
        assert!(r.fx < 75.0);
    }

    #[test]
    fn unimodality() {
        assert!(is_unimodal(&[3.0, 2.0, 1.0, 2.0]));
        assert!(is_unimodal(&[1.0, 2.0, 3.0]));
        assert!(!is_unimodal(&[3.0, 1.0, 2.0, 0.5, 4.0]));
    }

    #[test]
    fn range_values() {
        assert!(Range::new(0.0, 1.0, 0).values().is_empty());
        assert_eq!(Range::new(2.0, 5.0, 1).values(), vec![2.0]);
        assert_eq!(Range::new(0.0, 1.0, 3).values(), vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn zero_gains_have_no_interval() {
        let r = optimal_delay_auto(
            &RotorParams::default(),
            ControlGains::default(),
            10.0,
            &RightmostScan::default(),
        );
        assert!(matches!(r, Err(Error::NoStableInterval(_))));
        let r = optimal_delay(
            &RotorParams::default(),
            ControlGains::default(),
            (0.1, 0.3),
            &RightmostScan::default(),
        );
        assert!(matches!(r, Err(Error::NoStableInterval(_))));
    }
}
