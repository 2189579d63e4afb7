//! Cluster treatment of characteristic roots for a single delay.
//!
//! Imaginary-axis crossings `s = j omega_c` are found from the magnitude
//! condition `|P(j omega)|^2 = |Q(j omega)|^2`, a quartic in `eta = omega^2`.
//! Each crossing repeats with period `2 pi / omega_c` in the delay and keeps
//! its root tendency, so a finite table of crossings determines the number
//! of right-half-plane roots for every delay.

use std::f64::consts::PI;

use nalgebra::Matrix4;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::quasipoly::{extract_pq, horner, QuasiPolynomial};
use crate::rotor::{build_delay_system, unstable_count, ControlGains, DelaySystem, RotorParams};

/// Positive-`eta` threshold separating genuine crossings from the origin.
pub const ETA_MIN: f64 = 1e-9;
/// Breakpoints closer than this are treated as simultaneous.
pub const TIE_TOL: f64 = 1e-9;

fn conv(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn add_into(acc: &mut [f64], x: &[f64], shift: usize, sign: f64) {
    for (i, v) in x.iter().enumerate() {
        acc[i + shift] += sign * v;
    }
}

/// Even/odd split of a real polynomial on the imaginary axis:
/// `f(j w) = re(w^2) + j w im(w^2)`.
fn axis_parts(c: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let alt = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let re = c.iter().step_by(2).enumerate().map(|(m, v)| alt(m) * v).collect();
    let im = c
        .iter()
        .skip(1)
        .step_by(2)
        .enumerate()
        .map(|(m, v)| alt(m) * v)
        .collect();
    (re, im)
}

/// Coefficients (ascending in `eta`) of `|P(j w)|^2 - |Q(j w)|^2`.
pub fn magnitude_quartic(qp: &QuasiPolynomial) -> [f64; 5] {
    let (pr, pi) = axis_parts(&qp.p);
    let (qr, qi) = axis_parts(&qp.q);
    let mut out = [0.0; 6];
    add_into(&mut out, &conv(&pr, &pr), 0, 1.0);
    add_into(&mut out, &conv(&pi, &pi), 1, 1.0);
    add_into(&mut out, &conv(&qr, &qr), 0, -1.0);
    add_into(&mut out, &conv(&qi, &qi), 1, -1.0);
    [out[0], out[1], out[2], out[3], out[4]]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossingFrequencies {
    /// Monic quartic in `eta = omega^2`, ascending.
    pub eta_poly: [f64; 5],
    pub eta_roots: Vec<Complex64>,
    /// Admissible crossing frequencies, ascending.
    pub omegas: Vec<f64>,
    /// Near-double `eta` roots were detected (tangential crossing).
    pub degenerate: bool,
}

fn polish_real_root(c: &[f64; 5], mut x: f64) -> f64 {
    for _ in 0..8 {
        let v = c.iter().rev().fold(0.0, |acc, k| acc * x + k);
        let d = c
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (i, k)| acc * x + i as f64 * k);
        if d == 0.0 {
            break;
        }
        let next = x - v / d;
        if !next.is_finite() || (next - x).abs() > 1e-6 * (1.0 + x.abs()) {
            break;
        }
        x = next;
    }
    x
}

pub fn crossing_frequencies(qp: &QuasiPolynomial) -> CrossingFrequencies {
    let c = magnitude_quartic(qp);
    // companion matrix of the monic quartic
    let mut comp = Matrix4::<f64>::zeros();
    for i in 1..4 {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..4 {
        comp[(i, 3)] = -c[i] / c[4];
    }
    let eta_roots: Vec<Complex64> = comp.complex_eigenvalues().iter().copied().collect();

    let mut real_etas = Vec::new();
    let mut degenerate = false;
    for r in &eta_roots {
        let tol = 1e-9 * (1.0 + r.norm());
        if r.im.abs() < tol {
            real_etas.push(polish_real_root(&c, r.re));
        } else if r.im.abs() < 1e-6 * (1.0 + r.norm()) && r.re > ETA_MIN {
            // a double root split into a nearly-real pair
            degenerate = true;
        }
    }
    let scale = real_etas.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
    for i in 0..real_etas.len() {
        for j in i + 1..real_etas.len() {
            if (real_etas[i] - real_etas[j]).abs() < 1e-6 * scale {
                degenerate = true;
            }
        }
    }
    let mut omegas: Vec<f64> = real_etas.into_iter().filter(|&e| e > ETA_MIN).map(f64::sqrt).collect();
    omegas.sort_by(f64::total_cmp);
    omegas.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * b.abs().max(1.0));
    CrossingFrequencies {
        eta_poly: c,
        eta_roots,
        omegas,
        degenerate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootTendency {
    /// `+1` destabilizing, `-1` stabilizing, `0` degenerate.
    pub rt: i8,
    pub ds_dtau: Complex64,
}

/// Sign of `Re(ds/dtau)` for the imaginary root `j omega_c` at delay `tau_c`.
pub fn root_tendency(omega_c: f64, tau_c: f64, qp: &QuasiPolynomial) -> Result<RootTendency> {
    let s = Complex64::new(0.0, omega_c);
    let q = qp.with_tau(tau_c);
    let ex = (-tau_c * s).exp();
    let num = s * q.q_at(s) * ex;
    let den = q.eval_s_derivative(s);
    if den.norm() < 1e-12 * q.scale(s) {
        return Err(Error::NonSimpleRoot { re: 0.0, im: omega_c });
    }
    let ds_dtau = num / den;
    let rt = if ds_dtau.re.abs() < 1e-10 {
        0
    } else if ds_dtau.re > 0.0 {
        1
    } else {
        -1
    };
    Ok(RootTendency { rt, ds_dtau })
}

/// One crossing family: frequency, core delay and its periodic copies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Crossing {
    pub omega_c: f64,
    pub tau_core: f64,
    pub rt: i8,
    pub period: f64,
    pub ds_dtau: Complex64,
    /// `tau_core + k * period` for `k = 0, 1, ...` up to `tau_max`.
    pub delays: Vec<f64>,
    /// Root tendency re-evaluated at each generated delay.
    pub rt_by_k: Vec<i8>,
}

impl Crossing {
    pub fn rt_invariant(&self) -> bool {
        self.rt_by_k.iter().all(|&r| r == self.rt)
    }
}

/// Core delay `(arg Q - arg P + pi) / omega` folded into `[0, 2 pi / omega)`,
/// plus periodic copies up to `tau_max` (always at least the core).
pub fn crossing_delays(omega_c: f64, qp: &QuasiPolynomial, tau_max: f64) -> Result<Crossing> {
    if !(omega_c > 0.0) {
        return Err(crate::error::invalid("omega_c", "must be positive"));
    }
    let s = Complex64::new(0.0, omega_c);
    let pj = horner(&qp.p, s);
    let qj = horner(&qp.q, s);
    if qj.norm() < 1e-12 {
        return Err(Error::NoCrossing { omega: omega_c });
    }
    let period = 2.0 * PI / omega_c;
    let raw = (qj.arg() - pj.arg() + PI) / omega_c;
    let mut tau_core = raw.rem_euclid(period);
    if tau_core >= period {
        tau_core = 0.0;
    }

    let mut delays = vec![tau_core];
    let mut k = 1;
    loop {
        let t = tau_core + k as f64 * period;
        if t > tau_max {
            break;
        }
        delays.push(t);
        k += 1;
    }
    for &t in &delays {
        let residual = (pj + qj * (-t * s).exp()).norm();
        if residual >= 1e-8 * pj.norm() {
            return Err(Error::CrossingResidual {
                omega: omega_c,
                tau: t,
                residual,
            });
        }
    }

    let core = root_tendency(omega_c, tau_core, qp)?;
    let mut rt_by_k = Vec::with_capacity(delays.len().max(3));
    for k in 0..delays.len().max(3) {
        let t = tau_core + k as f64 * period;
        rt_by_k.push(root_tendency(omega_c, t, qp)?.rt);
    }
    Ok(Crossing {
        omega_c,
        tau_core,
        rt: core.rt,
        period,
        ds_dtau: core.ds_dtau,
        delays,
        rt_by_k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakpoint {
    pub tau: f64,
    pub omega_c: f64,
    pub k: usize,
    pub rt: i8,
    pub nu_after: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DelayInterval {
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub nu: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityTable {
    pub qp: QuasiPolynomial,
    pub crossings: Vec<Crossing>,
    pub nu_zero: usize,
    pub breakpoints: Vec<Breakpoint>,
    /// Consecutive delay intervals covering `[0, tau_max]`.
    pub intervals: Vec<DelayInterval>,
    /// Intervals with no right-half-plane roots.
    pub stable_intervals: Vec<(f64, f64)>,
    pub tau_max: f64,
    /// False when a degenerate crossing or negative count was met.
    pub certified: bool,
    /// Breakpoints from different families coincided within [`TIE_TOL`].
    pub manual_review: bool,
}

impl StabilityTable {
    /// Right-half-plane root count at `tau` (value right after a breakpoint).
    pub fn nu_at(&self, tau: f64) -> usize {
        self.intervals
            .iter()
            .find(|iv| tau >= iv.tau_lo && tau < iv.tau_hi)
            .or(self.intervals.last())
            .map_or(self.nu_zero, |iv| iv.nu)
    }

    /// First stable interval, if any.
    pub fn first_stable(&self) -> Option<(f64, f64)> {
        self.stable_intervals.first().copied()
    }
}

pub fn stability_table(sys: &DelaySystem, tau_max: f64) -> Result<StabilityTable> {
    if !(tau_max > 0.0 && tau_max.is_finite()) {
        return Err(crate::error::invalid("tau_max", "must be positive and finite"));
    }
    let qp = extract_pq(sys)?;
    let nu_zero = unstable_count(&sys.undelayed());
    let mut certified = true;

    let mut crossings = Vec::new();
    if qp.has_delay_term() {
        let freqs = crossing_frequencies(&qp);
        if freqs.degenerate {
            certified = false;
        }
        for &w in &freqs.omegas {
            match crossing_delays(w, &qp, tau_max) {
                Ok(c) => crossings.push(c),
                Err(Error::NoCrossing { .. }) => certified = false,
                Err(e) => return Err(e),
            }
        }
    }

    let mut events: Vec<(f64, f64, usize, i8)> = crossings
        .iter()
        .flat_map(|c| {
            c.delays
                .iter()
                .enumerate()
                .filter(|(_, &t)| t <= tau_max)
                .map(move |(k, &t)| (t, c.omega_c, k, c.rt))
        })
        .collect();
    events.sort_by(|x, y| {
        if (x.0 - y.0).abs() <= TIE_TOL {
            y.1.total_cmp(&x.1)
        } else {
            x.0.total_cmp(&y.0)
        }
    });
    let manual_review = events
        .windows(2)
        .any(|w| (w[1].0 - w[0].0).abs() <= TIE_TOL && w[0].1 != w[1].1);

    let mut nu = nu_zero as i64;
    let mut breakpoints = Vec::with_capacity(events.len());
    let mut intervals = Vec::new();
    let mut lo = 0.0;
    for (tau, omega_c, k, rt) in events {
        if tau > lo {
            intervals.push(DelayInterval {
                tau_lo: lo,
                tau_hi: tau,
                nu: nu.max(0) as usize,
            });
            lo = tau;
        }
        if rt == 0 {
            certified = false;
        }
        nu += 2 * rt as i64;
        if nu < 0 {
            certified = false;
        }
        breakpoints.push(Breakpoint {
            tau,
            omega_c,
            k,
            rt,
            nu_after: nu.max(0) as usize,
        });
    }
    intervals.push(DelayInterval {
        tau_lo: lo,
        tau_hi: tau_max,
        nu: nu.max(0) as usize,
    });

    let stable_intervals = intervals
        .iter()
        .filter(|iv| iv.nu == 0 && iv.tau_hi > iv.tau_lo)
        .map(|iv| (iv.tau_lo, iv.tau_hi))
        .collect();

    Ok(StabilityTable {
        qp,
        crossings,
        nu_zero,
        breakpoints,
        intervals,
        stable_intervals,
        tau_max,
        certified,
        manual_review,
    })
}

/// Constant term of the `eta` quartic, `P(0)^2 - Q(0)^2`.
pub fn constant_term_c0(qp: &QuasiPolynomial) -> f64 {
    qp.p[0] * qp.p[0] - qp.q[0] * qp.q[0]
}

/// Alternative closed form for the constant term, evaluated as written
/// (coefficients 944 and 1416, `+` on the middle term).
pub fn c0_printed(params: &RotorParams, a: f64) -> f64 {
    let l2 = params.lambda1.powi(2);
    let g = params.gamma;
    let grs = g * params.r_g * params.sigma / params.c_h;
    let nu = params.nu1_sq;
    l2 * (l2 - 944.0 * g * a) * nu * nu + grs * (3.0 * l2 - 1416.0 * g * a) * nu + 2.25 * grs * grs
}

/// Closed form obtained from `c0 = (P(0) - Q(0)) (P(0) + Q(0))` with
/// `P(0) + Q(0) = det K` and `Q(0) = gamma * act_gain * nu1^2 * a / 8`.
pub fn c0_factored(params: &RotorParams, a: f64) -> f64 {
    let l2 = params.lambda1.powi(2);
    let g = params.gamma;
    let grs = g * params.r_g * params.sigma / params.c_h;
    let nu = params.nu1_sq;
    let k1 = params.act_gain / 4.0;
    let k2 = 3.0 * params.act_gain / 8.0;
    l2 * (l2 - k1 * g * a) * nu * nu - grs * (3.0 * l2 - k2 * g * a) * nu + 2.25 * grs * grs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct C0Report {
    pub sigma: f64,
    pub nu1_sq: f64,
    pub a: f64,
    /// From the extracted quasipolynomial.
    pub c0: f64,
    /// From determinants of `A` and `A + A_d` at the origin.
    pub c0_det: f64,
    pub c0_printed: f64,
    pub c0_factored: f64,
    pub printed_minus_c0: f64,
    pub factored_minus_c0: f64,
    /// The `eta` quartic's constant coefficient.
    pub eta_poly_c0: f64,
}

/// `c0` from the state matrices only: `P(0) = det A`, `P(0) + Q(0) = det(A + A_d)`.
pub fn c0_from_determinants(sys: &DelaySystem) -> f64 {
    let p0 = sys.a.determinant();
    let q0 = sys.undelayed().determinant() - p0;
    p0 * p0 - q0 * q0
}

pub fn c0_report(params: &RotorParams, gains: ControlGains) -> Result<C0Report> {
    let sys = build_delay_system(params, gains, 0.0)?;
    let qp = extract_pq(&sys)?;
    let c0 = constant_term_c0(&qp);
    let printed = c0_printed(params, gains.a);
    let factored = c0_factored(params, gains.a);
    Ok(C0Report {
        sigma: params.sigma,
        nu1_sq: params.nu1_sq,
        a: gains.a,
        c0,
        c0_det: c0_from_determinants(&sys),
        c0_printed: printed,
        c0_factored: factored,
        printed_minus_c0: printed - c0,
        factored_minus_c0: factored - c0,
        eta_poly_c0: magnitude_quartic(&qp)[0],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum GridAxis {
    Sigma,
    Nu1Sq,
    Gain,
}

/// Linear-interpolated zero of `c0` between two neighbouring grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ZeroCrossing {
    pub axis: GridAxis,
    pub sigma: f64,
    pub nu1_sq: f64,
    pub a: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OriginCheckReport {
    pub points: Vec<C0Report>,
    /// Grid points where `c0` vanishes to rounding.
    pub exact_zeros: Vec<(f64, f64, f64)>,
    pub zero_crossings: Vec<ZeroCrossing>,
    /// `eta = 0` is a root of the quartic exactly when `c0 = 0`, at every point.
    pub origin_root_iff_c0_zero: bool,
    /// Largest relative disagreement between the two `c0` routes.
    pub max_rel_route_diff: f64,
}

/// Evaluates `c0` on a `(sigma, nu1_sq, a)` grid with fixed rate gain `b`.
pub fn divergence_origin_check(
    base: &RotorParams,
    sigmas: &[f64],
    nu1_sqs: &[f64],
    gains_a: &[f64],
    b: f64,
) -> Result<OriginCheckReport> {
    let (ns, nn, na) = (sigmas.len(), nu1_sqs.len(), gains_a.len());
    let mut points = Vec::with_capacity(ns * nn * na);
    for &sigma in sigmas {
        for &nu1_sq in nu1_sqs {
            for &a in gains_a {
                let p = RotorParams { sigma, nu1_sq, ..*base };
                points.push(c0_report(&p, ControlGains::new(a, b))?);
            }
        }
    }
    let idx = |i: usize, j: usize, k: usize| (i * nn + j) * na + k;
    let zero_tol = |r: &C0Report| {
        let p0 = r.c0_det.abs().max(1.0);
        1e-12 * p0
    };

    let mut exact_zeros = Vec::new();
    let mut iff = true;
    let mut max_rel = 0.0_f64;
    for r in &points {
        let is_zero = r.c0.abs() <= zero_tol(r);
        if is_zero {
            exact_zeros.push((r.sigma, r.nu1_sq, r.a));
        }
        let eta_zero = r.eta_poly_c0.abs() <= zero_tol(r);
        iff &= is_zero == eta_zero;
        let rel = (r.c0 - r.c0_det).abs() / r.c0.abs().max(r.c0_det.abs()).max(f64::MIN_POSITIVE);
        if r.c0 != r.c0_det {
            max_rel = max_rel.max(rel);
        }
    }

    let mut zero_crossings = Vec::new();
    let mut push = |axis, a: &C0Report, b: &C0Report| {
        if a.c0.signum() != b.c0.signum() && a.c0 != 0.0 && b.c0 != 0.0 {
            let t = a.c0 / (a.c0 - b.c0);
            zero_crossings.push(ZeroCrossing {
                axis,
                sigma: a.sigma + t * (b.sigma - a.sigma),
                nu1_sq: a.nu1_sq + t * (b.nu1_sq - a.nu1_sq),
                a: a.a + t * (b.a - a.a),
            });
        }
    };
    for i in 0..ns {
        for j in 0..nn {
            for k in 0..na {
                let here = &points[idx(i, j, k)];
                if i + 1 < ns {
                    push(GridAxis::Sigma, here, &points[idx(i + 1, j, k)]);
                }
                if j + 1 < nn {
                    push(GridAxis::Nu1Sq, here, &points[idx(i, j + 1, k)]);
                }
                if k + 1 < na {
                    push(GridAxis::Gain, here, &points[idx(i, j, k + 1)]);
                }
            }
        }
    }
    Ok(OriginCheckReport {
        points,
        exact_zeros,
        zero_crossings,
        origin_root_iff_c0_zero: iff,
        max_rel_route_diff: max_rel,
    })
}
