//! Pitch-flap rotor model in hover.
//!
//! Independent variable is the azimuth angle, so every frequency below is a
//! fraction of the shaft speed and every delay is in azimuth radians. The
//! state vector is ordered `[theta, beta, theta_dot, beta_dot]`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Real part above which an eigenvalue counts as unstable.
pub const UNSTABLE_TOL: f64 = 1e-9;

/// Physical rotor constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RotorParams {
    /// Span-wise location of the blade c.g. (m).
    pub r_g: f64,
    /// Chord (m).
    pub c_h: f64,
    /// Lock number.
    pub gamma: f64,
    /// First flap natural frequency.
    pub lambda1: f64,
    /// Offset of the c.g. from the center of pressure, fraction of chord.
    pub sigma: f64,
    /// Squared non-rotating torsional natural frequency.
    pub nu1_sq: f64,
    /// Actuation constant multiplying `nu1_sq * u` in the pitch equation.
    pub act_gain: f64,
}

impl Default for RotorParams {
    fn default() -> Self {
        Self {
            r_g: 4.1,
            c_h: 0.527,
            gamma: 6.95,
            lambda1: 1.1,
            sigma: 0.08,
            nu1_sq: 10.8,
            act_gain: 3777.0,
        }
    }
}

impl RotorParams {
    /// Default constants with a chosen operating point.
    pub fn with_point(sigma: f64, nu1_sq: f64) -> Self {
        Self {
            sigma,
            nu1_sq,
            ..Self::default()
        }
    }

    /// Parses a flat JSON object whose keys are field names; missing keys keep
    /// their default values.
    pub fn from_json(text: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r_g", self.r_g),
            ("c_h", self.c_h),
            ("gamma", self.gamma),
            ("lambda1", self.lambda1),
            ("sigma", self.sigma),
            ("nu1_sq", self.nu1_sq),
            ("act_gain", self.act_gain),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(invalid(name, format!("non-finite value {v}")));
            }
        }
        for (name, v) in &fields[..4] {
            if *v <= 0.0 {
                return Err(invalid(name, format!("must be positive, got {v}")));
            }
        }
        if self.sigma < 0.0 {
            return Err(invalid("sigma", format!("must be non-negative, got {}", self.sigma)));
        }
        if self.nu1_sq < 0.0 {
            return Err(invalid("nu1_sq", format!("must be non-negative, got {}", self.nu1_sq)));
        }
        Ok(())
    }

    /// The pitch-flap coupling term `12 r_g sigma / c_h`.
    pub fn coupling(&self) -> f64 {
        12.0 * self.r_g * self.sigma / self.c_h
    }

    /// `det K = lambda1^2 nu1^2 - 1.5 gamma r_g sigma / c_h`.
    pub fn stiffness_det(&self) -> f64 {
        self.lambda1.powi(2) * self.nu1_sq - 1.5 * self.gamma * self.r_g * self.sigma / self.c_h
    }
}

/// Feedback gains of `u = a (beta - beta_tau) + b (beta_dot - beta_dot_tau)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlGains {
    pub a: f64,
    pub b: f64,
}

impl ControlGains {
    pub const fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructuralMatrices {
    pub m: Matrix2<f64>,
    pub c: Matrix2<f64>,
    pub k: Matrix2<f64>,
}

impl StructuralMatrices {
    /// Closed-form inverse of `M`; `M` is unit upper-triangular.
    pub fn m_inv(&self) -> Matrix2<f64> {
        Matrix2::new(1.0, -self.m[(0, 1)], 0.0, 1.0)
    }
}

/// Closed-loop retarded system `x' = A x(psi) + A_d x(psi - tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DelaySystem {
    pub a: Matrix4<f64>,
    pub a_d: Matrix4<f64>,
    pub e: Matrix2<f64>,
    pub f: Matrix2<f64>,
    pub structural: StructuralMatrices,
    pub tau: f64,
    pub gains: ControlGains,
    pub params: RotorParams,
}

impl DelaySystem {
    /// The delay-free dynamics `A + A_d`.
    pub fn undelayed(&self) -> Matrix4<f64> {
        self.a + self.a_d
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        build_delay_system(&self.params, self.gains, tau)
    }
}

pub fn build_matrices(params: &RotorParams) -> Result<StructuralMatrices> {
    params.validate()?;
    let cpl = params.coupling();
    let g8 = params.gamma / 8.0;
    Ok(StructuralMatrices {
        m: Matrix2::new(1.0, -cpl, 0.0, 1.0),
        c: Matrix2::new(g8, 0.0, 0.0, g8),
        k: Matrix2::new(params.nu1_sq, -cpl, -g8, params.lambda1.powi(2)),
    })
}

fn companion(lower_left: &Matrix2<f64>, lower_right: &Matrix2<f64>) -> Matrix4<f64> {
    let mut out = Matrix4::zeros();
    out[(0, 2)] = 1.0;
    out[(1, 3)] = 1.0;
    out.fixed_view_mut::<2, 2>(2, 0).copy_from(lower_left);
    out.fixed_view_mut::<2, 2>(2, 2).copy_from(lower_right);
    out
}

/// Uncontrolled state matrix `[[0, I], [-M^-1 K, -M^-1 C]]`.
pub fn build_uncontrolled(params: &RotorParams) -> Result<Matrix4<f64>> {
    let s = build_matrices(params)?;
    let mi = s.m_inv();
    Ok(companion(&(-(mi * s.k)), &(-(mi * s.c))))
}

pub fn build_delay_system(params: &RotorParams, gains: ControlGains, tau: f64) -> Result<DelaySystem> {
    if !tau.is_finite() || tau < 0.0 {
        return Err(invalid(
            "tau",
            format!("delay must be finite and non-negative, got {tau}"),
        ));
    }
    if !gains.a.is_finite() || !gains.b.is_finite() {
        return Err(invalid("gains", "non-finite gain"));
    }
    let s = build_matrices(params)?;
    let mi = s.m_inv();
    let act = params.act_gain * params.nu1_sq;
    let e = Matrix2::new(0.0, act * gains.a, 0.0, 0.0);
    let f = Matrix2::new(0.0, act * gains.b, 0.0, 0.0);

    let a = companion(&(-(mi * s.k) + e), &(-(mi * s.c) + f));
    let mut a_d = Matrix4::zeros();
    a_d.fixed_view_mut::<2, 2>(2, 0).copy_from(&(-e));
    a_d.fixed_view_mut::<2, 2>(2, 2).copy_from(&(-f));

    Ok(DelaySystem {
        a,
        a_d,
        e,
        f,
        structural: s,
        tau,
        gains,
        params: *params,
    })
}

/// Eigenvalues of a 4x4 real matrix, sorted by descending real part.
pub fn eigenvalues(m: &Matrix4<f64>) -> Vec<Complex64> {
    let mut ev: Vec<Complex64> = m.complex_eigenvalues().iter().copied().collect();
    ev.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    ev
}

/// Number of eigenvalues with real part above [`UNSTABLE_TOL`].
pub fn unstable_count(m: &Matrix4<f64>) -> usize {
    eigenvalues(m).iter().filter(|l| l.re > UNSTABLE_TOL).count()
}

/// `nu1^2` on the pitch-divergence line (`det K = 0`) for a given `sigma`.
pub fn divergence_boundary(sigma: f64, params: &RotorParams) -> f64 {
    3.0 * params.gamma * params.r_g * sigma / (2.0 * params.c_h * params.lambda1.powi(2))
}

/// Point `(nu1_sq, sigma)` on the flutter boundary where `A_u` has roots at `±j omega_f`.
pub fn flutter_boundary(omega_f: f64, params: &RotorParams) -> Result<(f64, f64)> {
    if !(omega_f.is_finite() && omega_f > 0.0) {
        return Err(invalid("omega_f", format!("must be positive, got {omega_f}")));
    }
    let w2 = omega_f * omega_f;
    if (w2 - 1.0).abs() < 1e-12 {
        return Err(Error::FlutterPole);
    }
    let l2 = params.lambda1.powi(2);
    let g = params.gamma;
    let nu1_sq = 2.0 * w2 - l2;
    let num = params.c_h * (g * g * w2 + 64.0 * w2 * w2 - 128.0 * w2 * l2 + 64.0 * l2 * l2);
    let sigma = num / (96.0 * params.r_g * g * (w2 - 1.0));
    Ok((nu1_sq, sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionLabel {
    Stable,
    DivergenceOnly,
    FlutterOnly,
    Both,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegionLabel::Stable => "Stable",
            RegionLabel::DivergenceOnly => "DivergenceOnly",
            RegionLabel::FlutterOnly => "FlutterOnly",
            RegionLabel::Both => "Both",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub label: RegionLabel,
    /// Unstable real eigenvalues (divergence modes).
    pub divergent_modes: usize,
    /// Unstable complex-conjugate pairs (flutter modes).
    pub flutter_pairs: usize,
    /// Some eigenvalue has `|Re| <= UNSTABLE_TOL`; the point sits on a boundary.
    pub marginal: bool,
    pub eigenvalues: Vec<Complex64>,
}

pub fn classify_uncontrolled(params: &RotorParams) -> Result<Classification> {
    let au = build_uncontrolled(params)?;
    let ev = eigenvalues(&au);
    let mut divergent = 0;
    let mut flutter_roots = 0;
    let mut marginal = false;
    for l in &ev {
        if l.re.abs() <= UNSTABLE_TOL {
            marginal = true;
        } else if l.re > UNSTABLE_TOL {
            if l.im.abs() <= 1e-7 * (1.0 + l.norm()) {
                divergent += 1;
            } else {
                flutter_roots += 1;
            }
        }
    }
    let flutter_pairs = flutter_roots / 2;
    let label = match (divergent > 0, flutter_pairs > 0) {
        (false, false) => RegionLabel::Stable,
        (true, false) => RegionLabel::DivergenceOnly,
        (false, true) => RegionLabel::FlutterOnly,
        (true, true) => RegionLabel::Both,
    };
    Ok(Classification {
        label,
        divergent_modes: divergent,
        flutter_pairs,
        marginal,
        eigenvalues: ev,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DivergencePoint {
    pub sigma: f64,
    pub nu1_sq: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlutterPoint {
    pub omega_f: f64,
    pub nu1_sq: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct BoundaryChart {
    pub divergence: Vec<DivergencePoint>,
    pub flutter: Vec<FlutterPoint>,
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Tabulates both stability boundaries. Sweeps with `lo > hi` are empty;
/// flutter samples at the `omega_f = 1` pole are skipped.
pub fn boundary_chart(
    params: &RotorParams,
    sigma_range: (f64, f64),
    omega_f_range: (f64, f64),
    n_points: usize,
) -> BoundaryChart {
    let mut chart = BoundaryChart::default();
    if sigma_range.0 <= sigma_range.1 {
        chart.divergence = linspace(sigma_range.0, sigma_range.1, n_points)
            .into_iter()
            .map(|sigma| DivergencePoint {
                sigma,
                nu1_sq: divergence_boundary(sigma, params),
            })
            .collect();
    }
    if omega_f_range.0 <= omega_f_range.1 {
        chart.flutter = linspace(omega_f_range.0, omega_f_range.1, n_points)
            .into_iter()
            .filter_map(|w| {
                flutter_boundary(w, params).ok().map(|(nu1_sq, sigma)| FlutterPoint {
                    omega_f: w,
                    nu1_sq,
                    sigma,
                })
            })
            .collect();
    }
    chart
}
