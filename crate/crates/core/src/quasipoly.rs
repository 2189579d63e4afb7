//! Characteristic quasipolynomial `P(s) + Q(s) e^{-tau s}` of a single-delay
//! system with rank-one delayed matrix.
//!
//! Coefficients are stored in ascending powers: `p[k]` multiplies `s^k`.

use nalgebra::{Matrix4, Matrix5, Vector5};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rotor::DelaySystem;

const NODES: [f64; 5] = [-2.0, -1.0, 0.0, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiPolynomial {
    /// Monic quartic, ascending.
    pub p: [f64; 5],
    /// Delay-term polynomial of degree at most 3, ascending.
    pub q: [f64; 4],
    pub tau: f64,
}

/// Horner evaluation of a real polynomial (ascending coefficients) at complex `s`.
pub fn horner(c: &[f64], s: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &k| acc * s + k)
}

/// Value and first derivative at `s`.
pub fn horner_d(c: &[f64], s: Complex64) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    c.iter().rev().fold((zero, zero), |(v, d), &k| (v * s + k, d * s + v))
}

impl QuasiPolynomial {
    pub fn new(p: [f64; 5], q: [f64; 4], tau: f64) -> Self {
        Self { p, q, tau }
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..*self }
    }

    pub fn p_at(&self, s: Complex64) -> Complex64 {
        horner(&self.p, s)
    }

    pub fn q_at(&self, s: Complex64) -> Complex64 {
        horner(&self.q, s)
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.p_at(s) + self.q_at(s) * (-self.tau * s).exp()
    }

    /// `P'(s) + (Q'(s) - tau Q(s)) e^{-tau s}`.
    pub fn eval_s_derivative(&self, s: Complex64) -> Complex64 {
        let (_, dp) = horner_d(&self.p, s);
        let (q, dq) = horner_d(&self.q, s);
        dp + (dq - q * self.tau) * (-self.tau * s).exp()
    }

    /// Value and s-derivative in one pass, plus a magnitude scale
    /// `1 + |P| + |Q e^{-tau s}|` for relative tolerances.
    pub fn eval_with_derivative(&self, s: Complex64) -> (Complex64, Complex64, f64) {
        let ex = (-self.tau * s).exp();
        let (p, dp) = horner_d(&self.p, s);
        let (q, dq) = horner_d(&self.q, s);
        let qe = q * ex;
        (p + qe, dp + (dq - q * self.tau) * ex, 1.0 + p.norm() + qe.norm())
    }

    pub fn scale(&self, s: Complex64) -> f64 {
        1.0 + self.p_at(s).norm() + (self.q_at(s) * (-self.tau * s).exp()).norm()
    }

    pub fn has_delay_term(&self) -> bool {
        self.q.iter().any(|&c| c != 0.0)
    }
}

fn fit_quartic(values: &[f64; 5]) -> Result<[f64; 5]> {
    let vander = Matrix5::from_fn(|i, j| NODES[i].powi(j as i32));
    let rhs = Vector5::from_column_slice(values);
    let sol = vander
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Structure("singular interpolation system".into()))?;
    Ok([sol[0], sol[1], sol[2], sol[3], sol[4]])
}

fn char_det(a: &Matrix4<f64>, s: f64) -> f64 {
    (Matrix4::identity() * s - a).determinant()
}

/// Recovers `P` and `Q` with `det(sI - A - z A_d) = P(s) + z Q(s)`.
///
/// The determinant is sampled at `z = 0` and `z = 1` on five integer nodes
/// and interpolated; affinity in `z` is then checked at `z = 2`.
pub fn extract_pq(sys: &DelaySystem) -> Result<QuasiPolynomial> {
    let full = sys.undelayed();
    let mut pv = [0.0; 5];
    let mut sv = [0.0; 5];
    for (i, &s) in NODES.iter().enumerate() {
        pv[i] = char_det(&sys.a, s);
        sv[i] = char_det(&full, s);
    }
    let mut p = fit_quartic(&pv)?;
    let qv: [f64; 5] = std::array::from_fn(|i| sv[i] - pv[i]);
    let q5 = fit_quartic(&qv)?;

    let mag = p.iter().chain(q5.iter()).fold(1.0_f64, |m, c| m.max(c.abs()));
    if (p[4] - 1.0).abs() > 1e-9 * mag {
        return Err(Error::Structure(format!("P is not monic (leading {})", p[4])));
    }
    if q5[4].abs() > 1e-9 * mag {
        return Err(Error::Structure(format!("Q has degree 4 (leading {})", q5[4])));
    }
    p[4] = 1.0;
    let qp = QuasiPolynomial::new(p, [q5[0], q5[1], q5[2], q5[3]], sys.tau);

    let doubled = sys.a + sys.a_d * 2.0;
    for s in [0.5, 3.0, -2.5] {
        let direct = char_det(&doubled, s);
        let sc = Complex64::new(s, 0.0);
        let affine = (qp.p_at(sc) + qp.q_at(sc) * 2.0).re;
        let rel = (direct - affine).abs() / (1.0 + direct.abs().max(affine.abs()));
        if rel > 1e-9 {
            return Err(Error::Structure(format!(
                "determinant not affine in the delay term (rel residual {rel:e} at s={s}); A_d is not rank one"
            )));
        }
    }
    Ok(qp)
}

/// `det(sI - A - A_d e^{-tau s})` evaluated directly on the complex matrix.
pub fn characteristic_direct(sys: &DelaySystem, s: Complex64) -> Complex64 {
    let z = (-sys.tau * s).exp();
    let m = Matrix4::<Complex64>::from_fn(|i, j| {
        let id = if i == j { s } else { Complex64::new(0.0, 0.0) };
        id - sys.a[(i, j)] - z * sys.a_d[(i, j)]
    });
    m.determinant()
}
