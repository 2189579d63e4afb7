//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::Matrix4;
use num_complex::Complex64;
use pitchflap::rotor::DelaySystem;

type C = Complex64;

/// Cofactor expansion along the first row, no pivoting or factorization.
pub fn laplace_det(m: &[[C; 4]; 4]) -> C {
    fn det3(m: &[[C; 4]; 4], rows: [usize; 3], cols: [usize; 3]) -> C {
        let e = |i: usize, j: usize| m[rows[i]][cols[j]];
        e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1)) - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
            + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
    }
    let mut acc = C::new(0.0, 0.0);
    for j in 0..4 {
        let cols: Vec<usize> = (0..4).filter(|&c| c != j).collect();
        let minor = det3(m, [1, 2, 3], [cols[0], cols[1], cols[2]]);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += m[0][j] * minor * sign;
    }
    acc
}

/// `det(sI - A - A_d e^{-tau s})` by cofactor expansion.
pub fn char_det_laplace(sys: &DelaySystem, s: C) -> C {
    let z = (-sys.tau * s).exp();
    let m: [[C; 4]; 4] = std::array::from_fn(|i| {
        std::array::from_fn(|j| {
            let id = if i == j { s } else { C::new(0.0, 0.0) };
            id - sys.a[(i, j)] - z * sys.a_d[(i, j)]
        })
    });
    laplace_det(&m)
}

/// `exp(A t) x0`.
pub fn expm_solution(a: &Matrix4<f64>, x0: [f64; 4], t: f64) -> [f64; 4] {
    let v = (a * t).exp() * nalgebra::Vector4::from_column_slice(&x0);
    [v[0], v[1], v[2], v[3]]
}

pub fn dist(a: C, b: C) -> f64 {
    (a - b).norm()
}

/// Largest componentwise gap between two complex numbers.
pub fn comp_gap(a: C, b: C) -> f64 {
    (a.re - b.re).abs().max((a.im - b.im).abs())
}
