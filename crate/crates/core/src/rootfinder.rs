//! Characteristic roots of a quasipolynomial inside a rectangle.
//!
//! Seeds come from grid cells crossed by both the `Re f = 0` and `Im f = 0`
//! level curves; each seed is polished by damped Newton. Counts are
//! certified with the argument principle on the rectangle boundary.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quasipoly::QuasiPolynomial;

const NEWTON_MAX_ITER: usize = 50;
const DEDUP_TOL: f64 = 1e-6;
const MAX_EDGE_EVALS: usize = 1 << 16;

/// Axis-aligned rectangle `[re_min, re_max] x [im_min, im_max]` in the s-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let r = Self {
            re_min,
            re_max,
            im_min,
            im_max,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.re_min, self.re_max, self.im_min, self.im_max];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("region", "non-finite bound"));
        }
        if self.re_min >= self.re_max || self.im_min >= self.im_max {
            return Err(invalid("region", format!("empty rectangle {self:?}")));
        }
        Ok(())
    }

    /// Default search window for the rotor problem.
    pub fn rotor_default() -> Self {
        Self {
            re_min: -2.0,
            re_max: 1.5,
            im_min: 0.0,
            im_max: 5.0,
        }
    }

    pub fn contains(&self, s: Complex64, tol: f64) -> bool {
        s.re >= self.re_min - tol && s.re <= self.re_max + tol && s.im >= self.im_min - tol && s.im <= self.im_max + tol
    }

    /// Upper-half window whose mirror image covers the lower half.
    pub fn is_upper_half(&self) -> bool {
        self.im_min == 0.0
    }

    /// The window together with its reflection about the real axis.
    pub fn mirrored(&self) -> Self {
        Self {
            im_min: -self.im_max,
            ..*self
        }
    }

    pub fn expanded(&self, d: f64) -> Self {
        Self {
            re_min: self.re_min - d,
            re_max: self.re_max + d,
            im_min: self.im_min - d,
            im_max: self.im_max + d,
        }
    }

    fn min_extent(&self) -> f64 {
        (self.re_max - self.re_min).min(self.im_max - self.im_min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Root {
    pub s: Complex64,
    /// `|f(s)|`.
    pub residual: f64,
    pub multiplicity: usize,
}

impl Root {
    pub fn is_real(&self) -> bool {
        self.s.im == 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    /// Sorted by real part, then imaginary part.
    pub roots: Vec<Root>,
    pub region: Region,
    /// Winding-number count; for upper-half windows it covers the mirrored
    /// rectangle so real roots are interior.
    pub certified_count: Option<usize>,
    /// The certified count equals the number of roots found.
    pub certified: bool,
    /// Cells where a level curve crossed the cell boundary more than twice.
    pub ambiguous_cells: usize,
    /// Seeds whose Newton iteration stalled inside the region.
    pub newton_failures: Vec<Complex64>,
}

impl RootSet {
    /// Roots counted with multiplicity, conjugates included for upper-half windows.
    pub fn counted(&self) -> usize {
        self.roots
            .iter()
            .map(|r| {
                if self.region.is_upper_half() && !r.is_real() {
                    2 * r.multiplicity
                } else {
                    r.multiplicity
                }
            })
            .sum()
    }

    pub fn rightmost(&self) -> Option<&Root> {
        self.roots.iter().max_by(|a, b| a.s.re.total_cmp(&b.s.re))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Curve {
    Re,
    Im,
}

/// A point where a level curve `Re f = 0` or `Im f = 0` cuts a grid edge.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub curve: Curve,
    pub re: f64,
    pub im: f64,
}

type Component = fn(Complex64) -> f64;

struct Grid {
    nx: usize,
    ny: usize,
    hx: f64,
    hy: f64,
    region: Region,
    values: Vec<Complex64>,
}

impl Grid {
    fn build(qp: &QuasiPolynomial, region: &Region, step: f64) -> Result<Self> {
        region.validate()?;
        if !(step > 0.0) || step > region.min_extent() / 10.0 {
            return Err(invalid(
                "grid_step",
                format!("must lie in (0, {}], got {step}", region.min_extent() / 10.0),
            ));
        }
        let nx = ((region.re_max - region.re_min) / step).ceil() as usize;
        let ny = ((region.im_max - region.im_min) / step).ceil() as usize;
        let hx = (region.re_max - region.re_min) / nx as f64;
        let hy = (region.im_max - region.im_min) / ny as f64;
        let values: Vec<Complex64> = (0..=ny)
            .into_par_iter()
            .flat_map_iter(|j| {
                let im = region.im_min + j as f64 * hy;
                (0..=nx).map(move |i| qp.eval(Complex64::new(region.re_min + i as f64 * hx, im)))
            })
            .collect();
        Ok(Self {
            nx,
            ny,
            hx,
            hy,
            region: *region,
            values,
        })
    }

    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.values[j * (self.nx + 1) + i]
    }

    fn node(&self, i: usize, j: usize) -> Complex64 {
        Complex64::new(
            self.region.re_min + i as f64 * self.hx,
            self.region.im_min + j as f64 * self.hy,
        )
    }

    /// Edge crossings of one component inside cell `(i, j)`.
    fn cell_crossings(&self, i: usize, j: usize, part: fn(Complex64) -> f64) -> Vec<Complex64> {
        let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
        let mut out = Vec::with_capacity(2);
        for e in 0..4 {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            let (va, vb) = (part(self.at(a.0, a.1)), part(self.at(b.0, b.1)));
            if va * vb > 0.0 {
                continue;
            }
            let (za, zb) = (self.node(a.0, a.1), self.node(b.0, b.1));
            let t = if va == vb { 0.5 } else { va / (va - vb) };
            out.push(za + (zb - za) * t);
        }
        out
    }

    fn edge_points(&self) -> Vec<CurvePoint> {
        let mut out = Vec::new();
        let parts: [(Curve, Component); 2] = [(Curve::Re, |z| z.re), (Curve::Im, |z| z.im)];
        for (curve, part) in parts {
            for j in 0..=self.ny {
                for i in 0..=self.nx {
                    let here = part(self.at(i, j));
                    let mut push = |ii: usize, jj: usize| {
                        let there = part(self.at(ii, jj));
                        if here * there < 0.0 {
                            let t = here / (here - there);
                            let z = self.node(i, j) + (self.node(ii, jj) - self.node(i, j)) * t;
                            out.push(CurvePoint {
                                curve,
                                re: z.re,
                                im: z.im,
                            });
                        }
                    };
                    if i < self.nx {
                        push(i + 1, j);
                    }
                    if j < self.ny {
                        push(i, j + 1);
                    }
                }
            }
        }
        out
    }
}

fn segment_intersection(p: &[Complex64], q: &[Complex64]) -> Option<Complex64> {
    let (a, b, c, d) = (p[0], p[1], q[0], q[1]);
    let r = b - a;
    let s = d - c;
    let den = r.re * s.im - r.im * s.re;
    if den.abs() < 1e-300 {
        return None;
    }
    let w = c - a;
    let t = (w.re * s.im - w.im * s.re) / den;
    let u = (w.re * r.im - w.im * r.re) / den;
    if (-1e-9..=1.0 + 1e-9).contains(&t) && (-1e-9..=1.0 + 1e-9).contains(&u) {
        Some(a + r * t)
    } else {
        None
    }
}

enum NewtonOutcome {
    Converged(Complex64),
    Left,
    Stalled,
}

fn newton(qp: &QuasiPolynomial, seed: Complex64, region: &Region, margin: f64) -> NewtonOutcome {
    let mut s = seed;
    let (mut f, mut df, mut sc) = qp.eval_with_derivative(s);
    for _ in 0..NEWTON_MAX_ITER {
        if f.norm() <= 1e-12 * sc {
            break;
        }
        if df.norm() == 0.0 {
            return NewtonOutcome::Stalled;
        }
        let step = f / df;
        let mut lam = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let cand = s - step * lam;
            let (fc, dc, scc) = qp.eval_with_derivative(cand);
            if fc.norm() < f.norm() {
                accepted = Some((cand, fc, dc, scc));
                break;
            }
            lam *= 0.5;
        }
        let Some((cand, fc, dc, scc)) = accepted else { break };
        let moved = (cand - s).norm();
        s = cand;
        f = fc;
        df = dc;
        sc = scc;
        if !region.contains(s, margin) {
            return NewtonOutcome::Left;
        }
        if moved <= 1e-15 * (1.0 + s.norm()) {
            break;
        }
    }
    if !region.contains(s, margin) {
        return NewtonOutcome::Left;
    }
    if f.norm() < 1e-9 * (1.0 + qp.p_at(s).norm()) {
        NewtonOutcome::Converged(s)
    } else {
        NewtonOutcome::Stalled
    }
}

fn residual(qp: &QuasiPolynomial, s: Complex64) -> f64 {
    qp.eval(s).norm()
}

/// Snaps numerically real roots onto the real axis and re-polishes there.
fn snap_real(qp: &QuasiPolynomial, s: Complex64) -> Complex64 {
    if s.im.abs() > 1e-9 * (1.0 + s.norm()) {
        return s;
    }
    let mut x = s.re;
    for _ in 0..5 {
        let z = Complex64::new(x, 0.0);
        let (f, df, _) = qp.eval_with_derivative(z);
        if df.re == 0.0 {
            break;
        }
        let nx = x - f.re / df.re;
        if !nx.is_finite() {
            break;
        }
        x = nx;
    }
    let real = Complex64::new(x, 0.0);
    if residual(qp, real) <= residual(qp, s) * 10.0 + 1e-14 {
        real
    } else {
        s
    }
}

/// Zero-level-curve crossing points on grid edges, for external plotting.
pub fn zero_curves(qp: &QuasiPolynomial, region: &Region, grid_step: f64) -> Result<Vec<CurvePoint>> {
    Ok(Grid::build(qp, region, grid_step)?.edge_points())
}

pub fn find_roots(qp: &QuasiPolynomial, region: &Region, grid_step: f64) -> Result<RootSet> {
    let grid = Grid::build(qp, region, grid_step)?;
    let mut seeds = Vec::new();
    let mut ambiguous_cells = 0;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let re_pts = grid.cell_crossings(i, j, |z| z.re);
            if re_pts.is_empty() {
                continue;
            }
            let im_pts = grid.cell_crossings(i, j, |z| z.im);
            if im_pts.is_empty() {
                continue;
            }
            let center = grid.node(i, j) + Complex64::new(grid.hx / 2.0, grid.hy / 2.0);
            if re_pts.len() == 2 && im_pts.len() == 2 {
                seeds.push(segment_intersection(&re_pts, &im_pts).unwrap_or(center));
            } else {
                if re_pts.len() > 2 || im_pts.len() > 2 {
                    ambiguous_cells += 1;
                }
                seeds.push(center);
            }
        }
    }

    let margin = 1e-9 * (1.0 + region.re_max.abs().max(region.im_max.abs()));
    // iterates may dip below the real axis on the way to a real root
    let walk = if region.is_upper_half() {
        region.mirrored()
    } else {
        *region
    };
    let outcomes: Vec<(Complex64, NewtonOutcome)> = seeds
        .par_iter()
        .map(|&seed| (seed, newton(qp, seed, &walk, margin)))
        .collect();

    let mut found: Vec<Complex64> = Vec::new();
    let mut newton_failures = Vec::new();
    for (seed, out) in outcomes {
        match out {
            NewtonOutcome::Converged(s) => found.push(snap_real(qp, s)),
            NewtonOutcome::Stalled => newton_failures.push(seed),
            NewtonOutcome::Left => {}
        }
    }
    if region.is_upper_half() {
        for s in &mut found {
            if s.im < 0.0 {
                *s = s.conj();
            }
        }
    }
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let mut unique: Vec<Complex64> = Vec::new();
    for s in found {
        if !unique.iter().any(|u| (u - s).norm() < DEDUP_TOL) {
            unique.push(s);
        }
    }

    let mut roots = Vec::with_capacity(unique.len());
    for (k, &s) in unique.iter().enumerate() {
        let (_, df, sc) = qp.eval_with_derivative(s);
        let mut multiplicity = 1;
        // Newton stalls at |s - s0| ~ sqrt(eps) on a multiple root, so the
        // slope test is loose and the box count decides.
        if df.norm() < 1e-4 * sc {
            let nearest = unique
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != k)
                .map(|(_, u)| (u - s).norm())
                .chain(std::iter::once(if region.is_upper_half() {
                    2.0 * s.im.abs()
                } else {
                    f64::INFINITY
                }))
                .filter(|d| *d > 0.0)
                .fold(f64::INFINITY, f64::min);
            let h = (0.4 * nearest).min(1e-3);
            let r = Region::new(s.re - h, s.re + h, s.im - h, s.im + h)?;
            multiplicity = count_roots(qp, &r).unwrap_or(1).max(1);
        }
        roots.push(Root {
            s,
            residual: residual(qp, s),
            multiplicity,
        });
    }
    roots.sort_by(|a, b| a.s.re.total_cmp(&b.s.re).then(a.s.im.total_cmp(&b.s.im)));

    let count_region = if region.is_upper_half() {
        region.mirrored()
    } else {
        *region
    };
    let certified_count = count_roots(qp, &count_region).ok();
    let mut set = RootSet {
        roots,
        region: *region,
        certified_count,
        certified: false,
        ambiguous_cells,
        newton_failures,
    };
    set.certified = set.certified_count == Some(set.counted());
    Ok(set)
}

fn edge_increment(qp: &QuasiPolynomial, a: Complex64, b: Complex64, evals: &mut usize) -> Result<f64> {
    let len = (b - a).norm();
    let n0 = ((len / 5e-3).ceil() as usize).clamp(64, 4096);
    let value = |z: Complex64, evals: &mut usize| -> Result<Complex64> {
        *evals += 1;
        let f = qp.eval(z);
        if f.norm() < 1e-10 * qp.scale(z) {
            return Err(Error::BoundaryRoot);
        }
        Ok(f)
    };

    let mut total = 0.0;
    let mut prev_z = a;
    let mut prev_f = value(a, evals)?;
    for k in 1..=n0 {
        let z = a + (b - a) * (k as f64 / n0 as f64);
        let f = value(z, evals)?;
        let mut stack = vec![(prev_z, prev_f, z, f)];
        while let Some((za, fa, zb, fb)) = stack.pop() {
            let d = (fb / fa).arg();
            if d.abs() < PI / 2.0 {
                total += d;
                continue;
            }
            if *evals >= MAX_EDGE_EVALS || (zb - za).norm() < 1e-13 * (1.0 + za.norm()) {
                return Err(Error::Certification(
                    "argument sampling did not resolve along the contour".into(),
                ));
            }
            let zm = (za + zb) * 0.5;
            let fm = value(zm, evals)?;
            // second half pushed first so the first half is processed next
            stack.push((zm, fm, zb, fb));
            stack.push((za, fa, zm, fm));
        }
        prev_z = z;
        prev_f = f;
    }
    Ok(total)
}

fn winding(qp: &QuasiPolynomial, r: &Region) -> Result<usize> {
    let c = [
        Complex64::new(r.re_min, r.im_min),
        Complex64::new(r.re_max, r.im_min),
        Complex64::new(r.re_max, r.im_max),
        Complex64::new(r.re_min, r.im_max),
    ];
    let mut total = 0.0;
    for e in 0..4 {
        let mut evals = 0;
        total += edge_increment(qp, c[e], c[(e + 1) % 4], &mut evals)?;
    }
    let turns = total / (2.0 * PI);
    let n = turns.round();
    if (turns - n).abs() > 0.1 || n < -0.5 {
        return Err(Error::Certification(format!("non-integral winding {turns}")));
    }
    Ok(n as usize)
}

/// Number of roots (with multiplicity) inside `region`, by the argument principle.
/// A root on the boundary triggers up to three outward perturbations.
pub fn count_roots(qp: &QuasiPolynomial, region: &Region) -> Result<usize> {
    region.validate()?;
    let mut d = 0.0;
    for _ in 0..4 {
        match winding(qp, &region.expanded(d)) {
            Err(Error::BoundaryRoot) => d = if d == 0.0 { 1e-6 } else { 2.0 * d },
            other => return other,
        }
    }
    Err(Error::BoundaryRoot)
}

/// Radius beyond which no root with `Re s >= re_lo` can exist:
/// `|P(s)| > |Q(s)| e^{-tau re_lo} >= |Q(s) e^{-tau s}|` for `|s| >= R`.
pub fn modulus_bound(qp: &QuasiPolynomial, re_lo: f64) -> f64 {
    let w = (-qp.tau * re_lo).exp();
    let lead = qp.p[4];
    let h = |r: f64| {
        let mut v = lead;
        for k in 0..4 {
            v -= qp.p[k].abs() * r.powi(k as i32 - 4);
            v -= w * qp.q[k].abs() * r.powi(k as i32 - 4);
        }
        v
    };
    let mut hi = 1.0;
    while h(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = hi / 2.0;
    if h(lo) > 0.0 {
        return hi.min(1.0);
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if h(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi * (1.0 + 1e-9)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RightmostScan {
    pub region: Region,
    pub grid_step: f64,
}

impl Default for RightmostScan {
    fn default() -> Self {
        Self {
            region: Region::rotor_default(),
            grid_step: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Rightmost {
    pub root: Complex64,
    /// Spectral abscissa estimate, `root.re`.
    pub abscissa: f64,
    /// No root lies to the right of `root` (argument-principle check over
    /// the whole half-plane strip permitted by [`modulus_bound`]).
    pub certified: bool,
    /// Imaginary cap of the emptiness check.
    pub omega_cap: f64,
    pub search_region: Region,
    pub roots: Vec<Root>,
}

/// Root of maximal real part. The search window is widened until the
/// half-plane to the right of the best root is certified empty.
pub fn rightmost_root(qp: &QuasiPolynomial, scan: &RightmostScan) -> Result<Rightmost> {
    let mut region = scan.region;
    region.validate()?;
    let mut last = None;
    for _ in 0..6 {
        let step = scan.grid_step.max(region.min_extent() / 4000.0);
        let set = find_roots(qp, &region, step)?;
        let Some(best) = set.rightmost().copied() else {
            // everything lies further left
            let w = region.re_max - region.re_min;
            region.re_min -= w;
            continue;
        };
        let x0 = best.s.re + 1e-6 * (1.0 + best.s.re.abs());
        let cap = modulus_bound(qp, x0);
        if !cap.is_finite() {
            return Err(Error::Certification("no finite modulus bound".into()));
        }
        let right = if cap <= x0 {
            Some(0)
        } else {
            let r = Region::new(x0, cap + 0.1, -cap - 0.1, cap + 0.1)?;
            count_roots(qp, &r).ok()
        };
        let result = Rightmost {
            root: best.s,
            abscissa: best.s.re,
            certified: right == Some(0),
            omega_cap: cap,
            search_region: region,
            roots: set.roots,
        };
        match right {
            Some(0) => return Ok(result),
            Some(_) => {
                region.re_max = region.re_max.max(cap + 0.1);
                region.im_max = region.im_max.max(cap + 0.1);
                last = Some(result);
            }
            None => return Ok(result),
        }
    }
    last.ok_or_else(|| Error::Certification("no root found in any search window".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(roots: &[Complex64]) -> QuasiPolynomial {
        // expand prod (s - r) for up to four roots; pad with far-left roots
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, v) in c.iter().enumerate() {
                next[k + 1] += v;
                next[k] -= v * r;
            }
            c = next;
        }
        assert_eq!(c.len(), 5);
        QuasiPolynomial::new(std::array::from_fn(|k| c[k].re), [0.0; 4], 0.0)
    }

    fn z(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn recovers_polynomial_roots() {
        let rs = [z(-0.5, 1.2), z(-0.5, -1.2), z(0.3, 0.0), z(-1.1, 0.0)];
        let qp = poly(&rs);
        let set = find_roots(&qp, &Region::new(-2.0, 1.0, 0.0, 2.0).unwrap(), 0.01).unwrap();
        assert_eq!(set.roots.len(), 3);
        assert!(set.certified);
        for want in [rs[0], rs[2], rs[3]] {
            assert!(set.roots.iter().any(|r| (r.s - want).norm() < 1e-10), "{want}");
        }
    }

    #[test]
    fn counts_double_root() {
        let s0 = z(0.4, 0.7);
        let qp = poly(&[s0, s0, s0.conj(), s0.conj()]);
        let r = Region::new(0.2, 0.6, 0.5, 0.9).unwrap();
        assert_eq!(count_roots(&qp, &r).unwrap(), 2);
        let set = find_roots(&qp, &Region::new(-1.0, 1.0, 0.0, 1.5).unwrap(), 0.01).unwrap();
        assert_eq!(set.roots.len(), 1);
        assert_eq!(set.roots[0].multiplicity, 2);
        assert!(set.certified);
    }

    #[test]
    fn empty_region_counts_zero() {
        let qp = poly(&[z(-1.0, 0.0), z(-2.0, 0.0), z(-3.0, 0.0), z(-4.0, 0.0)]);
        assert_eq!(count_roots(&qp, &Region::new(0.0, 2.0, -1.0, 1.0).unwrap()).unwrap(), 0);
    }

    #[test]
    fn boundary_root_is_perturbed() {
        let qp = poly(&[z(0.0, 0.0), z(-2.0, 0.0), z(-3.0, 0.0), z(-4.0, 0.0)]);
        // root at the origin sits on the left edge
        let n = count_roots(&qp, &Region::new(0.0, 1.0, -1.0, 1.0).unwrap()).unwrap();
        assert_eq!(n, 1);
    }

    #[test]
    fn rejects_coarse_grid() {
        let qp = poly(&[z(-1.0, 0.0); 4]);
        let r = Region::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(find_roots(&qp, &r, 0.2).is_err());
        assert!(Region::new(1.0, 0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn modulus_bound_encloses_roots() {
        let rs = [z(-0.5, 3.0), z(-0.5, -3.0), z(2.0, 0.0), z(-1.0, 0.0)];
        let qp = poly(&rs);
        let r = modulus_bound(&qp, -10.0);
        assert!(rs.iter().all(|s| s.norm() < r));
    }

    #[test]
    fn rightmost_of_polynomial() {
        let qp = poly(&[z(-0.2, 1.0), z(-0.2, -1.0), z(-0.7, 0.0), z(-1.5, 0.0)]);
        let rm = rightmost_root(&qp, &RightmostScan::default()).unwrap();
        assert!(rm.certified);
        assert!((rm.root - z(-0.2, 1.0)).norm() < 1e-10);
    }

    #[test]
    fn rightmost_widens_window() {
        // rightmost root outside the initial window, to the right
        let qp = poly(&[z(2.5, 0.0), z(-0.2, 1.0), z(-0.2, -1.0), z(-1.5, 0.0)]);
        let scan = RightmostScan {
            region: Region::new(-1.0, 1.0, 0.0, 2.0).unwrap(),
            grid_step: 0.01,
        };
        let rm = rightmost_root(&qp, &scan).unwrap();
        assert!(rm.certified, "{rm:?}");
        assert!((rm.root - z(2.5, 0.0)).norm() < 1e-10);
    }
}
