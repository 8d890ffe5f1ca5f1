//! Dipole-dipole kernel, its directional Taylor coefficients and the
//! collective decay modes.
//!
//! The kernel for two dipoles with orientation q̂ separated by R is
//!
//! ```text
//! g(R) = (Γ/2) [ h₀(kR) + (3 (R̂·q̂)(R̂·q̂*) − 1)/2 · h₂(kR) ]
//! ```
//!
//! with outgoing spherical Hankel functions h_l = j_l + i y_l. Its real part
//! is the correlated decay and its imaginary part the coherent exchange.
//! Near R = 0 the printed Hankel forms cancel catastrophically in their real
//! part, so the real part is evaluated from the power series of j_l there.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::config::{CVec3, Vec3};
use crate::error::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);
const SERIES_CUTOFF: f64 = 1.0;
const SERIES_TERMS: usize = 24;

/// Laurent polynomial Σ c x^p multiplying e^{ix}.
type Laurent = &'static [(C64, i32)];

const P0: Laurent = &[(C64::new(0.0, -1.0), -1)];
const P2: Laurent = &[
    (C64::new(0.0, -3.0), -3),
    (C64::new(-3.0, 0.0), -2),
    (C64::new(0.0, 1.0), -1),
];

fn laurent(p: Laurent, x: f64, deriv: u32) -> C64 {
    p.iter()
        .map(|&(c, k)| {
            let kf = k as f64;
            let factor = match deriv {
                0 => 1.0,
                1 => kf,
                _ => kf * (kf - 1.0),
            };
            c * factor * x.powi(k - deriv as i32)
        })
        .sum()
}

/// Outgoing spherical Hankel function h_l^{(1)}(x), l ∈ {0, 2}, from the closed forms
/// h₀ = e^{ix}/(ix) and h₂ = (−3i/x³ − 3/x² + i/x) e^{ix}.
pub fn hankel_out(l: u32, x: f64) -> Result<C64> {
    let p = match l {
        0 => P0,
        2 => P2,
        _ => return Err(Error::Domain(format!("hankel_out: only l = 0, 2 supported (got {l})"))),
    };
    if !(x > 0.0 && x.is_finite()) {
        return Err(Error::Domain(format!("hankel_out: argument must be > 0 (got {x})")));
    }
    Ok(C64::from_polar(1.0, x) * laurent(p, x, 0))
}

/// j_l and its first two derivatives from the power series.
fn bessel_j_series(l: u32, x: f64) -> [f64; 3] {
    let mut coeff = 1.0 / double_factorial(2 * l + 1);
    let mut out = [0.0; 3];
    for n in 0..SERIES_TERMS {
        let p = (2 * n) as i32 + l as i32;
        let pf = p as f64;
        out[0] += coeff * x.powi(p);
        if p >= 1 {
            out[1] += coeff * pf * x.powi(p - 1);
        }
        if p >= 2 {
            out[2] += coeff * pf * (pf - 1.0) * x.powi(p - 2);
        }
        coeff *= -1.0 / (2.0 * (n as f64 + 1.0) * (2.0 * n as f64 + 2.0 * l as f64 + 3.0));
    }
    out
}

fn double_factorial(n: u32) -> f64 {
    (1..=n).rev().step_by(2).map(f64::from).product()
}

/// h_l, h_l', h_l'' at x > 0.
fn hankel_with_derivatives(l: u32, x: f64) -> [C64; 3] {
    let p = if l == 0 { P0 } else { P2 };
    let e = C64::from_polar(1.0, x);
    let (q0, q1, q2) = (laurent(p, x, 0), laurent(p, x, 1), laurent(p, x, 2));
    let mut h = [e * q0, e * (I * q0 + q1), e * (-q0 + 2.0 * I * q1 + q2)];
    if x < SERIES_CUTOFF {
        let j = bessel_j_series(l, x);
        for k in 0..3 {
            h[k].re = j[k];
        }
    }
    h
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn dot_c(r: &Vec3, q: &CVec3) -> C64 {
    q[0] * r[0] + q[1] * r[1] + q[2] * r[2]
}

/// g(R) and its first and second derivatives along the unit vector `u`
/// (units Γ, Γk, Γk²). Closed-form chain rule through |R| and the angular factor.
pub fn greens_directional(r: &Vec3, q: &CVec3, u: &Vec3) -> Result<[C64; 3]> {
    let dist = dot(r, r).sqrt();
    if !(dist > 0.0) || !dist.is_finite() {
        return Err(Error::Domain(format!(
            "kernel evaluated at separation {dist}; self-terms come from self_limits"
        )));
    }
    // radial coordinate along the line R + εu
    let c = dot(r, u) / dist;
    let r1 = c;
    let r2 = (1.0 - c * c) / dist;

    // angular weight w = |R·q|² / R²
    let alpha = dot_c(r, q);
    let beta = dot_c(u, q);
    let p0 = alpha.norm_sqr();
    let p1 = 2.0 * (alpha * beta.conj()).re;
    let p2 = 2.0 * beta.norm_sqr();
    let d2 = dist * dist;
    let d3 = d2 * dist;
    let d4 = d2 * d2;
    let w0 = p0 / d2;
    let w1 = p1 / d2 - 2.0 * p0 * r1 / d3;
    let w2 = p2 / d2 - 4.0 * p1 * r1 / d3 - 2.0 * p0 * r2 / d3 + 6.0 * p0 * r1 * r1 / d4;
    let a0 = (3.0 * w0 - 1.0) / 2.0;
    let a1 = 1.5 * w1;
    let a2 = 1.5 * w2;

    let h0 = hankel_with_derivatives(0, dist);
    let h2 = hankel_with_derivatives(2, dist);

    let g = 0.5 * (h0[0] + a0 * h2[0]);
    let g1 = 0.5 * (h0[1] * r1 + a1 * h2[0] + a0 * h2[1] * r1);
    let g2 = 0.5
        * (h0[2] * r1 * r1
            + h0[1] * r2
            + a2 * h2[0]
            + 2.0 * a1 * h2[1] * r1
            + a0 * (h2[2] * r1 * r1 + h2[1] * r2));
    Ok([g, g1, g2])
}

/// The dipole-dipole kernel g(R) in units of Γ.
pub fn greens(r: &Vec3, q: &CVec3) -> Result<C64> {
    // direction is irrelevant for the value
    Ok(greens_directional(r, q, &[1.0, 0.0, 0.0])?[0])
}

/// Real parts of the kernel and of its second directional derivative at R = 0:
/// `(Re g(0), Re g''(0)/k²) = (Γ/2, Γ(−1/6 + A(û)/15))` with
/// `A(û) = (3|û·q̂|² − 1)/2`.
pub fn self_limits(q: &CVec3, u: &Vec3) -> (f64, f64) {
    let w = dot_c(u, q).norm_sqr();
    let a = (3.0 * w - 1.0) / 2.0;
    (0.5, -1.0 / 6.0 + a / 15.0)
}

/// Taylor coefficients of g(R_ij + ε û) in kε for one ordered pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreensTaylor {
    pub i: usize,
    pub j: usize,
    pub g0: C64,
    pub g1: C64,
    pub g2: C64,
}

/// Coefficients for the pair (i, j) with R_ij = R_i − R_j. For i = j the
/// self limits are used and the divergent imaginary parts are dropped.
pub fn greens_taylor(
    i: usize,
    j: usize,
    oscillation: &Vec3,
    positions: &[Vec3],
    q: &CVec3,
) -> Result<GreensTaylor> {
    if i >= positions.len() || j >= positions.len() {
        return Err(Error::Argument(format!(
            "pair ({i}, {j}) out of range for {} atoms",
            positions.len()
        )));
    }
    if i == j {
        let (g0, g2) = self_limits(q, oscillation);
        return Ok(GreensTaylor {
            i,
            j,
            g0: g0.into(),
            g1: C64::new(0.0, 0.0),
            g2: g2.into(),
        });
    }
    let (a, b) = (&positions[i], &positions[j]);
    let r = [a[0] - b[0], a[1] - b[1], a[2] - b[2]];
    let [g0, g1, g2] = greens_directional(&r, q, oscillation)?;
    Ok(GreensTaylor { i, j, g0, g1, g2 })
}

/// Taylor coefficients for every ordered pair of a geometry.
#[derive(Debug, Clone)]
pub struct GreensData {
    n: usize,
    pairs: Vec<GreensTaylor>,
}

impl GreensData {
    pub fn new(positions: &[Vec3], q: &CVec3, oscillation: &Vec3) -> Result<Self> {
        let n = positions.len();
        let mut pairs = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                pairs.push(greens_taylor(i, j, oscillation, positions, q)?);
            }
        }
        Ok(GreensData { n, pairs })
    }

    pub fn n_atoms(&self) -> usize {
        self.n
    }

    pub fn pair(&self, i: usize, j: usize) -> &GreensTaylor {
        &self.pairs[i * self.n + j]
    }

    /// Re g''(0)/k² used by the single-atom jump term.
    pub fn self_g2(&self) -> f64 {
        self.pairs[0].g2.re
    }

    /// Largest |Im g0| over distinct pairs (0 for one atom).
    pub fn max_exchange(&self) -> f64 {
        self.pairs
            .iter()
            .filter(|p| p.i != p.j)
            .map(|p| p.g0.im.abs())
            .fold(0.0, f64::max)
    }
}

/// N×N complex symmetric matrix with G_ii = Γ/2 and G_ij = g(R_ij).
pub fn greens_matrix(positions: &[Vec3], q: &CVec3) -> Result<Array2<C64>> {
    let n = positions.len();
    let mut g = Array2::from_elem((n, n), C64::new(0.5, 0.0));
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (&positions[i], &positions[j]);
            let v = greens(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]], q)?;
            g[[i, j]] = v;
            g[[j, i]] = v;
        }
    }
    Ok(g)
}

/// Eigenmodes of the single-excitation decay problem dc/dt = −G c.
#[derive(Debug, Clone)]
pub struct CollectiveModes {
    /// λ_k in units of Γ, sorted by decay rate.
    pub eigenvalues: Vec<C64>,
    /// Right eigenvectors, unit Euclidean norm, largest component real positive.
    pub eigenvectors: Vec<Vec<C64>>,
    /// 2 Re λ_k in units of Γ.
    pub decay_rates: Vec<f64>,
}

impl CollectiveModes {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn max_rate(&self) -> f64 {
        self.decay_rates.iter().copied().fold(0.0, f64::max)
    }

    pub fn min_rate(&self) -> f64 {
        self.decay_rates.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Decay rate of the uniform state (1,…,1)/√N: 2 c†Re(G)c.
    pub fn uniform_rate(positions: &[Vec3], q: &CVec3) -> Result<f64> {
        let g = greens_matrix(positions, q)?;
        let n = positions.len() as f64;
        Ok(2.0 * g.iter().map(|v| v.re).sum::<f64>() / n)
    }
}

pub fn collective_modes(positions: &[Vec3], q: &CVec3) -> Result<CollectiveModes> {
    if positions.is_empty() {
        return Err(Error::Argument("collective_modes needs at least one atom".into()));
    }
    let g = greens_matrix(positions, q)?;
    let n = g.nrows();
    let sym = faer::Mat::<C64>::from_fn(n, n, |i, j| 0.5 * (g[[i, j]] + g[[j, i]]));
    let evd = sym.eigen().map_err(|e| Error::Numerical {
        message: format!("eigensolver failed on the {n}x{n} kernel matrix: {e:?}"),
        dump: format!("{g:?}"),
    })?;
    let s = evd.S();
    let u = evd.U();
    let mut modes: Vec<(C64, Vec<C64>)> = (0..n)
        .map(|k| {
            let mut v: Vec<C64> = (0..n).map(|i| u[(i, k)]).collect();
            normalize_mode(&mut v);
            (s[k], v)
        })
        .collect();
    if modes.iter().any(|(l, v)| !l.is_finite() || v.iter().any(|c| !c.is_finite())) {
        return Err(Error::Numerical {
            message: "non-finite eigenpair".into(),
            dump: format!("{g:?}"),
        });
    }
    modes.sort_by(|a, b| a.0.re.total_cmp(&b.0.re));
    Ok(CollectiveModes {
        decay_rates: modes.iter().map(|(l, _)| 2.0 * l.re).collect(),
        eigenvalues: modes.iter().map(|(l, _)| *l).collect(),
        eigenvectors: modes.into_iter().map(|(_, v)| v).collect(),
    })
}

fn normalize_mode(v: &mut [C64]) {
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let max = v.iter().map(|c| c.norm()).fold(0.0, f64::max);
    let pivot = v
        .iter()
        .position(|c| c.norm() >= max * (1.0 - 1e-9))
        .unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    for c in v.iter_mut() {
        *c = *c * phase / norm;
    }
    // exact zeros read better in output than 1e-17 noise
    for c in v.iter_mut() {
        if c.norm() < 1e-14 {
            *c = C64::new(0.0, 0.0);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::sigma_plus;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    const X: Vec3 = [1.0, 0.0, 0.0];
    const Y: Vec3 = [0.0, 1.0, 0.0];
    const Z: Vec3 = [0.0, 0.0, 1.0];

    /// Upward recurrence h_{l+1} = (2l+1)/x h_l − h_{l−1} from h_{−1} = e^{ix}/x.
    fn hankel_recursion(l: u32, x: f64) -> C64 {
        let e = C64::from_polar(1.0, x);
        let mut prev = e / x;
        let mut cur = -I * e / x;
        for k in 0..l {
            let next = cur * ((2 * k + 1) as f64 / x) - prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * b.norm().max(1.0)
    }

    #[test]
    fn h0_closed_form() {
        assert_relative_eq!(hankel_out(0, PI / 2.0).unwrap().re, 2.0 / PI, max_relative = 1e-14);
        assert!(hankel_out(0, PI / 2.0).unwrap().im.abs() < 1e-15);
        for &x in &[0.1, 1.0, 3.3, 17.0] {
            assert_relative_eq!(hankel_out(0, x).unwrap().norm(), 1.0 / x, max_relative = 1e-14);
        }
    }

    #[test]
    fn h2_matches_recursion() {
        for &x in &[TAU, 0.7, 2.0, 9.5] {
            let a = hankel_out(2, x).unwrap();
            let b = hankel_recursion(2, x);
            assert!(close(a, b, 1e-12), "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn hankel_domain() {
        assert!(matches!(hankel_out(0, 0.0), Err(Error::Domain(_))));
        assert!(matches!(hankel_out(2, -1.0), Err(Error::Domain(_))));
        assert!(hankel_out(1, 1.0).is_err());
    }

    #[test]
    fn stable_real_part_matches_closed_form() {
        for &x in &[0.3, 0.9, 0.999] {
            for l in [0, 2] {
                let a = hankel_with_derivatives(l, x)[0];
                let b = hankel_recursion(l, x);
                assert!(close(a, b, 1e-12), "l={l} x={x}");
            }
        }
    }

    #[test]
    fn kernel_short_range_limit() {
        for q in [sigma_plus(), [Z[0].into(), Z[1].into(), Z[2].into()]] {
            for dir in [X, Y, Z] {
                let r = [1e-4 * dir[0], 1e-4 * dir[1], 1e-4 * dir[2]];
                assert!((greens(&r, &q).unwrap().re - 0.5).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn kernel_even_in_separation() {
        let q = sigma_plus();
        let r = [0.7, -1.3, 2.1];
        let m = [-0.7, 1.3, -2.1];
        assert_eq!(greens(&r, &q).unwrap(), greens(&m, &q).unwrap());
    }

    #[test]
    fn kernel_hand_value_perpendicular() {
        // q = z, R along x, kR = π/2
        let q = [Z[0].into(), Z[1].into(), Z[2].into()];
        let g = greens(&[PI / 2.0, 0.0, 0.0], &q).unwrap();
        let expect = 0.5
            * (C64::new(2.0 / PI, 0.0)
                - 0.5 * C64::new(24.0 / PI.powi(3) - 2.0 / PI, -12.0 / (PI * PI)));
        assert!(close(g, expect, 1e-13), "{g} vs {expect}");
    }

    #[test]
    fn zero_separation_is_domain_error() {
        assert!(matches!(greens(&[0.0; 3], &sigma_plus()), Err(Error::Domain(_))));
    }

    #[test]
    fn self_limits_for_circular_dipole() {
        let q = sigma_plus();
        assert_relative_eq!(self_limits(&q, &Z).1, -0.2, max_relative = 1e-14);
        assert_relative_eq!(self_limits(&q, &X).1, -0.15, max_relative = 1e-14);
        assert_relative_eq!(self_limits(&q, &Y).1, -0.15, max_relative = 1e-14);
        let budget: f64 = [X, Y, Z].iter().map(|u| -2.0 * self_limits(&q, u).1).sum();
        assert_relative_eq!(budget, 1.0, max_relative = 1e-14);
        assert_eq!(self_limits(&q, &Z).0, 0.5);
    }

    #[test]
    fn perpendicular_first_derivative_vanishes() {
        let pos = [[0.0; 3], [0.8 * PI, 0.0, 0.0]];
        let t = greens_taylor(0, 1, &Z, &pos, &sigma_plus()).unwrap();
        assert!(t.g1.norm() < 1e-15);
    }

    #[test]
    fn first_derivative_antisymmetric_along_separation() {
        let pos = [[0.0; 3], [0.8 * PI, 0.0, 0.0]];
        let a = greens_taylor(0, 1, &X, &pos, &sigma_plus()).unwrap();
        let b = greens_taylor(1, 0, &X, &pos, &sigma_plus()).unwrap();
        assert!((a.g1 + b.g1).norm() < 1e-14);
        assert!((a.g0 - b.g0).norm() < 1e-15);
        assert!((a.g2 - b.g2).norm() < 1e-13);
    }

    #[test]
    fn self_pair_has_no_first_order_and_negative_curvature() {
        let pos = [[0.0; 3]];
        for u in [X, Y, Z] {
            let t = greens_taylor(0, 0, &u, &pos, &sigma_plus()).unwrap();
            assert_eq!(t.g1, C64::new(0.0, 0.0));
            assert!(t.g2.re < 0.0);
            assert_eq!(t.g0.im, 0.0);
            assert_eq!(t.g2.im, 0.0);
        }
    }

    #[test]
    fn single_mode() {
        let m = collective_modes(&[[0.0; 3]], &sigma_plus()).unwrap();
        assert_eq!(m.len(), 1);
        assert!((m.eigenvalues[0] - C64::new(0.5, 0.0)).norm() < 1e-15);
        assert_relative_eq!(m.decay_rates[0], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn pair_modes_closed_form() {
        let d = 0.4 * TAU;
        let pos = [[0.0; 3], [d, 0.0, 0.0]];
        let q = sigma_plus();
        let g = greens(&[d, 0.0, 0.0], &q).unwrap();
        let m = collective_modes(&pos, &q).unwrap();
        let mut expect = [C64::new(0.5, 0.0) + g, C64::new(0.5, 0.0) - g];
        expect.sort_by(|a, b| a.re.total_cmp(&b.re));
        for k in 0..2 {
            assert!((m.eigenvalues[k] - expect[k]).norm() < 1e-12);
            let v = &m.eigenvectors[k];
            assert!((v[0].norm() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
            let ratio = v[1] / v[0];
            let sign = if (expect[k] - (C64::new(0.5, 0.0) + g)).norm() < 1e-12 { 1.0 } else { -1.0 };
            assert!((ratio - C64::new(sign, 0.0)).norm() < 1e-10, "{ratio}");
        }
        assert_relative_eq!(m.decay_rates.iter().sum::<f64>(), 2.0, max_relative = 1e-12);
    }

    #[test]
    fn three_in_line_has_one_dark_centre_mode() {
        let d = 0.4 * TAU;
        let pos = [[0.0; 3], [d, 0.0, 0.0], [2.0 * d, 0.0, 0.0]];
        let m = collective_modes(&pos, &sigma_plus()).unwrap();
        let zero_centre = m.eigenvectors.iter().filter(|v| v[1].norm() < 1e-10).count();
        assert_eq!(zero_centre, 1);
        assert_relative_eq!(m.decay_rates.iter().sum::<f64>(), 3.0, max_relative = 1e-12);
    }
}
