//! Reference model built without the library's block machinery: every
//! operator lives on the full space as a Kronecker product, and the
//! generator is assembled as a dense D²×D² matrix acting on row-major vec(ρ).

#![allow(dead_code)]

use ndarray::linalg::kron;
use ndarray::{Array1, Array2};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use vibrecoil_core::greens::greens_taylor;
use vibrecoil_core::{load_config, SystemConfig, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn cfg(toml: &str) -> SystemConfig {
    load_config(toml).expect("test config")
}

fn c(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn eye(n: usize) -> Array2<C64> {
    Array2::eye(n)
}

fn dag(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|e| e.conj())
}

/// |a⟩⟨b| on the N+1 internal states.
fn ketbra(n: usize, a: usize, b: usize) -> Array2<C64> {
    let mut m = Array2::zeros((n, n));
    m[[a, b]] = c(1.0);
    m
}

/// Truncated single-mode lowering operator.
fn lowering(nv: usize) -> Array2<C64> {
    let mut a = Array2::zeros((nv, nv));
    for n in 1..nv {
        a[[n - 1, n]] = c((n as f64).sqrt());
    }
    a
}

pub struct Reference {
    pub dim: usize,
    pub h: Array2<C64>,
    pub k: Array2<C64>,
    /// Σ coef · A ρ B
    pub sandwich: Vec<(Array2<C64>, Array2<C64>, C64)>,
}

impl Reference {
    pub fn new(cfg: &SystemConfig) -> Self {
        let n = cfg.n_atoms();
        let nv = cfg.n_vib;
        let quantized = &cfg.quantized_atoms;
        let nq = quantized.len();
        let v = nv.pow(nq as u32);
        let ni = n + 1;
        let dim = ni * v;
        let kappa = cfg.kappa;

        // slot 0 is the fastest digit, so it is the last Kronecker factor
        let vib_op = |slot: usize, op: &Array2<C64>| -> Array2<C64> {
            let mut acc = eye(1);
            for s in (0..nq).rev() {
                let f = if s == slot { op.clone() } else { eye(nv) };
                acc = kron(&acc, &f);
            }
            acc
        };
        let a = lowering(nv);
        let x1 = &a + &dag(&a);
        let num = dag(&a).dot(&a);
        let x: Vec<Array2<C64>> = (0..n)
            .map(|j| match quantized.iter().position(|&q| q == j) {
                Some(s) => vib_op(s, &x1),
                None => Array2::zeros((v, v)),
            })
            .collect();
        let full = |int: Array2<C64>, vib: &Array2<C64>| kron(&int, vib);
        let iv = eye(v);

        let mut h = Array2::<C64>::zeros((dim, dim));
        for s in 0..nq {
            let trap = (vib_op(s, &num) + &iv * c(0.5)) * c(cfg.omega_t);
            h = h + full(eye(ni), &trap);
        }

        let coeffs = |i: usize, j: usize| {
            greens_taylor(i, j, &cfg.oscillation, &cfg.positions, &cfg.dipole).unwrap()
        };
        // c0 + κ c1 Y + κ² c2/2 Y², Y = X_i − X_j
        let expansion = |i: usize, j: usize, part: fn(C64) -> f64| -> Array2<C64> {
            let t = coeffs(i, j);
            let y = &x[i] - &x[j];
            &iv * c(part(t.g0)) + &y * c(kappa * part(t.g1)) + y.dot(&y) * c(0.5 * kappa * kappa * part(t.g2))
        };
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    h = h + full(ketbra(ni, i + 1, j + 1), &expansion(i, j, |z| z.im));
                }
            }
        }
        if let Some(l) = &cfg.laser {
            let cos: f64 = (0..3).map(|k| l.direction[k] * cfg.oscillation[k]).sum();
            for j in 0..n {
                let phase: f64 = (0..3).map(|k| l.direction[k] * cfg.positions[j][k]).sum();
                let xj = &x[j];
                let f = &iv + &(xj * (I * cos * kappa)) - xj.dot(xj) * c(0.5 * cos * cos * kappa * kappa);
                let up = full(ketbra(ni, j + 1, 0), &f) * (C64::from_polar(l.rabi / 2.0, phase));
                h = h + &up + dag(&up);
                h = h - full(ketbra(ni, j + 1, j + 1), &iv) * c(l.detuning);
            }
        }

        let mut k = Array2::<C64>::zeros((dim, dim));
        for i in 0..n {
            for j in 0..n {
                k = k + full(ketbra(ni, i + 1, j + 1), &expansion(i, j, |z| z.re));
            }
        }

        // 2 Re g(R_ij + s_i − s_j') with s_i acting on the left, s_j' on the right
        let mut sandwich = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let t = coeffs(i, j);
                let lo = full(ketbra(ni, 0, i + 1), &iv);
                let hi = full(ketbra(ni, j + 1, 0), &iv);
                let xi = full(eye(ni), &x[i]);
                let xj = full(eye(ni), &x[j]);
                let (c0, c1, c2) = (2.0 * t.g0.re, 2.0 * kappa * t.g1.re, kappa * kappa * t.g2.re);
                sandwich.push((lo.clone(), hi.clone(), c(c0)));
                sandwich.push((xi.dot(&lo), hi.clone(), c(c1)));
                sandwich.push((lo.clone(), hi.dot(&xj), c(-c1)));
                sandwich.push((xi.dot(&xi).dot(&lo), hi.clone(), c(c2)));
                sandwich.push((lo.clone(), hi.dot(&xj).dot(&xj), c(c2)));
                sandwich.push((xi.dot(&lo), hi.dot(&xj), c(-2.0 * c2)));
            }
        }
        Reference { dim, h, k, sandwich }
    }

    /// Row-major vectorization: vec(AρB) = (A ⊗ Bᵀ) vec(ρ).
    pub fn superoperator(&self) -> Array2<C64> {
        let id = eye(self.dim);
        let m = &self.h * (-I) - &self.k;
        let mut s = kron(&m, &id) + kron(&id, &dag(&m).t().to_owned());
        for (a, b, coef) in &self.sandwich {
            s = s + kron(a, &b.t().to_owned()) * *coef;
        }
        s
    }

    pub fn apply(&self, rho: &Array2<C64>) -> Array2<C64> {
        let s = self.superoperator();
        let vec: Array1<C64> = rho.iter().cloned().collect();
        s.dot(&vec).into_shape_with_order((self.dim, self.dim)).unwrap()
    }

    /// Same generator without forming the superoperator.
    pub fn apply_direct(&self, rho: &Array2<C64>) -> Array2<C64> {
        let comm = self.h.dot(rho) - rho.dot(&self.h);
        let anti = self.k.dot(rho) + rho.dot(&self.k);
        let mut out = comm * (-I) - anti;
        for (a, b, coef) in &self.sandwich {
            out = out + a.dot(rho).dot(b) * *coef;
        }
        out
    }
}

pub fn random_hermitian(d: usize, seed: u64) -> Array2<C64> {
    let mut rng = StdRng::seed_from_u64(seed);
    let a = Array2::from_shape_fn((d, d), |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&a + &dag(&a)) * c(0.5)
}

/// Random positive matrix of unit trace.
pub fn random_density(d: usize, seed: u64) -> Array2<C64> {
    let a = random_hermitian(d, seed);
    let p = a.dot(&a);
    let tr: C64 = p.diag().sum();
    p / tr
}

pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn generator(cfg: &SystemConfig) -> vibrecoil_core::liouvillian::GeneratorSet {
    let basis = vibrecoil_core::Basis::from_config(cfg).unwrap();
    let greens =
        vibrecoil_core::GreensData::new(&cfg.positions, &cfg.dipole, &cfg.oscillation).unwrap();
    vibrecoil_core::liouvillian::GeneratorSet::assemble(cfg, &basis, &greens).unwrap()
}
