//! Vibrational energy and momentum of quantized atoms, excitation
//! probabilities and the truncation monitor.

use ndarray::ArrayView2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{Basis, VibOp};

fn slot(basis: &Basis, atom: usize) -> Result<usize> {
    basis
        .slot(atom)
        .ok_or_else(|| Error::Argument(format!("atom {atom} has no vibrational states")))
}

/// Σ_f (2 n_atom(f) + 1) x_f / 2κ² for a diagonal `x` (ρ or dρ/dt).
pub fn energy_functional(basis: &Basis, slot: usize, kappa: f64, diag: &[f64]) -> f64 {
    let v = basis.vib_dim();
    let s: f64 = diag
        .iter()
        .enumerate()
        .map(|(f, x)| (2 * basis.occupation(f % v, slot) + 1) as f64 * x)
        .sum();
    s / (2.0 * kappa * kappa)
}

/// E_j = Tr[(2a†a + 1)ρ] / 2κ², in E_r.
pub fn energy(basis: &Basis, rho: ArrayView2<C64>, kappa: f64, atom: usize) -> Result<f64> {
    let q = slot(basis, atom)?;
    let diag: Vec<f64> = rho.diag().iter().map(|c| c.re).collect();
    Ok(energy_functional(basis, q, kappa, &diag))
}

/// p_j = (i/2κ) Tr[(a† − a)ρ], in ħk.
pub fn momentum(basis: &Basis, rho: ArrayView2<C64>, kappa: f64, atom: usize) -> Result<f64> {
    let q = slot(basis, atom)?;
    let p = VibOp::raising(basis, q).add(&VibOp::lowering(basis, q), -1.0);
    let mut tr = C64::new(0.0, 0.0);
    for j in 0..=basis.n_atoms() {
        let r = basis.block(j);
        tr += p.trace_with(rho.slice(ndarray::s![r.clone(), r]));
    }
    Ok((C64::new(0.0, 1.0) * tr).re / (2.0 * kappa))
}

/// ⟨a_j⟩ = Tr[a_j x], summed over internal blocks (x = ρ or dρ/dt).
pub fn displacement(basis: &Basis, x: ArrayView2<C64>, atom: usize) -> Result<C64> {
    let q = slot(basis, atom)?;
    let a = VibOp::lowering(basis, q);
    let mut tr = C64::new(0.0, 0.0);
    for j in 0..=basis.n_atoms() {
        let r = basis.block(j);
        tr += a.trace_with(x.slice(ndarray::s![r.clone(), r]));
    }
    Ok(tr)
}

/// Rate of change of the energy about the mean displacement,
/// E − |⟨a⟩|²/κ², given ρ and dρ/dt. Removes the work done on the mean
/// motion by a steady force such as radiation pressure.
pub fn recoil_energy_rate(
    basis: &Basis,
    rho: ArrayView2<C64>,
    drho: ArrayView2<C64>,
    kappa: f64,
    atom: usize,
) -> Result<f64> {
    let q = slot(basis, atom)?;
    let diag: Vec<f64> = drho.diag().iter().map(|c| c.re).collect();
    let raw = energy_functional(basis, q, kappa, &diag);
    let a = displacement(basis, rho, atom)?;
    let da = displacement(basis, drho, atom)?;
    Ok(raw - 2.0 * (a.conj() * da).re / (kappa * kappa))
}

/// P_j, the probability that atom j is excited.
pub fn excitation(basis: &Basis, rho: ArrayView2<C64>, atom: usize) -> f64 {
    basis.block(atom + 1).map(|f| rho[[f, f]].re).sum()
}

pub fn excitations(basis: &Basis, rho: ArrayView2<C64>) -> Vec<f64> {
    (0..basis.n_atoms()).map(|j| excitation(basis, rho, j)).collect()
}

/// Largest population of the top vibrational level over quantized atoms.
pub fn truncation_population(basis: &Basis, rho: ArrayView2<C64>) -> f64 {
    let (v, top) = (basis.vib_dim(), basis.n_vib() - 1);
    (0..basis.quantized().len())
        .map(|q| {
            (0..basis.dim())
                .filter(|f| basis.occupation(f % v, q) == top)
                .map(|f| rho[[f, f]].re)
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{initial_state, DensityMatrix, Excitation};
    use ndarray::Array2;

    fn basis() -> Basis {
        Basis::new(2, 3, &[0, 1], u64::MAX).unwrap()
    }

    #[test]
    fn ground_state_zero_point_energy() {
        let b = basis();
        let rho = initial_state(&b, &Excitation::Ground, None, None).unwrap();
        let kappa = 0.01;
        let e = energy(&b, rho.matrix().view(), kappa, 0).unwrap();
        assert!((e - 1.0 / (2.0 * kappa * kappa)).abs() < 1e-9);
        assert_eq!(momentum(&b, rho.matrix().view(), kappa, 0).unwrap(), 0.0);
    }

    #[test]
    fn energy_counts_quanta_of_one_atom() {
        let b = basis();
        let rho = initial_state(&b, &Excitation::Single(1), Some(&[2, 1]), None).unwrap();
        let k = 0.1;
        let e0 = energy(&b, rho.matrix().view(), k, 0).unwrap();
        let e1 = energy(&b, rho.matrix().view(), k, 1).unwrap();
        assert!((e0 - 5.0 / (2.0 * k * k)).abs() < 1e-10);
        assert!((e1 - 3.0 / (2.0 * k * k)).abs() < 1e-10);
        assert_eq!(excitations(&b, rho.matrix().view()), vec![0.0, 1.0]);
        assert_eq!(truncation_population(&b, rho.matrix().view()), 1.0);
    }

    #[test]
    fn coherent_superposition_momentum() {
        // (|0⟩ + i|1⟩)/√2 has ⟨i(a† − a)⟩ = 1
        let b = Basis::new(1, 2, &[0], u64::MAX).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [C64::new(h, 0.0), C64::new(0.0, h), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let rho = DensityMatrix::pure(&psi);
        let p = momentum(&b, rho.matrix().view(), 0.5, 0).unwrap();
        assert!((p - 1.0).abs() < 1e-15, "{p}");
    }

    #[test]
    fn unquantized_atom_rejected() {
        let b = Basis::new(2, 2, &[1], u64::MAX).unwrap();
        let rho = Array2::<C64>::zeros((b.dim(), b.dim()));
        assert!(energy(&b, rho.view(), 0.1, 0).is_err());
        assert!(momentum(&b, rho.view(), 0.1, 0).is_err());
    }
}
