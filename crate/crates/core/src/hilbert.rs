//! Composite single-excitation × vibrational basis, operators and states.
//!
//! Internal states are |0⟩ (all atoms in the ground state) and |j⟩ for
//! "atom j − 1 excited", j = 1..=N. The vibrational factor is the tensor
//! product over the quantized atoms Q, encoded mixed-radix with the first
//! quantized atom as the fastest digit. Flat index:
//!
//! ```text
//! flat = j · N_vib^|Q| + m,    m = Σ_k n_{Q[k]} · N_vib^k
//! ```
//!
//! so every internal block (j, j') of a density matrix is a contiguous
//! `V × V` sub-matrix with `V = N_vib^|Q|`.

use std::ops::Range;

use ndarray::{s, Array2, ArrayView2, ArrayViewMut2};
use num_complex::Complex64 as C64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::greens::CollectiveModes;

/// Number of D×D complex buffers a run keeps alive (state, RK4 stages, scratch).
pub const WORKING_BUFFERS: u64 = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    n_atoms: usize,
    n_vib: usize,
    quantized: Vec<usize>,
    vib_dim: usize,
    dim: usize,
}

impl Basis {
    /// Builds the basis, refusing dimensions whose working set exceeds `max_bytes`.
    pub fn new(n_atoms: usize, n_vib: usize, quantized: &[usize], max_bytes: u64) -> Result<Self> {
        if n_atoms == 0 {
            return Err(Error::Argument("basis needs at least one atom".into()));
        }
        if n_vib < 2 {
            return Err(Error::Argument(format!("n_vib must be >= 2 (got {n_vib})")));
        }
        let mut quantized = quantized.to_vec();
        quantized.sort_unstable();
        quantized.dedup();
        if quantized.is_empty() {
            return Err(Error::Argument("at least one atom must be quantized".into()));
        }
        if let Some(&a) = quantized.iter().find(|&&a| a >= n_atoms) {
            return Err(Error::Argument(format!("quantized atom {a} out of range")));
        }
        let overflow = || Error::Capacity {
            dim: usize::MAX,
            required_bytes: u64::MAX,
            cap_bytes: max_bytes,
        };
        let vib_dim = (0..quantized.len())
            .try_fold(1usize, |acc, _| acc.checked_mul(n_vib))
            .ok_or_else(overflow)?;
        let dim = vib_dim.checked_mul(n_atoms + 1).ok_or_else(overflow)?;
        let required = (dim as u64)
            .checked_mul(dim as u64)
            .and_then(|d2| d2.checked_mul(16 * WORKING_BUFFERS))
            .ok_or_else(overflow)?;
        if required > max_bytes {
            return Err(Error::Capacity {
                dim,
                required_bytes: required,
                cap_bytes: max_bytes,
            });
        }
        Ok(Basis {
            n_atoms,
            n_vib,
            quantized,
            vib_dim,
            dim,
        })
    }

    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        Basis::new(cfg.n_atoms(), cfg.n_vib, &cfg.quantized_atoms, cfg.max_bytes)
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn n_vib(&self) -> usize {
        self.n_vib
    }

    pub fn quantized(&self) -> &[usize] {
        &self.quantized
    }

    /// V = N_vib^|Q|
    pub fn vib_dim(&self) -> usize {
        self.vib_dim
    }

    /// D = (N + 1) · V
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_reduced(&self) -> bool {
        self.quantized.len() < self.n_atoms
    }

    /// Digit position of `atom` in the vibrational index, if it is quantized.
    pub fn slot(&self, atom: usize) -> Option<usize> {
        self.quantized.binary_search(&atom).ok()
    }

    /// Flat rows of internal state `j` (0 = ground, 1..=N excited).
    pub fn block(&self, j: usize) -> Range<usize> {
        j * self.vib_dim..(j + 1) * self.vib_dim
    }

    /// Rows of all excited internal states.
    pub fn excited(&self) -> Range<usize> {
        self.vib_dim..self.dim
    }

    pub fn vib_index(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.quantized.len() {
            return Err(Error::Argument(format!(
                "expected {} occupations, got {}",
                self.quantized.len(),
                occupations.len()
            )));
        }
        let mut m = 0;
        for &n in occupations.iter().rev() {
            if n >= self.n_vib {
                return Err(Error::Argument(format!(
                    "occupation {n} exceeds truncation n_vib = {}",
                    self.n_vib
                )));
            }
            m = m * self.n_vib + n;
        }
        Ok(m)
    }

    pub fn occupations(&self, m: usize) -> Vec<usize> {
        let mut rest = m;
        (0..self.quantized.len())
            .map(|_| {
                let n = rest % self.n_vib;
                rest /= self.n_vib;
                n
            })
            .collect()
    }

    /// Occupation of quantized digit `slot` in vibrational index `m`.
    pub fn occupation(&self, m: usize, slot: usize) -> usize {
        (m / self.n_vib.pow(slot as u32)) % self.n_vib
    }

    pub fn index(&self, j: usize, occupations: &[usize]) -> Result<usize> {
        if j > self.n_atoms {
            return Err(Error::Argument(format!("internal state {j} out of range")));
        }
        Ok(j * self.vib_dim + self.vib_index(occupations)?)
    }

    /// Inverse of [`Basis::index`].
    pub fn state(&self, flat: usize) -> (usize, Vec<usize>) {
        (flat / self.vib_dim, self.occupations(flat % self.vib_dim))
    }

    /// One line per basis state: flat index, internal index, occupations.
    pub fn dump(&self) -> String {
        let mut out = String::from("flat,j,occupations\n");
        for f in 0..self.dim {
            let (j, occ) = self.state(f);
            let occ: Vec<String> = occ.iter().map(|n| n.to_string()).collect();
            out.push_str(&format!("{f},{j},{}\n", occ.join(" ")));
        }
        out
    }
}

/// Sparse real operator on the V-dimensional vibrational factor.
#[derive(Debug, Clone, PartialEq)]
pub struct VibOp {
    dim: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl VibOp {
    pub fn identity(dim: usize) -> Self {
        VibOp {
            dim,
            entries: (0..dim).map(|m| (m, m, 1.0)).collect(),
        }
    }

    pub fn zero(dim: usize) -> Self {
        VibOp {
            dim,
            entries: Vec::new(),
        }
    }

    /// Truncated lowering operator `a` of quantized digit `slot`.
    pub fn lowering(basis: &Basis, slot: usize) -> Self {
        let stride = basis.n_vib.pow(slot as u32);
        let entries = (0..basis.vib_dim)
            .filter_map(|m| {
                let n = basis.occupation(m, slot);
                (n > 0).then(|| (m - stride, m, (n as f64).sqrt()))
            })
            .collect();
        VibOp {
            dim: basis.vib_dim,
            entries,
        }
    }

    pub fn raising(basis: &Basis, slot: usize) -> Self {
        VibOp::lowering(basis, slot).transpose()
    }

    pub fn number(basis: &Basis, slot: usize) -> Self {
        VibOp {
            dim: basis.vib_dim,
            entries: (0..basis.vib_dim)
                .map(|m| (m, m, basis.occupation(m, slot) as f64))
                .filter(|e| e.2 != 0.0)
                .collect(),
        }
    }

    /// X = a + a† (position in units of the zero-point spread).
    pub fn position(basis: &Basis, slot: usize) -> Self {
        VibOp::lowering(basis, slot).add(&VibOp::raising(basis, slot), 1.0)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn transpose(&self) -> Self {
        let mut entries: Vec<_> = self.entries.iter().map(|&(r, c, v)| (c, r, v)).collect();
        entries.sort_by_key(|e| (e.0, e.1));
        VibOp {
            dim: self.dim,
            entries,
        }
    }

    pub fn scale(&self, f: f64) -> Self {
        VibOp {
            dim: self.dim,
            entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * f)).collect(),
        }
    }

    /// self + f · other
    pub fn add(&self, other: &VibOp, f: f64) -> Self {
        let mut d = self.to_dense();
        for &(r, c, v) in &other.entries {
            d[[r, c]] += f * v;
        }
        VibOp::from_dense(&d)
    }

    pub fn matmul(&self, other: &VibOp) -> Self {
        let mut d = Array2::<f64>::zeros((self.dim, self.dim));
        for &(r, k, a) in &self.entries {
            for &(k2, c, b) in &other.entries {
                if k == k2 {
                    d[[r, c]] += a * b;
                }
            }
        }
        VibOp::from_dense(&d)
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut d = Array2::zeros((self.dim, self.dim));
        for &(r, c, v) in &self.entries {
            d[[r, c]] += v;
        }
        d
    }

    pub fn from_dense(d: &Array2<f64>) -> Self {
        let mut entries = Vec::new();
        for ((r, c), &v) in d.indexed_iter() {
            if v != 0.0 {
                entries.push((r, c, v));
            }
        }
        VibOp {
            dim: d.nrows(),
            entries,
        }
    }

    /// out += f · (self · block)
    pub fn left_into(&self, block: ArrayView2<C64>, f: C64, out: &mut ArrayViewMut2<C64>) {
        for &(r, c, v) in &self.entries {
            let w = f * v;
            let src = block.row(c);
            let mut dst = out.row_mut(r);
            dst.zip_mut_with(&src, |d, s| *d += w * s);
        }
    }

    /// out += f · (block · self)
    pub fn right_into(&self, block: ArrayView2<C64>, f: C64, out: &mut ArrayViewMut2<C64>) {
        for &(r, c, v) in &self.entries {
            let w = f * v;
            let src = block.column(r);
            let mut dst = out.column_mut(c);
            dst.zip_mut_with(&src, |d, s| *d += w * s);
        }
    }

    /// Σ_rc self_rc · block_cr = Tr(self · block)
    pub fn trace_with(&self, block: ArrayView2<C64>) -> C64 {
        self.entries.iter().map(|&(r, c, v)| block[[c, r]] * v).sum()
    }
}

/// Which physical operator an [`OperatorMatrix`] represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorTag {
    Lowering { atom: usize },
    Raising { atom: usize },
    Number { atom: usize },
    Position { atom: usize },
    SigmaMinus { atom: usize },
    SigmaPlus { atom: usize },
}

/// Dense D×D operator on the composite space.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    pub matrix: Array2<C64>,
    pub tag: OperatorTag,
    /// Number of structurally nonzero entries.
    pub nnz: usize,
}

impl OperatorMatrix {
    fn new(matrix: Array2<C64>, tag: OperatorTag) -> Self {
        let nnz = matrix.iter().filter(|v| v.norm() != 0.0).count();
        OperatorMatrix { matrix, tag, nnz }
    }

    /// Embeds a vibrational operator as 1_internal ⊗ op.
    fn embed(basis: &Basis, op: &VibOp, tag: OperatorTag) -> Self {
        let v = basis.vib_dim;
        let mut m = Array2::zeros((basis.dim, basis.dim));
        for j in 0..=basis.n_atoms {
            for &(r, c, x) in &op.entries {
                m[[j * v + r, j * v + c]] = C64::new(x, 0.0);
            }
        }
        OperatorMatrix::new(m, tag)
    }

    /// σ⁻ for `atom`: |0, m⟩⟨atom+1, m|.
    pub fn sigma_minus(basis: &Basis, atom: usize) -> Result<Self> {
        if atom >= basis.n_atoms {
            return Err(Error::Argument(format!("atom {atom} out of range")));
        }
        let v = basis.vib_dim;
        let mut m = Array2::zeros((basis.dim, basis.dim));
        for k in 0..v {
            m[[k, (atom + 1) * v + k]] = C64::new(1.0, 0.0);
        }
        Ok(OperatorMatrix::new(m, OperatorTag::SigmaMinus { atom }))
    }

    pub fn sigma_plus(basis: &Basis, atom: usize) -> Result<Self> {
        let m = OperatorMatrix::sigma_minus(basis, atom)?;
        Ok(OperatorMatrix::new(
            m.matrix.t().to_owned(),
            OperatorTag::SigmaPlus { atom },
        ))
    }

    pub fn position(basis: &Basis, atom: usize) -> Result<Self> {
        let slot = quantized_slot(basis, atom)?;
        Ok(OperatorMatrix::embed(
            basis,
            &VibOp::position(basis, slot),
            OperatorTag::Position { atom },
        ))
    }

    pub fn number(basis: &Basis, atom: usize) -> Result<Self> {
        let slot = quantized_slot(basis, atom)?;
        Ok(OperatorMatrix::embed(
            basis,
            &VibOp::number(basis, slot),
            OperatorTag::Number { atom },
        ))
    }
}

fn quantized_slot(basis: &Basis, atom: usize) -> Result<usize> {
    basis
        .slot(atom)
        .ok_or_else(|| Error::Argument(format!("atom {atom} has no vibrational states")))
}

/// Truncated ladder operators (a, a†) of `atom` on the composite space.
pub fn ladder_ops(basis: &Basis, atom: usize) -> Result<(OperatorMatrix, OperatorMatrix)> {
    let slot = quantized_slot(basis, atom)?;
    Ok((
        OperatorMatrix::embed(basis, &VibOp::lowering(basis, slot), OperatorTag::Lowering { atom }),
        OperatorMatrix::embed(basis, &VibOp::raising(basis, slot), OperatorTag::Raising { atom }),
    ))
}

/// Hermitian, unit-trace density matrix over a [`Basis`].
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    rho: Array2<C64>,
}

impl DensityMatrix {
    pub fn from_matrix(rho: Array2<C64>) -> Self {
        DensityMatrix { rho }
    }

    /// |ψ⟩⟨ψ| for a normalized state vector.
    pub fn pure(psi: &[C64]) -> Self {
        let d = psi.len();
        DensityMatrix {
            rho: Array2::from_shape_fn((d, d), |(r, c)| psi[r] * psi[c].conj()),
        }
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.rho
    }

    pub fn matrix_mut(&mut self) -> &mut Array2<C64> {
        &mut self.rho
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.rho
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.rho.diag().sum()
    }

    /// max |ρ − ρ†|
    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(self.rho.view())
    }

    pub fn min_population(&self) -> f64 {
        self.rho.diag().iter().map(|v| v.re).fold(f64::INFINITY, f64::min)
    }

    pub fn purity(&self) -> f64 {
        // Tr ρ² = Σ |ρ_rc|² for Hermitian ρ
        self.rho.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let d = self.dim();
        let m = faer::Mat::<C64>::from_fn(d, d, |r, c| 0.5 * (self.rho[[r, c]] + self.rho[[c, r]].conj()));
        let ev = m
            .self_adjoint_eigenvalues(faer::Side::Lower)
            .map_err(|e| Error::Numerical {
                message: format!("Hermitian eigensolver failed: {e:?}"),
                dump: String::new(),
            })?;
        Ok(ev.first().copied().unwrap_or(0.0))
    }

    /// Checks the density-matrix invariants at the given tolerance.
    pub fn is_physical(&self, tol: f64) -> bool {
        (self.trace() - C64::new(1.0, 0.0)).norm() < tol
            && self.hermiticity_defect() < tol
            && self.min_population() > -tol
    }

    pub fn block(&self, basis: &Basis, j: usize, jp: usize) -> ArrayView2<'_, C64> {
        let (r, c) = (basis.block(j), basis.block(jp));
        self.rho.slice(s![r, c])
    }
}

pub fn hermiticity_defect(rho: ArrayView2<C64>) -> f64 {
    let d = rho.nrows();
    let mut worst: f64 = 0.0;
    for r in 0..d {
        for c in r..d {
            worst = worst.max((rho[[r, c]] - rho[[c, r]].conj()).norm());
        }
    }
    worst
}

/// Electronic part of an initial state.
#[derive(Debug, Clone, PartialEq)]
pub enum Excitation {
    Ground,
    /// Atom `j` (0-based) excited.
    Single(usize),
    /// Equal amplitude 1/√N on every atom.
    Uniform,
    /// Right eigenvector `k` of the collective modes (sorted by decay rate).
    Eigenmode(usize),
    /// Arbitrary amplitudes c_j, normalized on use.
    Amplitudes(Vec<C64>),
}

impl Excitation {
    /// Parses `ground`, `uniform`, `excited:<j>` or `mode:<k>`.
    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("scenario.initial: cannot parse {s:?}"));
        match s {
            "ground" => Ok(Excitation::Ground),
            "uniform" => Ok(Excitation::Uniform),
            _ => {
                let (kind, idx) = s.split_once(':').ok_or_else(bad)?;
                let idx: usize = idx.trim().parse().map_err(|_| bad())?;
                match kind {
                    "excited" => Ok(Excitation::Single(idx)),
                    "mode" => Ok(Excitation::Eigenmode(idx)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

/// Pure product state (Σ_j c_j |j⟩) ⊗ |n_Q⟩ as a density matrix.
/// `vib` lists occupations of the quantized atoms; `None` means all in |0⟩.
pub fn initial_state(
    basis: &Basis,
    excitation: &Excitation,
    vib: Option<&[usize]>,
    modes: Option<&CollectiveModes>,
) -> Result<DensityMatrix> {
    let n = basis.n_atoms;
    let zeros = vec![0; basis.quantized.len()];
    let m = basis.vib_index(vib.unwrap_or(&zeros))?;

    // amplitudes over internal states 0..=N
    let mut amps = vec![C64::new(0.0, 0.0); n + 1];
    match excitation {
        Excitation::Ground => amps[0] = C64::new(1.0, 0.0),
        Excitation::Single(j) => {
            if *j >= n {
                return Err(Error::Argument(format!("atom {j} out of range")));
            }
            amps[j + 1] = C64::new(1.0, 0.0);
        }
        Excitation::Uniform => {
            for a in &mut amps[1..] {
                *a = C64::new(1.0 / (n as f64).sqrt(), 0.0);
            }
        }
        Excitation::Eigenmode(k) => {
            let modes = modes.ok_or_else(|| {
                Error::Argument("eigenmode initial state requires collective modes".into())
            })?;
            let v = modes.eigenvectors.get(*k).ok_or_else(|| {
                Error::Argument(format!("eigenmode {k} out of range ({} modes)", modes.len()))
            })?;
            if v.len() != n {
                return Err(Error::Argument("mode size does not match the basis".into()));
            }
            amps[1..].copy_from_slice(v);
        }
        Excitation::Amplitudes(c) => {
            if c.len() != n {
                return Err(Error::Argument(format!(
                    "expected {n} amplitudes, got {}",
                    c.len()
                )));
            }
            amps[1..].copy_from_slice(c);
        }
    }
    let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::Argument("initial amplitudes cannot be normalized".into()));
    }
    let mut psi = vec![C64::new(0.0, 0.0); basis.dim];
    for (j, a) in amps.iter().enumerate() {
        psi[j * basis.vib_dim + m] = a / norm;
    }
    Ok(DensityMatrix::pure(&psi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(n: usize, nv: usize, q: &[usize]) -> Basis {
        Basis::new(n, nv, q, u64::MAX).unwrap()
    }

    #[test]
    fn dimensions() {
        assert_eq!(basis(1, 5, &[0]).dim(), 10);
        assert_eq!(basis(4, 2, &[0]).dim(), 10);
        assert_eq!(basis(2, 3, &[0, 1]).dim(), 27);
    }

    #[test]
    fn index_maps_are_inverse() {
        let b = basis(3, 3, &[0, 2]);
        for f in 0..b.dim() {
            let (j, occ) = b.state(f);
            assert_eq!(b.index(j, &occ).unwrap(), f);
        }
        // first quantized atom is the fastest digit
        assert_eq!(b.index(0, &[1, 0]).unwrap(), 1);
        assert_eq!(b.index(0, &[0, 1]).unwrap(), 3);
    }

    #[test]
    fn capacity_error_reports_bytes() {
        let err = Basis::new(10, 5, &(0..10).collect::<Vec<_>>(), 1 << 30).unwrap_err();
        match err {
            Error::Capacity { required_bytes, .. } => assert!(required_bytes > 1 << 30),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn number_operator_spectrum() {
        let b = basis(1, 3, &[0]);
        let (a, ad) = ladder_ops(&b, 0).unwrap();
        let n = ad.matrix.dot(&a.matrix);
        let diag: Vec<f64> = n.diag().iter().map(|v| v.re).collect();
        for (d, e) in diag.iter().zip([0.0, 1.0, 2.0, 0.0, 1.0, 2.0]) {
            assert!((d - e).abs() < 1e-14);
        }
        assert!(n.iter().enumerate().all(|(k, v)| k % 7 == 0 || v.norm() == 0.0));
    }

    #[test]
    fn truncated_commutator() {
        let b = basis(2, 4, &[0, 1]);
        for atom in 0..2 {
            let (a, ad) = ladder_ops(&b, atom).unwrap();
            let comm = a.matrix.dot(&ad.matrix) - ad.matrix.dot(&a.matrix);
            let slot = b.slot(atom).unwrap();
            for f in 0..b.dim() {
                let (_, occ) = b.state(f);
                if occ[slot] + 1 < b.n_vib() {
                    for g in 0..b.dim() {
                        let expect = if f == g { 1.0 } else { 0.0 };
                        assert!((comm[[f, g]] - C64::new(expect, 0.0)).norm() < 1e-14);
                    }
                }
            }
        }
    }

    #[test]
    fn raising_matrix_elements() {
        let b = basis(1, 5, &[0]);
        let (_, ad) = ladder_ops(&b, 0).unwrap();
        for n in 0..4 {
            assert!((ad.matrix[[n + 1, n]].re - ((n + 1) as f64).sqrt()).abs() < 1e-15);
        }
        // hard truncation at the top level
        assert!(ad.matrix.column(4).iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn unquantized_atom_has_no_ladder() {
        let b = basis(3, 2, &[1]);
        assert!(matches!(ladder_ops(&b, 0), Err(Error::Argument(_))));
    }

    #[test]
    fn single_excited_vibrational_ground() {
        let b = basis(1, 5, &[0]);
        let rho = initial_state(&b, &Excitation::Single(0), None, None).unwrap();
        let f = b.index(1, &[0]).unwrap();
        for ((r, c), v) in rho.matrix().indexed_iter() {
            let expect = if r == f && c == f { 1.0 } else { 0.0 };
            assert_eq!(*v, C64::new(expect, 0.0));
        }
    }

    #[test]
    fn uniform_pair() {
        let b = basis(2, 2, &[0, 1]);
        let rho = initial_state(&b, &Excitation::Uniform, None, None).unwrap();
        let (f1, f2) = (b.index(1, &[0, 0]).unwrap(), b.index(2, &[0, 0]).unwrap());
        for (r, c) in [(f1, f1), (f1, f2), (f2, f1), (f2, f2)] {
            assert!((rho.matrix()[[r, c]].re - 0.5).abs() < 1e-15);
        }
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn excitation_parsing() {
        assert_eq!(Excitation::parse("mode:2").unwrap(), Excitation::Eigenmode(2));
        assert_eq!(Excitation::parse("excited:0").unwrap(), Excitation::Single(0));
        assert!(Excitation::parse("excited").is_err());
        assert!(Excitation::parse("hot:1").is_err());
    }

    #[test]
    fn bad_initial_states() {
        let b = basis(2, 2, &[0]);
        assert!(initial_state(&b, &Excitation::Single(2), None, None).is_err());
        assert!(initial_state(&b, &Excitation::Eigenmode(0), None, None).is_err());
        let zero = vec![C64::new(0.0, 0.0); 2];
        assert!(initial_state(&b, &Excitation::Amplitudes(zero), None, None).is_err());
        assert!(initial_state(&b, &Excitation::Ground, Some(&[2]), None).is_err());
    }

    #[test]
    fn vib_op_left_right_match_dense() {
        let b = basis(2, 3, &[0, 1]);
        let x = VibOp::position(&b, 1);
        let v = b.vib_dim();
        let block = Array2::from_shape_fn((v, v), |(r, c)| C64::new(r as f64 + 0.3, c as f64 - 1.1));
        let xd = x.to_dense().mapv(|e| C64::new(e, 0.0));
        let mut out = Array2::zeros((v, v));
        x.left_into(block.view(), C64::new(2.0, 0.0), &mut out.view_mut());
        assert!((&out - &(xd.dot(&block) * 2.0)).iter().all(|e| e.norm() < 1e-12));
        let mut out = Array2::zeros((v, v));
        x.right_into(block.view(), C64::new(0.0, 1.0), &mut out.view_mut());
        assert!((&out - &(block.dot(&xd) * C64::new(0.0, 1.0))).iter().all(|e| e.norm() < 1e-12));
    }
}
