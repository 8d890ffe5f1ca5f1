//! Master-equation generator split into five taggable terms.
//!
//! All Hamiltonian-like pieces and the anticommutator part of the
//! dissipator are folded into one non-Hermitian matrix `M = −iH − K`, so
//! that `dρ/dt = Mρ + ρM† + J(ρ)` where `J` is the sandwich (jump) term
//! feeding the excited block into the ground block. `J` is applied as a
//! weighted contraction of the V×V excited blocks, never as a superoperator.

use std::fmt;

use ndarray::linalg::general_mat_mul;
use ndarray::{s, Array2, ArrayView2, ArrayViewMut2, Zip};
use num_complex::Complex64 as C64;
use sprs::{CsMat, TriMat};

use crate::config::{SystemConfig, Vec3};
use crate::error::{Error, Result};
use crate::greens::{CollectiveModes, GreensData};
use crate::hilbert::{hermiticity_defect, Basis, DensityMatrix, Excitation, VibOp};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };
/// Switch to the CSR product above this dimension when under 1/8 filled.
const SPARSE_MIN_DIM: usize = 64;
const SPARSE_FILL: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Trap,
    Laser,
    Dd,
    JumpDiagonal,
    JumpCross,
}

impl Term {
    pub const ALL: [Term; 5] = [
        Term::Trap,
        Term::Laser,
        Term::Dd,
        Term::JumpDiagonal,
        Term::JumpCross,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Term::Trap => "trap",
            Term::Laser => "laser",
            Term::Dd => "dd",
            Term::JumpDiagonal => "jump_diagonal",
            Term::JumpCross => "jump_cross",
        }
    }

    fn bit(self) -> u8 {
        1 << (self as u8)
    }

    /// Whether energy moved by this term counts as coherent transfer.
    pub fn is_coherent(self) -> bool {
        matches!(self, Term::Laser | Term::Dd | Term::JumpCross)
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Subset of [`Term`]s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TermMask(u8);

impl TermMask {
    pub const ALL: TermMask = TermMask(0b11111);
    pub const NONE: TermMask = TermMask(0);

    pub fn only(term: Term) -> Self {
        TermMask(term.bit())
    }

    pub fn with(self, term: Term) -> Self {
        TermMask(self.0 | term.bit())
    }

    pub fn without(self, term: Term) -> Self {
        TermMask(self.0 & !term.bit())
    }

    pub fn contains(self, term: Term) -> bool {
        self.0 & term.bit() != 0
    }

    pub fn terms(self) -> impl Iterator<Item = Term> {
        Term::ALL.into_iter().filter(move |t| self.contains(*t))
    }

    /// Parses a comma list of `trap`, `laser`, `dd`, `jumpd`, `jumpx` or `all`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut m = TermMask::NONE;
        for tok in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            m = match tok {
                "all" => TermMask::ALL,
                "trap" => m.with(Term::Trap),
                "laser" => m.with(Term::Laser),
                "dd" => m.with(Term::Dd),
                "jumpd" | "jump_diagonal" => m.with(Term::JumpDiagonal),
                "jumpx" | "jump_cross" => m.with(Term::JumpCross),
                other => {
                    return Err(Error::Parse(format!(
                        "unknown term {other:?} (expected trap, laser, dd, jumpd, jumpx)"
                    )))
                }
            };
        }
        if m == TermMask::NONE {
            return Err(Error::Parse("term mask selects no terms".into()));
        }
        Ok(m)
    }
}

impl Default for TermMask {
    fn default() -> Self {
        TermMask::ALL
    }
}

impl fmt::Display for TermMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<_> = self.terms().map(Term::name).collect();
        f.write_str(&names.join(","))
    }
}

/// Per-pair weights of the sandwich term, with the 2 and κ factors folded in.
#[derive(Debug, Clone)]
struct JumpWeights {
    /// 2 Re g0
    w0: Array2<f64>,
    /// 2κ Re g1
    w1: Array2<f64>,
    /// κ² Re g2
    w2: Array2<f64>,
}

/// Pre-assembled generator for one parameter point.
#[derive(Debug, Clone)]
pub struct GeneratorSet {
    basis: Basis,
    mask: TermMask,
    /// Trap Hamiltonian diagonal.
    trap: Vec<f64>,
    /// Laser Hamiltonian including −δ on the excited states.
    laser: Option<Array2<C64>>,
    dd: Array2<C64>,
    /// Re g(0) on the excited diagonal.
    k_self: f64,
    /// Off-diagonal anticommutator operator (Hermitian).
    k_cross: Array2<C64>,
    jump: JumpWeights,
    /// X_q per quantized slot on the vibrational factor.
    x: Vec<VibOp>,
    x2: Vec<VibOp>,
    /// −iH − K for the active mask.
    fused: Array2<C64>,
    /// CSR copy of `fused` when it is sparse enough to pay off.
    sparse: Option<CsMat<C64>>,
    /// CSR copies of laser, dd and k_cross for per-term diagonals.
    term_csr: [Option<CsMat<C64>>; 3],
    kappa: f64,
    omega_t: f64,
    rabi: f64,
    detuning: f64,
    max_exchange: f64,
    max_rate: f64,
    min_rate: f64,
}

impl GeneratorSet {
    pub fn assemble(cfg: &SystemConfig, basis: &Basis, greens: &GreensData) -> Result<Self> {
        Self::assemble_with_order(cfg, basis, greens, 2)
    }

    /// Keeps Taylor terms up to κ^order (0, 1 or 2) in every expansion.
    pub fn assemble_with_order(
        cfg: &SystemConfig,
        basis: &Basis,
        greens: &GreensData,
        order: u32,
    ) -> Result<Self> {
        let n = basis.n_atoms();
        if cfg.n_atoms() != n || greens.n_atoms() != n {
            return Err(Error::Argument(format!(
                "atom count mismatch: config {}, basis {n}, kernel data {}",
                cfg.n_atoms(),
                greens.n_atoms()
            )));
        }
        if order > 2 {
            return Err(Error::Argument(format!("Taylor order {order} not supported")));
        }
        let (v, d) = (basis.vib_dim(), basis.dim());
        let kappa = cfg.kappa;
        let k1 = if order >= 1 { kappa } else { 0.0 };
        let k2 = if order >= 2 { kappa * kappa } else { 0.0 };

        let nq = basis.quantized().len();
        let x: Vec<VibOp> = (0..nq).map(|q| VibOp::position(basis, q)).collect();
        let x2: Vec<VibOp> = x.iter().map(|op| op.matmul(op)).collect();
        let xd: Vec<Array2<f64>> = x.iter().map(VibOp::to_dense).collect();
        let x2d: Vec<Array2<f64>> = x2.iter().map(VibOp::to_dense).collect();
        let eye = Array2::<f64>::eye(v);
        let slot = |atom: usize| basis.slot(atom);

        // vibrational occupations summed over quantized atoms
        let trap: Vec<f64> = (0..d)
            .map(|f| {
                let m = f % v;
                let occ: usize = (0..nq).map(|q| basis.occupation(m, q)).sum();
                cfg.omega_t * (occ as f64 + 0.5 * nq as f64)
            })
            .collect();

        // Operator-valued expansion c0 + c1 (X_i − X_j) + c2/2 (X_i − X_j)² on V.
        let expand = |i: usize, j: usize, c0: f64, c1: f64, c2: f64| -> Array2<f64> {
            let mut out = &eye * c0;
            let (si, sj) = (slot(i), slot(j));
            if let Some(a) = si {
                out.scaled_add(c1, &xd[a]);
                out.scaled_add(0.5 * c2, &x2d[a]);
            }
            if let Some(b) = sj {
                out.scaled_add(-c1, &xd[b]);
                out.scaled_add(0.5 * c2, &x2d[b]);
            }
            if let (Some(a), Some(b)) = (si, sj) {
                // −(X_i X_j + X_j X_i) = −2 X_i X_j since different factors commute
                out.scaled_add(-c2, &xd[a].dot(&xd[b]));
            }
            out
        };

        let mut dd = Array2::<C64>::zeros((d, d));
        let mut k_cross = Array2::<C64>::zeros((d, d));
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let p = greens.pair(i, j);
                let (ri, rj) = (basis.block(i + 1), basis.block(j + 1));
                let h = expand(i, j, p.g0.im, k1 * p.g1.im, k2 * p.g2.im);
                let k = expand(i, j, p.g0.re, k1 * p.g1.re, k2 * p.g2.re);
                dd.slice_mut(s![ri.clone(), rj.clone()])
                    .assign(&h.mapv(|e| C64::new(e, 0.0)));
                k_cross.slice_mut(s![ri, rj]).assign(&k.mapv(|e| C64::new(e, 0.0)));
            }
        }
        let k_self = greens.pair(0, 0).g0.re;

        let mut w0 = Array2::zeros((n, n));
        let mut w1 = Array2::zeros((n, n));
        let mut w2 = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                let p = greens.pair(i, j);
                w0[[i, j]] = 2.0 * p.g0.re;
                w1[[i, j]] = 2.0 * k1 * p.g1.re;
                w2[[i, j]] = k2 * p.g2.re;
            }
        }

        let (rabi, detuning, laser) = match &cfg.laser {
            Some(l) => {
                let c = dot(&l.direction, &cfg.oscillation);
                let mut h = Array2::<C64>::zeros((d, d));
                for j in 0..n {
                    let phase = C64::from_polar(l.rabi / 2.0, dot(&l.direction, &cfg.positions[j]));
                    // e^{i c κ X} to second order
                    let mut f = eye.mapv(|e| C64::new(e, 0.0));
                    if let Some(q) = slot(j) {
                        f.zip_mut_with(&xd[q], |a, &b| *a += C64::new(0.0, c * k1 * b));
                        f.zip_mut_with(&x2d[q], |a, &b| *a += -0.5 * c * c * k2 * b);
                    }
                    let block = f * phase;
                    let (re, g) = (basis.block(j + 1), basis.block(0));
                    h.slice_mut(s![re.clone(), g.clone()]).assign(&block);
                    h.slice_mut(s![g, re.clone()]).assign(&block.t().mapv(|e| e.conj()));
                    for r in re {
                        h[[r, r]] = C64::new(-l.detuning, 0.0);
                    }
                }
                (l.rabi, l.detuning, Some(h))
            }
            None => (0.0, 0.0, None),
        };

        let (min_rate, max_rate) = if n == 1 {
            (1.0, 1.0)
        } else {
            let modes = crate::greens::collective_modes(&cfg.positions, &cfg.dipole)?;
            (modes.min_rate(), modes.max_rate())
        };
        let mask = if laser.is_some() {
            TermMask::ALL
        } else {
            TermMask::ALL.without(Term::Laser)
        };
        let mut gset = GeneratorSet {
            basis: basis.clone(),
            mask,
            trap,
            laser,
            dd,
            k_self,
            k_cross,
            jump: JumpWeights { w0, w1, w2 },
            x,
            x2,
            fused: Array2::zeros((0, 0)),
            sparse: None,
            term_csr: [None, None, None],
            kappa,
            omega_t: cfg.omega_t,
            rabi,
            detuning,
            max_exchange: greens.max_exchange(),
            max_rate,
            min_rate,
        };
        gset.term_csr = [
            gset.laser.as_ref().map(to_csr),
            Some(to_csr(&gset.dd)),
            Some(to_csr(&gset.k_cross)),
        ];
        gset.set_fused();
        Ok(gset)
    }

    fn set_fused(&mut self) {
        self.fused = self.fuse(self.mask);
        let d = self.fused.nrows();
        let nnz = self.fused.iter().filter(|c| **c != ZERO).count();
        self.sparse =
            (d >= SPARSE_MIN_DIM && nnz * SPARSE_FILL < d * d).then(|| to_csr(&self.fused));
    }

    /// out = M x.
    fn mul_fused(&self, x: ArrayView2<C64>, out: &mut Array2<C64>) {
        match &self.sparse {
            Some(m) => {
                out.fill(ZERO);
                match (x.as_slice(), out.as_slice_mut()) {
                    (Some(xs), Some(os)) => csr_rows_into(m, xs, os, x.ncols()),
                    _ => sprs::prod::csr_mulacc_dense_rowmaj(m.view(), x, out.view_mut()),
                }
            }
            None => general_mat_mul(ONE, &self.fused, &x, ZERO, out),
        }
    }

    fn fuse(&self, mask: TermMask) -> Array2<C64> {
        let d = self.basis.dim();
        let mut m = Array2::<C64>::zeros((d, d));
        if mask.contains(Term::Trap) {
            for (f, &e) in self.trap.iter().enumerate() {
                m[[f, f]] += C64::new(0.0, -e);
            }
        }
        if mask.contains(Term::Laser) {
            if let Some(h) = &self.laser {
                m.scaled_add(C64::new(0.0, -1.0), h);
            }
        }
        if mask.contains(Term::Dd) {
            m.scaled_add(C64::new(0.0, -1.0), &self.dd);
        }
        if mask.contains(Term::JumpDiagonal) {
            for f in self.basis.excited() {
                m[[f, f]] -= self.k_self;
            }
        }
        if mask.contains(Term::JumpCross) {
            m.scaled_add(C64::new(-1.0, 0.0), &self.k_cross);
        }
        m
    }

    /// Same generator restricted to `mask` (terms absent from the model stay off).
    pub fn with_mask(&self, mask: TermMask) -> Self {
        let mut g = self.clone();
        g.mask = if self.laser.is_some() {
            mask
        } else {
            mask.without(Term::Laser)
        };
        g.set_fused();
        g
    }

    pub fn mask(&self) -> TermMask {
        self.mask
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn omega_t(&self) -> f64 {
        self.omega_t
    }

    pub fn has_laser(&self) -> bool {
        self.laser.is_some() && self.mask.contains(Term::Laser)
    }

    /// Dense Hamiltonian of one Hermitian term (zero matrix for jump terms).
    pub fn hamiltonian(&self, term: Term) -> Array2<C64> {
        let d = self.basis.dim();
        match term {
            Term::Trap => {
                let mut h = Array2::zeros((d, d));
                for (f, &e) in self.trap.iter().enumerate() {
                    h[[f, f]] = C64::new(e, 0.0);
                }
                h
            }
            Term::Laser => self.laser.clone().unwrap_or_else(|| Array2::zeros((d, d))),
            Term::Dd => self.dd.clone(),
            _ => Array2::zeros((d, d)),
        }
    }

    /// Decay rate of the most subradiant collective mode (units Γ).
    pub fn slowest_mode_rate(&self) -> f64 {
        self.min_rate
    }

    /// Largest rate in the problem, the basis of the step-size heuristic.
    pub fn fastest_rate(&self) -> f64 {
        [
            self.max_rate,
            self.omega_t,
            self.rabi,
            self.max_exchange,
            self.detuning.abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// dt_max = 0.05 / fastest rate.
    pub fn dt_max(&self) -> f64 {
        0.05 / self.fastest_rate()
    }

    fn check_dims(&self, rho: ArrayView2<C64>) -> Result<()> {
        let d = self.basis.dim();
        if rho.dim() != (d, d) {
            return Err(Error::Argument(format!(
                "density matrix is {:?}, basis dimension is {d}",
                rho.dim()
            )));
        }
        Ok(())
    }

    /// dρ/dt for the active mask, valid for any (not necessarily Hermitian) ρ.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<Array2<C64>> {
        let d = self.basis.dim();
        let mut out = Array2::zeros((d, d));
        self.apply_general_into(rho.matrix().view(), &mut out)?;
        Ok(out)
    }

    /// dρ/dt for an arbitrary `mask` (slower: rebuilds the fused matrix).
    pub fn apply_masked(&self, rho: &DensityMatrix, mask: TermMask) -> Result<Array2<C64>> {
        self.with_mask(mask).apply(rho)
    }

    pub fn apply_general_into(&self, rho: ArrayView2<C64>, out: &mut Array2<C64>) -> Result<()> {
        self.check_dims(rho)?;
        // ρM† = (Mρ†)†
        let mut t = Array2::zeros(rho.raw_dim());
        self.mul_fused(rho.t().mapv(|e| e.conj()).view(), &mut t);
        self.mul_fused(rho, out);
        Zip::from(&mut *out).and(&t.t()).for_each(|o, &b| *o += b.conj());
        self.add_jump(rho, self.mask, &mut out.view_mut());
        Ok(())
    }

    /// Fast path for Hermitian ρ: computes T = Mρ once and returns T + T† + J.
    /// The result is Hermitian by construction.
    pub fn apply_hermitian_into(
        &self,
        rho: ArrayView2<C64>,
        scratch: &mut Array2<C64>,
        out: &mut Array2<C64>,
    ) -> Result<()> {
        self.check_dims(rho)?;
        self.mul_fused(rho, scratch);
        Zip::from(&mut *out)
            .and(&*scratch)
            .and(&scratch.t())
            .for_each(|o, &a, &b| *o = a + b.conj());
        self.add_jump(rho, self.mask, &mut out.view_mut());
        Ok(())
    }

    /// Sandwich term Σ_ij 2 Re g(R_ij + s_i − s_j') σ_i⁻ ρ σ_j⁺ into the ground block.
    fn add_jump(&self, rho: ArrayView2<C64>, mask: TermMask, out: &mut ArrayViewMut2<C64>) {
        let diag = mask.contains(Term::JumpDiagonal);
        let cross = mask.contains(Term::JumpCross);
        if !diag && !cross {
            return;
        }
        let keep = |i: usize, j: usize| if i == j { diag } else { cross };
        let b = &self.basis;
        let n = b.n_atoms();
        let g = b.block(0);
        let ee = |i: usize, j: usize| rho.slice(s![b.block(i + 1), b.block(j + 1)]);
        let mut gg = out.slice_mut(s![g.clone(), g]);
        let JumpWeights { w0, w1, w2 } = &self.jump;

        for i in 0..n {
            for j in 0..n {
                if keep(i, j) && w0[[i, j]] != 0.0 {
                    gg.scaled_add(C64::new(w0[[i, j]], 0.0), &ee(i, j));
                }
            }
        }
        let v = b.vib_dim();
        let mut acc = Array2::<C64>::zeros((v, v));
        for (qa, &a) in b.quantized().iter().enumerate() {
            // rows: X_a Σ_j w1_aj ρ_aj  and  X_a² Σ_j w2_aj ρ_aj
            for (w, op, sign) in [(w1, &self.x[qa], 1.0), (w2, &self.x2[qa], 1.0)] {
                acc.fill(ZERO);
                for j in (0..n).filter(|&j| keep(a, j)) {
                    if w[[a, j]] != 0.0 {
                        acc.scaled_add(C64::new(w[[a, j]], 0.0), &ee(a, j));
                    }
                }
                op.left_into(acc.view(), C64::new(sign, 0.0), &mut gg);
            }
            // columns: −(Σ_i w1_ia ρ_ia) X_a  and  (Σ_i w2_ia ρ_ia) X_a²
            for (w, op, sign) in [(w1, &self.x[qa], -1.0), (w2, &self.x2[qa], 1.0)] {
                acc.fill(ZERO);
                for i in (0..n).filter(|&i| keep(i, a)) {
                    if w[[i, a]] != 0.0 {
                        acc.scaled_add(C64::new(w[[i, a]], 0.0), &ee(i, a));
                    }
                }
                op.right_into(acc.view(), C64::new(sign, 0.0), &mut gg);
            }
        }
        // −2 w2_ij X_i ρ_ij X_j over quantized pairs
        for (qa, &a) in b.quantized().iter().enumerate() {
            for (qb, &bb) in b.quantized().iter().enumerate() {
                if !keep(a, bb) || w2[[a, bb]] == 0.0 {
                    continue;
                }
                acc.fill(ZERO);
                self.x[qa].left_into(ee(a, bb), ONE, &mut acc.view_mut());
                self.x[qb].right_into(acc.view(), C64::new(-2.0 * w2[[a, bb]], 0.0), &mut gg);
            }
        }
    }

    /// Output of a single term, for any ρ.
    pub fn apply_term(&self, term: Term, rho: ArrayView2<C64>) -> Result<Array2<C64>> {
        self.check_dims(rho)?;
        let d = self.basis.dim();
        let mut out = Array2::zeros((d, d));
        if !self.mask.contains(term) {
            return Ok(out);
        }
        let m = self.fuse(TermMask::only(term));
        general_mat_mul(ONE, &m, &rho, ZERO, &mut out);
        let mdag = m.t().mapv(|e| e.conj());
        general_mat_mul(ONE, &rho, &mdag, ONE, &mut out);
        self.add_jump(rho, TermMask::only(term), &mut out.view_mut());
        Ok(out)
    }

    /// Real diagonal of one term's output on a Hermitian ρ, in O(D²).
    pub fn term_diagonal(&self, term: Term, rho: ArrayView2<C64>) -> Vec<f64> {
        let d = self.basis.dim();
        let mut out = vec![0.0; d];
        if !self.mask.contains(term) {
            return out;
        }
        // diag(Aρ + ρA†) = 2 Re Σ_k A_fk ρ_kf
        let sparse = |a: &Option<CsMat<C64>>, sign: C64, out: &mut [f64]| {
            let Some(a) = a else { return };
            for (f, row) in a.outer_iterator().enumerate() {
                let s: C64 = row.iter().map(|(k, x)| x * rho[[k, f]]).sum();
                out[f] += 2.0 * (sign * s).re;
            }
        };
        let [laser, dd, k_cross] = &self.term_csr;
        match term {
            Term::Trap => {}
            Term::Laser => sparse(laser, C64::new(0.0, -1.0), &mut out),
            Term::Dd => sparse(dd, C64::new(0.0, -1.0), &mut out),
            Term::JumpDiagonal | Term::JumpCross => {
                if term == Term::JumpDiagonal {
                    for f in self.basis.excited() {
                        out[f] -= 2.0 * self.k_self * rho[[f, f]].re;
                    }
                } else {
                    sparse(k_cross, C64::new(-1.0, 0.0), &mut out);
                }
                let v = self.basis.vib_dim();
                let mut gg = Array2::<C64>::zeros((v, v));
                self.add_jump(rho, TermMask::only(term), &mut gg.view_mut());
                for (f, o) in out.iter_mut().enumerate().take(v) {
                    *o += gg[[f, f]].re;
                }
            }
        }
        out
    }

    /// Excitation-loss rate (units Γ) of a collective mode under the
    /// zeroth-order, laser-free generator. Only the jump term moves
    /// population into the ground block, so the rate is its ground-block trace.
    pub fn dark_mode_check(&self, modes: &CollectiveModes, k: usize) -> Result<f64> {
        let b = &self.basis;
        let rho = crate::hilbert::initial_state(b, &Excitation::Eigenmode(k), None, Some(modes))?;
        let mut zeroth = self.clone();
        zeroth.jump.w1.fill(0.0);
        zeroth.jump.w2.fill(0.0);
        let d = b.dim();
        let mut out = Array2::<C64>::zeros((d, d));
        zeroth.add_jump(
            rho.matrix().view(),
            TermMask::ALL,
            &mut out.view_mut(),
        );
        Ok(b.block(0).map(|f| out[[f, f]].re).sum())
    }
}

/// out += m x for row-major x and out with `w` columns; each nonzero is one
/// contiguous row update.
fn csr_rows_into(m: &CsMat<C64>, x: &[C64], out: &mut [C64], w: usize) {
    for (row, o) in m.outer_iterator().zip(out.chunks_exact_mut(w)) {
        for (k, &v) in row.iter() {
            for (a, &b) in o.iter_mut().zip(&x[k * w..(k + 1) * w]) {
                *a += v * b;
            }
        }
    }
}

fn to_csr(a: &Array2<C64>) -> CsMat<C64> {
    let mut t = TriMat::new(a.dim());
    for ((r, c), &v) in a.indexed_iter() {
        if v != ZERO {
            t.add_triplet(r, c, v);
        }
    }
    t.to_csr()
}

fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Maximum deviation from Hermiticity of a generator output.
pub fn output_hermiticity(drho: &Array2<C64>) -> f64 {
    hermiticity_defect(drho.view())
}
