//! Fixed-step RK4 integration, decay and steady-state protocols, and
//! per-term energy attribution.

use ndarray::{Array2, ArrayView2, Zip};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{IntegratorConfig, SystemConfig};
use crate::error::{Error, Result};
use crate::greens::GreensData;
use crate::hilbert::{hermiticity_defect, initial_state, Basis, DensityMatrix, Excitation};
use crate::liouvillian::{GeneratorSet, Term, TermMask};
use crate::observables::{
    energy, energy_functional, excitations, momentum, recoil_energy_rate, truncation_population,
};

/// One value per [`Term`], indexed by `Term as usize`.
pub type TermValues = [f64; 5];

/// Positivity is checked by full diagonalization only below this dimension.
const EIGEN_CHECK_MAX_DIM: usize = 200;
const EIGEN_CHECK_EVERY: usize = 100;

#[derive(Debug, Clone, Serialize)]
pub struct Sample {
    pub t: f64,
    /// Per quantized atom, E_r.
    pub energy: Vec<f64>,
    /// Per quantized atom, change since t = 0.
    pub energy_change: Vec<f64>,
    /// Per quantized atom, ħk.
    pub momentum: Vec<f64>,
    /// Per atom.
    pub excitation: Vec<f64>,
    /// Cumulative energy per quantized atom and term since t = 0.
    pub term_energy: Vec<TermValues>,
    pub truncation: f64,
}

impl Sample {
    pub fn coherent(&self, slot: usize) -> f64 {
        coherent(&self.term_energy[slot])
    }

    pub fn decoherent(&self, slot: usize) -> f64 {
        decoherent(&self.term_energy[slot])
    }
}

pub fn coherent(v: &TermValues) -> f64 {
    Term::ALL.iter().filter(|t| t.is_coherent()).map(|&t| v[t as usize]).sum()
}

pub fn decoherent(v: &TermValues) -> f64 {
    v[Term::JumpDiagonal as usize]
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct TimeSeries {
    /// Quantized atoms, the columns of the per-atom vibrational fields.
    pub atoms: Vec<usize>,
    pub samples: Vec<Sample>,
}

/// Worst values of the density-matrix invariants seen during a run.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Monitors {
    pub max_trace_deviation: f64,
    pub max_hermiticity_defect: f64,
    pub min_population: f64,
    /// Smallest eigenvalue seen, when systems are small enough to check.
    pub min_eigenvalue: Option<f64>,
    pub max_truncation: f64,
}

impl Default for Monitors {
    fn default() -> Self {
        Monitors {
            max_trace_deviation: 0.0,
            max_hermiticity_defect: 0.0,
            min_population: f64::INFINITY,
            min_eigenvalue: None,
            max_truncation: 0.0,
        }
    }
}

impl Monitors {
    fn observe_cheap(&mut self, rho: ArrayView2<C64>) {
        let mut tr = 0.0;
        for c in rho.diag() {
            tr += c.re;
            self.min_population = self.min_population.min(c.re);
        }
        self.max_trace_deviation = self.max_trace_deviation.max((tr - 1.0).abs());
    }

    fn observe_full(&mut self, basis: &Basis, rho: ArrayView2<C64>, eigen: bool) -> Result<()> {
        self.observe_cheap(rho);
        self.max_hermiticity_defect = self.max_hermiticity_defect.max(hermiticity_defect(rho));
        self.max_truncation = self.max_truncation.max(truncation_population(basis, rho));
        if eigen && basis.dim() <= EIGEN_CHECK_MAX_DIM {
            let e = DensityMatrix::from_matrix(rho.to_owned()).min_eigenvalue()?;
            self.min_eigenvalue = Some(self.min_eigenvalue.map_or(e, |m| m.min(e)));
        }
        Ok(())
    }
}

/// Classical RK4 stepper with preallocated buffers and per-stage energy
/// attribution, so attributed term energies add up exactly to the total.
pub struct Integrator<'a> {
    gset: &'a GeneratorSet,
    dt: f64,
    k: [Array2<C64>; 4],
    stage: Array2<C64>,
    scratch: Array2<C64>,
    /// Energy deposited per quantized atom and term over the last step.
    step_energy: Vec<TermValues>,
}

impl<'a> Integrator<'a> {
    pub fn new(gset: &'a GeneratorSet, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Argument(format!("time step must be positive (got {dt})")));
        }
        let d = gset.basis().dim();
        let z = || Array2::<C64>::zeros((d, d));
        Ok(Integrator {
            gset,
            dt,
            k: [z(), z(), z(), z()],
            stage: z(),
            scratch: z(),
            step_energy: vec![[0.0; 5]; gset.basis().quantized().len()],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// dρ/dt at the start of the last step.
    pub fn derivative(&self) -> &Array2<C64> {
        &self.k[0]
    }

    pub fn step_energy(&self) -> &[TermValues] {
        &self.step_energy
    }

    /// Advances ρ (Hermitian) by one step in place.
    pub fn step(&mut self, rho: &mut Array2<C64>) -> Result<()> {
        let (dt, gset) = (self.dt, self.gset);
        let basis = gset.basis();
        let kappa = gset.kappa();
        for e in &mut self.step_energy {
            *e = [0.0; 5];
        }
        const WEIGHTS: [f64; 4] = [1.0, 2.0, 2.0, 1.0];
        const OFFSETS: [f64; 4] = [0.0, 0.5, 0.5, 1.0];
        for s in 0..4 {
            {
                let state = if s == 0 {
                    rho.view()
                } else {
                    let h = OFFSETS[s] * dt;
                    Zip::from(&mut self.stage)
                        .and(&*rho)
                        .and(&self.k[s - 1])
                        .for_each(|o, &r, &k| *o = r + k * h);
                    self.stage.view()
                };
                for term in gset.mask().terms() {
                    if term == Term::Trap {
                        continue;
                    }
                    let diag = gset.term_diagonal(term, state);
                    for (q, e) in self.step_energy.iter_mut().enumerate() {
                        e[term as usize] +=
                            WEIGHTS[s] * dt / 6.0 * energy_functional(basis, q, kappa, &diag);
                    }
                }
            }
            let state = if s == 0 { rho.view() } else { self.stage.view() };
            gset.apply_hermitian_into(state, &mut self.scratch, &mut self.k[s])?;
        }
        let c = dt / 6.0;
        Zip::from(&mut *rho)
            .and(&self.k[0])
            .and(&self.k[1])
            .and(&self.k[2])
            .and(&self.k[3])
            .for_each(|r, &a, &b, &cc, &d| *r += (a + (b + cc) * 2.0 + d) * c);
        let tr: C64 = rho.diag().sum();
        if !(tr.re.is_finite() && tr.im.is_finite()) {
            return Err(Error::Numerical {
                message: "non-finite density matrix during integration".into(),
                dump: format!("dt = {dt}, trace = {tr}"),
            });
        }
        Ok(())
    }
}

/// One RK4 step without attribution bookkeeping.
pub fn step_rk4(gset: &GeneratorSet, rho: &DensityMatrix, dt: f64) -> Result<DensityMatrix> {
    let mut integ = Integrator::new(gset, dt)?;
    let mut r = rho.matrix().clone();
    integ.step(&mut r)?;
    Ok(DensityMatrix::from_matrix(r))
}

/// Per-term energy rates on the quantized atoms for the state ρ.
#[derive(Debug, Clone, Serialize)]
pub struct EnergyRates {
    pub atoms: Vec<usize>,
    pub terms: Vec<TermValues>,
}

impl EnergyRates {
    pub fn total(&self, slot: usize) -> f64 {
        self.terms[slot].iter().sum()
    }

    pub fn coherent(&self, slot: usize) -> f64 {
        coherent(&self.terms[slot])
    }

    pub fn decoherent(&self, slot: usize) -> f64 {
        decoherent(&self.terms[slot])
    }
}

pub fn attribute_energy_rates(gset: &GeneratorSet, rho: ArrayView2<C64>) -> EnergyRates {
    let basis = gset.basis();
    let mut terms = vec![[0.0; 5]; basis.quantized().len()];
    for term in gset.mask().terms() {
        if term == Term::Trap {
            continue;
        }
        let diag = gset.term_diagonal(term, rho);
        for (q, t) in terms.iter_mut().enumerate() {
            t[term as usize] = energy_functional(basis, q, gset.kappa(), &diag);
        }
    }
    EnergyRates {
        atoms: basis.quantized().to_vec(),
        terms,
    }
}

struct Recorder<'a> {
    basis: &'a Basis,
    kappa: f64,
    series: TimeSeries,
    cumulative: Vec<TermValues>,
    monitors: Monitors,
    diag0: Vec<f64>,
    p0: Vec<f64>,
}

impl<'a> Recorder<'a> {
    fn new(basis: &'a Basis, kappa: f64, rho: ArrayView2<C64>) -> Result<Self> {
        let atoms = basis.quantized().to_vec();
        let diag0 = rho.diag().iter().map(|c| c.re).collect();
        let p0 = atoms
            .iter()
            .map(|&a| momentum(basis, rho, kappa, a))
            .collect::<Result<_>>()?;
        Ok(Recorder {
            basis,
            kappa,
            cumulative: vec![[0.0; 5]; atoms.len()],
            series: TimeSeries {
                atoms,
                samples: Vec::new(),
            },
            monitors: Monitors::default(),
            diag0,
            p0,
        })
    }

    fn accumulate(&mut self, step: &[TermValues]) {
        for (c, s) in self.cumulative.iter_mut().zip(step) {
            for k in 0..5 {
                c[k] += s[k];
            }
        }
    }

    /// Energy and momentum changes since the recorder was created.
    fn deltas(&self, rho: ArrayView2<C64>) -> Result<(Vec<f64>, Vec<f64>)> {
        let atoms = &self.series.atoms;
        let de = self.energy_changes(rho);
        let dp = atoms
            .iter()
            .zip(&self.p0)
            .map(|(&a, p0)| momentum(self.basis, rho, self.kappa, a).map(|p| p - p0))
            .collect::<Result<_>>()?;
        Ok((de, dp))
    }

    /// Differencing the diagonals first keeps the zero-point offset 1/2κ²
    /// out of the subtraction.
    fn energy_changes(&self, rho: ArrayView2<C64>) -> Vec<f64> {
        let d: Vec<f64> = rho
            .diag()
            .iter()
            .zip(&self.diag0)
            .map(|(c, d0)| c.re - d0)
            .collect();
        (0..self.series.atoms.len())
            .map(|q| energy_functional(self.basis, q, self.kappa, &d))
            .collect()
    }

    fn sample(&mut self, t: f64, rho: ArrayView2<C64>, eigen: bool) -> Result<()> {
        self.monitors.observe_full(self.basis, rho, eigen)?;
        let atoms = &self.series.atoms;
        let sample = Sample {
            t,
            energy: atoms
                .iter()
                .map(|&a| energy(self.basis, rho, self.kappa, a))
                .collect::<Result<_>>()?,
            energy_change: self.energy_changes(rho),
            momentum: atoms
                .iter()
                .map(|&a| momentum(self.basis, rho, self.kappa, a))
                .collect::<Result<_>>()?,
            excitation: excitations(self.basis, rho),
            term_energy: self.cumulative.clone(),
            truncation: truncation_population(self.basis, rho),
        };
        self.series.samples.push(sample);
        Ok(())
    }
}

fn choose_dt(gset: &GeneratorSet, opts: &IntegratorConfig) -> f64 {
    match opts.dt {
        Some(dt) => dt.min(gset.dt_max()),
        None => gset.dt_max(),
    }
}

/// Steps between samples, at least one.
fn sample_stride(dt: f64, interval: f64) -> usize {
    ((interval / dt).round() as usize).max(1)
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayOutcome {
    pub t_final: f64,
    pub steps: usize,
    pub dt: f64,
    pub atoms: Vec<usize>,
    /// Energy change per quantized atom, E_r.
    pub delta_energy: Vec<f64>,
    /// Momentum change per quantized atom, ħk.
    pub delta_momentum: Vec<f64>,
    pub term_energy: Vec<TermValues>,
    pub residual_excitation: f64,
    /// |dE/dt| · P / |dP/dt| at the stopping point, per quantized atom.
    pub energy_error_bound: Vec<f64>,
    pub monitors: Monitors,
    #[serde(skip)]
    pub series: TimeSeries,
    #[serde(skip)]
    pub final_state: DensityMatrix,
}

impl DecayOutcome {
    pub fn coherent(&self, slot: usize) -> f64 {
        coherent(&self.term_energy[slot])
    }

    pub fn decoherent(&self, slot: usize) -> f64 {
        decoherent(&self.term_energy[slot])
    }

    /// Slot of `atom` in the per-atom vectors.
    pub fn slot(&self, atom: usize) -> Option<usize> {
        self.atoms.iter().position(|&a| a == atom)
    }
}

/// Integrates until the total excitation falls below `opts.excitation_tol`.
pub fn decay_to_ground(
    gset: &GeneratorSet,
    rho0: &DensityMatrix,
    opts: &IntegratorConfig,
) -> Result<DecayOutcome> {
    if gset.has_laser() {
        return Err(Error::Argument("decay runs require the laser term to be off".into()));
    }
    let basis = gset.basis();
    let mut rho = rho0.matrix().clone();
    let excitation = |r: &Array2<C64>| excitations(basis, r.view()).iter().sum::<f64>();
    let p_start = excitation(&rho);
    if p_start <= opts.excitation_tol {
        return Err(Error::Argument(format!(
            "initial excitation {p_start:.3e} is already below the tolerance"
        )));
    }
    let dt = choose_dt(gset, opts);
    let stride = sample_stride(dt, opts.sample_interval);
    let mut rec = Recorder::new(basis, gset.kappa(), rho.view())?;
    rec.sample(0.0, rho.view(), true)?;
    let mut integ = Integrator::new(gset, dt)?;
    let mut steps = 0usize;
    let mut t;
    let mut checkpoint = (0.0, p_start);
    loop {
        integ.step(&mut rho)?;
        steps += 1;
        t = steps as f64 * dt;
        rec.accumulate(integ.step_energy());
        rec.monitors.observe_cheap(rho.view());
        let p = excitation(&rho);
        let done = p < opts.excitation_tol;
        if done || steps % stride == 0 {
            rec.sample(t, rho.view(), steps % (stride * EIGEN_CHECK_EVERY) == 0)?;
        }
        if done {
            break;
        }
        if t - checkpoint.0 >= opts.stall_window {
            if p >= checkpoint.1 {
                return Err(Error::Timeout {
                    message: format!(
                        "excitation {p:.3e} did not decrease over {} / Γ",
                        opts.stall_window
                    ),
                    slowest_rate: gset.slowest_mode_rate(),
                });
            }
            checkpoint = (t, p);
        }
        if t >= opts.t_max {
            return Err(Error::Timeout {
                message: format!("excitation still {p:.3e} at t = {t:.1} / Γ"),
                slowest_rate: gset.slowest_mode_rate(),
            });
        }
    }
    if rec.series.samples.last().map(|s| s.t) != Some(t) {
        rec.sample(t, rho.view(), true)?;
    }

    let atoms = basis.quantized().to_vec();
    let kappa = gset.kappa();
    let (delta_energy, delta_momentum) = rec.deltas(rho.view())?;

    let final_state = DensityMatrix::from_matrix(rho);
    let drho = gset.apply(&final_state)?;
    let p = excitation(final_state.matrix());
    let dp: f64 = (0..basis.n_atoms())
        .flat_map(|j| basis.block(j + 1))
        .map(|f| drho[[f, f]].re)
        .sum();
    let ddiag: Vec<f64> = drho.diag().iter().map(|c| c.re).collect();
    let energy_error_bound = (0..atoms.len())
        .map(|q| {
            let de = energy_functional(basis, q, kappa, &ddiag);
            if dp == 0.0 {
                0.0
            } else {
                (de * p / dp).abs()
            }
        })
        .collect();

    Ok(DecayOutcome {
        t_final: t,
        steps,
        dt,
        atoms,
        delta_energy,
        delta_momentum,
        term_energy: rec.cumulative.clone(),
        residual_excitation: p,
        energy_error_bound,
        monitors: rec.monitors,
        series: rec.series,
        final_state,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveOutcome {
    pub t_final: f64,
    pub steps: usize,
    pub dt: f64,
    pub atoms: Vec<usize>,
    pub delta_energy: Vec<f64>,
    pub delta_momentum: Vec<f64>,
    pub term_energy: Vec<TermValues>,
    /// P_j at t_final.
    pub excitation: Vec<f64>,
    pub monitors: Monitors,
    #[serde(skip)]
    pub series: TimeSeries,
    #[serde(skip)]
    pub final_state: DensityMatrix,
}

/// Integrates for a fixed time `t_end`, sampling every `opts.sample_interval`.
pub fn evolve(
    gset: &GeneratorSet,
    rho0: &DensityMatrix,
    t_end: f64,
    opts: &IntegratorConfig,
) -> Result<EvolveOutcome> {
    if !(t_end.is_finite() && t_end > 0.0) {
        return Err(Error::Argument(format!("t_end must be positive (got {t_end})")));
    }
    let basis = gset.basis();
    let mut rho = rho0.matrix().clone();
    let dt0 = choose_dt(gset, opts);
    let n_steps = (t_end / dt0).ceil() as usize;
    let dt = t_end / n_steps as f64;
    let stride = sample_stride(dt, opts.sample_interval);
    let mut rec = Recorder::new(basis, gset.kappa(), rho.view())?;
    rec.sample(0.0, rho.view(), true)?;
    let mut integ = Integrator::new(gset, dt)?;
    for step in 1..=n_steps {
        integ.step(&mut rho)?;
        rec.accumulate(integ.step_energy());
        rec.monitors.observe_cheap(rho.view());
        if step % stride == 0 || step == n_steps {
            rec.sample(step as f64 * dt, rho.view(), step % (stride * EIGEN_CHECK_EVERY) == 0)?;
        }
    }
    let (delta_energy, delta_momentum) = rec.deltas(rho.view())?;
    Ok(EvolveOutcome {
        t_final: t_end,
        steps: n_steps,
        dt,
        atoms: basis.quantized().to_vec(),
        delta_energy,
        delta_momentum,
        term_energy: rec.cumulative.clone(),
        excitation: excitations(basis, rho.view()),
        monitors: rec.monitors,
        series: rec.series,
        final_state: DensityMatrix::from_matrix(rho),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyOutcome {
    /// Time at which the convergence criterion started to hold.
    pub t_converged: f64,
    pub steps: usize,
    pub dt: f64,
    pub atoms: Vec<usize>,
    /// Rate of the energy about the mean displacement per quantized atom,
    /// E_r Γ (work on the mean radiation-pressure motion excluded).
    pub energy_rate: Vec<f64>,
    /// Plain dE/dt including the work on the mean motion.
    pub raw_energy_rate: Vec<f64>,
    pub term_rates: Vec<TermValues>,
    /// dp/dt per quantized atom, ħk Γ.
    pub momentum_rate: Vec<f64>,
    /// P_j for every atom.
    pub excitation: Vec<f64>,
    /// Γ P_j for every atom.
    pub scattering_rate: Vec<f64>,
    /// (dE/dt) / (Γ P_j) per quantized atom.
    pub energy_per_photon: Vec<f64>,
    pub term_per_photon: Vec<TermValues>,
    pub monitors: Monitors,
    #[serde(skip)]
    pub series: TimeSeries,
    #[serde(skip)]
    pub state: DensityMatrix,
}

impl SteadyOutcome {
    pub fn slot(&self, atom: usize) -> Option<usize> {
        self.atoms.iter().position(|&a| a == atom)
    }

    pub fn coherent_per_photon(&self, slot: usize) -> f64 {
        coherent(&self.term_per_photon[slot])
    }

    pub fn decoherent_per_photon(&self, slot: usize) -> f64 {
        decoherent(&self.term_per_photon[slot])
    }
}

/// Integrates until max_j |dP_j/dt| < steady_tol · Γ has held for
/// `steady_hold`, then reports rates at the time the criterion first held.
pub fn steady_state(
    gset: &GeneratorSet,
    rho0: &DensityMatrix,
    opts: &IntegratorConfig,
) -> Result<SteadyOutcome> {
    let basis = gset.basis();
    let n = basis.n_atoms();
    let mut rho = rho0.matrix().clone();
    let dt = choose_dt(gset, opts);
    let stride = sample_stride(dt, opts.sample_interval);
    let mut rec = Recorder::new(basis, gset.kappa(), rho.view())?;
    rec.sample(0.0, rho.view(), true)?;
    let mut integ = Integrator::new(gset, dt)?;
    let mut steps = 0usize;
    let mut crossing: Option<(f64, Array2<C64>)> = None;
    let mut last_rates: Vec<f64>;
    let mut sign_changes = 0usize;
    let mut last_sign = 0.0f64;
    loop {
        let t_now = steps as f64 * dt;
        let before = rho.clone();
        integ.step(&mut rho)?;
        let k = integ.derivative();
        let rates: Vec<f64> = (0..n)
            .map(|j| basis.block(j + 1).map(|f| k[[f, f]].re).sum())
            .collect();
        let worst = rates.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        let lead = rates.iter().cloned().fold(0.0, |a: f64, b| if b.abs() > a.abs() { b } else { a });
        if lead * last_sign < 0.0 {
            sign_changes += 1;
        }
        if lead != 0.0 {
            last_sign = lead.signum();
        }
        last_rates = rates;
        if worst < opts.steady_tol {
            match &crossing {
                Some((t0, _)) if t_now - t0 >= opts.steady_hold => break,
                Some(_) => {}
                None => crossing = Some((t_now, before)),
            }
        } else {
            crossing = None;
        }
        steps += 1;
        let t = steps as f64 * dt;
        rec.accumulate(integ.step_energy());
        rec.monitors.observe_cheap(rho.view());
        if steps % stride == 0 {
            rec.sample(t, rho.view(), steps % (stride * EIGEN_CHECK_EVERY) == 0)?;
        }
        if t >= opts.t_max {
            let worst = last_rates.iter().fold(0.0f64, |m, r| m.max(r.abs()));
            return Err(Error::NoConvergence {
                t_max: opts.t_max,
                diagnostic: format!(
                    "max |dP/dt| = {worst:.3e}; leading rate changed sign {sign_changes} times{}",
                    if sign_changes > 10 { " (oscillating)" } else { "" }
                ),
            });
        }
    }
    let (t_converged, state) = crossing.expect("loop exits only after a crossing");
    rec.sample(steps as f64 * dt, rho.view(), true)?;

    let state = DensityMatrix::from_matrix(state);
    let view = state.matrix().view();
    let drho = gset.apply(&state)?;
    let kappa = gset.kappa();
    let atoms = basis.quantized().to_vec();
    let momentum_rate = atoms
        .iter()
        .map(|&a| momentum(basis, drho.view(), kappa, a))
        .collect::<Result<Vec<_>>>()?;
    let raw_energy_rate = atoms
        .iter()
        .map(|&a| {
            let diag: Vec<f64> = drho.diag().iter().map(|c| c.re).collect();
            basis.slot(a).map(|q| energy_functional(basis, q, kappa, &diag))
        })
        .collect::<Option<Vec<_>>>()
        .unwrap_or_default();
    let mut term_rates = vec![[0.0; 5]; atoms.len()];
    for term in gset.mask().terms().filter(|&t| t != Term::Trap) {
        let out = gset.apply_term(term, view)?;
        for (q, &a) in atoms.iter().enumerate() {
            term_rates[q][term as usize] = recoil_energy_rate(basis, view, out.view(), kappa, a)?;
        }
    }
    let rates = EnergyRates {
        atoms: atoms.clone(),
        terms: term_rates,
    };
    let excitation = excitations(basis, view);
    let scattering_rate: Vec<f64> = excitation.clone();
    let energy_rate: Vec<f64> = (0..atoms.len()).map(|q| rates.total(q)).collect();
    let per_photon = |x: f64, atom: usize| {
        let r = scattering_rate[atom];
        if r > 0.0 {
            x / r
        } else {
            f64::NAN
        }
    };
    let energy_per_photon = atoms
        .iter()
        .enumerate()
        .map(|(q, &a)| per_photon(energy_rate[q], a))
        .collect();
    let term_per_photon = atoms
        .iter()
        .enumerate()
        .map(|(q, &a)| rates.terms[q].map(|x| per_photon(x, a)))
        .collect();

    Ok(SteadyOutcome {
        t_converged,
        steps,
        dt,
        atoms,
        energy_rate,
        raw_energy_rate,
        term_rates: rates.terms,
        momentum_rate,
        excitation,
        scattering_rate,
        energy_per_photon,
        term_per_photon,
        monitors: rec.monitors,
        series: rec.series,
        state,
    })
}

/// What to run at each point of a trap-frequency sweep.
#[derive(Debug, Clone, PartialEq)]
pub enum Protocol {
    Decay {
        initial: Excitation,
        vib: Option<Vec<usize>>,
    },
    Steady {
        vib: Option<Vec<usize>>,
    },
    Evolve {
        initial: Excitation,
        vib: Option<Vec<usize>>,
        t_end: f64,
    },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum PointOutcome {
    Decay(DecayOutcome),
    Steady(SteadyOutcome),
    Evolve(EvolveOutcome),
}

impl PointOutcome {
    pub fn series(&self) -> &TimeSeries {
        match self {
            PointOutcome::Decay(o) => &o.series,
            PointOutcome::Steady(o) => &o.series,
            PointOutcome::Evolve(o) => &o.series,
        }
    }

    pub fn monitors(&self) -> &Monitors {
        match self {
            PointOutcome::Decay(o) => &o.monitors,
            PointOutcome::Steady(o) => &o.monitors,
            PointOutcome::Evolve(o) => &o.monitors,
        }
    }
}

fn prepare(
    cfg: &SystemConfig,
    basis: &Basis,
    initial: &Excitation,
    vib: Option<&[usize]>,
) -> Result<DensityMatrix> {
    let modes = match initial {
        Excitation::Eigenmode(_) => Some(crate::greens::collective_modes(&cfg.positions, &cfg.dipole)?),
        _ => None,
    };
    initial_state(basis, initial, vib, modes.as_ref())
}

/// Builds the generator for `cfg` and runs `protocol` once.
pub fn run_point(cfg: &SystemConfig, protocol: &Protocol) -> Result<PointOutcome> {
    let basis = Basis::from_config(cfg)?;
    let greens = GreensData::new(&cfg.positions, &cfg.dipole, &cfg.oscillation)?;
    let mut gset = GeneratorSet::assemble(cfg, &basis, &greens)?;
    if let Some(terms) = &cfg.scenario.terms {
        gset = gset.with_mask(TermMask::parse(terms)?);
    }
    match protocol {
        Protocol::Decay { initial, vib } => {
            let rho = prepare(cfg, &basis, initial, vib.as_deref())?;
            decay_to_ground(&gset, &rho, &cfg.integrator).map(PointOutcome::Decay)
        }
        Protocol::Evolve { initial, vib, t_end } => {
            let rho = prepare(cfg, &basis, initial, vib.as_deref())?;
            evolve(&gset, &rho, *t_end, &cfg.integrator).map(PointOutcome::Evolve)
        }
        Protocol::Steady { vib } => {
            let rho = initial_state(&basis, &Excitation::Ground, vib.as_deref(), None)?;
            steady_state(&gset, &rho, &cfg.integrator).map(PointOutcome::Steady)
        }
    }
}

#[derive(Debug)]
pub struct SweepPoint {
    pub omega_t: f64,
    pub outcome: Result<PointOutcome>,
}

/// Runs `protocol` at every trap frequency with κ held fixed. Points run
/// concurrently on the current rayon pool; results keep the input order.
pub fn frequency_sweep(cfg: &SystemConfig, omegas: &[f64], protocol: &Protocol) -> Vec<SweepPoint> {
    omegas
        .par_iter()
        .map(|&w| {
            let mut c = cfg.clone();
            c.omega_t = w;
            SweepPoint {
                omega_t: w,
                outcome: run_point(&c, protocol),
            }
        })
        .collect()
}
