//! Photon recoil in collectively interacting dipoles.
//!
//! Atoms are two-level emitters coupled through the free-space dipole
//! kernel. Selected atoms carry quantized harmonic motion along one axis,
//! and the Lindblad master equation is expanded to second order in the
//! Lamb-Dicke parameter. Units: Γ = k = 1; energies in the recoil energy,
//! momenta in ħk.

pub mod config;
pub mod error;
pub mod greens;
pub mod hilbert;
pub mod dynamics;
pub mod liouvillian;
pub mod observables;
pub mod scenarios;

pub use config::{load_config, load_config_file, LaserConfig, SystemConfig, UnitSystem, Vec3};
pub use error::{Error, Result};
pub use greens::{collective_modes, greens, greens_taylor, CollectiveModes, GreensData};
pub use hilbert::{initial_state, ladder_ops, Basis, DensityMatrix, Excitation};
pub use num_complex::Complex64 as C64;
