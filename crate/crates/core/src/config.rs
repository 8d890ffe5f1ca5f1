//! Unit conventions, physical parameters and validated run configuration.
//!
//! Everything inside the library is dimensionless: times are measured in
//! units of 1/Γ (single-atom decay rate), lengths in units of 1/k (resonant
//! wavenumber, so λ = 2π), energies are reported in recoil energies E_r and
//! momenta in ħk. The mass and trap frequency only enter through the
//! Lamb-Dicke-like parameter κ, and the vibrational level spacing in
//! reporting units is E_r/κ².
//!
//! Configurations are TOML documents with the sections `[system]`, `[trap]`,
//! `[laser]`, `[basis]`, `[integrator]` and `[scenario]`.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};
use std::path::Path;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];
pub type CVec3 = [C64; 3];

/// Taylor order of the kernel expansion in the atomic displacement. Fixed.
pub const TAYLOR_ORDER: u32 = 2;

const UNIT_TOL: f64 = 1e-9;

/// Reporting units. Internally Γ = k = 1; these only label output.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem {
    pub kappa: f64,
}

impl UnitSystem {
    pub const TIME: &'static str = "1/Gamma";
    pub const LENGTH: &'static str = "1/k";
    pub const ENERGY: &'static str = "E_r";
    pub const MOMENTUM: &'static str = "hbar*k";

    /// Vibrational level spacing ħω_t expressed in E_r.
    pub fn level_spacing(&self) -> f64 {
        1.0 / (self.kappa * self.kappa)
    }

    /// Converts a length in wavelengths to internal units (1/k).
    pub fn wavelengths(lambda_units: f64) -> f64 {
        lambda_units * TAU
    }
}

/// A continuous probe laser.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserConfig {
    /// Rabi frequency Ω in units of Γ.
    pub rabi: f64,
    /// Detuning δ in units of Γ.
    pub detuning: f64,
    /// Unit propagation vector k̂₀.
    pub direction: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    /// Fixed step; `None` selects the stability heuristic.
    pub dt: Option<f64>,
    /// Optional fixed end time for time-series runs.
    pub t_end: Option<f64>,
    pub excitation_tol: f64,
    pub steady_tol: f64,
    /// Time the steady-state criterion must hold before a run counts as converged.
    pub steady_hold: f64,
    pub t_max: f64,
    pub stall_window: f64,
    pub sample_interval: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: None,
            t_end: None,
            excitation_tol: 1e-6,
            steady_tol: 1e-8,
            steady_hold: 1.0,
            t_max: 1e4,
            stall_window: 100.0,
            sample_interval: 0.1,
        }
    }
}

/// Direction given either by name (`"x"`, `"-z"`, ...) or as a vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DirectionSpec {
    Named(String),
    Vector(Vec3),
}

/// Dipole orientation: `"e+"`, `"e-"`, `"x"`, `"y"`, `"z"` or explicit components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DipoleSpec {
    Named(String),
    Components { re: Vec3, im: Vec3 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum QuantizedSpec {
    All(String),
    List(Vec<usize>),
}

/// Raw `[scenario]` section. Interpreted by [`crate::scenarios`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// `line`, `square` or `array`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub geometry: Option<String>,
    /// Nearest-neighbour spacing in wavelengths.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spacing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cols: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub axis: Option<DirectionSpec>,
    /// `ground`, `excited:<j>`, `uniform` or `mode:<k>`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vib_initial: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub directions: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub terms: Option<String>,
    /// Swept parameter for sweep scenarios (`omega_t`, `d`, `omega`, `delta`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub param: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    /// Run length of fixed-time scenarios in exchange periods.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cycles: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    n_atoms: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<Vec3>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    dipole: Option<DipoleSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    oscillation: Option<DirectionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    taylor_order: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrapDoc {
    kappa: f64,
    omega_t: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LaserDoc {
    rabi: f64,
    #[serde(default)]
    detuning: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<DirectionSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisDoc {
    n_vib: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    quantized: Option<QuantizedSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_bytes: Option<u64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct IntegratorDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    excitation_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steady_tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    steady_hold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stall_window: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sample_interval: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigDoc {
    #[serde(default)]
    system: SystemDoc,
    trap: TrapDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    laser: Option<LaserDoc>,
    basis: BasisDoc,
    #[serde(default)]
    integrator: IntegratorDoc,
    #[serde(default)]
    scenario: ScenarioSection,
}

/// Validated, immutable description of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Trap centres R_j in units of 1/k.
    pub positions: Vec<Vec3>,
    /// Dipole orientation q̂ with q̂·q̂* = 1.
    pub dipole: CVec3,
    /// Unit vector along which the vibrational motion is quantized.
    pub oscillation: Vec3,
    pub kappa: f64,
    /// Trap frequency ω_t in units of Γ. Independent of κ.
    pub omega_t: f64,
    pub laser: Option<LaserConfig>,
    pub n_vib: usize,
    /// Sorted, distinct indices of atoms with vibrational states.
    pub quantized_atoms: Vec<usize>,
    pub max_bytes: u64,
    pub integrator: IntegratorConfig,
    pub scenario: ScenarioSection,
}

pub const DEFAULT_MAX_BYTES: u64 = 4 << 30;

/// e₊ = −(x̂ + iŷ)/√2
pub fn sigma_plus() -> CVec3 {
    [
        C64::new(-FRAC_1_SQRT_2, 0.0),
        C64::new(0.0, -FRAC_1_SQRT_2),
        C64::new(0.0, 0.0),
    ]
}

/// e₋ = (x̂ − iŷ)/√2
pub fn sigma_minus() -> CVec3 {
    [
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::new(0.0, -FRAC_1_SQRT_2),
        C64::new(0.0, 0.0),
    ]
}

pub fn axis(name: &str) -> Option<Vec3> {
    let (sign, body) = match name.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, name.strip_prefix('+').unwrap_or(name)),
    };
    match body {
        "x" => Some([sign, 0.0, 0.0]),
        "y" => Some([0.0, sign, 0.0]),
        "z" => Some([0.0, 0.0, sign]),
        _ => None,
    }
}

/// Short label for a direction: the axis name when it is a coordinate axis.
pub fn axis_label(v: &Vec3) -> String {
    for name in ["x", "y", "z", "-x", "-y", "-z"] {
        if axis(name).as_ref() == Some(v) {
            return name.trim_start_matches('-').to_string();
        }
    }
    "u".to_string()
}

impl DirectionSpec {
    pub(crate) fn resolve(&self, key: &str) -> Result<Vec3> {
        let v = match self {
            DirectionSpec::Named(n) => axis(n)
                .ok_or_else(|| Error::Parse(format!("{key}: unknown direction {n:?}")))?,
            DirectionSpec::Vector(v) => *v,
        };
        check_finite(key, &v)?;
        let norm = norm(&v);
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::Validation(format!(
                "{key} must be a unit vector (|v| = {norm})"
            )));
        }
        Ok(v)
    }
}

impl DipoleSpec {
    fn resolve(&self) -> Result<CVec3> {
        let q = match self {
            DipoleSpec::Named(n) => match n.as_str() {
                "e+" | "sigma+" => sigma_plus(),
                "e-" | "sigma-" => sigma_minus(),
                other => {
                    let v = axis(other).ok_or_else(|| {
                        Error::Parse(format!("system.dipole: unknown orientation {other:?}"))
                    })?;
                    [v[0].into(), v[1].into(), v[2].into()]
                }
            },
            DipoleSpec::Components { re, im } => {
                check_finite("system.dipole.re", re)?;
                check_finite("system.dipole.im", im)?;
                [
                    C64::new(re[0], im[0]),
                    C64::new(re[1], im[1]),
                    C64::new(re[2], im[2]),
                ]
            }
        };
        let n2: f64 = q.iter().map(|c| c.norm_sqr()).sum();
        if (n2 - 1.0).abs() > UNIT_TOL {
            return Err(Error::Validation(format!(
                "system.dipole must satisfy q·q* = 1 (got {n2})"
            )));
        }
        Ok(q)
    }
}

fn norm(v: &Vec3) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn check_finite(key: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::Validation(format!("{key} must be finite")))
    }
}

fn check_positive(key: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::Validation(format!("{key} must be finite and > 0 (got {x})")))
    }
}

pub fn distance(a: &Vec3, b: &Vec3) -> f64 {
    norm(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]])
}

impl SystemConfig {
    pub fn n_atoms(&self) -> usize {
        self.positions.len()
    }

    pub fn units(&self) -> UnitSystem {
        UnitSystem { kappa: self.kappa }
    }

    /// Smallest pairwise trap separation (k·d), `None` for a single atom.
    pub fn min_separation(&self) -> Option<f64> {
        let n = self.positions.len();
        let mut best: Option<f64> = None;
        for i in 0..n {
            for j in i + 1..n {
                let d = distance(&self.positions[i], &self.positions[j]);
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }

    /// Wavefunction spread over the smallest separation, κ / (k d_min).
    pub fn spread_ratio(&self) -> Option<f64> {
        self.min_separation().map(|d| self.kappa / d)
    }

    pub fn is_quantized(&self, atom: usize) -> bool {
        self.quantized_atoms.binary_search(&atom).is_ok()
    }

    fn validate(&self) -> Result<()> {
        if self.positions.is_empty() {
            return Err(Error::Validation("n_atoms must be at least 1".into()));
        }
        for (i, p) in self.positions.iter().enumerate() {
            check_finite(&format!("system.positions[{i}]"), p)?;
        }
        check_positive("trap.kappa", self.kappa)?;
        check_positive("trap.omega_t", self.omega_t)?;
        if self.n_vib < 2 {
            return Err(Error::Validation(format!(
                "basis.n_vib must be >= 2 (got {})",
                self.n_vib
            )));
        }
        if let Some(laser) = &self.laser {
            if !(laser.rabi.is_finite() && laser.rabi >= 0.0) {
                return Err(Error::Validation("laser.rabi must be finite and >= 0".into()));
            }
            if !laser.detuning.is_finite() {
                return Err(Error::Validation("laser.detuning must be finite".into()));
            }
        }
        if self.quantized_atoms.is_empty() {
            return Err(Error::Validation("basis.quantized must not be empty".into()));
        }
        let n = self.n_atoms();
        if let Some(&bad) = self.quantized_atoms.iter().find(|&&a| a >= n) {
            return Err(Error::Validation(format!(
                "basis.quantized references atom {bad} but there are only {n} atoms"
            )));
        }
        let it = &self.integrator;
        if let Some(dt) = it.dt {
            check_positive("integrator.dt", dt)?;
        }
        if let Some(t) = it.t_end {
            check_positive("integrator.t_end", t)?;
        }
        check_positive("integrator.excitation_tol", it.excitation_tol)?;
        check_positive("integrator.steady_tol", it.steady_tol)?;
        check_positive("integrator.steady_hold", it.steady_hold)?;
        check_positive("integrator.t_max", it.t_max)?;
        check_positive("integrator.stall_window", it.stall_window)?;
        check_positive("integrator.sample_interval", it.sample_interval)?;
        if let Some(s) = self.scenario.spacing {
            check_positive("scenario.spacing", s)?;
        }

        // The kernel varies on the scale of both the separation and the
        // wavelength, so the spread must be small compared with each.
        let scale = self.min_separation().map_or(1.0, |d| d.min(1.0));
        if let Some(d) = self.min_separation() {
            if d <= 0.0 {
                return Err(Error::Validation("two atoms share the same trap centre".into()));
            }
        }
        if self.kappa >= scale {
            return Err(Error::Validation(format!(
                "wavefunction spread kappa/k = {} is not smaller than min(separation, 1/k) = {scale}",
                self.kappa
            )));
        }
        if self.kappa >= 0.5 * scale {
            log::warn!(
                "wavefunction spread kappa/k = {} exceeds half of min(separation, 1/k) = {scale}; \
                 the second-order kernel expansion is unreliable",
                self.kappa
            );
        }
        Ok(())
    }

    /// Canonical TOML rendering with every default resolved.
    pub fn to_toml_string(&self) -> String {
        let laser = self.laser.as_ref().map(|l| LaserDoc {
            rabi: l.rabi,
            detuning: l.detuning,
            direction: Some(DirectionSpec::Vector(l.direction)),
        });
        let it = &self.integrator;
        let doc = ConfigDoc {
            system: SystemDoc {
                n_atoms: Some(self.n_atoms()),
                positions: Some(self.positions.clone()),
                dipole: Some(DipoleSpec::Components {
                    re: [self.dipole[0].re, self.dipole[1].re, self.dipole[2].re],
                    im: [self.dipole[0].im, self.dipole[1].im, self.dipole[2].im],
                }),
                oscillation: Some(DirectionSpec::Vector(self.oscillation)),
                taylor_order: Some(TAYLOR_ORDER),
            },
            trap: TrapDoc {
                kappa: self.kappa,
                omega_t: self.omega_t,
            },
            laser,
            basis: BasisDoc {
                n_vib: self.n_vib,
                quantized: Some(QuantizedSpec::List(self.quantized_atoms.clone())),
                max_bytes: Some(self.max_bytes),
            },
            integrator: IntegratorDoc {
                dt: it.dt,
                t_end: it.t_end,
                excitation_tol: Some(it.excitation_tol),
                steady_tol: Some(it.steady_tol),
                steady_hold: Some(it.steady_hold),
                t_max: Some(it.t_max),
                stall_window: Some(it.stall_window),
                sample_interval: Some(it.sample_interval),
            },
            scenario: self.scenario.clone(),
        };
        toml::to_string(&doc).expect("config documents always serialize")
    }

    /// Short content hash of the canonical rendering.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.to_toml_string().as_bytes());
        hex::encode(&digest[..8])
    }
}

/// Parses and validates a configuration document.
pub fn load_config(source: &str) -> Result<SystemConfig> {
    load_config_with_overrides(source, &[])
}

pub fn load_config_file(path: &Path, overrides: &[(String, String)]) -> Result<SystemConfig> {
    let text = std::fs::read_to_string(path)?;
    load_config_with_overrides(&text, overrides)
}

/// Parses a document, applies `key=value` overrides (dotted keys, e.g.
/// `trap.kappa`), then validates.
pub fn load_config_with_overrides(
    source: &str,
    overrides: &[(String, String)],
) -> Result<SystemConfig> {
    let mut table: toml::Table = source.parse().map_err(|e: toml::de::Error| {
        Error::Parse(e.to_string())
    })?;
    for (k, v) in overrides {
        apply_override(&mut table, k, v)?;
    }
    from_table(table)
}

/// Sets a dotted key in a parsed document. Values are parsed as TOML
/// literals and fall back to plain strings.
pub fn apply_override(table: &mut toml::Table, key: &str, value: &str) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::Parse(format!("malformed override key {key:?}")));
    }
    let parsed: toml::Value = format!("v = {value}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(value.to_string()));
    let (last, path) = parts.split_last().expect("non-empty");
    let mut cur = table;
    for p in path {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::Parse(format!("override {key}: `{p}` is not a section")))?;
    }
    cur.insert(last.to_string(), parsed);
    Ok(())
}

/// Builds a validated config from an already-parsed document.
pub fn from_table(table: toml::Table) -> Result<SystemConfig> {
    let doc: ConfigDoc = table
        .try_into()
        .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
    resolve(doc)
}

fn resolve(doc: ConfigDoc) -> Result<SystemConfig> {
    if let Some(order) = doc.system.taylor_order {
        if order != TAYLOR_ORDER {
            return Err(Error::Validation(format!(
                "system.taylor_order is fixed at {TAYLOR_ORDER} (got {order})"
            )));
        }
    }
    let positions = match (&doc.system.positions, &doc.scenario.geometry) {
        (Some(p), _) => p.clone(),
        (None, Some(_)) => crate::scenarios::geometry::build(&doc.scenario)?,
        (None, None) => match doc.system.n_atoms {
            None | Some(1) => vec![[0.0; 3]],
            Some(n) => {
                return Err(Error::Validation(format!(
                    "system.positions or scenario.geometry is required for n_atoms = {n}"
                )))
            }
        },
    };
    if let Some(n) = doc.system.n_atoms {
        if n != positions.len() {
            return Err(Error::Validation(format!(
                "system.n_atoms = {n} but {} positions were given",
                positions.len()
            )));
        }
    }
    let dipole = doc
        .system
        .dipole
        .unwrap_or_else(|| DipoleSpec::Named("e+".into()))
        .resolve()?;
    let oscillation = doc
        .system
        .oscillation
        .unwrap_or_else(|| DirectionSpec::Named("z".into()))
        .resolve("system.oscillation")?;
    let laser = match doc.laser {
        Some(l) => Some(LaserConfig {
            rabi: l.rabi,
            detuning: l.detuning,
            direction: l
                .direction
                .unwrap_or_else(|| DirectionSpec::Named("z".into()))
                .resolve("laser.direction")?,
        }),
        None => None,
    };
    let n = positions.len();
    let mut quantized_atoms = match doc.basis.quantized {
        None => (0..n).collect(),
        Some(QuantizedSpec::All(s)) if s == "all" => (0..n).collect(),
        Some(QuantizedSpec::All(s)) if s == "center" => vec![center_atom(&positions)],
        Some(QuantizedSpec::All(s)) => {
            return Err(Error::Parse(format!(
                "basis.quantized: expected \"all\", \"center\" or a list of atom indices, got {s:?}"
            )))
        }
        Some(QuantizedSpec::List(v)) => v,
    };
    quantized_atoms.sort_unstable();
    quantized_atoms.dedup();

    let d = IntegratorConfig::default();
    let i = doc.integrator;
    let cfg = SystemConfig {
        positions,
        dipole,
        oscillation,
        kappa: doc.trap.kappa,
        omega_t: doc.trap.omega_t,
        laser,
        n_vib: doc.basis.n_vib,
        quantized_atoms,
        max_bytes: doc.basis.max_bytes.unwrap_or(DEFAULT_MAX_BYTES),
        integrator: IntegratorConfig {
            dt: i.dt,
            t_end: i.t_end,
            excitation_tol: i.excitation_tol.unwrap_or(d.excitation_tol),
            steady_tol: i.steady_tol.unwrap_or(d.steady_tol),
            steady_hold: i.steady_hold.unwrap_or(d.steady_hold),
            t_max: i.t_max.unwrap_or(d.t_max),
            stall_window: i.stall_window.unwrap_or(d.stall_window),
            sample_interval: i.sample_interval.unwrap_or(d.sample_interval),
        },
        scenario: doc.scenario,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Index of the atom closest to the centroid (lowest index on ties).
pub fn center_atom(positions: &[Vec3]) -> usize {
    let n = positions.len() as f64;
    let mut c = [0.0; 3];
    for p in positions {
        for k in 0..3 {
            c[k] += p[k] / n;
        }
    }
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, p) in positions.iter().enumerate() {
        let d = distance(p, &c);
        if d < best_d - 1e-12 {
            best = i;
            best_d = d;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const MINIMAL: &str = "[system]\nn_atoms = 1\n[trap]\nkappa = 0.01\nomega_t = 1\n[basis]\nn_vib = 5\n";

    fn pair(kappa: f64) -> String {
        format!(
            "[system]\npositions = [[0.0, 0.0, 0.0], [{}, 0.0, 0.0]]\n\
             [trap]\nkappa = {kappa}\nomega_t = 1.0\n[basis]\nn_vib = 3\n",
            0.4 * TAU
        )
    }

    #[test]
    fn minimal_single_atom() {
        let cfg = load_config(MINIMAL).unwrap();
        assert_eq!(cfg.n_atoms(), 1);
        assert!(cfg.laser.is_none());
        assert_eq!(cfg.quantized_atoms, vec![0]);
        assert_eq!(cfg.dipole, sigma_plus());
        assert_eq!(cfg.oscillation, [0.0, 0.0, 1.0]);
        assert_eq!(cfg.spread_ratio(), None);
    }

    #[test]
    fn two_atoms_spread_ratio() {
        let cfg = load_config(&pair(0.001)).unwrap();
        assert_relative_eq!(
            cfg.spread_ratio().unwrap(),
            0.001 / (0.8 * std::f64::consts::PI),
            max_relative = 1e-14
        );
    }

    #[test]
    fn spread_larger_than_separation_rejected() {
        let err = load_config(&pair(1.0)).unwrap_err();
        assert!(matches!(err, Error::Validation(_)), "{err}");
        assert!(load_config(&pair(0.3)).is_ok());
        let close = pair(0.2).replace(&format!("{}", 0.4 * TAU), "0.15");
        assert!(matches!(load_config(&close), Err(Error::Validation(_))));
    }

    #[test]
    fn n_vib_below_two_rejected() {
        let err = load_config(&MINIMAL.replace("n_vib = 5", "n_vib = 1")).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn unknown_key_names_the_key() {
        let err = load_config(&MINIMAL.replace("kappa", "kapa")).unwrap_err();
        assert!(matches!(err, Error::Parse(_)));
        assert!(err.to_string().contains("kapa"), "{err}");
    }

    #[test]
    fn non_finite_rejected() {
        let doc = MINIMAL.replace("kappa = 0.01", "kappa = nan");
        assert!(load_config(&doc).is_err());
        let doc = MINIMAL.replace("omega_t = 1", "omega_t = inf");
        assert!(load_config(&doc).is_err());
    }

    #[test]
    fn non_unit_dipole_rejected() {
        let doc = format!("{MINIMAL}");
        let doc = doc.replace("n_atoms = 1", "n_atoms = 1\ndipole = { re = [1.0, 1.0, 0.0], im = [0.0, 0.0, 0.0] }");
        assert!(matches!(load_config(&doc), Err(Error::Validation(_))));
    }

    #[test]
    fn overrides_apply_dotted_keys() {
        let cfg = load_config_with_overrides(
            MINIMAL,
            &[
                ("trap.kappa".into(), "0.02".into()),
                ("laser.rabi".into(), "0.1".into()),
                ("system.oscillation".into(), "x".into()),
            ],
        )
        .unwrap();
        assert_eq!(cfg.kappa, 0.02);
        assert_eq!(cfg.laser.as_ref().unwrap().rabi, 0.1);
        assert_eq!(cfg.oscillation, [1.0, 0.0, 0.0]);
    }

    #[test]
    fn round_trip_is_identical() {
        let cfg = load_config(&pair(0.001)).unwrap();
        let again = load_config(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
    }

    #[test]
    fn quantized_center() {
        let doc = "[trap]\nkappa = 0.01\nomega_t = 1\n[basis]\nn_vib = 2\nquantized = \"center\"\n\
                   [scenario]\ngeometry = \"array\"\nrows = 3\ncols = 3\nspacing = 0.8\n";
        let cfg = load_config(doc).unwrap();
        assert_eq!(cfg.n_atoms(), 9);
        assert_eq!(cfg.quantized_atoms, vec![4]);
    }

    #[test]
    fn level_spacing_in_recoil_units() {
        assert_relative_eq!(UnitSystem { kappa: 0.01 }.level_spacing(), 1e4, max_relative = 1e-12);
    }
}
