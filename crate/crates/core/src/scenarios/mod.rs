//! Named experiments: default configurations, runs over oscillation
//! directions, parameter sweeps, and their CSV and JSON artifacts.

pub mod geometry;
mod output;

use std::f64::consts::PI;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

pub use output::{CSV_SCHEMA, NORMALIZATION, SCHEMA_VERSION, SUMMARY_SCHEMA};

use crate::config::{self, axis, from_table, SystemConfig, Vec3};
use crate::dynamics::{run_point, PointOutcome, Protocol};
use crate::error::{Error, Result};
use crate::greens::{collective_modes, greens, CollectiveModes};
use crate::hilbert::Excitation;

/// Largest atom count for which every atom may carry vibrational states in
/// the array scenario.
pub const FULL_BASIS_MAX_ATOMS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioKind {
    SingleDecay,
    SingleLaserSweep,
    TwoAtomHop,
    DecaySweep,
    ArraySteady,
    Modes,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::SingleDecay,
        ScenarioKind::SingleLaserSweep,
        ScenarioKind::TwoAtomHop,
        ScenarioKind::DecaySweep,
        ScenarioKind::ArraySteady,
        ScenarioKind::Modes,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::SingleDecay => "single-decay",
            ScenarioKind::SingleLaserSweep => "single-laser-sweep",
            ScenarioKind::TwoAtomHop => "two-atom-hop",
            ScenarioKind::DecaySweep => "decay-sweep",
            ScenarioKind::ArraySteady => "array-steady",
            ScenarioKind::Modes => "modes",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            let names: Vec<_> = Self::ALL.iter().map(|k| k.name()).collect();
            Error::Argument(format!("unknown scenario {s:?}; expected one of {}", names.join(", ")))
        })
    }

    /// Built-in configuration document, overlaid by user input.
    pub fn defaults(self) -> &'static str {
        match self {
            ScenarioKind::SingleDecay => SINGLE_DECAY,
            ScenarioKind::SingleLaserSweep => SINGLE_LASER_SWEEP,
            ScenarioKind::TwoAtomHop => TWO_ATOM_HOP,
            ScenarioKind::DecaySweep => DECAY_SWEEP,
            ScenarioKind::ArraySteady => ARRAY_STEADY,
            ScenarioKind::Modes => MODES,
        }
    }

    /// Scenarios whose plain `run` is a parameter sweep.
    pub fn is_sweep(self) -> bool {
        matches!(self, ScenarioKind::SingleLaserSweep | ScenarioKind::DecaySweep)
    }

    fn driven(self) -> bool {
        matches!(self, ScenarioKind::SingleLaserSweep | ScenarioKind::ArraySteady)
    }
}

impl fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

const SINGLE_DECAY: &str = r#"
[system]
oscillation = "z"
[trap]
kappa = 0.01
omega_t = 1.0
[basis]
n_vib = 5
[scenario]
name = "single-decay"
initial = "excited:0"
directions = ["x", "y", "z"]
"#;

const SINGLE_LASER_SWEEP: &str = r#"
[system]
oscillation = "z"
[trap]
kappa = 0.01
omega_t = 1.0
[basis]
n_vib = 5
[laser]
rabi = 0.1
detuning = 0.0
direction = "z"
[scenario]
name = "single-laser-sweep"
directions = ["z"]
param = "omega_t"
values = [0.01, 0.016237767391887217, 0.026366508987303583, 0.04281332398719394, 0.06951927961775606, 0.11288378916846889, 0.18329807108324356, 0.29763514416313175, 0.4832930238571752, 0.7847599703514611, 1.2742749857031335, 2.06913808111479, 3.359818286283781, 5.455594781168519, 8.858667904100823, 14.38449888287663, 23.357214690901213, 37.92690190732246, 61.584821106602604, 100.0]
"#;

const TWO_ATOM_HOP: &str = r#"
[system]
oscillation = "x"
[trap]
kappa = 1e-5
omega_t = 1.0
[basis]
n_vib = 3
[integrator]
sample_interval = 2.5e-4
[scenario]
name = "two-atom-hop"
geometry = "line"
count = 2
spacing = 0.02
axis = "x"
initial = "excited:0"
cycles = 4.0
"#;

const DECAY_SWEEP: &str = r#"
[trap]
kappa = 0.001
omega_t = 1.0
[basis]
n_vib = 2
[scenario]
name = "decay-sweep"
geometry = "line"
count = 2
spacing = 0.4
axis = "x"
initial = "uniform"
directions = ["x", "z"]
param = "omega_t"
values = [0.01, 0.03162277660168379, 0.1, 0.31622776601683794, 1.0, 3.1622776601683795, 10.0, 31.622776601683793, 100.0]
"#;

const ARRAY_STEADY: &str = r#"
[trap]
kappa = 0.01
omega_t = 1.0
[basis]
n_vib = 3
quantized = "center"
[laser]
rabi = 0.01
detuning = 0.0
direction = "z"
[scenario]
name = "array-steady"
geometry = "array"
rows = 11
spacing = 0.8
directions = ["x", "z"]
"#;

const MODES: &str = r#"
[trap]
kappa = 0.001
omega_t = 1.0
[basis]
n_vib = 2
[scenario]
name = "modes"
geometry = "line"
count = 3
spacing = 0.4
axis = "x"
"#;

/// Parameters a sweep can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    OmegaT,
    Spacing,
    Rabi,
    Detuning,
}

impl SweepParam {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "omega_t" => Ok(SweepParam::OmegaT),
            "d" => Ok(SweepParam::Spacing),
            "omega" => Ok(SweepParam::Rabi),
            "delta" => Ok(SweepParam::Detuning),
            other => Err(Error::Argument(format!(
                "unknown sweep parameter {other:?}; expected omega_t, d, omega or delta"
            ))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepParam::OmegaT => "omega_t",
            SweepParam::Spacing => "d",
            SweepParam::Rabi => "omega",
            SweepParam::Detuning => "delta",
        }
    }

    /// Config key the parameter overrides.
    pub fn key(self) -> &'static str {
        match self {
            SweepParam::OmegaT => "trap.omega_t",
            SweepParam::Spacing => "scenario.spacing",
            SweepParam::Rabi => "laser.rabi",
            SweepParam::Detuning => "laser.detuning",
        }
    }
}

/// A scenario bound to its resolved configuration.
#[derive(Debug, Clone)]
pub struct Setup {
    pub kind: ScenarioKind,
    table: toml::Table,
    pub config: SystemConfig,
}

impl Setup {
    /// Scenario defaults, overlaid by the `user` document, then by dotted-key overrides.
    pub fn new(kind: ScenarioKind, user: Option<&str>, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = kind.defaults().parse().expect("built-in defaults parse");
        if let Some(src) = user {
            let doc: toml::Table = src
                .parse()
                .map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
            merge(&mut table, doc);
        }
        for (k, v) in overrides {
            config::apply_override(&mut table, k, v)?;
        }
        let config = resolve(kind, table.clone())?;
        Ok(Setup { kind, table, config })
    }

    /// Configuration with one parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<SystemConfig> {
        if param == SweepParam::Spacing && self.config.scenario.geometry.is_none() {
            return Err(Error::Validation(
                "sweeping d needs scenario.geometry (positions were given explicitly)".into(),
            ));
        }
        if matches!(param, SweepParam::Rabi | SweepParam::Detuning) && self.config.laser.is_none() {
            return Err(Error::Validation(format!(
                "sweeping {} needs a [laser] section",
                param.name()
            )));
        }
        let mut t = self.table.clone();
        config::apply_override(&mut t, param.key(), &format!("{value:e}"))?;
        resolve(self.kind, t)
    }

    /// The sweep parameter and values configured for the scenario.
    pub fn default_sweep(&self) -> Result<(SweepParam, Vec<f64>)> {
        let s = &self.config.scenario;
        let param = SweepParam::parse(s.param.as_deref().unwrap_or("omega_t"))?;
        let values = s
            .values
            .clone()
            .ok_or_else(|| Error::Validation("scenario.values is required for a sweep".into()))?;
        Ok((param, values))
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn resolve(kind: ScenarioKind, table: toml::Table) -> Result<SystemConfig> {
    let cfg = from_table(table)?;
    if kind == ScenarioKind::Modes {
        return Ok(cfg);
    }
    if kind.driven() && cfg.laser.is_none() {
        return Err(Error::Validation(format!("{kind} needs a [laser] section")));
    }
    if !kind.driven() && cfg.laser.is_some() {
        return Err(Error::Validation(format!(
            "{kind} is an undriven decay; remove the [laser] section"
        )));
    }
    let n = cfg.n_atoms();
    if kind == ScenarioKind::ArraySteady && n > FULL_BASIS_MAX_ATOMS && cfg.quantized_atoms.len() > 1 {
        return Err(Error::Validation(format!(
            "{n} atoms with {} quantized would need a basis of {}^{} vibrational states; \
             use basis.quantized = \"center\" (one quantized atom) for arrays above {FULL_BASIS_MAX_ATOMS} atoms",
            cfg.quantized_atoms.len(),
            cfg.n_vib,
            cfg.quantized_atoms.len()
        )));
    }
    if kind == ScenarioKind::TwoAtomHop && n < 2 {
        return Err(Error::Validation("two-atom-hop needs at least two atoms".into()));
    }
    directions(&cfg)?;
    Ok(cfg)
}

/// Oscillation directions to run, with their labels.
pub fn directions(cfg: &SystemConfig) -> Result<Vec<(String, Vec3)>> {
    match &cfg.scenario.directions {
        Some(list) if list.is_empty() => {
            Err(Error::Validation("scenario.directions must not be empty".into()))
        }
        Some(list) => list
            .iter()
            .map(|d| {
                axis(d).map(|v| (d.clone(), v)).ok_or_else(|| {
                    Error::Validation(format!("scenario.directions: unknown axis {d:?}"))
                })
            })
            .collect(),
        None => Ok(vec![(config::axis_label(&cfg.oscillation), cfg.oscillation)]),
    }
}

/// Exchange period π/|Im g| of the first pair.
pub fn exchange_period(cfg: &SystemConfig) -> Result<f64> {
    let (a, b) = (&cfg.positions[0], &cfg.positions[1]);
    let g = greens(&[a[0] - b[0], a[1] - b[1], a[2] - b[2]], &cfg.dipole)?;
    Ok(PI / g.im.abs())
}

pub fn protocol(kind: ScenarioKind, cfg: &SystemConfig) -> Result<Protocol> {
    let s = &cfg.scenario;
    let initial = Excitation::parse(s.initial.as_deref().unwrap_or("excited:0"))?;
    let vib = s.vib_initial.clone();
    Ok(match kind {
        ScenarioKind::SingleDecay | ScenarioKind::DecaySweep => Protocol::Decay { initial, vib },
        ScenarioKind::SingleLaserSweep | ScenarioKind::ArraySteady => Protocol::Steady { vib },
        ScenarioKind::TwoAtomHop => {
            let t_end = match cfg.integrator.t_end {
                Some(t) => t,
                None => s.cycles.unwrap_or(4.0) * exchange_period(cfg)?,
            };
            Protocol::Evolve { initial, vib, t_end }
        }
        ScenarioKind::Modes => {
            return Err(Error::Argument("the modes scenario has no dynamics".into()))
        }
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DirectionResult {
    pub direction: String,
    pub outcome: PointOutcome,
}

/// Runs the scenario's protocol once per oscillation direction.
pub fn run_directions(kind: ScenarioKind, cfg: &SystemConfig) -> Result<Vec<DirectionResult>> {
    let protocol = protocol(kind, cfg)?;
    directions(cfg)?
        .into_iter()
        .map(|(label, v)| {
            let mut c = cfg.clone();
            c.oscillation = v;
            log::info!("{kind}: direction {label}");
            Ok(DirectionResult {
                direction: label,
                outcome: run_point(&c, &protocol)?,
            })
        })
        .collect()
}

/// Files produced by a run or a sweep.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub name: String,
    pub csv: String,
    pub summary: Value,
    pub failed_points: usize,
    pub total_points: usize,
}

/// Runs a scenario with its default settings (sweep scenarios sweep their
/// configured values on `threads` workers).
pub fn run(setup: &Setup, threads: usize) -> Result<Artifacts> {
    let kind = setup.kind;
    if kind.is_sweep() {
        let (param, values) = setup.default_sweep()?;
        return sweep(setup, param, &values, threads);
    }
    let start = Instant::now();
    let cfg = &setup.config;
    if kind == ScenarioKind::Modes {
        let modes = collective_modes(&cfg.positions, &cfg.dipole)?;
        let csv = output::modes_csv(kind, cfg, &modes)?;
        let summary = output::summary(
            kind,
            cfg,
            "run",
            start.elapsed().as_secs_f64(),
            json!({ "modes": modes_json(&modes) }),
        );
        return Ok(Artifacts {
            name: kind.name().into(),
            csv,
            summary,
            failed_points: 0,
            total_points: 1,
        });
    }
    let results = run_directions(kind, cfg)?;
    let csv = output::time_series_csv(kind, cfg, &results)?;
    let mut extra = json!({
        "directions": directions(cfg)?.into_iter().map(|d| d.0).collect::<Vec<_>>(),
        "headline": output::headline(&results),
        "results": results,
    });
    match kind {
        ScenarioKind::TwoAtomHop => {
            extra["exchange_period"] = json!(exchange_period(cfg)?);
        }
        ScenarioKind::ArraySteady => {
            extra["center_atom"] = json!(config::center_atom(&cfg.positions));
        }
        _ => {}
    }
    let summary = output::summary(kind, cfg, "run", start.elapsed().as_secs_f64(), extra);
    Ok(Artifacts {
        name: kind.name().into(),
        csv,
        summary,
        failed_points: 0,
        total_points: 1,
    })
}

fn modes_json(m: &CollectiveModes) -> Value {
    (0..m.eigenvalues.len())
        .map(|k| {
            json!({
                "index": k,
                "re_lambda": m.eigenvalues[k].re,
                "im_lambda": m.eigenvalues[k].im,
                "decay_rate_over_gamma": m.decay_rates[k],
            })
        })
        .collect()
}

/// One parameter value of a sweep.
#[derive(Debug)]
pub struct SweepRow {
    pub value: f64,
    pub outcome: Result<Vec<DirectionResult>>,
}

/// Evaluates `values` concurrently on at most `threads` workers. Rows come
/// back sorted by value; per-point failures are kept in the rows.
pub fn sweep_rows(setup: &Setup, param: SweepParam, values: &[f64], threads: usize) -> Result<Vec<SweepRow>> {
    if setup.kind == ScenarioKind::Modes {
        return Err(Error::Argument("the modes scenario cannot be swept".into()));
    }
    if values.is_empty() {
        return Err(Error::Argument("sweep needs at least one value".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Argument(format!("sweep value {v} is not finite")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| Error::Argument(format!("thread pool: {e}")))?;
    let kind = setup.kind;
    Ok(pool.install(|| {
        sorted
            .par_iter()
            .map(|&value| SweepRow {
                value,
                outcome: setup
                    .with_param(param, value)
                    .and_then(|c| run_directions(kind, &c)),
            })
            .collect()
    }))
}

pub fn sweep(setup: &Setup, param: SweepParam, values: &[f64], threads: usize) -> Result<Artifacts> {
    let start = Instant::now();
    let rows = sweep_rows(setup, param, values, threads)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    if failed == rows.len() {
        let first = rows.into_iter().next().expect("non-empty sweep");
        return Err(first.outcome.err().expect("all points failed"));
    }
    let cfg = &setup.config;
    let csv = output::sweep_csv(setup.kind, cfg, param, &rows)?;
    let points: Vec<Value> = rows
        .iter()
        .map(|r| match &r.outcome {
            Ok(res) => json!({ "value": r.value, "headline": output::headline(res), "results": res, "error": null }),
            Err(e) => json!({ "value": r.value, "results": null, "error": { "kind": e.kind(), "message": e.to_string() } }),
        })
        .collect();
    let extra = json!({
        "directions": directions(cfg)?.into_iter().map(|d| d.0).collect::<Vec<_>>(),
        "param": param.name(),
        "points": points,
    });
    let summary = output::summary(setup.kind, cfg, "sweep", start.elapsed().as_secs_f64(), extra);
    Ok(Artifacts {
        name: setup.kind.name().into(),
        csv,
        summary,
        failed_points: failed,
        total_points: rows.len(),
    })
}
