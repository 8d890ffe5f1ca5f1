//! CSV tables and the JSON summary.

use serde_json::{json, Value};

use super::{DirectionResult, ScenarioKind, SweepParam, SweepRow};
use crate::config::SystemConfig;
use crate::dynamics::{coherent, decoherent, PointOutcome, Sample, TermValues};
use crate::error::{Error, Result};
use crate::greens::CollectiveModes;
use crate::liouvillian::Term;

pub const SCHEMA_VERSION: &str = "1.0.0";
pub const CSV_SCHEMA: &str = "vibrecoil-csv/1";

/// JSON Schema of the summary document.
pub const SUMMARY_SCHEMA: &str = include_str!("../../../../schema/summary.schema.json");

pub const NORMALIZATION: &str = "energy per scattered photon = (dE_j/dt) / (Gamma * P_j); \
steady-state energy rates exclude work on the mean displacement";

const UNITS: &str = "t in 1/Gamma; E in E_r; p in hbar*k; rates per 1/Gamma";

fn header(kind: ScenarioKind, cfg: &SystemConfig, extra: &[String]) -> String {
    let mut h = format!(
        "# vibrecoil {}\n# schema: {CSV_SCHEMA}\n# scenario: {}\n# config_hash: {}\n# units: {UNITS}\n# normalization: {NORMALIZATION}\n",
        env!("CARGO_PKG_VERSION"),
        kind.name(),
        cfg.hash()
    );
    h += &format!("# kappa: {}\n# omega_t: {}\n# n_vib: {}\n", cfg.kappa, cfg.omega_t, cfg.n_vib);
    if let Some(l) = &cfg.laser {
        h += &format!(
            "# laser: rabi = {}, detuning = {}, direction = {:?}\n",
            l.rabi, l.detuning, l.direction
        );
    }
    for line in extra {
        h += &format!("# {line}\n");
    }
    h
}

fn finish(kind: ScenarioKind, cfg: &SystemConfig, extra: &[String], w: csv::Writer<Vec<u8>>) -> Result<String> {
    let body = w
        .into_inner()
        .map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
    let body = String::from_utf8(body).expect("csv output is utf-8");
    Ok(header(kind, cfg, extra) + &body)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e.to_string()))
}

fn num(x: f64) -> String {
    format!("{x:e}")
}

/// One row per sample: vibrational energy change since t = 0, momentum,
/// excitation probabilities and the per-category energy transfer.
pub(super) fn time_series_csv(kind: ScenarioKind, cfg: &SystemConfig, results: &[DirectionResult]) -> Result<String> {
    let atoms = results
        .first()
        .map(|r| r.outcome.series().atoms.clone())
        .unwrap_or_default();
    let dirs: Vec<&str> = results.iter().map(|r| r.direction.as_str()).collect();
    let per = |prefix: &str| -> Vec<String> {
        dirs.iter()
            .flat_map(|d| atoms.iter().map(move |a| format!("{prefix}_{d}_{a}")))
            .collect()
    };
    let mut cols = vec!["t_gamma".to_string()];
    cols.extend(per("E"));
    cols.extend(per("p"));
    cols.extend((0..cfg.n_atoms()).map(|j| format!("P_exc_{j}")));
    cols.extend(per("E_coh"));
    cols.extend(per("E_decoh"));
    cols.push("trunc_pop".into());

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&cols).map_err(csv_err)?;
    let rows = results
        .iter()
        .map(|r| r.outcome.series().samples.len())
        .max()
        .unwrap_or(0);
    let blank = || vec![String::new(); atoms.len()];
    for i in 0..rows {
        let t = results.iter().find_map(|r| at(r, i)).map(|s| s.t).unwrap_or(f64::NAN);
        let mut rec = vec![num(t)];
        let field = |f: &dyn Fn(&DirectionResult, &Sample, usize) -> f64| -> Vec<String> {
            results
                .iter()
                .flat_map(|r| match at(r, i) {
                    Some(s) => (0..atoms.len()).map(|q| num(f(r, s, q))).collect(),
                    None => blank(),
                })
                .collect()
        };
        rec.extend(field(&|_, s, q| s.energy_change[q]));
        rec.extend(field(&|_, s, q| s.momentum[q]));
        match results.first().and_then(|r| at(r, i)) {
            Some(s) => rec.extend(s.excitation.iter().map(|&p| num(p))),
            None => rec.extend(vec![String::new(); cfg.n_atoms()]),
        }
        rec.extend(field(&|_, s, q| s.coherent(q)));
        rec.extend(field(&|_, s, q| s.decoherent(q)));
        let trunc = results
            .iter()
            .filter_map(|r| at(r, i))
            .map(|s| s.truncation)
            .fold(0.0, f64::max);
        rec.push(num(trunc));
        w.write_record(&rec).map_err(csv_err)?;
    }
    let extra = [format!("directions: {}", dirs.join(",")), "E columns: change since t = 0".into()];
    finish(kind, cfg, &extra, w)
}

fn at(r: &DirectionResult, i: usize) -> Option<&Sample> {
    r.outcome.series().samples.get(i)
}

fn term_cols(prefix: &str, d: &str, a: usize) -> Vec<String> {
    Term::ALL
        .iter()
        .filter(|&&t| t != Term::Trap)
        .map(|t| format!("{prefix}_{}_{d}_{a}", t.name()))
        .collect()
}

fn term_vals(v: &TermValues) -> Vec<String> {
    Term::ALL
        .iter()
        .filter(|&&t| t != Term::Trap)
        .map(|&t| num(v[t as usize]))
        .collect()
}

/// Per-point table. Decay points report the total energy change and its
/// split; steady points report energy per photon and rates.
pub(super) fn sweep_csv(kind: ScenarioKind, cfg: &SystemConfig, param: SweepParam, rows: &[SweepRow]) -> Result<String> {
    let template = rows.iter().find_map(|r| r.outcome.as_ref().ok()).expect("one point succeeded");
    let dirs: Vec<&str> = template.iter().map(|r| r.direction.as_str()).collect();
    let atoms = template[0].outcome.series().atoms.clone();
    let steady = matches!(template[0].outcome, PointOutcome::Steady(_));

    let mut cols = vec![param.name().to_string()];
    for d in &dirs {
        for &a in &atoms {
            if steady {
                cols.push(format!("epp_{d}_{a}"));
                cols.extend(term_cols("epp", d, a));
                cols.push(format!("epp_coh_{d}_{a}"));
                cols.push(format!("epp_decoh_{d}_{a}"));
                cols.push(format!("dEdt_{d}_{a}"));
                cols.push(format!("dpdt_{d}_{a}"));
            } else {
                cols.push(format!("dE_{d}_{a}"));
                cols.extend(term_cols("dE", d, a));
                cols.push(format!("dE_coh_{d}_{a}"));
                cols.push(format!("dE_decoh_{d}_{a}"));
                cols.push(format!("dp_{d}_{a}"));
            }
        }
    }
    if steady {
        cols.extend((0..cfg.n_atoms()).map(|j| format!("P_exc_{j}")));
    } else {
        cols.push("residual_exc".into());
    }
    cols.push("trunc_pop".into());
    cols.push("error".into());

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&cols).map_err(csv_err)?;
    for row in rows {
        let mut rec = vec![num(row.value)];
        match &row.outcome {
            Ok(res) => {
                for r in res {
                    for q in 0..atoms.len() {
                        rec.extend(point_cells(&r.outcome, q));
                    }
                }
                match &res[0].outcome {
                    PointOutcome::Steady(o) => rec.extend(o.excitation.iter().map(|&p| num(p))),
                    _ => {
                        let resid = res
                            .iter()
                            .map(|r| match &r.outcome {
                                PointOutcome::Decay(o) => o.residual_excitation,
                                PointOutcome::Evolve(o) => o.excitation.iter().sum(),
                                PointOutcome::Steady(_) => f64::NAN,
                            })
                            .fold(0.0, f64::max);
                        rec.push(num(resid));
                    }
                }
                let trunc = res
                    .iter()
                    .map(|r| r.outcome.monitors().max_truncation)
                    .fold(0.0, f64::max);
                rec.push(num(trunc));
                rec.push(String::new());
            }
            Err(e) => {
                rec.resize(cols.len() - 1, String::new());
                rec.push(format!("{}: {e}", e.kind()));
            }
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    let extra = [
        format!("sweep: {} ({})", param.name(), param.key()),
        format!("directions: {}", dirs.join(",")),
    ];
    finish(kind, cfg, &extra, w)
}

fn point_cells(o: &PointOutcome, q: usize) -> Vec<String> {
    let mut c = Vec::new();
    match o {
        PointOutcome::Steady(s) => {
            c.push(num(s.energy_per_photon[q]));
            c.extend(term_vals(&s.term_per_photon[q]));
            c.push(num(s.coherent_per_photon(q)));
            c.push(num(s.decoherent_per_photon(q)));
            c.push(num(s.energy_rate[q]));
            c.push(num(s.momentum_rate[q]));
        }
        PointOutcome::Decay(d) => {
            c.push(num(d.delta_energy[q]));
            c.extend(term_vals(&d.term_energy[q]));
            c.push(num(coherent(&d.term_energy[q])));
            c.push(num(decoherent(&d.term_energy[q])));
            c.push(num(d.delta_momentum[q]));
        }
        PointOutcome::Evolve(e) => {
            c.push(num(e.delta_energy[q]));
            c.extend(term_vals(&e.term_energy[q]));
            c.push(num(coherent(&e.term_energy[q])));
            c.push(num(decoherent(&e.term_energy[q])));
            c.push(num(e.delta_momentum[q]));
        }
    }
    c
}

pub(super) fn modes_csv(kind: ScenarioKind, cfg: &SystemConfig, m: &CollectiveModes) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["mode_index", "re_lambda", "im_lambda", "decay_rate_over_gamma"])
        .map_err(csv_err)?;
    for (k, (l, r)) in m.eigenvalues.iter().zip(&m.decay_rates).enumerate() {
        w.write_record([k.to_string(), num(l.re), num(l.im), num(*r)])
            .map_err(csv_err)?;
    }
    finish(kind, cfg, &[], w)
}

/// Main per-atom numbers of a run, keyed by direction.
pub(super) fn headline(results: &[DirectionResult]) -> Value {
    let mut out = serde_json::Map::new();
    for r in results {
        let v = match &r.outcome {
            PointOutcome::Steady(s) => json!({
                "atoms": s.atoms,
                "energy_per_photon": s.energy_per_photon,
                "energy_rate": s.energy_rate,
                "momentum_rate": s.momentum_rate,
            }),
            PointOutcome::Decay(d) => json!({
                "atoms": d.atoms,
                "delta_energy": d.delta_energy,
                "delta_momentum": d.delta_momentum,
            }),
            PointOutcome::Evolve(e) => json!({
                "atoms": e.atoms,
                "delta_energy": e.delta_energy,
                "delta_momentum": e.delta_momentum,
            }),
        };
        out.insert(r.direction.clone(), v);
    }
    Value::Object(out)
}

pub(super) fn summary(kind: ScenarioKind, cfg: &SystemConfig, mode: &str, wall_time: f64, extra: Value) -> Value {
    let mut s = json!({
        "schema_version": SCHEMA_VERSION,
        "version": env!("CARGO_PKG_VERSION"),
        "scenario": kind.name(),
        "mode": mode,
        "config_hash": cfg.hash(),
        "config": cfg.to_toml_string(),
        "units": UNITS,
        "normalization": NORMALIZATION,
        "wall_time_s": wall_time,
    });
    if let (Value::Object(s), Value::Object(e)) = (&mut s, extra) {
        s.extend(e);
    }
    s
}
