use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use vibrecoil_core::scenarios::{self, Artifacts, ScenarioKind, Setup, SweepParam};
use vibrecoil_core::{Basis, Error, Result};

const THREADS_ENV: &str = "VIBRECOIL_THREADS";

#[derive(Parser)]
#[command(name = "vibrecoil", version, about = "Photon recoil of trapped atoms in collectively interacting dipole ensembles")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario.
    Run {
        /// single-decay, single-laser-sweep, two-atom-hop, decay-sweep, array-steady or modes
        scenario: String,
        #[command(flatten)]
        common: Common,
        /// Terms to keep, e.g. trap,laser,dd,jumpd,jumpx
        #[arg(long)]
        terms: Option<String>,
        /// Also write <name>.basis.csv (flat index, j, occupations).
        #[arg(long)]
        dump_basis: bool,
        /// Worker threads for sweep scenarios.
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Sweep one parameter of a scenario.
    Sweep {
        scenario: String,
        #[command(flatten)]
        common: Common,
        /// omega_t, d, omega or delta
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "log_range", required_unless_present = "log_range")]
        values: Option<String>,
        /// lo:hi:n, n log-spaced values from lo to hi.
        #[arg(long)]
        log_range: Option<String>,
        #[arg(long)]
        terms: Option<String>,
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Print the collective eigenmodes of a geometry as CSV.
    Modes {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML file overlaid on the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set trap.omega_t=10
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Directory for the CSV and summary files.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn setup(&self, kind: ScenarioKind, terms: Option<&str>) -> Result<Setup> {
        let user = match &self.config {
            Some(p) => Some(fs::read_to_string(p).map_err(|e| {
                Error::Argument(format!("cannot read config {}: {e}", p.display()))
            })?),
            None => None,
        };
        let mut overrides = self
            .set
            .iter()
            .map(|kv| {
                kv.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Error::Argument(format!("--set expects KEY=VALUE, got {kv:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(t) = terms {
            let quoted = serde_json::to_string(t).expect("string serializes");
            overrides.push(("scenario.terms".into(), quoted));
        }
        Setup::new(kind, user.as_deref(), &overrides)
    }

    fn out_dir(&self) -> &Path {
        self.out_dir.as_deref().unwrap_or(Path::new("."))
    }
}

fn threads(requested: Option<usize>) -> Result<usize> {
    let mut n = match requested {
        Some(0) => return Err(Error::Argument("--parallelism must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if let Ok(s) = std::env::var(THREADS_ENV) {
        let cap = s
            .trim()
            .parse::<usize>()
            .ok()
            .filter(|&c| c > 0)
            .ok_or_else(|| Error::Argument(format!("{THREADS_ENV} must be a positive integer, got {s:?}")))?;
        n = n.min(cap);
    }
    Ok(n)
}

fn parse_values(s: &str) -> Result<Vec<f64>> {
    let v = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| Error::Argument(format!("--values: {t:?} is not a number")))
        })
        .collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(Error::Argument("--values is empty".into()));
    }
    Ok(v)
}

fn log_range(s: &str) -> Result<Vec<f64>> {
    let bad = || Error::Argument(format!("--log-range expects lo:hi:n with 0 < lo and 0 < hi, got {s:?}"));
    let parts: Vec<&str> = s.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if !(lo > 0.0 && hi > 0.0 && lo.is_finite() && hi.is_finite()) || n == 0 {
        return Err(bad());
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect())
}

fn write(dir: &Path, name: &str, art: &Artifacts) -> Result<()> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{name}.csv"));
    let summary = dir.join(format!("{name}.summary.json"));
    fs::write(&csv, &art.csv)?;
    let mut json = serde_json::to_string_pretty(&art.summary).expect("summary serializes");
    json.push('\n');
    fs::write(&summary, json)?;
    println!("{}", csv.display());
    println!("{}", summary.display());
    if art.failed_points > 0 {
        eprintln!(
            "warning: {} of {} sweep points failed (see the error column)",
            art.failed_points, art.total_points
        );
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            common,
            terms,
            dump_basis,
            parallelism,
        } => {
            let kind = ScenarioKind::parse(&scenario)?;
            let setup = common.setup(kind, terms.as_deref())?;
            let n = threads(parallelism)?;
            if dump_basis {
                let basis = Basis::from_config(&setup.config)?;
                fs::create_dir_all(common.out_dir())?;
                let path = common.out_dir().join(format!("{}.basis.csv", kind.name()));
                fs::write(&path, basis.dump())?;
                println!("{}", path.display());
            }
            let art = scenarios::run(&setup, n)?;
            write(common.out_dir(), kind.name(), &art)
        }
        Command::Sweep {
            scenario,
            common,
            param,
            values,
            log_range: range,
            terms,
            parallelism,
        } => {
            let kind = ScenarioKind::parse(&scenario)?;
            let param = SweepParam::parse(&param)?;
            let values = match (values, range) {
                (Some(v), _) => parse_values(&v)?,
                (None, Some(r)) => log_range(&r)?,
                (None, None) => return Err(Error::Argument("give --values or --log-range".into())),
            };
            let setup = common.setup(kind, terms.as_deref())?;
            let art = scenarios::sweep(&setup, param, &values, threads(parallelism)?)?;
            write(common.out_dir(), &format!("{}.sweep-{}", kind.name(), param.name()), &art)
        }
        Command::Modes { common } => {
            let setup = common.setup(ScenarioKind::Modes, None)?;
            let art = scenarios::run(&setup, 1)?;
            if common.out_dir.is_some() {
                fs::create_dir_all(common.out_dir())?;
                let path = common.out_dir().join("modes.summary.json");
                fs::write(path, serde_json::to_string_pretty(&art.summary).expect("summary serializes"))?;
            }
            print!("{}", art.csv);
            Ok(())
        }
    }
}

fn report(e: &Error) {
    let mut err = json!({
        "kind": e.kind(),
        "exit_code": e.exit_code(),
        "message": e.to_string(),
    });
    match e {
        Error::Capacity { dim, required_bytes, cap_bytes } => {
            err["dim"] = json!(dim);
            err["required_bytes"] = json!(required_bytes);
            err["cap_bytes"] = json!(cap_bytes);
        }
        Error::Numerical { dump, .. } => err["dump"] = json!(dump),
        Error::Timeout { slowest_rate, .. } => err["slowest_rate"] = json!(slowest_rate),
        Error::NoConvergence { t_max, .. } => err["t_max"] = json!(t_max),
        _ => {}
    }
    eprintln!("{}", json!({ "error": err }));
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_range_endpoints() {
        let v = log_range("0.01:100:5").unwrap();
        assert_eq!(v.len(), 5);
        assert!((v[0] - 0.01).abs() < 1e-15 && (v[4] - 100.0).abs() < 1e-12);
        assert!((v[2] - 1.0).abs() < 1e-12);
        assert!(log_range("0:1:3").is_err());
        assert!(log_range("1:2").is_err());
        assert_eq!(log_range("3:9:1").unwrap(), vec![3.0]);
    }

    #[test]
    fn values_list() {
        assert_eq!(parse_values("1, 2.5,-3").unwrap(), vec![1.0, 2.5, -3.0]);
        assert!(matches!(parse_values(""), Err(Error::Argument(_))));
        assert!(matches!(parse_values(" , "), Err(Error::Argument(_))));
        assert!(parse_values("1,x").is_err());
    }
}
