//! Fixture systems shared by the benchmarks.

use vibrecoil_core::scenarios::{ScenarioKind, Setup};
use vibrecoil_core::{load_config, SystemConfig};

fn kv(k: &str, v: &str) -> (String, String) {
    (k.to_string(), v.to_string())
}

/// Named systems of increasing dimension.
pub fn fixtures() -> Vec<(&'static str, SystemConfig)> {
    let pair = load_config(
        "[system]\npositions = [[0, 0, 0], [2.5, 0, 0]]\noscillation = \"x\"\n[trap]\nkappa = 0.01\nomega_t = 1.0\n[basis]\nn_vib = 3\n",
    )
    .expect("pair fixture");
    let square = Setup::new(
        ScenarioKind::DecaySweep,
        None,
        &[kv("scenario.geometry", "\"square\""), kv("scenario.spacing", "0.2"), kv("basis.n_vib", "3")],
    )
    .expect("square fixture")
    .config;
    let array = Setup::new(ScenarioKind::ArraySteady, None, &[]).expect("array fixture").config;
    vec![("pair_nvib3", pair), ("square_full_nvib3", square), ("array11x11_reduced", array)]
}
