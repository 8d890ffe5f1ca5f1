//! Atom arrangements from the `[scenario]` section. Spacings are given in
//! wavelengths and returned positions are in 1/k, centred on the origin.

use std::f64::consts::TAU;

use crate::config::{DirectionSpec, ScenarioSection, Vec3};
use crate::error::{Error, Result};

pub fn build(section: &ScenarioSection) -> Result<Vec<Vec3>> {
    let kind = section.geometry.as_deref().unwrap_or("line");
    let spacing = section
        .spacing
        .ok_or_else(|| Error::Validation("scenario.spacing is required with a geometry".into()))?;
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(Error::Validation(format!(
            "scenario.spacing must be finite and > 0 (got {spacing})"
        )));
    }
    let d = spacing * TAU;
    match kind {
        "line" => {
            let axis = section
                .axis
                .clone()
                .unwrap_or_else(|| DirectionSpec::Named("x".into()))
                .resolve("scenario.axis")?;
            Ok(line(section.count.unwrap_or(2), d, axis))
        }
        "square" => Ok(array(2, 2, d)),
        "array" => {
            let rows = section.rows.or(section.count).unwrap_or(3);
            let cols = section.cols.unwrap_or(rows);
            if rows == 0 || cols == 0 {
                return Err(Error::Validation("scenario.rows and cols must be >= 1".into()));
            }
            Ok(array(rows, cols, d))
        }
        other => Err(Error::Parse(format!(
            "scenario.geometry: expected line, square or array, got {other:?}"
        ))),
    }
}

/// `n` atoms along `axis`, spacing `d`.
pub fn line(n: usize, d: f64, axis: Vec3) -> Vec<Vec3> {
    let c = (n as f64 - 1.0) / 2.0;
    (0..n)
        .map(|i| {
            let s = (i as f64 - c) * d;
            [s * axis[0], s * axis[1], s * axis[2]]
        })
        .collect()
}

/// Square lattice in the xy plane, row-major (x fastest).
pub fn array(rows: usize, cols: usize, d: f64) -> Vec<Vec3> {
    let (cy, cx) = ((rows as f64 - 1.0) / 2.0, (cols as f64 - 1.0) / 2.0);
    let mut out = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            out.push([(c as f64 - cx) * d, (r as f64 - cy) * d, 0.0]);
        }
    }
    out
}
