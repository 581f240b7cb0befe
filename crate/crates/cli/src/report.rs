//! Run reports and sweep grids.

use std::io::Write;
use std::path::Path;

use hforge_core::qcore::{ComplexOperator, C64};
use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::ScenarioConfig;

/// Complex number as `[re, im]`.
pub fn cpx(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Row-major matrix of `[re, im]` pairs.
pub fn mat(m: &ComplexOperator) -> Value {
    let data: Vec<Value> = (0..m.nrows()).flat_map(|i| (0..m.ncols()).map(move |j| (i, j))).map(|(i, j)| cpx(m[(i, j)])).collect();
    json!({ "rows": m.nrows(), "cols": m.ncols(), "data": data })
}

pub fn real_rows(m: &DMatrix<f64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| json!(m.row(i).iter().collect::<Vec<_>>())).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Assertion {
    pub name: String,
    /// null when the measured value is not finite
    pub value: Option<f64>,
    pub relation: &'static str,
    pub bound: f64,
    pub pass: bool,
}

impl Assertion {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: value.is_finite().then_some(value), relation: "<=", bound, pass: value <= bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: value.is_finite().then_some(value), relation: ">=", bound, pass: value >= bound }
    }

    pub fn equals(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value: value.is_finite().then_some(value), relation: "==", bound, pass: value == bound }
    }
}

/// Fidelity grid written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub delta1: Vec<f64>,
    pub delta2: Vec<f64>,
    /// fidelity[i][j] at (delta1[i], delta2[j])
    pub fidelity: Vec<Vec<f64>>,
}

impl Grid {
    pub const HEADER: [&'static str; 3] = ["delta1", "delta2", "fidelity"];

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(Self::HEADER)?;
        for (i, d1) in self.delta1.iter().enumerate() {
            for (j, d2) in self.delta2.iter().enumerate() {
                w.write_record([d1.to_string(), d2.to_string(), self.fidelity[i][j].to_string()])?;
            }
        }
        w.flush()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub grid: Option<Grid>,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: Value,
    pub units: Value,
    pub inputs: Value,
    pub results: Value,
    pub assertions: Vec<Assertion>,
    pub passed: bool,
    /// Sidecar holding wall-clock timings, which are kept out of the report so that identical
    /// inputs give byte-identical reports.
    pub timings_file: String,
    pub csv_file: Option<String>,
}

pub fn file_name(path: &Path) -> String {
    path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default()
}

impl RunReport {
    pub fn new(cfg: &ScenarioConfig, outcome: &Outcome, timings: &Path, csv: Option<&Path>) -> Self {
        let tolerances: serde_json::Map<String, Value> = cfg.tolerances.entries().into_iter().map(|(k, v)| (k.to_string(), json!(v))).collect();
        let overrides: Vec<Value> = cfg.tolerance_overrides.iter().map(|(k, v)| json!([k, v])).collect();
        Self {
            tool: json!({ "name": "hforge", "version": env!("CARGO_PKG_VERSION") }),
            units: json!({
                "hbar": 1,
                "angles": "radians",
                "frequencies": "angular, radians per time unit",
                "complex": "[re, im]",
                "matrices": "row-major",
            }),
            inputs: json!({
                "kind": cfg.kind.name(),
                "builder": cfg.builder,
                "parameters": cfg.parameters.to_json(),
                "seed": cfg.seed,
                "output": cfg.output,
                "tolerances": tolerances,
                "tolerance_overrides": overrides,
            }),
            results: outcome.results.clone(),
            assertions: outcome.assertions.clone(),
            passed: outcome.assertions.iter().all(|a| a.pass),
            timings_file: file_name(timings),
            csv_file: csv.map(file_name),
        }
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut f = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut f, self)?;
        f.write_all(b"\n")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use hforge_core::qcore::{c, hadamard};

    #[test]
    fn matrices_are_row_major_pairs() {
        let v = mat(&hadamard());
        assert_eq!(v["rows"], 2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(v["data"][2], json!([s, 0.0]));
        assert_eq!(v["data"][3], json!([-s, 0.0]));
        assert_eq!(cpx(c(1.0, -2.0)), json!([1.0, -2.0]));
    }

    #[test]
    fn non_finite_values_fail_and_serialize_as_null() {
        let a = Assertion::at_most("x", f64::NAN, 1.0);
        assert!(!a.pass);
        assert_eq!(serde_json::to_value(&a).unwrap()["value"], Value::Null);
    }
}
