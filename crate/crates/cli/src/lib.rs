//! Scenario runner: JSON configs in, JSON reports and CSV grids out.

pub mod config;
pub mod report;
pub mod scenarios;
pub mod schema;

use std::path::{Path, PathBuf};
use std::time::Instant;

use hforge_core::Error;
use serde_json::json;

pub use config::{parse, Diagnostic, ScenarioConfig};
pub use report::{Outcome, RunReport};

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Passed = 0,
    Usage = 1,
    AssertionFailed = 2,
}

/// Errors that mean the physics check failed rather than the request being malformed.
fn is_check_failure(e: &Error) -> bool {
    matches!(e, Error::Leakage { .. } | Error::NotCyclic { .. } | Error::Unitarity { .. } | Error::Cyclicity(_))
}

/// Paths written by a run with output stem `stem`.
pub fn output_paths(stem: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let with = |suffix: &str| {
        let mut s = stem.as_os_str().to_owned();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".report.json"), with(".csv"), with(".timings.json"))
}

/// Executes `cfg` and writes its report (plus CSV for sweeps) next to `stem`.
pub fn run(cfg: &ScenarioConfig, stem: &Path, threads: usize) -> Result<Status, String> {
    let start = Instant::now();
    let outcome = match scenarios::execute(cfg) {
        Ok(o) => o,
        Err(e) if is_check_failure(&e) => Outcome {
            results: json!({ "error": e.to_string() }),
            assertions: vec![report::Assertion { name: "execution".into(), value: None, relation: "ok", bound: 0.0, pass: false }],
            grid: None,
        },
        Err(e) => return Err(format!("{}: {e}", cfg.builder)),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let (report_path, csv_path, timings_path) = output_paths(stem);
    let csv = outcome.grid.as_ref().map(|_| csv_path.as_path());
    if let Some(g) = &outcome.grid {
        g.write_csv(&csv_path).map_err(|e| format!("{}: {e}", csv_path.display()))?;
    }
    let report = RunReport::new(cfg, &outcome, &timings_path, csv);
    report.write(&report_path).map_err(|e| format!("{}: {e}", report_path.display()))?;
    let timings = json!({ "wall_seconds": elapsed, "threads": threads });
    std::fs::write(&timings_path, serde_json::to_string_pretty(&timings).unwrap() + "\n").map_err(|e| format!("{}: {e}", timings_path.display()))?;
    Ok(if report.passed { Status::Passed } else { Status::AssertionFailed })
}
