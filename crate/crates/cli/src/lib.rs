//! Problem-file driver for the `resdiv` library.

use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

pub mod builtins;
pub mod problem;
mod tasks;

pub use problem::{parse, ProblemFile};

/// Schema or content error at a JSON pointer into the problem file.
#[derive(Clone, Debug, Error, PartialEq)]
#[error("{pointer}: {message}")]
pub struct InputError {
    pub pointer: String,
    pub message: String,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum RunError {
    #[error("input error at {0}")]
    Input(#[from] InputError),
    #[error("numeric abort in {context}: {message}")]
    Numeric { context: String, message: String },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) => 2,
            RunError::Numeric { .. } => 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `"<="` or `">="`; booleans are encoded as `value <= 0`.
    pub relation: &'static str,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, relation: "<=", tolerance, pass: value <= tolerance }
    }

    pub fn at_least(name: &str, value: f64, tolerance: f64) -> Self {
        Check { name: name.into(), value, relation: ">=", tolerance, pass: value >= tolerance }
    }

    pub fn holds(name: &str, ok: bool) -> Self {
        Check::at_most(name, if ok { 0.0 } else { 1.0 }, 0.0)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub version: &'static str,
    pub problem: ProblemFile,
    pub checks: Vec<Check>,
    pub results: Value,
    pub pass: bool,
    /// Excluded from determinism comparisons.
    pub timings: Timings,
}

pub const REPORT_VERSION: &str = "resdiv-report/1";

impl Report {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }

    /// Report JSON without the timing section.
    pub fn comparable_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        v.as_object_mut().expect("object").remove("timings");
        serde_json::to_string_pretty(&v).expect("report serializes")
    }

    pub fn summary(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = format!("task {:?}\n", self.problem.task);
        for c in &self.checks {
            out.push_str(&format!(
                "  {:<width$}  {:>12.4e} {} {:<10.3e} {}\n",
                c.name,
                c.value,
                c.relation,
                c.tolerance,
                if c.pass { "PASS" } else { "FAIL" },
            ));
        }
        out.push_str(&format!("{} in {:.2}s\n", if self.pass { "PASS" } else { "FAIL" }, self.timings.total_seconds));
        out
    }
}

/// Runs a parsed problem. `debug_nodes` receives the quadrature nodes of the
/// first integral where the task has one.
pub fn run_problem(problem: &ProblemFile, debug_nodes: Option<&Path>) -> Result<Report, RunError> {
    let start = Instant::now();
    let outcome = tasks::run(problem, debug_nodes)?;
    let pass = !outcome.checks.is_empty() && outcome.checks.iter().all(|c| c.pass);
    Ok(Report {
        version: REPORT_VERSION,
        problem: problem.clone(),
        checks: outcome.checks,
        results: outcome.results,
        pass,
        timings: Timings { total_seconds: start.elapsed().as_secs_f64() },
    })
}

/// Parses and runs problem text.
pub fn run_text(text: &str, debug_nodes: Option<&Path>) -> Result<Report, RunError> {
    let problem = parse(text)?;
    run_problem(&problem, debug_nodes)
}
