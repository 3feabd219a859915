//! Machine-readable verification reports.
//!
//! Everything except the `wall_time_s` fields is a pure function of the seed and
//! the configuration, so two runs serialise to the same bytes once timing is
//! cleared with [`RunReport::without_timing`].

use std::fmt::Write as _;

use ncmukai_core::field::Grid;
use serde::{Deserialize, Serialize};

use crate::config::SCHEMA_VERSION;

/// How a check's residual behaves under grid refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convergence {
    /// Exact identity, independent of any grid.
    Exact,
    /// Second-order finite-difference residual.
    H2,
    /// Spectrally accurate discretisation; no fixed order.
    Spectral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridParams {
    #[serde(rename = "R")]
    pub r: f64,
    pub h: f64,
    pub dim: usize,
}

impl From<&Grid> for GridParams {
    fn from(g: &Grid) -> Self {
        GridParams { r: g.radius, h: g.h, dim: g.dim }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check_id: String,
    /// The identity being checked, stated in the notation of the model.
    pub paper_anchor: String,
    pub max_residual: f64,
    pub tolerance: f64,
    pub grid_params: Option<GridParams>,
    pub convergence: Convergence,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(id: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64, grid: Option<&Grid>, convergence: Convergence) -> Self {
        CheckRecord {
            check_id: id.into(),
            paper_anchor: anchor.into(),
            max_residual: residual,
            tolerance,
            grid_params: grid.map(GridParams::from),
            convergence,
            // NaN never passes
            pass: residual <= tolerance,
        }
    }
}

/// A reported quantity with no pass/fail semantics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub id: String,
    pub paper_anchor: String,
    pub value: f64,
    pub grid_params: Option<GridParams>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// What a suite produces before timing is attached.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Outcome {
    pub checks: Vec<CheckRecord>,
    pub observations: Vec<Observation>,
    pub tables: Vec<Table>,
}

impl Outcome {
    pub fn check(&mut self, id: impl Into<String>, anchor: impl Into<String>, residual: f64, tolerance: f64, grid: Option<&Grid>, convergence: Convergence) {
        self.checks.push(CheckRecord::new(id, anchor, residual, tolerance, grid, convergence));
    }

    pub fn observe(&mut self, id: impl Into<String>, anchor: impl Into<String>, value: f64, grid: Option<&Grid>) {
        self.observations.push(Observation { id: id.into(), paper_anchor: anchor.into(), value, grid_params: grid.map(GridParams::from) });
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<CheckRecord>,
    pub observations: Vec<Observation>,
    pub tables: Vec<Table>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl SuiteReport {
    pub fn new(suite: &str, seed: u64, out: Outcome, wall_time_s: f64) -> Self {
        let pass = out.checks.iter().all(|c| c.pass);
        SuiteReport { suite: suite.to_string(), seed, checks: out.checks, observations: out.observations, tables: out.tables, pass, wall_time_s }
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub seed: u64,
    pub suites: Vec<SuiteReport>,
    pub pass: bool,
    pub wall_time_s: f64,
}

impl RunReport {
    pub fn new(seed: u64, suites: Vec<SuiteReport>, wall_time_s: f64) -> Self {
        let pass = suites.iter().all(|s| s.pass);
        RunReport { schema_version: SCHEMA_VERSION, seed, suites, pass, wall_time_s }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    /// Copy with every timing field zeroed.
    pub fn without_timing(&self) -> RunReport {
        let mut r = self.clone();
        r.wall_time_s = 0.0;
        for s in &mut r.suites {
            s.wall_time_s = 0.0;
        }
        r
    }

    pub fn check(&self, id: &str) -> Option<&CheckRecord> {
        self.suites.iter().flat_map(|s| &s.checks).find(|c| c.check_id == id)
    }

    pub fn checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.suites.iter().flat_map(|s| &s.checks)
    }

    /// Plain-text rendering for the terminal.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let _ = writeln!(out, "== {} (seed {}, {:.2} s)", s.suite, s.seed, s.wall_time_s);
            for t in &s.tables {
                let _ = writeln!(out, "-- {}", t.title);
                let _ = writeln!(out, "   {}", t.columns.iter().map(|c| format!("{c:>12}")).collect::<String>());
                for row in &t.rows {
                    let _ = writeln!(out, "   {}", row.iter().map(|v| format!("{v:>12.6}")).collect::<String>());
                }
            }
            for c in &s.checks {
                let _ = writeln!(
                    out,
                    "  {}  {:<44} {:>11.3e} <= {:<9.1e} {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.check_id,
                    c.max_residual,
                    c.tolerance,
                    c.paper_anchor
                );
            }
            for o in &s.observations {
                let _ = writeln!(out, "  ----  {:<44} {:>11.3e}    {}", o.id, o.value, o.paper_anchor);
            }
        }
        let total = self.checks().count();
        let failed = self.checks().filter(|c| !c.pass).count();
        let _ = writeln!(out, "{} checks, {} failed, {:.2} s", total, failed, self.wall_time_s);
        out
    }
}
