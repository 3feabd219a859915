//! Convergence study: rerun at `h` and `h/2` and compare residuals.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::config::Config;
use crate::error::AppError;
use crate::report::{Convergence, RunReport};
use crate::run_suites;
use crate::suites::Suite;

/// Residuals below this are rounding noise; their ratio carries no order.
pub const NOISE_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    /// Grid-independent identity.
    Exact,
    /// Ratio within 50% of 4.
    Ok,
    /// Second-order check whose ratio deviates from 4 by more than 50%.
    Flagged,
    /// Coarse residual already at rounding level.
    Noise,
    /// Spectrally accurate; ratio reported but not judged.
    Spectral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineRow {
    pub check_id: String,
    pub residual_h: f64,
    pub residual_h2: f64,
    pub ratio: Option<f64>,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefineReport {
    pub seed: u64,
    pub h: f64,
    pub h_genus2: f64,
    pub rows: Vec<RefineRow>,
    pub flagged: usize,
}

impl RefineReport {
    pub fn row(&self, id: &str) -> Option<&RefineRow> {
        self.rows.iter().find(|r| r.check_id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialises");
        s.push('\n');
        s
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "refinement h = {} -> {} (genus two {} -> {})", self.h, self.h / 2.0, self.h_genus2, self.h_genus2 / 2.0);
        for r in &self.rows {
            let ratio = match (r.status, r.ratio) {
                (Status::Exact, _) => "exact".to_string(),
                (_, Some(x)) => format!("{x:.3}"),
                (_, None) => "-".to_string(),
            };
            let _ = writeln!(out, "  {:<8} {:<44} {:>11.3e} {:>11.3e} {:>8}", format!("{:?}", r.status).to_lowercase(), r.check_id, r.residual_h, r.residual_h2, ratio);
        }
        let _ = writeln!(out, "{} flagged", self.flagged);
        out
    }
}

pub fn classify(convergence: Convergence, coarse: f64, fine: f64) -> (Option<f64>, Status) {
    match convergence {
        Convergence::Exact => (None, Status::Exact),
        _ if coarse <= NOISE_FLOOR => (None, Status::Noise),
        Convergence::Spectral => (Some(coarse / fine), Status::Spectral),
        Convergence::H2 => {
            let ratio = coarse / fine;
            let status = if (ratio - 4.0).abs() <= 2.0 { Status::Ok } else { Status::Flagged };
            (Some(ratio), status)
        }
    }
}

pub fn compare(coarse: &RunReport, fine: &RunReport, cfg: &Config) -> RefineReport {
    let mut rows = Vec::new();
    for c in coarse.checks() {
        let Some(f) = fine.check(&c.check_id) else { continue };
        let (ratio, status) = classify(c.convergence, c.max_residual, f.max_residual);
        rows.push(RefineRow { check_id: c.check_id.clone(), residual_h: c.max_residual, residual_h2: f.max_residual, ratio, status });
    }
    let flagged = rows.iter().filter(|r| r.status == Status::Flagged).count();
    RefineReport { seed: coarse.seed, h: cfg.grid.h, h_genus2: cfg.grid.genus2.h, rows, flagged }
}

pub fn refine(suites: &[Suite], cfg: &Config, seed: u64) -> Result<RefineReport, AppError> {
    let coarse = run_suites(suites, cfg, seed)?;
    let fine_cfg = cfg.refined();
    fine_cfg.validate()?;
    let fine = run_suites(suites, &fine_cfg, seed)?;
    Ok(compare(&coarse, &fine, cfg))
}
