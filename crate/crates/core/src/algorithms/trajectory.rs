use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::convex::SolveStatus;
use crate::error::{IsacError, Result};

/// One outer iteration of an iterative algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub iteration: usize,
    /// Objective tracked by the stopping rule (sum of mu, MSE, or alpha).
    pub objective: f64,
    /// Quantity compared against the stopping tolerance.
    pub change: f64,
    /// Largest KKT residual of the convex subproblem.
    pub kkt: f64,
    pub newton_steps: usize,
    pub status: SolveStatus,
}

/// Streams records as JSON lines, one object per line.
pub fn write_jsonl<W: Write>(records: &[TrajectoryRecord], mut out: W) -> Result<()> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| IsacError::Json { path: "<trajectory>".into(), source: e })?;
        writeln!(out, "{line}").map_err(|e| IsacError::io("<trajectory>", e))?;
    }
    Ok(())
}
