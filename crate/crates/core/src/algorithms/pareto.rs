use serde::{Deserialize, Serialize};

use super::context::Context;
use super::moop::{moop_with, ParetoPoint};
use super::scalarization::{ScalarizationWeights, Utopia};
use super::soop1::{self, ci_anchor};
use super::soop2::solve_soop2;
use crate::error::{IsacError, Result};
use crate::model::{ScenarioDraw, SystemConfig};
use crate::par::map_indexed;

/// A weight point that did not produce a design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFailure {
    pub omega1: f64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    pub utopia: Utopia,
    /// Every successful weight point, ordered by omega1.
    pub points: Vec<ParetoPoint>,
    /// Indices into `points` of the mutually non-dominated designs.
    pub front: Vec<usize>,
    pub failures: Vec<SweepFailure>,
}

impl ParetoFront {
    pub fn filtered(&self) -> impl Iterator<Item = &ParetoPoint> {
        self.front.iter().map(|&i| &self.points[i])
    }
}

/// Indices of the points not dominated by any other. A point is dominated
/// when another is no worse in both objectives and better in one.
pub fn dominance_filter(values: &[[f64; 2]]) -> Vec<usize> {
    (0..values.len())
        .filter(|&i| {
            let p = values[i];
            !values.iter().any(|q| q[0] <= p[0] && q[1] <= p[1] && (q[0] < p[0] || q[1] < p[1]))
        })
        .collect()
}

/// Computes the utopia point of a scenario.
pub fn utopia(scenario: &ScenarioDraw, cfg: &SystemConfig) -> Result<Utopia> {
    let s1 = soop1::solve_soop1(scenario, cfg)?;
    let s2 = solve_soop2(scenario, cfg)?;
    Utopia::new(s1.f1_star, s2.f2_star)
}

/// Sweeps omega1 over the interior weight grid, one job per weight.
pub fn pareto_sweep(scenario: &ScenarioDraw, cfg: &SystemConfig) -> Result<ParetoFront> {
    pareto_sweep_with(scenario, cfg, &cfg.weight_grid(), 1)
}

/// Sweeps the given omega1 values with `jobs` workers (0 = automatic).
pub fn pareto_sweep_with(
    scenario: &ScenarioDraw,
    cfg: &SystemConfig,
    omegas: &[f64],
    jobs: usize,
) -> Result<ParetoFront> {
    if omegas.is_empty() {
        return Err(IsacError::InvalidWeights("empty weight grid".into()));
    }
    let utopia = utopia(scenario, cfg)?;
    let ctx = Context::new(scenario, cfg)?;
    let solver = ctx.solver_config();
    let anchor = ci_anchor(&ctx, &solver)?;
    let results = map_indexed(omegas.len(), jobs, |i| {
        ScalarizationWeights::new(omegas[i], cfg.xi).and_then(|w| moop_with(&ctx, &solver, &anchor, &utopia, &w))
    });
    let mut points = Vec::new();
    let mut failures = Vec::new();
    for (omega1, r) in omegas.iter().zip(results) {
        match r {
            Ok(p) => points.push(p),
            Err(e) => {
                log::warn!("omega1 = {omega1}: {e}");
                failures.push(SweepFailure { omega1: *omega1, error: e.to_string() });
            }
        }
    }
    let values: Vec<[f64; 2]> = points.iter().map(|p| [p.f1, p.f2]).collect();
    let front = dominance_filter(&values);
    Ok(ParetoFront { utopia, points, front, failures })
}
