//! Comparison schemes built on the multi-objective machinery: the
//! normalized weighted sum, and the two constrained single-objective
//! designs that trace the boundary of the achievable region.

use serde::{Deserialize, Serialize};

use super::context::Context;
use super::design::WaveformDesign;
use super::moop::{run_homogenized, to_point, Goal, ParetoPoint};
use super::scalarization::{weighted_sum_value, ScalarizationWeights, Utopia};
use super::soop1::ci_anchor;
use crate::error::{IsacError, Result};
use crate::model::{ScenarioDraw, SystemConfig};

/// Minimizes omega1 f1/|f1*| + omega2 f2/f2* with the same subproblems as
/// the Tchebycheff design.
pub fn weighted_sum_baseline(
    scenario: &ScenarioDraw,
    utopia: &Utopia,
    weights: &ScalarizationWeights,
    cfg: &SystemConfig,
) -> Result<ParetoPoint> {
    let ctx = Context::new(scenario, cfg)?;
    let solver = ctx.solver_config();
    let anchor = ci_anchor(&ctx, &solver)?;
    let h = run_homogenized(&ctx, &solver, &anchor, &Goal::WeightedSum { utopia: *utopia, weights: *weights })?;
    let value = weighted_sum_value(-h.design.sum_rate(), h.design.mse(), utopia, weights);
    Ok(to_point(h, *weights, value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SooMode {
    /// Minimize the MSE; `threshold` is the per-user rate floor in bit/s.
    MseMinRateConstrained,
    /// Maximize the sum rate; `threshold` is the MSE cap (may be infinite).
    RateMaxMseConstrained,
}

/// Single-objective design with the other objective as a constraint.
pub fn soo_baselines(scenario: &ScenarioDraw, threshold: f64, mode: SooMode, cfg: &SystemConfig) -> Result<WaveformDesign> {
    if threshold.is_nan() || threshold < 0.0 {
        return Err(IsacError::InvalidConfig(vec![format!("baseline threshold {threshold} must be non-negative")]));
    }
    let ctx = Context::new(scenario, cfg)?;
    let solver = ctx.solver_config();
    let anchor = ci_anchor(&ctx, &solver)?;
    let goal = match mode {
        SooMode::MseMinRateConstrained => Goal::MinMse { rate_floor: threshold },
        SooMode::RateMaxMseConstrained => Goal::MaxRate { mse_cap: threshold },
    };
    Ok(run_homogenized(&ctx, &solver, &anchor, &goal)?.design)
}
