//! Beampattern matching by semidefinite relaxation.
//!
//! The scaling eta and the covariance are updated alternately. For a fixed
//! R the best eta is closed form; the R-step minimizes the MSE with eta
//! profiled out, a convex quadratic in R over {R >= 0, Tr R = P}. Because
//! the R-step problem does not depend on the incoming eta, the alternation
//! settles after its second pass.

use serde::{Deserialize, Serialize};

use super::context::{usable, Context};
use super::design::{Extraction, WaveformDesign};
use super::randomization::{gaussian_randomization, RandomizationOptions};
use super::trajectory::TrajectoryRecord;
use crate::convex::{solve_from, ConstraintAtom, ConvexProblem, Solution, SolverConfig};
use crate::error::Result;
use crate::metrics::{eta_star, rank_ratio};
use crate::model::{ScenarioDraw, SystemConfig};
use crate::{CMatrix, CVector, C64};

/// Covariances with lambda_2 / lambda_1 at or below this are treated as rank one.
pub const RANK_ONE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Soop2Result {
    pub design: WaveformDesign,
    /// Relaxed optimum: MSE of the optimal covariance.
    pub f2_star: f64,
    pub mse_history: Vec<f64>,
    pub eta_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trajectory: Vec<TrajectoryRecord>,
}

fn qsdp(ctx: &Context<'_>) -> ConvexProblem {
    let mut p = ConvexProblem::new(0, ctx.n);
    p.set_quadratic(ctx.q.clone());
    p.add(ConstraintAtom::PsdCone);
    p.add(ConstraintAtom::TraceEq { value: 1.0 });
    p
}

fn r_step(ctx: &Context<'_>, solver: &SolverConfig) -> Result<Solution> {
    let p = qsdp(ctx);
    usable(solve_from(&p, solver, None)?, "beampattern QSDP")
}

/// Minimizes the beampattern MSE over covariances with Tr R = P and
/// extracts a transmit vector.
pub fn solve_soop2(scenario: &ScenarioDraw, cfg: &SystemConfig) -> Result<Soop2Result> {
    let ctx = Context::new(scenario, cfg)?;
    let solver = ctx.solver_config();
    let gains = |r: &CMatrix| ctx.manifold.gains(&(r * C64::new(ctx.p_mw, 0.0)));

    let mut r = CMatrix::identity(ctx.n, ctx.n) / C64::new(ctx.n as f64, 0.0);
    let mut prev = ctx.mse_of_cov(&r);
    let mut mse_history = Vec::new();
    let mut eta_history = Vec::new();
    let mut trajectory = Vec::new();
    let mut converged = false;
    let mut cached: Option<Solution> = None;
    for it in 1..=cfg.max_iters.beampattern.max(1) {
        eta_history.push(eta_star(&gains(&r), &scenario.desired_gain)?);
        let sol = match &cached {
            Some(s) => s.clone(),
            None => {
                let s = r_step(&ctx, &solver)?;
                cached = Some(s.clone());
                s
            }
        };
        r = sol.matrix.clone().unwrap_or_else(|| CMatrix::zeros(ctx.n, ctx.n));
        let mse = ctx.mse_of_cov(&r);
        let change = (mse - prev).abs() / prev.abs().max(f64::MIN_POSITIVE);
        trajectory.push(TrajectoryRecord {
            iteration: it,
            objective: mse,
            change,
            kkt: sol.kkt.max(),
            newton_steps: if it == 1 { sol.newton_steps } else { 0 },
            status: sol.status,
        });
        mse_history.push(mse);
        prev = mse;
        if change <= cfg.tolerances.beampattern || mse == 0.0 {
            converged = true;
            break;
        }
    }

    let ratio = rank_ratio(&r);
    let (x, extraction) = if ratio <= RANK_ONE_TOL {
        (crate::metrics::principal_component(&r), Extraction::Eigen)
    } else {
        let opts = RandomizationOptions::from_config(cfg, false);
        let r_phys = &r * C64::new(ctx.p_mw, 0.0);
        let out = gaussian_randomization(&r_phys, scenario, cfg, &opts, |x| {
            crate::metrics::matched_mse(&ctx.manifold.gains_of_vector(x), &scenario.desired_gain)
                .map_or(f64::INFINITY, |m| m.0)
        });
        let x: CVector = out.x / C64::new(ctx.p_mw.sqrt(), 0.0);
        (x, if out.feasible { Extraction::Randomized } else { Extraction::Fallback })
    };
    let relaxed_rate = ctx.rate_bps(&x);
    let design = WaveformDesign::assemble(&ctx, &x, Some(&r), relaxed_rate, extraction)?;
    Ok(Soop2Result {
        f2_star: design.relaxed_mse,
        design,
        iterations: mse_history.len(),
        mse_history,
        eta_history,
        converged,
        trajectory,
    })
}
