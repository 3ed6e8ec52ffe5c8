//! Sum-rate maximization under constructive-interference constraints.
//!
//! The rate of user k is ln(1 + ||H_k^T x~||^2 / n0) in the real form. The
//! convex quadratic inside the log is replaced by its tangent plane at the
//! current iterate, which lower-bounds it, so every subproblem is a concave
//! maximization over the CI polytope and the unit ball and the sequence of
//! optimal values cannot decrease.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::context::{usable, Context};
use super::design::{Extraction, WaveformDesign};
use super::trajectory::TrajectoryRecord;
use crate::convex::{solve_from, ConstraintAtom, ConvexProblem, SolveStatus, SolverConfig};
use crate::error::{IsacError, Result};
use crate::model::{complexify_vector, realify_vector, ScenarioDraw, SystemConfig};
use crate::{CVector, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Soop1Result {
    pub design: WaveformDesign,
    /// -(sum rate of the final iterate), bit/s.
    pub f1_star: f64,
    /// Optimal sum of mu_k (nats) of every subproblem.
    pub mu_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub trajectory: Vec<TrajectoryRecord>,
}

/// Feasible starting data for the CI constraints, in normalized units.
pub(crate) struct CiAnchor {
    /// Unit-power CI-feasible vector.
    pub start: CVector,
    /// Strictly CI-feasible vector with power below one.
    pub centre: CVector,
}

/// Finds a CI-feasible start. The zero-forcing direction gives every user
/// the same real received symbol; when it cannot clear the thresholds a
/// power-minimization solve decides feasibility.
pub(crate) fn ci_anchor(ctx: &Context<'_>, solver: &SolverConfig) -> Result<CiAnchor> {
    if let Some(d) = zero_forcing(ctx) {
        let norm = d.norm();
        let centre = &d * C64::new(0.5 / norm, 0.0);
        if ctx.normalized_margin(&centre) > 0.0 {
            let start = &d * C64::new(1.0 / norm, 0.0);
            return Ok(CiAnchor { start, centre });
        }
    }
    let x = min_power_point(ctx, solver)?;
    let p = x.norm_squared();
    if p > 1.0 + 1e-9 {
        return Err(IsacError::Infeasible(format!(
            "CI thresholds need {:.4e} mW, budget is {:.4e} mW",
            p * ctx.p_mw,
            ctx.p_mw
        )));
    }
    if p <= 0.0 {
        return Err(IsacError::Numerical("power minimization returned the zero vector".into()));
    }
    let centre = &x * C64::new(((1.0 + p) / (2.0 * p)).sqrt(), 0.0);
    let start = &x * C64::new(1.0 / p.sqrt(), 0.0);
    Ok(CiAnchor { start, centre })
}

/// H~ (H~^H H~)^{-1} 1, the direction with h~_k^H d = 1 for every user.
fn zero_forcing(ctx: &Context<'_>) -> Option<CVector> {
    if ctx.k > ctx.n {
        return None;
    }
    let h = crate::CMatrix::from_columns(&ctx.h_eff);
    let gram = h.adjoint() * &h;
    let ones = CVector::from_element(ctx.k, C64::new(1.0, 0.0));
    let coef = gram.lu().solve(&ones)?;
    let d = h * coef;
    (d.iter().all(|v| v.re.is_finite() && v.im.is_finite()) && d.norm() > 0.0).then_some(d)
}

/// Affine CI rows over x~: |Im c| <= (Re c - t) tan(phi).
fn ci_rows(ctx: &Context<'_>, dim: usize) -> Vec<ConstraintAtom> {
    let mut out = Vec::with_capacity(2 * ctx.k);
    for (u, t) in ctx.users.iter().zip(&ctx.thresholds) {
        for sign in [1.0, -1.0] {
            let mut a = vec![0.0; dim];
            for i in 0..u.z.len() {
                a[i] = sign * u.z[i] - ctx.tan_phi * u.z_tilde[i];
            }
            out.push(ConstraintAtom::AffineIneq { a, b: -t * ctx.tan_phi });
        }
    }
    out
}

fn min_power_point(ctx: &Context<'_>, solver: &SolverConfig) -> Result<CVector> {
    let dim = 2 * ctx.n;
    let mut p = ConvexProblem::new(dim, 0);
    p.set_quadratic(DMatrix::identity(dim, dim) * 2.0);
    for row in ci_rows(ctx, dim) {
        p.add(row);
    }
    let sol = solve_from(&p, solver, None)?;
    if sol.status == SolveStatus::Infeasible {
        return Err(IsacError::Infeasible("CI constraints admit no transmit vector".into()));
    }
    let sol = usable(sol, "CI power minimization")?;
    Ok(complexify_vector(&sol.vector))
}

/// Builds the subproblem linearized at `xbar` over u = [x~; mu].
fn subproblem(ctx: &Context<'_>, xbar: &CVector) -> ConvexProblem {
    let nx = 2 * ctx.n;
    let dim = nx + ctx.k;
    let mut p = ConvexProblem::new(dim, 0);
    let mut lin = vec![0.0; dim];
    lin[nx..].iter_mut().for_each(|v| *v = -1.0);
    p.set_linear(lin);
    p.add(ConstraintAtom::Ball { indices: (0..nx).collect(), radius_sq: 1.0 });
    for row in ci_rows(ctx, dim) {
        p.add(row);
    }
    let xr = realify_vector(xbar);
    for (k, u) in ctx.users.iter().enumerate() {
        let (re, im) = u.received(&xr);
        let mut a = vec![0.0; dim];
        for i in 0..nx {
            a[i] = 2.0 * (im * u.z[i] + re * u.z_tilde[i]);
        }
        let mut lhs = vec![0.0; dim];
        lhs[nx + k] = 1.0;
        p.add(ConstraintAtom::LogAffine { lhs, lhs_const: ctx.n0.ln(), a, b: ctx.n0 - (re * re + im * im) });
    }
    p
}

/// Strictly feasible point near `xbar`, or `None` to let phase I find one.
fn hint(ctx: &Context<'_>, xbar: &CVector, centre: &CVector) -> Option<Vec<f64>> {
    let x = xbar * C64::new(0.98, 0.0) + centre * C64::new(0.02, 0.0);
    let mut z: Vec<f64> = realify_vector(&x).iter().copied().collect();
    let cbar = ctx.received(xbar);
    let c = ctx.received(&x);
    for (cb, cx) in cbar.iter().zip(&c) {
        let lin = 2.0 * (cb.conj() * cx).re - cb.norm_sqr();
        let arg = ctx.n0 + lin;
        if arg <= 0.0 {
            return None;
        }
        z.push(arg.ln() - ctx.n0.ln() - 1.0);
    }
    Some(z)
}

/// Maximizes the sum rate subject to the CI constraints and the power budget.
pub fn solve_soop1(scenario: &ScenarioDraw, cfg: &SystemConfig) -> Result<Soop1Result> {
    let ctx = Context::new(scenario, cfg)?;
    let solver = ctx.solver_config();
    let anchor = ci_anchor(&ctx, &solver)?;
    run(&ctx, &solver, &anchor)
}

pub(crate) fn run(ctx: &Context<'_>, solver: &SolverConfig, anchor: &CiAnchor) -> Result<Soop1Result> {
    let cfg = ctx.cfg;
    let mut xbar = anchor.start.clone();
    let mut prev = ctx.nat_rate(&xbar);
    let mut mu_history = Vec::new();
    let mut trajectory = Vec::new();
    let mut converged = false;
    for it in 1..=cfg.max_iters.sum_rate {
        let p = subproblem(ctx, &xbar);
        let start = hint(ctx, &xbar, &anchor.centre);
        let sol = usable(solve_from(&p, solver, start.as_deref())?, "sum-rate subproblem")?;
        let nx = 2 * ctx.n;
        let x = complexify_vector(&sol.vector.rows(0, nx).into_owned());
        let total: f64 = sol.vector.rows(nx, ctx.k).sum();
        let change = (total - prev).abs();
        trajectory.push(TrajectoryRecord {
            iteration: it,
            objective: total,
            change,
            kkt: sol.kkt.max(),
            newton_steps: sol.newton_steps,
            status: sol.status,
        });
        mu_history.push(total);
        xbar = x;
        prev = total;
        if change <= cfg.tolerances.sum_rate {
            converged = true;
            break;
        }
    }
    let relaxed = prev * ctx.bits_per_nat;
    let design = WaveformDesign::assemble(ctx, &xbar, None, relaxed, Extraction::Direct)?;
    Ok(Soop1Result {
        f1_star: -design.sum_rate(),
        design,
        iterations: mu_history.len(),
        mu_history,
        converged,
        trajectory,
    })
}
