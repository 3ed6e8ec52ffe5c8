//! Multi-objective design by successive convex approximation.
//!
//! The covariance is relaxed through the homogenized matrix
//! Y = [[R, x], [x^H, 1]] >= 0, which keeps the transmit vector x (and so
//! every received symbol c_k = h~_k^H x) linear in the decision variables
//! while implying R >= x x^H. The rate of user k enters through mu_k with
//! e^{mu_k} <= 1 + lin_k / n0, where lin_k is the tangent of |c_k|^2 at the
//! previous iterate. The same machinery serves the Tchebycheff design, the
//! weighted-sum baseline and the constrained single-objective baselines.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::context::{usable, Context};
use super::design::{Extraction, WaveformDesign};
use super::randomization::{admissible, homogeneous_randomization, RandomizationOptions};
use super::scalarization::{scalarize_tchebycheff, weighted_sum_value, ScalarizationWeights, Utopia};
use super::soop1::{ci_anchor, CiAnchor};
use super::soop2::RANK_ONE_TOL;
use super::trajectory::TrajectoryRecord;
use crate::convex::{solve_from, ConstraintAtom, ConvexProblem, HermitianLayout, SolveStatus, SolverConfig};
use crate::error::{IsacError, Result};
use crate::metrics::{per_user_rates, rank_ratio};
use crate::model::{ScenarioDraw, SystemConfig};
use crate::{CMatrix, CVector, C64};

/// One design on (or near) the Pareto front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoPoint {
    pub weights: ScalarizationWeights,
    pub design: WaveformDesign,
    /// -(sum rate) of the extracted design, bit/s.
    pub f1: f64,
    /// Beampattern MSE of the extracted design.
    pub f2: f64,
    pub relaxed_f1: f64,
    pub relaxed_f2: f64,
    /// Scalarized value of the extracted design.
    pub alpha: f64,
    /// Optimal value of the last convex subproblem.
    pub relaxed_alpha: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: SolveStatus,
    pub trajectory: Vec<TrajectoryRecord>,
}

/// What the homogenized SCA optimizes.
#[derive(Debug, Clone, Copy)]
pub(crate) enum Goal {
    Tchebycheff { utopia: Utopia, weights: ScalarizationWeights },
    WeightedSum { utopia: Utopia, weights: ScalarizationWeights },
    /// Minimize the MSE with every user's rate at least this many bit/s.
    MinMse { rate_floor: f64 },
    /// Maximize the sum rate with the MSE at most this value.
    MaxRate { mse_cap: f64 },
}

impl Goal {
    fn has_alpha(&self) -> bool {
        matches!(self, Goal::Tchebycheff { .. })
    }

    /// Score of an extracted physical design; lower is better.
    fn score(&self, ctx: &Context<'_>, x: &CVector) -> f64 {
        let rates = per_user_rates(&ctx.scenario.channels, x, ctx.cfg.noise_mw(), ctx.cfg.bandwidth_hz);
        let rate: f64 = rates.iter().sum();
        let xn = x / C64::new(ctx.p_mw.sqrt(), 0.0);
        let mse = ctx.mse_of_vector(&xn);
        match self {
            Goal::Tchebycheff { utopia, weights } => scalarize_tchebycheff(-rate, mse, utopia, weights).alpha,
            Goal::WeightedSum { utopia, weights } => weighted_sum_value(-rate, mse, utopia, weights),
            Goal::MinMse { rate_floor } => {
                let short: f64 = rates.iter().map(|r| (rate_floor - r).max(0.0)).sum();
                mse + PENALTY * short
            }
            Goal::MaxRate { mse_cap } => -rate + PENALTY * (mse - mse_cap).max(0.0),
        }
    }
}

const PENALTY: f64 = 1e12;
/// Lower bound on every mu_k (nats).
const MU_FLOOR: f64 = -1.0;
/// Initial barrier weight for warm-started subproblems.
const WARM_T0: f64 = 1e4;

/// Linear maps from the decision vector to the quantities of interest.
struct Lifted {
    dim: usize,
    off: usize,
    layout: HermitianLayout,
    /// Re c_k and Im c_k.
    c_re: Vec<Vec<f64>>,
    c_im: Vec<Vec<f64>>,
    /// 1/2 z^T mse z is the normalized MSE of the R block.
    mse: DMatrix<f64>,
}

impl Lifted {
    fn new(ctx: &Context<'_>, vector_dim: usize) -> Self {
        let n = ctx.n;
        let layout = HermitianLayout::new(n + 1);
        let off = vector_dim;
        let dim = off + layout.n_params();
        let mut c_re = Vec::with_capacity(ctx.k);
        let mut c_im = Vec::with_capacity(ctx.k);
        for h in &ctx.h_eff {
            let mut re = vec![0.0; dim];
            let mut im = vec![0.0; dim];
            for (i, hi) in h.iter().enumerate() {
                let xr = off + layout.re_index(i, n);
                let xi = off + layout.im_index(i, n).expect("i < n");
                re[xr] += hi.re;
                re[xi] += hi.im;
                im[xr] -= hi.im;
                im[xi] += hi.re;
            }
            c_re.push(re);
            c_im.push(im);
        }
        let r_layout = HermitianLayout::new(n);
        let mut map = vec![0; r_layout.n_params()];
        for i in 0..n {
            for j in i..n {
                map[r_layout.re_index(i, j)] = off + layout.re_index(i, j);
                if let (Some(a), Some(b)) = (r_layout.im_index(i, j), layout.im_index(i, j)) {
                    map[a] = off + b;
                }
            }
        }
        let mut mse = DMatrix::zeros(dim, dim);
        for (p, &zp) in map.iter().enumerate() {
            for (q, &zq) in map.iter().enumerate() {
                mse[(zp, zq)] = ctx.q[(p, q)];
            }
        }
        Lifted { dim, off, layout, c_re, c_im, mse }
    }

    fn matrix(&self, z: &[f64]) -> CMatrix {
        self.layout.to_matrix(&z[self.off..])
    }

    fn quad(&self, z: &[f64]) -> f64 {
        let v = nalgebra::DVector::from_column_slice(z);
        0.5 * v.dot(&(&self.mse * &v))
    }
}

/// Coefficients of the two Tchebycheff rows as (weight on r1, weight on r2).
fn row_weights(w: &ScalarizationWeights) -> [(f64, f64); 2] {
    [(w.omega1 * (1.0 + w.xi), w.omega1 * w.xi), (w.omega2 * w.xi, w.omega2 * (1.0 + w.xi))]
}

fn subproblem(ctx: &Context<'_>, lf: &Lifted, goal: &Goal, cbar: &[C64]) -> ConvexProblem {
    let k = ctx.k;
    let vdim = lf.off;
    let n = ctx.n;
    let mut p = ConvexProblem::new(vdim, n + 1);
    let d = lf.dim;
    p.add(ConstraintAtom::PsdCone);
    let mut corner = vec![0.0; d];
    corner[lf.off + lf.layout.re_index(n, n)] = 1.0;
    p.add(ConstraintAtom::AffineEq { a: corner, b: 1.0 });
    let mut trace = vec![0.0; d];
    (0..n).for_each(|i| trace[lf.off + lf.layout.re_index(i, i)] = 1.0);
    p.add(ConstraintAtom::AffineEq { a: trace, b: 1.0 });

    for u in 0..k {
        let t = ctx.thresholds[u];
        for sign in [1.0, -1.0] {
            let a: Vec<f64> = (0..d).map(|i| sign * lf.c_im[u][i] - ctx.tan_phi * lf.c_re[u][i]).collect();
            p.add(ConstraintAtom::AffineIneq { a, b: -t * ctx.tan_phi });
        }
        let cb = cbar[u];
        let a: Vec<f64> = (0..d).map(|i| 2.0 * (cb.re * lf.c_re[u][i] + cb.im * lf.c_im[u][i])).collect();
        let mut lhs = vec![0.0; d];
        lhs[u] = 1.0;
        p.add(ConstraintAtom::LogAffine { lhs, lhs_const: ctx.n0.ln(), a, b: ctx.n0 - cb.norm_sqr() });
        // Keeps mu bounded when the objective does not reward rate.
        let mut floor = vec![0.0; d];
        floor[u] = -1.0;
        p.add(ConstraintAtom::AffineIneq { a: floor, b: -MU_FLOOR });
    }

    let f2n = |u: &Utopia| u.f2_star / (ctx.p_mw * ctx.p_mw);
    match goal {
        Goal::Tchebycheff { utopia, weights } => {
            // r1 = -bpn sum(mu) / |f1*| + 1, r2 = quad / f2n - 1.
            let g = ctx.bits_per_nat / utopia.f1_star.abs();
            for (k1, k2) in row_weights(weights) {
                let mut a = vec![0.0; d];
                a[..k].iter_mut().for_each(|v| *v = -k1 * g);
                a[k] = -1.0;
                p.add(ConstraintAtom::ConvexQuadIneq { q: &lf.mse * (k2 / f2n(utopia)), a, b: k2 - k1 });
            }
            let mut lin = vec![0.0; d];
            lin[k] = 1.0;
            p.set_linear(lin);
        }
        Goal::WeightedSum { utopia, weights } => {
            let mut lin = vec![0.0; d];
            let g = weights.omega1 * ctx.bits_per_nat / utopia.f1_star.abs();
            lin[..k].iter_mut().for_each(|v| *v = -g);
            p.set_linear(lin);
            p.set_quadratic(&lf.mse * (weights.omega2 / f2n(utopia)));
        }
        Goal::MinMse { rate_floor } => {
            let floor = rate_floor / ctx.bits_per_nat;
            for u in 0..k {
                let mut a = vec![0.0; d];
                a[u] = -1.0;
                p.add(ConstraintAtom::AffineIneq { a, b: -floor });
            }
            p.set_quadratic(lf.mse.clone());
        }
        Goal::MaxRate { mse_cap } => {
            if mse_cap.is_finite() {
                let cap = mse_cap / (ctx.p_mw * ctx.p_mw);
                p.add(ConstraintAtom::ConvexQuadIneq { q: lf.mse.clone(), a: vec![0.0; d], b: cap });
            }
            let mut lin = vec![0.0; d];
            lin[..k].iter_mut().for_each(|v| *v = -1.0);
            p.set_linear(lin);
        }
    }
    p
}

/// Y = [x; 1][x; 1]^H plus (1 - ||x||^2)/n on the leading diagonal.
fn homogenize(x: &CVector) -> CMatrix {
    let n = x.len();
    let mut v = CVector::zeros(n + 1);
    v.rows_mut(0, n).copy_from(x);
    v[n] = C64::new(1.0, 0.0);
    let mut y = &v * v.adjoint();
    let fill = ((1.0 - x.norm_squared()) / n as f64).max(0.0);
    for i in 0..n {
        y[(i, i)] += C64::new(fill, 0.0);
    }
    y
}

fn column(y: &CMatrix) -> CVector {
    let n = y.nrows() - 1;
    y.view((0, n), (n, 1)).column(0).into_owned()
}

fn hint(ctx: &Context<'_>, lf: &Lifted, goal: &Goal, prev: &CMatrix, centre: &CMatrix, cbar: &[C64]) -> Vec<f64> {
    let y = prev * C64::new(0.98, 0.0) + centre * C64::new(0.02, 0.0);
    let mut z = vec![0.0; lf.dim];
    z[lf.off..].copy_from_slice(&lf.layout.to_params(&y));
    let c = ctx.received(&column(&y));
    for u in 0..ctx.k {
        let lin = 2.0 * (cbar[u].conj() * c[u]).re - cbar[u].norm_sqr();
        let cap = (ctx.n0 + lin).max(f64::MIN_POSITIVE).ln() - ctx.n0.ln();
        z[u] = match goal {
            Goal::MinMse { rate_floor } => {
                let floor = rate_floor / ctx.bits_per_nat;
                if cap > floor { 0.5 * (cap + floor) } else { cap - 0.5 }
            }
            _ if cap - 0.5 > MU_FLOOR => cap - 0.5,
            _ => 0.5 * (cap + MU_FLOOR),
        };
    }
    if let Goal::Tchebycheff { utopia, weights } = goal {
        let mu: f64 = z[..ctx.k].iter().sum();
        let r1 = -ctx.bits_per_nat * mu / utopia.f1_star.abs() + 1.0;
        let r2 = lf.quad(&z) * ctx.p_mw * ctx.p_mw / utopia.f2_star - 1.0;
        let alpha = row_weights(weights).iter().map(|(a, b)| a * r1 + b * r2).fold(f64::NEG_INFINITY, f64::max);
        z[ctx.k] = alpha + 1.0;
    }
    z
}

/// Output of the homogenized SCA before packaging.
pub(crate) struct Homogenized {
    pub design: WaveformDesign,
    pub relaxed_sum_rate: f64,
    pub relaxed_mse: f64,
    pub relaxed_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trajectory: Vec<TrajectoryRecord>,
}

pub(crate) fn run_homogenized(
    ctx: &Context<'_>,
    solver: &SolverConfig,
    anchor: &CiAnchor,
    goal: &Goal,
) -> Result<Homogenized> {
    let cfg = ctx.cfg;
    let vdim = ctx.k + usize::from(goal.has_alpha());
    let lf = Lifted::new(ctx, vdim);
    let centre = homogenize(&anchor.centre);
    let mut y = homogenize(&anchor.start);
    let mut cbar = ctx.received(&anchor.start);
    let mut trajectory = Vec::new();
    let mut converged = false;
    let mut last = None;
    for it in 1..=cfg.max_iters.multi_objective.max(1) {
        let p = subproblem(ctx, &lf, goal, &cbar);
        let start = hint(ctx, &lf, goal, &y, &centre, &cbar);
        // Later subproblems start next to their optimum.
        let warm = if it > 1 { SolverConfig { t0: solver.t0.max(WARM_T0), ..*solver } } else { *solver };
        let sol = solve_from(&p, &warm, Some(&start))?;
        if sol.status == SolveStatus::Infeasible {
            return Err(IsacError::Infeasible(format!("multi-objective subproblem {it} has no feasible point")));
        }
        let sol = usable(sol, "multi-objective subproblem")?;
        y = lf.matrix(&sol.z);
        let c = ctx.received(&column(&y));
        let change = c.iter().zip(&cbar).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        trajectory.push(TrajectoryRecord {
            iteration: it,
            objective: sol.objective,
            change,
            kkt: sol.kkt.max(),
            newton_steps: sol.newton_steps,
            status: sol.status,
        });
        cbar = c;
        let mu: f64 = sol.vector.rows(0, ctx.k).sum();
        last = Some((sol.objective, mu));
        if change <= cfg.tolerances.multi_objective {
            converged = true;
            break;
        }
    }
    let (relaxed_objective, mu) = last.expect("at least one iteration");
    let n = ctx.n;
    let r = y.view((0, 0), (n, n)).into_owned();

    // Extraction: the x column of Y, plus homogeneous Gaussian draws when
    // Y is not numerically rank one.
    let scale = C64::new(ctx.p_mw.sqrt(), 0.0);
    let direct = Context::unit_power(&column(&y)).map(|x| &x * scale);
    let direct_ok = direct.as_ref().filter(|x| admissible(x, ctx.scenario, cfg));
    let mut pick: Option<(f64, CVector, Extraction)> =
        direct_ok.map(|x| (goal.score(ctx, x), x.clone(), Extraction::Direct));
    if rank_ratio(&y) > RANK_ONE_TOL {
        let mut y_phys = y.clone();
        for i in 0..=n {
            for j in 0..=n {
                let s = match (i < n, j < n) {
                    (true, true) => ctx.p_mw,
                    (false, false) => 1.0,
                    _ => ctx.p_mw.sqrt(),
                };
                y_phys[(i, j)] *= C64::new(s, 0.0);
            }
        }
        let opts = RandomizationOptions::from_config(cfg, true);
        let out = homogeneous_randomization(&y_phys, ctx.scenario, cfg, &opts, |x| goal.score(ctx, x));
        if out.feasible && pick.as_ref().is_none_or(|(s, _, _)| out.score < *s) {
            pick = Some((out.score, out.x, Extraction::Randomized));
        }
    }
    let (x_phys, extraction) = match pick {
        Some((_, x, e)) => (x, e),
        None => (direct.unwrap_or_else(|| CVector::zeros(n)), Extraction::Fallback),
    };
    let x = x_phys / scale;
    let relaxed_sum_rate = mu * ctx.bits_per_nat;
    let design = WaveformDesign::assemble(ctx, &x, Some(&r), relaxed_sum_rate, extraction)?;
    Ok(Homogenized {
        relaxed_mse: design.relaxed_mse,
        design,
        relaxed_sum_rate,
        relaxed_objective,
        iterations: trajectory.len(),
        converged,
        trajectory,
    })
}

pub(crate) fn to_point(h: Homogenized, weights: ScalarizationWeights, alpha: f64) -> ParetoPoint {
    ParetoPoint {
        weights,
        f1: -h.design.sum_rate(),
        f2: h.design.mse(),
        relaxed_f1: -h.relaxed_sum_rate,
        relaxed_f2: h.relaxed_mse,
        alpha,
        relaxed_alpha: h.relaxed_objective,
        iterations: h.iterations,
        converged: h.converged,
        status: if h.converged { SolveStatus::Optimal } else { SolveStatus::MaxIters },
        trajectory: h.trajectory,
        design: h.design,
    }
}

/// Minimizes the augmented Tchebycheff scalarization of (f1, f2).
pub fn solve_moop(
    scenario: &ScenarioDraw,
    utopia: &Utopia,
    weights: &ScalarizationWeights,
    cfg: &SystemConfig,
) -> Result<ParetoPoint> {
    let ctx = Context::new(scenario, cfg)?;
    let solver = ctx.solver_config();
    let anchor = ci_anchor(&ctx, &solver)?;
    moop_with(&ctx, &solver, &anchor, utopia, weights)
}

pub(crate) fn moop_with(
    ctx: &Context<'_>,
    solver: &SolverConfig,
    anchor: &CiAnchor,
    utopia: &Utopia,
    weights: &ScalarizationWeights,
) -> Result<ParetoPoint> {
    let goal = Goal::Tchebycheff { utopia: *utopia, weights: *weights };
    let h = run_homogenized(ctx, solver, anchor, &goal)?;
    let alpha = scalarize_tchebycheff(-h.design.sum_rate(), h.design.mse(), utopia, weights).alpha;
    Ok(to_point(h, *weights, alpha))
}
