use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::kkt::{kkt_residuals, refine_duals, residuals_with, Duals, KktResiduals};
use super::layout::BasisTerm;
use super::problem::{ConstraintAtom, ConvexProblem};
use crate::error::Result;
use crate::metrics::hermitian_eigen;
use crate::{CMatrix, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    Optimal,
    MaxIters,
    Infeasible,
    NumericalFailure,
}

impl SolveStatus {
    /// Whether the attached point is a usable (feasible) iterate.
    pub fn has_point(self) -> bool {
        matches!(self, SolveStatus::Optimal | SolveStatus::MaxIters)
    }
}

/// Log-barrier interior-point settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Bound on every KKT residual for an `Optimal` status.
    pub tol: f64,
    /// Barrier-parameter increases (outer iterations).
    pub max_outer: usize,
    /// Newton steps per centering.
    pub max_newton: usize,
    /// Step shrink factor of the backtracking line search.
    pub backtrack: f64,
    /// Sufficient-decrease constant of the line search.
    pub armijo: f64,
    /// Multiplier applied to the barrier parameter after each centering.
    pub barrier_growth: f64,
    pub t0: f64,
    /// Phase I stops once every constraint holds with this slack.
    pub phase1_margin: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_outer: 500,
            max_newton: 80,
            backtrack: 0.5,
            armijo: 0.01,
            barrier_growth: 10.0,
            t0: 1.0,
            phase1_margin: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    /// Full decision vector `[u; params(R)]`.
    pub z: Vec<f64>,
    pub vector: DVector<f64>,
    pub matrix: Option<CMatrix>,
    pub objective: f64,
    pub status: SolveStatus,
    pub kkt: KktResiduals,
    pub duals: Duals,
    pub outer_iterations: usize,
    pub newton_steps: usize,
}

enum Quad {
    Dense { q: DMatrix<f64>, a: DVector<f64>, b: f64 },
    Ball { idx: Vec<usize>, r: f64 },
}

struct LogAtom {
    lhs: DVector<f64>,
    c: f64,
    a: DVector<f64>,
    b: f64,
}

#[derive(Clone, Copy)]
enum Origin {
    Lin(usize),
    Quad(usize),
    Log(usize),
    Eq,
    Psd,
}

struct Compiled<'a> {
    p: &'a ConvexProblem,
    d: usize,
    n: usize,
    m: usize,
    basis: Vec<Vec<BasisTerm>>,
    lin: Vec<(DVector<f64>, f64)>,
    quads: Vec<Quad>,
    logs: Vec<LogAtom>,
    psd: bool,
    eq_a: DMatrix<f64>,
    eq_b: DVector<f64>,
    obj_c: DVector<f64>,
    obj_q: Option<DMatrix<f64>>,
    obj_logs: Vec<(f64, DVector<f64>, f64)>,
    origin: Vec<Origin>,
    /// Phase I stays inside this ball (centre, squared radius) so that its
    /// barrier problem is bounded when the feasible set is not.
    phase1_ball: Option<(DVector<f64>, f64)>,
}

struct Eval {
    val: f64,
    grad: DVector<f64>,
    hess: Option<DMatrix<f64>>,
}

impl Eval {
    fn zeros(dim: usize, hess: bool) -> Self {
        Eval { val: 0.0, grad: DVector::zeros(dim), hess: hess.then(|| DMatrix::zeros(dim, dim)) }
    }

    /// Adds `-log(sigma)` with gradient `dsig` and extra Hessian `-d2sig / sigma`.
    fn add_log_barrier(&mut self, sigma: f64, dsig: &DVector<f64>) {
        self.val -= sigma.ln();
        self.grad.axpy(-1.0 / sigma, dsig, 1.0);
        if let Some(h) = self.hess.as_mut() {
            h.ger(1.0 / (sigma * sigma), dsig, dsig, 1.0);
        }
    }
}

fn dv(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

impl<'a> Compiled<'a> {
    fn new(p: &'a ConvexProblem) -> Self {
        let d = p.dim();
        let layout = p.layout();
        let trace = p.lift_matrix_coeffs(&layout.trace_coeffs(p.matrix_dim));
        let mut c = Compiled {
            p,
            d,
            n: p.vector_dim,
            m: p.matrix_dim,
            basis: layout.basis(),
            lin: Vec::new(),
            quads: Vec::new(),
            logs: Vec::new(),
            psd: false,
            eq_a: DMatrix::zeros(0, d),
            eq_b: DVector::zeros(0),
            obj_c: dv(&p.objective.linear),
            obj_q: p.objective.quadratic.clone(),
            obj_logs: p.objective.neg_log.iter().map(|t| (t.weight, dv(&t.a), t.b)).collect(),
            origin: Vec::new(),
            phase1_ball: None,
        };
        let mut eq_rows: Vec<(Vec<f64>, f64)> = Vec::new();
        for atom in &p.constraints {
            let o = match atom {
                ConstraintAtom::AffineIneq { a, b } => {
                    c.lin.push((dv(a), *b));
                    Origin::Lin(c.lin.len() - 1)
                }
                ConstraintAtom::TraceCap { cap } => {
                    c.lin.push((dv(&trace), *cap));
                    Origin::Lin(c.lin.len() - 1)
                }
                ConstraintAtom::AffineEq { a, b } => {
                    eq_rows.push((a.clone(), *b));
                    Origin::Eq
                }
                ConstraintAtom::TraceEq { value } => {
                    eq_rows.push((trace.clone(), *value));
                    Origin::Eq
                }
                ConstraintAtom::Ball { indices, radius_sq } => {
                    c.quads.push(Quad::Ball { idx: indices.clone(), r: *radius_sq });
                    Origin::Quad(c.quads.len() - 1)
                }
                ConstraintAtom::ConvexQuadIneq { q, a, b } => {
                    c.quads.push(Quad::Dense { q: q.clone(), a: dv(a), b: *b });
                    Origin::Quad(c.quads.len() - 1)
                }
                ConstraintAtom::LogAffine { lhs, lhs_const, a, b } => {
                    c.logs.push(LogAtom { lhs: dv(lhs), c: *lhs_const, a: dv(a), b: *b });
                    Origin::Log(c.logs.len() - 1)
                }
                ConstraintAtom::PsdCone => {
                    c.psd = true;
                    Origin::Psd
                }
            };
            c.origin.push(o);
        }
        c.eq_a = DMatrix::from_fn(eq_rows.len(), d, |i, j| eq_rows[i].0[j]);
        c.eq_b = DVector::from_iterator(eq_rows.len(), eq_rows.iter().map(|r| r.1));
        c
    }

    /// Barrier parameter (number of barrier terms, m for the PSD block).
    fn nu(&self, phase1: bool) -> f64 {
        let base = self.lin.len() + self.quads.len() + self.logs.len() + if self.psd { self.m } else { 0 };
        let extra = if phase1 { 1 + self.obj_logs.len() + usize::from(self.phase1_ball.is_some()) } else { 0 };
        (base + extra) as f64
    }

    fn extend(&self, v: &DVector<f64>, phase1: bool, s_coef: f64) -> DVector<f64> {
        if phase1 {
            let mut e = DVector::zeros(self.d + 1);
            e.rows_mut(0, self.d).copy_from(v);
            e[self.d] = s_coef;
            e
        } else {
            v.clone()
        }
    }

    fn matrix_at(&self, w: &DVector<f64>, shift: f64) -> CMatrix {
        let mut r = self.p.layout().to_matrix(&w.as_slice()[self.n..self.d]);
        for i in 0..self.m {
            r[(i, i)] += C64::new(shift, 0.0);
        }
        r
    }

    /// Barrier value, gradient and Hessian; `None` outside the domain.
    fn barrier(&self, w: &DVector<f64>, phase1: bool, want_hess: bool) -> Option<Eval> {
        let dim = w.len();
        let z = w.rows(0, self.d);
        let s = if phase1 { w[self.d] } else { 0.0 };
        let mut e = Eval::zeros(dim, want_hess);

        for (a, b) in &self.lin {
            let sigma = b - a.dot(&z) + s;
            if !(sigma > 0.0) {
                return None;
            }
            e.add_log_barrier(sigma, &self.extend(&(-a), phase1, 1.0));
        }
        for q in &self.quads {
            let (sigma, dz, dense) = match q {
                Quad::Dense { q, a, b } => {
                    let qz = q * z;
                    (b - 0.5 * z.dot(&qz) - a.dot(&z) + s, -(qz + a), Some(q))
                }
                Quad::Ball { idx, r } => {
                    let mut dz = DVector::zeros(self.d);
                    let mut v = *r + s;
                    for &i in idx {
                        v -= z[i] * z[i];
                        dz[i] = -2.0 * z[i];
                    }
                    (v, dz, None)
                }
            };
            if !(sigma > 0.0) {
                return None;
            }
            e.add_log_barrier(sigma, &self.extend(&dz, phase1, 1.0));
            if let Some(h) = e.hess.as_mut() {
                match (q, dense) {
                    (_, Some(qm)) => {
                        let mut block = h.view_mut((0, 0), (self.d, self.d));
                        block += qm / sigma;
                    }
                    (Quad::Ball { idx, .. }, None) => {
                        for &i in idx {
                            h[(i, i)] += 2.0 / sigma;
                        }
                    }
                    _ => {}
                }
            }
        }
        for l in &self.logs {
            let arg = l.a.dot(&z) + l.b + s;
            if !(arg > 0.0) {
                return None;
            }
            let sigma = arg.ln() - l.lhs.dot(&z) - l.c + s;
            if !(sigma > 0.0) {
                return None;
            }
            let dz = &l.a / arg - &l.lhs;
            let dsig = self.extend(&dz, phase1, 1.0 / arg + 1.0);
            e.add_log_barrier(sigma, &dsig);
            if let Some(h) = e.hess.as_mut() {
                let a_ext = self.extend(&l.a, phase1, 1.0);
                h.ger(1.0 / (arg * arg * sigma), &a_ext, &a_ext, 1.0);
            }
        }
        if self.psd {
            let r = self.matrix_at(w, s);
            let (logdet, sinv) = logdet_and_inverse(&r)?;
            e.val -= logdet;
            let off = self.n;
            for (pi, terms) in self.basis.iter().enumerate() {
                let mut g = 0.0;
                for t in terms {
                    g += (t.coef * sinv[(t.j, t.i)]).re;
                }
                e.grad[off + pi] -= g;
            }
            if phase1 {
                e.grad[self.d] -= sinv.trace().re;
            }
            if let Some(h) = e.hess.as_mut() {
                for (pi, tp) in self.basis.iter().enumerate() {
                    for (qi, tq) in self.basis.iter().enumerate().skip(pi) {
                        let mut v = 0.0;
                        for a in tp {
                            for b in tq {
                                v += (a.coef * b.coef * sinv[(a.j, b.i)] * sinv[(b.j, a.i)]).re;
                            }
                        }
                        h[(off + pi, off + qi)] += v;
                        if qi != pi {
                            h[(off + qi, off + pi)] += v;
                        }
                    }
                }
                if phase1 {
                    let s2 = &sinv * &sinv;
                    for (pi, terms) in self.basis.iter().enumerate() {
                        let mut v = 0.0;
                        for t in terms {
                            v += (t.coef * s2[(t.j, t.i)]).re;
                        }
                        h[(off + pi, self.d)] += v;
                        h[(self.d, off + pi)] += v;
                    }
                    h[(self.d, self.d)] += sinv.norm_squared();
                }
            }
        }
        if phase1 {
            let mut unit = DVector::zeros(dim);
            unit[self.d] = 1.0;
            let floor = s + 1.0;
            if !(floor > 0.0) {
                return None;
            }
            e.add_log_barrier(floor, &unit);
            if let Some((centre, r2)) = &self.phase1_ball {
                let diff = &z - centre;
                let sigma = r2 - diff.norm_squared();
                if !(sigma > 0.0) {
                    return None;
                }
                e.add_log_barrier(sigma, &self.extend(&(&diff * -2.0), true, 0.0));
                if let Some(h) = e.hess.as_mut() {
                    for i in 0..self.d {
                        h[(i, i)] += 2.0 / sigma;
                    }
                }
            }
            for (_, a, b) in &self.obj_logs {
                let sigma = a.dot(&z) + b + s;
                if !(sigma > 0.0) {
                    return None;
                }
                e.add_log_barrier(sigma, &self.extend(a, true, 1.0));
            }
        }
        Some(e)
    }

    /// Objective of phase II, or the slack `s` in phase I.
    fn objective(&self, w: &DVector<f64>, phase1: bool, want_hess: bool) -> Option<Eval> {
        let dim = w.len();
        let mut e = Eval::zeros(dim, want_hess);
        if phase1 {
            e.val = w[self.d];
            e.grad[self.d] = 1.0;
            return Some(e);
        }
        let z = w.rows(0, self.d);
        e.val = self.p.objective.constant + self.obj_c.dot(&z);
        e.grad.copy_from(&self.obj_c);
        if let Some(q) = &self.obj_q {
            let qz = q * z;
            e.val += 0.5 * z.dot(&qz);
            e.grad += qz;
            if let Some(h) = e.hess.as_mut() {
                *h += q;
            }
        }
        for (wt, a, b) in &self.obj_logs {
            let arg = a.dot(&z) + b;
            if !(arg > 0.0) {
                return None;
            }
            e.val -= wt * arg.ln();
            e.grad.axpy(-wt / arg, a, 1.0);
            if let Some(h) = e.hess.as_mut() {
                h.ger(wt / (arg * arg), a, a, 1.0);
            }
        }
        Some(e)
    }

    fn merit(&self, w: &DVector<f64>, t: f64, phase1: bool) -> Option<f64> {
        let b = self.barrier(w, phase1, false)?;
        let f = self.objective(w, phase1, false)?;
        let v = t * f.val + b.val;
        v.is_finite().then_some(v)
    }

    fn eq_matrix(&self, phase1: bool) -> DMatrix<f64> {
        if phase1 {
            let mut a = DMatrix::zeros(self.eq_a.nrows(), self.d + 1);
            a.view_mut((0, 0), (self.eq_a.nrows(), self.d)).copy_from(&self.eq_a);
            a
        } else {
            self.eq_a.clone()
        }
    }

    /// Newton direction from the equality-constrained KKT system.
    fn newton_direction(&self, h: &DMatrix<f64>, g: &DVector<f64>, w: &DVector<f64>, phase1: bool) -> Option<DVector<f64>> {
        let dim = w.len();
        let a = self.eq_matrix(phase1);
        let p = a.nrows();
        let resid = if p > 0 { &a * w - &self.eq_b } else { DVector::zeros(0) };
        let scale = h.amax().max(1.0);
        for attempt in 0..4 {
            let mut k = DMatrix::zeros(dim + p, dim + p);
            k.view_mut((0, 0), (dim, dim)).copy_from(h);
            if attempt > 0 {
                let reg = scale * 1e-14 * 100f64.powi(attempt);
                for i in 0..dim {
                    k[(i, i)] += reg;
                }
            }
            if p > 0 {
                k.view_mut((dim, 0), (p, dim)).copy_from(&a);
                k.view_mut((0, dim), (dim, p)).copy_from(&a.transpose());
            }
            let mut rhs = DVector::zeros(dim + p);
            rhs.rows_mut(0, dim).copy_from(&(-g));
            if p > 0 {
                rhs.rows_mut(dim, p).copy_from(&(-&resid));
            }
            if let Some(sol) = k.lu().solve(&rhs) {
                if sol.iter().all(|v| v.is_finite()) {
                    return Some(sol.rows(0, dim).into_owned());
                }
            }
        }
        None
    }
}

/// Cholesky factorization of a Hermitian matrix with a strictly positive
/// real pivot test; returns `(log det R, R^-1)` or `None` if R is not
/// positive definite.
pub(crate) fn logdet_and_inverse(r: &CMatrix) -> Option<(f64, CMatrix)> {
    let m = r.nrows();
    let mut l = CMatrix::zeros(m, m);
    let mut logdet = 0.0;
    for j in 0..m {
        let mut d = r[(j, j)].re;
        for k in 0..j {
            d -= l[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        let ljj = d.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        logdet += 2.0 * ljj.ln();
        for i in j + 1..m {
            let mut v = r[(i, j)];
            for k in 0..j {
                v -= l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = v / ljj;
        }
    }
    let linv = l.solve_lower_triangular(&CMatrix::identity(m, m))?;
    Some((logdet, linv.adjoint() * linv))
}

#[derive(Debug)]
enum Centering {
    Converged,
    Stopped,
    Stalled,
    Failed,
}

struct Runner<'c, 'a> {
    c: &'c Compiled<'a>,
    cfg: SolverConfig,
    newton_steps: usize,
}

impl Runner<'_, '_> {
    /// Newton centering of `t f0 + barrier`. With `residual_target`, the
    /// scaled stationarity residual `||H step||_inf / t` must also fall
    /// below the target before the centering counts as converged.
    fn center(
        &mut self,
        w: &mut DVector<f64>,
        t: f64,
        phase1: bool,
        residual_target: Option<f64>,
        stop: &dyn Fn(&DVector<f64>) -> bool,
    ) -> Centering {
        const NEWTON_EPS: f64 = 1e-12;
        let mut stagnant = 0;
        for _ in 0..self.cfg.max_newton {
            let (Some(b), Some(f)) = (self.c.barrier(w, phase1, true), self.c.objective(w, phase1, true)) else {
                return Centering::Failed;
            };
            let g = &f.grad * t + &b.grad;
            let h = f.hess.expect("requested") * t + b.hess.expect("requested");
            let Some(step) = self.c.newton_direction(&h, &g, w, phase1) else {
                return Centering::Failed;
            };
            let h_step = &h * &step;
            let dec2 = step.dot(&h_step).max(0.0);
            let residual_ok = residual_target.is_none_or(|target| {
                h_step.amax() / t <= target * (1.0 + f.grad.amax())
            });
            if dec2 / 2.0 <= NEWTON_EPS && residual_ok {
                return Centering::Converged;
            }
            let f_now = t * f.val + b.val;
            let slope = g.dot(&step);
            let mut eta = 1.0;
            let mut accepted = None;
            for _ in 0..80 {
                let trial = &*w + &step * eta;
                if let Some(v) = self.c.merit(&trial, t, phase1) {
                    if v <= f_now + self.cfg.armijo * eta * slope {
                        accepted = Some((trial, v));
                        break;
                    }
                }
                eta *= self.cfg.backtrack;
            }
            match accepted {
                Some((next, v)) => {
                    *w = next;
                    self.newton_steps += 1;
                    if stop(w) {
                        return Centering::Stopped;
                    }
                    // Steps that no longer move the merit beyond rounding.
                    if dec2 < 1e-6 && f_now - v <= 1e-14 * f_now.abs().max(1.0) {
                        stagnant += 1;
                        if stagnant >= 3 {
                            return Centering::Stalled;
                        }
                    } else {
                        stagnant = 0;
                    }
                }
                None => {
                    // Rounding noise of the merit function near a centred point.
                    return if dec2 < 1e-6 { Centering::Stalled } else { Centering::Failed };
                }
            }
        }
        Centering::Stalled
    }
}

fn default_start(p: &ConvexProblem) -> Vec<f64> {
    let mut z = p.zeros();
    if p.matrix_dim > 0 {
        let m = p.matrix_dim as f64;
        let mut level = 1.0;
        for a in &p.constraints {
            match a {
                ConstraintAtom::TraceEq { value } => level = value / m,
                ConstraintAtom::TraceCap { cap } => level = f64::min(level, 0.5 * cap / m),
                _ => {}
            }
        }
        for i in 0..p.matrix_dim {
            z[p.vector_dim + i] = level;
        }
    }
    z
}

/// Radius of the phase I search ball, relative to `1 + |start|`.
const PHASE1_RADIUS: f64 = 100.0;

/// Solves `p` from the default starting point.
pub fn solve(p: &ConvexProblem, cfg: &SolverConfig) -> Result<Solution> {
    solve_from(p, cfg, None)
}

/// Solves `p`, starting from `start` when supplied. A phase I is run when
/// the start is not strictly feasible.
pub fn solve_from(p: &ConvexProblem, cfg: &SolverConfig, start: Option<&[f64]>) -> Result<Solution> {
    p.check()?;
    let mut c = Compiled::new(p);
    let mut z = dv(start.map_or_else(|| default_start(p), |s| s.to_vec()).as_slice());
    if z.len() != c.d {
        return Err(crate::IsacError::DimensionMismatch(format!("start has length {}, expected {}", z.len(), c.d)));
    }
    if c.eq_a.nrows() > 0 {
        let resid = &c.eq_a * &z - &c.eq_b;
        if resid.amax() > 0.0 {
            let fix = c
                .eq_a
                .clone()
                .svd(true, true)
                .solve(&resid, 1e-13)
                .map_err(|e| crate::IsacError::Numerical(e.to_string()))?;
            z -= fix;
        }
    }

    c.phase1_ball = Some((z.clone(), (PHASE1_RADIUS * (1.0 + z.norm())).powi(2)));
    let mut runner = Runner { c: &c, cfg: *cfg, newton_steps: 0 };
    let mut outer = 0;
    let strictly_feasible = c.barrier(&z, false, false).is_some() && c.objective(&z, false, false).is_some();
    if !strictly_feasible {
        match phase_one(&mut runner, &z, &mut outer) {
            Some(found) => z = found,
            None => return Ok(finish(p, &c, z, None, SolveStatus::Infeasible, outer, runner.newton_steps)),
        }
    }

    let nu = c.nu(false);
    let mut t = cfg.t0;
    let never = |_: &DVector<f64>| false;
    let mut status = SolveStatus::MaxIters;
    while outer < cfg.max_outer {
        outer += 1;
        let f_start = c.objective(&z, false, false).map_or(0.0, |e| e.val);
        let near_end = nu / t <= 10.0 * cfg.tol * (1.0 + f_start.abs());
        let target = near_end.then_some(0.1 * cfg.tol);
        match runner.center(&mut z, t, false, target, &never) {
            Centering::Failed => {
                status = SolveStatus::NumericalFailure;
                break;
            }
            Centering::Converged | Centering::Stalled | Centering::Stopped => {}
        }
        let f0 = c.objective(&z, false, false).map_or(f64::INFINITY, |e| e.val);
        if nu == 0.0 || nu / t <= cfg.tol * (1.0 + f0.abs()) {
            status = SolveStatus::Optimal;
            break;
        }
        t *= cfg.barrier_growth;
    }
    let duals = barrier_duals(&c, &z, t);
    let refined = refine_duals(p, z.as_slice(), &duals, 1e-5);
    let zs = z.as_slice();
    let g0 = super::kkt::objective_grad(p, zs);
    let (r_base, _) = residuals_with(p, zs, &g0, &duals);
    let (r_ref, _) = residuals_with(p, zs, &g0, &refined);
    let duals = if r_ref < r_base { refined } else { duals };
    let mut sol = finish(p, &c, z, Some(duals), status, outer, runner.newton_steps);
    if sol.status == SolveStatus::Optimal && !sol.kkt.within(cfg.tol) {
        log::debug!("barrier solve ended with residuals {:?}", sol.kkt);
        sol.status = SolveStatus::MaxIters;
    }
    Ok(sol)
}

fn phase_one(runner: &mut Runner<'_, '_>, z: &DVector<f64>, outer: &mut usize) -> Option<DVector<f64>> {
    let c = runner.c;
    let cfg = runner.cfg;
    let mut need: f64 = 0.0;
    for (a, b) in &c.lin {
        need = need.max(a.dot(z) - b);
    }
    for q in &c.quads {
        let v = match q {
            Quad::Dense { q, a, b } => 0.5 * z.dot(&(q * z)) + a.dot(z) - b,
            Quad::Ball { idx, r } => idx.iter().map(|&i| z[i] * z[i]).sum::<f64>() - r,
        };
        need = need.max(v);
    }
    for l in &c.logs {
        need = need.max(-(l.a.dot(z) + l.b));
    }
    for (_, a, b) in &c.obj_logs {
        need = need.max(-(a.dot(z) + b));
    }
    if c.psd {
        let (vals, _) = hermitian_eigen(&c.matrix_at(z, 0.0));
        need = need.max(-vals.last().copied().unwrap_or(0.0));
    }
    let mut w = DVector::zeros(c.d + 1);
    w.rows_mut(0, c.d).copy_from(z);
    w[c.d] = need.max(0.0) + 1.0;
    let mut tries = 0;
    while c.barrier(&w, true, false).is_none() {
        w[c.d] = 2.0 * w[c.d] + 1.0;
        tries += 1;
        if tries > 200 {
            return None;
        }
    }
    let margin = cfg.phase1_margin;
    let d = c.d;
    let done = move |w: &DVector<f64>| w[d] <= -margin;
    let nu = c.nu(true);
    let mut t = cfg.t0;
    while *outer < cfg.max_outer {
        *outer += 1;
        match runner.center(&mut w, t, true, None, &done) {
            Centering::Stopped => break,
            Centering::Failed => return None,
            _ => {}
        }
        if nu / t <= 1e-10 {
            break;
        }
        t *= cfg.barrier_growth;
    }
    let feasible = w[c.d] < 0.0 && c.barrier(&w.rows(0, c.d).into_owned(), false, false).is_some();
    feasible.then(|| w.rows(0, c.d).into_owned())
}

fn barrier_duals(c: &Compiled<'_>, z: &DVector<f64>, t: f64) -> Duals {
    let zs = z.rows(0, c.d);
    let mut out = vec![0.0; c.origin.len()];
    let mut psd = None;
    for (k, o) in c.origin.iter().enumerate() {
        out[k] = match *o {
            Origin::Lin(i) => {
                let (a, b) = &c.lin[i];
                1.0 / (t * (b - a.dot(&zs)))
            }
            Origin::Quad(i) => {
                let sigma = match &c.quads[i] {
                    Quad::Dense { q, a, b } => b - 0.5 * zs.dot(&(q * zs)) - a.dot(&zs),
                    Quad::Ball { idx, r } => r - idx.iter().map(|&j| zs[j] * zs[j]).sum::<f64>(),
                };
                1.0 / (t * sigma)
            }
            Origin::Log(i) => {
                let l = &c.logs[i];
                let sigma = (l.a.dot(&zs) + l.b).ln() - l.lhs.dot(&zs) - l.c;
                1.0 / (t * sigma)
            }
            Origin::Eq => 0.0,
            Origin::Psd => {
                psd = logdet_and_inverse(&c.matrix_at(z, 0.0)).map(|(_, inv)| inv / C64::new(t, 0.0));
                0.0
            }
        };
    }
    Duals { constraints: out, psd }
}

fn finish(
    p: &ConvexProblem,
    _c: &Compiled<'_>,
    z: DVector<f64>,
    duals: Option<Duals>,
    status: SolveStatus,
    outer: usize,
    newton: usize,
) -> Solution {
    let zv: Vec<f64> = z.iter().copied().collect();
    let duals = duals.unwrap_or(Duals { constraints: vec![0.0; p.constraints.len()], psd: None });
    let kkt = kkt_residuals(p, &zv, Some(&duals));
    let (vector, matrix) = p.split(&zv);
    Solution {
        objective: p.objective_value(&zv),
        z: zv,
        vector,
        matrix,
        status,
        kkt,
        duals,
        outer_iterations: outer,
        newton_steps: newton,
    }
}
