use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::problem::{dot, ConstraintAtom, ConvexProblem};
use crate::metrics::hermitian_eigen;
use crate::CMatrix;

/// Primal violation, stationarity residual and complementarity gap.
///
/// The dual residual is reported relative to `1 + ||grad f0||_inf` and the
/// gap relative to `1 + |f0|`; the primal residual is absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KktResiduals {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.primal.max(self.dual).max(self.gap)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.primal <= tol && self.dual <= tol && self.gap <= tol
    }
}

/// Lagrange multipliers, one per constraint atom (zero for `PsdCone`,
/// whose multiplier is the matrix `psd`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Duals {
    pub constraints: Vec<f64>,
    pub psd: Option<CMatrix>,
}

/// Value and gradient of constraint `k` written as `f(z) <= 0` or `h(z) = 0`.
/// Returns `None` for the PSD cone.
pub(crate) fn constraint_value_grad(p: &ConvexProblem, k: usize, z: &[f64]) -> Option<(f64, Vec<f64>)> {
    let d = p.dim();
    let lift_trace = || p.lift_matrix_coeffs(&p.layout().trace_coeffs(p.matrix_dim));
    Some(match &p.constraints[k] {
        ConstraintAtom::AffineIneq { a, b } | ConstraintAtom::AffineEq { a, b } => (dot(a, z) - b, a.clone()),
        ConstraintAtom::Ball { indices, radius_sq } => {
            let mut g = vec![0.0; d];
            let mut v = -radius_sq;
            for &i in indices {
                v += z[i] * z[i];
                g[i] += 2.0 * z[i];
            }
            (v, g)
        }
        ConstraintAtom::ConvexQuadIneq { q, a, b } => {
            let zv = DVector::from_column_slice(z);
            let qz = q * &zv;
            let v = 0.5 * zv.dot(&qz) + dot(a, z) - b;
            (v, qz.iter().zip(a).map(|(x, y)| x + y).collect())
        }
        ConstraintAtom::LogAffine { lhs, lhs_const, a, b } => {
            let arg = dot(a, z) + b;
            let v = dot(lhs, z) + lhs_const - if arg > 0.0 { arg.ln() } else { f64::NEG_INFINITY };
            let g = lhs.iter().zip(a).map(|(l, x)| l - x / arg).collect();
            (v, g)
        }
        ConstraintAtom::TraceCap { cap } => {
            let c = lift_trace();
            (dot(&c, z) - cap, c)
        }
        ConstraintAtom::TraceEq { value } => {
            let c = lift_trace();
            (dot(&c, z) - value, c)
        }
        ConstraintAtom::PsdCone => return None,
    })
}

pub(crate) fn is_equality(atom: &ConstraintAtom) -> bool {
    matches!(atom, ConstraintAtom::AffineEq { .. } | ConstraintAtom::TraceEq { .. })
}

pub(crate) fn objective_grad(p: &ConvexProblem, z: &[f64]) -> Vec<f64> {
    let o = &p.objective;
    let mut g = o.linear.clone();
    if let Some(q) = &o.quadratic {
        let qz = q * DVector::from_column_slice(z);
        g.iter_mut().zip(qz.iter()).for_each(|(a, b)| *a += b);
    }
    for t in &o.neg_log {
        let arg = dot(&t.a, z) + t.b;
        g.iter_mut().zip(&t.a).for_each(|(gi, ai)| *gi -= t.weight * ai / arg);
    }
    g
}

/// `Re Tr(Z E_p)` for every matrix parameter, lifted to full length.
fn psd_gradient(p: &ConvexProblem, zmat: &CMatrix) -> Vec<f64> {
    p.matrix_functional(zmat)
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Largest constraint violation at `z`.
pub fn primal_residual(p: &ConvexProblem, z: &[f64]) -> f64 {
    let mut worst: f64 = 0.0;
    for (k, atom) in p.constraints.iter().enumerate() {
        match constraint_value_grad(p, k, z) {
            Some((v, _)) if is_equality(atom) => worst = worst.max(v.abs()),
            Some((v, _)) => worst = worst.max(if v.is_nan() { f64::INFINITY } else { v.max(0.0) }),
            None => {
                if let (_, Some(r)) = p.split(z) {
                    let (vals, _) = hermitian_eigen(&r);
                    worst = worst.max(-vals.last().copied().unwrap_or(0.0));
                }
            }
        }
    }
    worst
}

/// KKT residuals of a candidate point. Without multipliers, they are
/// estimated by non-negative least squares over the active constraints.
pub fn kkt_residuals(p: &ConvexProblem, z: &[f64], duals: Option<&Duals>) -> KktResiduals {
    let primal = primal_residual(p, z);
    let g0 = objective_grad(p, z);
    let f0 = p.objective_value(z);
    let scale_d = 1.0 + inf_norm(&g0);
    let scale_g = 1.0 + if f0.is_finite() { f0.abs() } else { 0.0 };
    let (dual, gap) = match duals {
        Some(du) => residuals_with(p, z, &g0, du),
        None => estimated(p, z, &g0),
    };
    KktResiduals { primal, dual: dual / scale_d, gap: gap / scale_g }
}

/// Projector onto the null space of the equality rows.
fn equality_projector(p: &ConvexProblem) -> Option<DMatrix<f64>> {
    let rows: Vec<Vec<f64>> = (0..p.constraints.len())
        .filter(|&k| is_equality(&p.constraints[k]))
        .filter_map(|k| constraint_value_grad(p, k, &p.zeros()).map(|(_, g)| g))
        .collect();
    if rows.is_empty() {
        return None;
    }
    let d = p.dim();
    let a = DMatrix::from_fn(rows.len(), d, |i, j| rows[i][j]);
    let svd = a.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let tol = 1e-12 * svd.singular_values.max().max(1.0);
    let mut proj = DMatrix::identity(d, d);
    for (i, s) in svd.singular_values.iter().enumerate() {
        if *s > tol {
            let v = vt.row(i).transpose();
            proj -= &v * v.transpose();
        }
    }
    Some(proj)
}

fn project(proj: &Option<DMatrix<f64>>, v: DVector<f64>) -> DVector<f64> {
    match proj {
        Some(pm) => pm * v,
        None => v,
    }
}

pub(crate) fn residuals_with(p: &ConvexProblem, z: &[f64], g0: &[f64], du: &Duals) -> (f64, f64) {
    let mut r = DVector::from_column_slice(g0);
    let mut gap = 0.0;
    for (k, atom) in p.constraints.iter().enumerate() {
        let lam = du.constraints.get(k).copied().unwrap_or(0.0);
        if let Some((v, g)) = constraint_value_grad(p, k, z) {
            r.iter_mut().zip(&g).for_each(|(ri, gi)| *ri += lam * gi);
            if !is_equality(atom) {
                gap += lam * (-v);
            }
        }
    }
    if let (Some(zm), (_, Some(rm))) = (&du.psd, p.split(z)) {
        let pg = psd_gradient(p, zm);
        r.iter_mut().zip(&pg).for_each(|(ri, gi)| *ri -= gi);
        gap += (zm * rm).trace().re;
    }
    // Equality multipliers are recomputed by least squares so that a caller
    // may pass zeros for them.
    let r = project(&equality_projector(p), r);
    (r.amax(), gap.abs())
}

fn estimated(p: &ConvexProblem, z: &[f64], g0: &[f64]) -> (f64, f64) {
    let d = p.dim();
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut slacks: Vec<f64> = Vec::new();
    for (k, atom) in p.constraints.iter().enumerate() {
        if is_equality(atom) {
            continue;
        }
        match constraint_value_grad(p, k, z) {
            Some((v, g)) => {
                if v >= -1e-6 {
                    cols.push(g);
                    slacks.push((-v).max(0.0));
                }
            }
            None => {
                if let (_, Some(r)) = p.split(z) {
                    let (vals, vecs) = hermitian_eigen(&r);
                    let top = vals.first().copied().unwrap_or(0.0).max(1.0);
                    for (i, &lam) in vals.iter().enumerate() {
                        if lam <= 1e-6 * top {
                            let v = vecs.column(i).into_owned();
                            let vv = &v * v.adjoint();
                            let g: Vec<f64> = psd_gradient(p, &vv).iter().map(|x| -x).collect();
                            cols.push(g);
                            slacks.push(lam.max(0.0));
                        }
                    }
                }
            }
        }
    }
    let proj = equality_projector(p);
    let b = -project(&proj, DVector::from_column_slice(g0));
    if cols.is_empty() {
        return (b.amax(), 0.0);
    }
    let a = DMatrix::from_fn(d, cols.len(), |i, j| cols[j][i]);
    let a = match &proj {
        Some(pm) => pm * a,
        None => a,
    };
    let lam = nnls(&a, &b);
    let resid = &a * &lam - &b;
    let gap: f64 = lam.iter().zip(&slacks).map(|(l, s)| l * s).sum();
    (resid.amax(), gap)
}

/// Re-estimates the multipliers of nearly active constraints by least
/// squares on the stationarity condition.
///
/// Barrier multipliers `1/(t sigma)` lose relative accuracy in proportion
/// to `t` once a slack `sigma` is computed by cancellation; this keeps the
/// barrier values for inactive constraints and refits only the active face.
pub(crate) fn refine_duals(p: &ConvexProblem, z: &[f64], base: &Duals, active_tol: f64) -> Duals {
    let mut fixed = DVector::from_column_slice(&objective_grad(p, z));
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let mut owners: Vec<usize> = Vec::new();
    for (k, atom) in p.constraints.iter().enumerate() {
        if is_equality(atom) {
            continue;
        }
        if let Some((v, g)) = constraint_value_grad(p, k, z) {
            if -v <= active_tol {
                cols.push(g);
                owners.push(k);
            } else {
                let lam = base.constraints.get(k).copied().unwrap_or(0.0);
                fixed.iter_mut().zip(&g).for_each(|(r, gi)| *r += lam * gi);
            }
        }
    }
    let mut null_basis: Option<CMatrix> = None;
    let mut z_fixed: Option<CMatrix> = None;
    if let (Some(zb), (_, Some(r))) = (&base.psd, p.split(z)) {
        let (vals, vecs) = hermitian_eigen(&r);
        let top = vals.first().copied().unwrap_or(0.0).max(1.0);
        let null: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= active_tol * top).collect();
        let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] > active_tol * top).collect();
        // Barrier dual restricted to the range of R.
        let mut zf = CMatrix::zeros(r.nrows(), r.nrows());
        for &i in &keep {
            let v = vecs.column(i);
            let w = (v.adjoint() * zb * v)[(0, 0)];
            zf += &v * v.adjoint() * w;
        }
        let pg = psd_gradient(p, &zf);
        fixed.iter_mut().zip(&pg).for_each(|(a, b)| *a -= b);
        z_fixed = Some(zf);
        if !null.is_empty() {
            let basis = CMatrix::from_fn(r.nrows(), null.len(), |i, j| vecs[(i, null[j])]);
            let small = super::layout::HermitianLayout::new(null.len());
            for q in 0..small.n_params() {
                let mut e = vec![0.0; small.n_params()];
                e[q] = 1.0;
                let f = &basis * small.to_matrix(&e) * basis.adjoint();
                cols.push(psd_gradient(p, &f).iter().map(|x| -x).collect());
            }
            null_basis = Some(basis);
        }
    }
    let mut out = base.clone();
    if cols.is_empty() {
        return out;
    }
    let proj = equality_projector(p);
    let a = DMatrix::from_fn(p.dim(), cols.len(), |i, j| cols[j][i]);
    let a = match &proj {
        Some(pm) => pm * a,
        None => a,
    };
    let b = -project(&proj, fixed);
    let Ok(x) = a.svd(true, true).solve(&b, 1e-14) else {
        return out;
    };
    for (c, &k) in owners.iter().enumerate() {
        out.constraints[k] = x[c].max(0.0);
    }
    if let (Some(basis), Some(zf)) = (null_basis, z_fixed) {
        let k = basis.ncols();
        let small = super::layout::HermitianLayout::new(k);
        let params: Vec<f64> = x.iter().skip(owners.len()).copied().collect();
        let xm = small.to_matrix(&params);
        let xm = super::projection::psd_project(&xm).unwrap_or(xm);
        out.psd = Some(zf + &basis * xm * basis.adjoint());
    }
    out
}

/// Lawson-Hanson non-negative least squares: min ||A x - b|| s.t. x >= 0.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * (1.0 + a.amax()) * (1.0 + b.amax());
    for _ in 0..(3 * n + 10) {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = DMatrix::from_fn(a.nrows(), idx.len(), |r, c| a[(r, idx[c])]);
            let sol = sub.svd(true, true).solve(b, 1e-14).unwrap_or_else(|_| DVector::zeros(idx.len()));
            if sol.iter().all(|v| *v > 0.0) {
                for (c, &j) in idx.iter().enumerate() {
                    x[j] = sol[c];
                }
                break;
            }
            let mut alpha: f64 = 1.0;
            for (c, &j) in idx.iter().enumerate() {
                if sol[c] <= 0.0 {
                    alpha = alpha.min(x[j] / (x[j] - sol[c]));
                }
            }
            for (c, &j) in idx.iter().enumerate() {
                x[j] += alpha * (sol[c] - x[j]);
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
    }
    x
}
