//! Reference solvers that share no code with the interior-point engine.
//!
//! `first_order` handles any `ConvexProblem` by an augmented Lagrangian
//! whose subproblems are minimized with accelerated projected gradient over
//! the simple sets (balls and the PSD cone). `psd_part` and
//! `psd_part_capped` project onto the PSD cone through the matrix sign
//! function, without an eigendecomposition.

use isac_core::convex::{ConstraintAtom, ConvexProblem, HermitianLayout};
use isac_core::{CMatrix, C64};
use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Below this argument the logarithm is replaced by its quadratic expansion.
const LOG_FLOOR: f64 = 1e-9;

fn ext_log(s: f64) -> (f64, f64) {
    if s >= LOG_FLOOR {
        (s.ln(), 1.0 / s)
    } else {
        let d = s - LOG_FLOOR;
        (LOG_FLOOR.ln() + d / LOG_FLOOR - d * d / (2.0 * LOG_FLOOR * LOG_FLOOR), 1.0 / LOG_FLOOR - d / (LOG_FLOOR * LOG_FLOOR))
    }
}

fn dot(a: &[f64], z: &[f64]) -> f64 {
    a.iter().zip(z).map(|(x, y)| x * y).sum()
}

enum Con {
    Ineq(Box<dyn Fn(&[f64]) -> (f64, Vec<f64>)>),
    Eq(Box<dyn Fn(&[f64]) -> (f64, Vec<f64>)>),
}

struct Model {
    d: usize,
    vdim: usize,
    m: usize,
    /// Parameter scaling that turns the Frobenius norm into the Euclidean one.
    scale: Vec<f64>,
    balls: Vec<(Vec<usize>, f64)>,
    psd: bool,
    objective: Box<dyn Fn(&[f64]) -> (f64, Vec<f64>)>,
    cons: Vec<Con>,
}

fn quad(q: &DMatrix<f64>, z: &[f64]) -> (f64, Vec<f64>) {
    let zv = DVector::from_column_slice(z);
    let qz = q * &zv;
    (0.5 * zv.dot(&qz), qz.iter().copied().collect())
}

impl Model {
    fn new(p: &ConvexProblem) -> Self {
        let d = p.vector_dim + p.matrix_dim * p.matrix_dim;
        let layout = HermitianLayout::new(p.matrix_dim);
        let mut scale = vec![1.0; d];
        for i in 0..p.matrix_dim {
            for j in i + 1..p.matrix_dim {
                scale[p.vector_dim + layout.re_index(i, j)] = 2f64.sqrt();
                scale[p.vector_dim + layout.im_index(i, j).unwrap()] = 2f64.sqrt();
            }
        }
        let obj = p.objective.clone();
        let objective = Box::new(move |z: &[f64]| {
            let mut v = dot(&obj.linear, z) + obj.constant;
            let mut g = obj.linear.clone();
            if let Some(q) = &obj.quadratic {
                let (qv, qg) = quad(q, z);
                v += qv;
                g.iter_mut().zip(qg).for_each(|(a, b)| *a += b);
            }
            for t in &obj.neg_log {
                let (l, dl) = ext_log(dot(&t.a, z) + t.b);
                v -= t.weight * l;
                g.iter_mut().zip(&t.a).for_each(|(a, b)| *a -= t.weight * dl * b);
            }
            (v, g)
        });
        let mut cons = Vec::new();
        let mut balls = Vec::new();
        let mut psd = false;
        let vdim = p.vector_dim;
        let m = p.matrix_dim;
        let trace: Vec<f64> =
            (0..d).map(|i| if i >= vdim && i < vdim + m { 1.0 } else { 0.0 }).collect();
        for c in &p.constraints {
            match c.clone() {
                ConstraintAtom::AffineIneq { a, b } => {
                    cons.push(Con::Ineq(Box::new(move |z: &[f64]| (dot(&a, z) - b, a.clone()))))
                }
                ConstraintAtom::AffineEq { a, b } => {
                    cons.push(Con::Eq(Box::new(move |z: &[f64]| (dot(&a, z) - b, a.clone()))))
                }
                ConstraintAtom::Ball { indices, radius_sq } => balls.push((indices, radius_sq.sqrt())),
                ConstraintAtom::ConvexQuadIneq { q, a, b } => cons.push(Con::Ineq(Box::new(move |z: &[f64]| {
                    let (qv, mut g) = quad(&q, z);
                    g.iter_mut().zip(&a).for_each(|(x, y)| *x += y);
                    (qv + dot(&a, z) - b, g)
                }))),
                ConstraintAtom::LogAffine { lhs, lhs_const, a, b } => {
                    cons.push(Con::Ineq(Box::new(move |z: &[f64]| {
                        let (l, dl) = ext_log(dot(&a, z) + b);
                        let g = lhs.iter().zip(&a).map(|(x, y)| x - dl * y).collect();
                        (dot(&lhs, z) + lhs_const - l, g)
                    })))
                }
                ConstraintAtom::PsdCone => psd = true,
                ConstraintAtom::TraceCap { cap } => {
                    let t = trace.clone();
                    cons.push(Con::Ineq(Box::new(move |z: &[f64]| (dot(&t, z) - cap, t.clone()))))
                }
                ConstraintAtom::TraceEq { value } => {
                    let t = trace.clone();
                    cons.push(Con::Eq(Box::new(move |z: &[f64]| (dot(&t, z) - value, t.clone()))))
                }
            }
        }
        Model { d, vdim, m, scale, balls, psd, objective, cons }
    }

    fn to_z(&self, w: &[f64]) -> Vec<f64> {
        w.iter().zip(&self.scale).map(|(a, s)| a / s).collect()
    }

    fn to_w(&self, z: &[f64]) -> Vec<f64> {
        z.iter().zip(&self.scale).map(|(a, s)| a * s).collect()
    }

    fn project(&self, w: &mut [f64]) {
        for (idx, r) in &self.balls {
            let norm = idx.iter().map(|&i| w[i] * w[i]).sum::<f64>().sqrt();
            if norm > *r {
                idx.iter().for_each(|&i| w[i] *= r / norm);
            }
        }
        if self.psd && self.m > 0 {
            let z = self.to_z(w);
            let theta = psd_clip_params(&z[self.vdim..], self.m);
            let wt = self.to_w(&[vec![0.0; self.vdim], theta].concat());
            w[self.vdim..].copy_from_slice(&wt[self.vdim..]);
        }
    }

    /// Augmented Lagrangian value and gradient in w-coordinates.
    fn lagrangian(&self, w: &[f64], lam: &[f64], rho: f64) -> (f64, Vec<f64>) {
        let z = self.to_z(w);
        let (mut v, mut g) = (self.objective)(&z);
        for (c, &l) in self.cons.iter().zip(lam) {
            match c {
                Con::Ineq(f) => {
                    let (gv, gg) = f(&z);
                    let s = (l + rho * gv).max(0.0);
                    v += (s * s - l * l) / (2.0 * rho);
                    g.iter_mut().zip(gg).for_each(|(a, b)| *a += s * b);
                }
                Con::Eq(f) => {
                    let (hv, hg) = f(&z);
                    v += l * hv + 0.5 * rho * hv * hv;
                    g.iter_mut().zip(hg).for_each(|(a, b)| *a += (l + rho * hv) * b);
                }
            }
        }
        let gw = g.iter().zip(&self.scale).map(|(a, s)| a / s).collect();
        (v, gw)
    }

    fn violation(&self, z: &[f64]) -> Vec<f64> {
        self.cons
            .iter()
            .map(|c| match c {
                Con::Ineq(f) => f(z).0,
                Con::Eq(f) => f(z).0,
            })
            .collect()
    }

    fn max_violation(&self, z: &[f64]) -> f64 {
        self.cons
            .iter()
            .zip(self.violation(z))
            .map(|(c, v)| match c {
                Con::Ineq(_) => v.max(0.0),
                Con::Eq(_) => v.abs(),
            })
            .fold(0.0, f64::max)
    }
}

/// Minimizes the augmented Lagrangian over the simple sets (FISTA with
/// backtracking and adaptive restart).
fn inner(model: &Model, w0: &[f64], lam: &[f64], rho: f64, tol: f64, max_iter: usize) -> Vec<f64> {
    let mut x = w0.to_vec();
    model.project(&mut x);
    let mut y = x.clone();
    let mut t: f64 = 1.0;
    let mut lip = 1.0;
    let mut fx = model.lagrangian(&x, lam, rho).0;
    for _ in 0..max_iter {
        let (fy, gy) = model.lagrangian(&y, lam, rho);
        let mut next;
        loop {
            next = y.iter().zip(&gy).map(|(a, g)| a - g / lip).collect::<Vec<f64>>();
            model.project(&mut next);
            let diff: Vec<f64> = next.iter().zip(&y).map(|(a, b)| a - b).collect();
            let bound = fy + dot(&gy, &diff) + 0.5 * lip * dot(&diff, &diff);
            if model.lagrangian(&next, lam, rho).0 <= bound + 1e-15 * fy.abs().max(1.0) || lip > 1e14 {
                break;
            }
            lip *= 2.0;
        }
        let fnext = model.lagrangian(&next, lam, rho).0;
        let step: f64 = next.iter().zip(&y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        if fnext > fx {
            // Restart the momentum.
            t = 1.0;
            y = x.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        let beta = (t - 1.0) / t_next;
        y = next.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
        x = next;
        fx = fnext;
        t = t_next;
        lip *= 0.9;
        if step * lip < tol {
            break;
        }
    }
    x
}

pub struct OracleResult {
    pub objective: f64,
    pub violation: f64,
}

/// Solves `p` from the point `z0` (need not be feasible).
pub fn first_order(p: &ConvexProblem, z0: &[f64]) -> OracleResult {
    let model = Model::new(p);
    assert_eq!(z0.len(), model.d);
    let mut w = model.to_w(z0);
    let mut lam = vec![0.0; model.cons.len()];
    let mut rho = 10.0;
    let mut prev_viol = f64::INFINITY;
    for outer in 0..200 {
        let tol = (1e-4 / (1.0 + outer as f64)).max(1e-11);
        w = inner(&model, &w, &lam, rho, tol, 20_000);
        let z = model.to_z(&w);
        let vals = model.violation(&z);
        for ((l, c), v) in lam.iter_mut().zip(&model.cons).zip(&vals) {
            *l = match c {
                Con::Ineq(_) => (*l + rho * v).max(0.0),
                Con::Eq(_) => *l + rho * v,
            };
        }
        let viol = model.max_violation(&z);
        if viol > 0.25 * prev_viol {
            rho = (rho * 4.0).min(1e7);
        }
        prev_viol = viol;
        if viol < 1e-10 && outer > 10 {
            break;
        }
    }
    let z = model.to_z(&w);
    OracleResult { objective: (model.objective)(&z).0, violation: model.max_violation(&z) }
}

/// PSD part of a Hermitian matrix given by layout parameters, computed on
/// the real symmetric embedding [[A, -B], [B, A]].
fn psd_clip_params(theta: &[f64], m: usize) -> Vec<f64> {
    let layout = HermitianLayout::new(m);
    let r = layout.to_matrix(theta);
    let mut e = DMatrix::zeros(2 * m, 2 * m);
    for i in 0..m {
        for j in 0..m {
            let v = r[(i, j)];
            e[(i, j)] = v.re;
            e[(i + m, j + m)] = v.re;
            e[(i + m, j)] = v.im;
            e[(i, j + m)] = -v.im;
        }
    }
    let eig = SymmetricEigen::new(e);
    let mut lam = eig.eigenvalues.clone();
    lam.iter_mut().for_each(|v| *v = v.max(0.0));
    let plus = &eig.eigenvectors * DMatrix::from_diagonal(&lam) * eig.eigenvectors.transpose();
    let out = CMatrix::from_fn(m, m, |i, j| C64::new(plus[(i, j)], plus[(i + m, j)]));
    layout.to_params(&out)
}

/// sign(H) by the scaled Newton iteration X <- (g X + (g X)^{-1}) / 2.
fn matrix_sign(h: &CMatrix) -> CMatrix {
    let n = h.nrows();
    let mut x = h.clone();
    for _ in 0..100 {
        let inv = x.clone().try_inverse().expect("nonsingular input");
        let det = x.determinant().norm();
        let g = det.powf(-1.0 / n as f64);
        let next = (&x * C64::new(g, 0.0) + inv * C64::new(1.0 / g, 0.0)) * C64::new(0.5, 0.0);
        let delta = (&next - &x).norm();
        x = next;
        if delta < 1e-15 * x.norm() {
            break;
        }
    }
    x
}

/// argmin ||X - H||_F over X >= 0, as (H + H sign(H)) / 2.
pub fn psd_part(h: &CMatrix) -> CMatrix {
    let s = matrix_sign(h);
    let x = (h + h * s) * C64::new(0.5, 0.0);
    (&x + x.adjoint()) * C64::new(0.5, 0.0)
}

/// argmin ||X - H||_F over X >= 0, Tr X <= cap. The trace multiplier tau
/// gives X = psd_part(H - tau I); tau is found by bisection.
pub fn psd_part_capped(h: &CMatrix, cap: f64) -> CMatrix {
    let n = h.nrows();
    let shifted = |tau: f64| psd_part(&(h - CMatrix::identity(n, n) * C64::new(tau, 0.0)));
    let free = shifted(0.0);
    if free.trace().re <= cap {
        return free;
    }
    let (mut lo, mut hi) = (0.0, h.norm() + cap);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if shifted(mid).trace().re > cap {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    shifted(0.5 * (lo + hi))
}
