use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::layout::HermitianLayout;
use crate::error::{IsacError, Result};
use crate::CMatrix;

/// Convex quadratic term `1/2 z^T Q z` over the full decision vector.
pub type Quadratic = DMatrix<f64>;

/// `-weight * log(a . z + b)`, a convex objective term with weight >= 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegLogTerm {
    pub weight: f64,
    pub a: Vec<f64>,
    pub b: f64,
}

/// `c . z + 1/2 z^T Q z + constant - sum_i w_i log(a_i . z + b_i)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub linear: Vec<f64>,
    pub quadratic: Option<Quadratic>,
    pub neg_log: Vec<NegLogTerm>,
    pub constant: f64,
}

/// Constraint atoms over `z = [u; params(R)]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ConstraintAtom {
    /// `a . z <= b`
    AffineIneq { a: Vec<f64>, b: f64 },
    /// `a . z = b`
    AffineEq { a: Vec<f64>, b: f64 },
    /// `sum_{i in indices} u_i^2 <= radius_sq`, indices into the vector block.
    Ball { indices: Vec<usize>, radius_sq: f64 },
    /// `1/2 z^T Q z + a . z <= b` with Q PSD.
    ConvexQuadIneq { q: Quadratic, a: Vec<f64>, b: f64 },
    /// `lhs . z + lhs_const <= log(a . z + b)`.
    LogAffine { lhs: Vec<f64>, lhs_const: f64, a: Vec<f64>, b: f64 },
    /// `R >= 0`.
    PsdCone,
    /// `Tr(R) <= cap`.
    TraceCap { cap: f64 },
    /// `Tr(R) = value`.
    TraceEq { value: f64 },
}

/// A convex program over one real vector block `u` (length `vector_dim`)
/// and one Hermitian block `R` (`matrix_dim` x `matrix_dim`), minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexProblem {
    pub vector_dim: usize,
    pub matrix_dim: usize,
    pub objective: Objective,
    pub constraints: Vec<ConstraintAtom>,
}

impl ConvexProblem {
    pub fn new(vector_dim: usize, matrix_dim: usize) -> Self {
        let d = vector_dim + matrix_dim * matrix_dim;
        ConvexProblem {
            vector_dim,
            matrix_dim,
            objective: Objective { linear: vec![0.0; d], quadratic: None, neg_log: Vec::new(), constant: 0.0 },
            constraints: Vec::new(),
        }
    }

    /// Length of the full decision vector.
    pub fn dim(&self) -> usize {
        self.vector_dim + self.matrix_dim * self.matrix_dim
    }

    pub fn layout(&self) -> HermitianLayout {
        HermitianLayout::new(self.matrix_dim)
    }

    /// Offset of the matrix parameters inside `z`.
    pub fn matrix_offset(&self) -> usize {
        self.vector_dim
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }

    /// Embeds matrix-block coefficients into a full-length vector.
    pub fn lift_matrix_coeffs(&self, coeffs: &[f64]) -> Vec<f64> {
        let mut out = self.zeros();
        out[self.vector_dim..].copy_from_slice(coeffs);
        out
    }

    /// Full-length coefficients of `Re Tr(C R)`.
    pub fn matrix_functional(&self, c: &CMatrix) -> Vec<f64> {
        self.lift_matrix_coeffs(&self.layout().linear_coeffs(c))
    }

    pub fn add(&mut self, atom: ConstraintAtom) -> &mut Self {
        self.constraints.push(atom);
        self
    }

    pub fn set_linear(&mut self, c: Vec<f64>) -> &mut Self {
        self.objective.linear = c;
        self
    }

    pub fn set_quadratic(&mut self, q: Quadratic) -> &mut Self {
        self.objective.quadratic = Some(q);
        self
    }

    pub fn add_neg_log(&mut self, weight: f64, a: Vec<f64>, b: f64) -> &mut Self {
        self.objective.neg_log.push(NegLogTerm { weight, a, b });
        self
    }

    /// Splits a full decision vector into the vector block and the matrix.
    pub fn split(&self, z: &[f64]) -> (DVector<f64>, Option<CMatrix>) {
        let u = DVector::from_column_slice(&z[..self.vector_dim]);
        let r = (self.matrix_dim > 0).then(|| self.layout().to_matrix(&z[self.vector_dim..]));
        (u, r)
    }

    /// Assembles a full decision vector from its blocks.
    pub fn join(&self, u: &[f64], r: Option<&CMatrix>) -> Vec<f64> {
        let mut z = self.zeros();
        z[..self.vector_dim].copy_from_slice(u);
        if let Some(r) = r {
            z[self.vector_dim..].copy_from_slice(&self.layout().to_params(r));
        }
        z
    }

    /// Objective value at `z`, `+inf` outside the log domain.
    pub fn objective_value(&self, z: &[f64]) -> f64 {
        let o = &self.objective;
        let mut v = o.constant + dot(&o.linear, z);
        if let Some(q) = &o.quadratic {
            let zv = DVector::from_column_slice(z);
            v += 0.5 * zv.dot(&(q * &zv));
        }
        for t in &o.neg_log {
            let arg = dot(&t.a, z) + t.b;
            if arg <= 0.0 {
                return f64::INFINITY;
            }
            v -= t.weight * arg.ln();
        }
        v
    }

    /// Checks dimensions and PSD-ness of every quadratic coefficient.
    pub fn check(&self) -> Result<()> {
        let d = self.dim();
        let bad = |what: String| Err(IsacError::MalformedProblem(what));
        if self.objective.linear.len() != d {
            return bad(format!("objective has {} coefficients, expected {d}", self.objective.linear.len()));
        }
        if let Some(q) = &self.objective.quadratic {
            check_quadratic(q, d, "objective")?;
        }
        for t in &self.objective.neg_log {
            if t.a.len() != d || t.weight < 0.0 {
                return bad("objective log term has wrong length or negative weight".into());
            }
        }
        for (k, c) in self.constraints.iter().enumerate() {
            match c {
                ConstraintAtom::AffineIneq { a, .. } | ConstraintAtom::AffineEq { a, .. } => {
                    if a.len() != d {
                        return bad(format!("constraint {k}: {} coefficients, expected {d}", a.len()));
                    }
                }
                ConstraintAtom::Ball { indices, radius_sq } => {
                    if indices.iter().any(|&i| i >= self.vector_dim) || *radius_sq < 0.0 {
                        return bad(format!("constraint {k}: ball index outside the vector block"));
                    }
                }
                ConstraintAtom::ConvexQuadIneq { q, a, .. } => {
                    if a.len() != d {
                        return bad(format!("constraint {k}: {} coefficients, expected {d}", a.len()));
                    }
                    check_quadratic(q, d, &format!("constraint {k}"))?;
                }
                ConstraintAtom::LogAffine { lhs, a, .. } => {
                    if lhs.len() != d || a.len() != d {
                        return bad(format!("constraint {k}: log-affine coefficient length"));
                    }
                }
                ConstraintAtom::PsdCone | ConstraintAtom::TraceCap { .. } | ConstraintAtom::TraceEq { .. } => {
                    if self.matrix_dim == 0 {
                        return bad(format!("constraint {k}: matrix atom without a matrix block"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Pretty JSON dump for failure triage.
    pub fn to_debug_json(&self) -> String {
        serde_json::to_string_pretty(self).unwrap_or_else(|e| format!("{{\"error\": \"{e}\"}}"))
    }
}

fn check_quadratic(q: &Quadratic, d: usize, what: &str) -> Result<()> {
    if q.nrows() != d || q.ncols() != d {
        return Err(IsacError::MalformedProblem(format!("{what}: quadratic is {}x{}, expected {d}x{d}", q.nrows(), q.ncols())));
    }
    let asym = (q - q.transpose()).amax();
    let scale = q.amax().max(1.0);
    if asym > 1e-10 * scale {
        return Err(IsacError::MalformedProblem(format!("{what}: quadratic is not symmetric")));
    }
    let min_eig = q.clone().symmetric_eigenvalues().min();
    if min_eig < -1e-8 * scale {
        return Err(IsacError::MalformedProblem(format!("{what}: quadratic has eigenvalue {min_eig:.3e}")));
    }
    Ok(())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
