//! A small convex engine: problems over one real vector block and one
//! Hermitian matrix block, solved by a log-barrier interior-point method.

mod kkt;
mod layout;
mod problem;
mod projection;
mod solver;

pub use kkt::{kkt_residuals, primal_residual, Duals, KktResiduals};
pub use layout::HermitianLayout;
pub use problem::{ConstraintAtom, ConvexProblem, NegLogTerm, Objective, Quadratic};
pub use projection::{project_capped_simplex, psd_project, psd_trace_project};
pub use solver::{solve, solve_from, Solution, SolveStatus, SolverConfig};
