//! Log-barrier interior-point solver for small smooth convex programs whose
//! nonlinear parts are nonnegative-weighted exponentials of affine forms and
//! sums of squared affine forms.

mod barrier;
mod program;

pub use barrier::{phase1_feasible, solve, SolveStatus, SolverReport, SolverSettings};
pub use program::{check_derivatives, Affine, Constraint, ConvexFunction, ConvexProgram, ExpTerm};
