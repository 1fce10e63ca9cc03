//! Inertial Mann-type extragradient solvers for variational inequalities
//! `VI(C, A)` constrained to the fixed-point set of a demicontractive map.
//!
//! ```
//! use vikit_core::{problems, harness, solve, Scheme, SolverConfig};
//!
//! let problem = problems::make_example2(101).unwrap();
//! let (x0, x1) = problems::initial_points(&problem, problems::InitKind::TSquared).unwrap();
//! let params = harness::table1(Scheme::Imsegm, problem.lipschitz).unwrap();
//! let trace = solve(&problem, &SolverConfig::new(params, x0, x1, 50)).unwrap();
//! assert!(trace.error_ratio().unwrap() < 0.1);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algorithms;
pub mod harness;
pub mod matrix;
pub mod operators;
pub mod problems;
pub mod projections;
pub mod space;
pub mod stepsize;

pub use algorithms::{
    solve, solve_with_hook, AlgorithmError, ConvergenceTrace, IterateState, Parameters, Scheme, Sequence,
    SolveError, SolverConfig, TraceRow,
};
pub use operators::{OperatorError, OperatorSpec};
pub use problems::{ProblemError, ProblemInstance};
pub use projections::{FeasibleSet, ProjectionError};
pub use space::{Space, SpaceElement, SpaceError};
pub use stepsize::{StepError, StepPolicy};

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error(transparent)]
    Projection(#[from] ProjectionError),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Step(#[from] StepError),
    #[error(transparent)]
    Algorithm(#[from] AlgorithmError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Harness(#[from] harness::HarnessError),
}
