//! Fixtures shared by the criterion benchmarks.

use vikit_core::harness::table1;
use vikit_core::problems::{initial_points, make_example1, make_example2, InitKind, RandomSpec};
use vikit_core::{ProblemInstance, Scheme, SolverConfig};

pub const EX1_SEED: u64 = 7;

pub fn example1(n: usize) -> ProblemInstance {
    make_example1(&RandomSpec::new(n, EX1_SEED)).expect("example 1 builds")
}

pub fn example2() -> ProblemInstance {
    make_example2(101).expect("example 2 builds")
}

/// Published settings for `scheme` on `problem`, started from `init`.
pub fn config(problem: &ProblemInstance, scheme: Scheme, init: InitKind, max_iter: usize) -> SolverConfig {
    let params = table1(scheme, problem.lipschitz).expect("preset");
    let (x0, x1) = initial_points(problem, init).expect("initial points");
    SolverConfig::new(params, x0, x1, max_iter)
}
