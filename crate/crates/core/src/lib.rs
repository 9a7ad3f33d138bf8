//! Global minimization of a fixed-charge quartic by canonical duality.
//!
//! The primal problem is
//!
//! ```text
//! min  1/2 x^T A x - c^T x + 1/2 (1/2 x^T B x - alpha)^2 - f^T v
//! s.t. v in {0,1}^n,  -v <= x <= v
//! ```
//!
//! [`solve`] maximizes a concave dual function over the cone where
//! `G = A + sigma0 B + 2 Diag(sigma1)` is positive definite, recovers
//! `x = G^-1 c` and `v = [f + sigma1 > 0]`, and certifies the result when the
//! primal and dual values coincide. [`decoupled`] solves diagonal instances
//! in closed form and [`oracle`] enumerates all binary `v` for
//! cross-checking.

pub mod cli;
pub mod decoupled;
pub mod dual;
pub mod error;
pub mod fixtures;
pub mod format;
pub mod instance;
pub mod linalg;
pub mod oracle;
pub mod solver;

pub use decoupled::{
    decoupled_candidates, enumerate_critical_points, theorem5_solve, CriticalPoint,
    DecoupledCandidates, DecoupledSolution,
};
pub use dual::{
    build_g, dual_derivatives, dual_value, in_s_plus, in_s_reduced, positive_part_selector,
    recover_primal, reduced_dual_derivatives, reduced_dual_value, sigma2_star, DualDerivatives,
    DualPoint, ReducedDualPoint,
};
pub use error::{Error, Result};
pub use format::{instance_digest, load_instance, ProblemFile};
pub use instance::{
    check_binary_feasible, check_relaxed_feasible, evaluate_primal, validate_instance,
    PrimalPoint, ProblemInstance,
};
pub use linalg::{cholesky_pd_check, eigen_summary, pseudo_solve, EigenSummary, SymmetricMatrix};
pub use oracle::{brute_force_solve, minimize_over_box, primal_gradient_x, OracleConfig, OracleResult};
pub use solver::{
    solve, solve_with_observer, uniqueness_flags, verify_kkt, Certificate, KktReport,
    SolveObserver, SolveReport, SolverConfig, UniquenessFlags,
};
