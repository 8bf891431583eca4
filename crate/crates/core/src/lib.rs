//! Linear programming by interior-point methods in which every Newton-step
//! linear system is solved by Gaussian belief propagation instead of direct
//! matrix inversion.
//!
//! The crate provides:
//!
//! - [`model`]: problem types, standard-form conversion and the shared
//!   vector/matrix values;
//! - [`gabp`]: the message-passing solver for symmetric linear systems and
//!   least-squares problems;
//! - [`convergence`]: dominance gaps, the rate parameter γ, the round bound
//!   `⌈log ε / log γ⌉` and the walk-summability spectral check;
//! - [`barrier`]: the log-barrier Newton solver and the affine-scaling
//!   variant;
//! - [`primaldual`]: the primal-dual path-following solver;
//! - [`oracle`]: independent dense reference solvers and brute-force vertex
//!   enumeration, used for cross-checks and as explicit fallback modes;
//! - [`io`]: the LP text grammar, trace serialization and the built-in demo
//!   problem;
//! - [`generate`]: seeded instance generators for tests, benchmarks and the
//!   cross-check command.

pub mod barrier;
pub mod convergence;
pub mod gabp;
pub mod generate;
pub mod io;
pub mod model;
pub mod oracle;
pub mod primaldual;

pub use barrier::{
    affine_scaling_solve, barrier_solve, find_strictly_feasible, line_search, newton_direction,
    BarrierConfig, BarrierSolution, IterateTrace, LinSolve, NewtonStep, SolveError, TraceRecord,
};
pub use convergence::{
    analyze, decomposition, dominance_gaps, gamma, gamma_local, is_diagonally_dominant,
    iteration_bound, spectral_condition, ConvergenceError, ConvergenceReport, IterationBound,
};
pub use gabp::{
    gabp_converged, gabp_infer, gabp_init, gabp_least_squares, gabp_round, gabp_solve, GabpError,
    GabpResult, GabpState, LsMode,
};
pub use io::{build_toy_problem, emit_lp, parse_lp, read_trace, write_trace, IoError};
pub use model::{
    embed_feasible_point, recover_original, to_standard_form, Constraint, DenseMatrix, LpProblem,
    ModelError, Provenance, Relation, Sense, SparseSymMatrix, StandardLp, VarOrigin, Vector,
};
pub use oracle::{dense_least_squares, dense_solve, vertex_enumerate, OracleError, VertexEnumeration};
pub use primaldual::{
    assemble_symmetric_kkt, kkt_residuals, pd_direction, pd_solve, PdConfig, PdDirection,
    PdIterate, PdLinSolve, PdSolution,
};
