//! Problem files, convergence-rate classification and command reports behind the CLI.

mod problem;
mod rate;
mod report;

pub use problem::{
    load_point, load_problem, parse_problem, read_problem, LoadedProblem, MethodName, OptionsSpec, PointSpec, ProblemFile,
    LOAD_PROBES,
};
pub use rate::{classify_rate, RateClass, RateVerdict, USABLE_FLOOR};
pub use report::{
    default_multiplier, error_exit_code, newton_manifold, run_report, Command, DerivSummary, PointChoice, Report, RunOptions,
    ScheduleName, SolveSummary, Status, DERIV_POINTS, HESSIAN_TOL, JACOBIAN_TOL,
};
