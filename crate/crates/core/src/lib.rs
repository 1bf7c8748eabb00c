//! Newton-type root finders for scalar equations, including a third-order
//! variant that evaluates the integral in Newton's theorem with a Haar-wavelet
//! quadrature rule, plus convergence diagnostics and a comparison harness.
//!
//! ```
//! use haar_newton::{iterate, Method, Problem, Status, StopCriteria};
//!
//! let p = Problem::new("cos x - x", |x: f64| x.cos() - x, |x: f64| -x.sin() - 1.0);
//! let out = iterate(Method::haar_newton(), &p, 1.2, &StopCriteria::default());
//! assert_eq!(out.status, Status::Converged);
//! assert!((out.root - 0.739085133215161).abs() < 1e-12);
//! ```

pub mod analysis;
pub mod bench;
pub mod cli;
pub mod error;
pub mod methods;
pub mod problem;
pub mod quadrature;

pub use analysis::{classify, coc, empirical_error_constant, theoretical_error_constant, ConvergenceReport};
pub use bench::{builtin_suite, format_table, run_comparison, ComparisonTable, OutputFormat, SuiteEntry};
pub use error::{Error, Result};
pub use methods::{
    fs_step, haar_newton_step, iterate, klw_step, newton_step, oz_step, wf_step, DerivativeBreakdown, FsVariant, Method,
};
pub use problem::{evaluate_df, evaluate_f, EvalCounters, Outcome, Problem, Status, StopCriteria, Trace};
pub use quadrature::{haar_indefinite_integral, resolution_points, Resolution};
