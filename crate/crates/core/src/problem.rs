//! Shared domain types: the equation being solved, run configuration, the
//! recorded iteration history and its terminal classification.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// Real-valued scalar function, shareable across threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A scalar equation `f(x) = 0` together with its analytic derivative.
///
/// The derivative is always supplied by the caller. Nothing in this crate
/// approximates it by differences, so evaluation counts stay meaningful.
#[derive(Clone)]
pub struct Problem {
    name: String,
    f: ScalarFn,
    df: ScalarFn,
}

impl Problem {
    pub fn new<F, D>(name: impl Into<String>, f: F, df: D) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_arcs(name, Arc::new(f), Arc::new(df))
    }

    pub fn from_arcs(name: impl Into<String>, f: ScalarFn, df: ScalarFn) -> Self {
        let name = name.into();
        assert!(!name.is_empty(), "problem name must be non-empty");
        Self { name, f, df }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Raw, uncounted evaluation of `f`.
    pub fn f(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    /// Raw, uncounted evaluation of `f'`.
    pub fn df(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    /// Returns a problem whose `f` and `f'` are both multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let f = Arc::clone(&self.f);
        let df = Arc::clone(&self.df);
        Self::new(
            format!("{}*{}", factor, self.name),
            move |x| factor * f(x),
            move |x| factor * df(x),
        )
    }
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem").field("name", &self.name).finish()
    }
}

/// Number of `f` and `f'` evaluations performed during one run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct EvalCounters {
    pub n_f: u64,
    pub n_df: u64,
}

impl EvalCounters {
    pub fn new() -> Self {
        Self::default()
    }

    /// Total number of function evaluations, `n_f + n_df`.
    pub fn nfe(&self) -> u64 {
        self.n_f + self.n_df
    }

    pub fn reset(&mut self) {
        *self = Self::default();
    }

    /// Charges one `f` evaluation that was performed outside [`evaluate_f`].
    pub(crate) fn charge_f(&mut self) {
        self.n_f += 1;
    }
}

/// Evaluates `f(x)` and charges one `f` evaluation.
///
/// Non-finite results are returned unchanged; the caller decides what they mean.
pub fn evaluate_f(problem: &Problem, x: f64, counters: &mut EvalCounters) -> f64 {
    counters.n_f += 1;
    problem.f(x)
}

/// Evaluates `f'(x)` and charges one derivative evaluation.
pub fn evaluate_df(problem: &Problem, x: f64, counters: &mut EvalCounters) -> f64 {
    counters.n_df += 1;
    problem.df(x)
}

/// Termination rules for an iteration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopCriteria {
    /// Converged once `|x_{n+1} - x_n| <= step_tol`.
    pub step_tol: f64,
    /// Converged once `|f(x_{n+1})| <= residual_tol`.
    pub residual_tol: f64,
    pub max_iter: usize,
    /// Diverged once `|x_n| > escape_radius`.
    pub escape_radius: f64,
}

impl StopCriteria {
    pub const DEFAULT_TOL: f64 = 1e-15;
    pub const DEFAULT_MAX_ITER: usize = 100;
    pub const DEFAULT_ESCAPE_RADIUS: f64 = 1e8;

    pub fn new(step_tol: f64, residual_tol: f64, max_iter: usize, escape_radius: f64) -> Result<Self> {
        let criteria = Self {
            step_tol,
            residual_tol,
            max_iter,
            escape_radius,
        };
        criteria.validate()?;
        Ok(criteria)
    }

    /// Same tolerance for step and residual, other fields at their defaults.
    pub fn with_tol(tol: f64) -> Result<Self> {
        Self::new(tol, tol, Self::DEFAULT_MAX_ITER, Self::DEFAULT_ESCAPE_RADIUS)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && !v.is_nan();
        if !positive(self.step_tol) {
            return Err(Error::InvalidCriteria(format!(
                "step_tol must be positive, got {}",
                self.step_tol
            )));
        }
        if !positive(self.residual_tol) {
            return Err(Error::InvalidCriteria(format!(
                "residual_tol must be positive, got {}",
                self.residual_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidCriteria("max_iter must be at least 1".into()));
        }
        if !positive(self.escape_radius) {
            return Err(Error::InvalidCriteria(format!(
                "escape_radius must be positive, got {}",
                self.escape_radius
            )));
        }
        Ok(())
    }
}

impl Default for StopCriteria {
    fn default() -> Self {
        Self {
            step_tol: Self::DEFAULT_TOL,
            residual_tol: Self::DEFAULT_TOL,
            max_iter: Self::DEFAULT_MAX_ITER,
            escape_radius: Self::DEFAULT_ESCAPE_RADIUS,
        }
    }
}

/// Iterates and the residuals recorded for them while the run was in progress.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub iterates: Vec<f64>,
    /// `residuals[i]` is `f(iterates[i])` as it was evaluated during the run.
    pub residuals: Vec<f64>,
    pub counters: EvalCounters,
}

impl Trace {
    pub(crate) fn start(x0: f64, fx0: f64) -> Self {
        Self {
            iterates: vec![x0],
            residuals: vec![fx0],
            counters: EvalCounters::default(),
        }
    }

    pub(crate) fn push(&mut self, x: f64, fx: f64) {
        self.iterates.push(x);
        self.residuals.push(fx);
    }

    pub fn len(&self) -> usize {
        self.iterates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.iterates.is_empty()
    }

    pub fn last(&self) -> f64 {
        *self.iterates.last().expect("trace always holds x0")
    }

    /// Signed errors `x_n - root` for every iterate.
    pub fn errors(&self, root: f64) -> Vec<f64> {
        self.iterates.iter().map(|x| x - root).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Status {
    Converged,
    Diverged,
    MaxIterReached,
    DerivativeBreakdown,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Converged => "Converged",
            Status::Diverged => "Diverged",
            Status::MaxIterReached => "MaxIterReached",
            Status::DerivativeBreakdown => "DerivativeBreakdown",
        }
    }

    pub fn is_converged(self) -> bool {
        self == Status::Converged
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Result of one iteration run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Outcome {
    pub status: Status,
    /// The final iterate.
    pub root: f64,
    pub iterations: usize,
    pub nfe: u64,
    pub trace: Trace,
}
