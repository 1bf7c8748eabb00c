//! Newton-type iteration steps and the driver that runs them.
//!
//! Every step takes the current iterate and returns the next one, charging its
//! `f` and `f'` evaluations to the supplied counters. Costs per step:
//!
//! | method      | f | f'    | total |
//! |-------------|---|-------|-------|
//! | Newton      | 1 | 1     | 2     |
//! | WF, FS, OZ  | 1 | 2     | 3     |
//! | KLW         | 2 | 1     | 3     |
//! | Haar-Newton | 1 | 1 + P | 2 + P |

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::error::Error;
use crate::problem::{evaluate_df, evaluate_f, EvalCounters, Outcome, Problem, Status, StopCriteria, Trace};
use crate::quadrature;

/// Node count used by the Haar-Newton method unless stated otherwise (`M = 1`).
pub const DEFAULT_HAAR_POINTS: usize = 2;

/// Raised by a step when `f'` vanishes or is non-finite where it is needed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("derivative breakdown: f' is zero or non-finite at a required point")]
pub struct DerivativeBreakdown;

pub type StepResult = std::result::Result<f64, DerivativeBreakdown>;

/// Inner point used by the Frontini-Sormani step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum FsVariant {
    /// `x - 2 f/f'`, the inner point as it is usually quoted for this comparison.
    AsPrinted,
    /// `x - f/(2 f')`, the classical midpoint method.
    #[default]
    StandardMidpoint,
}

impl FsVariant {
    pub fn label(self) -> &'static str {
        match self {
            FsVariant::AsPrinted => "as-printed",
            FsVariant::StandardMidpoint => "standard-midpoint",
        }
    }
}

impl FromStr for FsVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "as-printed" => Ok(FsVariant::AsPrinted),
            "standard-midpoint" => Ok(FsVariant::StandardMidpoint),
            other => Err(format!(
                "unknown FS variant `{other}` (expected as-printed or standard-midpoint)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Newton,
    /// Weerakoon-Fernando, trapezoidal Newton.
    Wf,
    /// Frontini-Sormani, midpoint Newton.
    Fs(FsVariant),
    /// Özban, harmonic-mean Newton.
    Oz,
    /// Kou-Li-Wang.
    Klw,
    /// Newton's theorem with the integral replaced by the Haar rule on `points` nodes.
    HaarNewton {
        points: usize,
    },
}

impl Method {
    /// The five third-order methods in comparison-table order.
    pub fn standard_lineup() -> Vec<Method> {
        vec![
            Method::Wf,
            Method::Fs(FsVariant::default()),
            Method::Oz,
            Method::Klw,
            Method::haar_newton(),
        ]
    }

    pub fn haar_newton() -> Method {
        Method::HaarNewton {
            points: DEFAULT_HAAR_POINTS,
        }
    }

    /// Evaluations of `f` plus `f'` charged by one step.
    pub fn cost_per_step(self) -> u64 {
        match self {
            Method::Newton => 2,
            Method::Wf | Method::Fs(_) | Method::Oz | Method::Klw => 3,
            Method::HaarNewton { points } => 2 + points as u64,
        }
    }

    /// Short label: `newton`, `wf`, `fs`, `oz`, `klw`, `new`.
    pub fn tag(self) -> &'static str {
        match self {
            Method::Newton => "newton",
            Method::Wf => "wf",
            Method::Fs(_) => "fs",
            Method::Oz => "oz",
            Method::Klw => "klw",
            Method::HaarNewton { .. } => "new",
        }
    }

    pub fn step(self, problem: &Problem, x: f64, counters: &mut EvalCounters) -> StepResult {
        let fx = evaluate_f(problem, x, counters);
        self.step_from(problem, x, fx, counters)
    }

    /// One step when `f(x)` is already known (and already charged).
    fn step_from(self, problem: &Problem, x: f64, fx: f64, counters: &mut EvalCounters) -> StepResult {
        match self {
            Method::Newton => newton_from(problem, x, fx, counters),
            Method::Wf => wf_from(problem, x, fx, counters),
            Method::Fs(variant) => fs_from(problem, x, fx, counters, variant),
            Method::Oz => oz_from(problem, x, fx, counters),
            Method::Klw => klw_from(problem, x, fx, counters),
            Method::HaarNewton { points } => haar_newton_from(problem, x, fx, counters, points),
        }
    }
}

/// Labels are `tag` plus qualifiers for non-default settings, e.g. `fs-printed` or `new-p4`.
impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Method::Fs(FsVariant::AsPrinted) => f.write_str("fs-printed"),
            Method::HaarNewton { points } if points != DEFAULT_HAAR_POINTS => write!(f, "new-p{points}"),
            m => f.write_str(m.tag()),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let method = match s {
            "newton" => Method::Newton,
            "wf" => Method::Wf,
            "fs" | "fs-mid" => Method::Fs(FsVariant::StandardMidpoint),
            "fs-printed" => Method::Fs(FsVariant::AsPrinted),
            "oz" => Method::Oz,
            "klw" => Method::Klw,
            "new" => Method::haar_newton(),
            other => {
                let points = other
                    .strip_prefix("new-p")
                    .and_then(|p| p.parse::<usize>().ok())
                    .filter(|&p| p >= 1)
                    .ok_or_else(|| Error::UnknownMethod(other.to_string()))?;
                Method::HaarNewton { points }
            }
        };
        Ok(method)
    }
}

#[inline]
fn usable(d: f64) -> bool {
    d != 0.0 && d.is_finite()
}

#[inline]
fn checked_df(problem: &Problem, x: f64, counters: &mut EvalCounters) -> StepResult {
    let d = evaluate_df(problem, x, counters);
    if usable(d) {
        Ok(d)
    } else {
        Err(DerivativeBreakdown)
    }
}

/// Classical Newton: `x - f(x)/f'(x)`.
pub fn newton_step(problem: &Problem, x: f64, counters: &mut EvalCounters) -> StepResult {
    Method::Newton.step(problem, x, counters)
}

fn newton_from(problem: &Problem, x: f64, fx: f64, counters: &mut EvalCounters) -> StepResult {
    let dfx = checked_df(problem, x, counters)?;
    Ok(x - fx / dfx)
}

/// Trapezoidal Newton: `x - 2 f(x)/(f'(z) + f'(x))` with `z` the Newton iterate.
pub fn wf_step(problem: &Problem, x: f64, counters: &mut EvalCounters) -> StepResult {
    Method::Wf.step(problem, x, counters)
}

fn wf_from(problem: &Problem, x: f64, fx: f64, counters: &mut EvalCounters) -> StepResult {
    let dfx = checked_df(problem, x, counters)?;
    let z = x - fx / dfx;
    let denom = evaluate_df(problem, z, counters) + dfx;
    if !usable(denom) {
        return Err(DerivativeBreakdown);
    }
    Ok(x - 2.0 * fx / denom)
}

/// Midpoint-type step `x - f(x)/f'(y)`.
///
/// `AsPrinted` takes `y = x - 2 f(x)/f'(x)`; `StandardMidpoint` takes
/// `y = x - f(x)/(2 f'(x))`.
pub fn fs_step(problem: &Problem, x: f64, counters: &mut EvalCounters, variant: FsVariant) -> StepResult {
    Method::Fs(variant).step(problem, x, counters)
}

fn fs_from(problem: &Problem, x: f64, fx: f64, counters: &mut EvalCounters, variant: FsVariant) -> StepResult {
    let dfx = checked_df(problem, x, counters)?;
    let d = fx / dfx;
    // The midpoint offset must stay `d * 0.5` so that it matches the single-node Haar step bit for bit.
    let inner = match variant {
        FsVariant::AsPrinted => x - 2.0 * d,
        FsVariant::StandardMidpoint => x + (-d) * 0.5,
    };
    let dfy = checked_df(problem, inner, counters)?;
    Ok(x - fx / dfy)
}

/// Harmonic-mean Newton: `x - f(x)/2 · (1/f'(x) + 1/f'(z))`.
pub fn oz_step(problem: &Problem, x: f64, counters: &mut EvalCounters) -> StepResult {
    Method::Oz.step(problem, x, counters)
}

fn oz_from(problem: &Problem, x: f64, fx: f64, counters: &mut EvalCounters) -> StepResult {
    let dfx = checked_df(problem, x, counters)?;
    let z = x - fx / dfx;
    let dfz = checked_df(problem, z, counters)?;
    Ok(x - fx / 2.0 * (1.0 / dfx + 1.0 / dfz))
}

/// Kou-Li-Wang step `x - (f(x + f(x)/f'(x)) - f(x))/f'(x)`.
pub fn klw_step(problem: &Problem, x: f64, counters: &mut EvalCounters) -> StepResult {
    Method::Klw.step(problem, x, counters)
}

fn klw_from(problem: &Problem, x: f64, fx: f64, counters: &mut EvalCounters) -> StepResult {
    let dfx = checked_df(problem, x, counters)?;
    let y = x + fx / dfx;
    let fy = evaluate_f(problem, y, counters);
    Ok(x - (fy - fx) / dfx)
}

/// Haar-Newton step.
///
/// With `d = f(x)/f'(x)` the integral in Newton's theorem over `[x, x - d]` is
/// replaced by the `points`-node Haar rule, giving
/// `x - P f(x) / Σ_k f'(x - d (k - 0.5)/P)`.
pub fn haar_newton_step(problem: &Problem, x: f64, counters: &mut EvalCounters, points: usize) -> StepResult {
    Method::HaarNewton { points }.step(problem, x, counters)
}

fn haar_newton_from(problem: &Problem, x: f64, fx: f64, counters: &mut EvalCounters, points: usize) -> StepResult {
    assert!(points >= 1, "Haar-Newton needs at least one node");
    let dfx = checked_df(problem, x, counters)?;
    let d = fx / dfx;
    let mut finite = true;
    let sum = quadrature::node_sum(
        |t| {
            let v = evaluate_df(problem, t, counters);
            finite &= v.is_finite();
            v
        },
        x,
        -d,
        points,
    );
    if !finite || !usable(sum) {
        return Err(DerivativeBreakdown);
    }
    Ok(x - points as f64 * fx / sum)
}

/// Runs `method` from `x0` until `criteria` stops it.
///
/// The residual `f(x_{n+1})` is evaluated once and serves both the stopping
/// test and the next step, so each iteration costs exactly
/// [`Method::cost_per_step`]. The residual of the final iterate is recorded in
/// the trace but not charged.
pub fn iterate(method: Method, problem: &Problem, x0: f64, criteria: &StopCriteria) -> Outcome {
    let mut counters = EvalCounters::new();
    if !x0.is_finite() {
        let trace = Trace::start(x0, f64::NAN);
        return finish(Status::Diverged, trace, counters);
    }

    let mut x = x0;
    let mut fx = evaluate_f(problem, x0, &mut counters);
    let mut trace = Trace::start(x0, fx);

    loop {
        let next = match method.step_from(problem, x, fx, &mut counters) {
            Ok(next) => next,
            Err(DerivativeBreakdown) => return finish(Status::DerivativeBreakdown, trace, counters),
        };
        let f_next = problem.f(next);
        trace.push(next, f_next);

        if !next.is_finite() || next.abs() > criteria.escape_radius || !f_next.is_finite() {
            return finish(Status::Diverged, trace, counters);
        }
        if (next - x).abs() <= criteria.step_tol || f_next.abs() <= criteria.residual_tol {
            return finish(Status::Converged, trace, counters);
        }
        if trace.len() > criteria.max_iter {
            return finish(Status::MaxIterReached, trace, counters);
        }

        // f_next is the first evaluation of the next step.
        counters.charge_f();
        x = next;
        fx = f_next;
    }
}

fn finish(status: Status, mut trace: Trace, counters: EvalCounters) -> Outcome {
    trace.counters = counters;
    Outcome {
        status,
        root: trace.last(),
        iterations: trace.len() - 1,
        nfe: counters.nfe(),
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quad() -> Problem {
        Problem::new("x^2-4", |x| x * x - 4.0, |x| 2.0 * x)
    }

    fn linear() -> Problem {
        Problem::new("x", |x| x, |_| 1.0)
    }

    fn cos_minus_x() -> Problem {
        Problem::new("f2", |x: f64| x.cos() - x, |x: f64| -x.sin() - 1.0)
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn newton_examples() {
        let mut c = EvalCounters::new();
        assert!(rel(newton_step(&quad(), 3.0, &mut c).unwrap(), 13.0 / 6.0) < 1e-15);
        assert_eq!(c, EvalCounters { n_f: 1, n_df: 1 });
        assert_eq!(newton_step(&linear(), 7.0, &mut c).unwrap(), 0.0);
        assert_eq!(newton_step(&quad(), 2.0, &mut c).unwrap(), 2.0);
    }

    #[test]
    fn wf_examples() {
        let mut c = EvalCounters::new();
        assert!(rel(wf_step(&quad(), 3.0, &mut c).unwrap(), 63.0 / 31.0) < 1e-15);
        assert_eq!(c, EvalCounters { n_f: 1, n_df: 2 });
        assert_eq!(wf_step(&quad(), -2.0, &mut c).unwrap(), -2.0);
    }

    #[test]
    fn fs_examples() {
        let mut c = EvalCounters::new();
        assert_eq!(fs_step(&quad(), 3.0, &mut c, FsVariant::AsPrinted).unwrap(), 1.125);
        assert_eq!(c, EvalCounters { n_f: 1, n_df: 2 });
        let mid = fs_step(&quad(), 3.0, &mut c, FsVariant::StandardMidpoint).unwrap();
        assert!(rel(mid, 63.0 / 31.0) < 1e-15);
        for v in [FsVariant::AsPrinted, FsVariant::StandardMidpoint] {
            assert_eq!(fs_step(&quad(), 2.0, &mut c, v).unwrap(), 2.0);
        }
    }

    #[test]
    fn oz_examples() {
        let mut c = EvalCounters::new();
        assert!(rel(oz_step(&quad(), 3.0, &mut c).unwrap(), 313.0 / 156.0) < 1e-15);
        assert_eq!(c, EvalCounters { n_f: 1, n_df: 2 });
        assert_eq!(oz_step(&quad(), 2.0, &mut c).unwrap(), 2.0);
    }

    #[test]
    fn klw_examples() {
        let mut c = EvalCounters::new();
        assert!(rel(klw_step(&quad(), 3.0, &mut c).unwrap(), 443.0 / 216.0) < 1e-15);
        assert_eq!(c, EvalCounters { n_f: 2, n_df: 1 });
        assert_eq!(klw_step(&quad(), 2.0, &mut c).unwrap(), 2.0);
    }

    #[test]
    fn haar_examples() {
        let mut c = EvalCounters::new();
        assert!(rel(haar_newton_step(&quad(), 3.0, &mut c, 2).unwrap(), 63.0 / 31.0) < 1e-15);
        assert_eq!(c, EvalCounters { n_f: 1, n_df: 3 });
        for p in [1, 2, 3, 8] {
            assert_eq!(haar_newton_step(&quad(), 2.0, &mut c, p).unwrap(), 2.0);
        }
        let mut c = EvalCounters::new();
        haar_newton_step(&quad(), 3.0, &mut c, 5).unwrap();
        assert_eq!(c.nfe(), 7);
    }

    #[test]
    fn breakdown_on_flat_derivative() {
        let flat = Problem::new("x^2+1", |x| x * x + 1.0, |x| 2.0 * x);
        let mut c = EvalCounters::new();
        for m in [
            Method::Newton,
            Method::Wf,
            Method::Fs(FsVariant::AsPrinted),
            Method::Fs(FsVariant::StandardMidpoint),
            Method::Oz,
            Method::Klw,
            Method::haar_newton(),
        ] {
            assert_eq!(m.step(&flat, 0.0, &mut c), Err(DerivativeBreakdown), "{m}");
        }
        let nan_slope = Problem::new("nan", |x| x, |_| f64::NAN);
        assert_eq!(newton_step(&nan_slope, 1.0, &mut c), Err(DerivativeBreakdown));
    }

    #[test]
    fn wf_breakdown_on_cancelling_slopes() {
        let odd = Problem::new("sign", |x| x + 1.0, |x| if x < 0.0 { -1.0 } else { 1.0 });
        let mut c = EvalCounters::new();
        // z = 1 - 2 = -1, so f'(z) + f'(x) = 0
        assert_eq!(wf_step(&odd, 1.0, &mut c), Err(DerivativeBreakdown));
    }

    #[test]
    fn labels_round_trip() {
        for m in [
            Method::Newton,
            Method::Wf,
            Method::Fs(FsVariant::AsPrinted),
            Method::Fs(FsVariant::StandardMidpoint),
            Method::Oz,
            Method::Klw,
            Method::haar_newton(),
            Method::HaarNewton { points: 4 },
            Method::HaarNewton { points: 1 },
        ] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
        assert_eq!(
            "fs-mid".parse::<Method>().unwrap(),
            Method::Fs(FsVariant::StandardMidpoint)
        );
        assert_eq!("fs".parse::<Method>().unwrap().to_string(), "fs");
        assert!(matches!("halley".parse::<Method>(), Err(Error::UnknownMethod(_))));
        assert!("new-p0".parse::<Method>().is_err());
        assert_eq!(
            "standard-midpoint".parse::<FsVariant>(),
            Ok(FsVariant::StandardMidpoint)
        );
        assert!("midpoint".parse::<FsVariant>().is_err());
    }

    #[test]
    fn iterate_affine_newton() {
        let out = iterate(Method::Newton, &linear(), 1.0, &StopCriteria::default());
        assert_eq!(out.status, Status::Converged);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.root, 0.0);
        assert_eq!(out.nfe, 2);
        assert_eq!(out.trace.iterates, vec![1.0, 0.0]);
        assert_eq!(out.trace.residuals, vec![1.0, 0.0]);
    }

    #[test]
    fn iterate_f2_haar() {
        let out = iterate(Method::haar_newton(), &cos_minus_x(), 1.2, &StopCriteria::default());
        assert_eq!(out.status, Status::Converged);
        assert!((out.root - 0.739085133215161).abs() < 1e-12);
        // reported: 4 iterations; the stopping rule differs, so allow ±2
        assert!(out.iterations.abs_diff(4) <= 2);
        assert_eq!(out.nfe, 4 * out.iterations as u64);
    }

    #[test]
    fn iterate_f2_wf() {
        let out = iterate(Method::Wf, &cos_minus_x(), 1.2, &StopCriteria::default());
        assert_eq!(out.status, Status::Converged);
        assert!((out.root - 0.739085133215161).abs() < 1e-12);
        assert!(out.iterations.abs_diff(4) <= 2);
        assert_eq!(out.nfe, 3 * out.iterations as u64);
    }

    #[test]
    fn iterate_reports_breakdown() {
        let flat = Problem::new("x^2+1", |x| x * x + 1.0, |x| 2.0 * x);
        let out = iterate(Method::Newton, &flat, 0.0, &StopCriteria::default());
        assert_eq!(out.status, Status::DerivativeBreakdown);
        assert_eq!(out.iterations, 0);
        assert_eq!(out.nfe, 2);
    }

    #[test]
    fn iterate_escape_and_cap() {
        // Newton on arctan from 3 overshoots geometrically.
        let atan = Problem::new("f3", f64::atan, |x: f64| 1.0 / (1.0 + x * x));
        let out = iterate(Method::Newton, &atan, 3.0, &StopCriteria::default());
        assert_eq!(out.status, Status::Diverged);
        assert!(out.root.abs() > 1e8 || !out.root.is_finite());

        let tight = StopCriteria::new(1e-300, 1e-300, 3, 1e8).unwrap();
        let out = iterate(Method::Newton, &cos_minus_x(), 100.0, &tight);
        assert_eq!(out.status, Status::MaxIterReached);
        assert_eq!(out.iterations, 3);
        assert_eq!(out.nfe, 6);

        let out = iterate(Method::Newton, &cos_minus_x(), f64::NAN, &StopCriteria::default());
        assert_eq!(out.status, Status::Diverged);
        assert_eq!(out.iterations, 0);
    }

    #[test]
    fn trace_records_residuals_as_evaluated() {
        let p = cos_minus_x();
        let out = iterate(Method::Oz, &p, 0.5, &StopCriteria::default());
        assert_eq!(out.trace.iterates.len(), out.trace.residuals.len());
        assert_eq!(out.iterations, out.trace.len() - 1);
        for (x, r) in out.trace.iterates.iter().zip(&out.trace.residuals) {
            assert_eq!(p.f(*x).to_bits(), r.to_bits());
        }
        assert_eq!(out.trace.counters.nfe(), out.nfe);
    }
}
