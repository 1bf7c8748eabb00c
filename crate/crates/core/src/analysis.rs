//! Convergence diagnostics computed from a finished run.
//!
//! For a third-order method the errors `e_n = x_n - α` satisfy
//! `e_{n+1} ≈ C e_n³`. The Haar-Newton method on `N` nodes has
//! `C = C₂² - C₃/(4N²)` with `C_k = f⁽ᵏ⁾(α) / (k! f'(α))`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{Outcome, Status, Trace};

/// Errors used by [`coc`] must satisfy `COC_ERROR_FLOOR < |e| < COC_ERROR_CEILING`.
pub const COC_ERROR_FLOOR: f64 = 1e-13;
pub const COC_ERROR_CEILING: f64 = 1.0;

/// `e_n` used by [`empirical_error_constant`] must lie in this open window.
pub const CONSTANT_WINDOW: (f64, f64) = (1e-10, 1e-2);

/// `e_{n+1}` below this many ulps of `max(1, |root|)` counts as roundoff.
const ROUNDOFF_ULPS: f64 = 8.0;

/// Significant digits in printed roots.
pub const ROOT_DIGITS: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Computational order of convergence, NaN when no triple qualified.
    pub coc: f64,
    /// `|e_{n+1}| / |e_n|³`, NaN when no pair qualified.
    pub error_constant_empirical: f64,
    /// `C₂² - C₃/(4N²)`, NaN when `C₂`, `C₃` were not supplied.
    pub error_constant_theoretical: f64,
    pub usable_triples: usize,
}

impl ConvergenceReport {
    /// Diagnostics for `trace` measured against `root`.
    ///
    /// `constants` are the problem's `(C₂, C₃)` at the root together with the
    /// node count `N`; omit them when they are not known.
    pub fn new(trace: &Trace, root: f64, constants: Option<(f64, f64, usize)>) -> Self {
        let errors = trace.errors(root);
        let usable_triples = usable_triples(&errors);
        let coc = if trace.len() >= 4 {
            coc_from_errors(&errors).unwrap_or(f64::NAN)
        } else {
            f64::NAN
        };
        let error_constant_empirical = empirical_error_constant(trace, root).unwrap_or(f64::NAN);
        let error_constant_theoretical = constants
            .map(|(c2, c3, n)| theoretical_error_constant(c2, c3, n))
            .unwrap_or(f64::NAN);
        Self {
            coc,
            error_constant_empirical,
            error_constant_theoretical,
            usable_triples,
        }
    }
}

fn in_coc_window(e: f64) -> bool {
    let a = e.abs();
    a > COC_ERROR_FLOOR && a < COC_ERROR_CEILING
}

fn usable_triples(errors: &[f64]) -> usize {
    errors
        .windows(3)
        .filter(|w| w.iter().all(|&e| in_coc_window(e)))
        .count()
}

/// Computational order of convergence of `trace` towards `root`.
///
/// Uses the last triple `(e_{n-1}, e_n, e_{n+1})` whose errors all lie in
/// `(1e-13, 1)`: `ρ = ln|e_{n+1}/e_n| / ln|e_n/e_{n-1}|`.
pub fn coc(trace: &Trace, root: f64) -> Result<f64> {
    if trace.len() < 4 {
        return Err(Error::TraceTooShort {
            needed: 4,
            found: trace.len(),
        });
    }
    if !root.is_finite() {
        return Err(Error::NoUsableTriple);
    }
    coc_from_errors(&trace.errors(root))
}

/// [`coc`] on a raw error sequence.
pub fn coc_from_errors(errors: &[f64]) -> Result<f64> {
    let w = errors
        .windows(3)
        .rev()
        .find(|w| w.iter().all(|&e| in_coc_window(e)))
        .ok_or(Error::NoUsableTriple)?;
    let rho = (w[2] / w[1]).abs().ln() / (w[1] / w[0]).abs().ln();
    if rho.is_finite() {
        Ok(rho)
    } else {
        Err(Error::NoUsableTriple)
    }
}

/// Asymptotic error constant `C₂² - C₃/(4N²)` of the `N`-node Haar-Newton method.
pub fn theoretical_error_constant(c2: f64, c3: f64, n_points: usize) -> f64 {
    assert!(n_points >= 1, "node count must be positive");
    let n = n_points as f64;
    c2 * c2 - c3 / (4.0 * n * n)
}

/// Measured `|e_{n+1}| / |e_n|³` for the last pair with `e_n` in `(1e-10, 1e-2)`
/// and `e_{n+1}` above roundoff.
pub fn empirical_error_constant(trace: &Trace, root: f64) -> Result<f64> {
    if trace.len() < 2 {
        return Err(Error::TraceTooShort {
            needed: 2,
            found: trace.len(),
        });
    }
    if !root.is_finite() {
        return Err(Error::NoUsablePair);
    }
    let floor = ROUNDOFF_ULPS * f64::EPSILON * root.abs().max(1.0);
    empirical_constant_from_errors(&trace.errors(root), floor)
}

/// Pair search behind [`empirical_error_constant`], with an explicit roundoff floor for `e_{n+1}`.
pub fn empirical_constant_from_errors(errors: &[f64], roundoff_floor: f64) -> Result<f64> {
    let (lo, hi) = CONSTANT_WINDOW;
    errors
        .windows(2)
        .rev()
        .find(|w| {
            let (e, next) = (w[0].abs(), w[1].abs());
            e > lo && e < hi && next > roundoff_floor && next.is_finite()
        })
        .map(|w| w[1].abs() / w[0].abs().powi(3))
        .ok_or(Error::NoUsablePair)
}

/// Table cell for an outcome: the root to 15 significant digits when
/// converged, `Diverse` when it diverged or hit the iteration cap, and
/// `Breakdown` on a derivative breakdown.
pub fn classify(outcome: &Outcome) -> String {
    match outcome.status {
        Status::Converged => format_significant(outcome.root, ROOT_DIGITS),
        Status::Diverged | Status::MaxIterReached => "Diverse".to_string(),
        Status::DerivativeBreakdown => "Breakdown".to_string(),
    }
}

/// Formats `x` with `digits` significant digits, keeping trailing zeros.
///
/// Positional notation is used for decimal exponents in `[-4, digits)`,
/// scientific (`1.23e-21`) otherwise; this mirrors C's `%#.{digits}g`.
pub fn format_significant(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= digits as i32 {
        format!("{mantissa}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp) as usize;
        format!("{:.*}", decimals, x)
    }
}
