//! Haar-wavelet rule for indefinite integrals.
//!
//! Collocating a Haar series at the centres of `P = 2M` equal sub-intervals
//! (`M = 2^J1`, `J1` the maximum resolution level) reduces the integral to a
//! composite midpoint sum:
//!
//! ```text
//! ∫_a^b g(t) dt ≈ (b - a)/P · Σ_{k=1}^{P} g(a + (b - a)(k - 0.5)/P)
//! ```
//!
//! The rule is exact for affine `g` and second order otherwise.

use crate::error::{Error, Result};

/// Node configuration of the rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Resolution {
    /// Maximum resolution level `J1`, when built from a level.
    pub j1: Option<u32>,
    /// `M = 2^J1`, when built from a level.
    pub m: Option<usize>,
    /// Node count `P`.
    pub points: usize,
}

impl Resolution {
    pub fn from_level(j1: u32) -> Result<Self> {
        let points = resolution_points(j1)?;
        Ok(Self {
            j1: Some(j1),
            m: Some(points / 2),
            points,
        })
    }

    /// Arbitrary node count, not necessarily of the form `2^(J1+1)`.
    pub fn from_points(points: usize) -> Result<Self> {
        if points == 0 {
            return Err(Error::ZeroPoints);
        }
        Ok(Self {
            j1: None,
            m: None,
            points,
        })
    }
}

/// Node count `2 * 2^j1` for resolution level `j1`.
pub fn resolution_points(j1: u32) -> Result<usize> {
    j1.checked_add(1)
        .and_then(|shift| 1usize.checked_shl(shift))
        .ok_or(Error::ResolutionTooLarge(j1))
}

/// Relative position `(k - 0.5)/points` of node `k` (1-based) in `[0, 1]`.
#[inline]
pub(crate) fn node_fraction(k: usize, points: usize) -> f64 {
    (k as f64 - 0.5) / points as f64
}

/// `Σ_{k=1}^{P} g(a + h (k - 0.5)/P)`, accumulated left to right.
#[inline]
pub(crate) fn node_sum<G: FnMut(f64) -> f64>(mut g: G, a: f64, h: f64, points: usize) -> f64 {
    let mut sum = 0.0;
    for k in 1..=points {
        sum += g(a + h * node_fraction(k, points));
    }
    sum
}

/// Approximates `∫_a^b g(t) dt` with `points` equally spaced midpoint nodes.
///
/// Calls `g` exactly `points` times. Returns `0.0` when `a == b`.
pub fn haar_indefinite_integral<G>(g: G, a: f64, b: f64, points: usize) -> Result<f64>
where
    G: FnMut(f64) -> f64,
{
    if points == 0 {
        return Err(Error::ZeroPoints);
    }
    let h = b - a;
    let sum = node_sum(g, a, h, points);
    if h == 0.0 {
        return Ok(0.0);
    }
    Ok(h / points as f64 * sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_are_exact() {
        assert_eq!(haar_indefinite_integral(|_| 1.0, 2.0, 5.0, 4).unwrap(), 3.0);
    }

    #[test]
    fn identity_integrand() {
        for p in 1..=33 {
            let v = haar_indefinite_integral(|t| t, 0.0, 1.0, p).unwrap();
            assert!((v - 0.5).abs() <= 4.0 * f64::EPSILON, "P = {p}: {v}");
        }
    }

    #[test]
    fn quadratic_hand_sum() {
        // nodes 1/8, 3/8, 5/8, 7/8: (3/4)(1 + 9 + 25 + 49)/64 = 63/64
        let v = haar_indefinite_integral(|t| 3.0 * t * t, 0.0, 1.0, 4).unwrap();
        assert_eq!(v, 63.0 / 64.0);
        assert_eq!(v, 0.984375);
    }

    #[test]
    fn empty_interval_is_zero_and_still_samples() {
        let mut calls = 0;
        let v = haar_indefinite_integral(
            |t: f64| {
                calls += 1;
                t.exp()
            },
            1.5,
            1.5,
            6,
        )
        .unwrap();
        assert_eq!(v, 0.0);
        assert_eq!(calls, 6);
    }

    #[test]
    fn evaluation_count() {
        for p in [1, 2, 7, 16] {
            let mut calls = 0;
            haar_indefinite_integral(
                |t: f64| {
                    calls += 1;
                    t.sin()
                },
                0.0,
                2.0,
                p,
            )
            .unwrap();
            assert_eq!(calls, p);
        }
    }

    #[test]
    fn reversed_interval_flips_sign() {
        let fwd = haar_indefinite_integral(f64::exp, 0.0, 1.0, 8).unwrap();
        let rev = haar_indefinite_integral(f64::exp, 1.0, 0.0, 8).unwrap();
        assert!((fwd + rev).abs() < 1e-14);
    }

    #[test]
    fn zero_points_rejected() {
        assert_eq!(haar_indefinite_integral(|t| t, 0.0, 1.0, 0), Err(Error::ZeroPoints));
        assert_eq!(Resolution::from_points(0), Err(Error::ZeroPoints));
    }

    #[test]
    fn points_from_level() {
        assert_eq!(resolution_points(0).unwrap(), 2);
        assert_eq!(resolution_points(1).unwrap(), 4);
        assert_eq!(resolution_points(3).unwrap(), 16);
        let bits = usize::BITS;
        assert_eq!(resolution_points(bits - 2).unwrap(), 1usize << (bits - 1));
        assert_eq!(resolution_points(bits - 1), Err(Error::ResolutionTooLarge(bits - 1)));
        assert_eq!(resolution_points(bits + 4), Err(Error::ResolutionTooLarge(bits + 4)));
    }

    #[test]
    fn resolution_fields() {
        let r = Resolution::from_level(2).unwrap();
        assert_eq!(
            r,
            Resolution {
                j1: Some(2),
                m: Some(4),
                points: 8
            }
        );
        let r = Resolution::from_points(3).unwrap();
        assert_eq!((r.j1, r.m, r.points), (None, None, 3));
    }

    #[test]
    fn nodes_are_symmetric() {
        for p in 1..=40 {
            let mut nodes: Vec<f64> = (1..=p).map(|k| node_fraction(k, p)).collect();
            let mut mirrored: Vec<f64> = nodes.iter().map(|t| 1.0 - t).collect();
            nodes.sort_by(f64::total_cmp);
            mirrored.sort_by(f64::total_cmp);
            for (a, b) in nodes.iter().zip(&mirrored) {
                assert!((a - b).abs() <= f64::EPSILON, "P = {p}");
            }
        }
    }
}
