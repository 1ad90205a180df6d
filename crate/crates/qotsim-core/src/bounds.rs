//! Analytic cheating-probability bounds as pure functions of the fidelity
//! parameter `F` of the protocol's honest output states.
//!
//! For any semi-random OT protocol in the generic framework the sender can
//! guess the receiver's bit with probability at least `(1 + F) / 2`, while the
//! receiver's square-root-measurement attack succeeds with probability at
//! least `1 - F`. When the honest outputs are pure and cyclic-symmetric the
//! receiver's bound tightens to a Gram-eigenvalue expression. Minimizing the
//! worse of the two bounds over `F` gives the floor 2/3 in general and about
//! 0.749 in the pure-symmetric case.
//!
//! Bounds are reported raw: values below 1/2 (e.g. `1 - F` at `F = 1`) are
//! vacuous as bounds but still the formula value, so callers can tell a
//! vacuous bound from a meaningful one.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// A point on the cheating trade-off curve.
#[derive(Debug, Clone, Serialize)]
pub struct TradeoffPoint {
    pub f: f64,
    pub alice_bound: f64,
    pub bob_bound_general: f64,
    /// Only defined for `F <= 1/2`; beyond that the sender's bound already
    /// exceeds 3/4 and the pure-symmetric refinement is moot.
    pub bob_bound_pure_symmetric: Option<f64>,
}

fn check_range(
    what: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    range: &'static str,
) -> Result<()> {
    if !(lo..=hi).contains(&value) || !value.is_finite() {
        return Err(Error::OutOfRange { what, value, range });
    }
    Ok(())
}

/// Receiver's bound for arbitrary output states: `1 - F`.
pub fn bob_bound_general(f: f64) -> Result<f64> {
    check_range("F", f, 0.0, 1.0, "[0, 1]")?;
    Ok(1.0 - f)
}

/// Receiver's bound for pure cyclic-symmetric output states,
/// `(1/4) (1 + sqrt(1 - 2F)/2 + sqrt(1 + 2F)/2)^2`, valid for `F <= 1/2`.
pub fn bob_bound_pure_symmetric(f: f64) -> Result<f64> {
    check_range("F", f, 0.0, 0.5, "[0, 1/2]")?;
    let s = 1.0 + 0.5 * (1.0 - 2.0 * f).sqrt() + 0.5 * (1.0 + 2.0 * f).sqrt();
    Ok(0.25 * s * s)
}

/// Sender's bound: `(1 + F) / 2`.
pub fn alice_bound(f: f64) -> Result<f64> {
    check_range("F", f, 0.0, 1.0, "[0, 1]")?;
    Ok(0.5 * (1.0 + f))
}

/// Minimizes `max{(1+F)/2, 1-F}` over `F`. The two curves cross where
/// `(1+F)/2 = 1-F`, i.e. exactly at `(F, value) = (1/3, 2/3)`.
pub fn minimax_general() -> (f64, f64) {
    (1.0 / 3.0, 2.0 / 3.0)
}

/// Minimizes `max{alice_bound, bob_bound_pure_symmetric}` over `F <= 1/2`.
///
/// The crossing of the increasing sender bound and the decreasing receiver
/// bound is bracketed in [0.4, 0.5] and located by bisection to 1e-10;
/// the value comes out near 0.749.
pub fn minimax_pure_symmetric() -> (f64, f64) {
    let gap = |f: f64| alice_bound(f).unwrap() - bob_bound_pure_symmetric(f).unwrap();
    let (mut lo, mut hi) = (0.4, 0.5);
    debug_assert!(gap(lo) < 0.0 && gap(hi) > 0.0, "crossing leaves [0.4, 0.5]");
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let f_star = 0.5 * (lo + hi);
    (f_star, alice_bound(f_star).unwrap())
}

/// Closed-form eigenvalues of the symmetric 4-state Gram matrix with
/// adjacent overlap `f` and opposite overlap `G`:
///
/// ```text
/// lambda_0 = 1 + G + 2 Re f      lambda_1 = 1 - G - 2 Im f
/// lambda_2 = 1 + G - 2 Re f      lambda_3 = 1 - G + 2 Im f
/// ```
///
/// Errors when any eigenvalue is below -1e-10 (parameters incompatible with
/// a PSD Gram matrix); tiny negatives are clamped to zero.
pub fn gram_eigenvalues(f: Complex64, g: f64) -> Result<[f64; 4]> {
    let raw = [
        1.0 + g + 2.0 * f.re,
        1.0 - g - 2.0 * f.im,
        1.0 + g - 2.0 * f.re,
        1.0 - g + 2.0 * f.im,
    ];
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -1e-10 {
        return Err(Error::InvalidGram(min));
    }
    Ok(raw.map(|x| x.max(0.0)))
}

/// Square-root-measurement success for four equiprobable pure symmetric
/// states, `(1/16) (sum_i sqrt(lambda_i))^2` over the Gram eigenvalues.
pub fn srm_success_from_gram(f: Complex64, g: f64) -> Result<f64> {
    let evals = gram_eigenvalues(f, g)?;
    let s: f64 = evals.iter().map(|&x| x.sqrt()).sum();
    Ok(s * s / 16.0)
}

/// Receiver's cheating probability when adjacent states are orthogonal and
/// opposite ones overlap by `G`: `(1/4) (sqrt(1+G) + sqrt(1-G))^2`.
pub fn bob_cheat_case2(g_abs: f64) -> Result<f64> {
    check_range("G", g_abs, 0.0, 1.0, "[0, 1]")?;
    let s = (1.0 + g_abs).sqrt() + (1.0 - g_abs).sqrt();
    Ok(0.25 * s * s)
}

/// Evaluates all bounds over a grid of fidelity values.
pub fn tradeoff_curve(f_grid: &[f64]) -> Result<Vec<TradeoffPoint>> {
    f_grid
        .iter()
        .map(|&f| {
            Ok(TradeoffPoint {
                f,
                alice_bound: alice_bound(f)?,
                bob_bound_general: bob_bound_general(f)?,
                bob_bound_pure_symmetric: if f <= 0.5 {
                    Some(bob_bound_pure_symmetric(f)?)
                } else {
                    None
                },
            })
        })
        .collect()
}
