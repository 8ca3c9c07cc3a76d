//! Closed-form couplings and kernel eigenvalues of the continuum limit.
//!
//! In the scaled large-`n` limit the pair interaction becomes the integral
//! kernel `e^{-a|x-y|}/(2a)` on the unit square (with an image term
//! `-e^{-a(x+y)}/(2a)` for the zero start). Two numbers per model control the
//! growth-rate bounds:
//!
//! * the mean coupling `k(a) = (a + e^{-a} - 1)/a^3`, respectively
//!   `k2(a) = (1 + 2a - (2 - e^{-a})^2)/(2a^3)`, which is the double integral
//!   of the kernel and drives the lower (mean-field) bound;
//! * the largest kernel eigenvalue `lambda0 = 1/(a^2 (1 + y0^2))`, which
//!   drives the upper bound. `y0` is the smallest positive root of
//!   `y tan(ay/2) = 1` (stationary) or `tan(ay) + y = 0` (zero start),
//!   solved here on the pole-free forms `y sin(ay/2) - cos(ay/2)` and
//!   `sin(ay) + y cos(ay)`.
//!
//! Small `a` hits catastrophic cancellation in the closed forms, so below
//! `a = 1e-3` both couplings switch to their Taylor series; large `a` admits
//! the asymptotic expansions checked by [`asymptotic_check`].

use crate::ou::InitCondition;
use crate::roots::brent;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("range parameter `a` must be finite and > 0, got {0}")]
    InvalidRange(f64),
    #[error("eigenfunction argument {u} outside [0, {a}]")]
    ArgumentOutsideDomain { u: f64, a: f64 },
    #[error("eigenvalue bracket failed for a = {a} ({model:?}): {detail}")]
    BracketFailure {
        a: f64,
        model: InitCondition,
        detail: String,
    },
}

fn check_range(a: f64) -> Result<(), SpectralError> {
    if a.is_finite() && a > 0.0 {
        Ok(())
    } else {
        Err(SpectralError::InvalidRange(a))
    }
}

/// Switch point between closed forms and their small-`a` series.
const SERIES_CUTOFF: f64 = 1e-3;

/// Mean kernel coupling `k(a) = (a + e^{-a} - 1)/a^3` (stationary model).
///
/// The numerator loses all significance for small `a` (it is `a^2/2 + ...`),
/// so below the cutoff the Taylor series is used instead.
pub fn k_coupling(a: f64) -> Result<f64, SpectralError> {
    check_range(a)?;
    if a < SERIES_CUTOFF {
        // (a + e^{-a} - 1)/a^3 = 1/(2a) - 1/6 + a/24 - a^2/120 + a^3/720 - ...
        Ok(1.0 / (2.0 * a) - 1.0 / 6.0 + a / 24.0 - a * a / 120.0 + a * a * a / 720.0)
    } else {
        Ok((a + (-a).exp() - 1.0) / (a * a * a))
    }
}

/// Mean kernel coupling `k2(a) = (1 + 2a - (2 - e^{-a})^2)/(2a^3)` (zero
/// start); tends to `1/3` as `a -> 0+` and stays below `k(a)` everywhere.
pub fn k2_coupling(a: f64) -> Result<f64, SpectralError> {
    check_range(a)?;
    if a < SERIES_CUTOFF {
        // 1/3 - a/4 + 7a^2/60 - a^3/24 + O(a^4)
        Ok(1.0 / 3.0 - a / 4.0 + 7.0 * a * a / 60.0 - a * a * a / 24.0)
    } else {
        let w = 2.0 - (-a).exp();
        Ok((1.0 + 2.0 * a - w * w) / (2.0 * a * a * a))
    }
}

/// Largest-eigenvalue data for the kernel at range parameter `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSolution {
    /// Smallest positive root of the model's transcendental equation.
    pub y0: f64,
    /// Largest kernel eigenvalue `1/(a^2 (1 + y0^2))`.
    pub lambda0: f64,
    pub a: f64,
    pub model: InitCondition,
}

/// Solves the transcendental eigenvalue equation for the given model.
///
/// Stationary: root of `y tan(ay/2) = 1` in `(0, pi/a)`; zero start: root of
/// `tan(ay) + y = 0` in `(pi/(2a), pi/a)`. Both are found on transformed
/// functions free of tangent poles, where they bracket a single sign change.
pub fn solve_eigen(a: f64, model: InitCondition) -> Result<EigenSolution, SpectralError> {
    check_range(a)?;
    let fail = |e: crate::roots::RootError| SpectralError::BracketFailure {
        a,
        model,
        detail: e.to_string(),
    };
    let y0 = match model {
        // g(0) = -1, g(pi/a) = pi/a > 0, and g is increasing in between.
        InitCondition::Stationary => brent(
            |y| y * (0.5 * a * y).sin() - (0.5 * a * y).cos(),
            0.0,
            PI / a,
            200,
        )
        .map_err(fail)?,
        // g(pi/(2a)) = 1, g(pi/a) = -pi/a < 0.
        InitCondition::ZeroStart => brent(
            |y| (a * y).sin() + y * (a * y).cos(),
            0.5 * PI / a,
            PI / a,
            200,
        )
        .map_err(fail)?,
    };
    Ok(EigenSolution {
        y0,
        lambda0: 1.0 / (a * a * (1.0 + y0 * y0)),
        a,
        model,
    })
}

/// Evaluates the (unnormalized) principal eigenfunction at `u in [0, a]`.
///
/// Stationary: `sin(y0 u) + y0 cos(y0 u)`; zero start: `sin(y0 u)`, which
/// vanishes at the pinned origin.
pub fn eigenfunction(sol: &EigenSolution, u: f64) -> Result<f64, SpectralError> {
    if !(0.0..=sol.a).contains(&u) {
        return Err(SpectralError::ArgumentOutsideDomain { u, a: sol.a });
    }
    Ok(match sol.model {
        InitCondition::Stationary => (sol.y0 * u).sin() + sol.y0 * (sol.y0 * u).cos(),
        InitCondition::ZeroStart => (sol.y0 * u).sin(),
    })
}

/// Truncated large-`a` expansions of the coupling, eigenvalue, and root.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymptoticApprox {
    pub k_approx: f64,
    pub lambda0_approx: f64,
    pub y0_approx: f64,
}

/// Returns the large-`a` expansions for comparison against exact values.
///
/// Stationary: `k = 1/a^2 - 1/a^3 + O(e^{-a})`, `y0 = pi/a - 2pi/(a(a+2))`,
/// `lambda0 = 1/a^2 - pi^2/a^4 + O(a^-5)`. Zero start:
/// `k2 = 1/a^2 - 3/(2a^3) + O(e^{-a})`; linearizing `tan(ay) = -y` about
/// `ay = pi` gives `y0 = pi/(a+1)`, and `lambda0` is the closed form
/// `1/(a^2(1+y0^2))` at that root.
pub fn asymptotic_check(a: f64, model: InitCondition) -> Result<AsymptoticApprox, SpectralError> {
    check_range(a)?;
    let a2 = a * a;
    Ok(match model {
        InitCondition::Stationary => AsymptoticApprox {
            k_approx: 1.0 / a2 - 1.0 / (a2 * a),
            lambda0_approx: 1.0 / a2 - PI * PI / (a2 * a2),
            y0_approx: PI / a - 2.0 * PI / (a * (a + 2.0)),
        },
        InitCondition::ZeroStart => {
            let y0 = PI / (a + 1.0);
            AsymptoticApprox {
                k_approx: 1.0 / a2 - 1.5 / (a2 * a),
                lambda0_approx: 1.0 / (a2 * (1.0 + y0 * y0)),
                y0_approx: y0,
            }
        }
    })
}
