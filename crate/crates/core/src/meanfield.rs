//! Mean-field (Curie-Weiss / van der Waals) growth-rate bounds.
//!
//! In the long-range limit the lattice gas is governed by the scalar
//! variational problem
//!
//! ```text
//! lambda_vdw = sup_{x in [0,1]} [ log(rho) x + k beta x^2 - I(x) ],
//! I(x) = x log x + (1-x) log(1-x),
//! ```
//!
//! whose stationary points solve `log rho = -2 k beta x + log(x/(1-x))`. With
//! the coupling `k = k(a)` (or `k2(a)`) the supremum is a lower bound on the
//! growth rate, with `k = lambda0(a)` (or `lambda0^(2)`) an upper bound. For
//! `k beta > 2` the equation can have two locally stable roots — a dilute
//! "gas" density `x1` and a dense "liquid" density `x2` — and the global
//! maximizer jumps from `x1` to `x2` as `log(rho) + k beta` changes sign:
//! a first-order transition at `beta_cr = -log(rho)/k`, possible only for
//! `rho < e^{-2}`. Root-finding runs in logit coordinates `t = log(x/(1-x))`,
//! where the three monotone branches of the stationary equation bracket each
//! root without heuristics.

use crate::ou::InitCondition;
use crate::roots::brent;
use crate::spectral::{k2_coupling, k_coupling, solve_eigen, SpectralError};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeanFieldError {
    #[error("parameter `{name}` must be finite and {requirement}, got {value}")]
    InvalidParam {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("no transition: rho = {rho} is above the critical fugacity e^-2 = {critical}")]
    AboveCritical { rho: f64, critical: f64 },
    #[error("stationary-point search failed: {detail}")]
    RootSearch { detail: String },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Phase of the mean-field gas at a `(rho, beta, k)` point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    /// Single stationary density (always the case for `k beta <= 2`).
    Unique,
    /// Two stationary densities; the dilute one maximizes.
    Gas,
    /// Two stationary densities; the dense one maximizes.
    Liquid,
    /// Exactly on the transition curve: both densities maximize.
    Coexistence,
}

impl Phase {
    /// Lower-case label used in CLI output.
    pub fn label(&self) -> &'static str {
        match self {
            Phase::Unique => "unique",
            Phase::Gas => "gas",
            Phase::Liquid => "liquid",
            Phase::Coexistence => "coexistence",
        }
    }
}

/// Solved mean-field state at one `(rho, beta, k)` point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub rho: f64,
    pub beta: f64,
    /// Coupling constant in use (mean coupling for the lower bound, largest
    /// kernel eigenvalue for the upper bound).
    pub k: f64,
    /// Global maximizer density (the dilute root at exact coexistence).
    pub x_star: f64,
    /// Dilute stationary density, when on a two-root branch.
    pub x1: Option<f64>,
    /// Dense stationary density, when on a two-root branch.
    pub x2: Option<f64>,
    /// Growth-rate value `-k beta x*^2 - log(1 - x*)`.
    pub lambda_vdw: f64,
    pub phase: Phase,
}

/// Mean-field growth-rate bounds at `(rho, beta)` for range parameter `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_point: PhasePoint,
    pub upper_point: PhasePoint,
}

/// Two maximizers are "equal" when their values agree to this tolerance, and
/// a point sits on the transition curve when `|log rho + k beta|` is below it.
const COEXISTENCE_TOL: f64 = 1e-12;

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

/// `log(1 + e^t)` without overflow (softplus), so `-log(1-x)` stays finite
/// for densities exponentially close to 1.
fn log1p_exp(t: f64) -> f64 {
    if t <= 0.0 {
        t.exp().ln_1p()
    } else {
        t + (-t).exp().ln_1p()
    }
}

fn check(name: &'static str, value: f64, positive: bool) -> Result<(), MeanFieldError> {
    let ok = value.is_finite() && if positive { value > 0.0 } else { value >= 0.0 };
    if ok {
        Ok(())
    } else {
        Err(MeanFieldError::InvalidParam {
            name,
            requirement: if positive { "> 0" } else { ">= 0" },
            value,
        })
    }
}

/// `lambda_vdw` at a stationary logit `t`: `-k beta x^2 + log(1/(1-x))`.
fn lambda_at(kb: f64, t: f64) -> f64 {
    let x = sigmoid(t);
    -kb * x * x + log1p_exp(t)
}

/// Solves the mean-field stationary equation and classifies the phase.
///
/// Roots of `psi(t) = t - log(rho) - 2 k beta sigmoid(t)` are bracketed on
/// the monotone segments separated by the spinodal logits `t = ±t_sp` (which
/// exist only for `k beta > 2`); see the module docs for the phase rules.
pub fn solve_mean_field(rho: f64, beta: f64, k: f64) -> Result<PhasePoint, MeanFieldError> {
    check("rho", rho, true)?;
    check("beta", beta, false)?;
    check("k", k, true)?;
    let ln_rho = rho.ln();
    let kb = k * beta;
    let psi = |t: f64| t - ln_rho - 2.0 * kb * sigmoid(t);
    let solve = |lo: f64, hi: f64| {
        brent(psi, lo, hi, 200).map_err(|e| MeanFieldError::RootSearch {
            detail: format!("rho = {rho}, beta = {beta}, k = {k}: {e}"),
        })
    };

    if kb == 0.0 {
        // The equation degenerates to t = log(rho): exact logistic density.
        let t = ln_rho;
        return Ok(PhasePoint {
            rho,
            beta,
            k,
            x_star: sigmoid(t),
            x1: None,
            x2: None,
            lambda_vdw: lambda_at(kb, t),
            phase: Phase::Unique,
        });
    }

    // psi < 0 at t = log(rho) and psi > 0 at t = log(rho) + 2 k beta, so all
    // roots lie in between.
    let (t_lo, t_hi) = (ln_rho, ln_rho + 2.0 * kb);

    if kb <= 2.0 {
        // psi' = 1 - 2 k beta x(1-x) >= 1 - k beta/2 >= 0: single root.
        let t = solve(t_lo, t_hi)?;
        return Ok(PhasePoint {
            rho,
            beta,
            k,
            x_star: sigmoid(t),
            x1: None,
            x2: None,
            lambda_vdw: lambda_at(kb, t),
            phase: Phase::Unique,
        });
    }

    // Spinodal densities x = (1 ± s)/2 where psi' vanishes; their logits are
    // symmetric. 1 - x_+ = 1/(k beta (1+s)) avoids cancellation in the logit.
    let s = (1.0 - 2.0 / kb).sqrt();
    let t_sp = (0.5 * (1.0 + s) * kb * (1.0 + s)).ln();
    let gas = if psi(-t_sp) >= 0.0 {
        Some(solve(t_lo, -t_sp)?)
    } else {
        None
    };
    let liquid = if psi(t_sp) <= 0.0 {
        Some(solve(t_sp, t_hi)?)
    } else {
        None
    };

    let point = |t: f64, x1: Option<f64>, x2: Option<f64>, phase: Phase| PhasePoint {
        rho,
        beta,
        k,
        x_star: sigmoid(t),
        x1,
        x2,
        lambda_vdw: lambda_at(kb, t),
        phase,
    };
    Ok(match (gas, liquid) {
        (Some(tg), Some(tl)) => {
            let (x1, x2) = (Some(sigmoid(tg)), Some(sigmoid(tl)));
            // Global maximizer flips where log(rho) + k beta changes sign.
            let margin = ln_rho + kb;
            if margin.abs() < COEXISTENCE_TOL {
                point(tg, x1, x2, Phase::Coexistence)
            } else if margin > 0.0 {
                point(tl, x1, x2, Phase::Liquid)
            } else {
                point(tg, x1, x2, Phase::Gas)
            }
        }
        (Some(tg), None) => point(tg, Some(sigmoid(tg)), None, Phase::Unique),
        (None, Some(tl)) => point(tl, None, Some(sigmoid(tl)), Phase::Unique),
        // Unreachable: psi changes sign over [t_lo, t_hi], so at least one
        // monotone segment must carry a root.
        (None, None) => {
            return Err(MeanFieldError::RootSearch {
                detail: format!("no stationary point for rho = {rho}, beta = {beta}, k = {k}"),
            })
        }
    })
}

/// Mean-field bounds on the growth rate at `(rho, beta)` for range `a`.
///
/// Lower bound: coupling `k(a)` (stationary) or `k2(a)` (zero start); upper
/// bound: the largest kernel eigenvalue of the matching model. The lower
/// bound never exceeds the upper one because the supremum is monotone in the
/// coupling and `lambda0 > k` everywhere.
pub fn lyapunov_bounds(
    rho: f64,
    beta: f64,
    a: f64,
    model: InitCondition,
) -> Result<Bounds, MeanFieldError> {
    let k_low = match model {
        InitCondition::Stationary => k_coupling(a)?,
        InitCondition::ZeroStart => k2_coupling(a)?,
    };
    let k_high = solve_eigen(a, model)?.lambda0;
    let lower_point = solve_mean_field(rho, beta, k_low)?;
    let upper_point = solve_mean_field(rho, beta, k_high)?;
    Ok(Bounds {
        lower: lower_point.lambda_vdw,
        upper: upper_point.lambda_vdw,
        lower_point,
        upper_point,
    })
}

/// Transition inverse temperature `beta_cr = -log(rho)/k` of the coupling-`k`
/// mean-field gas; defined for `rho <= e^{-2}` (at equality it degenerates to
/// the critical point `beta_c = 2/k`).
pub fn transition_beta(rho: f64, k: f64) -> Result<f64, MeanFieldError> {
    check("rho", rho, true)?;
    check("k", k, true)?;
    let critical = (-2.0f64).exp();
    if rho > critical {
        return Err(MeanFieldError::AboveCritical { rho, critical });
    }
    Ok(-rho.ln() / k)
}

/// Density gap `x2 - x1` on the transition curve: the largest solution of
/// `delta = tanh(k beta delta / 2)`, which is positive only for `k beta > 2`.
pub fn coexistence_gap(beta: f64, k: f64) -> f64 {
    let kb = k * beta;
    // NaN falls through to the zero gap as well.
    if kb.is_nan() || kb <= 2.0 {
        return 0.0;
    }
    let g = |d: f64| (0.5 * kb * d).tanh() - d;
    // g > 0 just right of 0 and g(1) < 0; if even the probe point is past
    // the root the gap is numerically indistinguishable from 0.
    let lo = 1e-9;
    if g(lo) <= 0.0 {
        return 0.0;
    }
    brent(g, lo, 1.0, 200).expect("sign change verified above")
}

/// Noise amplitude at which `beta(sigma)` crosses `beta_cr` for `n` periods
/// of length `tau`: `sigma_tr = sqrt(2 beta_cr / (n^2 tau))`.
pub fn sigma_threshold(beta_cr: f64, n: usize, tau: f64) -> f64 {
    (2.0 * beta_cr / ((n * n) as f64 * tau)).sqrt()
}
