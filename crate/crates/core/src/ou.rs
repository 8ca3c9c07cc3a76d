//! Process parameters and exact sampling of the driving OU sequence.
//!
//! The noise is an Ornstein-Uhlenbeck process `dZ = -gamma Z dt + sigma dW`
//! observed on the uniform grid `t_i = i * tau`, `i = 0..n-1`. On that grid it
//! obeys the exact recursion
//!
//! ```text
//! Z_{i+1} = exp(-gamma tau) Z_i + sqrt(dG) eps_i,
//! dG      = sigma^2/(2 gamma) * (1 - exp(-2 gamma tau)),
//! ```
//!
//! so paths are sampled without discretization error. Two initial conditions
//! are supported: the stationary law `Z_0 ~ N(0, sigma^2/(2 gamma))` and the
//! deterministic start `Z_0 = 0`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

/// Errors from parameter validation and grid-index checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OuError {
    #[error("parameter `{name}` must be finite and {requirement}, got {value}")]
    InvalidParam {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("step count n must be at least 1")]
    ZeroSteps,
    #[error("grid index {index} out of range for n = {n} steps")]
    IndexOutOfRange { index: usize, n: usize },
}

/// Model parameters for the compounded growth process.
///
/// `n` is the number of compounding periods (equivalently lattice sites or OU
/// samples): the terminal value multiplies factors `i = 0..n-1`. The scaled
/// quantities `beta = sigma^2 tau n^2 / 2` and `a = gamma tau n` are the
/// natural variables of the large-`n` limit: holding them fixed while `n`
/// grows keeps the effective pair interaction of the lattice-gas picture
/// fixed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledParams {
    rho: f64,
    sigma: f64,
    gamma: f64,
    tau: f64,
    n: usize,
}

impl ScaledParams {
    /// Validates and builds a parameter set.
    ///
    /// `rho` may be zero (degenerate no-growth process); `sigma` may be zero
    /// (deterministic compounding). `gamma` and `tau` must be strictly
    /// positive and `n >= 1`.
    pub fn new(rho: f64, sigma: f64, gamma: f64, tau: f64, n: usize) -> Result<Self, OuError> {
        let check = |name, value: f64, positive: bool| -> Result<(), OuError> {
            let ok = value.is_finite() && if positive { value > 0.0 } else { value >= 0.0 };
            if ok {
                Ok(())
            } else {
                Err(OuError::InvalidParam {
                    name,
                    requirement: if positive { "> 0" } else { ">= 0" },
                    value,
                })
            }
        };
        check("rho", rho, false)?;
        check("sigma", sigma, false)?;
        check("gamma", gamma, true)?;
        check("tau", tau, true)?;
        if n == 0 {
            return Err(OuError::ZeroSteps);
        }
        Ok(Self {
            rho,
            sigma,
            gamma,
            tau,
            n,
        })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Effective inverse temperature `beta = sigma^2 tau n^2 / 2`.
    pub fn beta(&self) -> f64 {
        0.5 * self.sigma * self.sigma * self.tau * (self.n as f64) * (self.n as f64)
    }

    /// Effective interaction range parameter `a = gamma tau n`.
    pub fn a(&self) -> f64 {
        self.gamma * self.tau * self.n as f64
    }

    /// One-step autoregression factor `exp(-gamma tau)`.
    pub fn step_decay(&self) -> f64 {
        (-self.gamma * self.tau).exp()
    }

    /// Stationary variance `sigma^2 / (2 gamma)` of the OU process.
    pub fn stationary_variance(&self) -> f64 {
        self.sigma * self.sigma / (2.0 * self.gamma)
    }

    /// Same parameters with a different `sigma`.
    pub fn with_sigma(&self, sigma: f64) -> Result<Self, OuError> {
        Self::new(self.rho, sigma, self.gamma, self.tau, self.n)
    }

    /// Same parameters with `sigma` chosen so that `self.beta()` equals `beta`.
    pub fn with_beta(&self, beta: f64) -> Result<Self, OuError> {
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(OuError::InvalidParam {
                name: "beta",
                requirement: ">= 0",
                value: beta,
            });
        }
        let nf = self.n as f64;
        self.with_sigma((2.0 * beta / (self.tau * nf * nf)).sqrt())
    }
}

/// Initial condition of the driving OU sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InitCondition {
    /// `Z_0` drawn from the stationary law `N(0, sigma^2/(2 gamma))`.
    Stationary,
    /// `Z_0 = 0`; the variance relaxes towards the stationary value.
    ZeroStart,
}

impl InitCondition {
    /// Variance of `Z_0` under this initial condition.
    pub fn initial_variance(&self, params: &ScaledParams) -> f64 {
        match self {
            InitCondition::Stationary => params.stationary_variance(),
            InitCondition::ZeroStart => 0.0,
        }
    }

    /// Lower-case label used in CLI output.
    pub fn label(&self) -> &'static str {
        match self {
            InitCondition::Stationary => "stationary",
            InitCondition::ZeroStart => "zero",
        }
    }
}

/// Variance of `Z_i` at grid index `i`.
///
/// Stationary start: constant `sigma^2/(2 gamma)`. Zero start:
/// `sigma^2/(2 gamma) * (1 - exp(-2 gamma tau i))`.
pub fn variance_at(params: &ScaledParams, init: InitCondition, i: usize) -> Result<f64, OuError> {
    if i >= params.n {
        return Err(OuError::IndexOutOfRange { index: i, n: params.n });
    }
    let v_inf = params.stationary_variance();
    Ok(match init {
        InitCondition::Stationary => v_inf,
        // 1 - e^{-2 gamma tau i}, via exp_m1 for accuracy at small exponents.
        InitCondition::ZeroStart => {
            v_inf * -(-(2.0 * params.gamma * params.tau) * i as f64).exp_m1()
        }
    })
}

/// Covariance of `Z_i` and `Z_j`.
///
/// Stationary start: `sigma^2/(2 gamma) * exp(-gamma tau |i-j|)`. Zero start:
/// `sigma^2/(2 gamma) * (exp(-gamma tau |i-j|) - exp(-gamma tau (i+j)))`.
pub fn covariance(
    params: &ScaledParams,
    init: InitCondition,
    i: usize,
    j: usize,
) -> Result<f64, OuError> {
    for idx in [i, j] {
        if idx >= params.n {
            return Err(OuError::IndexOutOfRange { index: idx, n: params.n });
        }
    }
    let v_inf = params.stationary_variance();
    let gt = params.gamma * params.tau;
    let lag = i.abs_diff(j) as f64;
    Ok(match init {
        InitCondition::Stationary => v_inf * (-gt * lag).exp(),
        InitCondition::ZeroStart => {
            v_inf * ((-gt * lag).exp() - (-gt * (i + j) as f64).exp())
        }
    })
}

/// A sampled OU path `Z_0..Z_{n-1}` together with the generating parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct OuPath {
    values: Vec<f64>,
    params: ScaledParams,
    init: InitCondition,
}

impl OuPath {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn params(&self) -> &ScaledParams {
        &self.params
    }

    pub fn init(&self) -> InitCondition {
        self.init
    }
}

/// Streaming form of the sampling recursion; one standard normal per step.
///
/// Every path consumes exactly `n` draws regardless of the initial condition
/// (the zero start multiplies the first draw by zero), so paths built from the
/// same random stream are aligned draw-for-draw across `sigma` values and
/// initial conditions.
pub(crate) struct OuStepper {
    z: f64,
    decay: f64,
    innovation_sd: f64,
    init_sd: f64,
    step: usize,
}

impl OuStepper {
    pub(crate) fn new(params: &ScaledParams, init: InitCondition) -> Self {
        let decay = params.step_decay();
        let v_inf = params.stationary_variance();
        // One-step conditional variance dG = v_inf (1 - decay^2).
        let innovation_sd = (v_inf * (1.0 - decay * decay)).sqrt();
        Self {
            z: 0.0,
            decay,
            innovation_sd,
            init_sd: init.initial_variance(params).sqrt(),
            step: 0,
        }
    }

    /// Advances one grid point and returns the new `Z` value.
    pub(crate) fn next_z<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        let eps: f64 = rng.sample(StandardNormal);
        self.z = if self.step == 0 {
            self.init_sd * eps
        } else {
            self.decay * self.z + self.innovation_sd * eps
        };
        self.step += 1;
        self.z
    }
}

/// Samples a full path `Z_0..Z_{n-1}` using the exact recursion.
pub fn sample_path<R: Rng + ?Sized>(
    params: &ScaledParams,
    init: InitCondition,
    rng: &mut R,
) -> OuPath {
    let mut stepper = OuStepper::new(params, init);
    let values = (0..params.n).map(|_| stepper.next_z(rng)).collect();
    OuPath {
        values,
        params: *params,
        init,
    }
}

/// Deterministic per-path random source: path `k` under `base_seed` is a pure
/// function of `(base_seed, k)`, independent of scheduling or worker count.
pub fn path_rng(base_seed: u64, path_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(path_index);
    rng
}
