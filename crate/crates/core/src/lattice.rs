//! Exact evaluation of the expected terminal value as a lattice-gas sum.
//!
//! Expanding the product `E[prod_i (1 + rho e^{Z_i - Var Z_i/2})]` over the
//! `2^n` subsets `S` of sites and using Gaussian moments gives the grand
//! partition function of a one-dimensional lattice gas,
//!
//! ```text
//! M_n = sum_S rho^{|S|} exp( sum_{a<b in S} cov(Z_a, Z_b) ),
//! ```
//!
//! i.e. sites attract with pair energy `cov(Z_a, Z_b) >= 0`. Enumeration
//! walks subsets in Gray-code order so each step updates the pair energy by
//! one covariance row sum (`O(n 2^n)` total), accumulates per-occupation-count
//! partial sums in log space, and reduces fixed-size chunks of the walk in a
//! fixed order, making the result independent of the worker count. From the
//! same sums the module evaluates the exact mean site occupation (density)
//! and the entropy per site of the gas.

use crate::ou::{covariance, InitCondition, OuError, ScaledParams};
use rayon::prelude::*;
use thiserror::Error;

/// Hard cap on the site count: enumeration cost is `O(n 2^n)`.
pub const MAX_SITES: usize = 24;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LatticeError {
    #[error("exact enumeration supports at most {cap} sites (2^n subsets), got n = {n}")]
    SiteCountAboveCap { n: usize, cap: usize },
    #[error(transparent)]
    Ou(#[from] OuError),
}

/// Exact partition data for the `n`-site gas.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionResult {
    /// `log M_n`, the log of the grand partition function at the given `rho`.
    pub log_m_n: f64,
    /// `log Z_k(n)` for `k = 0..=n`: log of the sum of Boltzmann weights over
    /// all `k`-site subsets. `Z_0 = 1`, so `canonical[0] = 0`.
    pub canonical: Vec<f64>,
    pub n: usize,
}

/// Log-space running sum: represents `log(sum of e^{x})` over pushed `x`.
///
/// Rescales by the running max so huge Boltzmann weights never overflow;
/// merging two accumulators is exact over the union of their inputs, so any
/// fixed merge order gives a deterministic result.
#[derive(Debug, Clone, Copy)]
struct LogSumAcc {
    max: f64,
    sum: f64,
}

impl LogSumAcc {
    fn empty() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    fn push(&mut self, x: f64) {
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    fn merge(self, other: Self) -> Self {
        if other.sum == 0.0 {
            return self;
        }
        if self.sum == 0.0 {
            return other;
        }
        if self.max >= other.max {
            Self {
                max: self.max,
                sum: self.sum + other.sum * (other.max - self.max).exp(),
            }
        } else {
            Self {
                max: other.max,
                sum: other.sum + self.sum * (self.max - other.max).exp(),
            }
        }
    }

    fn value(self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

/// `log sum_i e^{terms[i]}` for a fixed slice; `-inf` terms drop out.
fn logsumexp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + terms.iter().map(|&x| (x - max).exp()).sum::<f64>().ln()
}

fn check_cap(n: usize) -> Result<(), LatticeError> {
    if n > MAX_SITES {
        Err(LatticeError::SiteCountAboveCap { n, cap: MAX_SITES })
    } else {
        Ok(())
    }
}

fn covariance_matrix(
    params: &ScaledParams,
    init: InitCondition,
) -> Result<Vec<f64>, LatticeError> {
    let n = params.n();
    let mut cov = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            cov[i * n + j] = covariance(params, init, i, j)?;
        }
    }
    Ok(cov)
}

/// Pair energy of subset `mask`: sum of covariances over its site pairs.
fn subset_energy(cov: &[f64], n: usize, mask: u32) -> f64 {
    let mut e = 0.0;
    let mut rest = mask;
    while rest != 0 {
        let j = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let mut others = rest;
        while others != 0 {
            let i = others.trailing_zeros() as usize;
            others &= others - 1;
            e += cov[i * n + j];
        }
    }
    e
}

/// Sum of covariances between site `j` and every site in `mask`.
fn row_energy(cov: &[f64], n: usize, mask: u32, j: usize) -> f64 {
    let mut e = 0.0;
    let mut rest = mask;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        e += cov[i * n + j];
    }
    e
}

/// Walks subsets `gray(t) = t ^ (t >> 1)` for `t` in `lo..hi`, pushing each
/// subset's energy into the accumulator for its occupation count.
fn accumulate_range(cov: &[f64], n: usize, lo: u64, hi: u64) -> Vec<LogSumAcc> {
    let mut acc = vec![LogSumAcc::empty(); n + 1];
    let mut mask = (lo ^ (lo >> 1)) as u32;
    let mut energy = subset_energy(cov, n, mask);
    acc[mask.count_ones() as usize].push(energy);
    for t in lo + 1..hi {
        let j = t.trailing_zeros() as usize;
        let bit = 1u32 << j;
        mask ^= bit;
        // The row sum excludes j itself whether the bit was set or cleared.
        let delta = row_energy(cov, n, mask & !bit, j);
        energy += if mask & bit != 0 { delta } else { -delta };
        acc[mask.count_ones() as usize].push(energy);
    }
    acc
}

/// Exactly evaluates `M_n` and the per-occupation partial sums.
///
/// Deterministic: chunk boundaries of the parallel walk depend only on `n`
/// and chunk results merge in a fixed order, so the output is bitwise stable
/// across runs and worker counts.
pub fn exact_expectation(
    params: &ScaledParams,
    init: InitCondition,
) -> Result<PartitionResult, LatticeError> {
    let n = params.n();
    check_cap(n)?;
    let cov = covariance_matrix(params, init)?;
    let total: u64 = 1 << n;
    // Fixed chunking: ~256 chunks once the walk is large enough to matter.
    let chunk = (total >> 8).max(1);
    let n_chunks = total.div_ceil(chunk);
    let per_chunk: Vec<Vec<LogSumAcc>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            accumulate_range(&cov, n, lo, (lo + chunk).min(total))
        })
        .collect();
    let mut merged = vec![LogSumAcc::empty(); n + 1];
    for chunk_acc in per_chunk {
        for (m, a) in merged.iter_mut().zip(chunk_acc) {
            *m = m.merge(a);
        }
    }
    let canonical: Vec<f64> = merged.into_iter().map(LogSumAcc::value).collect();
    Ok(PartitionResult {
        log_m_n: log_grand_sum(params.rho(), &canonical),
        canonical,
        n,
    })
}

/// `log sum_k rho^k Z_k` from the log canonical sums.
fn log_grand_sum(rho: f64, canonical: &[f64]) -> f64 {
    let ln_rho = rho.ln();
    let terms: Vec<f64> = canonical
        .iter()
        .enumerate()
        // k = 0 is written separately: 0 * ln(0) would poison the sum at rho = 0.
        .map(|(k, &z)| if k == 0 { z } else { k as f64 * ln_rho + z })
        .collect();
    logsumexp(&terms)
}

/// Mean site occupation `d = rho (d log M_n / d rho) / n`, evaluated exactly
/// from the canonical sums (`d = sum_k k rho^k Z_k / (n M_n)`).
pub fn density(params: &ScaledParams, init: InitCondition) -> Result<f64, LatticeError> {
    let part = exact_expectation(params, init)?;
    Ok(density_from(params.rho(), &part))
}

fn density_from(rho: f64, part: &PartitionResult) -> f64 {
    let ln_rho = rho.ln();
    let weighted: Vec<f64> = part
        .canonical
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, &z)| (k as f64).ln() + k as f64 * ln_rho + z)
        .collect();
    ((logsumexp(&weighted) - part.log_m_n).exp() / part.n as f64).clamp(0.0, 1.0)
}

/// Entropy per site of the lattice gas at the parameters' temperature.
///
/// Uses `s = (1/n) d(T log M_n)/dT|_rho - d log(rho)` with `T = 1/beta`; the
/// derivative is a centered finite difference with relative step `h_scale`
/// (cube root of f64 epsilon by default, balancing truncation against
/// rounding). At `beta = 0` the couplings vanish and `T log M_n` is exactly
/// linear, so the derivative reduces to `log M_n` itself.
pub fn entropy_per_site(
    params: &ScaledParams,
    init: InitCondition,
) -> Result<f64, LatticeError> {
    entropy_with_step(params, init, f64::EPSILON.cbrt())
}

fn entropy_with_step(
    params: &ScaledParams,
    init: InitCondition,
    h_scale: f64,
) -> Result<f64, LatticeError> {
    check_cap(params.n())?;
    let nf = params.n() as f64;
    let d = density(params, init)?;
    let occupation_term = if d > 0.0 { d * params.rho().ln() } else { 0.0 };
    let beta = params.beta();
    let t_term = if beta == 0.0 {
        exact_expectation(params, init)?.log_m_n
    } else {
        let t = 1.0 / beta;
        let h = t * h_scale;
        let hi = exact_expectation(&params.with_beta(1.0 / (t + h))?, init)?.log_m_n;
        let lo = exact_expectation(&params.with_beta(1.0 / (t - h))?, init)?.log_m_n;
        ((t + h) * hi - (t - h) * lo) / (2.0 * h)
    };
    Ok(t_term / nf - occupation_term)
}
