//! Growth rate of a discrete-time multiplicative process driven by a
//! mean-reverting Gaussian (Ornstein-Uhlenbeck) noise.
//!
//! The process compounds `n` growth factors `1 + rho * exp(Z_i - Var[Z_i]/2)`,
//! where `Z` is an OU sequence sampled on a uniform time grid. The library
//! computes the expected terminal value and its large-`n` exponential rate
//! through four independent routes that cross-validate each other:
//!
//! * [`growth`] — Monte Carlo simulation with deterministic parallel seeding;
//! * [`lattice`] — exact subset-sum enumeration of the expectation, which maps
//!   onto a one-dimensional lattice gas with pairwise attractive energies;
//! * [`meanfield`] — closed-form lower/upper bounds from a mean-field
//!   (Curie-Weiss style) free energy with two choices of effective coupling;
//! * [`variational`] — direct maximization of the continuum rate functional.
//!
//! [`ou`] holds the process parameters and the exact OU sampling recursion,
//! [`spectral`] the effective couplings and the integral-operator eigenpairs
//! that feed the bounds.

pub mod growth;
pub mod lattice;
pub mod meanfield;
pub mod ou;
pub mod spectral;
pub mod variational;

mod roots;

pub use ou::{InitCondition, OuError, OuPath, ScaledParams};
