//! Numerical laboratory for the moment growth of a stochastic heat
//! equation driven by rough fractional Gaussian noise.
//!
//! The driving noise is white or fractional in time (Hurst index `h0`)
//! and fractional in each spatial coordinate (indices `h[j]`), given by
//! an explicit spectral density. The crate provides:
//!
//! * exact spectral normalization constants and the parameter-regime
//!   classification that decides which moments are finite ([`special`],
//!   [`regime`]);
//! * samplers and covariance evaluations for the mollified spectral
//!   measures ([`spectral`]);
//! * Feynman-Kac Monte Carlo estimators of Wick-product and
//!   renormalized-product moments over Brownian path ensembles
//!   ([`montecarlo`], [`moments`]);
//! * deterministic quadrature for renormalization constants and the
//!   remainder terms they leave behind ([`renorm`]);
//! * variational lower bounds on the interaction strength at which
//!   moments blow up, including the critical mass of the cubic focusing
//!   ground state in two dimensions ([`variational`]).
//!
//! All Monte Carlo randomness flows through counter-style seeded
//! substreams ([`streams`]), and parallel reductions use a fixed
//! pairwise tree ([`stats`]), so every estimate is byte-reproducible
//! for a fixed seed regardless of thread count.

pub mod error;
pub mod hurst;
pub mod montecarlo;
pub mod moments;
pub mod renorm;
pub mod variational;
pub mod quad;
pub mod regime;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod streams;

pub use error::{PamError, Result};
pub use hurst::{HurstParams, HurstValue};
pub use regime::{RegimeReport, SkorohodRegime};
