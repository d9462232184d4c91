//! Exactly solvable Gibbs measures on the one-sided full shift, the
//! plug-in and hitting-time entropy estimators, and a Monte Carlo lab that
//! checks their concentration bounds against exact ground truth.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs plus an explicit seed; IO, file formats and the
//! command line live in the `gibbs-entropy` companion crate.
//!
//! Layout:
//!
//! - [`shift`]: alphabets, words, samples, the metric `d_θ`, variations and
//!   Lipschitz seminorms of finite-range block functions.
//! - [`gibbs`]: finite-range potentials, Perron data of the transfer matrix,
//!   exact cylinder measures and entropy, a seeded sampler.
//! - [`estimators`]: empirical block distributions (periodic extension),
//!   block / conditional / relative entropies, the decomposition of the
//!   conditional estimator, pattern hitting times, `k(n)` schedules.
//! - [`lab`]: tail and variance experiments, bound curves and envelope fits,
//!   the exhaustive oscillation oracle, exponential-law tests.
//!
//! All logarithms are natural.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod error;
pub mod estimators;
pub mod gibbs;
pub mod lab;
pub(crate) mod math;
pub mod rng;
pub mod shift;

pub use error::{Error, Result};
pub use gibbs::{CylinderMeasureReport, GibbsModel, Potential};
pub use shift::{Alphabet, BlockFunction, MetricParams, SymbolSequence, Word};
