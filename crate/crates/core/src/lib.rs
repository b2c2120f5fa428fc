//! Pseudo-Boolean DNF formulas, submodular set functions, and sparse Fourier
//! learning on the Boolean cube.
//!
//! The crate is organised bottom-up:
//!
//! - [`cube`]: points as bitmasks, dense tables, counting membership oracles.
//! - [`formula`]: pseudo-Boolean DNFs (max over weighted conjunctions).
//! - [`submodular`]: set functions, submodularity checks, generators, and the
//!   monotone lower extension.
//! - [`construct`]: the recursive decompositions turning (monotone) submodular
//!   functions into narrow pseudo-Boolean DNFs.
//! - [`fourier`]: Walsh-Hadamard spectra, level norms, the range codec.
//! - [`restrictions`]: random restrictions, decision trees, and switching
//!   experiments.
//! - [`learner`]: membership-query learning via heavy Fourier coefficients,
//!   rounding, proper conversion, and the submodularity tester.

pub mod construct;
pub mod cube;
mod error;
pub mod formula;
pub mod fourier;
pub mod learner;
pub mod restrictions;
pub mod seed;
pub mod stats;
pub mod submodular;

pub use cube::{CountingOracle, DenseTable, Oracle, PointFunction, PointMask};
pub use error::{Error, Result};
pub use formula::{Formula, Term};
pub use fourier::{RangeCodec, Spectrum};
pub use submodular::SetFunction;
