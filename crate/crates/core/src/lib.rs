//! Exact-arithmetic laboratory for hypergeometric tau functions of the
//! lattice KP hierarchy.
//!
//! The crate is layered bottom-up:
//!
//! - [`scalar`]: exact rationals, formal-`β` scalars, the parameter
//!   environment with its exponent lattice, and truncated time series.
//! - [`partitions`]: partition enumeration, contents, hooks.
//! - [`schur`]: Schur polynomials, their special values and the `c`-vector
//!   families.
//! - [`tau`]: content-product weights, the tau function and the
//!   wave/dressing coefficients extracted from it.
//! - [`ops`]: truncated (pseudo-)difference operators with fractional
//!   shifts over two coefficient backends.
//! - [`lab`]: the verification procedures and their reports.

pub mod error;
pub mod lab;
pub mod ops;
pub mod partitions;
pub mod scalar;
pub mod schur;
pub mod tau;

pub use error::{Error, Result};
pub use scalar::{BetaScalar, ParamEnv, QMode, Rat, TPoly};
