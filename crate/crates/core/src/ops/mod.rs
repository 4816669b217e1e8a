//! Truncated pseudo-difference operators `Σ a_α(s) Λ^α`, `α ∈ (1/m)Z`,
//! over two coefficient backends:
//!
//! - [`ExpCoeff`]: symbolic in `s`, sums of `r·β^d·e^{β p(s)}` with
//!   `deg p <= 2`, supporting exact shifts and (for `deg p <= 1`) `∂_s`;
//! - [`GridCoeff`]: samples on a grid window with truncated time-series
//!   values, used for everything derived from the tau function.
//!
//! Truncation is explicit: every [`DiffOp`] carries a `floor`, the lowest
//! shift whose coefficient is known exactly, and a storage `cap` below
//! which nothing is kept.

mod coeff;
mod diffop;
mod exp_coeff;
mod grid;

pub use coeff::Coeff;
pub use diffop::{band_profile, commutator, conjugate_shift, op_log_dressed, BandProfile, DiffOp, LogOp};
pub use exp_coeff::{ExpCoeff, ExpCtx, ExpKey};
pub use grid::{GridCoeff, GridCtx, Window};
