//! Exact scalar tower: rationals, formal-`β` scalars, the parameter
//! environment, and the truncated time-series ring.

mod beta;
mod env;
mod rat;
mod tpoly;

pub use beta::BetaScalar;
pub use env::{ParamEnv, QMode};
pub use rat::{parse_rat, pow_int, rat, rat_pow, rat_root, ri, to_f64 as rat_to_f64, Rat};
pub use tpoly::{monomials_up_to, weight as tpoly_weight, Monomial, TPoly};
