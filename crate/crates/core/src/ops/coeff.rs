use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Rat;

/// Coefficient functions of `s` that a [`super::DiffOp`] can carry.
pub trait Coeff: Clone + fmt::Debug + PartialEq + Send + Sync {
    type Ctx: Clone + fmt::Debug + PartialEq + Send + Sync;

    fn zero(ctx: &Self::Ctx) -> Self;
    fn from_rat(r: &Rat, ctx: &Self::Ctx) -> Self;

    /// Known to vanish identically (everywhere, at every order).
    fn is_zero(&self) -> bool;

    fn add(&self, other: &Self, ctx: &Self::Ctx) -> Result<Self>;
    fn neg(&self) -> Self;
    fn mul(&self, other: &Self, ctx: &Self::Ctx) -> Result<Self>;
    fn scale(&self, r: &Rat) -> Self;

    /// `c(s) -> c(s + alpha)`.
    fn shift(&self, alpha: &Rat, ctx: &Self::Ctx) -> Result<Self>;

    /// Pointwise reciprocal.
    fn inv(&self, ctx: &Self::Ctx) -> Result<Self>;

    /// `∂c/∂s`.
    fn ds(&self, _ctx: &Self::Ctx) -> Result<Self> {
        Err(Error::UnsupportedBackend("no s-derivative for sampled coefficients".into()))
    }

    fn sub(&self, other: &Self, ctx: &Self::Ctx) -> Result<Self> {
        self.add(&other.neg(), ctx)
    }

    /// One-line canonical rendering for dumps.
    fn render(&self) -> String;

    /// Whether the coefficient has no sample points left.
    fn is_empty_window(&self) -> bool {
        false
    }
}
