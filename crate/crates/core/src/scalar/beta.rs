use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::rat::{to_f64, Rat};
use crate::error::{Error, Result};

/// Polynomial in the formal symbol `β` with rational coefficients.
///
/// `β` is kept independent from `e^β`, which is always evaluated through the
/// exponent lattice of [`super::ParamEnv`].
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct BetaScalar {
    coeffs: BTreeMap<u32, Rat>,
}

impl BetaScalar {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_rat(r: Rat) -> Self {
        Self::monomial(0, r)
    }

    pub fn monomial(degree: u32, r: Rat) -> Self {
        let mut coeffs = BTreeMap::new();
        if !r.is_zero() {
            coeffs.insert(degree, r);
        }
        Self { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn coeff(&self, degree: u32) -> Rat {
        self.coeffs.get(&degree).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, &Rat)> {
        self.coeffs.iter().map(|(d, r)| (*d, r))
    }

    /// The value when `β` carries no factor, i.e. the `β^0` part if nothing else.
    pub fn as_rat(&self) -> Option<Rat> {
        match self.degree() {
            None => Some(Rat::zero()),
            Some(0) => Some(self.coeff(0)),
            _ => None,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.coeffs.clone();
        for (d, r) in &other.coeffs {
            let e = out.entry(*d).or_insert_with(Rat::zero);
            *e += r;
        }
        out.retain(|_, r| !r.is_zero());
        Self { coeffs: out }
    }

    pub fn neg(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(d, r)| (*d, -r)).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self, cap: u32) -> Result<Self> {
        let mut out: BTreeMap<u32, Rat> = BTreeMap::new();
        for (d1, r1) in &self.coeffs {
            for (d2, r2) in &other.coeffs {
                let d = d1 + d2;
                if d > cap {
                    return Err(Error::BetaDegree { degree: d, cap });
                }
                *out.entry(d).or_insert_with(Rat::zero) += r1 * r2;
            }
        }
        out.retain(|_, r| !r.is_zero());
        Ok(Self { coeffs: out })
    }

    pub fn eval_f64(&self, beta: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(d, r)| to_f64(r) * beta.powi(*d as i32))
            .sum()
    }
}

impl fmt::Display for BetaScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .map(|(d, r)| match d {
                0 => format!("{r}"),
                1 => format!("({r})*beta"),
                _ => format!("({r})*beta^{d}"),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}
