use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};

use super::coeff::Coeff;
use crate::error::{Error, Result};
use crate::scalar::{pow_int, ri, BetaScalar, ParamEnv, Rat};

/// Lattice data needed to fold constant exponents: `e^{β r} = g^{M r}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ExpCtx {
    pub env: ParamEnv,
}

impl ExpCtx {
    pub fn new(env: &ParamEnv) -> Self {
        Self { env: env.clone() }
    }

    fn beta_cap(&self) -> u32 {
        self.env.beta_cap
    }
}

/// `β^beta_deg · e^{β (lin·s + quad·s²)}`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExpKey {
    pub beta_deg: u32,
    pub lin: Rat,
    pub quad: Rat,
}

/// Finite sum `Σ r · β^d · e^{β p(s)}` with constant parts of `p` folded
/// into the rational coefficient.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ExpCoeff {
    terms: BTreeMap<ExpKey, Rat>,
}

impl ExpCoeff {
    pub fn constant(r: Rat) -> Self {
        Self::term(r, 0, Rat::zero(), Rat::zero())
    }

    pub fn term(r: Rat, beta_deg: u32, lin: Rat, quad: Rat) -> Self {
        let mut terms = BTreeMap::new();
        if !r.is_zero() {
            terms.insert(ExpKey { beta_deg, lin, quad }, r);
        }
        Self { terms }
    }

    /// `r · β^beta_deg · e^{β (lin·s + offset)}`, folding `e^{β·offset}`.
    pub fn affine(r: Rat, beta_deg: u32, lin: Rat, offset: &Rat, ctx: &ExpCtx) -> Result<Self> {
        let f = ctx.env.exp_beta(offset)?;
        Ok(Self::term(r * f, beta_deg, lin, Rat::zero()))
    }

    /// `r · e^{β (quad·s² + lin·s + offset)}`.
    pub fn quadratic(r: Rat, quad: Rat, lin: Rat, offset: &Rat, ctx: &ExpCtx) -> Result<Self> {
        let f = ctx.env.exp_beta(offset)?;
        Ok(Self::term(r * f, 0, lin, quad))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExpKey, &Rat)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn max_beta_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.beta_deg).max().unwrap_or(0)
    }

    pub fn max_exp_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| {
                if !k.quad.is_zero() {
                    2
                } else if !k.lin.is_zero() {
                    1
                } else {
                    0
                }
            })
            .max()
            .unwrap_or(0)
    }

    /// Value at a lattice-compatible point `s`.
    pub fn eval(&self, s: &Rat, ctx: &ExpCtx) -> Result<BetaScalar> {
        let mut acc = BetaScalar::zero();
        for (k, r) in &self.terms {
            let e = &k.lin * s + &k.quad * s * s;
            let v = r * ctx.env.exp_beta(&e)?;
            acc = acc.add(&BetaScalar::monomial(k.beta_deg, v));
        }
        Ok(acc)
    }

    /// Floating value with `β = M log g`; trend checks only.
    pub fn eval_f64(&self, s: f64, ctx: &ExpCtx) -> f64 {
        let beta = ctx.env.beta_f64();
        self.terms
            .iter()
            .map(|(k, r)| {
                let p = crate::scalar::rat_to_f64(&k.lin) * s + crate::scalar::rat_to_f64(&k.quad) * s * s;
                crate::scalar::rat_to_f64(r) * beta.powi(k.beta_deg as i32) * (beta * p).exp()
            })
            .sum()
    }

    /// Division by a single-term coefficient.
    pub fn div_monomial(&self, divisor: &Self) -> Result<Self> {
        let mut it = divisor.terms.iter();
        let (Some((dk, dr)), None) = (it.next(), it.next()) else {
            return Err(Error::NotInvertible(format!(
                "division by a {}-term exponential sum",
                divisor.terms.len()
            )));
        };
        let mut terms = BTreeMap::new();
        for (k, r) in &self.terms {
            if k.beta_deg < dk.beta_deg {
                return Err(Error::NotInvertible("negative beta degree in quotient".into()));
            }
            let key = ExpKey {
                beta_deg: k.beta_deg - dk.beta_deg,
                lin: &k.lin - &dk.lin,
                quad: &k.quad - &dk.quad,
            };
            *terms.entry(key).or_insert_with(Rat::zero) += r / dr;
        }
        terms.retain(|_, r: &mut Rat| !r.is_zero());
        Ok(Self { terms })
    }

    /// Largest absolute rational coefficient, for residual reporting.
    pub fn max_abs_coeff(&self) -> Rat {
        self.terms.values().map(|r| r.abs()).max().unwrap_or_else(Rat::zero)
    }
}

impl Coeff for ExpCoeff {
    type Ctx = ExpCtx;

    fn zero(_: &ExpCtx) -> Self {
        Self::default()
    }

    fn from_rat(r: &Rat, _: &ExpCtx) -> Self {
        Self::constant(r.clone())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add(&self, other: &Self, _: &ExpCtx) -> Result<Self> {
        let mut terms = self.terms.clone();
        for (k, r) in &other.terms {
            *terms.entry(k.clone()).or_insert_with(Rat::zero) += r;
        }
        terms.retain(|_, r| !r.is_zero());
        Ok(Self { terms })
    }

    fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(k, r)| (k.clone(), -r)).collect(),
        }
    }

    fn mul(&self, other: &Self, ctx: &ExpCtx) -> Result<Self> {
        let mut terms: BTreeMap<ExpKey, Rat> = BTreeMap::new();
        for (k1, r1) in &self.terms {
            for (k2, r2) in &other.terms {
                let d = k1.beta_deg + k2.beta_deg;
                if d > ctx.beta_cap() {
                    return Err(Error::BetaDegree { degree: d, cap: ctx.beta_cap() });
                }
                let key = ExpKey {
                    beta_deg: d,
                    lin: &k1.lin + &k2.lin,
                    quad: &k1.quad + &k2.quad,
                };
                *terms.entry(key).or_insert_with(Rat::zero) += r1 * r2;
            }
        }
        terms.retain(|_, r| !r.is_zero());
        Ok(Self { terms })
    }

    fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::default();
        }
        Self {
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c * r)).collect(),
        }
    }

    fn shift(&self, alpha: &Rat, ctx: &ExpCtx) -> Result<Self> {
        if alpha.is_zero() {
            return Ok(self.clone());
        }
        let mut terms: BTreeMap<ExpKey, Rat> = BTreeMap::new();
        for (k, r) in &self.terms {
            // lin (s+α) + quad (s+α)² = (lin + 2 quad α) s + quad s² + (lin α + quad α²)
            let offset = &k.lin * alpha + &k.quad * alpha * alpha;
            let factor = ctx.env.exp_beta(&offset)?;
            let key = ExpKey {
                beta_deg: k.beta_deg,
                lin: &k.lin + ri(2) * &k.quad * alpha,
                quad: k.quad.clone(),
            };
            *terms.entry(key).or_insert_with(Rat::zero) += r * factor;
        }
        terms.retain(|_, r| !r.is_zero());
        Ok(Self { terms })
    }

    fn inv(&self, _: &ExpCtx) -> Result<Self> {
        let mut it = self.terms.iter();
        match (it.next(), it.next()) {
            (Some((k, r)), None) if k.beta_deg == 0 => Ok(Self::term(
                r.recip(),
                0,
                -k.lin.clone(),
                -k.quad.clone(),
            )),
            _ => Err(Error::NotInvertible(format!("exponential sum {}", self.render()))),
        }
    }

    fn ds(&self, ctx: &ExpCtx) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (k, r) in &self.terms {
            if !k.quad.is_zero() {
                return Err(Error::UnsupportedBackend(
                    "s-derivative of a quadratic exponent is not representable".into(),
                ));
            }
            if k.lin.is_zero() {
                continue;
            }
            let d = k.beta_deg + 1;
            if d > ctx.beta_cap() {
                return Err(Error::BetaDegree { degree: d, cap: ctx.beta_cap() });
            }
            terms.insert(
                ExpKey {
                    beta_deg: d,
                    lin: k.lin.clone(),
                    quad: Rat::zero(),
                },
                r * &k.lin,
            );
        }
        Ok(Self { terms })
    }

    fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|(k, r)| {
                let mut s = format!("({r})");
                match k.beta_deg {
                    0 => {}
                    1 => s.push_str("*beta"),
                    d => s.push_str(&format!("*beta^{d}")),
                }
                if !k.lin.is_zero() || !k.quad.is_zero() {
                    s.push_str("*exp(beta*(");
                    let mut parts = Vec::new();
                    if !k.quad.is_zero() {
                        parts.push(format!("({})*s^2", k.quad));
                    }
                    if !k.lin.is_zero() {
                        parts.push(format!("({})*s", k.lin));
                    }
                    s.push_str(&parts.join(" + "));
                    s.push_str("))");
                }
                s
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl ExpCoeff {
    /// `e^{β lin s}` times the rational `r`, without folding.
    pub fn exp_lin(r: Rat, lin: Rat) -> Self {
        Self::term(r, 0, lin, Rat::zero())
    }

    pub fn one() -> Self {
        Self::constant(Rat::one())
    }

    /// Integer power.
    pub fn pow(&self, n: u32, ctx: &ExpCtx) -> Result<Self> {
        let mut acc = Self::one();
        for _ in 0..n {
            acc = acc.mul(self, ctx)?;
        }
        Ok(acc)
    }

    /// `r^n` folded as a rational factor.
    pub fn scale_pow(&self, r: &Rat, n: i64) -> Result<Self> {
        Ok(self.scale(&pow_int(r, n)?))
    }
}
