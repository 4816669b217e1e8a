use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};

use super::coeff::Coeff;
use super::exp_coeff::{ExpCoeff, ExpCtx};
use crate::error::{Error, Result};
use crate::scalar::{Rat, TPoly};

/// Evenly spaced sample points `lo, lo + 1/denom, ..., hi`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub lo: Rat,
    pub hi: Rat,
    pub denom: u32,
}

impl Window {
    pub fn new(lo: Rat, hi: Rat, denom: u32) -> Result<Self> {
        if denom == 0 || lo > hi {
            return Err(Error::config(format!("bad window [{lo}, {hi}] step 1/{denom}")));
        }
        let span = (&hi - &lo) * Rat::from_integer(denom.into());
        if !span.is_integer() {
            return Err(Error::config(format!("window [{lo}, {hi}] is not a multiple of 1/{denom}")));
        }
        Ok(Self { lo, hi, denom })
    }

    pub fn points(&self) -> Vec<Rat> {
        let step = Rat::new(1.into(), self.denom.into());
        let mut out = Vec::new();
        let mut s = self.lo.clone();
        while s <= self.hi {
            out.push(s.clone());
            s += &step;
        }
        out
    }

    /// The window widened by `margin` on both sides.
    pub fn widened(&self, margin: &Rat) -> Self {
        Self {
            lo: &self.lo - margin,
            hi: &self.hi + margin,
            denom: self.denom,
        }
    }
}

/// Truncation of the time ring used by every sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridCtx {
    pub nvars: usize,
    pub cap: u32,
}

/// Coefficient function sampled on a set of points, each sample a truncated
/// time series. `Uniform` is an `s`-independent value.
///
/// Binary operations between sampled values keep the common points, so the
/// usable window shrinks as shifts accumulate.
#[derive(Clone, Debug, PartialEq)]
pub enum GridCoeff {
    Uniform(TPoly),
    Sampled(BTreeMap<Rat, TPoly>),
}

impl GridCoeff {
    pub fn sampled(values: BTreeMap<Rat, TPoly>) -> Self {
        Self::Sampled(values)
    }

    /// Sample at `s`; `None` outside the window.
    pub fn at(&self, s: &Rat) -> Option<&TPoly> {
        match self {
            Self::Uniform(p) => Some(p),
            Self::Sampled(m) => m.get(s),
        }
    }

    pub fn points(&self) -> Option<Vec<Rat>> {
        match self {
            Self::Uniform(_) => None,
            Self::Sampled(m) => Some(m.keys().cloned().collect()),
        }
    }

    /// Applies `f` to each sample.
    pub fn map(&self, f: impl Fn(&TPoly) -> TPoly) -> Self {
        match self {
            Self::Uniform(p) => Self::Uniform(f(p)),
            Self::Sampled(m) => Self::Sampled(m.iter().map(|(s, p)| (s.clone(), f(p))).collect()),
        }
    }

    /// Whether every sample vanishes through weight `deg` (and is known
    /// that far). An empty window is never reported as vanishing.
    pub fn vanishes_through(&self, deg: i64) -> bool {
        let ok = |p: &TPoly| p.valid() >= deg && p.truncated(deg).is_zero();
        match self {
            Self::Uniform(p) => ok(p),
            Self::Sampled(m) => !m.is_empty() && m.values().all(ok),
        }
    }

    /// Smallest `valid` over the samples.
    pub fn valid(&self) -> i64 {
        match self {
            Self::Uniform(p) => p.valid(),
            Self::Sampled(m) => m.values().map(TPoly::valid).min().unwrap_or(i64::MIN),
        }
    }

    /// Samples an exponential-backend coefficient; needs `β`-degree 0.
    pub fn from_exp(c: &ExpCoeff, points: &[Rat], exp_ctx: &ExpCtx, ctx: &GridCtx) -> Result<Self> {
        let mut out = BTreeMap::new();
        for s in points {
            let v = c.eval(s, exp_ctx)?;
            let r = v.as_rat().ok_or_else(|| {
                Error::UnsupportedBackend("grid samples cannot carry a formal beta".into())
            })?;
            out.insert(s.clone(), TPoly::constant(r, ctx.nvars, ctx.cap));
        }
        Ok(Self::Sampled(out))
    }

    fn zip(&self, other: &Self, f: impl Fn(&TPoly, &TPoly) -> Result<TPoly>) -> Result<Self> {
        Ok(match (self, other) {
            (Self::Uniform(a), Self::Uniform(b)) => Self::Uniform(f(a, b)?),
            (Self::Uniform(a), Self::Sampled(m)) => {
                Self::Sampled(m.iter().map(|(s, b)| Ok((s.clone(), f(a, b)?))).collect::<Result<_>>()?)
            }
            (Self::Sampled(m), Self::Uniform(b)) => {
                Self::Sampled(m.iter().map(|(s, a)| Ok((s.clone(), f(a, b)?))).collect::<Result<_>>()?)
            }
            (Self::Sampled(m1), Self::Sampled(m2)) => Self::Sampled(
                m1.iter()
                    .filter_map(|(s, a)| m2.get(s).map(|b| (s, a, b)))
                    .map(|(s, a, b)| Ok((s.clone(), f(a, b)?)))
                    .collect::<Result<_>>()?,
            ),
        })
    }
}

impl Coeff for GridCoeff {
    type Ctx = GridCtx;

    fn zero(ctx: &GridCtx) -> Self {
        Self::Uniform(TPoly::zero(ctx.nvars, ctx.cap))
    }

    fn from_rat(r: &Rat, ctx: &GridCtx) -> Self {
        Self::Uniform(TPoly::constant(r.clone(), ctx.nvars, ctx.cap))
    }

    /// Only a structurally exact uniform zero counts; sampled values are
    /// never silently discarded.
    fn is_zero(&self) -> bool {
        match self {
            Self::Uniform(p) => p.is_zero() && p.valid() >= p.cap() as i64,
            Self::Sampled(_) => false,
        }
    }

    fn add(&self, other: &Self, _: &GridCtx) -> Result<Self> {
        self.zip(other, |a, b| a.add(b))
    }

    fn neg(&self) -> Self {
        self.map(TPoly::neg)
    }

    fn mul(&self, other: &Self, _: &GridCtx) -> Result<Self> {
        self.zip(other, |a, b| a.mul(b))
    }

    fn scale(&self, r: &Rat) -> Self {
        self.map(|p| p.scale(r))
    }

    fn shift(&self, alpha: &Rat, _: &GridCtx) -> Result<Self> {
        Ok(match self {
            Self::Uniform(p) => Self::Uniform(p.clone()),
            Self::Sampled(m) => Self::Sampled(m.iter().map(|(s, p)| (s - alpha, p.clone())).collect()),
        })
    }

    fn inv(&self, _: &GridCtx) -> Result<Self> {
        Ok(match self {
            Self::Uniform(p) => Self::Uniform(p.inv()?),
            Self::Sampled(m) => Self::Sampled(
                m.iter()
                    .map(|(s, p)| {
                        p.inv().map(|q| (s.clone(), q)).map_err(|_| {
                            Error::NotInvertible(format!("grid coefficient vanishes at s = {s}"))
                        })
                    })
                    .collect::<Result<_>>()?,
            ),
        })
    }

    fn is_empty_window(&self) -> bool {
        matches!(self, Self::Sampled(m) if m.is_empty())
    }

    fn render(&self) -> String {
        match self {
            Self::Uniform(p) => p.to_string(),
            Self::Sampled(m) => {
                let body: Vec<String> = m.iter().map(|(s, p)| format!("s={s}: {p}")).collect();
                format!("{{{}}}", body.join("; "))
            }
        }
    }
}

impl GridCoeff {
    /// Largest absolute coefficient over all samples and monomials.
    pub fn max_abs(&self) -> Rat {
        use num_traits::Signed;
        let of = |p: &TPoly| p.terms().map(|(_, r)| r.abs()).max().unwrap_or_else(Rat::zero);
        match self {
            Self::Uniform(p) => of(p),
            Self::Sampled(m) => m.values().map(of).max().unwrap_or_else(Rat::zero),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ri};

    fn ctx() -> GridCtx {
        GridCtx { nvars: 2, cap: 2 }
    }

    fn sampled(points: &[i64], f: impl Fn(i64) -> Rat) -> GridCoeff {
        let c = ctx();
        GridCoeff::Sampled(
            points
                .iter()
                .map(|s| (ri(*s), TPoly::constant(f(*s), c.nvars, c.cap)))
                .collect(),
        )
    }

    #[test]
    fn window_points() {
        let w = Window::new(ri(-1), ri(0), 2).unwrap();
        assert_eq!(w.points(), vec![ri(-1), rat(-1, 2), ri(0)]);
        assert!(Window::new(ri(0), rat(1, 3), 2).is_err());
    }

    #[test]
    fn shift_moves_keys_and_intersects() {
        let c = ctx();
        let a = sampled(&[0, 1, 2], |s| ri(s + 1));
        let b = a.shift(&ri(1), &c).unwrap();
        // b(s) = a(s+1) on s = -1, 0, 1
        assert_eq!(b.at(&ri(0)).unwrap().constant_term(), ri(2));
        let p = a.mul(&b, &c).unwrap();
        assert_eq!(p.points().unwrap(), vec![ri(0), ri(1)]);
        assert_eq!(p.at(&ri(1)).unwrap().constant_term(), ri(6));
    }

    #[test]
    fn no_silent_zeros() {
        let c = ctx();
        let z = sampled(&[0], |_| ri(0));
        assert!(!z.is_zero());
        assert!(GridCoeff::zero(&c).is_zero());
        assert!(z.vanishes_through(2));
        assert!(!GridCoeff::Sampled(BTreeMap::new()).vanishes_through(0));
        let lossy = GridCoeff::Uniform(TPoly::zero(2, 2).with_valid(1));
        assert!(!lossy.is_zero());
    }
}
