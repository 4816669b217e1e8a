use std::collections::BTreeMap;

use num_traits::{One, Zero};
use serde::Serialize;

use super::coeff::Coeff;
use super::exp_coeff::{ExpCoeff, ExpCtx};
use crate::error::{Error, Result};
use crate::scalar::{ri, Rat};

/// Truncated operator `Σ_α a_α(s) Λ^α` with `α ∈ (1/denom)Z`.
///
/// Terms with shift below `cap` are never stored. `floor` is the lowest
/// shift whose coefficient is known exactly; `None` means the operator is
/// exact (a finite sum).
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOp<C: Coeff> {
    terms: BTreeMap<Rat, C>,
    floor: Option<Rat>,
    cap: Rat,
    denom: u32,
}

/// Shifts carrying a nonzero coefficient and the exactness floor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BandProfile {
    pub shifts: Vec<Rat>,
    pub floor: Option<Rat>,
}

impl<C: Coeff> DiffOp<C> {
    pub fn zero(denom: u32, cap: Rat) -> Self {
        Self {
            terms: BTreeMap::new(),
            floor: None,
            cap,
            denom,
        }
    }

    pub fn identity(denom: u32, cap: Rat, ctx: &C::Ctx) -> Self {
        Self::monomial(Rat::zero(), C::from_rat(&Rat::one(), ctx), denom, cap)
            .expect("shift 0 is on every lattice")
    }

    /// `c(s) Λ^shift`.
    pub fn monomial(shift: Rat, c: C, denom: u32, cap: Rat) -> Result<Self> {
        let mut op = Self::zero(denom, cap);
        op.insert(shift, c)?;
        Ok(op)
    }

    /// `Λ^shift`.
    pub fn lambda(shift: Rat, denom: u32, cap: Rat, ctx: &C::Ctx) -> Result<Self> {
        Self::monomial(shift, C::from_rat(&Rat::one(), ctx), denom, cap)
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (Rat, C)>, denom: u32, cap: Rat) -> Result<Self> {
        let mut op = Self::zero(denom, cap);
        for (a, c) in terms {
            op.insert(a, c)?;
        }
        Ok(op)
    }

    /// Marks every shift below `floor` as unknown.
    pub fn with_floor(mut self, floor: Rat) -> Self {
        self.terms = self.terms.split_off(&floor);
        self.floor = Some(match self.floor.take() {
            Some(f) if f > floor => f,
            _ => floor,
        });
        self
    }

    fn insert(&mut self, shift: Rat, c: C) -> Result<()> {
        self.check_shift(&shift)?;
        if c.is_zero() || shift < self.cap {
            return Ok(());
        }
        self.terms.insert(shift, c);
        Ok(())
    }

    fn check_shift(&self, shift: &Rat) -> Result<()> {
        if !(shift * ri(self.denom as i64)).is_integer() {
            return Err(Error::Lattice {
                exponent: shift.clone(),
                denom: self.denom,
                context: "operator shift".into(),
            });
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.denom != other.denom {
            return Err(Error::config(format!(
                "mixed shift denominators {} and {}",
                self.denom, other.denom
            )));
        }
        if self.cap != other.cap {
            return Err(Error::config(format!("mixed truncation caps {} and {}", self.cap, other.cap)));
        }
        Ok(())
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Rat, &C)> {
        self.terms.iter()
    }

    pub fn coeff(&self, shift: &Rat) -> Option<&C> {
        self.terms.get(shift)
    }

    /// Whether the coefficient at `shift` is exactly known.
    pub fn is_known(&self, shift: &Rat) -> bool {
        shift >= &self.cap && self.floor.as_ref().map_or(true, |f| shift >= f)
    }

    pub fn floor(&self) -> Option<&Rat> {
        self.floor.as_ref()
    }

    pub fn cap(&self) -> &Rat {
        &self.cap
    }

    pub fn denom(&self) -> u32 {
        self.denom
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn max_shift(&self) -> Option<&Rat> {
        self.terms.keys().next_back()
    }

    pub fn min_shift(&self) -> Option<&Rat> {
        self.terms.keys().next()
    }

    /// Upper bound for any shift that may carry a nonzero coefficient.
    fn upper(&self) -> Option<Rat> {
        match (self.max_shift(), &self.floor) {
            (Some(a), Some(f)) => Some(a.max(f).clone()),
            (Some(a), None) => Some(a.clone()),
            (None, Some(f)) => Some(f.clone()),
            (None, None) => None,
        }
    }

    pub fn add(&self, other: &Self, ctx: &C::Ctx) -> Result<Self> {
        self.check_compatible(other)?;
        let floor = match (&self.floor, &other.floor) {
            (Some(a), Some(b)) => Some(a.max(b).clone()),
            (a, b) => a.clone().or_else(|| b.clone()),
        };
        let mut terms = self.terms.clone();
        for (a, c) in &other.terms {
            let merged = match terms.get(a) {
                Some(x) => x.add(c, ctx)?,
                None => c.clone(),
            };
            terms.insert(a.clone(), merged);
        }
        terms.retain(|a, c| !c.is_zero() && floor.as_ref().map_or(true, |f| a >= f));
        Ok(Self {
            terms,
            floor,
            cap: self.cap.clone(),
            denom: self.denom,
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.neg())).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self, ctx: &C::Ctx) -> Result<Self> {
        self.add(&other.neg(), ctx)
    }

    pub fn scale(&self, r: &Rat) -> Self {
        let mut out = Self {
            terms: self.terms.iter().map(|(a, c)| (a.clone(), c.scale(r))).collect(),
            ..self.clone()
        };
        out.terms.retain(|_, c| !c.is_zero());
        out
    }

    /// Product `Σ a_α(s) b_β(s+α) Λ^{α+β}`.
    pub fn mul(&self, other: &Self, ctx: &C::Ctx) -> Result<Self> {
        self.check_compatible(other)?;
        let known = match (&self.floor, &other.floor) {
            (None, None) => None,
            (fx, fy) => {
                let from_x = fx.as_ref().and_then(|f| other.upper().map(|u| f + u));
                let from_y = fy.as_ref().and_then(|f| self.upper().map(|u| f + u));
                match (from_x, from_y) {
                    (Some(a), Some(b)) => Some(a.max(b)),
                    (a, b) => a.or(b),
                }
            }
        };
        let threshold = match &known {
            Some(k) if k > &self.cap => k.clone(),
            _ => self.cap.clone(),
        };
        let mut dropped = false;
        let mut terms: BTreeMap<Rat, C> = BTreeMap::new();
        for (a, x) in &self.terms {
            for (b, y) in &other.terms {
                let s = a + b;
                if s < threshold {
                    dropped = true;
                    continue;
                }
                let prod = x.mul(&y.shift(a, ctx)?, ctx)?;
                let merged = match terms.remove(&s) {
                    Some(acc) => acc.add(&prod, ctx)?,
                    None => prod,
                };
                terms.insert(s, merged);
            }
        }
        terms.retain(|_, c| !c.is_zero());
        if !terms.is_empty() && terms.values().all(C::is_empty_window) {
            return Err(Error::EmptyWindow("operator product has no sample points left".into()));
        }
        let floor = if known.is_some() || dropped {
            Some(threshold)
        } else {
            None
        };
        Ok(Self {
            terms,
            floor,
            cap: self.cap.clone(),
            denom: self.denom,
        })
    }

    pub fn pow(&self, n: u32, ctx: &C::Ctx) -> Result<Self> {
        let mut acc = Self::identity(self.denom, self.cap.clone(), ctx);
        for _ in 0..n {
            acc = acc.mul(self, ctx)?;
        }
        Ok(acc)
    }

    /// `c(s) · X`.
    pub fn left_mul_coeff(&self, c: &C, ctx: &C::Ctx) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (a, x) in &self.terms {
            let p = c.mul(x, ctx)?;
            if !p.is_zero() {
                terms.insert(a.clone(), p);
            }
        }
        Ok(Self { terms, ..self.clone() })
    }

    /// `X · Λ^alpha`.
    pub fn right_shift(&self, alpha: &Rat) -> Result<Self> {
        self.check_shift(alpha)?;
        let mut out = Self::zero(self.denom, self.cap.clone());
        let mut dropped = false;
        for (a, c) in &self.terms {
            let s = a + alpha;
            if s < self.cap {
                dropped = true;
                continue;
            }
            out.terms.insert(s, c.clone());
        }
        out.floor = match (&self.floor, dropped) {
            (Some(f), _) => Some((f + alpha).max(self.cap.clone())),
            (None, true) => Some(self.cap.clone()),
            (None, false) => None,
        };
        Ok(out)
    }

    /// `Λ^alpha X Λ^{-alpha}`: every coefficient becomes `a(s + alpha)`.
    pub fn shift_coeffs(&self, alpha: &Rat, ctx: &C::Ctx) -> Result<Self> {
        self.check_shift(alpha)?;
        let terms = self
            .terms
            .iter()
            .map(|(a, c)| Ok((a.clone(), c.shift(alpha, ctx)?)))
            .collect::<Result<_>>()?;
        Ok(Self { terms, ..self.clone() })
    }

    /// Inverse of a unit-leading operator `u_0(s) + (lower shifts)`.
    pub fn inv(&self, ctx: &C::Ctx) -> Result<Self> {
        let zero = Rat::zero();
        if self.max_shift() != Some(&zero) {
            return Err(Error::NotInvertible(format!(
                "leading shift is {:?}, expected 0",
                self.max_shift().map(Rat::to_string)
            )));
        }
        if matches!(&self.floor, Some(f) if f >= &zero) {
            return Err(Error::Truncation("leading coefficient is not exactly known".into()));
        }
        let u0_inv = self.terms[&zero].inv(ctx)?;
        let mut rest = self.clone();
        rest.terms.remove(&zero);
        let y = rest.left_mul_coeff(&u0_inv, ctx)?;
        let series = self.geometric(&y.neg(), ctx, |_| Rat::one(), true)?;
        let right = Self::monomial(zero, u0_inv, self.denom, self.cap.clone())?;
        series.mul(&right, ctx)
    }

    /// `Σ_{n>=0} w(n) X^n` for strictly negative `X`.
    fn geometric(&self, x: &Self, ctx: &C::Ctx, w: impl Fn(u32) -> Rat, include_one: bool) -> Result<Self> {
        if let Some(u) = x.upper() {
            if u >= Rat::zero() {
                return Err(Error::Truncation(format!(
                    "series argument must have strictly negative shifts, upper bound {u}"
                )));
            }
        }
        let mut acc = if include_one {
            Self::identity(self.denom, self.cap.clone(), ctx)
        } else {
            Self::zero(self.denom, self.cap.clone())
        };
        let mut power = Self::identity(self.denom, self.cap.clone(), ctx);
        let mut n = 0u32;
        loop {
            n += 1;
            power = power.mul(x, ctx)?;
            let exhausted = power.is_zero() && power.floor.as_ref().map_or(true, |f| f <= &self.cap);
            let weight = w(n);
            if !weight.is_zero() || !power.floor.is_none() {
                acc = acc.add(&power.scale(&weight), ctx)?;
            }
            if exhausted {
                break;
            }
        }
        Ok(acc)
    }

    /// `exp(X)` for strictly negative `X`.
    pub fn exp(&self, ctx: &C::Ctx) -> Result<Self> {
        let mut fact = Rat::one();
        let weights: Vec<Rat> = (0..=self.series_len())
            .map(|n| {
                if n > 0 {
                    fact *= ri(n as i64);
                }
                fact.recip()
            })
            .collect();
        self.geometric(self, ctx, |n| weights.get(n as usize).cloned().unwrap_or_else(Rat::zero), true)
    }

    /// `log(1 + X)` for strictly negative `X`.
    pub fn log1p(&self, ctx: &C::Ctx) -> Result<Self> {
        self.geometric(
            self,
            ctx,
            |n| {
                let r = Rat::new(1.into(), (n as i64).into());
                if n % 2 == 1 {
                    r
                } else {
                    -r
                }
            },
            false,
        )
    }

    /// Upper bound on the number of nonvanishing powers of a negative operator.
    fn series_len(&self) -> usize {
        let steps = -(&self.cap) * ri(self.denom as i64);
        steps.to_integer().try_into().unwrap_or(0usize) + 2
    }

    /// `X_{>=0}`; exact, or a truncation error if shift 0 is not known.
    pub fn plus(&self) -> Result<Self> {
        if matches!(&self.floor, Some(f) if f > &Rat::zero()) {
            return Err(Error::Truncation("nonnegative part is not exactly known".into()));
        }
        Ok(Self {
            terms: self.terms.range(Rat::zero()..).map(|(a, c)| (a.clone(), c.clone())).collect(),
            floor: None,
            cap: self.cap.clone(),
            denom: self.denom,
        })
    }

    /// `X_{<0}`.
    pub fn minus(&self) -> Self {
        Self {
            terms: self.terms.range(..Rat::zero()).map(|(a, c)| (a.clone(), c.clone())).collect(),
            ..self.clone()
        }
    }

    /// Terms with shift in `[lo, hi]`, exact.
    pub fn band(&self, lo: &Rat, hi: &Rat) -> Result<Self> {
        if matches!(&self.floor, Some(f) if f > lo) || lo < &self.cap {
            return Err(Error::Truncation(format!("band starting at {lo} is not exactly known")));
        }
        Ok(Self {
            terms: self.terms.range(lo.clone()..=hi.clone()).map(|(a, c)| (a.clone(), c.clone())).collect(),
            floor: None,
            cap: self.cap.clone(),
            denom: self.denom,
        })
    }

    /// Coefficient-wise map into another backend.
    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> Result<D>) -> Result<DiffOp<D>> {
        let mut terms = BTreeMap::new();
        for (a, c) in &self.terms {
            let d = f(c)?;
            if !d.is_zero() {
                terms.insert(a.clone(), d);
            }
        }
        Ok(DiffOp {
            terms,
            floor: self.floor.clone(),
            cap: self.cap.clone(),
            denom: self.denom,
        })
    }

    /// Coefficient-wise `∂_s`.
    pub fn ds(&self, ctx: &C::Ctx) -> Result<Self> {
        self.map_coeffs(|c| c.ds(ctx))
    }

    /// Human-readable listing, highest shift first.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (a, c) in self.terms.iter().rev() {
            out.push_str(&format!("Lambda^({a}): {}\n", c.render()));
        }
        match &self.floor {
            Some(f) => out.push_str(&format!("exact through shift {f}\n")),
            None => out.push_str("exact\n"),
        }
        out
    }
}

/// `[A, B] = AB - BA`.
pub fn commutator<C: Coeff>(a: &DiffOp<C>, b: &DiffOp<C>, ctx: &C::Ctx) -> Result<DiffOp<C>> {
    a.mul(b, ctx)?.sub(&b.mul(a, ctx)?, ctx)
}

/// `W Λ^alpha W^{-1}`.
pub fn conjugate_shift<C: Coeff>(w: &DiffOp<C>, alpha: &Rat, ctx: &C::Ctx) -> Result<DiffOp<C>> {
    let winv = w.inv(ctx)?;
    w.mul(&winv.shift_coeffs(alpha, ctx)?, ctx)?.right_shift(alpha)
}

pub fn band_profile<C: Coeff>(op: &DiffOp<C>) -> BandProfile {
    BandProfile {
        shifts: op.terms.keys().cloned().collect(),
        floor: op.floor.clone(),
    }
}

/// `∂_s + tail`, a dressed logarithm `W (log Λ) W^{-1}` with `log Λ = ∂_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogOp {
    pub tail: DiffOp<ExpCoeff>,
}

impl LogOp {
    /// `[∂_s + T, X] = ∂_s X + [T, X]`.
    pub fn commutator_with(&self, x: &DiffOp<ExpCoeff>, ctx: &ExpCtx) -> Result<DiffOp<ExpCoeff>> {
        x.ds(ctx)?.add(&commutator(&self.tail, x, ctx)?, ctx)
    }
}

/// `W (log Λ) W^{-1} = log Λ - (∂_s W) W^{-1}`.
pub fn op_log_dressed(w: &DiffOp<ExpCoeff>, ctx: &ExpCtx) -> Result<LogOp> {
    let tail = w.ds(ctx)?.mul(&w.inv(ctx)?, ctx)?.neg();
    Ok(LogOp { tail })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ParamEnv};
    use proptest::prelude::*;

    fn ctx() -> ExpCtx {
        ExpCtx::new(&ParamEnv::new(rat(2, 1), 1).unwrap())
    }

    fn c(r: i64) -> ExpCoeff {
        ExpCoeff::constant(ri(r))
    }

    fn es(r: i64, lin: i64) -> ExpCoeff {
        ExpCoeff::exp_lin(ri(r), ri(lin))
    }

    fn op(terms: &[(i64, ExpCoeff)], cap: i64) -> DiffOp<ExpCoeff> {
        DiffOp::from_terms(terms.iter().map(|(a, x)| (ri(*a), x.clone())), 1, ri(cap)).unwrap()
    }

    #[test]
    fn product_shifts_the_right_factor() {
        let k = ctx();
        // (Λ)(e^{βs}) = e^{β(s+1)} Λ = 2 e^{βs} Λ at e^β = 2
        let l = op(&[(1, c(1))], -5);
        let x = op(&[(0, es(1, 1))], -5);
        let p = l.mul(&x, &k).unwrap();
        assert_eq!(p.coeff(&ri(1)), Some(&es(2, 1)));
        let q = x.mul(&l, &k).unwrap();
        assert_eq!(q.coeff(&ri(1)), Some(&es(1, 1)));
        let comm = commutator(&l, &x, &k).unwrap();
        assert_eq!(comm.coeff(&ri(1)), Some(&es(1, 1)));
    }

    #[test]
    fn inverse_of_one_minus_lambda_inverse() {
        let k = ctx();
        let x = op(&[(0, c(1)), (-1, c(-1))], -4);
        let inv = x.inv(&k).unwrap();
        for n in 0..=4 {
            assert_eq!(inv.coeff(&ri(-n)), Some(&c(1)));
        }
        assert_eq!(inv.floor(), Some(&ri(-4)));
        let id = x.mul(&inv, &k).unwrap();
        assert_eq!(id.terms().count(), 1);
        assert_eq!(id.floor(), Some(&ri(-4)));
    }

    #[test]
    fn projections_respect_floor() {
        let k = ctx();
        let x = op(&[(2, c(1)), (0, c(3)), (-1, c(1))], -3);
        assert_eq!(x.plus().unwrap().terms().count(), 2);
        assert_eq!(x.minus().terms().count(), 1);
        let y = x.clone().with_floor(ri(1));
        assert!(matches!(y.plus(), Err(Error::Truncation(_))));
        let z = x.mul(&DiffOp::identity(1, ri(-3), &k).with_floor(ri(-1)), &k).unwrap();
        // floor -1 + upper 2 = 1
        assert_eq!(z.floor(), Some(&ri(1)));
    }

    #[test]
    fn conjugation_of_lambda_by_exponential() {
        let k = ctx();
        // W = e^{βs}: W Λ W^{-1} = e^{βs} e^{-β(s+1)} Λ = (1/2) Λ
        let w = op(&[(0, es(1, 1))], -3);
        let l = conjugate_shift(&w, &ri(1), &k).unwrap();
        assert_eq!(l.coeff(&ri(1)), Some(&ExpCoeff::constant(rat(1, 2))));
        assert_eq!(l.terms().count(), 1);
    }

    #[test]
    fn dressed_log_of_exponential_gauge() {
        let k = ctx();
        // W = e^{β s²/2}... not ds-able; use W = 1 + e^{βs}Λ^{-1}
        let w = op(&[(0, c(1)), (-1, es(1, 1))], -3);
        let log = op_log_dressed(&w, &k).unwrap();
        // leading tail term: -β e^{βs} Λ^{-1}
        assert_eq!(log.tail.coeff(&ri(-1)), Some(&ExpCoeff::term(ri(-1), 1, ri(1), ri(0))));
    }

    #[test]
    fn exp_log_examples() {
        let k = ctx();
        let x = op(&[(-1, c(1))], -4);
        let e = x.exp(&k).unwrap();
        assert_eq!(e.coeff(&ri(-2)), Some(&ExpCoeff::constant(rat(1, 2))));
        assert_eq!(e.coeff(&ri(-4)), Some(&ExpCoeff::constant(rat(1, 24))));
        let back = e.sub(&DiffOp::identity(1, ri(-4), &k), &k).unwrap().log1p(&k).unwrap();
        assert_eq!(back.terms().count(), 1);
        assert_eq!(back.coeff(&ri(-1)), Some(&c(1)));
        assert!(op(&[(0, c(1))], -4).exp(&k).is_err());
    }

    #[test]
    fn mixed_denominators_rejected() {
        let k = ctx();
        let a = DiffOp::<ExpCoeff>::lambda(rat(1, 2), 2, ri(-2), &k).unwrap();
        let b = DiffOp::<ExpCoeff>::lambda(ri(1), 1, ri(-2), &k).unwrap();
        assert!(a.mul(&b, &k).is_err());
        assert!(DiffOp::<ExpCoeff>::lambda(rat(1, 3), 2, ri(-2), &k).is_err());
    }

    fn arb_coeff() -> impl Strategy<Value = ExpCoeff> {
        prop::collection::vec((-3i64..=3, -2i64..=2), 1..3).prop_map(|v| {
            let k = ctx();
            v.into_iter()
                .fold(ExpCoeff::default(), |acc, (r, l)| acc.add(&es(r, l), &k).unwrap())
        })
    }

    fn arb_op(lo: i64, hi: i64) -> impl Strategy<Value = DiffOp<ExpCoeff>> {
        prop::collection::vec((lo..=hi, arb_coeff()), 0..3)
            .prop_map(|v| DiffOp::from_terms(v.into_iter().map(|(a, x)| (ri(a), x)), 1, ri(-6)).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn multiplication_is_associative(a in arb_op(-1, 1), b in arb_op(-1, 1), c in arb_op(-1, 1)) {
            let k = ctx();
            let l = a.mul(&b, &k).unwrap().mul(&c, &k).unwrap();
            let r = a.mul(&b.mul(&c, &k).unwrap(), &k).unwrap();
            prop_assert_eq!(l, r);
        }

        #[test]
        fn inverse_round_trip(tail in arb_op(-3, -1), u in -2i64..=2) {
            let k = ctx();
            let lead = DiffOp::monomial(ri(0), es(3, u), 1, ri(-6)).unwrap();
            let x = lead.add(&tail, &k).unwrap();
            let id = DiffOp::identity(1, ri(-6), &k);
            let left = x.inv(&k).unwrap().mul(&x, &k).unwrap();
            let right = x.mul(&x.inv(&k).unwrap(), &k).unwrap();
            prop_assert_eq!(left.terms().collect::<Vec<_>>(), id.terms().collect::<Vec<_>>());
            prop_assert_eq!(right.terms().collect::<Vec<_>>(), id.terms().collect::<Vec<_>>());
        }

        #[test]
        fn projection_commutes_with_fractional_conjugation(v in prop::collection::vec((-2i64..=2, arb_coeff()), 0..4)) {
            let k = ExpCtx::new(&ParamEnv::new(rat(3, 1), 2).unwrap());
            let x = DiffOp::from_terms(v.into_iter().map(|(a, c)| (ri(a), c)), 2, ri(-6)).unwrap();
            let lam = DiffOp::lambda(rat(1, 2), 2, ri(-6), &k).unwrap();
            let lam_inv = DiffOp::lambda(rat(-1, 2), 2, ri(-6), &k).unwrap();
            let conj = |y: &DiffOp<ExpCoeff>| lam.mul(&y.mul(&lam_inv, &k).unwrap(), &k).unwrap();
            let lhs = conj(&x).plus().unwrap();
            let rhs = conj(&x.plus().unwrap());
            prop_assert_eq!(lhs.terms().collect::<Vec<_>>(), rhs.terms().collect::<Vec<_>>());
        }

        #[test]
        fn grid_multiplication_is_associative(vals in prop::collection::vec((-1i64..=1, prop::collection::vec(-5i64..=5, 9)), 3)) {
            use crate::ops::{GridCoeff, GridCtx};
            use crate::scalar::TPoly;
            let k = GridCtx { nvars: 1, cap: 1 };
            let mk = |(a, vs): &(i64, Vec<i64>)| {
                let m = (-4..=4i64)
                    .zip(vs)
                    .map(|(s, v)| (ri(s), TPoly::constant(ri(*v), 1, 1)))
                    .collect();
                DiffOp::monomial(ri(*a), GridCoeff::Sampled(m), 1, ri(-4)).unwrap()
            };
            let (a, b, c) = (mk(&vals[0]), mk(&vals[1]), mk(&vals[2]));
            let l = a.mul(&b, &k).and_then(|ab| ab.mul(&c, &k));
            let r = b.mul(&c, &k).and_then(|bc| a.mul(&bc, &k));
            match (l, r) {
                (Ok(l), Ok(r)) => prop_assert_eq!(l, r),
                (Err(_), Err(_)) => {}
                (l, r) => prop_assert!(false, "one side failed: {:?} / {:?}", l.is_ok(), r.is_ok()),
            }
        }

        #[test]
        fn log_inverts_exp(x in arb_op(-3, -1)) {
            let k = ctx();
            let e = x.exp(&k).unwrap();
            let back = e.sub(&DiffOp::identity(1, ri(-6), &k), &k).unwrap().log1p(&k).unwrap();
            prop_assert_eq!(back.terms().collect::<Vec<_>>(), x.terms().collect::<Vec<_>>());
        }
    }
}
