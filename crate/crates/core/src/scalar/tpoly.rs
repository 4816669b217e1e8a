use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use super::rat::{pow_int, Rat};
use crate::error::{Error, Result};

/// Exponent vector `(e_1, ..., e_K)` of a monomial in the times `t_1..t_K`.
pub type Monomial = Vec<u8>;

/// Weighted degree `Σ k·e_k`.
pub fn weight(m: &[u8]) -> u32 {
    m.iter().enumerate().map(|(i, e)| (i as u32 + 1) * *e as u32).sum()
}

/// All monomials in `nvars` times with weighted degree `<= cap`, by weight.
pub fn monomials_up_to(nvars: usize, cap: u32) -> Vec<Monomial> {
    fn rec(var: usize, nvars: usize, left: u32, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if var == nvars {
            out.push(cur.clone());
            return;
        }
        let w = var as u32 + 1;
        let mut e = 0u32;
        while e * w <= left {
            cur[var] = e as u8;
            rec(var + 1, nvars, left - e * w, cur, out);
            e += 1;
        }
        cur[var] = 0;
    }
    let mut out = Vec::new();
    rec(0, nvars, cap, &mut vec![0; nvars], &mut out);
    out.sort_by_key(|m| (weight(m), std::cmp::Reverse(m.clone())));
    out
}

/// Truncated polynomial in the KP times, graded by weighted degree.
///
/// Monomials of weight above `cap` are never stored. `valid` records the
/// weight through which the value is exact; it only decreases under
/// arithmetic and differentiation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TPoly {
    nvars: usize,
    cap: u32,
    valid: i64,
    terms: BTreeMap<Monomial, Rat>,
}

impl TPoly {
    pub fn zero(nvars: usize, cap: u32) -> Self {
        Self {
            nvars,
            cap,
            valid: cap as i64,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(r: Rat, nvars: usize, cap: u32) -> Self {
        let mut p = Self::zero(nvars, cap);
        if !r.is_zero() {
            p.terms.insert(vec![0; nvars], r);
        }
        p
    }

    pub fn one(nvars: usize, cap: u32) -> Self {
        Self::constant(Rat::one(), nvars, cap)
    }

    /// The time `t_k`, `1 <= k <= nvars`.
    pub fn var(k: usize, nvars: usize, cap: u32) -> Self {
        assert!(k >= 1 && k <= nvars, "time index {k} out of range 1..={nvars}");
        let mut m = vec![0; nvars];
        m[k - 1] = 1;
        Self::monomial(m, Rat::one(), cap)
    }

    pub fn monomial(m: Monomial, r: Rat, cap: u32) -> Self {
        let nvars = m.len();
        let mut p = Self::zero(nvars, cap);
        if weight(&m) <= cap && !r.is_zero() {
            p.terms.insert(m, r);
        }
        p
    }

    pub fn from_terms(nvars: usize, cap: u32, terms: impl IntoIterator<Item = (Monomial, Rat)>) -> Self {
        let mut p = Self::zero(nvars, cap);
        for (m, r) in terms {
            assert_eq!(m.len(), nvars);
            if weight(&m) <= cap {
                *p.terms.entry(m).or_insert_with(Rat::zero) += r;
            }
        }
        p.terms.retain(|_, r| !r.is_zero());
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    /// Weighted degree through which this value is exact.
    pub fn valid(&self) -> i64 {
        self.valid
    }

    pub fn with_valid(mut self, valid: i64) -> Self {
        self.valid = valid.min(self.cap as i64);
        self
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &[u8]) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn constant_term(&self) -> Rat {
        self.coeff(&vec![0; self.nvars])
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars || self.cap != other.cap {
            return Err(Error::config(format!(
                "mismatched truncation: (K={}, D={}) vs (K={}, D={})",
                self.nvars, self.cap, other.nvars, other.cap
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut terms = self.terms.clone();
        for (m, r) in &other.terms {
            *terms.entry(m.clone()).or_insert_with(Rat::zero) += r;
        }
        terms.retain(|_, r| !r.is_zero());
        Ok(Self {
            nvars: self.nvars,
            cap: self.cap,
            valid: self.valid.min(other.valid),
            terms,
        })
    }

    pub fn neg(&self) -> Self {
        Self {
            terms: self.terms.iter().map(|(m, r)| (m.clone(), -r)).collect(),
            ..self.clone()
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, r: &Rat) -> Self {
        if r.is_zero() {
            return Self::zero(self.nvars, self.cap).with_valid(self.valid);
        }
        Self {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * r)).collect(),
            ..self.clone()
        }
    }

    /// Truncated product. Monomials above the joint `valid` degree are not
    /// formed: they would be unreliable anyway.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let valid = self.valid.min(other.valid);
        if valid < 0 {
            return Ok(Self::zero(self.nvars, self.cap).with_valid(valid));
        }
        let limit = (valid as u32).min(self.cap);
        let rhs: Vec<(&Monomial, u32, &Rat)> = other.terms.iter().map(|(m, r)| (m, weight(m), r)).collect();
        let mut terms: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (m1, r1) in &self.terms {
            let w1 = weight(m1);
            if w1 > limit {
                continue;
            }
            for (m2, w2, r2) in &rhs {
                if w1 + w2 > limit {
                    continue;
                }
                let m: Monomial = m1.iter().zip(m2.iter()).map(|(a, b)| a + b).collect();
                *terms.entry(m).or_insert_with(Rat::zero) += r1 * *r2;
            }
        }
        terms.retain(|_, r| !r.is_zero());
        Ok(Self {
            nvars: self.nvars,
            cap: self.cap,
            valid,
            terms,
        })
    }

    /// Inverse in the truncated ring; needs a nonzero constant term.
    pub fn inv(&self) -> Result<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return Err(Error::NotInvertible("time series with zero constant term".into()));
        }
        let c0inv = c0.recip();
        // x = c0 (1 + y), x^{-1} = c0^{-1} Σ (-y)^n
        let mut neg_y = self.scale(&(-&c0inv));
        neg_y.terms.remove(&vec![0; self.nvars]);
        let mut acc = Self::one(self.nvars, self.cap);
        let mut power = Self::one(self.nvars, self.cap);
        for _ in 0..self.cap {
            power = power.mul(&neg_y)?;
            if power.is_zero() {
                break;
            }
            acc = acc.add(&power)?;
        }
        Ok(acc.scale(&c0inv).with_valid(self.valid))
    }

    /// Formal `∂/∂t_k`; exact through `valid - k`.
    pub fn diff(&self, k: usize) -> Self {
        assert!(k >= 1 && k <= self.nvars, "time index {k} out of range 1..={}", self.nvars);
        let mut terms = BTreeMap::new();
        for (m, r) in &self.terms {
            let e = m[k - 1];
            if e == 0 {
                continue;
            }
            let mut m2 = m.clone();
            m2[k - 1] = e - 1;
            terms.insert(m2, r * Rat::from_integer(e.into()));
        }
        Self {
            nvars: self.nvars,
            cap: self.cap,
            valid: self.valid - k as i64,
            terms,
        }
    }

    /// Evaluates at `t_k = values[k-1]`; missing values count as zero.
    pub fn eval(&self, values: &[Rat]) -> Result<Rat> {
        let mut acc = Rat::zero();
        for (m, r) in &self.terms {
            let mut term = r.clone();
            for (i, e) in m.iter().enumerate() {
                if *e == 0 {
                    continue;
                }
                let v = values.get(i).cloned().unwrap_or_else(Rat::zero);
                term *= pow_int(&v, *e as i64)?;
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Substitutes `t_k -> (-1)^{k-1} t_k`.
    pub fn alternate_signs(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(m, r)| {
                let odd: u32 = m.iter().enumerate().filter(|(i, _)| i % 2 == 1).map(|(_, e)| *e as u32).sum();
                (m.clone(), if odd % 2 == 1 { -r } else { r.clone() })
            })
            .collect();
        Self { terms, ..self.clone() }
    }

    /// Copy with all monomials of weight `> deg` removed.
    pub fn truncated(&self, deg: i64) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(m, _)| (weight(m) as i64) <= deg)
            .map(|(m, r)| (m.clone(), r.clone()))
            .collect();
        Self {
            terms,
            valid: self.valid.min(deg),
            ..self.clone()
        }
    }

    /// Re-embeds into a ring with a different number of times or cap.
    pub fn recast(&self, nvars: usize, cap: u32) -> Self {
        let terms = self.terms.iter().filter_map(|(m, r)| {
            if m.iter().skip(nvars).any(|e| *e != 0) {
                return None;
            }
            let mut m2: Monomial = m.iter().take(nvars).copied().collect();
            m2.resize(nvars, 0);
            Some((m2, r.clone()))
        });
        let p = Self::from_terms(nvars, cap, terms);
        p.with_valid(self.valid)
    }

    /// Whether every stored monomial has weight exactly `w`.
    pub fn is_homogeneous(&self, w: u32) -> bool {
        self.terms.keys().all(|m| weight(m) == w)
    }
}

impl fmt::Display for TPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        let mut ordered: Vec<_> = self.terms.iter().collect();
        ordered.sort_by_key(|(m, _)| (weight(m), std::cmp::Reverse((*m).clone())));
        for (m, r) in ordered {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({r})")?;
            for (i, e) in m.iter().enumerate() {
                match e {
                    0 => {}
                    1 => write!(f, "*t{}", i + 1)?,
                    _ => write!(f, "*t{}^{}", i + 1, e)?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{rat, ri};

    fn t(k: usize, d: u32) -> TPoly {
        TPoly::var(k, 3, d)
    }

    #[test]
    fn products_truncate_by_weight() {
        let d = 3;
        let sq = t(1, d).mul(&t(1, d)).unwrap();
        assert_eq!(sq.coeff(&[2, 0, 0]), ri(1));
        let one = TPoly::one(3, 2);
        let a = one.add(&TPoly::var(1, 3, 2)).unwrap();
        let b = one.sub(&TPoly::var(1, 3, 2)).unwrap();
        let prod = a.mul(&b).unwrap();
        assert_eq!(prod.constant_term(), ri(1));
        assert_eq!(prod.coeff(&[2, 0, 0]), ri(-1));
        assert_eq!(prod.len(), 2);
        assert!(t(2, d).mul(&t(2, d)).unwrap().is_zero());
    }

    #[test]
    fn mismatched_caps_are_rejected() {
        assert!(matches!(t(1, 2).mul(&t(1, 3)), Err(Error::Config(_))));
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(TPoly::one(3, 4).inv().unwrap(), TPoly::one(3, 4));
        let x = TPoly::one(3, 2).add(&TPoly::var(1, 3, 2)).unwrap();
        // geometric series oracle: 1 - t1 + t1^2
        let expect = TPoly::from_terms(3, 2, [(vec![0, 0, 0], ri(1)), (vec![1, 0, 0], ri(-1)), (vec![2, 0, 0], ri(1))]);
        assert_eq!(x.inv().unwrap(), expect);
        assert_eq!(TPoly::constant(ri(2), 3, 1).inv().unwrap(), TPoly::constant(rat(1, 2), 3, 1));
        assert!(TPoly::var(1, 3, 2).inv().is_err());
    }

    #[test]
    fn derivative_examples() {
        let d = 6;
        let p = t(1, d).mul(&t(1, d)).unwrap().scale(&rat(1, 2)).add(&t(2, d)).unwrap();
        assert_eq!(p.diff(1), t(1, d).with_valid(5));
        assert_eq!(p.diff(2), TPoly::one(3, d).with_valid(4));
        assert!(t(1, d).mul(&t(2, d)).unwrap().diff(3).is_zero());
        assert_eq!(p.diff(2).valid(), 4);
    }

    #[test]
    fn monomial_counts() {
        // partitions of n with parts <= 6, n <= 6: 1+1+2+3+5+7+11
        assert_eq!(monomials_up_to(6, 6).len(), 30);
        assert_eq!(monomials_up_to(2, 3).len(), 1 + 1 + 2 + 2);
    }
}
