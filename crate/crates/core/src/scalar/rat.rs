use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational in canonical form.
pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn ri(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parses `"3"`, `"-1/16"`; decimals are rejected so no value ever passes
/// through a float.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let t = s.trim();
    t.parse::<Rat>()
        .map_err(|_| Error::Parse(format!("not an exact rational: {s:?}")))
        .and_then(|r| {
            if t.contains('.') {
                Err(Error::Parse(format!("decimal input not allowed: {s:?}")))
            } else {
                Ok(r)
            }
        })
}

/// `x^n` for any integer `n`; errors on `0^n` with `n < 0`.
pub fn pow_int(x: &Rat, n: i64) -> Result<Rat> {
    if n >= 0 {
        Ok(num_traits::pow(x.clone(), n as usize))
    } else if x.is_zero() {
        Err(Error::NotInvertible("zero to a negative power".into()))
    } else {
        Ok(num_traits::pow(x.recip(), (-n) as usize))
    }
}

/// Exact `n`-th root of a rational, if it is rational.
pub fn rat_root(x: &Rat, n: u32) -> Option<Rat> {
    if n == 0 {
        return None;
    }
    if n == 1 || x.is_zero() {
        return Some(x.clone());
    }
    let neg = x.is_negative();
    if neg && n % 2 == 0 {
        return None;
    }
    let num = x.numer().abs();
    let den = x.denom().clone();
    let rn = num.nth_root(n);
    let rd = den.nth_root(n);
    if num_traits::pow(rn.clone(), n as usize) != num || num_traits::pow(rd.clone(), n as usize) != den {
        return None;
    }
    let r = Rat::new(rn, rd);
    Some(if neg { -r } else { r })
}

/// `x^p` for rational `p`, when the result is rational.
pub fn rat_pow(x: &Rat, p: &Rat) -> Option<Rat> {
    let d: u32 = p.denom().try_into().ok()?;
    let n: i64 = p.numer().try_into().ok()?;
    let root = rat_root(x, d)?;
    pow_int(&root, n).ok()
}

pub(crate) fn is_integer(x: &Rat) -> bool {
    x.denom().is_one()
}

pub(crate) fn to_i64(x: &Rat) -> Option<i64> {
    if is_integer(x) {
        x.numer().try_into().ok()
    } else {
        None
    }
}

pub fn to_f64(x: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_rejects_decimals() {
        assert_eq!(parse_rat("1/16").unwrap(), rat(1, 16));
        assert_eq!(parse_rat("-3").unwrap(), ri(-3));
        assert!(parse_rat("0.5").is_err());
        assert!(parse_rat("abc").is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(rat_root(&rat(1, 16), 2), Some(rat(1, 4)));
        assert_eq!(rat_root(&rat(-8, 27), 3), Some(rat(-2, 3)));
        assert_eq!(rat_root(&rat(1, 2), 2), None);
        assert_eq!(rat_pow(&rat(1, 64), &rat(1, 6)), Some(rat(1, 2)));
        assert_eq!(rat_pow(&rat(4, 9), &rat(-3, 2)), Some(rat(27, 8)));
    }

    #[test]
    fn negative_powers() {
        assert_eq!(pow_int(&rat(2, 3), -2).unwrap(), rat(9, 4));
        assert!(pow_int(&ri(0), -1).is_err());
    }
}
