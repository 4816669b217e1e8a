//! Schur polynomials in the KP times, their special values, and the
//! `c`-vector families.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::scalar::{ri, ParamEnv, Rat, TPoly};

/// One-row Schur polynomials `S_0..S_nmax` from `exp(Σ t_k z^k)`, via
/// `n S_n = Σ_k k t_k S_{n-k}`.
pub fn one_row(nmax: u32, nvars: usize, cap: u32) -> Result<Vec<TPoly>> {
    let mut out = vec![TPoly::one(nvars, cap)];
    for n in 1..=nmax as usize {
        let mut acc = TPoly::zero(nvars, cap);
        for k in 1..=n.min(nvars) {
            let term = TPoly::var(k, nvars, cap).mul(&out[n - k])?.scale(&ri(k as i64));
            acc = acc.add(&term)?;
        }
        out.push(acc.scale(&Rat::new(1.into(), (n as i64).into())));
    }
    Ok(out)
}

/// Determinant over a commutative ring by Laplace expansion along the first
/// row, skipping structurally zero entries.
pub(crate) fn det<T: Clone>(
    m: &[Vec<Option<T>>],
    one: &T,
    mul: &dyn Fn(&T, &T) -> Result<T>,
    add: &dyn Fn(&T, &T) -> Result<T>,
    neg: &dyn Fn(&T) -> T,
) -> Result<Option<T>> {
    fn rec<T: Clone>(
        m: &[Vec<Option<T>>],
        row: usize,
        cols: &mut Vec<usize>,
        one: &T,
        mul: &dyn Fn(&T, &T) -> Result<T>,
        add: &dyn Fn(&T, &T) -> Result<T>,
        neg: &dyn Fn(&T) -> T,
    ) -> Result<Option<T>> {
        if row == m.len() {
            return Ok(Some(one.clone()));
        }
        let mut acc: Option<T> = None;
        for idx in 0..cols.len() {
            let c = cols[idx];
            let Some(entry) = &m[row][c] else { continue };
            cols.remove(idx);
            let minor = rec(m, row + 1, cols, one, mul, add, neg)?;
            cols.insert(idx, c);
            let Some(minor) = minor else { continue };
            let mut term = mul(entry, &minor)?;
            if idx % 2 == 1 {
                term = neg(&term);
            }
            acc = Some(match acc {
                None => term,
                Some(a) => add(&a, &term)?,
            });
        }
        Ok(acc)
    }
    let mut cols: Vec<usize> = (0..m.len()).collect();
    rec(m, 0, &mut cols, one, mul, add, neg)
}

/// `S_λ(t)` from the Jacobi–Trudi minor of size `l(λ)`.
pub fn schur_poly(lambda: &Partition, nvars: usize, cap: u32) -> Result<TPoly> {
    let n = lambda.length();
    if n == 0 {
        return Ok(TPoly::one(nvars, cap));
    }
    let rows = one_row(lambda.parts()[0] + n as u32, nvars, cap)?;
    let matrix: Vec<Vec<Option<TPoly>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let idx = lambda.parts()[i] as i64 - i as i64 + j as i64;
                    if idx < 0 {
                        None
                    } else {
                        Some(rows[idx as usize].clone())
                    }
                })
                .collect()
        })
        .collect();
    let d = det(
        &matrix,
        &TPoly::one(nvars, cap),
        &|a, b| a.mul(b),
        &|a, b| a.add(b),
        &|a| a.neg(),
    )?;
    Ok(d.unwrap_or_else(|| TPoly::zero(nvars, cap)))
}

/// Family tag of a `c`-vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `t_∞ = (1, 0, 0, ...)`.
    A,
    /// `t(a) = (a/k)`.
    B,
    /// `t(∞, q) = (1/(k(1-q^k)))`.
    C,
    /// `t(a, q) = ((1-q^{ak})/(k(1-q^k)))`.
    D,
    /// `(c_1, ..., c_N, 0, ...)`.
    Finite,
    /// `Σ_n q^{b_n k}/(k(1-q^k))`.
    Gbin,
    /// `(Σ_n q^{b_n k} - Σ_n q^{a_n k})/(k(1-q^k))`.
    Grr,
    /// Arbitrary explicit constants.
    General,
    /// All constants zero.
    Zero,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::A => "a",
            Family::B => "b",
            Family::C => "c",
            Family::D => "d",
            Family::Finite => "finite",
            Family::Gbin => "gbin",
            Family::Grr => "grr",
            Family::General => "general",
            Family::Zero => "zero",
        };
        f.write_str(s)
    }
}

impl FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "a" => Family::A,
            "b" => Family::B,
            "c" => Family::C,
            "d" => Family::D,
            "finite" | "gbi" => Family::Finite,
            "gbin" => Family::Gbin,
            "grr" => Family::Grr,
            "general" => Family::General,
            "zero" => Family::Zero,
            other => return Err(Error::Parse(format!("unknown case tag {other:?}"))),
        })
    }
}

/// The constants `c = (c_k)` substituted for the second set of times.
#[derive(Clone, Debug, PartialEq)]
pub struct CVector {
    pub family: Family,
    values: Vec<Rat>,
}

impl CVector {
    pub fn explicit(family: Family, values: Vec<Rat>) -> Self {
        Self { family, values }
    }

    pub fn values(&self) -> &[Rat] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `c_k`, 1-based; zero past the stored modes.
    pub fn get(&self, k: usize) -> Rat {
        self.values.get(k - 1).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|c| c.is_zero())
    }

    /// Copy padded or cut to `len` modes. Only the finite families may be
    /// padded with zeros.
    pub fn with_len(&self, len: usize) -> Self {
        let mut values = self.values.clone();
        values.resize(len, Rat::zero());
        Self {
            family: self.family,
            values,
        }
    }
}

fn one_minus_q_pow(env: &ParamEnv, k: i64) -> Result<Rat> {
    let qk = env.q_pow(&ri(k))?;
    let d = Rat::one() - qk;
    if d.is_zero() {
        return Err(Error::Pole(format!("1 - q^{k} = 0")));
    }
    Ok(d)
}

fn q_sum(env: &ParamEnv, list: &[Rat], k: i64) -> Result<Rat> {
    list.iter().try_fold(Rat::zero(), |acc, b| Ok(acc + env.q_pow(&(b * ri(k)))?))
}

/// `c`-vector of a family with `kc` modes, reading `a`, `q`, `b_n`, `a_n`
/// from the environment.
pub fn cvector(family: Family, env: &ParamEnv, kc: usize) -> Result<CVector> {
    let need_a = || env.a.clone().ok_or_else(|| Error::config(format!("family {family} needs parameter a")));
    let mut values = Vec::with_capacity(kc);
    for k in 1..=kc as i64 {
        let kr = ri(k);
        let v = match family {
            Family::A => {
                if k == 1 {
                    Rat::one()
                } else {
                    Rat::zero()
                }
            }
            Family::B => need_a()? / &kr,
            Family::C => (&kr * one_minus_q_pow(env, k)?).recip(),
            Family::D => {
                let a = need_a()?;
                (Rat::one() - env.q_pow(&(a * &kr))?) / (&kr * one_minus_q_pow(env, k)?)
            }
            Family::Gbin => {
                if env.b_list.is_empty() {
                    return Err(Error::config("family gbin needs b_n"));
                }
                q_sum(env, &env.b_list, k)? / (&kr * one_minus_q_pow(env, k)?)
            }
            Family::Grr => {
                if env.b_list.is_empty() || env.a_list.len() != env.b_list.len() {
                    return Err(Error::config("family grr needs b_n and a_n lists of equal length"));
                }
                (q_sum(env, &env.b_list, k)? - q_sum(env, &env.a_list, k)?) / (&kr * one_minus_q_pow(env, k)?)
            }
            Family::Zero => Rat::zero(),
            Family::Finite | Family::General => {
                return Err(Error::config(format!("family {family} takes explicit constants")));
            }
        };
        values.push(v);
    }
    Ok(CVector { family, values })
}

/// `S_λ(c)`.
pub fn schur_at(lambda: &Partition, c: &CVector) -> Result<Rat> {
    let n = lambda.size() as usize;
    if c.len() < n && !matches!(c.family, Family::A | Family::Finite | Family::Zero) {
        return Err(Error::config(format!(
            "c-vector has {} modes, |λ| = {n} needs at least that many",
            c.len()
        )));
    }
    let nv = n.max(1);
    let p = schur_poly(lambda, nv, n as u32)?;
    let vals: Vec<Rat> = (1..=nv).map(|k| c.get(k)).collect();
    p.eval(&vals)
}

/// Closed-form special values: hook-length product for family (a), its
/// q-deformation for family (c).
pub fn schur_special_closed(lambda: &Partition, family: Family, env: &ParamEnv) -> Result<Rat> {
    let hooks: Vec<u32> = lambda.hooks().into_values().collect();
    match family {
        Family::A => Ok(hooks
            .iter()
            .fold(Rat::one(), |acc, h| acc / ri(*h as i64))),
        Family::C => {
            let size = lambda.size() as i64;
            let num = env.q_pow(&(Rat::new((-lambda.kappa()).into(), 4.into()) - Rat::new(size.into(), 2.into())))?;
            let mut den = Rat::one();
            for h in hooks {
                let half = Rat::new((h as i64).into(), 2.into());
                den *= env.q_pow(&-half.clone())? - env.q_pow(&half)?;
            }
            if den.is_zero() {
                return Err(Error::Pole("q^{-h/2} = q^{h/2}".into()));
            }
            Ok(num / den)
        }
        other => Err(Error::config(format!("no closed form for family {other}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{enumerate, Partition};
    use crate::scalar::{pow_int, rat};

    fn p(v: &[u32]) -> Partition {
        Partition::new(v.to_vec()).unwrap()
    }

    /// Bialternant oracle: `s_λ(x_1..x_n) = det(x_i^{λ_j+n-j}) / det(x_i^{n-j})`
    /// at `t_k = Σ x_i^k / k`.
    fn bialternant(lambda: &Partition, xs: &[Rat]) -> Rat {
        let n = xs.len();
        let mut parts = lambda.parts().to_vec();
        parts.resize(n, 0);
        let mk = |exps: &dyn Fn(usize) -> i64| -> Vec<Vec<Option<Rat>>> {
            (0..n)
                .map(|i| (0..n).map(|j| Some(pow_int(&xs[i], exps(j)).unwrap())).collect())
                .collect()
        };
        let num = mk(&|j| parts[j] as i64 + (n - 1 - j) as i64);
        let den = mk(&|j| (n - 1 - j) as i64);
        let d = |m: &[Vec<Option<Rat>>]| {
            det(m, &Rat::one(), &|a, b| Ok(a * b), &|a, b| Ok(a + b), &|a| -a.clone())
                .unwrap()
                .unwrap_or_else(Rat::zero)
        };
        d(&num) / d(&den)
    }

    #[test]
    fn schur_poly_examples() {
        let s1 = schur_poly(&p(&[1]), 3, 3).unwrap();
        assert_eq!(s1, TPoly::var(1, 3, 3));
        let s2 = schur_poly(&p(&[2]), 3, 3).unwrap();
        assert_eq!(s2.coeff(&[2, 0, 0]), rat(1, 2));
        assert_eq!(s2.coeff(&[0, 1, 0]), rat(1, 1));
        assert_eq!(s2.len(), 2);
        let s11 = schur_poly(&p(&[1, 1]), 3, 3).unwrap();
        assert_eq!(s11.coeff(&[2, 0, 0]), rat(1, 2));
        assert_eq!(s11.coeff(&[0, 1, 0]), rat(-1, 1));
        assert_eq!(s11.len(), 2);
    }

    #[test]
    fn schur_poly_matches_bialternant_oracle() {
        let xs = [rat(1, 2), rat(-2, 3), rat(3, 1), rat(1, 5), rat(-1, 7)];
        for lambda in enumerate(6) {
            if lambda.length() > xs.len() {
                continue;
            }
            let poly = schur_poly(&lambda, 6, 6).unwrap();
            let t: Vec<Rat> = (1..=6)
                .map(|k| xs.iter().map(|x| pow_int(x, k).unwrap()).sum::<Rat>() / ri(k))
                .collect();
            assert_eq!(poly.eval(&t).unwrap(), bialternant(&lambda, &xs), "{lambda}");
        }
    }

    #[test]
    fn schur_poly_is_homogeneous_and_dual() {
        for lambda in enumerate(7) {
            let s = schur_poly(&lambda, 7, 7).unwrap();
            assert!(s.is_homogeneous(lambda.size()), "{lambda}");
            let dual = schur_poly(&lambda.conjugate(), 7, 7).unwrap();
            assert_eq!(s.alternate_signs(), dual, "{lambda}");
        }
    }

    #[test]
    fn schur_at_examples() {
        let env = ParamEnv::new(ri(2), 1).unwrap().with_a(ri(2));
        let tinf = cvector(Family::A, &env, 4).unwrap();
        assert_eq!(schur_at(&Partition::empty(), &tinf).unwrap(), ri(1));
        assert_eq!(schur_at(&p(&[2, 1]), &tinf).unwrap(), rat(1, 3));
        let ta = cvector(Family::B, &env, 4).unwrap();
        assert_eq!(schur_at(&p(&[1]), &ta).unwrap(), ri(2));
        let short = cvector(Family::B, &env, 2).unwrap();
        assert!(matches!(schur_at(&p(&[2, 1]), &short), Err(Error::Config(_))));
    }

    #[test]
    fn cvector_examples() {
        let env = ParamEnv::new(ri(2), 1).unwrap();
        let a = cvector(Family::A, &env, 3).unwrap();
        assert_eq!(a.values(), &[ri(1), ri(0), ri(0)]);

        // q = 1/4 with f = 0: e^beta = q
        let env = ParamEnv::hodge(&rat(1, 4), &ri(1)).unwrap().with_a(ri(1));
        let d = cvector(Family::D, &env, 4).unwrap();
        assert_eq!(d.values(), &[ri(1), rat(1, 2), rat(1, 3), rat(1, 4)]);
        let c = cvector(Family::C, &env, 2).unwrap();
        assert_eq!(c.get(2), rat(8, 15));
        assert!(matches!(cvector(Family::B, &env.clone().with_b_list(vec![]), 2).map(|_| ()), Ok(())));
        let no_a = ParamEnv::hodge(&rat(1, 4), &ri(1)).unwrap();
        assert!(matches!(cvector(Family::D, &no_a, 2), Err(Error::Config(_))));
    }

    #[test]
    fn closed_forms_examples() {
        let env = ParamEnv::hodge(&rat(1, 16), &ri(1)).unwrap();
        assert_eq!(schur_special_closed(&Partition::empty(), Family::A, &env).unwrap(), ri(1));
        assert_eq!(schur_special_closed(&p(&[2, 1]), Family::A, &env).unwrap(), rat(1, 3));
        let q = rat(1, 16);
        let expect = (Rat::one() - &q).recip();
        assert_eq!(schur_special_closed(&p(&[1]), Family::C, &env).unwrap(), expect);
        let c = cvector(Family::C, &env, 2).unwrap();
        assert_eq!(c.get(1), expect);
    }

    #[test]
    fn closed_forms_match_evaluation() {
        let env = ParamEnv::new(ri(2), 1).unwrap();
        let tinf = cvector(Family::A, &env, 8).unwrap();
        for lambda in enumerate(6) {
            assert_eq!(
                schur_at(&lambda, &tinf).unwrap(),
                schur_special_closed(&lambda, Family::A, &env).unwrap()
            );
        }
        let env = ParamEnv::hodge(&rat(9, 64), &ri(1)).unwrap();
        let c = cvector(Family::C, &env, 5).unwrap();
        for lambda in enumerate(5) {
            assert_eq!(
                schur_at(&lambda, &c).unwrap(),
                schur_special_closed(&lambda, Family::C, &env).unwrap(),
                "{lambda}"
            );
        }
    }
}
