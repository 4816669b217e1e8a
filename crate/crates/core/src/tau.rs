//! The hypergeometric tau function, its weights `h_λ(s)`, and the wave
//! and dressing data extracted through the Miwa shift.

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::ops::{DiffOp, GridCoeff};
use crate::partitions::{enumerate, Partition};
use crate::scalar::{ri, ParamEnv, Rat, TPoly};
use crate::schur::{det, one_row, schur_at, schur_poly, CVector};

/// `h_n = e^{β(n-1/2)²/2} Q^{n-1/2}` for rational `n`.
pub fn h_n(n: &Rat, env: &ParamEnv) -> Result<Rat> {
    let m = n - Rat::new(1.into(), 2.into());
    Ok(env.exp_beta(&(&m * &m / ri(2)))? * env.big_q_pow(&m)?)
}

/// `r_n = h_n / h_{n-1} = e^{β(n-1)} Q`.
pub fn r_n(n: &Rat, env: &ParamEnv) -> Result<Rat> {
    Ok(env.exp_beta(&(n - Rat::one()))? * env.big_q())
}

/// `h_λ(s)` in closed form:
/// `exp(β/2 (κ + 2s|λ| + (4s³-s)/12)) Q^{|λ| + s²/2}`.
pub fn h_weight(lambda: &Partition, s: &Rat, env: &ParamEnv) -> Result<Rat> {
    let size = ri(lambda.size() as i64);
    let cubic = (ri(4) * s * s * s - s) / ri(12);
    let e = (ri(lambda.kappa()) + ri(2) * s * &size + cubic) / ri(2);
    Ok(env.exp_beta(&e)? * env.big_q_pow(&(&size + s * s / ri(2)))?)
}

/// `h_∅(s)` from the finite product of the `h_n`, integer `s` only.
pub fn h_empty_product(s: i64, env: &ParamEnv) -> Result<Rat> {
    let mut acc = Rat::one();
    if s > 0 {
        for n in 1..=s {
            acc *= h_n(&ri(n), env)?;
        }
    } else {
        for n in (s + 1)..=0 {
            acc /= h_n(&ri(n), env)?;
        }
    }
    Ok(acc)
}

/// `h_λ(s)/h_∅(s)` as the contents product `Π r_{j-i+s+1}`.
pub fn contents_ratio(lambda: &Partition, s: &Rat, env: &ParamEnv) -> Result<Rat> {
    lambda
        .contents()
        .into_iter()
        .try_fold(Rat::one(), |acc, c| Ok(acc * r_n(&(ri(c) + s + Rat::one()), env)?))
}

/// `h_λ(s)` by the product route, integer `s` only.
pub fn h_weight_product(lambda: &Partition, s: i64, env: &ParamEnv) -> Result<Rat> {
    Ok(h_empty_product(s, env)? * contents_ratio(lambda, &ri(s), env)?)
}

/// `τ(s, t)` truncated to weighted degree `cap` in the times `t_1..t_nvars`.
#[derive(Clone, Debug, PartialEq)]
pub struct TauSeries {
    pub s: Rat,
    /// `τ(s, t) / h_∅(s)`.
    pub normalized: TPoly,
    /// `h_∅(s)`, when it lands on the exponent lattice.
    pub h_empty: Option<Rat>,
    pub cap: u32,
}

impl TauSeries {
    /// The full value `h_∅(s) · normalized`.
    pub fn value(&self) -> Result<TPoly> {
        let h = self.h_empty.as_ref().ok_or_else(|| Error::Lattice {
            exponent: self.s.clone(),
            denom: 0,
            context: "h_empty(s) is off the exponent lattice".into(),
        })?;
        Ok(self.normalized.scale(h))
    }
}

fn check_modes(c: &CVector, cap: u32) -> Result<()> {
    use crate::schur::Family;
    if (c.len() as u32) < cap && !matches!(c.family, Family::A | Family::Finite | Family::Zero) {
        return Err(Error::config(format!(
            "c-vector has {} modes, tau to degree {cap} needs at least that many",
            c.len()
        )));
    }
    Ok(())
}

/// `Σ_{|λ| <= cap} S_λ(t) h_λ(s) S_λ(c)`.
pub fn tau(s: &Rat, c: &CVector, cap: u32, env: &ParamEnv, nvars: usize) -> Result<TauSeries> {
    check_modes(c, cap)?;
    let terms: Vec<TPoly> = enumerate(cap)
        .par_iter()
        .map(|lambda| {
            let sc = schur_at(lambda, c)?;
            if sc.is_zero() {
                return Ok(TPoly::zero(nvars, cap));
            }
            let w = contents_ratio(lambda, s, env)?;
            Ok(schur_poly(lambda, nvars, cap)?.scale(&(sc * w)))
        })
        .collect::<Result<_>>()?;
    let mut normalized = TPoly::zero(nvars, cap);
    for t in &terms {
        normalized = normalized.add(t)?;
    }
    Ok(TauSeries {
        s: s.clone(),
        normalized,
        h_empty: h_weight(&Partition::empty(), s, env).ok(),
        cap,
    })
}

/// Truncated polynomials in `y = z^{-1}` with time-series coefficients.
#[derive(Clone, Debug)]
struct YPoly(Vec<TPoly>);

impl YPoly {
    fn mul(&self, other: &Self) -> Result<Self> {
        let n = self.0.len();
        let mut out: Vec<TPoly> = self.0.iter().map(|p| TPoly::zero(p.nvars(), p.cap())).collect();
        for (i, a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.0.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    out[i + j] = out[i + j].add(&a.mul(b)?)?;
                }
            }
        }
        Ok(Self(out))
    }

    fn add(&self, other: &Self) -> Result<Self> {
        Ok(Self(self.0.iter().zip(&other.0).map(|(a, b)| a.add(b)).collect::<Result<_>>()?))
    }

    fn neg(&self) -> Self {
        Self(self.0.iter().map(TPoly::neg).collect())
    }
}

/// One partition's share of the Miwa-shifted tau function:
/// `S_λ(c)` and the `y`-coefficients of `S_λ(t - [y])`.
#[derive(Clone, Debug)]
pub struct MiwaEntry {
    pub lambda: Partition,
    pub schur_c: Rat,
    /// `[y^n] S_λ(t - [y])`, `n = 0..=ncut`; homogeneous of weight `|λ| - n`.
    pub shifted: Vec<TPoly>,
}

/// Builds the `s`-independent Miwa data for all `|λ| <= cap`.
///
/// Uses `S_n(t - [y]) = S_n(t) - y S_{n-1}(t)` inside the Jacobi–Trudi
/// determinant over the ring of polynomials in `y` cut at `y^{ncut+1}`.
pub fn miwa_table(c: &CVector, nvars: usize, cap: u32, ncut: usize) -> Result<Vec<MiwaEntry>> {
    check_modes(c, cap)?;
    let rows = one_row(2 * cap + 1, nvars, cap)?;
    let zero = TPoly::zero(nvars, cap);
    let shifted_row = |n: i64| -> Option<YPoly> {
        if n < 0 {
            return None;
        }
        let mut v = vec![zero.clone(); ncut + 1];
        v[0] = rows[n as usize].clone();
        if n >= 1 && ncut >= 1 {
            v[1] = rows[n as usize - 1].neg();
        }
        Some(YPoly(v))
    };
    let mut one = vec![zero.clone(); ncut + 1];
    one[0] = TPoly::one(nvars, cap);
    let one = YPoly(one);
    enumerate(cap)
        .into_par_iter()
        .map(|lambda| {
            let schur_c = schur_at(&lambda, c)?;
            let l = lambda.length();
            let matrix: Vec<Vec<Option<YPoly>>> = (0..l)
                .map(|i| {
                    (0..l)
                        .map(|j| shifted_row(lambda.parts()[i] as i64 - i as i64 + j as i64))
                        .collect()
                })
                .collect();
            let d = if l == 0 {
                Some(one.clone())
            } else {
                det(&matrix, &one, &|a, b| a.mul(b), &|a, b| a.add(b), &|a| a.neg())?
            };
            let shifted = d.map(|y| y.0).unwrap_or_else(|| vec![zero.clone(); ncut + 1]);
            Ok(MiwaEntry {
                lambda,
                schur_c,
                shifted,
            })
        })
        .collect()
}

/// Coefficients `w_n(s, t)` of `τ(s-1, t - [z^{-1}]) / τ(s-1, t)` on a set
/// of grid points; `w_n` is exact through weight `cap - n`.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveData {
    pub nvars: usize,
    pub cap: u32,
    pub ncut: usize,
    /// `s -> [w_0, ..., w_ncut]`.
    pub samples: BTreeMap<Rat, Vec<TPoly>>,
}

impl WaveData {
    pub fn w(&self, n: usize, s: &Rat) -> Option<&TPoly> {
        self.samples.get(s).and_then(|v| v.get(n))
    }
}

/// Wave coefficients at each point of `points`, in parallel.
pub fn wave_coefficients(
    table: &[MiwaEntry],
    env: &ParamEnv,
    points: &[Rat],
    cap: u32,
    ncut: usize,
) -> Result<WaveData> {
    let nvars = table
        .first()
        .map(|e| e.shifted[0].nvars())
        .ok_or_else(|| Error::config("empty Miwa table"))?;
    let samples: Vec<(Rat, Vec<TPoly>)> = points
        .par_iter()
        .map(|s| {
            let sm1 = s - Rat::one();
            let mut num = vec![TPoly::zero(nvars, cap); ncut + 1];
            for e in table {
                if e.schur_c.is_zero() {
                    continue;
                }
                let w = contents_ratio(&e.lambda, &sm1, env)? * &e.schur_c;
                for (n, p) in e.shifted.iter().enumerate() {
                    if !p.is_zero() {
                        num[n] = num[n].add(&p.scale(&w))?;
                    }
                }
            }
            let den_inv = num[0]
                .inv()
                .map_err(|_| Error::Singular { s: s.clone() })?;
            let w: Vec<TPoly> = num
                .iter()
                .enumerate()
                .map(|(n, p)| p.clone().with_valid(cap as i64 - n as i64).mul(&den_inv))
                .collect::<Result<_>>()?;
            Ok((s.clone(), w))
        })
        .collect::<Result<_>>()?;
    Ok(WaveData {
        nvars,
        cap,
        ncut,
        samples: samples.into_iter().collect(),
    })
}

/// `W = 1 + Σ w_n Λ^{-n}` on the sampled window, known through `Λ^{-ncut}`.
pub fn dressing_from_tau(wave: &WaveData, denom: u32) -> Result<DiffOp<GridCoeff>> {
    let cap = -ri(wave.ncut as i64);
    let mut terms = Vec::new();
    for n in 0..=wave.ncut {
        let col: BTreeMap<Rat, TPoly> = wave
            .samples
            .iter()
            .map(|(s, w)| (s.clone(), w[n].clone()))
            .collect();
        if n > 0 && col.values().all(|p| p.is_zero() && p.valid() >= wave.cap as i64) {
            continue;
        }
        terms.push((-ri(n as i64), GridCoeff::Sampled(col)));
    }
    Ok(DiffOp::from_terms(terms, denom, cap.clone())?.with_floor(cap))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::partitions_of;
    use crate::scalar::rat;
    use crate::schur::{cvector, Family};

    fn env() -> ParamEnv {
        // e^β = (3/2)^8, Q = (2/5)² so Q^{1/2} is rational
        ParamEnv::new(rat(3, 2), 8).unwrap().with_q_root(rat(2, 5))
    }

    #[test]
    fn weight_examples() {
        let e = env();
        assert_eq!(h_weight(&Partition::empty(), &ri(0), &e).unwrap(), ri(1));
        assert_eq!(h_weight(&Partition::new(vec![1]).unwrap(), &ri(0), &e).unwrap(), e.big_q());
        let expect = e.exp_beta(&rat(5, 4)).unwrap() * e.big_q_pow(&ri(2)).unwrap();
        assert_eq!(h_weight(&Partition::empty(), &ri(2), &e).unwrap(), expect);
        assert_eq!(h_empty_product(2, &e).unwrap(), expect);
    }

    #[test]
    fn two_routes_agree() {
        let e = env();
        for lambda in enumerate(6) {
            for s in -3..=3 {
                assert_eq!(
                    h_weight(&lambda, &ri(s), &e).unwrap(),
                    h_weight_product(&lambda, s, &e).unwrap(),
                    "{lambda} at s = {s}"
                );
            }
        }
    }

    #[test]
    fn shift_covariance() {
        // h_λ(s+1)/h_λ(s) = h_{s+1} e^{β|λ|}
        let half = ParamEnv::new(rat(3, 2), 16).unwrap().with_q_tied(rat(1, 2));
        for (e, s) in [(env(), ri(-2)), (env(), ri(0)), (env(), ri(2)), (half.clone(), rat(-1, 2)), (half, rat(1, 2))] {
            for lambda in enumerate(4) {
                let lhs = h_weight(&lambda, &(&s + ri(1)), &e).unwrap() / h_weight(&lambda, &s, &e).unwrap();
                let rhs = h_n(&(&s + ri(1)), &e).unwrap() * e.exp_beta(&ri(lambda.size() as i64)).unwrap();
                assert_eq!(lhs, rhs, "{lambda} at s = {s}");
            }
        }
    }

    #[test]
    fn ratio_from_h_n() {
        let e = env();
        for n in -3..=3 {
            let n = ri(n);
            assert_eq!(r_n(&n, &e).unwrap(), h_n(&n, &e).unwrap() / h_n(&(&n - ri(1)), &e).unwrap());
        }
    }

    #[test]
    fn tau_examples() {
        let e = env();
        let c = cvector(Family::A, &e, 6).unwrap();
        let t = tau(&ri(0), &c, 1, &e, 2).unwrap();
        assert_eq!(t.value().unwrap().constant_term(), ri(1));
        assert_eq!(t.value().unwrap().coeff(&[1, 0]), e.big_q());
        // t_2 coefficient: S_(2) and S_(1,1) both 1/2 at t_∞, with S_(2) ∋ t_2, S_(1,1) ∋ -t_2
        let t2 = tau(&ri(0), &c, 2, &e, 2).unwrap().value().unwrap();
        let h2 = h_weight(&Partition::new(vec![2]).unwrap(), &ri(0), &e).unwrap();
        let h11 = h_weight(&Partition::new(vec![1, 1]).unwrap(), &ri(0), &e).unwrap();
        assert_eq!(t2.coeff(&[0, 1]), (h2 - h11) / ri(2));
        let at0 = tau(&ri(2), &c, 4, &e, 3).unwrap();
        assert_eq!(at0.value().unwrap().constant_term(), h_weight(&Partition::empty(), &ri(2), &e).unwrap());
    }

    #[test]
    fn grading_exactness() {
        let e = env().with_a(rat(3, 7));
        let c = cvector(Family::B, &e, 8).unwrap();
        let lo = tau(&rat(1, 2), &c, 4, &e, 4).unwrap().normalized;
        let hi = tau(&rat(1, 2), &c, 6, &e, 4).unwrap().normalized;
        assert_eq!(hi.truncated(4).recast(4, 4), lo);
        assert!(lo.terms().all(|(m, _)| crate::scalar::TPoly::monomial(m.clone(), ri(1), 4).len() == 1));
    }

    #[test]
    fn miwa_at_zero_sees_only_columns() {
        let e = env().with_a(rat(3, 7));
        let c = cvector(Family::B, &e, 4).unwrap();
        let table = miwa_table(&c, 3, 4, 4).unwrap();
        for entry in &table {
            for (n, p) in entry.shifted.iter().enumerate() {
                let v = p.constant_term();
                let column = entry.lambda.parts().iter().all(|x| *x == 1) && entry.lambda.size() as usize == n;
                if column {
                    let sign = if n % 2 == 0 { ri(1) } else { ri(-1) };
                    assert_eq!(v, sign, "{}", entry.lambda);
                } else {
                    assert!(v.is_zero(), "{} at y^{n}", entry.lambda);
                }
            }
        }
        // columns are hooks with arm 0
        for n in 1..=4 {
            let col = partitions_of(n).into_iter().last().unwrap();
            assert_eq!(col.hook_shape(), Some((0, n - 1)));
        }
    }

    #[test]
    fn first_wave_coefficient() {
        let e = env();
        let c = cvector(Family::A, &e, 6).unwrap();
        let table = miwa_table(&c, 2, 4, 3).unwrap();
        let pts = [ri(-1), rat(1, 2), ri(3)];
        let wave = wave_coefficients(&table, &e, &pts, 4, 3).unwrap();
        for s in &pts {
            let w1 = wave.w(1, s).unwrap();
            let expect = -e.big_q() * e.exp_beta(&(s - ri(1))).unwrap();
            assert_eq!(w1.constant_term(), expect);
            assert_eq!(w1.valid(), 3);
            assert_eq!(wave.w(0, s).unwrap(), &TPoly::one(2, 4).with_valid(4));
        }
    }

    #[test]
    fn zero_constants_give_trivial_dressing() {
        let e = env();
        let c = cvector(Family::Zero, &e, 4).unwrap();
        let table = miwa_table(&c, 2, 4, 3).unwrap();
        let wave = wave_coefficients(&table, &e, &[ri(0), ri(1)], 4, 3).unwrap();
        let w = dressing_from_tau(&wave, 1).unwrap();
        for (shift, c) in w.terms() {
            if shift.is_zero() {
                assert_eq!(c.at(&ri(1)).unwrap(), &TPoly::one(2, 4));
            } else {
                assert!(c.vanishes_through(c.valid()));
            }
        }
    }
}
