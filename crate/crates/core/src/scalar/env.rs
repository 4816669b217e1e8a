use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::rat::{is_integer, pow_int, rat_pow, ri, to_f64, to_i64, Rat};
use crate::error::{Error, Result};

/// How the constant `Q` is realised.
#[derive(Clone, Debug, PartialEq)]
pub enum QMode {
    /// `Q` is an independent rational; `root`, when present, is a rational
    /// square root used for half-integer powers.
    Independent { value: Rat, root: Option<Rat> },
    /// `Q = e^{β·exponent}`, evaluated on the exponent lattice.
    Tied { exponent: Rat },
}

/// Parameter point of a run.
///
/// Every exponential of `β` is evaluated as an integer power of the base
/// `g = e^{β/M}`; an exponent `r` is admissible iff `M·r` is an integer.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamEnv {
    g: Rat,
    m: u32,
    q_mode: QMode,
    /// `f + 1` (or `τ + 1` for rational framing); fixes `q = e^{β/(f+1)}`.
    framing: Option<Rat>,
    pub a: Option<Rat>,
    pub b_list: Vec<Rat>,
    pub a_list: Vec<Rat>,
    pub beta_cap: u32,
}

impl ParamEnv {
    /// Base `g = e^{β/M}` with lattice denominator `m`; `Q` defaults to 1.
    pub fn new(g: Rat, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::config("lattice denominator M must be positive"));
        }
        if g.is_zero() || g.is_one() {
            return Err(Error::config(format!("base g = {g} must differ from 0 and 1")));
        }
        Ok(Self {
            g,
            m,
            q_mode: QMode::Independent {
                value: Rat::one(),
                root: Some(Rat::one()),
            },
            framing: None,
            a: None,
            b_list: Vec::new(),
            a_list: Vec::new(),
            beta_cap: 2,
        })
    }

    /// Environment from `x = e^β`; `g = x^{1/M}` must be rational.
    pub fn from_e_beta(x: &Rat, m: u32) -> Result<Self> {
        let g = rat_pow(x, &Rat::new(1.into(), m.into())).ok_or_else(|| Error::Lattice {
            exponent: Rat::new(1.into(), m.into()),
            denom: m,
            context: format!("e^beta = {x} has no rational {m}-th root"),
        })?;
        Self::new(g, m)
    }

    /// Topological-vertex specialisation `Q = q^{1/2}`, `β = (f+1) log q`
    /// with `framing = f + 1` (any positive rational `τ + 1`).
    ///
    /// With `framing = n/d` the lattice denominator is `M = 2n` and
    /// `g = q^{1/(2d)}`, which must be rational.
    pub fn hodge(q: &Rat, framing: &Rat) -> Result<Self> {
        if framing <= &Rat::zero() {
            return Err(Error::config(format!("framing f+1 = {framing} must be positive (tau > -1)")));
        }
        if q.is_zero() || q.is_one() {
            return Err(Error::Pole(format!("q = {q} is degenerate")));
        }
        let n: u32 = framing
            .numer()
            .try_into()
            .map_err(|_| Error::config("framing numerator too large"))?;
        let d: u32 = framing
            .denom()
            .try_into()
            .map_err(|_| Error::config("framing denominator too large"))?;
        let g = rat_pow(q, &Rat::new(1.into(), (2 * d).into())).ok_or_else(|| Error::Lattice {
            exponent: Rat::new(1.into(), (2 * d).into()),
            denom: 2 * n,
            context: format!("q = {q} has no rational {}-th root", 2 * d),
        })?;
        let mut env = Self::new(g, 2 * n)?;
        env.q_mode = QMode::Tied {
            exponent: framing.recip() / ri(2),
        };
        env.framing = Some(framing.clone());
        Ok(env)
    }

    pub fn with_q(mut self, value: Rat) -> Self {
        self.q_mode = QMode::Independent { value, root: None };
        self
    }

    /// Independent `Q = root²`, allowing half-integer powers of `Q`.
    pub fn with_q_root(mut self, root: Rat) -> Self {
        self.q_mode = QMode::Independent {
            value: &root * &root,
            root: Some(root),
        };
        self
    }

    pub fn with_q_tied(mut self, exponent: Rat) -> Self {
        self.q_mode = QMode::Tied { exponent };
        self
    }

    pub fn with_framing(mut self, framing: Rat) -> Self {
        self.framing = Some(framing);
        self
    }

    pub fn with_a(mut self, a: Rat) -> Self {
        self.a = Some(a);
        self
    }

    pub fn with_b_list(mut self, b: Vec<Rat>) -> Self {
        self.b_list = b;
        self
    }

    pub fn with_a_list(mut self, a: Vec<Rat>) -> Self {
        self.a_list = a;
        self
    }

    pub fn with_beta_cap(mut self, cap: u32) -> Self {
        self.beta_cap = cap;
        self
    }

    pub fn g(&self) -> &Rat {
        &self.g
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn q_mode(&self) -> &QMode {
        &self.q_mode
    }

    pub fn framing(&self) -> Option<&Rat> {
        self.framing.as_ref()
    }

    /// `e^β = g^M`.
    pub fn e_beta(&self) -> Rat {
        pow_int(&self.g, self.m as i64).expect("g is nonzero")
    }

    /// Numerical `β = M·log g`; only the float trend checks use it.
    pub fn beta_f64(&self) -> f64 {
        self.m as f64 * to_f64(&self.g).ln()
    }

    /// Lattice index `M·r` of the exponent `r`, or a lattice violation.
    pub fn lattice_index(&self, r: &Rat, context: &str) -> Result<i64> {
        let scaled = r * ri(self.m as i64);
        if !is_integer(&scaled) {
            return Err(Error::Lattice {
                exponent: r.clone(),
                denom: self.m,
                context: context.to_string(),
            });
        }
        to_i64(&scaled).ok_or_else(|| Error::config(format!("exponent {r} too large")))
    }

    /// `e^{β·r}`.
    pub fn exp_beta(&self, r: &Rat) -> Result<Rat> {
        let n = self.lattice_index(r, "e^{beta r}")?;
        pow_int(&self.g, n)
    }

    /// `Q^x`.
    pub fn big_q_pow(&self, x: &Rat) -> Result<Rat> {
        match &self.q_mode {
            QMode::Tied { exponent } => self.exp_beta(&(exponent * x)),
            QMode::Independent { value, root } => {
                if let Some(n) = to_i64(x) {
                    return pow_int(value, n);
                }
                let twice = x * ri(2);
                match (to_i64(&twice), root) {
                    (Some(n), Some(r)) => pow_int(r, n),
                    _ => Err(Error::Lattice {
                        exponent: x.clone(),
                        denom: 1,
                        context: "Q^x needs a rational square root of Q".into(),
                    }),
                }
            }
        }
    }

    pub fn big_q(&self) -> Rat {
        self.big_q_pow(&Rat::one()).expect("integer power of Q")
    }

    /// `q^x = e^{β x/(f+1)}`.
    pub fn q_pow(&self, x: &Rat) -> Result<Rat> {
        let r = self
            .framing
            .as_ref()
            .ok_or_else(|| Error::config("q requires a framing (f or tau)"))?;
        self.exp_beta(&(x / r))
    }

    pub fn q(&self) -> Result<Rat> {
        self.q_pow(&Rat::one())
    }

    /// Checks `e^β = q^{f+1}` and `Q = q^{1/2}` when a framing is configured.
    pub fn check_hodge_constraints(&self) -> Result<()> {
        let Some(r) = &self.framing else {
            return Ok(());
        };
        let q = self.q()?;
        let lhs = self.e_beta();
        if rat_pow(&q, r).as_ref() != Some(&lhs) {
            return Err(Error::config(format!("e^beta = {lhs} differs from q^(f+1) with q = {q}")));
        }
        let big_q = self.big_q_pow(&ri(2))?;
        if big_q != q {
            return Err(Error::config(format!("Q^2 = {big_q} differs from q = {q}")));
        }
        Ok(())
    }

    /// Human-readable parameter listing used in reports.
    pub fn describe(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("g".into(), self.g.to_string());
        m.insert("M".into(), self.m.to_string());
        m.insert("e_beta".into(), self.e_beta().to_string());
        match &self.q_mode {
            QMode::Independent { value, .. } => {
                m.insert("Q".into(), value.to_string());
            }
            QMode::Tied { exponent } => {
                m.insert("Q".into(), format!("e^(beta*{exponent})"));
            }
        }
        if let Some(r) = &self.framing {
            m.insert("framing".into(), r.to_string());
            if let Ok(q) = self.q() {
                m.insert("q".into(), q.to_string());
            }
        }
        if let Some(a) = &self.a {
            m.insert("a".into(), a.to_string());
        }
        if !self.b_list.is_empty() {
            m.insert("b".into(), join(&self.b_list));
        }
        if !self.a_list.is_empty() {
            m.insert("a_list".into(), join(&self.a_list));
        }
        m
    }
}

fn join(v: &[Rat]) -> String {
    v.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::rat;

    #[test]
    fn lattice_violations_are_reported() {
        let env = ParamEnv::new(rat(3, 2), 2).unwrap();
        assert_eq!(env.exp_beta(&rat(1, 2)).unwrap(), rat(3, 2));
        assert_eq!(env.exp_beta(&ri(-1)).unwrap(), rat(4, 9));
        let err = env.exp_beta(&rat(1, 3)).unwrap_err();
        assert!(matches!(err, Error::Lattice { denom: 2, .. }), "{err}");
    }

    #[test]
    fn hodge_environment_satisfies_constraints() {
        let env = ParamEnv::hodge(&rat(1, 16), &ri(2)).unwrap();
        assert_eq!(env.m(), 4);
        assert_eq!(env.g(), &rat(1, 4));
        assert_eq!(env.q().unwrap(), rat(1, 16));
        assert_eq!(env.big_q(), rat(1, 4));
        assert_eq!(env.e_beta(), rat(1, 256));
        env.check_hodge_constraints().unwrap();

        // tau = -1/3: framing 2/3, q = 1/64 -> g = 1/2
        let env = ParamEnv::hodge(&rat(1, 64), &rat(2, 3)).unwrap();
        assert_eq!(env.g(), &rat(1, 2));
        assert_eq!(env.q().unwrap(), rat(1, 64));
        assert_eq!(env.big_q(), rat(1, 8));
        env.check_hodge_constraints().unwrap();
    }

    #[test]
    fn half_powers_of_independent_q_need_a_root() {
        let env = ParamEnv::new(ri(2), 8).unwrap().with_q(rat(1, 3));
        assert!(env.big_q_pow(&rat(1, 2)).is_err());
        let env = env.with_q_root(rat(1, 3));
        assert_eq!(env.big_q_pow(&rat(3, 2)).unwrap(), rat(1, 27));
    }

    #[test]
    fn from_e_beta_takes_exact_roots() {
        let env = ParamEnv::from_e_beta(&rat(9, 4), 2).unwrap();
        assert_eq!(env.g(), &rat(3, 2));
        assert!(ParamEnv::from_e_beta(&rat(9, 4), 3).is_err());
    }
}
