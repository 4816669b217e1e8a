use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Setup;
use crate::error::{Error, Result};
use crate::scalar::{pow_int, rat, ri, ParamEnv, Rat};
use crate::schur::Family;

/// Seeded source of random rational parameter points.
pub struct PointGen {
    rng: ChaCha8Rng,
}

impl PointGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// A fraction in `(0, 1)` with denominator at most 7.
    pub fn unit_fraction(&mut self) -> Rat {
        let d = self.rng.gen_range(2..=7i64);
        let n = self.rng.gen_range(1..d);
        rat(n, d)
    }

    /// A nonzero rational `±p/q` with `p <= 6`, `q <= 5`.
    pub fn nonzero(&mut self) -> Rat {
        let p = self.rng.gen_range(1..=6i64);
        let q = self.rng.gen_range(1..=5i64);
        let r = rat(p, q);
        if self.rng.gen_bool(0.5) {
            -r
        } else {
            r
        }
    }

    /// An integer in `lo..=hi`.
    pub fn int(&mut self, lo: i64, hi: i64) -> i64 {
        self.rng.gen_range(lo..=hi)
    }

    /// A positive multiple of `1/2` in `[1/2, hi]`.
    pub fn half_integer(&mut self, hi: i64) -> Rat {
        rat(self.rng.gen_range(1..=2 * hi), 2)
    }

    /// Free point: `e^{β/M} = g`, independent `Q = root²`.
    pub fn free(&mut self, m: u32) -> Result<ParamEnv> {
        let g = self.unit_fraction();
        let root = self.nonzero();
        Ok(ParamEnv::new(g, m)?.with_q_root(root))
    }

    /// Topological-vertex point `Q = q^{1/2}`, `e^β = q^{f+1}`.
    pub fn hodge(&mut self, framing: &Rat) -> Result<ParamEnv> {
        let g = self.unit_fraction();
        let d = i64::try_from(framing.denom()).map_err(|_| Error::config("framing denominator too large"))?;
        let q = pow_int(&g, 2 * d)?;
        ParamEnv::hodge(&q, framing)
    }

    /// A point for `setup` with the parameters its family needs. Free
    /// families use lattice denominator `m`.
    pub fn for_setup(&mut self, setup: &Setup, m: u32) -> Result<ParamEnv> {
        let mut env = match &setup.framing {
            Some(r) if setup.needs_framing() => self.hodge(r)?,
            _ => self.free(m)?,
        };
        match setup.family {
            Family::B => env = env.with_a(self.nonzero()),
            Family::D => env = env.with_a(self.half_integer(3)),
            Family::Gbin => {
                let b = vec![self.half_integer(2), self.half_integer(2) + ri(2)];
                env = env.with_b_list(b);
            }
            Family::Grr => {
                let b = vec![self.half_integer(2), self.half_integer(2) + ri(2)];
                let a = vec![self.half_integer(2) + ri(4), self.half_integer(2) + ri(6)];
                env = env.with_b_list(b).with_a_list(a);
            }
            _ => {}
        }
        Ok(env)
    }

    /// `n` random nonzero constants.
    pub fn constants(&mut self, n: usize) -> Vec<Rat> {
        (0..n).map(|_| self.nonzero()).collect()
    }
}
