//! Verification procedures. Every check runs at a user point (when given
//! and compatible with the check's exponent lattice) plus seeded random
//! rational points, and yields a [`VerificationReport`].

mod flows;
mod initial;
mod points;
mod rational;
mod report;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use flows::{check_lax, check_persistence, check_wave, grid_lax, tau_dressing};
pub use initial::{
    build_w0, check_case, check_factorization, check_prop1, check_scaling, scaling_deviations,
};
pub use points::PointGen;
pub use rational::{check_bc_flow, check_cc_flow, check_pqr, extract_bc, ReducedPair};
pub use report::{known_floor, summarize, Caps, Tally, Verdict, VerificationReport, SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::scalar::{ri, ParamEnv, Rat};
use crate::schur::{cvector, CVector, Family};

/// A `c`-family together with its framing `f + 1` (or `τ + 1`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Setup {
    pub family: Family,
    pub framing: Option<Rat>,
}

impl Setup {
    pub fn new(family: Family) -> Self {
        Self { family, framing: None }
    }

    /// Integer framing number `f`.
    pub fn framed(family: Family, f: i64) -> Self {
        Self {
            family,
            framing: Some(ri(f + 1)),
        }
    }

    /// Rational framing `τ`.
    pub fn with_tau(family: Family, tau: Rat) -> Self {
        Self {
            family,
            framing: Some(tau + ri(1)),
        }
    }

    pub fn needs_framing(&self) -> bool {
        matches!(self.family, Family::C | Family::D | Family::Gbin | Family::Grr)
    }

    /// Denominator of the shift lattice for `L^{1/(f+1)}`.
    pub fn denom(&self) -> u32 {
        self.framing
            .as_ref()
            .map(|r| u32::try_from(r.numer()).unwrap_or(1))
            .unwrap_or(1)
    }
}

impl fmt::Display for Setup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        if let Some(r) = &self.framing {
            if r.is_integer() {
                write!(f, " f={}", r - ri(1))?;
            } else {
                write!(f, " tau={}", r - ri(1))?;
            }
        }
        Ok(())
    }
}

/// Identifier of a verification procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckId {
    Init,
    Prop1,
    Case,
    Scaling,
    Lax,
    Persist,
    Pqr,
    Bcflow,
    Ccflow,
    Wave,
}

impl CheckId {
    pub const ALL: [CheckId; 10] = [
        CheckId::Init,
        CheckId::Prop1,
        CheckId::Case,
        CheckId::Scaling,
        CheckId::Lax,
        CheckId::Persist,
        CheckId::Pqr,
        CheckId::Bcflow,
        CheckId::Ccflow,
        CheckId::Wave,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            CheckId::Init => "init",
            CheckId::Prop1 => "prop1",
            CheckId::Case => "case",
            CheckId::Scaling => "scaling",
            CheckId::Lax => "lax",
            CheckId::Persist => "persist",
            CheckId::Pqr => "pqr",
            CheckId::Bcflow => "bcflow",
            CheckId::Ccflow => "ccflow",
            CheckId::Wave => "wave",
        }
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .iter()
            .copied()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown check '{s}'")))
    }
}

/// What to run and where.
#[derive(Clone, Debug)]
pub struct CheckSpec {
    /// Restricts a check to one setup; `None` runs the check's defaults.
    pub setup: Option<Setup>,
    /// Explicit parameter point, tried first.
    pub user_env: Option<ParamEnv>,
    /// Explicit constants for the general and finite families.
    pub c_values: Option<Vec<Rat>>,
    pub caps: Option<Caps>,
    pub seed: u64,
    pub random_points: usize,
    pub k_max: Option<usize>,
    /// Fixed product `aQ` of the scaling check.
    pub kappa: Option<Rat>,
}

impl Default for CheckSpec {
    fn default() -> Self {
        Self {
            setup: None,
            user_env: None,
            c_values: None,
            caps: None,
            seed: 1,
            random_points: 3,
            k_max: None,
            kappa: None,
        }
    }
}

impl CheckSpec {
    /// Setups to run: the user's choice when it is among `allowed`, else
    /// `defaults`.
    fn setups(&self, allowed: &[Family], defaults: Vec<Setup>, tally_note: &mut Vec<String>) -> Vec<Setup> {
        match &self.setup {
            Some(s) if allowed.contains(&s.family) => vec![s.clone()],
            Some(s) => {
                tally_note.push(format!("case {} does not apply; ran default cases", s.family));
                defaults
            }
            None => defaults,
        }
    }
}

/// Runs one check for every applicable setup.
pub fn run_check(id: CheckId, spec: &CheckSpec) -> Vec<VerificationReport> {
    match id {
        CheckId::Init => check_factorization(spec),
        CheckId::Prop1 => check_prop1(spec),
        CheckId::Case => check_case(spec),
        CheckId::Scaling => check_scaling(spec),
        CheckId::Lax => check_lax(spec),
        CheckId::Persist => check_persistence(spec),
        CheckId::Pqr => check_pqr(spec),
        CheckId::Bcflow => check_bc_flow(spec),
        CheckId::Ccflow => check_cc_flow(spec),
        CheckId::Wave => check_wave(spec),
    }
}

/// Runs several checks in parallel; reports come back ordered by check id.
pub fn run_checks(ids: &[CheckId], spec: &CheckSpec) -> Vec<VerificationReport> {
    use rayon::prelude::*;
    let mut ids = ids.to_vec();
    ids.sort();
    ids.dedup();
    ids.par_iter().map(|id| run_check(*id, spec)).collect::<Vec<_>>().concat()
}

/// The `c`-vector of a setup at a parameter point.
pub(crate) fn setup_cvector(setup: &Setup, env: &ParamEnv, kc: usize, explicit: Option<&[Rat]>) -> Result<CVector> {
    match setup.family {
        Family::Finite | Family::General => {
            let vals = explicit.ok_or_else(|| Error::config(format!("family {} needs explicit constants", setup.family)))?;
            Ok(CVector::explicit(setup.family, vals.to_vec()).with_len(kc.max(vals.len())))
        }
        f => cvector(f, env, kc),
    }
}

/// Iterates over the user point (if it matches `setup`) and `n` random
/// points, recording each. A lattice-incompatible user point is skipped
/// with a note; other errors count as failures.
pub(crate) fn for_points(
    spec: &CheckSpec,
    setup: &Setup,
    tally: &mut Tally,
    make: impl Fn(&mut PointGen) -> Result<ParamEnv>,
    mut body: impl FnMut(&ParamEnv, &mut Tally) -> Result<()>,
) {
    let user_applies = spec.user_env.is_some() && spec.setup.as_ref().map_or(true, |s| s == setup);
    if user_applies {
        let env = spec.user_env.as_ref().expect("checked");
        let mut sub = Tally::new();
        sub.point(env.describe());
        match body(env, &mut sub) {
            Ok(()) => tally.absorb(sub),
            Err(e @ Error::Lattice { .. }) => tally.note(format!("user point skipped: {e}")),
            Err(e) => {
                sub.error("user point", &e);
                tally.absorb(sub);
            }
        }
    }
    let mut gen = PointGen::new(spec.seed);
    for i in 0..spec.random_points {
        let env = match make(&mut gen) {
            Ok(env) => env,
            Err(e) => {
                tally.error(&format!("random point {i}"), &e);
                continue;
            }
        };
        tally.point(env.describe());
        if let Err(e) = body(&env, tally) {
            tally.error(&format!("random point {i}"), &e);
        }
    }
}

#[cfg(test)]
mod tests;
