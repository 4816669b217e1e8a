use num_traits::{One, Zero};

use super::{for_points, setup_cvector, Caps, CheckSpec, PointGen, Setup, Tally, VerificationReport};
use crate::error::Result;
use crate::ops::{band_profile, conjugate_shift, op_log_dressed, Coeff, DiffOp, ExpCoeff, ExpCtx};
use crate::scalar::{rat, ri, ParamEnv, Rat};
use crate::schur::{CVector, Family};
use crate::tau::{miwa_table, wave_coefficients};

/// `Σ_k c_k Q^k w(k) β^d e^{-βk(k+1)/2} e^{βks} Λ^{-k}` for `k <= ncut`.
fn exponent_op(
    c: &CVector,
    env: &ParamEnv,
    ncut: usize,
    denom: u32,
    beta_deg: u32,
    weight: impl Fn(i64) -> Result<Rat>,
) -> Result<DiffOp<ExpCoeff>> {
    let mut terms = Vec::new();
    for k in 1..=ncut as i64 {
        let ck = c.get(k as usize);
        if ck.is_zero() {
            continue;
        }
        let r = ck * env.big_q_pow(&ri(k))? * weight(k)?;
        let offset = Rat::new((-k * (k + 1)).into(), 2.into());
        terms.push((ri(-k), ExpCoeff::affine(r, beta_deg, ri(k), &offset, &ExpCtx::new(env))?));
    }
    DiffOp::from_terms(terms, denom, -ri(ncut as i64))
}

/// Initial dressing operator `W_0 = exp(-Σ c_k Q^k e^{-βk(k+1)/2} e^{βks} Λ^{-k})`.
pub fn build_w0(c: &CVector, env: &ParamEnv, ncut: usize, denom: u32) -> Result<DiffOp<ExpCoeff>> {
    let ctx = ExpCtx::new(env);
    exponent_op(c, env, ncut, denom, 0, |_| Ok(-Rat::one()))?.exp(&ctx)
}

pub(super) fn caps_of(spec: &CheckSpec, default: Caps) -> Caps {
    spec.caps.clone().unwrap_or(default)
}

pub(super) fn explicit_constants(spec: &CheckSpec, setup: &Setup, n: usize) -> Option<Vec<Rat>> {
    match setup.family {
        Family::General | Family::Finite => Some(
            spec.c_values
                .clone()
                .unwrap_or_else(|| PointGen::new(spec.seed ^ 0x5eed).constants(n)),
        ),
        _ => None,
    }
}

pub(super) fn setups(spec: &CheckSpec, allowed: &[Family], defaults: Vec<Setup>, tally: &mut Tally) -> Vec<Setup> {
    let mut notes = Vec::new();
    let out = spec.setups(allowed, defaults, &mut notes);
    for n in notes {
        tally.note(n);
    }
    out
}

pub(super) fn grid_points(lo: i64, hi: i64, denom: u32) -> Vec<Rat> {
    let d = denom as i64;
    (lo * d..=hi * d).map(|n| rat(n, d)).collect()
}

/// Tau-derived dressing coefficients at `t = 0` against `W_0`.
pub fn check_factorization(spec: &CheckSpec) -> Vec<VerificationReport> {
    let defaults = vec![
        Setup::new(Family::A),
        Setup::new(Family::B),
        Setup::framed(Family::C, 1),
        Setup::framed(Family::C, 2),
        Setup::framed(Family::D, 0),
        Setup::framed(Family::D, 1),
    ];
    let all = [Family::A, Family::B, Family::C, Family::D, Family::Gbin, Family::Grr, Family::Finite, Family::General, Family::Zero];
    let mut pre = Tally::new();
    let list = setups(spec, &all, defaults, &mut pre);
    let caps = caps_of(spec, Caps { nvars: 1, degree: 6, ncut: 6 });
    list.iter()
        .map(|setup| {
            let mut tally = Tally::new();
            let consts = explicit_constants(spec, setup, caps.ncut);
            let denom = setup.denom();
            for_points(spec, setup, &mut tally, |g| g.for_setup(setup, 2), |env, t| {
                let ncut = caps.ncut;
                let d = caps.degree.max(ncut as u32);
                let c = setup_cvector(setup, env, d as usize, consts.as_deref())?;
                let pts = grid_points(-1, 1, denom);
                let table = miwa_table(&c, 1, d, ncut)?;
                let wave = wave_coefficients(&table, env, &pts, d, ncut)?;
                let w0 = build_w0(&c, env, ncut, denom)?;
                let ctx = ExpCtx::new(env);
                for n in 0..=ncut {
                    let coeff = w0.coeff(&ri(-(n as i64))).cloned().unwrap_or_default();
                    for s in &pts {
                        let lhs = wave.w(n, s).expect("sampled").constant_term();
                        let rhs = coeff.eval(s, &ctx)?.as_rat().unwrap_or_else(Rat::zero);
                        t.eq_rat(&format!("w_{n}(s={s}, t=0)"), &lhs, &rhs);
                    }
                }
                Ok(())
            });
            tally.finish("init", &setup.to_string(), Caps { degree: caps.degree.max(caps.ncut as u32), ..caps.clone() })
        })
        .collect()
}

/// Initial Lax operator: fractional powers, logarithm, conjugated forms, plus the conjugation rule for `Λ^{-k}`.
pub fn check_prop1(spec: &CheckSpec) -> Vec<VerificationReport> {
    let free = [Family::A, Family::B, Family::Finite, Family::General];
    let mut tally = Tally::new();
    let list = setups(spec, &free, vec![Setup::new(Family::General)], &mut tally);
    let caps = caps_of(spec, Caps { nvars: 0, degree: 0, ncut: 6 });
    let mut reports = Vec::new();
    for setup in list {
        let mut tally = Tally::new();
        let consts = explicit_constants(spec, &setup, caps.ncut);
        for_points(spec, &setup, &mut tally, |g| g.for_setup(&setup, 6), |env, t| {
            prop1_at(&setup, env, caps.ncut, consts.as_deref(), t)
        });
        reports.push(tally.finish("prop1", &setup.to_string(), caps.clone()));
    }
    reports
}

fn prop1_at(setup: &Setup, env: &ParamEnv, ncut: usize, consts: Option<&[Rat]>, t: &mut Tally) -> Result<()> {
    let denom = 6;
    let cap = -ri(ncut as i64);
    let ctx = ExpCtx::new(env);
    let c = setup_cvector(setup, env, ncut, consts)?;
    let w0 = build_w0(&c, env, ncut, denom)?;
    let lam = |a: Rat| DiffOp::<ExpCoeff>::lambda(a, denom, cap.clone(), &ctx);

    // L_0 two ways and in closed form
    let l0 = conjugate_shift(&w0, &ri(1), &ctx)?;
    let l0_direct = w0.mul(&lam(ri(1))?, &ctx)?.mul(&w0.inv(&ctx)?, &ctx)?;
    t.eq_op_exp("L0 route independence", &l0, &l0_direct, &ctx);
    for alpha in [ri(1), rat(1, 2), rat(1, 3)] {
        let la = conjugate_shift(&w0, &alpha, &ctx)?;
        let e = exponent_op(&c, env, ncut, denom, 0, |k| Ok(Rat::one() - env.exp_beta(&(-&alpha * ri(k)))?))?;
        let closed = lam(alpha.clone())?.mul(&e.exp(&ctx)?, &ctx)?;
        t.eq_op_exp(&format!("L0^({alpha}) closed form"), &la, &closed, &ctx);

        // remark form: Λ^α U exp(Σ c_k Q^k (1 - e^{-αβk}) Λ^{-k}) U^{-1}
        let u = DiffOp::monomial(Rat::zero(), ExpCoeff::term(Rat::one(), 0, rat(-1, 2), rat(1, 2)), denom, cap.clone())?;
        let uinv = u.inv(&ctx)?;
        let mut plain = Vec::new();
        for k in 1..=ncut as i64 {
            let r = c.get(k as usize) * env.big_q_pow(&ri(k))? * (Rat::one() - env.exp_beta(&(-&alpha * ri(k)))?);
            plain.push((ri(-k), ExpCoeff::constant(r)));
        }
        let inner = DiffOp::from_terms(plain, denom, cap.clone())?.exp(&ctx)?;
        let bis = lam(alpha.clone())?.mul(&u.mul(&inner.mul(&uinv, &ctx)?, &ctx)?, &ctx)?;
        t.eq_op_exp(&format!("L0^({alpha}) conjugated form"), &la, &bis, &ctx);
    }
    // fractional powers compose
    let half = conjugate_shift(&w0, &rat(1, 2), &ctx)?;
    let third = conjugate_shift(&w0, &rat(1, 3), &ctx)?;
    t.eq_op_exp("(L0^(1/2))^2", &half.pow(2, &ctx)?, &l0, &ctx);
    t.eq_op_exp("(L0^(1/3))^3", &third.pow(3, &ctx)?, &l0, &ctx);

    // logarithm
    let tail = op_log_dressed(&w0, &ctx)?.tail;
    let closed = exponent_op(&c, env, ncut, denom, 1, |k| Ok(ri(k)))?;
    t.eq_op_exp("log L0 tail", &tail, &closed, &ctx);
    let u = DiffOp::monomial(Rat::zero(), ExpCoeff::term(Rat::one(), 0, rat(-1, 2), rat(1, 2)), denom, cap.clone())?;
    let uinv = u.inv(&ctx)?;
    let mut plain = Vec::new();
    for k in 1..=ncut as i64 {
        let r = c.get(k as usize) * env.big_q_pow(&ri(k))? * ri(k);
        plain.push((ri(-k), ExpCoeff::term(r, 1, Rat::zero(), Rat::zero())));
    }
    let bis = u.mul(&DiffOp::from_terms(plain, denom, cap.clone())?.mul(&uinv, &ctx)?, &ctx)?;
    t.eq_op_exp("log L0 tail conjugated form", &tail, &bis, &ctx);

    // e^{β(s-1/2)²/2} Λ^{-k} e^{-β(s-1/2)²/2} = e^{-βk(k+1)/2} e^{βks} Λ^{-k}
    for k in 1..=ncut as i64 {
        let lhs = u.mul(&lam(ri(-k))?.mul(&uinv, &ctx)?, &ctx)?;
        let offset = Rat::new((-k * (k + 1)).into(), 2.into());
        let rhs = DiffOp::monomial(ri(-k), ExpCoeff::affine(Rat::one(), 0, ri(k), &offset, &ctx)?, denom, cap.clone())?;
        t.eq_op_exp(&format!("conjugated Lambda^(-{k})"), &lhs, &rhs, &ctx);
    }
    Ok(())
}

/// `1 - x(s) Λ^{-1}` with `x = e^{β(s-1)} · factor`.
fn one_minus(factor: Rat, env: &ParamEnv, denom: u32, cap: &Rat) -> Result<DiffOp<ExpCoeff>> {
    let ctx = ExpCtx::new(env);
    DiffOp::from_terms(
        [
            (Rat::zero(), ExpCoeff::one()),
            (-Rat::one(), ExpCoeff::affine(-factor, 0, Rat::one(), &-Rat::one(), &ctx)?),
        ],
        denom,
        cap.clone(),
    )
}

/// Closed operator shapes of the initial Lax operator for each family.
pub fn check_case(spec: &CheckSpec) -> Vec<VerificationReport> {
    let defaults = vec![
        Setup::new(Family::A),
        Setup::new(Family::B),
        Setup::framed(Family::C, 1),
        Setup::framed(Family::C, 2),
        Setup::with_tau(Family::C, rat(-1, 3)),
        Setup::framed(Family::D, 0),
        Setup::framed(Family::D, 1),
        Setup::framed(Family::Gbin, 1),
        Setup::framed(Family::Grr, 1),
        Setup::new(Family::Finite),
    ];
    let all = [Family::A, Family::B, Family::C, Family::D, Family::Gbin, Family::Grr, Family::Finite];
    let mut pre = Tally::new();
    let list = setups(spec, &all, defaults, &mut pre);
    let caps = caps_of(spec, Caps { nvars: 0, degree: 0, ncut: 6 });
    list.iter()
        .map(|setup| {
            let mut tally = Tally::new();
            let consts = match setup.family {
                Family::Finite => Some(spec.c_values.clone().unwrap_or_else(|| PointGen::new(spec.seed ^ 0x5eed).constants(2))),
                _ => None,
            };
            for_points(spec, setup, &mut tally, |g| g.for_setup(setup, 2), |env, t| {
                case_at(setup, env, caps.ncut, consts.as_deref(), t)
            });
            tally.finish("case", &setup.to_string(), caps.clone())
        })
        .collect()
}

fn case_at(setup: &Setup, env: &ParamEnv, ncut: usize, consts: Option<&[Rat]>, t: &mut Tally) -> Result<()> {
    let ctx = ExpCtx::new(env);
    let denom = setup.denom();
    let cap = -ri(ncut as i64);
    let c = setup_cvector(setup, env, ncut, consts)?;
    let w0 = build_w0(&c, env, ncut, denom)?;
    let q_big = env.big_q();
    match setup.family {
        Family::A => {
            let tail = op_log_dressed(&w0, &ctx)?.tail;
            let expect = DiffOp::monomial(-Rat::one(), ExpCoeff::affine(q_big, 1, Rat::one(), &-Rat::one(), &ctx)?, denom, cap)?;
            let n = t.eq_op_exp("log-tail", &tail, &expect, &ctx);
            t.check(n >= ncut, "log-tail known through Lambda^(-ncut)");
        }
        Family::B => {
            let a = env.a.clone().expect("family b has a");
            let tail = op_log_dressed(&w0, &ctx)?.tail;
            let head = DiffOp::monomial(-Rat::one(), ExpCoeff::affine(a * &q_big, 1, Rat::one(), &-Rat::one(), &ctx)?, denom, cap.clone())?;
            let expect = head.mul(&one_minus(q_big, env, denom, &cap)?.inv(&ctx)?, &ctx)?;
            let n = t.eq_op_exp("log-tail", &tail, &expect, &ctx);
            t.check(n >= ncut, "log-tail known through Lambda^(-ncut)");
        }
        Family::C | Family::D | Family::Gbin | Family::Grr => {
            let r = setup.framing.clone().expect("framed family");
            let alpha = r.recip();
            let la = conjugate_shift(&w0, &alpha, &ctx)?;
            let lam_a = DiffOp::<ExpCoeff>::lambda(alpha.clone(), denom, cap.clone(), &ctx)?;
            let half = rat(1, 2);
            let factor = |extra: &Rat| env.q_pow(&(extra + &half));
            let product = |list: &[Rat]| -> Result<DiffOp<ExpCoeff>> {
                let mut acc = DiffOp::identity(denom, cap.clone(), &ctx);
                for b in list {
                    acc = acc.mul(&one_minus(factor(b)?, env, denom, &cap)?, &ctx)?;
                }
                Ok(acc)
            };
            let (b_list, a_list): (Vec<Rat>, Vec<Rat>) = match setup.family {
                Family::C => (vec![Rat::zero()], vec![]),
                Family::D => (vec![Rat::zero()], vec![env.a.clone().expect("family d has a")]),
                Family::Gbin => (env.b_list.clone(), vec![]),
                _ => (env.b_list.clone(), env.a_list.clone()),
            };
            let lhs = la.mul(&product(&a_list)?.shift_coeffs(&-&alpha, &ctx)?, &ctx)?;
            let rhs = product(&b_list)?.mul(&lam_a, &ctx)?;
            t.eq_op_exp("fractional power shape", &lhs, &rhs, &ctx);
            if setup.family == Family::C {
                // L^d has shifts d-n..d for framing n/d
                let n_sh = ri(i64::try_from(r.numer()).unwrap_or(1));
                let d_sh = ri(i64::try_from(r.denom()).unwrap_or(1));
                let ln = conjugate_shift(&w0, &d_sh, &ctx)?;
                let banded = ln.band(&(&d_sh - &n_sh), &d_sh)?;
                t.eq_op_exp(&format!("band of L^{d_sh}"), &ln, &banded, &ctx);
                let prof = band_profile(&banded);
                let full: Vec<Rat> = (0..=i64::try_from(r.numer()).unwrap_or(0))
                    .map(|i| &d_sh - &n_sh + ri(i))
                    .collect();
                t.check(prof.shifts == full, &format!("band of L^{d_sh} is {:?}", prof.shifts.iter().map(Rat::to_string).collect::<Vec<_>>()));
            }
        }
        Family::Finite => {
            let tail = op_log_dressed(&w0, &ctx)?.tail;
            let closed = exponent_op(&c, env, ncut, denom, 1, |k| Ok(ri(k)))?;
            t.eq_op_exp("log-tail", &tail, &closed, &ctx);
            let n = c.values().iter().rposition(|x| !x.is_zero()).map_or(0, |i| i as i64 + 1);
            let prof = band_profile(&tail);
            t.check(prof.shifts.iter().all(|a| a >= &ri(-n)), "log-tail has at most N terms");
        }
        _ => {}
    }
    Ok(())
}

/// Whole-tail deviation of the case-(b) logarithm from the case-(a) one at
/// `s = 0`, for `Q = kappa/a`: `(|Λ^{-1} deviation|, Σ_{n>=2} |coefficient|)`.
pub fn scaling_deviations(env: &ParamEnv, a: &Rat, kappa: &Rat, ncut: usize) -> Result<(Rat, f64)> {
    let env = env.clone().with_q(kappa / a).with_a(a.clone());
    let ctx = ExpCtx::new(&env);
    let c = crate::schur::cvector(Family::B, &env, ncut)?;
    let tail = op_log_dressed(&build_w0(&c, &env, ncut, 1)?, &ctx)?.tail;
    let lead = tail.coeff(&-Rat::one()).cloned().unwrap_or_default();
    let case_a = ExpCoeff::affine(kappa.clone(), 1, Rat::one(), &-Rat::one(), &ctx)?;
    let d1 = lead.sub(&case_a, &ctx)?.max_abs_coeff();
    let rest: f64 = tail
        .terms()
        .filter(|(s, _)| **s < -Rat::one())
        .map(|(_, c)| c.eval_f64(0.0, &ctx).abs())
        .sum();
    Ok((d1, rest))
}

/// Case (b) approaches case (a) as `a -> ∞` with `aQ` fixed.
pub fn check_scaling(spec: &CheckSpec) -> Vec<VerificationReport> {
    let caps = caps_of(spec, Caps { nvars: 0, degree: 0, ncut: 6 });
    let mut tally = Tally::new();
    tally.note("float trend: deviation must shrink at least 5x per decade of a; the rate is a reading of the geometric-series structure");
    let setup = Setup::new(Family::B);
    let kappa = spec.kappa.clone().unwrap_or_else(Rat::one);
    for_points(spec, &setup, &mut tally, |g| g.free(2), |env, t| {
        let mut devs = Vec::new();
        if kappa.is_zero() {
            t.note("kappa = 0: the trend is vacuous");
        }
        for a in [ri(100), ri(1000), ri(10000)] {
            let (d1, rest) = scaling_deviations(env, &a, &kappa, caps.ncut)?;
            t.eq_rat(&format!("Lambda^(-1) deviation at a={a}"), &d1, &Rat::zero());
            devs.push(rest);
        }
        for w in devs.windows(2).filter(|_| !kappa.is_zero()) {
            let ratio = w[0] / w[1];
            t.check(ratio.is_finite() && ratio >= 5.0, &format!("deviation ratio {ratio:.3} >= 5"));
        }
        t.note(format!("tail deviations {:?}", devs.iter().map(|d| format!("{d:.6e}")).collect::<Vec<_>>()));
        let (z1, z) = scaling_deviations(env, &ri(1000), &Rat::zero(), caps.ncut)?;
        t.check(z1.is_zero() && z == 0.0, "kappa = 0 gives a zero tail");
        Ok(())
    });
    vec![tally.finish("scaling", "b", caps)]
}
