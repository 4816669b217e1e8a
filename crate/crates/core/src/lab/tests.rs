use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::ops::{Coeff, DiffOp, GridCoeff, GridCtx};
use crate::scalar::{rat, ParamEnv, TPoly};

fn ctx() -> GridCtx {
    GridCtx { nvars: 1, cap: 2 }
}

/// Random series; `denom` keeps the constant terms of different factors
/// from cancelling by accident.
fn random_series(rng: &mut ChaCha8Rng, denom: i64, ctx: &GridCtx) -> TPoly {
    let mut p = TPoly::zero(ctx.nvars, ctx.cap);
    for d in 0..=ctx.cap {
        let mut r = rat(rng.gen_range(1..=60) * denom + 1, denom);
        if rng.gen_bool(0.5) {
            r = -r;
        }
        p = p.add(&TPoly::monomial(vec![d as u8], r, ctx.cap)).unwrap();
    }
    p
}

fn random_banded(rng: &mut ChaCha8Rng, denom: i64, n: usize, points: &[Rat], cap: &Rat, ctx: &GridCtx) -> DiffOp<GridCoeff> {
    let mut terms = vec![(Rat::zero(), GridCoeff::from_rat(&Rat::one(), ctx))];
    for j in 1..=n as i64 {
        let m: BTreeMap<Rat, TPoly> = points.iter().map(|s| (s.clone(), random_series(rng, denom, ctx))).collect();
        terms.push((ri(-j), GridCoeff::Sampled(m)));
    }
    DiffOp::from_terms(terms, 1, cap.clone()).unwrap()
}

fn agree(found: &DiffOp<GridCoeff>, expected: &DiffOp<GridCoeff>, shift: i64) -> usize {
    let (Some(GridCoeff::Sampled(f)), Some(GridCoeff::Sampled(e))) = (found.coeff(&ri(shift)), expected.coeff(&ri(shift))) else {
        panic!("missing coefficient at shift {shift}");
    };
    let mut n = 0;
    for (s, p) in f {
        let q = &e[s];
        let d = p.valid().min(q.valid());
        assert!(d >= 0);
        assert_eq!(p.truncated(d), q.truncated(d), "shift {shift}, s = {s}");
        n += 1;
    }
    n
}

#[test]
fn extract_bc_recovers_synthesized_factors() {
    let ctx = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let points: Vec<Rat> = (-12..=12).map(ri).collect();
    for inst in 0..100 {
        let n = 1 + inst % 3;
        let cap = -ri(3 * n as i64 + 2);
        let b = random_banded(&mut rng, 1, n, &points, &cap, &ctx);
        let c = random_banded(&mut rng, 11, n, &points, &cap, &ctx);
        let x = b.mul(&c.inv(&ctx).unwrap(), &ctx).unwrap();
        let pair = extract_bc(&x, n, &ctx).unwrap();
        assert!(pair.consistency_checked > 0);
        for j in 1..=n as i64 {
            assert!(agree(&pair.b, &b, -j) > 0);
            assert!(agree(&pair.c, &c, -j) > 0);
        }
    }
}

#[test]
fn extract_bc_rejects_generic_operator() {
    let ctx = ctx();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let points: Vec<Rat> = (-12..=12).map(ri).collect();
    let cap = -ri(6);
    let x = random_banded(&mut rng, 1, 6, &points, &cap, &ctx);
    assert!(matches!(extract_bc(&x, 1, &ctx), Err(Error::NotReducible(_))));
}

fn t0_dressing(setup: &Setup, env: &ParamEnv, ncut: usize) -> DiffOp<GridCoeff> {
    let caps = Caps { nvars: 1, degree: ncut as u32, ncut };
    let c = setup_cvector(setup, env, ncut, None).unwrap();
    let pts: Vec<Rat> = (-20..=12).map(ri).collect();
    tau_dressing(&c, env, &caps, &pts, 1).unwrap()
}

#[test]
fn case_d_factors_at_t0() {
    // q = 1/16, a = 2, f = 0: u_1 = -q^{s+a-1/2}, v_1 = -q^{s-1/2}
    let env = ParamEnv::hodge(&rat(1, 16), &ri(1)).unwrap().with_a(ri(2));
    let ctx = GridCtx { nvars: 1, cap: 6 };
    let w = t0_dressing(&Setup::framed(Family::D, 0), &env, 6);
    let l = crate::ops::conjugate_shift(&w, &Rat::one(), &ctx).unwrap();
    let pair = extract_bc(&l.right_shift(&-Rat::one()).unwrap(), 1, &ctx).unwrap();
    let (GridCoeff::Sampled(u), GridCoeff::Sampled(v)) = (pair.c.coeff(&-Rat::one()).unwrap(), pair.b.coeff(&-Rat::one()).unwrap()) else {
        panic!("sampled coefficients expected");
    };
    assert!(!u.is_empty() && !v.is_empty());
    let half = rat(1, 2);
    for (s, p) in u {
        assert_eq!(p.constant_term(), -env.q_pow(&(s + ri(2) - &half)).unwrap(), "u at s = {s}");
    }
    for (s, p) in v {
        assert_eq!(p.constant_term(), -env.q_pow(&(s - &half)).unwrap(), "v at s = {s}");
    }
}

#[test]
fn gbin_input_has_trivial_c() {
    let env = ParamEnv::hodge(&rat(1, 16), &ri(1)).unwrap().with_b_list(vec![rat(1, 2), rat(5, 2)]);
    let ctx = GridCtx { nvars: 1, cap: 6 };
    let w = t0_dressing(&Setup::framed(Family::Gbin, 0), &env, 6);
    let l = crate::ops::conjugate_shift(&w, &Rat::one(), &ctx).unwrap();
    let pair = extract_bc(&l.right_shift(&-Rat::one()).unwrap(), 2, &ctx).unwrap();
    for i in 1..=2 {
        let c = pair.c.coeff(&ri(-i)).unwrap();
        assert!(c.vanishes_through(0), "u_{i} = {}", c.render());
    }
}

#[test]
fn zero_constants_give_trivial_pair() {
    let env = ParamEnv::new(rat(1, 3), 2).unwrap();
    let caps = Caps { nvars: 1, degree: 6, ncut: 6 };
    let ctx = GridCtx { nvars: 1, cap: 6 };
    let c = crate::schur::cvector(Family::Zero, &env, 6).unwrap();
    let pts: Vec<Rat> = (-20..=12).map(ri).collect();
    let w = tau_dressing(&c, &env, &caps, &pts, 1).unwrap();
    let l = crate::ops::conjugate_shift(&w, &Rat::one(), &ctx).unwrap();
    let pair = extract_bc(&l.right_shift(&-Rat::one()).unwrap(), 1, &ctx).unwrap();
    assert!(pair.b.coeff(&-Rat::one()).unwrap().vanishes_through(0));
    assert!(pair.c.coeff(&-Rat::one()).unwrap().vanishes_through(0));
}

fn user_spec(setup: Setup, env: ParamEnv, caps: Caps) -> CheckSpec {
    CheckSpec {
        setup: Some(setup),
        user_env: Some(env),
        caps: Some(caps),
        random_points: 0,
        k_max: Some(1),
        ..CheckSpec::default()
    }
}

#[test]
fn bc_flow_at_user_point() {
    let env = ParamEnv::hodge(&rat(1, 16), &ri(1)).unwrap().with_a(ri(2));
    let spec = user_spec(Setup::framed(Family::D, 0), env, Caps { nvars: 1, degree: 7, ncut: 5 });
    let reports = check_bc_flow(&spec);
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].verdict, Verdict::Pass, "{:?}", reports[0].notes);
}

#[test]
fn lax_residual_detects_perturbed_dressing() {
    let env = ParamEnv::new(rat(1, 3), 2).unwrap().with_q_root(rat(1, 2));
    let ctx = GridCtx { nvars: 1, cap: 4 };
    let caps = Caps { nvars: 1, degree: 4, ncut: 4 };
    let c = crate::schur::cvector(Family::A, &env, 4).unwrap();
    let pts: Vec<Rat> = (-14..=8).map(ri).collect();
    let w = tau_dressing(&c, &env, &caps, &pts, 1).unwrap();
    let r = grid_lax(&w, 1, &ctx).unwrap();
    let mut t = Tally::new();
    for (_, coeff) in r.terms() {
        t.zero_grid("lax", coeff, None);
    }
    assert!(!t.failed() && t.asserted() > 0);

    // add t_1 to w_1 at every point
    let bump = TPoly::var(1, 1, 4);
    let w1 = w.coeff(&-Rat::one()).unwrap().map(|p| p.add(&bump).unwrap());
    let bad_terms: Vec<(Rat, GridCoeff)> = w
        .terms()
        .map(|(a, c)| (a.clone(), if *a == -Rat::one() { w1.clone() } else { c.clone() }))
        .collect();
    let bad = DiffOp::from_terms(bad_terms, 1, w.cap().clone()).unwrap().with_floor(w.cap().clone());
    let r = grid_lax(&bad, 1, &ctx).unwrap();
    let mut t = Tally::new();
    for (_, coeff) in r.terms() {
        t.zero_grid("lax", coeff, None);
    }
    assert!(t.failed());
}

#[test]
fn trivial_reduced_pair_gives_pure_shifts() {
    let env = ParamEnv::new(rat(1, 2), 6).unwrap();
    let ctx = crate::ops::ExpCtx::new(&env);
    let cap = -ri(6);
    let b = DiffOp::from_terms(
        [(Rat::zero(), crate::ops::ExpCoeff::one()), (-Rat::one(), crate::ops::ExpCoeff::exp_lin(rat(2, 3), ri(1)))],
        2,
        cap.clone(),
    )
    .unwrap();
    let lam = DiffOp::lambda(rat(1, 2), 2, cap.clone(), &ctx).unwrap();
    let l_alpha = b.mul(&b.inv(&ctx).unwrap(), &ctx).unwrap().mul(&lam, &ctx).unwrap();
    let p1 = l_alpha.pow(2, &ctx).unwrap().plus().unwrap();
    let expected = DiffOp::lambda(ri(1), 2, cap, &ctx).unwrap();
    let mut t = Tally::new();
    t.eq_op_exp("P_1", &p1, &expected, &ctx);
    assert!(!t.failed());
}

#[test]
fn check_ids_round_trip() {
    for id in CheckId::ALL {
        assert_eq!(id.name().parse::<CheckId>().unwrap(), id);
    }
    assert!("nope".parse::<CheckId>().is_err());
    assert_eq!(Setup::with_tau(Family::C, rat(-1, 3)).to_string(), "c tau=-1/3");
    assert_eq!(Setup::framed(Family::D, 1).to_string(), "d f=1");
}

#[test]
fn reports_are_deterministic() {
    let spec = CheckSpec::default();
    let a: Vec<String> = run_checks(&[CheckId::Prop1, CheckId::Case], &spec).iter().map(|r| r.to_json()).collect();
    let b: Vec<String> = run_checks(&[CheckId::Case, CheckId::Prop1], &spec).iter().map(|r| r.to_json()).collect();
    assert_eq!(a, b);
    assert!(a.len() > 2);
}

#[test]
fn larger_truncation_keeps_passing() {
    for ncut in [4, 6, 8] {
        let spec = CheckSpec {
            caps: Some(Caps { nvars: 0, degree: 0, ncut }),
            random_points: 1,
            ..CheckSpec::default()
        };
        for r in check_case(&spec).into_iter().chain(check_prop1(&spec)) {
            assert_eq!(r.verdict, Verdict::Pass, "ncut {ncut}: {}", r.line());
        }
    }
}

#[test]
fn incompatible_user_point_is_skipped() {
    // M = 2 cannot host the 1/3 powers used by the fractional checks
    let env = ParamEnv::new(rat(1, 3), 2).unwrap().with_q_root(ri(1));
    let spec = CheckSpec {
        setup: Some(Setup::new(Family::General)),
        user_env: Some(env),
        c_values: Some(vec![ri(1), rat(1, 2)]),
        random_points: 0,
        ..CheckSpec::default()
    };
    let r = &check_prop1(&spec)[0];
    assert_eq!(r.verdict, Verdict::Inconclusive);
    assert!(r.notes.iter().any(|n| n.contains("skipped")));
}

#[test]
fn scaling_deviation_shrinks() {
    let env = ParamEnv::new(rat(1, 2), 2).unwrap();
    let mut last = f64::INFINITY;
    for a in [10, 100, 1000] {
        let (d1, rest) = scaling_deviations(&env, &ri(a), &ri(1), 6).unwrap();
        assert!(d1.is_zero());
        assert!(rest < last / 5.0);
        last = rest;
    }
}
