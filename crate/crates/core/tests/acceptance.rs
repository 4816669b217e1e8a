//! Acceptance suite: one line per criterion, all exact except the scaling
//! trend (float, at least 5x shrink per decade of `a`).

use std::time::Instant;

use kplab_core::lab::{run_check, CheckId, CheckSpec, VerificationReport};
use kplab_core::partitions::enumerate;
use kplab_core::scalar::{rat, ri, ParamEnv};
use kplab_core::schur::{cvector, schur_at, schur_special_closed, Family};
use kplab_core::tau::{h_weight, h_weight_product};
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_reports(reports: Vec<VerificationReport>) -> Outcome {
    let pass = !reports.is_empty() && reports.iter().all(VerificationReport::passed);
    let asserted: usize = reports.iter().map(|r| r.asserted_count).sum();
    let mut detail = format!("{} reports, {asserted} coefficients asserted", reports.len());
    for r in reports.iter().filter(|r| !r.passed()) {
        detail.push_str(&format!("\n      {}", r.line()));
        for n in r.notes.iter().take(4) {
            detail.push_str(&format!("\n        {n}"));
        }
    }
    Outcome { pass, detail }
}

fn check(id: CheckId) -> Outcome {
    from_reports(run_check(id, &CheckSpec::default()))
}

fn schur_cross_validation() -> Outcome {
    let mut count = 0;
    let mut bad = Vec::new();
    for q in [rat(1, 16), rat(1, 4), rat(9, 64)] {
        let env = ParamEnv::hodge(&q, &ri(1)).expect("q has a rational square root");
        let a = cvector(Family::A, &env, 8).expect("family a");
        for lambda in enumerate(8) {
            count += 1;
            if schur_at(&lambda, &a).ok() != schur_special_closed(&lambda, Family::A, &env).ok() {
                bad.push(format!("a {lambda} q={q}"));
            }
        }
        let c = cvector(Family::C, &env, 6).expect("family c");
        for lambda in enumerate(6) {
            count += 1;
            let lhs = schur_at(&lambda, &c);
            let rhs = schur_special_closed(&lambda, Family::C, &env);
            if lhs.is_err() || lhs.ok() != rhs.ok() {
                bad.push(format!("c {lambda} q={q}"));
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("{count} comparisons, mismatches {bad:?}"),
    }
}

fn weight_cross_validation() -> Outcome {
    let mut count = 0;
    let mut bad = Vec::new();
    for (g, root) in [(rat(1, 2), rat(1, 3)), (rat(2, 3), ri(2)), (rat(3, 5), rat(-3, 4))] {
        let env = ParamEnv::new(g, 8).expect("env").with_q_root(root);
        for lambda in enumerate(6) {
            for s in -3..=3 {
                count += 1;
                let closed = h_weight(&lambda, &ri(s), &env);
                let product = h_weight_product(&lambda, s, &env);
                if closed.is_err() || closed.ok() != product.ok() {
                    bad.push(format!("{lambda} s={s}"));
                }
            }
        }
    }
    Outcome {
        pass: bad.is_empty(),
        detail: format!("{count} comparisons, mismatches {bad:?}"),
    }
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance() {
    let criteria: Vec<Criterion> = vec![
        ("1. Schur special values: evaluation vs closed form, |lambda| <= 8 (a), <= 6 (c), 3 q points", schur_cross_validation),
        ("2. Weights: closed form vs contents product, |lambda| <= 6, s in [-3, 3], 3 points", weight_cross_validation),
        ("3. Factorization at t = 0 through Lambda^-6: (a), (b), (c) f=1,2, (d) f=0,1", || check(CheckId::Init)),
        ("4. Initial Lax operator, fractional powers, logarithm, conjugation rule (k <= 6)", || check(CheckId::Prop1)),
        ("5. Case shapes (a), (b), (c) f=1,2, tau=-1/3 band, (d) f=0,1, gBIN N=2, gRR N=2", || check(CheckId::Case)),
        ("6. Lax residuals, k <= 3, D = 6, Ncut = 6, cases (a), (c) f=1", || check(CheckId::Lax)),
        ("7. Persistence: off-band coefficients of L(t)^2 vanish through t-degree 4, (c) f=1", || check(CheckId::Persist)),
        ("8. R_k Lambda^a = Lambda^a P_k for 20 random banded (B, C), N <= 2, f in {1,2}, k <= 2", || check(CheckId::Pqr)),
        ("9. Banded-factor flow: t = 0 slice and t-degree 2, (d) f=0, N=1", || check(CheckId::Bcflow)),
        ("10. Logarithmic-reduction flow at t = 0, (b), N=1, k <= 2", || check(CheckId::Ccflow)),
        ("11. Auxiliary linear equations through z-order 5, case (a)", || check(CheckId::Wave)),
        ("12. Scaling trend (b) -> (a), a in {1e2, 1e3, 1e4}, >= 5x per decade (float)", || check(CheckId::Scaling)),
    ];
    let results: Vec<(Outcome, f64)> = criteria
        .par_iter()
        .map(|(_, f)| {
            let t = Instant::now();
            let o = f();
            (o, t.elapsed().as_secs_f64())
        })
        .collect();
    let mut failed = Vec::new();
    for ((name, _), (o, secs)) in criteria.iter().zip(&results) {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {name} -- {} ({secs:.1}s)", o.detail);
        if !o.pass {
            failed.push(*name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
