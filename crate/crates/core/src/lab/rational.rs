use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::flows::{assert_grid_zero, tau_dressing};
use super::initial::{build_w0, caps_of, grid_points, setups};
use super::{for_points, known_floor, setup_cvector, Caps, CheckSpec, PointGen, Setup, Tally, VerificationReport};
use crate::error::{Error, Result};
use crate::ops::{commutator, conjugate_shift, op_log_dressed, Coeff, DiffOp, ExpCoeff, ExpCtx, GridCoeff, GridCtx};
use crate::scalar::{ri, ParamEnv, Rat, TPoly};
use crate::schur::{cvector, Family};
use crate::tau::{miwa_table, wave_coefficients};

/// Banded factors of `X = B C^{-1}` with `B = 1 + Σ v_n Λ^{-n}`,
/// `C = 1 + Σ u_n Λ^{-n}`, `n <= N`.
#[derive(Clone, Debug)]
pub struct ReducedPair {
    pub n: usize,
    pub b: DiffOp<GridCoeff>,
    pub c: DiffOp<GridCoeff>,
    /// Number of surplus equations confirmed at some sample point.
    pub consistency_checked: usize,
}

fn sample(op: &DiffOp<GridCoeff>, m: i64, s: &Rat, ctx: &GridCtx) -> Option<TPoly> {
    match op.coeff(&ri(-m)) {
        Some(c) => c.at(s).cloned(),
        None if op.is_known(&ri(-m)) => Some(TPoly::zero(ctx.nvars, ctx.cap)),
        None => None,
    }
}

fn vanishes(p: &TPoly) -> bool {
    p.valid() < 0 || p.truncated(p.valid()).is_zero()
}

/// Solves `A x = rhs` over truncated series, pivoting on entries with a
/// nonzero constant term. Unknowns whose column vanishes are free and set
/// to zero; the leftover rows must then be consistent.
fn solve(mut a: Vec<Vec<TPoly>>, mut rhs: Vec<TPoly>, at: &Rat) -> Result<Vec<TPoly>> {
    let n = a.first().map_or(0, Vec::len);
    let rows = rhs.len();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..n {
        let Some(piv) = (row..rows).find(|&r| !a[r][col].constant_term().is_zero()) else {
            if (row..rows).all(|r| vanishes(&a[r][col])) {
                continue;
            }
            return Err(Error::NotReducible(format!("degenerate banding system at s = {at}")));
        };
        a.swap(row, piv);
        rhs.swap(row, piv);
        let inv = a[row][col].inv()?;
        for r in 0..rows {
            if r == row {
                continue;
            }
            let factor = a[r][col].mul(&inv)?;
            if factor.is_zero() {
                continue;
            }
            for c in col..n {
                let d = factor.mul(&a[row][c])?;
                a[r][c] = a[r][c].sub(&d)?;
            }
            let d = factor.mul(&rhs[row])?;
            rhs[r] = rhs[r].sub(&d)?;
        }
        pivots.push((row, col));
        row += 1;
    }
    if let Some(r) = (row..rows).find(|&r| !vanishes(&rhs[r])) {
        return Err(Error::NotReducible(format!("inconsistent banding system at s = {at}: {}", rhs[r])));
    }
    let zero = rhs.first().map(|p| TPoly::zero(p.nvars(), p.cap()));
    let mut x = vec![zero.unwrap_or_else(|| TPoly::zero(0, 0)); n];
    for (r, c) in pivots {
        x[c] = rhs[r].mul(&a[r][c].inv()?)?;
    }
    Ok(x)
}

/// Finds banded `B`, `C` of width `n` with `X C = B` pointwise on the
/// grid. Surplus equations from deeper known shifts must hold, otherwise
/// the input is reported as not of reduced type.
pub fn extract_bc(x: &DiffOp<GridCoeff>, n: usize, ctx: &GridCtx) -> Result<ReducedPair> {
    let nn = n as i64;
    let deepest = -known_floor(x).to_integer().to_string().parse::<i64>().unwrap_or(0);
    if deepest < 2 * nn {
        return Err(Error::Truncation(format!("need X through Lambda^(-{}), have Lambda^(-{deepest})", 2 * nn)));
    }
    let mut sigmas: Vec<Rat> = x.terms().filter_map(|(_, c)| c.points()).flatten().collect();
    sigmas.sort();
    sigmas.dedup();
    let zero = TPoly::zero(ctx.nvars, ctx.cap);
    // ǔ_i(σ) = u_i(σ + i)
    let mut check: Vec<BTreeMap<Rat, TPoly>> = vec![BTreeMap::new(); n + 1];
    let mut consistency = 0;
    for sigma in &sigmas {
        let xs = |m: i64, j: i64| -> Option<TPoly> {
            if m < 0 {
                return Some(zero.clone());
            }
            sample(x, m, &(sigma + ri(j)), ctx)
        };
        let mut a = Vec::new();
        let mut rhs = Vec::new();
        let mut complete = true;
        for j in nn + 1..=2 * nn {
            let row: Option<Vec<TPoly>> = (1..=nn).map(|i| xs(j - i, j)).collect();
            let (Some(row), Some(r0)) = (row, xs(j, j)) else {
                complete = false;
                break;
            };
            a.push(row);
            rhs.push(r0.neg());
        }
        if !complete {
            continue;
        }
        let u = solve(a, rhs, sigma)?;
        let full: Vec<TPoly> = std::iter::once(TPoly::one(ctx.nvars, ctx.cap)).chain(u).collect();
        // surplus equations
        for j in 2 * nn + 1..=deepest {
            let mut acc = zero.clone();
            let mut ok = true;
            for (i, ui) in full.iter().enumerate() {
                match xs(j - i as i64, j) {
                    Some(xv) => acc = acc.add(&xv.mul(ui)?)?,
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok || acc.valid() < 0 {
                continue;
            }
            if !acc.truncated(acc.valid()).is_zero() {
                return Err(Error::NotReducible(format!(
                    "surplus equation at Lambda^(-{j}), s = {} fails: {acc}",
                    sigma + ri(j)
                )));
            }
            consistency += 1;
        }
        for (i, ui) in full.into_iter().enumerate() {
            check[i].insert(sigma.clone(), ui);
        }
    }
    if check[0].is_empty() {
        return Err(Error::EmptyWindow("no sample point supports the banding system".into()));
    }
    let cap = x.cap().clone();
    let denom = x.denom();
    let mut c_terms = vec![(Rat::zero(), GridCoeff::from_rat(&Rat::one(), ctx))];
    let mut b_terms = vec![(Rat::zero(), GridCoeff::from_rat(&Rat::one(), ctx))];
    for i in 1..=nn {
        let u_check = GridCoeff::Sampled(check[i as usize].clone());
        c_terms.push((ri(-i), u_check.shift(&ri(-i), ctx)?));
    }
    for j in 1..=nn {
        // v_j(s) = Σ_i x_{j-i}(s) ǔ_i(s-j)
        let mut vals = BTreeMap::new();
        for s in &sigmas {
            let mut acc = zero.clone();
            let mut ok = true;
            for i in 0..=nn {
                let (Some(xv), Some(uv)) = (sample(x, j - i, s, ctx), check[i as usize].get(&(s - ri(j)))) else {
                    ok = false;
                    break;
                };
                acc = acc.add(&xv.mul(uv)?)?;
            }
            if ok {
                vals.insert(s.clone(), acc);
            }
        }
        b_terms.push((ri(-j), GridCoeff::Sampled(vals)));
    }
    Ok(ReducedPair {
        n,
        b: DiffOp::from_terms(b_terms, denom, cap.clone())?,
        c: DiffOp::from_terms(c_terms, denom, cap)?,
        consistency_checked: consistency,
    })
}

fn random_banded(gen: &mut PointGen, n: usize, denom: u32, cap: &Rat) -> Result<DiffOp<ExpCoeff>> {
    let mut terms = vec![(Rat::zero(), ExpCoeff::one())];
    for j in 1..=n as i64 {
        let mut c = ExpCoeff::default();
        for _ in 0..2 {
            let lin = ri(gen.int(-1, 1));
            c = c.add(&ExpCoeff::exp_lin(gen.nonzero(), lin), &ExpCtx::new(&ParamEnv::new(Rat::new(1.into(), 2.into()), 6)?))?;
        }
        terms.push((ri(-j), c));
    }
    DiffOp::from_terms(terms, denom, cap.clone())
}

/// `P_k`, `Q_k`, `R_k` of a reduced pair in the exponential backend,
/// each computed from the power of the product form.
struct Pqr {
    p: DiffOp<ExpCoeff>,
    q: DiffOp<ExpCoeff>,
    r: DiffOp<ExpCoeff>,
}

fn pqr_products(b: &DiffOp<ExpCoeff>, c: &DiffOp<ExpCoeff>, alpha: &Rat, k: u32, ctx: &ExpCtx) -> Result<(Pqr, DiffOp<ExpCoeff>)> {
    let denom = b.denom();
    let cap = b.cap().clone();
    let lam = DiffOp::lambda(alpha.clone(), denom, cap, ctx)?;
    let cinv = c.inv(ctx)?;
    let bcinv = b.mul(&cinv, ctx)?;
    let n = k * (alpha.recip().to_integer().to_string().parse::<u32>().unwrap_or(1));
    let l_alpha = bcinv.mul(&lam, ctx)?;
    let p = l_alpha.pow(n, ctx)?.plus()?;
    let q = cinv.mul(&lam, ctx)?.mul(b, ctx)?.pow(n, ctx)?.plus()?;
    let r = lam.mul(&bcinv, ctx)?.pow(n, ctx)?.plus()?;
    Ok((Pqr { p, q, r }, l_alpha))
}

/// The identity `R_k Λ^{1/(f+1)} = Λ^{1/(f+1)} P_k` and the equivalent
/// expressions of `P_k`, `Q_k`, `R_k` for random banded `B`, `C`.
pub fn check_pqr(spec: &CheckSpec) -> Vec<VerificationReport> {
    let mut tally = Tally::new();
    let instances = 20;
    let mut gen = PointGen::new(spec.seed ^ 0x9e37);
    let caps = caps_of(spec, Caps { nvars: 0, degree: 0, ncut: 6 });
    let cap = -ri(caps.ncut as i64);
    let k_max = spec.k_max.unwrap_or(2) as u32;
    for i in 0..instances {
        let f = 1 + (i % 2) as i64;
        let n = 1 + (i / 2 % 2);
        let run = |gen: &mut PointGen, t: &mut Tally| -> Result<()> {
            let env = ParamEnv::new(gen.unit_fraction(), 6)?;
            let mut params = env.describe();
            params.insert("f".into(), f.to_string());
            params.insert("N".into(), n.to_string());
            t.point(params);
            let ctx = ExpCtx::new(&env);
            let denom = (f + 1) as u32;
            let alpha = Rat::new(1.into(), (f + 1).into());
            let b = random_banded(gen, n, denom, &cap)?;
            let c = random_banded(gen, n, denom, &cap)?;
            let lam = DiffOp::lambda(alpha.clone(), denom, cap.clone(), &ctx)?;
            for k in 1..=k_max {
                let (pqr, l_alpha) = pqr_products(&b, &c, &alpha, k, &ctx)?;
                let lhs = pqr.r.mul(&lam, &ctx)?;
                let rhs = lam.mul(&pqr.p, &ctx)?;
                t.eq_op_exp(&format!("R_{k} Lambda^a = Lambda^a P_{k}"), &lhs, &rhs, &ctx);
                let l = l_alpha.pow((f + 1) as u32, &ctx)?;
                let lk = l.pow(k, &ctx)?;
                t.eq_op_exp(&format!("P_{k} = (L^{k})_+"), &pqr.p, &lk.plus()?, &ctx);
                let q_alt = b.inv(&ctx)?.mul(&lk, &ctx)?.mul(&b, &ctx)?.plus()?;
                t.eq_op_exp(&format!("Q_{k} = (B^-1 L^{k} B)_+"), &pqr.q, &q_alt, &ctx);
                let r_alt = lk.shift_coeffs(&alpha, &ctx)?.plus()?;
                t.eq_op_exp(&format!("R_{k} = (Lambda^a L^{k} Lambda^-a)_+"), &pqr.r, &r_alt, &ctx);
            }
            Ok(())
        };
        if let Err(e) = run(&mut gen, &mut tally) {
            tally.error(&format!("instance {i}"), &e);
        }
    }
    vec![tally.finish("pqr", "random banded B, C", caps)]
}

fn reduction_width(setup: &Setup, env: &ParamEnv) -> usize {
    match setup.family {
        Family::Gbin | Family::Grr => env.b_list.len().max(env.a_list.len()),
        _ => 1,
    }
}

/// Evolution equations of the banded factors on tau-derived data.
pub fn check_bc_flow(spec: &CheckSpec) -> Vec<VerificationReport> {
    let mut pre = Tally::new();
    let list = setups(spec, &[Family::C, Family::D, Family::Gbin, Family::Grr], vec![Setup::framed(Family::D, 0)], &mut pre);
    let k_max = spec.k_max.unwrap_or(2);
    let caps = caps_of(spec, Caps { nvars: k_max, degree: 7, ncut: 5 });
    let depth = 2;
    list.iter()
        .map(|setup| {
            let mut tally = Tally::new();
            for_points(spec, setup, &mut tally, |g| g.for_setup(setup, 2), |env, t| {
                let ctx = GridCtx { nvars: caps.nvars, cap: caps.degree };
                let r = setup.framing.clone().expect("framed family");
                let alpha = r.recip();
                let denom = setup.denom();
                let c = setup_cvector(setup, env, caps.degree as usize, None)?;
                let pts = grid_points(-4 * caps.ncut as i64, 3 * k_max as i64 + 3 + caps.ncut as i64, denom);
                let w = tau_dressing(&c, env, &caps, &pts, denom)?;
                let la = conjugate_shift(&w, &alpha, &ctx)?;
                let x = la.right_shift(&-&alpha)?;
                let n = reduction_width(setup, env);
                let pair = extract_bc(&x, n, &ctx)?;
                t.check(pair.consistency_checked > 0, "banding system overdetermined and consistent");
                let (b, cc) = (&pair.b, &pair.c);
                let l = conjugate_shift(&w, &Rat::one(), &ctx)?;
                let mut min_valid = i64::MAX;
                for k in 1..=k_max.min(caps.nvars) {
                    let lk = l.pow(k as u32, &ctx)?;
                    let p = lk.plus()?;
                    let q = b.inv(&ctx)?.mul(&lk, &ctx)?.mul(b, &ctx)?.plus()?;
                    let rr = lk.shift_coeffs(&alpha, &ctx)?.plus()?;
                    let rhs_b = p.mul(b, &ctx)?.sub(&b.mul(&q, &ctx)?, &ctx)?;
                    let rhs_c = rr.mul(cc, &ctx)?.sub(&cc.mul(&q, &ctx)?, &ctx)?;
                    let db = b.map_coeffs(|x| Ok(x.map(|p| p.diff(k))))?;
                    let dc = cc.map_coeffs(|x| Ok(x.map(|p| p.diff(k))))?;
                    let res_b = db.sub(&rhs_b, &ctx)?;
                    let res_c = dc.sub(&rhs_c, &ctx)?;
                    for res in [&res_b, &res_c] {
                        for (_, coeff) in res.terms() {
                            if !coeff.is_empty_window() {
                                min_valid = min_valid.min(coeff.valid());
                            }
                        }
                    }
                    let nb = assert_grid_zero(t, &format!("dB/dt_{k}"), &res_b, Some(depth));
                    let nc = assert_grid_zero(t, &format!("dC/dt_{k}"), &res_c, Some(depth));
                    t.check(nb > 0 && nc > 0, &format!("k={k}: residuals assertable"));
                    // right-hand sides live on Λ^{-1} .. Λ^{-N}
                    for (label, rhs) in [("P B - B Q", &rhs_b), ("R C - C Q", &rhs_c)] {
                        let floor = known_floor(rhs);
                        for (a, coeff) in rhs.terms() {
                            if *a >= floor && (*a >= Rat::zero() || *a < ri(-(n as i64))) {
                                t.zero_grid(&format!("{label} (k={k}) off-band at Lambda^({a})"), coeff, Some(depth));
                            }
                        }
                    }
                }
                t.check(min_valid >= depth, &format!("residuals tracked through t-degree {depth} (min {min_valid})"));
                Ok(())
            });
            tally.finish("bcflow", &setup.to_string(), caps.clone())
        })
        .collect()
}

/// `C` and `C̃` with `log L = log Λ + C̃ C^{-1}` at `t = 0`.
fn cc_pair(setup: &Setup, env: &ParamEnv, cap: &Rat, ctx: &ExpCtx) -> Result<(DiffOp<ExpCoeff>, DiffOp<ExpCoeff>)> {
    let q = env.big_q();
    let x = |r: Rat, deg| ExpCoeff::affine(r, deg, Rat::one(), &-Rat::one(), ctx);
    match setup.family {
        Family::A => Ok((
            DiffOp::identity(1, cap.clone(), ctx),
            DiffOp::monomial(-Rat::one(), x(q, 1)?, 1, cap.clone())?,
        )),
        Family::B => {
            let a = env.a.clone().ok_or_else(|| Error::config("family b needs a"))?;
            let c = DiffOp::from_terms([(Rat::zero(), ExpCoeff::one()), (-Rat::one(), x(-q.clone(), 0)?)], 1, cap.clone())?;
            Ok((c, DiffOp::monomial(-Rat::one(), x(a * q, 1)?, 1, cap.clone())?))
        }
        f => Err(Error::config(format!("no logarithmic reduction for family {f}"))),
    }
}

/// Evolution equations of `C`, `C̃` at `t = 0`, from the first-order
/// flow of the dressing operator.
pub fn check_cc_flow(spec: &CheckSpec) -> Vec<VerificationReport> {
    let mut pre = Tally::new();
    let list = setups(spec, &[Family::A, Family::B], vec![Setup::new(Family::B)], &mut pre);
    let k_max = spec.k_max.unwrap_or(2);
    let caps = caps_of(spec, Caps { nvars: k_max, degree: 4 + k_max as u32, ncut: 6 });
    list.iter()
        .map(|setup| {
            let mut tally = Tally::new();
            tally.note("asserted on the t = 0 slice; higher t-degrees need s-derivatives of sampled data and are not asserted");
            for_points(spec, setup, &mut tally, |g| g.for_setup(setup, 2), |env, t| {
                cc_flow_at(setup, env, &caps, k_max, t)
            });
            tally.finish("ccflow", &setup.to_string(), caps.clone())
        })
        .collect()
}

fn cc_flow_at(setup: &Setup, env: &ParamEnv, caps: &Caps, k_max: usize, t: &mut Tally) -> Result<()> {
    let ctx = ExpCtx::new(env);
    let ncut = caps.ncut;
    let cap = -ri(ncut as i64);
    let cvec = cvector(setup.family, env, ncut)?;
    let w = build_w0(&cvec, env, ncut, 1)?;
    let winv = w.inv(&ctx)?;
    let ws = w.ds(&ctx)?;
    let tail = op_log_dressed(&w, &ctx)?.tail;
    let (c, ct) = cc_pair(setup, env, &cap, &ctx)?;
    t.eq_op_exp("log-tail times C", &tail.mul(&c, &ctx)?, &ct, &ctx);
    let cinv = c.inv(&ctx)?;
    let l = conjugate_shift(&w, &Rat::one(), &ctx)?;
    let t1 = tail.coeff(&-Rat::one()).cloned().ok_or_else(|| Error::NotReducible("log-tail has no Lambda^-1 term".into()))?;

    // sampled tau data for the first-order cross-check
    let gcut = 4usize;
    let gcaps = Caps { nvars: caps.nvars, degree: gcut as u32 + k_max as u32, ncut: gcut };
    let pts = grid_points(-1, 1, 1);
    let table = miwa_table(&cvector(setup.family, env, gcaps.degree as usize)?, gcaps.nvars, gcaps.degree, gcut)?;
    let wave = wave_coefficients(&table, env, &pts, gcaps.degree, gcut)?;

    for k in 1..=k_max.min(caps.nvars) {
        let lk = l.pow(k as u32, &ctx)?;
        let p = lk.plus()?;
        let pm = lk.minus();
        let dw = pm.mul(&w, &ctx)?.neg();
        // ∂_k W against the t_k-linear part of the tau-derived dressing
        let mut mono = vec![0u8; gcaps.nvars];
        mono[k - 1] = 1;
        for n in 1..=gcut {
            let coeff = dw.coeff(&ri(-(n as i64))).cloned().unwrap_or_default();
            for s in &pts {
                let lhs = wave.w(n, s).expect("sampled").coeff(&mono);
                let rhs = coeff.eval(s, &ctx)?.as_rat().unwrap_or_else(Rat::zero);
                t.eq_rat(&format!("dw_{n}/dt_{k} at s={s}"), &lhs, &rhs);
            }
        }
        let dt = dw
            .ds(&ctx)?
            .mul(&winv, &ctx)?
            .neg()
            .add(&ws.mul(&winv, &ctx)?.mul(&dw, &ctx)?.mul(&winv, &ctx)?, &ctx)?;
        let x = dt.mul(&c, &ctx)?;
        let x1 = x.coeff(&-Rat::one()).cloned().unwrap_or_default();
        let x2 = x.coeff(&ri(-2)).cloned().unwrap_or_default();
        let udot = x2.div_monomial(&t1)?.shift(&Rat::one(), &ctx)?;
        let dct = DiffOp::monomial(-Rat::one(), x1, 1, cap.clone())?;
        let dc = DiffOp::monomial(-Rat::one(), udot.neg(), 1, cap.clone())?;
        let implied = dct.sub(&tail.mul(&dc, &ctx)?, &ctx)?;
        t.eq_op_exp(&format!("k={k}: flow of the log-tail is rational of width 1"), &x, &implied, &ctx);

        let q = cinv.mul(&lk, &ctx)?.mul(&c, &ctx)?;
        let (qp, qm) = (q.plus()?, q.minus());
        let rhs_ct = p.ds(&ctx)?.mul(&c, &ctx)?.neg().add(&p.mul(&ct, &ctx)?, &ctx)?.sub(&ct.mul(&qp, &ctx)?, &ctx)?;
        let rhs_c = p.mul(&c, &ctx)?.sub(&c.mul(&qp, &ctx)?, &ctx)?;
        t.eq_op_exp(&format!("k={k}: dCt/dt"), &dct, &rhs_ct, &ctx);
        t.eq_op_exp(&format!("k={k}: dC/dt"), &dc, &rhs_c, &ctx);
        let dual_ct = pm.ds(&ctx)?.mul(&c, &ctx)?.add(&ct.mul(&qm, &ctx)?, &ctx)?.sub(&pm.mul(&ct, &ctx)?, &ctx)?;
        let dual_c = c.mul(&qm, &ctx)?.sub(&pm.mul(&c, &ctx)?, &ctx)?;
        t.eq_op_exp(&format!("k={k}: dCt/dt dual form"), &dct, &dual_ct, &ctx);
        t.eq_op_exp(&format!("k={k}: dC/dt dual form"), &dc, &dual_c, &ctx);
        let comm = commutator(&ct.mul(&cinv, &ctx)?, &lk, &ctx)?.neg();
        t.eq_op_exp(&format!("k={k}: dL^k/ds = -[Ct C^-1, L^k]"), &lk.ds(&ctx)?, &comm, &ctx);
    }
    Ok(())
}
