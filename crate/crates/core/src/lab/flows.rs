use num_traits::One;

use super::initial::{caps_of, explicit_constants, grid_points, setups};
use super::{for_points, known_floor, setup_cvector, Caps, CheckSpec, Setup, Tally, VerificationReport};
use crate::error::Result;
use crate::ops::{commutator, conjugate_shift, Coeff, DiffOp, GridCoeff, GridCtx};
use crate::scalar::{ri, ParamEnv, Rat, TPoly};
use crate::schur::{CVector, Family};
use crate::tau::{dressing_from_tau, miwa_table, wave_coefficients, WaveData};

fn wave_data(c: &CVector, env: &ParamEnv, caps: &Caps, points: &[Rat]) -> Result<WaveData> {
    let table = miwa_table(c, caps.nvars, caps.degree, caps.ncut)?;
    wave_coefficients(&table, env, points, caps.degree, caps.ncut)
}

/// Dressing operator read off the tau function on `points`.
pub fn tau_dressing(c: &CVector, env: &ParamEnv, caps: &Caps, points: &[Rat], denom: u32) -> Result<DiffOp<GridCoeff>> {
    dressing_from_tau(&wave_data(c, env, caps, points)?, denom)
}

fn d_t(op: &DiffOp<GridCoeff>, k: usize) -> Result<DiffOp<GridCoeff>> {
    op.map_coeffs(|c| Ok(c.map(|p| p.diff(k))))
}

/// Lax residual `∂_k L - [(L^k)_+, L]` for `L = W Λ W^{-1}`.
pub fn grid_lax(w: &DiffOp<GridCoeff>, k: usize, ctx: &GridCtx) -> Result<DiffOp<GridCoeff>> {
    let l = conjugate_shift(w, &Rat::one(), ctx)?;
    let b = l.pow(k as u32, ctx)?.plus()?;
    d_t(&l, k)?.sub(&commutator(&b, &l, ctx)?, ctx)
}

/// Asserts every known coefficient of a grid residual; returns how many
/// were assertable.
pub(super) fn assert_grid_zero(t: &mut Tally, label: &str, r: &DiffOp<GridCoeff>, through: Option<i64>) -> usize {
    let floor = known_floor(r);
    r.terms()
        .filter(|(a, _)| **a >= floor)
        .filter(|(a, c)| t.zero_grid(&format!("{label} at Lambda^({a})"), c, through))
        .count()
}

/// Tracked t-degree of every known sampled coefficient, by shift.
pub(super) fn tracked_degrees(r: &DiffOp<GridCoeff>) -> Vec<(Rat, i64)> {
    let floor = known_floor(r);
    r.terms()
        .filter(|(a, c)| **a >= floor && matches!(c, GridCoeff::Sampled(m) if !m.is_empty()))
        .map(|(a, c)| (a.clone(), c.valid()))
        .collect()
}

pub(super) fn window(ncut: usize, reach: i64, denom: u32) -> Vec<Rat> {
    grid_points(-3 * ncut as i64, 3 * reach + 3, denom)
}

fn flow_setups(spec: &CheckSpec, tally: &mut Tally) -> Vec<Setup> {
    let all = [Family::A, Family::B, Family::C, Family::D, Family::Gbin, Family::Grr, Family::Finite, Family::General];
    setups(spec, &all, vec![Setup::new(Family::A), Setup::framed(Family::C, 1)], tally)
}

/// Lax equations on tau-derived data for `k <= k_max`.
pub fn check_lax(spec: &CheckSpec) -> Vec<VerificationReport> {
    let mut pre = Tally::new();
    let list = flow_setups(spec, &mut pre);
    let k_max = spec.k_max.unwrap_or(3);
    let caps = caps_of(spec, Caps { nvars: k_max, degree: 6, ncut: 6 });
    list.iter()
        .map(|setup| {
            let mut tally = Tally::new();
            let consts = explicit_constants(spec, setup, caps.degree as usize);
            for_points(spec, setup, &mut tally, |g| g.for_setup(setup, 2), |env, t| {
                let ctx = GridCtx { nvars: caps.nvars, cap: caps.degree };
                let c = setup_cvector(setup, env, caps.degree as usize, consts.as_deref())?;
                let pts = window(caps.ncut, k_max as i64, setup.denom());
                let w = tau_dressing(&c, env, &caps, &pts, setup.denom())?;
                for k in 1..=k_max.min(caps.nvars) {
                    let r = grid_lax(&w, k, &ctx)?;
                    let n = assert_grid_zero(t, &format!("Lax k={k}"), &r, None);
                    let depth = tracked_degrees(&r);
                    let shown: Vec<String> = depth.iter().map(|(a, d)| format!("{a}:{d}")).collect();
                    t.note(format!("Lax k={k}: {n} coefficients, tracked degree by shift {}", shown.join(" ")));
                    let top = depth.iter().map(|(_, d)| *d).max().unwrap_or(-1);
                    t.check(top >= 1, &format!("Lax k={k}: at least two assertable t-degrees"));
                }
                Ok(())
            });
            tally.finish("lax", &setup.to_string(), caps.clone())
        })
        .collect()
}

/// Band structure of the Lax operator away from `t = 0` for family (c).
pub fn check_persistence(spec: &CheckSpec) -> Vec<VerificationReport> {
    let mut tally = Tally::new();
    let list = setups(spec, &[Family::C], vec![Setup::framed(Family::C, 1)], &mut tally);
    let caps = caps_of(spec, Caps { nvars: 3, degree: 10, ncut: 6 });
    let depth = (caps.degree as i64 - caps.ncut as i64).max(0);
    list.iter()
        .map(|setup| {
            let mut tally = Tally::new();
            tally.note(format!("band checked through t-degree {depth}"));
            for_points(spec, setup, &mut tally, |g| g.for_setup(setup, 2), |env, t| {
                let ctx = GridCtx { nvars: caps.nvars, cap: caps.degree };
                let r = setup.framing.clone().expect("family c is framed");
                let n_sh = ri(i64::try_from(r.numer()).unwrap_or(1));
                let d_sh = ri(i64::try_from(r.denom()).unwrap_or(1));
                let denom = setup.denom();
                let c = setup_cvector(setup, env, caps.degree as usize, None)?;
                let reach = 2 * i64::try_from(r.denom()).unwrap_or(1);
                let pts = window(caps.ncut, reach, denom);
                let w = tau_dressing(&c, env, &caps, &pts, denom)?;

                // L^{d j} lives on shifts j(d - n) ..= j d
                let ld = conjugate_shift(&w, &d_sh, &ctx)?;
                let mut power = ld.clone();
                for j in 1..=2i64 {
                    if j > 1 {
                        power = power.mul(&ld, &ctx)?;
                    }
                    let lo = ri(j) * (&d_sh - &n_sh);
                    let hi = ri(j) * &d_sh;
                    let floor = known_floor(&power);
                    let mut n = 0;
                    for (a, coeff) in power.terms() {
                        if *a >= floor && (a < &lo || a > &hi) && t.zero_grid(&format!("L^({}) at Lambda^({a})", ri(j) * &d_sh), coeff, Some(depth)) {
                            n += 1;
                        }
                    }
                    t.note(format!("L^({}): {n} off-band coefficients asserted", ri(j) * &d_sh));
                }

                // L^{1/r} = (1 + v Λ^{-1}) Λ^{1/r}
                let alpha = r.recip();
                let la = conjugate_shift(&w, &alpha, &ctx)?;
                let floor = known_floor(&la);
                let one = GridCoeff::from_rat(&Rat::one(), &ctx);
                for (a, coeff) in la.terms() {
                    if *a < floor {
                        continue;
                    }
                    if *a == alpha {
                        let res = coeff.sub(&one, &ctx)?;
                        t.zero_grid(&format!("leading coefficient of L^({alpha})"), &res, Some(depth));
                    } else if *a != &alpha - Rat::one() {
                        t.zero_grid(&format!("L^({alpha}) at Lambda^({a})"), coeff, Some(depth));
                    }
                }
                Ok(())
            });
            tally.finish("persist", &setup.to_string(), caps.clone())
        })
        .collect()
}

fn wave_coeff(wave: &WaveData, i: i64, ctx: &GridCtx) -> GridCoeff {
    if i < 0 || i as usize > wave.ncut {
        return GridCoeff::Uniform(TPoly::zero(ctx.nvars, ctx.cap));
    }
    GridCoeff::Sampled(
        wave.samples
            .iter()
            .map(|(s, w)| (s.clone(), w[i as usize].clone()))
            .collect(),
    )
}

fn op_coeff(op: &DiffOp<GridCoeff>, a: &Rat, ctx: &GridCtx) -> GridCoeff {
    op.coeff(a).cloned().unwrap_or_else(|| GridCoeff::zero(ctx))
}

/// Spectral problem and time evolution of the wave function
/// `Ψ = W z^s exp(Σ t_k z^k)`, coefficient by coefficient.
pub fn check_wave(spec: &CheckSpec) -> Vec<VerificationReport> {
    let mut pre = Tally::new();
    let list = flow_setups(spec, &mut pre);
    let k_max = spec.k_max.unwrap_or(2);
    let caps = caps_of(spec, Caps { nvars: k_max, degree: 6, ncut: 6 });
    list.iter()
        .map(|setup| {
            let mut tally = Tally::new();
            let consts = explicit_constants(spec, setup, caps.degree as usize);
            for_points(spec, setup, &mut tally, |g| g.for_setup(setup, 2), |env, t| {
                let ctx = GridCtx { nvars: caps.nvars, cap: caps.degree };
                let c = setup_cvector(setup, env, caps.degree as usize, consts.as_deref())?;
                let denom = setup.denom();
                let pts = window(caps.ncut, k_max as i64, denom);
                let wave = wave_data(&c, env, &caps, &pts)?;
                let w = dressing_from_tau(&wave, denom)?;
                let l = conjugate_shift(&w, &Rat::one(), &ctx)?;
                let ncut = caps.ncut as i64;

                // L Ψ = z Ψ
                for m in 0..=ncut.min(5) {
                    let mut acc = wave_coeff(&wave, m, &ctx).neg();
                    for n in 0..=m {
                        let sh = ri(1 - n);
                        let term = op_coeff(&l, &sh, &ctx).mul(&wave_coeff(&wave, m - n, &ctx).shift(&sh, &ctx)?, &ctx)?;
                        acc = acc.add(&term, &ctx)?;
                    }
                    t.zero_grid(&format!("L Psi = z Psi at z^(s+1-{m})"), &acc, None);
                }

                // ∂_k ŵ + z^k ŵ = Σ_j b_j(s) ŵ(s + j) z^j
                for k in 1..=k_max.min(caps.nvars) as i64 {
                    let b = l.pow(k as u32, &ctx)?.plus()?;
                    for m in -k..=ncut - k {
                        let mut acc = wave_coeff(&wave, m, &ctx)
                            .map(|p| p.diff(k as usize))
                            .add(&wave_coeff(&wave, m + k, &ctx), &ctx)?;
                        for j in 0..=k {
                            let sh = ri(j);
                            let term = op_coeff(&b, &sh, &ctx).mul(&wave_coeff(&wave, j + m, &ctx).shift(&sh, &ctx)?, &ctx)?;
                            acc = acc.sub(&term, &ctx)?;
                        }
                        t.zero_grid(&format!("wave flow k={k} at z^(s-{m})"), &acc, None);
                    }
                }
                Ok(())
            });
            tally.finish("wave", &setup.to_string(), caps.clone())
        })
        .collect()
}
