//! Run configuration: command-line flags merged over an optional TOML file.

use std::fs;
use std::path::{Path, PathBuf};

use kplab_core::lab::{Caps, Setup};
use kplab_core::scalar::{parse_rat, rat_root, ri, ParamEnv, Rat};
use kplab_core::schur::{cvector, CVector, Family};
use kplab_core::{Error, Result};
use serde::Deserialize;

use crate::{Format, ParamArgs};

/// Keys accepted in a config file. Rationals are strings such as `"1/16"`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ConfigFile {
    pub case: Option<String>,
    pub q: Option<String>,
    pub f: Option<String>,
    pub tau: Option<String>,
    pub a: Option<String>,
    pub x: Option<String>,
    pub g: Option<String>,
    pub m: Option<u32>,
    #[serde(rename = "Q")]
    pub big_q: Option<String>,
    pub kappa: Option<String>,
    pub b: Option<String>,
    pub an: Option<String>,
    pub c: Option<String>,
    pub seed: Option<u64>,
    pub points: Option<usize>,
    pub degree: Option<u32>,
    pub ncut: Option<usize>,
    pub nvars: Option<usize>,
    pub k_max: Option<usize>,
    pub max_size: Option<u32>,
    pub strict: Option<bool>,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// Comma-separated exact rationals.
pub fn parse_list(s: &str) -> Result<Vec<Rat>> {
    s.split(',').filter(|t| !t.trim().is_empty()).map(parse_rat).collect()
}

fn opt_rat(s: &Option<String>) -> Result<Option<Rat>> {
    s.as_deref().map(parse_rat).transpose()
}

/// Fully parsed run parameters.
#[derive(Debug, Clone)]
pub struct Params {
    pub setup: Setup,
    /// Whether the case was chosen explicitly.
    pub explicit_case: bool,
    q: Option<Rat>,
    x: Option<Rat>,
    g: Option<Rat>,
    m: u32,
    big_q: Option<Rat>,
    a: Option<Rat>,
    b_list: Vec<Rat>,
    a_list: Vec<Rat>,
    pub kappa: Option<Rat>,
    pub c_values: Option<Vec<Rat>>,
    pub caps: Option<Caps>,
    pub seed: u64,
    pub points: usize,
    pub k_max: Option<usize>,
    pub max_size: Option<u32>,
    pub strict: bool,
    pub format: Option<Format>,
    pub out: Option<PathBuf>,
}

impl Params {
    pub fn resolve(args: ParamArgs, file: Option<ConfigFile>) -> Result<Self> {
        let file = file.unwrap_or_default();
        macro_rules! pick {
            ($field:ident) => {
                args.$field.clone().or(file.$field.clone())
            };
        }
        let case = pick!(case);
        let family: Family = case.as_deref().map(str::parse).transpose()?.unwrap_or(Family::A);
        let f = pick!(f);
        let tau = opt_rat(&pick!(tau))?;
        let framing = match (&tau, &f) {
            (Some(_), Some(_)) => return Err(Error::config("give either --f or --tau, not both")),
            (Some(t), None) => t + ri(1),
            (None, Some(f)) => {
                let f = parse_rat(f)?;
                if !f.is_integer() {
                    return Err(Error::config(format!("framing number f = {f} must be an integer; use --tau")));
                }
                f + ri(1)
            }
            (None, None) => ri(2),
        };
        if framing <= ri(0) {
            return Err(Error::config(format!("framing f+1 = {framing} must be positive")));
        }
        let setup = if matches!(family, Family::C | Family::D | Family::Gbin | Family::Grr) {
            Setup { family, framing: Some(framing) }
        } else {
            Setup::new(family)
        };

        let degree = pick!(degree);
        let ncut = pick!(ncut);
        let nvars = pick!(nvars);
        let caps = if degree.is_some() || ncut.is_some() || nvars.is_some() {
            let d = Caps::default();
            Some(Caps {
                nvars: nvars.unwrap_or(d.nvars),
                degree: degree.unwrap_or(d.degree),
                ncut: ncut.unwrap_or(d.ncut),
            })
        } else {
            None
        };
        let m = pick!(m).unwrap_or(2);
        if m == 0 {
            return Err(Error::config("M must be positive"));
        }
        Ok(Self {
            setup,
            explicit_case: case.is_some(),
            q: opt_rat(&pick!(q))?,
            x: opt_rat(&pick!(x))?,
            g: opt_rat(&pick!(g))?,
            m,
            big_q: opt_rat(&pick!(big_q))?,
            a: opt_rat(&pick!(a))?,
            b_list: pick!(b).as_deref().map(parse_list).transpose()?.unwrap_or_default(),
            a_list: pick!(an).as_deref().map(parse_list).transpose()?.unwrap_or_default(),
            kappa: opt_rat(&pick!(kappa))?,
            c_values: pick!(c).as_deref().map(parse_list).transpose()?,
            caps,
            seed: pick!(seed).unwrap_or(1),
            points: pick!(points).unwrap_or(3),
            k_max: pick!(k_max),
            max_size: file.max_size,
            strict: args.strict || file.strict.unwrap_or(false),
            format: args.format.or(file.format),
            out: pick!(out),
        })
    }

    fn framing(&self) -> Rat {
        self.setup.framing.clone().unwrap_or_else(|| ri(2))
    }

    /// The explicit parameter point, if any base parameter was given.
    pub fn user_env(&self) -> Result<Option<ParamEnv>> {
        let base = match (&self.q, &self.x, &self.g) {
            (Some(q), None, None) => {
                if self.big_q.is_some() {
                    return Err(Error::config("Q is tied to q by the specialisation; drop --Q"));
                }
                ParamEnv::hodge(q, &self.framing())?
            }
            (None, Some(x), None) => ParamEnv::from_e_beta(x, self.m)?,
            (None, None, Some(g)) => ParamEnv::new(g.clone(), self.m)?,
            (None, None, None) => {
                if self.big_q.is_some() || self.a.is_some() || !self.b_list.is_empty() || !self.a_list.is_empty() {
                    return Err(Error::config("parameters given without a base: pass one of --q, --x, --g"));
                }
                return Ok(None);
            }
            _ => return Err(Error::config("pass only one of --q, --x, --g")),
        };
        let mut env = base;
        if self.q.is_none() {
            if let Some(fr) = &self.setup.framing {
                env = env.with_framing(fr.clone());
            }
            if let Some(bq) = &self.big_q {
                env = match rat_root(bq, 2) {
                    Some(root) => env.with_q_root(root),
                    None => env.with_q(bq.clone()),
                };
            }
        }
        if let Some(a) = &self.a {
            env = env.with_a(a.clone());
        }
        if !self.b_list.is_empty() {
            env = env.with_b_list(self.b_list.clone());
        }
        if !self.a_list.is_empty() {
            env = env.with_a_list(self.a_list.clone());
        }
        Ok(Some(env))
    }

    /// The parameter point for tables, with `q = 1/16` when none is given.
    pub fn env(&self) -> Result<ParamEnv> {
        match self.user_env()? {
            Some(env) => Ok(env),
            None => ParamEnv::hodge(&Rat::new(1.into(), 16.into()), &self.framing()),
        }
    }

    pub fn cvector(&self, env: &ParamEnv, kc: usize) -> Result<CVector> {
        match self.setup.family {
            Family::Finite | Family::General => {
                let vals = self
                    .c_values
                    .clone()
                    .ok_or_else(|| Error::config(format!("case {} needs --c", self.setup.family)))?;
                let len = kc.max(vals.len());
                Ok(CVector::explicit(self.setup.family, vals).with_len(len))
            }
            f => cvector(f, env, kc),
        }
    }
}
