//! `kplab`: command-line front end for the verification laboratory.

mod config;

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kplab_core::lab::{run_checks, summarize, Caps, CheckId, CheckSpec, Verdict, VerificationReport};
use kplab_core::partitions::enumerate;
use kplab_core::scalar::Rat;
use kplab_core::schur::{schur_at, schur_special_closed, Family};
use kplab_core::tau::{miwa_table, tau, wave_coefficients};
use kplab_core::Error;

use config::{ConfigFile, Params};

#[derive(Parser, Debug)]
#[command(name = "kplab", version, about = "Exact checks for hypergeometric tau functions of the lattice KP hierarchy")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Table of Schur function values S_lambda(c).
    Schur {
        #[command(flatten)]
        params: ParamArgs,
        /// Largest partition size.
        #[arg(long)]
        max_size: Option<u32>,
        /// c-vector family (alias of --case).
        #[arg(long)]
        family: Option<String>,
    },
    /// Tau function and wave coefficients at the given s values.
    Tau {
        #[command(flatten)]
        params: ParamArgs,
        /// Comma-separated s values.
        #[arg(long, default_value = "0")]
        s: String,
    },
    /// Run verification procedures.
    Verify {
        check: CheckArg,
        #[command(flatten)]
        params: ParamArgs,
    },
    /// Merge JSON reports into a summary.
    Report {
        files: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CheckArg {
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
    All,
}

impl CheckArg {
    fn ids(self) -> Vec<CheckId> {
        match self {
            CheckArg::All => CheckId::ALL.to_vec(),
            other => vec![format!("{other:?}").to_lowercase().parse().expect("names match")],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Text,
    Csv,
}

/// Parameter and run flags shared by the subcommands. Numbers are exact
/// rationals such as `1/16`.
#[derive(Args, Debug, Default, Clone)]
pub struct ParamArgs {
    /// Case tag: a, b, c, d, gbin, grr, gbi (finite), general, zero.
    #[arg(long)]
    pub case: Option<String>,
    /// q of the topological-vertex specialisation.
    #[arg(long)]
    pub q: Option<String>,
    /// Framing number f (integer).
    #[arg(long)]
    pub f: Option<String>,
    /// Rational framing tau > -1.
    #[arg(long)]
    pub tau: Option<String>,
    #[arg(long)]
    pub a: Option<String>,
    /// e^beta.
    #[arg(long)]
    pub x: Option<String>,
    /// Lattice base e^{beta/M}.
    #[arg(long)]
    pub g: Option<String>,
    /// Lattice denominator M.
    #[arg(long)]
    pub m: Option<u32>,
    /// Independent constant Q.
    #[arg(long = "Q")]
    pub big_q: Option<String>,
    /// Fixed aQ of the scaling check.
    #[arg(long)]
    pub kappa: Option<String>,
    /// Comma-separated b_n.
    #[arg(long)]
    pub b: Option<String>,
    /// Comma-separated a_n.
    #[arg(long)]
    pub an: Option<String>,
    /// Comma-separated explicit constants c_1, c_2, ...
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random parameter points.
    #[arg(long)]
    pub points: Option<usize>,
    /// Tau truncation degree D.
    #[arg(long)]
    pub degree: Option<u32>,
    /// Operator truncation N_cut.
    #[arg(long)]
    pub ncut: Option<usize>,
    /// Number of times K.
    #[arg(long)]
    pub nvars: Option<usize>,
    /// Largest flow index k.
    #[arg(long)]
    pub k_max: Option<usize>,
    /// Treat inconclusive verdicts as failures.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// TOML file with the same keys; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

fn usage_error(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(2)
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), ExitCode> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| {
            eprintln!("error: cannot write {}: {e}", p.display());
            ExitCode::from(1)
        }),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes()).and_then(|_| so.flush()).map_err(|_| ExitCode::from(1))
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("KPLAB_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn main() -> ExitCode {
    configure_threads();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match cli.command {
        Command::Schur { params, max_size, family } => run_schur(params, max_size, family),
        Command::Tau { params, s } => run_tau(params, &s),
        Command::Verify { check, params } => run_verify(check, params),
        Command::Report { files, format, out, strict } => run_report(&files, format, out.as_ref(), strict),
    }
}

fn load(params: ParamArgs) -> Result<Params, ExitCode> {
    let file = match &params.config {
        Some(p) => Some(ConfigFile::load(p).map_err(usage_error)?),
        None => None,
    };
    Params::resolve(params, file).map_err(usage_error)
}

fn csv_partition(p: &kplab_core::partitions::Partition) -> String {
    let parts: Vec<String> = p.parts().iter().map(u32::to_string).collect();
    format!("({})", parts.join(" "))
}

fn sorted_terms(p: &kplab_core::TPoly) -> Vec<(&Vec<u8>, &Rat)> {
    let mut terms: Vec<_> = p.terms().collect();
    terms.sort_by_key(|(m, _)| (kplab_core::scalar::tpoly_weight(m), std::cmp::Reverse((*m).clone())));
    terms
}

fn monomial_name(m: &[u8]) -> String {
    let parts: Vec<String> = m
        .iter()
        .enumerate()
        .filter(|(_, e)| **e > 0)
        .map(|(i, e)| if *e == 1 { format!("t{}", i + 1) } else { format!("t{}^{e}", i + 1) })
        .collect();
    if parts.is_empty() {
        "1".into()
    } else {
        parts.join("*")
    }
}

/// Rows of a table, rendered as CSV or as a JSON array of objects.
fn table(header: &[&str], rows: &[Vec<String>], format: Format) -> String {
    match format {
        Format::Json => {
            let objs: Vec<serde_json::Map<String, serde_json::Value>> = rows
                .iter()
                .map(|r| {
                    header
                        .iter()
                        .zip(r)
                        .map(|(h, v)| (h.to_string(), serde_json::Value::String(v.clone())))
                        .collect()
                })
                .collect();
            serde_json::to_string_pretty(&objs).expect("table serializes") + "\n"
        }
        Format::Csv | Format::Text => {
            let mut out = header.join(",") + "\n";
            for r in rows {
                out.push_str(&r.join(","));
                out.push('\n');
            }
            out
        }
    }
}

fn finish_table(p: &Params, result: Result<String, Error>) -> ExitCode {
    match result {
        Ok(text) => match emit(p.out.as_ref(), &text) {
            Ok(()) => ExitCode::SUCCESS,
            Err(c) => c,
        },
        Err(e) => usage_error(e),
    }
}

fn run_schur(mut args: ParamArgs, max_size: Option<u32>, family: Option<String>) -> ExitCode {
    if args.case.is_none() {
        args.case = family;
    }
    let p = match load(args) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let n = max_size.or(p.max_size).unwrap_or(4);
    let result = (|| -> Result<String, Error> {
        let env = p.env()?;
        let c = p.cvector(&env, n as usize)?;
        let mut rows = Vec::new();
        for lambda in enumerate(n) {
            let v = schur_at(&lambda, &c)?;
            let closed = match p.setup.family {
                Family::A | Family::C => schur_special_closed(&lambda, p.setup.family, &env)?.to_string(),
                _ => String::new(),
            };
            rows.push(vec![csv_partition(&lambda), lambda.size().to_string(), v.to_string(), closed]);
        }
        Ok(table(&["partition", "size", "value", "closed_form"], &rows, p.format.unwrap_or(Format::Csv)))
    })();
    finish_table(&p, result)
}

fn run_tau(args: ParamArgs, s_list: &str) -> ExitCode {
    let p = match load(args) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let result = (|| -> Result<String, Error> {
        let s_values: Vec<Rat> = config::parse_list(s_list)?;
        let env = p.env()?;
        let caps = p.caps.clone().unwrap_or(Caps { nvars: 2, degree: 4, ncut: 4 });
        let c = p.cvector(&env, caps.degree as usize)?;
        let mut rows = Vec::new();
        for s in &s_values {
            let t = tau(s, &c, caps.degree, &env, caps.nvars)?;
            let h = t.h_empty.as_ref().map(Rat::to_string).unwrap_or_default();
            rows.push(vec!["h_empty".into(), s.to_string(), String::new(), String::new(), h]);
            for (m, r) in sorted_terms(&t.normalized) {
                rows.push(vec!["tau".into(), s.to_string(), String::new(), monomial_name(m), r.to_string()]);
            }
        }
        let table_data = miwa_table(&c, caps.nvars, caps.degree, caps.ncut)?;
        let wave = wave_coefficients(&table_data, &env, &s_values, caps.degree, caps.ncut)?;
        for s in &s_values {
            for n in 0..=caps.ncut {
                if let Some(w) = wave.w(n, s) {
                    for (m, r) in sorted_terms(w) {
                        rows.push(vec!["w".into(), s.to_string(), n.to_string(), monomial_name(m), r.to_string()]);
                    }
                }
            }
        }
        Ok(table(&["kind", "s", "n", "monomial", "coefficient"], &rows, p.format.unwrap_or(Format::Csv)))
    })();
    finish_table(&p, result)
}

fn verdict_code(reports: &[VerificationReport], strict: bool) -> ExitCode {
    if reports.iter().any(|r| r.verdict == Verdict::Fail) {
        return ExitCode::from(1);
    }
    let inconclusive: Vec<&VerificationReport> = reports.iter().filter(|r| r.verdict == Verdict::Inconclusive).collect();
    if !inconclusive.is_empty() {
        for r in &inconclusive {
            eprintln!("warning: inconclusive: {}", r.line());
        }
        if strict {
            return ExitCode::from(1);
        }
    }
    ExitCode::SUCCESS
}

fn render(reports: &[VerificationReport], format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(reports).expect("reports serialize") + "\n",
        Format::Text | Format::Csv => reports.iter().map(|r| r.line() + "\n").collect(),
    }
}

fn run_verify(check: CheckArg, args: ParamArgs) -> ExitCode {
    let p = match load(args) {
        Ok(p) => p,
        Err(c) => return c,
    };
    let env = match p.user_env() {
        Ok(e) => e,
        Err(e) => return usage_error(e),
    };
    let spec = CheckSpec {
        setup: p.explicit_case.then(|| p.setup.clone()),
        user_env: env,
        c_values: p.c_values.clone(),
        caps: p.caps.clone(),
        seed: p.seed,
        random_points: p.points,
        k_max: p.k_max,
        kappa: p.kappa.clone(),
    };
    let reports = run_checks(&check.ids(), &spec);
    let text = render(&reports, p.format.unwrap_or(Format::Json));
    if let Err(c) = emit(p.out.as_ref(), &text) {
        return c;
    }
    verdict_code(&reports, p.strict)
}

fn run_report(files: &[PathBuf], format: Format, out: Option<&PathBuf>, strict: bool) -> ExitCode {
    let mut reports: Vec<VerificationReport> = Vec::new();
    for f in files {
        let text = match fs::read_to_string(f) {
            Ok(t) => t,
            Err(e) => return usage_error(format!("cannot read {}: {e}", f.display())),
        };
        let parsed: Result<Vec<VerificationReport>, _> = serde_json::from_str(&text)
            .or_else(|_| serde_json::from_str::<VerificationReport>(&text).map(|r| vec![r]));
        match parsed {
            Ok(mut r) => reports.append(&mut r),
            Err(e) => return usage_error(format!("{} is not a report file: {e}", f.display())),
        }
    }
    reports.sort_by(|a, b| (&a.id, &a.case).cmp(&(&b.id, &b.case)));
    let summary = summarize(&reports);
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n",
        Format::Text | Format::Csv => summary.iter().map(|(k, v)| format!("{k}: {v}\n")).collect(),
    };
    if let Err(c) = emit(out, &text) {
        return c;
    }
    verdict_code(&reports, strict)
}
