use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::ops::{Coeff, DiffOp, ExpCoeff, GridCoeff};
use crate::scalar::Rat;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Truncation parameters a check ran with.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Number of times `t_1..t_K`.
    pub nvars: usize,
    /// Weighted-degree cap of the tau series.
    pub degree: u32,
    /// Operator truncation: nothing below `Λ^{-ncut}` is kept.
    pub ncut: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            nvars: 6,
            degree: 6,
            ncut: 6,
        }
    }
}

/// Outcome of one verification procedure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub id: String,
    pub case: String,
    pub verdict: Verdict,
    pub asserted_count: usize,
    /// Largest residual seen, exact; "0" on a pass.
    pub worst_residual: String,
    /// Parameter points tried, in order.
    pub params: Vec<BTreeMap<String, String>>,
    pub caps: Caps,
    pub notes: Vec<String>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    /// Single summary line.
    pub fn line(&self) -> String {
        format!(
            "{} [{}]: {} ({} asserted, worst residual {})",
            self.id, self.case, self.verdict, self.asserted_count, self.worst_residual
        )
    }
}

/// Accumulates assertions for a report.
#[derive(Debug, Default)]
pub struct Tally {
    asserted: usize,
    worst: Option<(Rat, String)>,
    failures: Vec<String>,
    notes: Vec<String>,
    params: Vec<BTreeMap<String, String>>,
    errors: usize,
}

impl Tally {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }

    pub fn point(&mut self, params: BTreeMap<String, String>) {
        self.params.push(params);
    }

    pub fn asserted(&self) -> usize {
        self.asserted
    }

    pub fn failed(&self) -> bool {
        !self.failures.is_empty() || self.errors > 0
    }

    fn record(&mut self, ok: bool, label: &str, size: Rat, shown: String) {
        self.asserted += 1;
        if !ok {
            if self.failures.len() < 8 {
                self.failures.push(format!("{label}: residual {shown}"));
            }
            if self.worst.as_ref().map_or(true, |(w, _)| &size > w) {
                self.worst = Some((size, shown));
            }
        }
    }

    /// A boolean assertion, counted once.
    pub fn check(&mut self, ok: bool, label: &str) {
        self.record(ok, label, Rat::zero(), "false".into());
    }

    /// Exact rational equality.
    pub fn eq_rat(&mut self, label: &str, lhs: &Rat, rhs: &Rat) {
        let d = lhs - rhs;
        self.record(d.is_zero(), label, d.abs(), d.to_string());
    }

    pub fn zero_exp(&mut self, label: &str, r: &ExpCoeff) {
        self.record(r.is_zero(), label, r.max_abs_coeff(), r.render());
    }

    /// A grid residual must vanish through its own tracked degree, capped at
    /// `through` when given. Empty windows and exhausted validity are not
    /// assertable and return false.
    pub fn zero_grid(&mut self, label: &str, r: &GridCoeff, through: Option<i64>) -> bool {
        if r.is_empty_window() {
            return false;
        }
        let deg = match through {
            Some(d) => d.min(r.valid()),
            None => r.valid(),
        };
        if deg < 0 {
            return false;
        }
        let trimmed = r.map(|p| p.truncated(deg));
        let ok = trimmed.vanishes_through(deg);
        self.record(ok, label, trimmed.max_abs(), format!("{} (through degree {deg})", trimmed.render()));
        true
    }

    /// Every coefficient of an exp-backend residual known in both inputs.
    pub fn zero_op_exp(&mut self, label: &str, r: &DiffOp<ExpCoeff>) {
        let mut n = 0;
        for (a, c) in r.terms() {
            self.zero_exp(&format!("{label} at Lambda^({a})"), c);
            n += 1;
        }
        if n == 0 {
            // an all-zero residual still counts as one assertion
            self.asserted += 1;
        }
    }

    /// Asserts equality of two exp-backend operators on every shift that is
    /// exactly known in both; returns the number of shifts compared.
    pub fn eq_op_exp(&mut self, label: &str, lhs: &DiffOp<ExpCoeff>, rhs: &DiffOp<ExpCoeff>, ctx: &crate::ops::ExpCtx) -> usize {
        let diff = match lhs.sub(rhs, ctx) {
            Ok(d) => d,
            Err(e) => {
                self.error(label, &e);
                return 0;
            }
        };
        let lo = known_floor(lhs).max(known_floor(rhs));
        let hi = lhs
            .max_shift()
            .cloned()
            .into_iter()
            .chain(rhs.max_shift().cloned())
            .max()
            .unwrap_or_else(Rat::zero);
        let step = Rat::new(1.into(), (lhs.denom() as i64).into());
        let mut a = lo;
        let mut count = 0;
        while a <= hi {
            let c = diff.coeff(&a).cloned().unwrap_or_default();
            self.zero_exp(&format!("{label} at Lambda^({a})"), &c);
            count += 1;
            a += &step;
        }
        count
    }

    /// Folds in assertions recorded separately.
    pub fn absorb(&mut self, other: Tally) {
        self.asserted += other.asserted;
        self.errors += other.errors;
        if let Some((size, shown)) = other.worst {
            if self.worst.as_ref().map_or(true, |(w, _)| &size > w) {
                self.worst = Some((size, shown));
            }
        }
        for f in other.failures {
            if self.failures.len() < 8 {
                self.failures.push(f);
            }
        }
        self.notes.extend(other.notes);
        self.params.extend(other.params);
    }

    pub fn error(&mut self, label: &str, e: &Error) {
        self.errors += 1;
        if self.failures.len() < 8 {
            self.failures.push(format!("{label}: {e}"));
        }
    }

    pub fn finish(self, id: &str, case: &str, caps: Caps) -> VerificationReport {
        let verdict = if self.failed() {
            Verdict::Fail
        } else if self.asserted == 0 {
            Verdict::Inconclusive
        } else {
            Verdict::Pass
        };
        let mut notes = self.notes;
        notes.extend(self.failures);
        VerificationReport {
            schema: SCHEMA_VERSION,
            id: id.to_string(),
            case: case.to_string(),
            verdict,
            asserted_count: self.asserted,
            worst_residual: match (&self.worst, self.errors) {
                (Some((_, s)), _) => s.clone(),
                (None, 0) => "0".into(),
                (None, _) => "error".into(),
            },
            params: self.params,
            caps,
            notes,
        }
    }
}

/// Lowest exactly known shift of an operator.
pub fn known_floor<C: Coeff>(op: &DiffOp<C>) -> Rat {
    match op.floor() {
        Some(f) if f > op.cap() => f.clone(),
        _ => op.cap().clone(),
    }
}

/// Merges reports into a single summary, ordered by id.
pub fn summarize(reports: &[VerificationReport]) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    for r in reports {
        out.insert(format!("{} [{}]", r.id, r.case), r.verdict.to_string());
    }
    out
}
