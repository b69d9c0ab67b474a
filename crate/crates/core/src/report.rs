//! Bound reports and their CSV/JSON forms.

use std::io;

use serde::{Deserialize, Serialize};

/// Deviations are judged at this many standard errors.
pub const SIGMA: f64 = 3.0;
/// Absolute slack for exact (zero-stderr) comparisons.
pub const EXACT_SLACK: f64 = 1e-12;

/// How the empirical value is supposed to relate to the theoretical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    AtMost,
    AtLeast,
    Equals,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub theoretical: f64,
    pub empirical: f64,
    pub stderr: f64,
    pub n: u64,
    pub verdict: Verdict,
    pub relation: Relation,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl BoundReport {
    /// Judges `empirical` against `theoretical` at [`SIGMA`] standard errors.
    /// Reports with no samples are inconclusive.
    pub fn judge(
        name: impl Into<String>,
        relation: Relation,
        theoretical: f64,
        empirical: f64,
        stderr: f64,
        n: u64,
    ) -> Self {
        let slack = SIGMA * if stderr.is_finite() { stderr } else { 0.0 } + EXACT_SLACK;
        let verdict = if n == 0 || empirical.is_nan() || theoretical.is_nan() {
            Verdict::Inconclusive
        } else {
            let excess = match relation {
                Relation::AtMost => empirical - theoretical,
                Relation::AtLeast => theoretical - empirical,
                Relation::Equals => (empirical - theoretical).abs(),
            };
            if excess > slack {
                Verdict::Violated
            } else {
                Verdict::Holds
            }
        };
        Self {
            name: name.into(),
            theoretical,
            empirical,
            stderr,
            n,
            verdict,
            relation,
            note: String::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        let note = note.into();
        if self.note.is_empty() {
            self.note = note;
        } else {
            self.note = format!("{}; {}", self.note, note);
        }
        self
    }

    /// Keep the numbers but withhold judgement, e.g. when the preconditions
    /// of the bound are not met.
    pub fn unasserted(mut self, why: impl Into<String>) -> Self {
        self.verdict = Verdict::Inconclusive;
        self.with_note(why)
    }

    pub fn force_verdict(mut self, verdict: Verdict, why: impl Into<String>) -> Self {
        self.verdict = verdict;
        self.with_note(why)
    }
}

/// Header of the report CSV, in column order.
pub const CSV_COLUMNS: [&str; 8] = [
    "name",
    "theoretical",
    "empirical",
    "stderr",
    "n",
    "verdict",
    "relation",
    "note",
];

fn verdict_str(v: Verdict) -> &'static str {
    match v {
        Verdict::Holds => "holds",
        Verdict::Violated => "violated",
        Verdict::Inconclusive => "inconclusive",
    }
}

fn relation_str(r: Relation) -> &'static str {
    match r {
        Relation::AtMost => "at_most",
        Relation::AtLeast => "at_least",
        Relation::Equals => "equals",
    }
}

/// RFC 4180 CSV with the columns in [`CSV_COLUMNS`].
pub fn write_csv<W: io::Write>(reports: &[BoundReport], out: W) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(out);
    w.write_record(CSV_COLUMNS)?;
    for r in reports {
        w.write_record([
            r.name.clone(),
            r.theoretical.to_string(),
            r.empirical.to_string(),
            r.stderr.to_string(),
            r.n.to_string(),
            verdict_str(r.verdict).to_string(),
            relation_str(r.relation).to_string(),
            r.note.clone(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string(reports: &[BoundReport]) -> String {
    let mut buf = Vec::new();
    write_csv(reports, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

pub fn any_violated(reports: &[BoundReport]) -> bool {
    reports.iter().any(|r| r.verdict == Verdict::Violated)
}
