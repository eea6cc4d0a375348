//! Numerical checks of monotonicity, strictness and the supporting lemmas,
//! with JSON-lines and CSV reporting.

mod checks;
mod sweep;

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::locc::ChannelTag;
use crate::Result;

pub use checks::{
    check_logneg_nonconvexity, check_monogamy_product, check_monotone,
    check_negativity_decomposition, check_reduced_state_condition, check_strict,
    check_strict_concavity, StateSampler, LOGNEG_TRIALS, STRICT_FLOOR,
};
pub use sweep::{run_sweep, Base, SweepConfig, CHECK_IDS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Skipped,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Skipped => "skipped",
        })
    }
}

/// How `gap` is compared against `tolerance`. Stored in the report metadata
/// under `"rule"` so the verdict can be recomputed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rule {
    /// `gap >= -tolerance`
    AtLeast,
    /// `gap > tolerance`
    Exceeds,
    /// `|gap| <= tolerance`
    Within,
}

impl Rule {
    pub fn as_str(self) -> &'static str {
        match self {
            Rule::AtLeast => "gap>=-tol",
            Rule::Exceeds => "gap>tol",
            Rule::Within => "|gap|<=tol",
        }
    }

    pub fn parse(s: &str) -> Option<Rule> {
        match s {
            "gap>=-tol" => Some(Rule::AtLeast),
            "gap>tol" => Some(Rule::Exceeds),
            "|gap|<=tol" => Some(Rule::Within),
            _ => None,
        }
    }

    pub fn holds(self, gap: f64, tolerance: f64) -> bool {
        match self {
            Rule::AtLeast => gap >= -tolerance,
            Rule::Exceeds => gap > tolerance,
            Rule::Within => gap.abs() <= tolerance,
        }
    }
}

/// Values at or below this count as zero when deciding that an input carries
/// no entanglement to lose.
pub const UNINFORMATIVE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub measure_id: String,
    pub channel_class: Option<ChannelTag>,
    /// `E(rho)`, or the check's left-hand side.
    pub lhs: f64,
    /// `sum_k p_k E(sigma_k)`, or the check's right-hand side.
    pub rhs: f64,
    /// `lhs - rhs`.
    pub gap: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub seed: u64,
    pub metadata: BTreeMap<String, String>,
}

impl VerificationReport {
    /// A report whose verdict follows from `rule` and, when present, the
    /// `"subchecks"` entry of `metadata`.
    #[allow(clippy::too_many_arguments)]
    pub fn decide(
        check_id: &str,
        measure_id: String,
        channel_class: Option<ChannelTag>,
        lhs: f64,
        rhs: f64,
        tolerance: f64,
        rule: Rule,
        seed: u64,
        mut metadata: BTreeMap<String, String>,
    ) -> Self {
        metadata.insert("rule".into(), rule.as_str().into());
        let mut report = VerificationReport {
            check_id: check_id.into(),
            measure_id,
            channel_class,
            lhs,
            rhs,
            gap: lhs - rhs,
            tolerance,
            verdict: Verdict::Skipped,
            seed,
            metadata,
        };
        report.verdict = report.recompute_verdict();
        report
    }

    pub fn skipped(
        check_id: &str,
        measure_id: String,
        channel_class: Option<ChannelTag>,
        seed: u64,
        reason: impl Into<String>,
    ) -> Self {
        let mut metadata = BTreeMap::new();
        metadata.insert("reason".into(), reason.into());
        VerificationReport {
            check_id: check_id.into(),
            measure_id,
            channel_class,
            lhs: f64::NAN,
            rhs: f64::NAN,
            gap: f64::NAN,
            tolerance: 0.0,
            verdict: Verdict::Skipped,
            seed,
            metadata,
        }
    }

    /// The verdict implied by `(lhs, rhs, tolerance)`, the stored rule and
    /// the stored sub-check outcome. Reports with a `"reason"` stay skipped.
    pub fn recompute_verdict(&self) -> Verdict {
        if self.metadata.contains_key("reason") {
            return Verdict::Skipped;
        }
        let Some(rule) = self.metadata.get("rule").and_then(|r| Rule::parse(r)) else {
            return Verdict::Fail;
        };
        let subchecks = self.metadata.get("subchecks").is_none_or(|s| s == "pass");
        if rule.holds(self.lhs - self.rhs, self.tolerance) && subchecks {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }

    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.metadata.insert(key.into(), value.to_string());
    }
}

/// One JSON object per line.
pub fn write_jsonl(reports: &[VerificationReport], out: &mut impl Write) -> Result<()> {
    for r in reports {
        serde_json::to_writer(&mut *out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub check_id: String,
    pub measure_id: String,
    pub trials: usize,
    pub passes: usize,
    pub min_gap: f64,
    pub mean_gap: f64,
    pub max_gap: f64,
}

/// Per `(check_id, measure_id)` counts and gap statistics, in order of first
/// appearance. Gap statistics ignore non-finite gaps (skipped reports).
pub fn summarize(reports: &[VerificationReport]) -> Vec<SummaryRow> {
    let mut rows: Vec<SummaryRow> = Vec::new();
    let mut sums: Vec<(f64, usize)> = Vec::new();
    for r in reports {
        let idx = match rows
            .iter()
            .position(|row| row.check_id == r.check_id && row.measure_id == r.measure_id)
        {
            Some(i) => i,
            None => {
                rows.push(SummaryRow {
                    check_id: r.check_id.clone(),
                    measure_id: r.measure_id.clone(),
                    trials: 0,
                    passes: 0,
                    min_gap: f64::NAN,
                    mean_gap: f64::NAN,
                    max_gap: f64::NAN,
                });
                sums.push((0.0, 0));
                rows.len() - 1
            }
        };
        let row = &mut rows[idx];
        row.trials += 1;
        if r.verdict == Verdict::Pass {
            row.passes += 1;
        }
        if r.gap.is_finite() {
            row.min_gap = if row.min_gap.is_nan() { r.gap } else { row.min_gap.min(r.gap) };
            row.max_gap = if row.max_gap.is_nan() { r.gap } else { row.max_gap.max(r.gap) };
            sums[idx].0 += r.gap;
            sums[idx].1 += 1;
        }
    }
    for (row, (sum, n)) in rows.iter_mut().zip(sums) {
        if n > 0 {
            row.mean_gap = sum / n as f64;
        }
    }
    rows
}

pub fn write_summary_csv(reports: &[VerificationReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for row in summarize(reports) {
        w.serialize(row).map_err(|e| crate::Error::Parse(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes the JSON-lines report to `path` and the CSV summary next to it,
/// with the extension replaced by `summary.csv`. Returns the summary path.
pub fn write_reports(reports: &[VerificationReport], path: &Path) -> Result<std::path::PathBuf> {
    let mut jsonl = Vec::new();
    write_jsonl(reports, &mut jsonl)?;
    std::fs::write(path, jsonl)?;
    let summary = path.with_extension("summary.csv");
    let mut csv = Vec::new();
    write_summary_csv(reports, &mut csv)?;
    std::fs::write(&summary, csv)?;
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(lhs: f64, rhs: f64, tol: f64, rule: Rule) -> VerificationReport {
        VerificationReport::decide("monotone", "negativity".into(), None, lhs, rhs, tol, rule, 0, BTreeMap::new())
    }

    #[test]
    fn rules() {
        assert_eq!(report(0.5, 0.0, 1e-9, Rule::AtLeast).verdict, Verdict::Pass);
        assert_eq!(report(0.0, 1e-8, 1e-9, Rule::AtLeast).verdict, Verdict::Fail);
        assert_eq!(report(0.0, 5e-10, 1e-9, Rule::AtLeast).verdict, Verdict::Pass);
        assert_eq!(report(1e-7, 0.0, 1e-6, Rule::Exceeds).verdict, Verdict::Fail);
        assert_eq!(report(1e-5, 0.0, 1e-6, Rule::Exceeds).verdict, Verdict::Pass);
        assert_eq!(report(1e-10, 0.0, 1e-9, Rule::Within).verdict, Verdict::Pass);
        assert_eq!(report(0.0, 1e-8, 1e-9, Rule::Within).verdict, Verdict::Fail);
    }

    #[test]
    fn failed_subchecks_fail_the_report() {
        let mut meta = BTreeMap::new();
        meta.insert("subchecks".to_string(), "fail".to_string());
        let r = VerificationReport::decide("x", "y".into(), None, 0.0, 0.0, 1e-9, Rule::Within, 0, meta);
        assert_eq!(r.verdict, Verdict::Fail);
    }

    #[test]
    fn skipped_reports_stay_skipped() {
        let r = VerificationReport::skipped("monotone", "eof".into(), None, 3, "no closed form");
        assert_eq!(r.recompute_verdict(), Verdict::Skipped);
        let line = serde_json::to_string(&r).unwrap();
        assert!(line.contains("\"verdict\":\"skipped\""));
        assert!(line.contains("\"lhs\":null"));
    }

    #[test]
    fn summary_statistics() {
        let reports = vec![
            report(0.5, 0.0, 1e-9, Rule::AtLeast),
            report(0.2, 0.1, 1e-9, Rule::AtLeast),
            report(0.0, 1.0, 1e-9, Rule::AtLeast),
            VerificationReport::skipped("monotone", "negativity".into(), None, 0, "r"),
        ];
        let rows = summarize(&reports);
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!((row.trials, row.passes), (4, 2));
        assert_eq!(row.min_gap, -1.0);
        assert_eq!(row.max_gap, 0.5);
        assert!((row.mean_gap - (0.5 + 0.1 - 1.0) / 3.0).abs() < 1e-15);
        let mut out = Vec::new();
        write_summary_csv(&reports, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("check_id,measure_id,trials,passes,min_gap,mean_gap,max_gap\n"));
    }
}
