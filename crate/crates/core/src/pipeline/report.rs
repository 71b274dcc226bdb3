use std::fmt::Write as _;
use std::str::FromStr;

use serde_json::json;

use super::run::{ModeCounts, RunReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Jsonl,
    Text,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown report format `{0}` (expected jsonl or text)")]
pub struct UnknownFormat(pub String);

impl FromStr for ReportFormat {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "jsonl" => Ok(ReportFormat::Jsonl),
            "text" => Ok(ReportFormat::Text),
            _ => Err(UnknownFormat(s.to_string())),
        }
    }
}

/// Header line of the jsonl rendering. Everything but `timestamp` is a
/// function of config, corpus and scenario.
pub fn header(report: &RunReport) -> serde_json::Value {
    json!({
        "kind": "header",
        "timestamp": report.timestamp,
        "complete": report.complete,
        "abort_reason": report.abort_reason,
        "manifest_hash": report.manifest_hash,
        "backends": report.backends,
        "config": report.config,
        "counts": report.counts,
        "verdicts": report.verdicts.len(),
        "inconsistent": report.inconsistent(),
        "bugs": report.bugs.len(),
    })
}

/// One JSON object per bug report, with no header.
pub fn bugs_jsonl(report: &RunReport) -> String {
    let mut out = String::new();
    for b in &report.bugs {
        out.push_str(&serde_json::to_string(b).expect("bug report serializes"));
        out.push('\n');
    }
    out
}

pub fn render_jsonl(report: &RunReport) -> String {
    let mut out = serde_json::to_string(&header(report)).expect("header serializes");
    out.push('\n');
    out.push_str(&bugs_jsonl(report));
    out
}

fn pct(n: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        100.0 * n as f64 / d as f64
    }
}

fn outcome_block(out: &mut String, mode: &str, c: &ModeCounts) {
    let _ = writeln!(
        out,
        "[{mode}] generated {}, executed {}, extraction failures {}",
        c.generated, c.executed, c.extraction_failures
    );
    let _ = writeln!(
        out,
        "  {:<24}{:>8}{:>20}{:>16}",
        "backend", "Pass", "Failure-Exception", "Compile-Error"
    );
    for (name, b) in &c.per_backend {
        let _ = writeln!(
            out,
            "  {:<24}{:>7.1}%{:>19.1}%{:>15.1}%",
            name,
            pct(b.pass, c.generated),
            pct(b.fail + b.error, c.generated),
            pct(c.extraction_failures, c.generated)
        );
    }
}

pub fn render_text(report: &RunReport) -> String {
    let mut out = String::new();
    let status = if report.complete {
        "complete"
    } else {
        "INCOMPLETE"
    };
    let _ = writeln!(out, "run {status} at {}", report.timestamp);
    if let Some(r) = &report.abort_reason {
        let _ = writeln!(out, "aborted: {r}");
    }
    let _ = writeln!(out, "corpus manifest {}", report.manifest_hash);
    let _ = writeln!(out, "backends: {}", report.backends.join(", "));
    out.push('\n');
    for (mode, c) in &report.counts {
        if c.generated > 0 {
            outcome_block(&mut out, mode, c);
            out.push('\n');
        }
    }
    let _ = writeln!(
        out,
        "{} scripts compared, {} inconsistent, {} unique bug reports",
        report.verdicts.len(),
        report.inconsistent(),
        report.bugs.len()
    );
    for b in &report.bugs {
        let keys: Vec<String> = b
            .outcomes
            .iter()
            .map(|(n, o)| format!("{n}={}", o.key()))
            .collect();
        let _ = writeln!(
            out,
            "  {} {} ({} scripts) {}",
            &b.signature[..12.min(b.signature.len())],
            b.representative,
            b.script_ids.len(),
            keys.join(" ")
        );
        let l = &b.locus;
        let _ = writeln!(
            out,
            "    statement {}: {}",
            l.statement_index + 1,
            l.operations.join(", ")
        );
    }
    if !report.coverage.is_empty() {
        out.push_str("\noperation coverage (distinct/hits)\n");
        for (name, c) in &report.coverage {
            let _ = writeln!(
                out,
                "  {:<24}{:>6}{:>10}",
                name,
                c.distinct(),
                c.hits.values().sum::<u64>()
            );
        }
    }
    out
}

pub fn report_render(report: &RunReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Jsonl => render_jsonl(report).into_bytes(),
        ReportFormat::Text => render_text(report).into_bytes(),
    }
}
