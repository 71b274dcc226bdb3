//! The end-to-end loop: seeds, summaries, generation, execution on every
//! backend, comparison, dedup and reporting.

mod config;
mod report;
mod run;

use std::fs;
use std::io;
use std::path::Path;

pub use config::{ConfigError, CorpusSource, LlmConfig, Overrides, PipelineConfig};
pub use report::{
    bugs_jsonl, header, render_jsonl, render_text, report_render, ReportFormat, UnknownFormat,
};
pub use run::{
    build_client, file_stem, load_config_corpus, predraw_rules, run, run_from_config, ModeCounts,
    OutcomeCounts, PipelineError, RecordLink, RunArtifacts, RunReport, MODE_MUTATE, MODE_PLAIN,
};

use crate::tdsl::print_unchecked;

/// Writes `records/`, `scripts/`, `verdicts.jsonl`, `bugs.jsonl` and
/// `report.txt` under `dir`.
pub fn write_artifacts(artifacts: &RunArtifacts, dir: &Path) -> io::Result<()> {
    let records_dir = dir.join("records");
    let scripts_dir = dir.join("scripts");
    fs::create_dir_all(&records_dir)?;
    fs::create_dir_all(&scripts_dir)?;
    for rec in &artifacts.records {
        let stem = file_stem(&rec.id());
        let json = serde_json::to_string_pretty(rec).map_err(io::Error::other)?;
        fs::write(records_dir.join(format!("{stem}.json")), json + "\n")?;
        if let Some(s) = rec.extraction.script() {
            fs::write(scripts_dir.join(format!("{stem}.t")), print_unchecked(s))?;
        }
    }
    let report = &artifacts.report;
    let mut verdicts = String::new();
    for v in &report.verdicts {
        verdicts.push_str(&serde_json::to_string(v).map_err(io::Error::other)?);
        verdicts.push('\n');
    }
    fs::write(dir.join("verdicts.jsonl"), verdicts)?;
    fs::write(
        dir.join("bugs.jsonl"),
        report_render(report, ReportFormat::Jsonl),
    )?;
    fs::write(
        dir.join("report.txt"),
        report_render(report, ReportFormat::Text),
    )?;
    Ok(())
}
