use std::collections::BTreeMap;
use std::sync::atomic::{AtomicBool, Ordering};
use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::backends::{execute_with_coverage, resolve_backends, Coverage, TestOutcome};
use crate::corpus::{load_corpus, mine_seeds, Corpus, CorpusError};
use crate::diffcore::{dedup, BugReport, DiffError, DiffVerdict};
use crate::llm::{
    generate, pick_rule, Extraction, GenerationError, GenerationRecord, HttpClient,
    HttpClientConfig, LlmClient, MutationMode, MutationRule, RetryPolicy, RetryingClient, Scenario,
    SummaryCache,
};
use crate::tdsl::FailureCategory;

use super::config::{ConfigError, CorpusSource, LlmConfig, PipelineConfig};

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("cannot load mock scenario {path}: {source}")]
    Scenario {
        path: std::path::PathBuf,
        source: std::io::Error,
    },
    #[error("llm client: {0}")]
    Client(String),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("cannot write artifacts: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomeCounts {
    pub pass: usize,
    pub fail: usize,
    pub error: usize,
}

impl OutcomeCounts {
    pub fn total(&self) -> usize {
        self.pass + self.fail + self.error
    }
}

/// Counts for one prompt mode: `plain` (no rule) or `mutate`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModeCounts {
    pub generated: usize,
    pub extraction_failures: usize,
    pub executed: usize,
    pub per_backend: BTreeMap<String, OutcomeCounts>,
}

impl ModeCounts {
    /// generated = extraction_failures + executed, and every backend saw
    /// every executed script exactly once.
    pub fn reconciles(&self) -> bool {
        self.generated == self.extraction_failures + self.executed
            && self
                .per_backend
                .values()
                .all(|c| c.total() == self.executed)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordLink {
    pub id: String,
    pub seed_id: String,
    pub round: usize,
    pub replicate: usize,
    pub rule: Option<MutationRule>,
    pub record_file: String,
    /// Absent when extraction failed.
    pub script_file: Option<String>,
    pub extraction_failure: Option<FailureCategory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub timestamp: String,
    pub complete: bool,
    pub abort_reason: Option<String>,
    pub manifest_hash: String,
    pub backends: Vec<String>,
    pub config: serde_json::Value,
    pub counts: BTreeMap<String, ModeCounts>,
    pub verdicts: Vec<DiffVerdict>,
    pub bugs: Vec<BugReport>,
    pub records: Vec<RecordLink>,
    pub coverage: BTreeMap<String, Coverage>,
}

impl RunReport {
    pub fn inconsistent(&self) -> usize {
        self.verdicts.iter().filter(|v| v.is_inconsistent()).count()
    }
}

pub struct RunArtifacts {
    pub report: RunReport,
    pub records: Vec<GenerationRecord>,
}

pub const MODE_PLAIN: &str = "plain";
pub const MODE_MUTATE: &str = "mutate";

fn mode_of(rule: Option<MutationRule>) -> &'static str {
    if rule.is_some() {
        MODE_MUTATE
    } else {
        MODE_PLAIN
    }
}

/// File-name-safe version of a record id.
pub fn file_stem(id: &str) -> String {
    id.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect()
}

pub fn load_config_corpus(config: &PipelineConfig) -> Result<Corpus, CorpusError> {
    match &config.corpus {
        CorpusSource::Manifest { manifest } => load_corpus(manifest),
        CorpusSource::Directory { root, keyword } => {
            let mined = mine_seeds(root, keyword)?;
            for e in &mined.load_errors {
                tracing::warn!(path = %e.path.display(), error = %e.message, "seed rejected");
            }
            Ok(mined.corpus)
        }
    }
}

/// The mock from the scenario file when one is configured, else the HTTP
/// client with retries.
pub fn build_client(llm: &LlmConfig) -> Result<Box<dyn LlmClient>, PipelineError> {
    if let Some(path) = &llm.mock_scenario {
        let s = Scenario::load(path).map_err(|source| PipelineError::Scenario {
            path: path.clone(),
            source,
        })?;
        return Ok(s.into_client());
    }
    let mut http = HttpClientConfig::from_env(llm.endpoint.as_deref(), &llm.api_key_env);
    http.verbose = llm.verbose;
    let client = HttpClient::new(http).map_err(|e| PipelineError::Client(e.to_string()))?;
    let policy = RetryPolicy {
        attempts: llm.retry_attempts,
        initial_backoff: Duration::from_millis(llm.initial_backoff_ms),
    };
    Ok(Box::new(RetryingClient::new(client, policy)))
}

/// Rules for every (round, seed, replicate), drawn in that nesting order
/// from one RNG before any work is fanned out.
pub fn predraw_rules(
    seed: u64,
    mode: MutationMode,
    rounds: usize,
    seeds: usize,
    n_per_seed: usize,
) -> Vec<Vec<Vec<Option<MutationRule>>>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..rounds)
        .map(|_| {
            (0..seeds)
                .map(|_| (0..n_per_seed).map(|_| pick_rule(&mut rng, mode)).collect())
                .collect()
        })
        .collect()
}

struct SeedWork {
    records: Vec<GenerationRecord>,
    error: Option<String>,
}

/// Runs the whole loop over an already-loaded corpus.
pub fn run(
    config: &PipelineConfig,
    corpus: &Corpus,
    client: &dyn LlmClient,
) -> Result<RunArtifacts, PipelineError> {
    config.validate()?;
    let backends = resolve_backends(&config.backends).map_err(ConfigError::from)?;
    let params = &config.generation;
    let rules = predraw_rules(
        params.seed,
        config.mutation,
        config.rounds,
        corpus.len(),
        params.n_per_seed,
    );
    let cache = SummaryCache::default();
    let abort = AtomicBool::new(false);

    let work = |seed_idx: usize| -> SeedWork {
        let seed = &corpus.seeds[seed_idx];
        let mut out = SeedWork {
            records: Vec::new(),
            error: None,
        };
        if abort.load(Ordering::SeqCst) {
            return out;
        }
        let summary = match cache.get_or_summarize(seed, params, client) {
            Ok(s) => s,
            Err(e) => {
                abort.store(true, Ordering::SeqCst);
                out.error = Some(e.to_string());
                return out;
            }
        };
        for (round, per_round) in rules.iter().enumerate() {
            for (rep, rule) in per_round[seed_idx].iter().enumerate() {
                if abort.load(Ordering::SeqCst) {
                    return out;
                }
                match generate(seed, &summary, *rule, params, client, round, rep) {
                    Ok(r) => out.records.push(r),
                    Err(e) => {
                        abort.store(true, Ordering::SeqCst);
                        if let GenerationError::Transport { record, .. } = &e {
                            tracing::error!(record = %record.id(), "generation aborted");
                        }
                        out.error = Some(e.to_string());
                        return out;
                    }
                }
            }
        }
        out
    };

    let workers = config
        .llm
        .in_flight
        .min(client.max_concurrency().unwrap_or(usize::MAX))
        .max(1);
    let results: Vec<SeedWork> = if workers == 1 {
        (0..corpus.len()).map(work).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| PipelineError::Client(e.to_string()))?;
        pool.install(|| (0..corpus.len()).into_par_iter().map(work).collect())
    };

    let mut abort_reason = None;
    let mut records = Vec::new();
    for r in results {
        if abort_reason.is_none() {
            abort_reason = r.error;
        }
        records.extend(r.records);
    }
    records.sort_by(|a, b| {
        (&a.seed_id, a.round, a.replicate).cmp(&(&b.seed_id, b.round, b.replicate))
    });

    let executed: Vec<(usize, DiffVerdict, Vec<Coverage>)> = records
        .par_iter()
        .enumerate()
        .filter_map(|(i, rec)| rec.extraction.script().map(|s| (i, rec, s)))
        .map(|(i, rec, script)| {
            let mut covs = Vec::with_capacity(backends.len());
            let mut outcomes = BTreeMap::new();
            for b in &backends {
                let mut cov = Coverage::default();
                let o = execute_with_coverage(script, b.as_ref(), config.limits, &mut cov);
                outcomes.insert(b.name().to_string(), o);
                covs.push(cov);
            }
            DiffVerdict::new(rec.id(), script.clone(), outcomes).map(|v| (i, v, covs))
        })
        .collect::<Result<_, _>>()?;

    let mut counts: BTreeMap<String, ModeCounts> = [MODE_PLAIN, MODE_MUTATE]
        .into_iter()
        .map(|m| {
            let per_backend = backends
                .iter()
                .map(|b| (b.name().to_string(), OutcomeCounts::default()))
                .collect();
            (
                m.to_string(),
                ModeCounts {
                    per_backend,
                    ..ModeCounts::default()
                },
            )
        })
        .collect();
    let mut links = Vec::with_capacity(records.len());
    for rec in &records {
        let c = counts.get_mut(mode_of(rec.rule)).expect("mode present");
        c.generated += 1;
        let stem = file_stem(&rec.id());
        let (script_file, failure) = match &rec.extraction {
            Extraction::Script(_) => {
                c.executed += 1;
                (Some(format!("scripts/{stem}.t")), None)
            }
            Extraction::Failure(f) => {
                c.extraction_failures += 1;
                (None, Some(f.category))
            }
        };
        links.push(RecordLink {
            id: rec.id(),
            seed_id: rec.seed_id.clone(),
            round: rec.round,
            replicate: rec.replicate,
            rule: rec.rule,
            record_file: format!("records/{stem}.json"),
            script_file,
            extraction_failure: failure,
        });
    }

    let mut coverage: BTreeMap<String, Coverage> = BTreeMap::new();
    let mut verdicts = Vec::with_capacity(executed.len());
    for (i, v, covs) in executed {
        let c = counts
            .get_mut(mode_of(records[i].rule))
            .expect("mode present");
        for (name, o) in &v.outcomes {
            let oc = c.per_backend.get_mut(name).expect("backend present");
            match o {
                TestOutcome::Pass => oc.pass += 1,
                TestOutcome::Fail { .. } => oc.fail += 1,
                TestOutcome::Error { .. } => oc.error += 1,
            }
        }
        for (b, cov) in backends.iter().zip(&covs) {
            coverage.entry(b.name().to_string()).or_default().merge(cov);
        }
        verdicts.push(v);
    }
    let bugs = dedup(&verdicts, &config.suppress);

    let report = RunReport {
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
        complete: abort_reason.is_none(),
        abort_reason,
        manifest_hash: corpus.manifest_hash.clone(),
        backends: backends.iter().map(|b| b.name().to_string()).collect(),
        config: config.echo(),
        counts,
        verdicts,
        bugs,
        records: links,
        coverage,
    };
    Ok(RunArtifacts { report, records })
}

/// Loads the corpus, builds the client, runs, and writes artifacts to the
/// configured output directory.
pub fn run_from_config(config: &PipelineConfig) -> Result<RunArtifacts, PipelineError> {
    config.validate()?;
    let corpus = load_config_corpus(config)?;
    let client = build_client(&config.llm)?;
    let artifacts = run(config, &corpus, client.as_ref())?;
    super::write_artifacts(&artifacts, &config.output_dir)?;
    Ok(artifacts)
}
