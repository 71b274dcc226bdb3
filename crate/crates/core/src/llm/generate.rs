use std::collections::HashMap;
use std::sync::Mutex;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::SeedTest;
use crate::tdsl::{
    extract_script, print_unchecked, ExtractionFailure, FailureCategory, TestScript,
};

use super::client::{ChatRequest, LlmClient, LlmError};
use super::{
    ChatMessage, GenParams, MutationMode, MutationRule, GENERATE_PROMPT, GENERATE_SUFFIX,
    MUTATION_PREFIX, SEED_PREFIX, SUMMARIZE_PROMPT, SYSTEM_PROMPT,
};

#[derive(Debug, thiserror::Error)]
pub enum GenerationError {
    #[error("summary for seed `{seed_id}` failed: {source}")]
    Summary { seed_id: String, source: LlmError },
    #[error("generation for seed `{}` failed: {source}", record.seed_id)]
    Transport {
        source: LlmError,
        record: Box<GenerationRecord>,
    },
}

fn summary_messages(seed: &SeedTest) -> Vec<ChatMessage> {
    vec![
        ChatMessage::system(SYSTEM_PROMPT),
        ChatMessage::user(format!(
            "{SEED_PREFIX}{}{SUMMARIZE_PROMPT}",
            seed.script_text
        )),
    ]
}

fn request(params: &GenParams, messages: Vec<ChatMessage>) -> ChatRequest {
    ChatRequest {
        model: params.model.clone(),
        messages,
        temperature: params.temperature,
        top_p: params.top_p,
    }
}

/// Asks for a summary of the seed; the reply is returned verbatim.
pub fn summarize(
    seed: &SeedTest,
    params: &GenParams,
    client: &dyn LlmClient,
) -> Result<String, GenerationError> {
    let err = |source| GenerationError::Summary {
        seed_id: seed.id.clone(),
        source,
    };
    let s = client
        .complete(&request(params, summary_messages(seed)))
        .map_err(err)?;
    if s.trim().is_empty() {
        return Err(err(LlmError::EmptyResponse));
    }
    Ok(s)
}

/// Summaries computed once per seed content.
#[derive(Debug, Default)]
pub struct SummaryCache {
    by_hash: Mutex<HashMap<String, String>>,
}

impl SummaryCache {
    pub fn get_or_summarize(
        &self,
        seed: &SeedTest,
        params: &GenParams,
        client: &dyn LlmClient,
    ) -> Result<String, GenerationError> {
        let key = seed.hash();
        if let Some(s) = self.by_hash.lock().expect("poisoned").get(&key) {
            return Ok(s.clone());
        }
        let s = summarize(seed, params, client)?;
        self.by_hash
            .lock()
            .expect("poisoned")
            .insert(key, s.clone());
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.by_hash.lock().expect("poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn build_context(
    seed: &SeedTest,
    summary: &str,
    rule: Option<MutationRule>,
) -> Vec<ChatMessage> {
    let mut ask = String::from(GENERATE_PROMPT);
    if let Some(r) = rule {
        ask.push_str(MUTATION_PREFIX);
        ask.push_str(r.sentence());
        ask.push('.');
    }
    ask.push_str(GENERATE_SUFFIX);
    let mut m = summary_messages(seed);
    m.push(ChatMessage::assistant(summary));
    m.push(ChatMessage::user(ask));
    m
}

#[derive(Debug, Clone, PartialEq)]
pub enum Extraction {
    Script(TestScript),
    Failure(ExtractionFailure),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "lowercase")]
enum ExtractionRepr {
    Script { text: String },
    Failure(ExtractionFailure),
}

impl Serialize for Extraction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Extraction::Script(t) => ExtractionRepr::Script {
                text: print_unchecked(t),
            },
            Extraction::Failure(f) => ExtractionRepr::Failure(f.clone()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Extraction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match ExtractionRepr::deserialize(d)? {
            ExtractionRepr::Script { text } => crate::tdsl::parse_script(&text)
                .map(Extraction::Script)
                .map_err(serde::de::Error::custom),
            ExtractionRepr::Failure(f) => Ok(Extraction::Failure(f)),
        }
    }
}

impl Extraction {
    pub fn script(&self) -> Option<&TestScript> {
        match self {
            Extraction::Script(s) => Some(s),
            Extraction::Failure(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    pub seed_id: String,
    pub round: usize,
    pub replicate: usize,
    pub rule: Option<MutationRule>,
    pub summary: String,
    /// Exactly the messages sent for generation.
    pub messages: Vec<ChatMessage>,
    pub raw_response: String,
    pub extraction: Extraction,
    pub timestamp: String,
}

impl GenerationRecord {
    /// `<seed>-r<round>-<replicate>`, used for file names and verdicts.
    pub fn id(&self) -> String {
        format!("{}-r{}-{}", self.seed_id, self.round, self.replicate)
    }
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

/// Sends the generation context and extracts a script from the reply. A
/// context over the configured limit is not sent and is recorded as a
/// `context-overflow` failure.
#[allow(clippy::too_many_arguments)]
pub fn generate(
    seed: &SeedTest,
    summary: &str,
    rule: Option<MutationRule>,
    params: &GenParams,
    client: &dyn LlmClient,
    round: usize,
    replicate: usize,
) -> Result<GenerationRecord, GenerationError> {
    let messages = build_context(seed, summary, rule);
    let req = request(params, messages);
    let mut record = GenerationRecord {
        seed_id: seed.id.clone(),
        round,
        replicate,
        rule,
        summary: summary.to_string(),
        messages: req.messages.clone(),
        raw_response: String::new(),
        extraction: Extraction::Failure(ExtractionFailure {
            category: FailureCategory::ContextOverflow,
            candidate: String::new(),
            error: None,
        }),
        timestamp: now(),
    };
    if params
        .context_limit_chars
        .is_some_and(|lim| req.context_chars() > lim)
    {
        return Ok(record);
    }
    match client.complete(&req) {
        Ok(raw) => {
            record.extraction = match extract_script(&raw) {
                Ok(s) => Extraction::Script(s),
                Err(f) => Extraction::Failure(f),
            };
            record.raw_response = raw;
            Ok(record)
        }
        Err(LlmError::ContextOverflow(_)) => Ok(record),
        Err(source) => Err(GenerationError::Transport {
            source,
            record: Box::new(record),
        }),
    }
}

/// `None` in mode `none`; otherwise one of the five rules, uniformly.
pub fn pick_rule<R: Rng + ?Sized>(rng: &mut R, mode: MutationMode) -> Option<MutationRule> {
    match mode {
        MutationMode::None => None,
        MutationMode::RandomOne => {
            Some(MutationRule::ALL[rng.random_range(0..MutationRule::ALL.len())])
        }
    }
}
