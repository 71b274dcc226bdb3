//! Prompting protocol, chat-completion transport and offline mocks.

mod client;
mod generate;
mod mock;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use client::{
    ChatRequest, HttpClient, HttpClientConfig, LlmClient, LlmError, RetryPolicy, RetryingClient,
    DEFAULT_API_KEY_ENV, DEFAULT_ENDPOINT, ENDPOINT_OVERRIDE_ENV,
};
pub use generate::{
    build_context, generate, pick_rule, summarize, Extraction, GenerationError, GenerationRecord,
    SummaryCache,
};
pub use mock::{
    RecordingClient, ReplayClient, Scenario, ScenarioEntry, ScriptedClient, ScriptedReply,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// Plain-text rendering of a conversation, one `Role: content` block per message.
pub fn render_transcript(messages: &[ChatMessage]) -> String {
    let mut out = String::new();
    for m in messages {
        let role = match m.role {
            Role::System => "System",
            Role::User => "User",
            Role::Assistant => "Assistant",
        };
        out.push_str(role);
        out.push_str(": ");
        out.push_str(&m.content);
        out.push('\n');
    }
    out
}

pub const SYSTEM_PROMPT: &str = "You are a helpful assistant.";
pub const SEED_PREFIX: &str = "Here is a unit test:\n";
pub const SUMMARIZE_PROMPT: &str = "\nPlease summarize what this unit test focuses on.";
pub const GENERATE_PROMPT: &str =
    "According to the unit test and the summary above, generate a new unit test that tests the same or similar functions.";
pub const MUTATION_PREFIX: &str = " Write a new test that ";
pub const GENERATE_SUFFIX: &str =
    " Include necessary import statements and return a complete test case.";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutationRule {
    ExtraDataValidation,
    ExtraParsing,
    ParsingConfigurations,
    SerializationConfigurations,
    ModifyingBeans,
}

impl MutationRule {
    pub const ALL: [MutationRule; 5] = [
        MutationRule::ExtraDataValidation,
        MutationRule::ExtraParsing,
        MutationRule::ParsingConfigurations,
        MutationRule::SerializationConfigurations,
        MutationRule::ModifyingBeans,
    ];

    /// The clause inserted after "Write a new test that".
    pub fn sentence(self) -> &'static str {
        match self {
            MutationRule::ExtraDataValidation => {
                "calls additional getters by key and by index on the parsed data and asserts each returned value"
            }
            MutationRule::ExtraParsing => {
                "parses the JSON data through additional parsing methods, such as typed parsing into a bean"
            }
            MutationRule::ParsingConfigurations => {
                "uses different parsing configurations, choosing reader features from TrimString, UseNativeObject, UseBigDecimalForFloats and AllowSingleQuotes"
            }
            MutationRule::SerializationConfigurations => {
                "uses different serialization configurations, choosing writer features from WriteNonStringValueAsString, WriteBooleanAsNumber, WriteNulls and PrettyFormat"
            }
            MutationRule::ModifyingBeans => {
                "modifies the bean definitions by renaming fields, changing field types, or adding and removing fields"
            }
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MutationRule::ExtraDataValidation => "ExtraDataValidation",
            MutationRule::ExtraParsing => "ExtraParsing",
            MutationRule::ParsingConfigurations => "ParsingConfigurations",
            MutationRule::SerializationConfigurations => "SerializationConfigurations",
            MutationRule::ModifyingBeans => "ModifyingBeans",
        }
    }
}

impl fmt::Display for MutationRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum MutationMode {
    #[serde(rename = "none")]
    None,
    #[default]
    #[serde(rename = "random_one", alias = "random")]
    RandomOne,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown mutation mode `{0}` (expected none or random)")]
pub struct UnknownMutationMode(String);

impl FromStr for MutationMode {
    type Err = UnknownMutationMode;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(MutationMode::None),
            "random" | "random_one" => Ok(MutationMode::RandomOne),
            other => Err(UnknownMutationMode(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenParams {
    pub temperature: f64,
    pub top_p: f64,
    pub n_per_seed: usize,
    pub model: String,
    /// Seed of the rule-selection RNG.
    pub seed: u64,
    /// Requests whose context exceeds this many characters are not sent.
    pub context_limit_chars: Option<usize>,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            temperature: 0.8,
            top_p: 0.95,
            n_per_seed: 3,
            model: "gpt-3.5-turbo".to_string(),
            seed: 42,
            context_limit_chars: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParamsError {
    #[error("temperature {0} outside [0, 2]")]
    Temperature(f64),
    #[error("top_p {0} outside (0, 1]")]
    TopP(f64),
    #[error("n_per_seed must be at least 1")]
    NPerSeed,
    #[error("model name must not be empty")]
    Model,
}

impl GenParams {
    pub fn validate(&self) -> Result<(), ParamsError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ParamsError::Temperature(self.temperature));
        }
        if !(self.top_p > 0.0 && self.top_p <= 1.0) {
            return Err(ParamsError::TopP(self.top_p));
        }
        if self.n_per_seed == 0 {
            return Err(ParamsError::NPerSeed);
        }
        if self.model.trim().is_empty() {
            return Err(ParamsError::Model);
        }
        Ok(())
    }
}
