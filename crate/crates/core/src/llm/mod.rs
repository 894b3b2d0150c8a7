//! LLM gateway: prompt construction, chat-completion backends, output
//! cleaning and token/latency accounting.

mod backend;
mod prompt;
mod sanitize;

pub use backend::{
    complete, BackendConfig, BackendMode, ChatBackend, FixtureBackend, FixtureEntry, LiveBackend,
    LlmError, RecordingBackend, ScriptedBackend, ENV_API_KEY, ENV_BASE_URL, ENV_FIXTURE_DIR, ENV_MODE,
    ENV_MODEL,
};
pub use prompt::{
    build_ecore_prompt, build_puml_prompt, prompt_hash, PromptError, PromptPair, ECORE_SYSTEM_PROMPT,
    ECORE_USER_TEMPLATE, PUML_SYSTEM_PROMPT, PUML_USER_TEMPLATE,
};
pub use sanitize::{sanitize, OutputKind, UnusableOutput};

use serde::{Deserialize, Serialize};

/// One completion with its usage accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LlmResponse {
    pub text: String,
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
    pub wall_seconds: f64,
    /// Accounting notes, e.g. a backend that reported no usage.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl LlmResponse {
    pub fn total_tokens(&self) -> u64 {
        self.prompt_tokens + self.completion_tokens
    }
}
