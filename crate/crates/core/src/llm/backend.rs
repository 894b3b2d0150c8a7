use std::collections::{HashMap, VecDeque};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{prompt_hash, LlmResponse, PromptPair};

pub const ENV_BASE_URL: &str = "MF_LLM_BASE_URL";
pub const ENV_MODEL: &str = "MF_LLM_MODEL";
pub const ENV_API_KEY: &str = "MF_LLM_API_KEY";
pub const ENV_MODE: &str = "MF_LLM_MODE";
pub const ENV_FIXTURE_DIR: &str = "MF_FIXTURE_DIR";

const EXCERPT_CHARS: usize = 300;

#[derive(Debug, thiserror::Error)]
pub enum LlmError {
    #[error("transport error{}: {excerpt}", .status.map(|s| format!(" (HTTP {s})")).unwrap_or_default())]
    Transport { status: Option<u16>, excerpt: String },
    #[error("no fixture for prompt {hash}")]
    NoFixture { hash: String },
    #[error("fixture {path}: {message}")]
    Fixture { path: PathBuf, message: String },
    #[error("backend configuration: {0}")]
    Config(String),
    #[error("malformed backend response: {0}")]
    Response(String),
}

/// A chat-completion provider.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, prompt: &PromptPair) -> Result<LlmResponse, LlmError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    Live,
    #[default]
    Fixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BackendConfig {
    pub base_url: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_ref: String,
    pub timeout_seconds: f64,
    pub mode: BackendMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixture_dir: Option<PathBuf>,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            base_url: "https://api.openai.com/v1".to_string(),
            model: "gpt-4o".to_string(),
            api_key_ref: ENV_API_KEY.to_string(),
            timeout_seconds: 120.0,
            mode: BackendMode::Fixture,
            fixture_dir: None,
        }
    }
}

impl BackendConfig {
    /// Reads `MF_LLM_BASE_URL`, `MF_LLM_MODEL`, `MF_LLM_MODE` and
    /// `MF_FIXTURE_DIR` over the defaults.
    pub fn from_env() -> Result<Self, LlmError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(lookup: impl Fn(&str) -> Option<String>) -> Result<Self, LlmError> {
        let mut c = BackendConfig::default();
        if let Some(v) = lookup(ENV_BASE_URL) {
            c.base_url = v;
        }
        if let Some(v) = lookup(ENV_MODEL) {
            c.model = v;
        }
        if let Some(v) = lookup(ENV_MODE) {
            c.mode = match v.to_ascii_lowercase().as_str() {
                "live" => BackendMode::Live,
                "fixture" => BackendMode::Fixture,
                other => return Err(LlmError::Config(format!("{ENV_MODE} must be live or fixture, got `{other}`"))),
            };
        }
        c.fixture_dir = lookup(ENV_FIXTURE_DIR).map(PathBuf::from);
        c.validate()?;
        Ok(c)
    }

    pub fn fixture(dir: impl Into<PathBuf>) -> Self {
        BackendConfig {
            mode: BackendMode::Fixture,
            fixture_dir: Some(dir.into()),
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), LlmError> {
        if !(self.timeout_seconds > 0.0) {
            return Err(LlmError::Config("timeoutSeconds must be positive".into()));
        }
        match self.mode {
            BackendMode::Fixture if self.fixture_dir.is_none() => {
                Err(LlmError::Config(format!("fixture mode requires a fixture directory ({ENV_FIXTURE_DIR})")))
            }
            BackendMode::Live if self.base_url.trim().is_empty() || self.model.trim().is_empty() => {
                Err(LlmError::Config("live mode requires a base URL and a model".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn build(&self) -> Result<Box<dyn ChatBackend>, LlmError> {
        self.validate()?;
        match self.mode {
            BackendMode::Live => Ok(Box::new(LiveBackend::new(self.clone()))),
            BackendMode::Fixture => Ok(Box::new(FixtureBackend::load(self.fixture_dir.as_ref().unwrap())?)),
        }
    }
}

/// One-shot completion against the configured backend.
pub fn complete(config: &BackendConfig, prompt: &PromptPair) -> Result<LlmResponse, LlmError> {
    config.build()?.complete(prompt)
}

/// On-disk fixture: `<prompt hash>.json`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct FixtureEntry {
    pub text: String,
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
}

/// Canned responses keyed by prompt hash. Loaded once, read-only after.
#[derive(Debug, Clone, Default)]
pub struct FixtureBackend {
    entries: HashMap<String, FixtureEntry>,
}

impl FixtureBackend {
    pub fn load(dir: &Path) -> Result<Self, LlmError> {
        let read_dir = fs::read_dir(dir).map_err(|e| LlmError::Fixture {
            path: dir.to_path_buf(),
            message: e.to_string(),
        })?;
        let mut entries = HashMap::new();
        for item in read_dir {
            let path = item
                .map_err(|e| LlmError::Fixture {
                    path: dir.to_path_buf(),
                    message: e.to_string(),
                })?
                .path();
            if path.extension().and_then(|e| e.to_str()) != Some("json") {
                continue;
            }
            let fail = |message: String| LlmError::Fixture {
                path: path.clone(),
                message,
            };
            let text = fs::read_to_string(&path).map_err(|e| fail(e.to_string()))?;
            let entry: FixtureEntry = serde_json::from_str(&text).map_err(|e| fail(e.to_string()))?;
            let hash = path.file_stem().and_then(|s| s.to_str()).unwrap_or_default().to_string();
            entries.insert(hash, entry);
        }
        Ok(FixtureBackend { entries })
    }

    pub fn from_entries(entries: impl IntoIterator<Item = (String, FixtureEntry)>) -> Self {
        FixtureBackend {
            entries: entries.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl ChatBackend for FixtureBackend {
    fn complete(&self, prompt: &PromptPair) -> Result<LlmResponse, LlmError> {
        let hash = prompt_hash(prompt);
        let entry = self.entries.get(&hash).ok_or(LlmError::NoFixture { hash })?;
        Ok(LlmResponse {
            text: entry.text.clone(),
            prompt_tokens: entry.prompt_tokens,
            completion_tokens: entry.completion_tokens,
            wall_seconds: 0.0,
            notes: Vec::new(),
        })
    }
}

/// OpenAI-compatible chat-completions client.
pub struct LiveBackend {
    config: BackendConfig,
    agent: ureq::Agent,
}

impl LiveBackend {
    pub fn new(config: BackendConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.timeout_seconds)))
            .http_status_as_error(false)
            .build()
            .into();
        LiveBackend { config, agent }
    }

    /// Request body: two messages (system, user), temperature 0, one choice.
    pub fn request_body(&self, prompt: &PromptPair) -> Value {
        json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "temperature": 0,
            "n": 1,
        })
    }
}

impl ChatBackend for LiveBackend {
    fn complete(&self, prompt: &PromptPair) -> Result<LlmResponse, LlmError> {
        let url = format!("{}/chat/completions", self.config.base_url.trim_end_matches('/'));
        let started = Instant::now();
        let mut request = self.agent.post(&url);
        if let Ok(key) = std::env::var(&self.config.api_key_ref) {
            request = request.header("Authorization", &format!("Bearer {key}"));
        }
        let mut response = request.send_json(self.request_body(prompt)).map_err(|e| LlmError::Transport {
            status: None,
            excerpt: excerpt(&e.to_string()),
        })?;
        let status = response.status().as_u16();
        let body = response.body_mut().read_to_string().map_err(|e| LlmError::Transport {
            status: Some(status),
            excerpt: excerpt(&e.to_string()),
        })?;
        let wall_seconds = started.elapsed().as_secs_f64();
        if !(200..300).contains(&status) {
            return Err(LlmError::Transport {
                status: Some(status),
                excerpt: excerpt(&body),
            });
        }
        parse_completion(&body, wall_seconds)
    }
}

fn parse_completion(body: &str, wall_seconds: f64) -> Result<LlmResponse, LlmError> {
    let value: Value = serde_json::from_str(body).map_err(|e| LlmError::Response(e.to_string()))?;
    let text = value
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| LlmError::Response(format!("no choices[0].message.content in {}", excerpt(body))))?
        .to_string();
    let mut notes = Vec::new();
    let usage = |field: &str| value.pointer(&format!("/usage/{field}")).and_then(Value::as_u64);
    let (prompt_tokens, completion_tokens) = match (usage("prompt_tokens"), usage("completion_tokens")) {
        (Some(p), Some(c)) => (p, c),
        _ => {
            notes.push("backend reported no token usage; counted as 0".to_string());
            (0, 0)
        }
    };
    Ok(LlmResponse {
        text,
        prompt_tokens,
        completion_tokens,
        wall_seconds,
        notes,
    })
}

fn excerpt(s: &str) -> String {
    let mut out: String = s.chars().take(EXCERPT_CHARS).collect();
    if s.chars().count() > EXCERPT_CHARS {
        out.push_str("...");
    }
    out
}

/// Replays a fixed sequence of responses regardless of the prompt.
#[derive(Debug, Default)]
pub struct ScriptedBackend {
    queue: Mutex<VecDeque<FixtureEntry>>,
}

impl ScriptedBackend {
    pub fn new(responses: impl IntoIterator<Item = FixtureEntry>) -> Self {
        ScriptedBackend {
            queue: Mutex::new(responses.into_iter().collect()),
        }
    }

    pub fn remaining(&self) -> usize {
        self.queue.lock().unwrap().len()
    }
}

impl ChatBackend for ScriptedBackend {
    fn complete(&self, prompt: &PromptPair) -> Result<LlmResponse, LlmError> {
        let entry = self
            .queue
            .lock()
            .unwrap()
            .pop_front()
            .ok_or_else(|| LlmError::NoFixture { hash: prompt_hash(prompt) })?;
        Ok(LlmResponse {
            text: entry.text,
            prompt_tokens: entry.prompt_tokens,
            completion_tokens: entry.completion_tokens,
            wall_seconds: 0.0,
            notes: Vec::new(),
        })
    }
}

/// Passes calls through and writes every answer as a fixture file.
pub struct RecordingBackend<B> {
    inner: B,
    dir: PathBuf,
}

impl<B: ChatBackend> RecordingBackend<B> {
    pub fn new(inner: B, dir: impl Into<PathBuf>) -> Self {
        RecordingBackend { inner, dir: dir.into() }
    }
}

impl<B: ChatBackend> ChatBackend for RecordingBackend<B> {
    fn complete(&self, prompt: &PromptPair) -> Result<LlmResponse, LlmError> {
        let response = self.inner.complete(prompt)?;
        let entry = FixtureEntry {
            text: response.text.clone(),
            prompt_tokens: response.prompt_tokens,
            completion_tokens: response.completion_tokens,
        };
        let path = self.dir.join(format!("{}.json", prompt_hash(prompt)));
        let fail = |e: std::io::Error| LlmError::Fixture {
            path: path.clone(),
            message: e.to_string(),
        };
        fs::create_dir_all(&self.dir).map_err(fail)?;
        let mut json = serde_json::to_string_pretty(&entry).expect("fixture entry serializes");
        json.push('\n');
        fs::write(&path, json).map_err(fail)?;
        Ok(response)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;
    use std::thread;

    fn prompt() -> PromptPair {
        PromptPair {
            system: "sys".into(),
            user: "user".into(),
        }
    }

    #[test]
    fn fixture_hit_and_miss() {
        let dir = tempfile::tempdir().unwrap();
        let hash = prompt_hash(&prompt());
        fs::write(
            dir.path().join(format!("{hash}.json")),
            r#"{"text": "@startuml\nclass Vehicle\n@enduml", "promptTokens": 10, "completionTokens": 5}"#,
        )
        .unwrap();
        fs::write(dir.path().join("README.txt"), "ignored").unwrap();
        let config = BackendConfig::fixture(dir.path());
        let r = complete(&config, &prompt()).unwrap();
        assert!(r.text.contains("class Vehicle"));
        assert_eq!((r.prompt_tokens, r.completion_tokens, r.wall_seconds), (10, 5, 0.0));

        let other = PromptPair {
            system: "sys".into(),
            user: "other".into(),
        };
        let err = complete(&config, &other).unwrap_err();
        assert!(err.to_string().contains(&prompt_hash(&other)), "{err}");
    }

    #[test]
    fn config_validation() {
        let c = BackendConfig {
            fixture_dir: None,
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(LlmError::Config(_))));
        let env = |k: &str| match k {
            ENV_MODE => Some("live".to_string()),
            ENV_MODEL => Some("local-7b".to_string()),
            _ => None,
        };
        let c = BackendConfig::from_lookup(env).unwrap();
        assert_eq!((c.mode, c.model.as_str()), (BackendMode::Live, "local-7b"));
        assert!(BackendConfig::from_lookup(|k| (k == ENV_MODE).then(|| "cloud".to_string())).is_err());
    }

    #[test]
    fn malformed_fixture_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("abc.json"), "{not json").unwrap();
        assert!(matches!(FixtureBackend::load(dir.path()), Err(LlmError::Fixture { .. })));
    }

    #[test]
    fn recording_writes_loadable_fixtures() {
        let dir = tempfile::tempdir().unwrap();
        let scripted = ScriptedBackend::new([FixtureEntry {
            text: "answer".into(),
            prompt_tokens: 3,
            completion_tokens: 4,
        }]);
        let recorder = RecordingBackend::new(scripted, dir.path());
        recorder.complete(&prompt()).unwrap();
        assert!(recorder.complete(&prompt()).is_err());
        let replay = FixtureBackend::load(dir.path()).unwrap();
        assert_eq!(replay.complete(&prompt()).unwrap().total_tokens(), 7);
    }

    /// Serves one canned HTTP response and hands back the raw request.
    fn stub_server(status: &str, body: &'static str) -> (String, thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        let status = status.to_string();
        let handle = thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut head = String::new();
            let mut content_length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut body_buf = vec![0; content_length];
            reader.read_exact(&mut body_buf).unwrap();
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
            head + &String::from_utf8(body_buf).unwrap()
        });
        (url, handle)
    }

    fn live_config(url: String) -> BackendConfig {
        BackendConfig {
            base_url: url,
            model: "test-model".into(),
            api_key_ref: "MF_TEST_KEY_THAT_IS_NOT_SET".into(),
            timeout_seconds: 10.0,
            mode: BackendMode::Live,
            fixture_dir: None,
        }
    }

    #[test]
    fn live_request_shape_and_usage() {
        let (url, handle) = stub_server(
            "200 OK",
            r#"{"choices":[{"message":{"role":"assistant","content":"@startuml\n@enduml"}}],"usage":{"prompt_tokens":12,"completion_tokens":8}}"#,
        );
        let r = complete(&live_config(url), &prompt()).unwrap();
        assert_eq!(r.text, "@startuml\n@enduml");
        assert_eq!((r.prompt_tokens, r.completion_tokens), (12, 8));
        assert!(r.wall_seconds > 0.0);

        let raw = handle.join().unwrap();
        assert!(raw.starts_with("POST /chat/completions "), "{raw}");
        let body: Value = serde_json::from_str(raw.split("\r\n\r\n").nth(1).unwrap()).unwrap();
        let roles: Vec<_> = body["messages"].as_array().unwrap().iter().map(|m| m["role"].as_str().unwrap()).collect();
        assert_eq!(roles, ["system", "user"]);
        assert_eq!(body["temperature"], 0);
        assert_eq!(body["model"], "test-model");
    }

    #[test]
    fn live_non_2xx_is_transport_error() {
        let (url, handle) = stub_server("503 Service Unavailable", r#"{"error":"overloaded"}"#);
        let err = complete(&live_config(url), &prompt()).unwrap_err();
        handle.join().unwrap();
        match err {
            LlmError::Transport { status, excerpt } => {
                assert_eq!(status, Some(503));
                assert!(excerpt.contains("overloaded"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_usage_counts_zero_with_note() {
        let r = parse_completion(r#"{"choices":[{"message":{"content":"x"}}]}"#, 0.5).unwrap();
        assert_eq!(r.total_tokens(), 0);
        assert_eq!(r.notes.len(), 1);
    }

    #[test]
    fn unreachable_host_is_transport_error() {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let url = format!("http://{}", listener.local_addr().unwrap());
        drop(listener);
        let err = complete(&live_config(url), &prompt()).unwrap_err();
        assert!(matches!(err, LlmError::Transport { status: None, .. }), "{err:?}");
    }
}
