//! OpenAI-compatible chat completion client with retry.

use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

/// Environment variables consulted for the bearer token, in order.
pub const API_KEY_VARS: [&str; 2] = ["EEBENCH_API_KEY", "OPENAI_API_KEY"];

#[derive(Debug, thiserror::Error)]
pub enum ChatError {
    #[error("authentication rejected (HTTP {status}): {body}")]
    Auth { status: u16, body: String },
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("malformed response: {0}")]
    Decode(String),
}

impl ChatError {
    /// Transport failures, rate limiting and server errors are worth another attempt.
    pub fn is_retryable(&self) -> bool {
        match self {
            ChatError::Transport(_) => true,
            ChatError::Status { status, .. } => *status == 429 || *status >= 500,
            ChatError::Auth { .. } | ChatError::Decode(_) => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
}

impl ChatRequest {
    /// A single-turn request carrying `prompt` as the user message.
    pub fn user(model: impl Into<String>, prompt: impl Into<String>, temperature: f64) -> Self {
        Self {
            model: model.into(),
            messages: vec![ChatMessage { role: "user".into(), content: prompt.into() }],
            temperature,
        }
    }

    /// The concatenated message contents, which is what the response cache is keyed on.
    pub fn prompt(&self) -> String {
        self.messages.iter().map(|m| m.content.as_str()).collect::<Vec<_>>().join("\n")
    }
}

#[async_trait]
pub trait ChatBackend: Send + Sync {
    /// Returns the assistant message content of the first choice.
    async fn complete(&self, request: &ChatRequest) -> Result<String, ChatError>;
}

#[derive(Deserialize)]
struct CompletionBody {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    message: ChoiceMessage,
}

#[derive(Deserialize)]
struct ChoiceMessage {
    #[serde(default)]
    content: Option<String>,
}

#[derive(Debug, Clone)]
pub struct HttpChatClient {
    client: reqwest::Client,
    endpoint: String,
    api_key: Option<String>,
}

impl HttpChatClient {
    /// `base_url` is the API root, e.g. `https://api.openai.com/v1`.
    pub fn new(base_url: &str, api_key: Option<String>, timeout: Duration) -> Result<Self, ChatError> {
        let client = reqwest::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| ChatError::Transport(e.to_string()))?;
        let endpoint = format!("{}/chat/completions", base_url.trim_end_matches('/'));
        Ok(Self { client, endpoint, api_key })
    }

    pub fn api_key_from_env() -> Option<String> {
        API_KEY_VARS.iter().find_map(|v| std::env::var(v).ok().filter(|k| !k.is_empty()))
    }
}

#[async_trait]
impl ChatBackend for HttpChatClient {
    async fn complete(&self, request: &ChatRequest) -> Result<String, ChatError> {
        let mut builder = self.client.post(&self.endpoint).json(request);
        if let Some(key) = &self.api_key {
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().await.map_err(|e| ChatError::Transport(e.to_string()))?;
        let status = response.status().as_u16();
        if !response.status().is_success() {
            let body = response.text().await.unwrap_or_default();
            return Err(if status == 401 || status == 403 {
                ChatError::Auth { status, body }
            } else {
                ChatError::Status { status, body }
            });
        }
        let body: CompletionBody = response.json().await.map_err(|e| ChatError::Decode(e.to_string()))?;
        body.choices
            .into_iter()
            .next()
            .map(|c| c.message.content.unwrap_or_default())
            .ok_or_else(|| ChatError::Decode("response has no choices".into()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub max_backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 4, backoff_base_ms: 500, max_backoff_ms: 30_000 }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (1-based): base * 2^(retry-1), capped.
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.saturating_sub(1)).unwrap_or(u64::MAX);
        Duration::from_millis(self.backoff_base_ms.saturating_mul(factor).min(self.max_backoff_ms))
    }
}

/// Outcome of a request after retries, with the number of attempts made.
#[derive(Debug)]
pub struct Attempted {
    pub result: Result<String, ChatError>,
    pub attempts: u32,
}

pub async fn complete_with_retry(backend: &dyn ChatBackend, request: &ChatRequest, policy: &RetryPolicy) -> Attempted {
    let max = policy.max_attempts.max(1);
    let mut attempts = 0;
    loop {
        attempts += 1;
        match backend.complete(request).await {
            Err(e) if e.is_retryable() && attempts < max => {
                tracing::debug!(attempt = attempts, error = %e, "retrying chat request");
                tokio::time::sleep(policy.backoff(attempts)).await;
            }
            result => return Attempted { result, attempts },
        }
    }
}

#[cfg(test)]
mod tests {
    use std::sync::atomic::{AtomicU32, Ordering};

    use super::*;

    struct Flaky {
        calls: AtomicU32,
        fail_first: u32,
        error: fn() -> ChatError,
    }

    #[async_trait]
    impl ChatBackend for Flaky {
        async fn complete(&self, _: &ChatRequest) -> Result<String, ChatError> {
            if self.calls.fetch_add(1, Ordering::SeqCst) < self.fail_first {
                Err((self.error)())
            } else {
                Ok("No.".into())
            }
        }
    }

    fn fast() -> RetryPolicy {
        RetryPolicy { max_attempts: 3, backoff_base_ms: 1, max_backoff_ms: 2 }
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy { max_attempts: 10, backoff_base_ms: 100, max_backoff_ms: 1000 };
        let ms: Vec<u128> = (1..=6).map(|r| p.backoff(r).as_millis()).collect();
        assert_eq!(ms, vec![100, 200, 400, 800, 1000, 1000]);
        assert_eq!(p.backoff(200).as_millis(), 1000);
    }

    #[tokio::test]
    async fn retries_transient_errors() {
        let b = Flaky { calls: AtomicU32::new(0), fail_first: 2, error: || ChatError::Transport("reset".into()) };
        let out = complete_with_retry(&b, &ChatRequest::user("m", "p", 0.0), &fast()).await;
        assert_eq!(out.result.unwrap(), "No.");
        assert_eq!(out.attempts, 3);
    }

    #[tokio::test]
    async fn gives_up_after_max_attempts() {
        let b = Flaky { calls: AtomicU32::new(0), fail_first: 10, error: || ChatError::Status { status: 503, body: String::new() } };
        let out = complete_with_retry(&b, &ChatRequest::user("m", "p", 0.0), &fast()).await;
        assert!(out.result.is_err());
        assert_eq!(out.attempts, 3);
    }

    #[tokio::test]
    async fn auth_errors_are_not_retried() {
        let b = Flaky { calls: AtomicU32::new(0), fail_first: 10, error: || ChatError::Auth { status: 401, body: String::new() } };
        let out = complete_with_retry(&b, &ChatRequest::user("m", "p", 0.0), &fast()).await;
        assert!(matches!(out.result, Err(ChatError::Auth { .. })));
        assert_eq!(out.attempts, 1);
    }

    #[test]
    fn request_wire_format() {
        let v = serde_json::to_value(ChatRequest::user("gpt", "hi", 0.0)).unwrap();
        assert_eq!(v, serde_json::json!({"model": "gpt", "messages": [{"role": "user", "content": "hi"}], "temperature": 0.0}));
    }
}
