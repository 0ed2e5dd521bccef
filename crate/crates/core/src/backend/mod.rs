//! Model backends: the request/response contract, a scripted mock, and a
//! chat-completion HTTP client with retries.

mod http;
mod mock;

pub use http::{HttpBackend, HttpConfig, HttpConfigError, RetryPolicy};
pub use mock::{MockBackend, MockEntry, MockScript};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    System,
    User,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::System => "system",
            Role::User => "user",
        }
    }
}

/// What a request is for. Backends may route on it (the mock does).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Generate,
    Refine,
    Critique,
    Score,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub text: String,
    /// PNG bytes.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<Vec<u8>>,
}

impl Message {
    pub fn user(text: impl Into<String>) -> Self {
        Message { role: Role::User, text: text.into(), image: None }
    }

    pub fn user_with_image(text: impl Into<String>, png: Vec<u8>) -> Self {
        Message { role: Role::User, text: text.into(), image: Some(png) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendRequest {
    pub kind: TaskKind,
    pub messages: Vec<Message>,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 8000;

impl BackendRequest {
    pub fn new(kind: TaskKind, messages: Vec<Message>, temperature: f64) -> Self {
        BackendRequest { kind, messages, temperature, max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS }
    }

    pub fn image_count(&self) -> usize {
        self.messages.iter().filter(|m| m.image.is_some()).count()
    }

    /// Temperature in `[0, 2]` and at least one message. A message carries at
    /// most one image by construction.
    pub fn validate(&self) -> Result<(), BackendError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendError::Protocol(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        if self.messages.is_empty() {
            return Err(BackendError::Protocol("request has no messages".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendResponse {
    pub text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub usage: Option<Usage>,
    pub latency_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Error, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BackendError {
    #[error("timeout")]
    Timeout,
    #[error("rate limited (retry after {retry_after_s:?}s)")]
    RateLimited { retry_after_s: Option<f64> },
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("remote status {status}: {body}")]
    Remote { status: u16, body: String },
}

impl BackendError {
    /// Failures a later attempt may not hit.
    pub fn is_transient(&self) -> bool {
        match self {
            BackendError::Timeout | BackendError::RateLimited { .. } => true,
            BackendError::Remote { status, .. } => *status >= 500,
            BackendError::Protocol(_) => false,
        }
    }
}

/// Shared by loop runs running in parallel, hence `Send + Sync`.
pub trait Backend: Send + Sync {
    fn complete(&self, req: &BackendRequest) -> Result<BackendResponse, BackendError>;
}

impl<B: Backend + ?Sized> Backend for &B {
    fn complete(&self, req: &BackendRequest) -> Result<BackendResponse, BackendError> {
        (**self).complete(req)
    }
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn complete(&self, req: &BackendRequest) -> Result<BackendResponse, BackendError> {
        (**self).complete(req)
    }
}

impl<B: Backend + ?Sized> Backend for std::sync::Arc<B> {
    fn complete(&self, req: &BackendRequest) -> Result<BackendResponse, BackendError> {
        (**self).complete(req)
    }
}
