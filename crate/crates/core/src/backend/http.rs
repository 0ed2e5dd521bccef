use super::{Backend, BackendError, BackendRequest, BackendResponse, Message, Usage};
use base64::Engine;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::sync::{Condvar, Mutex};
use std::time::{Duration, Instant};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HttpConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub timeout_s: f64,
    pub max_retries: u32,
    pub max_concurrency: usize,
}

impl Default for HttpConfig {
    fn default() -> Self {
        HttpConfig {
            endpoint: String::new(),
            model: String::new(),
            api_key_env: "SVGREFINE_API_KEY".into(),
            timeout_s: 120.0,
            max_retries: 4,
            max_concurrency: 4,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum HttpConfigError {
    #[error("backend endpoint is not configured")]
    MissingEndpoint,
    #[error("backend model is not configured")]
    MissingModel,
    #[error("environment variable {0} with the API key is not set")]
    MissingKey(String),
    #[error("max_concurrency must be at least 1")]
    ZeroConcurrency,
}

/// Exponential backoff with multiplicative jitter; a server-supplied
/// retry-after takes precedence. Successive delays never shrink.
#[derive(Debug, Clone, PartialEq)]
pub struct RetryPolicy {
    pub base: Duration,
    pub factor: f64,
    /// Relative jitter: each delay is scaled by a uniform draw in `[1-j, 1+j]`.
    pub jitter: f64,
    pub max_retries: u32,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy { base: Duration::from_secs(1), factor: 2.0, jitter: 0.2, max_retries: 4 }
    }
}

impl RetryPolicy {
    /// Delay before retry number `retry` (0-based), given the previous delay.
    pub fn delay(&self, retry: u32, retry_after: Option<Duration>, previous: Duration, rng: &mut impl Rng) -> Duration {
        let nominal = self.base.as_secs_f64() * self.factor.powi(retry as i32);
        let scale = if self.jitter > 0.0 { rng.gen_range(1.0 - self.jitter..=1.0 + self.jitter) } else { 1.0 };
        let computed = Duration::from_secs_f64(nominal * scale);
        retry_after.unwrap_or(computed).max(previous)
    }
}

/// Counting semaphore bounding in-flight requests.
#[derive(Debug)]
struct Semaphore {
    permits: Mutex<usize>,
    cv: Condvar,
}

struct Permit<'a>(&'a Semaphore);

impl Semaphore {
    fn new(n: usize) -> Self {
        Semaphore { permits: Mutex::new(n), cv: Condvar::new() }
    }

    fn acquire(&self) -> Permit<'_> {
        let mut n = self.permits.lock().expect("semaphore lock");
        while *n == 0 {
            n = self.cv.wait(n).expect("semaphore lock");
        }
        *n -= 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.permits.lock().expect("semaphore lock") += 1;
        self.0.cv.notify_one();
    }
}

/// Chat-completion client: JSON over HTTPS, bearer auth, images as data URLs.
pub struct HttpBackend {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    api_key: String,
    policy: RetryPolicy,
    semaphore: Semaphore,
    rng: Mutex<StdRng>,
}

impl HttpBackend {
    /// Reads the API key from the environment variable named in `cfg`.
    pub fn from_config(cfg: &HttpConfig) -> Result<Self, HttpConfigError> {
        let key = std::env::var(&cfg.api_key_env).map_err(|_| HttpConfigError::MissingKey(cfg.api_key_env.clone()))?;
        let policy = RetryPolicy { max_retries: cfg.max_retries, ..RetryPolicy::default() };
        Self::with_key(cfg, key, policy)
    }

    pub fn with_key(cfg: &HttpConfig, api_key: String, policy: RetryPolicy) -> Result<Self, HttpConfigError> {
        if cfg.endpoint.is_empty() {
            return Err(HttpConfigError::MissingEndpoint);
        }
        if cfg.model.is_empty() {
            return Err(HttpConfigError::MissingModel);
        }
        if cfg.max_concurrency == 0 {
            return Err(HttpConfigError::ZeroConcurrency);
        }
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs_f64(cfg.timeout_s.max(0.001))).build();
        Ok(HttpBackend {
            agent,
            endpoint: cfg.endpoint.clone(),
            model: cfg.model.clone(),
            api_key,
            policy,
            semaphore: Semaphore::new(cfg.max_concurrency),
            rng: Mutex::new(StdRng::from_entropy()),
        })
    }

    pub fn request_body(&self, req: &BackendRequest) -> Value {
        json!({
            "model": self.model,
            "temperature": req.temperature,
            "max_tokens": req.max_output_tokens,
            "messages": req.messages.iter().map(wire_message).collect::<Vec<_>>(),
        })
    }

    fn attempt(&self, body: &str) -> Result<BackendResponse, Failure> {
        let _permit = self.semaphore.acquire();
        let started = Instant::now();
        let result = self
            .agent
            .post(&self.endpoint)
            .set("Authorization", &format!("Bearer {}", self.api_key))
            .set("Content-Type", "application/json")
            .send_string(body);
        match result {
            Ok(resp) => {
                let text = resp
                    .into_string()
                    .map_err(|e| Failure::fatal(BackendError::Protocol(format!("read body: {e}"))))?;
                let mut parsed = parse_response(&text).map_err(Failure::fatal)?;
                parsed.latency_ms = started.elapsed().as_millis() as u64;
                Ok(parsed)
            }
            Err(ureq::Error::Status(429, resp)) => {
                let retry_after_s = resp.header("retry-after").and_then(|v| v.trim().parse::<f64>().ok());
                Err(Failure { error: BackendError::RateLimited { retry_after_s }, retryable: true })
            }
            Err(ureq::Error::Status(status, resp)) => {
                let body = resp.into_string().unwrap_or_default();
                Err(Failure { error: BackendError::Remote { status, body }, retryable: status >= 500 })
            }
            Err(ureq::Error::Transport(t)) => {
                let message = t.to_string();
                let error = if message.contains("timed out") || message.contains("timeout") {
                    BackendError::Timeout
                } else {
                    BackendError::Protocol(format!("transport: {message}"))
                };
                Err(Failure { error, retryable: true })
            }
        }
    }
}

impl std::fmt::Debug for HttpBackend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // the key stays out of logs
        f.debug_struct("HttpBackend")
            .field("endpoint", &self.endpoint)
            .field("model", &self.model)
            .finish_non_exhaustive()
    }
}

struct Failure {
    error: BackendError,
    retryable: bool,
}

impl Failure {
    fn fatal(error: BackendError) -> Self {
        Failure { error, retryable: false }
    }
}

impl Backend for HttpBackend {
    fn complete(&self, req: &BackendRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        let body = self.request_body(req).to_string();
        let started = Instant::now();
        let mut previous = Duration::ZERO;
        let mut retry = 0;
        loop {
            match self.attempt(&body) {
                Ok(mut resp) => {
                    resp.latency_ms = started.elapsed().as_millis() as u64;
                    return Ok(resp);
                }
                Err(f) if f.retryable && retry < self.policy.max_retries => {
                    let retry_after = match f.error {
                        BackendError::RateLimited { retry_after_s: Some(s) } if s.is_finite() && s >= 0.0 => {
                            Some(Duration::from_secs_f64(s))
                        }
                        _ => None,
                    };
                    let delay = {
                        let mut rng = self.rng.lock().expect("rng lock");
                        self.policy.delay(retry, retry_after, previous, &mut *rng)
                    };
                    tracing::warn!(error = %f.error, retry, delay_ms = delay.as_millis() as u64, "backend call failed, retrying");
                    std::thread::sleep(delay);
                    previous = delay;
                    retry += 1;
                }
                Err(f) => return Err(f.error),
            }
        }
    }
}

fn wire_message(m: &Message) -> Value {
    let content = match &m.image {
        None => Value::String(m.text.clone()),
        Some(png) => {
            let url = format!("data:image/png;base64,{}", base64::engine::general_purpose::STANDARD.encode(png));
            json!([
                {"type": "text", "text": m.text},
                {"type": "image_url", "image_url": {"url": url}},
            ])
        }
    };
    json!({"role": m.role.as_str(), "content": content})
}

fn parse_response(text: &str) -> Result<BackendResponse, BackendError> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| BackendError::Protocol(format!("response is not JSON: {e}")))?;
    let content = v
        .pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .ok_or_else(|| BackendError::Protocol("response has no choices[0].message.content".into()))?;
    let usage = v.get("usage").map(|u| Usage {
        prompt_tokens: u.get("prompt_tokens").and_then(Value::as_u64).unwrap_or(0),
        completion_tokens: u.get("completion_tokens").and_then(Value::as_u64).unwrap_or(0),
    });
    Ok(BackendResponse { text: content.to_string(), usage, latency_ms: 0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::TaskKind;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn backoff_grows_and_never_shrinks() {
        let policy = RetryPolicy::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut prev = Duration::ZERO;
        for retry in 0..policy.max_retries {
            let d = policy.delay(retry, None, prev, &mut rng);
            let nominal = 2f64.powi(retry as i32);
            assert!(d >= prev);
            assert!(d.as_secs_f64() <= nominal * 1.2 + 1e-9);
            prev = d;
        }
        // retry-after wins, unless it would shrink the delay
        assert_eq!(policy.delay(0, Some(Duration::from_secs(7)), Duration::ZERO, &mut rng), Duration::from_secs(7));
        assert_eq!(
            policy.delay(3, Some(Duration::from_secs(1)), Duration::from_secs(5), &mut rng),
            Duration::from_secs(5)
        );
    }

    #[test]
    fn wire_shape() {
        let cfg = HttpConfig { endpoint: "http://localhost:1/v1".into(), model: "m".into(), ..Default::default() };
        let backend = HttpBackend::with_key(&cfg, "k".into(), RetryPolicy::default()).unwrap();
        let req = BackendRequest::new(
            TaskKind::Critique,
            vec![Message::user("plain"), Message::user_with_image("look", vec![0x89, b'P', b'N', b'G'])],
            0.0,
        );
        let body = backend.request_body(&req);
        assert_eq!(body["model"], "m");
        assert_eq!(body["temperature"], 0.0);
        assert_eq!(body["messages"][0]["content"], "plain");
        assert_eq!(body["messages"][1]["content"][1]["image_url"]["url"], "data:image/png;base64,iVBORw==");
    }

    #[test]
    fn response_parsing() {
        let ok = parse_response(
            r#"{"choices":[{"message":{"content":"hi"}}],"usage":{"prompt_tokens":3,"completion_tokens":1}}"#,
        )
        .unwrap();
        assert_eq!(ok.text, "hi");
        assert_eq!(ok.usage, Some(Usage { prompt_tokens: 3, completion_tokens: 1 }));
        assert!(matches!(parse_response(r#"{"choices":[]}"#), Err(BackendError::Protocol(_))));
    }

    #[test]
    fn config_errors() {
        let cfg = HttpConfig::default();
        assert_eq!(
            HttpBackend::with_key(&cfg, "k".into(), RetryPolicy::default()).unwrap_err(),
            HttpConfigError::MissingEndpoint
        );
        let cfg = HttpConfig { api_key_env: "SVGREFINE_TEST_UNSET_KEY_VAR".into(), ..Default::default() };
        assert_eq!(
            HttpBackend::from_config(&cfg).unwrap_err(),
            HttpConfigError::MissingKey("SVGREFINE_TEST_UNSET_KEY_VAR".into())
        );
    }
}
