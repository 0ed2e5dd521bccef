use super::{Backend, BackendError, BackendRequest, BackendResponse, TaskKind};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use std::sync::Mutex;

/// One scripted reply: plain text, or an error object such as
/// `{"error": "rate_limited", "retry_after_s": 2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MockEntry {
    Text(String),
    Error {
        error: String,
        #[serde(default)]
        retry_after_s: Option<f64>,
        #[serde(default)]
        status: Option<u16>,
        #[serde(default)]
        detail: Option<String>,
    },
}

impl MockEntry {
    fn into_result(self) -> Result<BackendResponse, BackendError> {
        match self {
            MockEntry::Text(text) => Ok(BackendResponse { text, usage: None, latency_ms: 0 }),
            MockEntry::Error { error, retry_after_s, status, detail } => Err(match error.as_str() {
                "timeout" => BackendError::Timeout,
                "rate_limited" => BackendError::RateLimited { retry_after_s },
                "remote" => BackendError::Remote { status: status.unwrap_or(500), body: detail.unwrap_or_default() },
                _ => BackendError::Protocol(detail.unwrap_or(error)),
            }),
        }
    }
}

/// Per-kind reply queues. `refine` falls back to `generate` when absent;
/// `by_prompt` holds complete scripts selected with [`MockScript::for_prompt`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    #[serde(default)]
    pub generate: Vec<MockEntry>,
    #[serde(default)]
    pub refine: Option<Vec<MockEntry>>,
    #[serde(default)]
    pub critique: Vec<MockEntry>,
    #[serde(default)]
    pub score: Vec<MockEntry>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub by_prompt: BTreeMap<String, MockScript>,
}

impl MockScript {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn for_prompt(&self, prompt: &str) -> MockScript {
        let mut script = self.by_prompt.get(prompt).cloned().unwrap_or_else(|| self.clone());
        script.by_prompt.clear();
        script
    }
}

#[derive(Debug)]
struct Queues {
    queues: BTreeMap<TaskKind, VecDeque<MockEntry>>,
    log: Vec<BackendRequest>,
}

/// Replays a script in order. Deterministic for a fixed request sequence.
#[derive(Debug)]
pub struct MockBackend {
    state: Mutex<Queues>,
    refine_shares_generate: bool,
}

impl MockBackend {
    pub fn new(script: MockScript) -> Self {
        let refine_shares_generate = script.refine.is_none();
        let mut queues = BTreeMap::new();
        queues.insert(TaskKind::Generate, script.generate.into());
        queues.insert(TaskKind::Refine, script.refine.unwrap_or_default().into());
        queues.insert(TaskKind::Critique, script.critique.into());
        queues.insert(TaskKind::Score, script.score.into());
        MockBackend { state: Mutex::new(Queues { queues, log: Vec::new() }), refine_shares_generate }
    }

    /// Every request received so far, in order.
    pub fn requests(&self) -> Vec<BackendRequest> {
        self.state.lock().expect("mock lock").log.clone()
    }

    pub fn remaining(&self, kind: TaskKind) -> usize {
        self.state.lock().expect("mock lock").queues[&self.queue_for(kind)].len()
    }

    fn queue_for(&self, kind: TaskKind) -> TaskKind {
        if kind == TaskKind::Refine && self.refine_shares_generate {
            TaskKind::Generate
        } else {
            kind
        }
    }
}

impl Backend for MockBackend {
    fn complete(&self, req: &BackendRequest) -> Result<BackendResponse, BackendError> {
        req.validate()?;
        let key = self.queue_for(req.kind);
        let mut state = self.state.lock().expect("mock lock");
        state.log.push(req.clone());
        match state.queues.get_mut(&key).and_then(VecDeque::pop_front) {
            Some(entry) => entry.into_result(),
            None => Err(BackendError::Protocol("script-exhausted".into())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::Message;

    fn req(kind: TaskKind) -> BackendRequest {
        BackendRequest::new(kind, vec![Message::user("x")], 0.0)
    }

    #[test]
    fn replays_per_kind_in_order() {
        let script = MockScript::from_json(
            r#"{"generate": ["g0", "g1"], "critique": ["{\"score\": 5}", {"error": "timeout"}]}"#,
        )
        .unwrap();
        let mock = MockBackend::new(script);
        assert_eq!(mock.complete(&req(TaskKind::Critique)).unwrap().text, "{\"score\": 5}");
        assert_eq!(mock.complete(&req(TaskKind::Generate)).unwrap().text, "g0");
        // refine shares the generate queue when not scripted separately
        assert_eq!(mock.complete(&req(TaskKind::Refine)).unwrap().text, "g1");
        assert_eq!(mock.complete(&req(TaskKind::Critique)), Err(BackendError::Timeout));
        assert_eq!(mock.complete(&req(TaskKind::Generate)), Err(BackendError::Protocol("script-exhausted".into())));
        assert_eq!(mock.requests().len(), 5);
    }

    #[test]
    fn identical_scripts_give_identical_sequences() {
        let script = MockScript {
            generate: vec![MockEntry::Text("a".into()), MockEntry::Text("b".into())],
            ..Default::default()
        };
        let run = || {
            let mock = MockBackend::new(script.clone());
            (0..3).map(|_| mock.complete(&req(TaskKind::Generate))).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn per_prompt_scripts() {
        let script =
            MockScript::from_json(r#"{"generate": ["default"], "by_prompt": {"cat": {"generate": ["meow"]}}}"#)
                .unwrap();
        let cat = MockBackend::new(script.for_prompt("cat"));
        assert_eq!(cat.complete(&req(TaskKind::Generate)).unwrap().text, "meow");
        let dog = MockBackend::new(script.for_prompt("dog"));
        assert_eq!(dog.complete(&req(TaskKind::Generate)).unwrap().text, "default");
    }

    #[test]
    fn invalid_temperature_is_refused() {
        let mock = MockBackend::new(MockScript::default());
        let mut r = req(TaskKind::Generate);
        r.temperature = 2.5;
        assert!(matches!(mock.complete(&r), Err(BackendError::Protocol(_))));
    }
}
