use crate::config::AppConfig;
use anyhow::{bail, Context};
use std::path::Path;
use std::sync::Arc;
use svgrefine_core::backend::{Backend, HttpBackend, MockBackend, MockScript};
use svgrefine_core::refine::{Clock, LogicalClock, SystemClock};

/// Where model replies come from, parsed from `mock:PATH` or `http[:PATH]`.
pub enum BackendSource {
    /// Each prompt gets a fresh backend so runs do not share queues.
    Mock(MockScript),
    Http(Arc<HttpBackend>),
}

impl BackendSource {
    pub fn parse(spec: &str, app: &AppConfig) -> anyhow::Result<Self> {
        let (scheme, rest) = match spec.split_once(':') {
            Some((s, r)) => (s, Some(r)),
            None => (spec, None),
        };
        match (scheme, rest) {
            ("mock", Some(path)) if !path.is_empty() => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading mock script {path}"))?;
                let script = MockScript::from_json(&text).with_context(|| format!("parsing mock script {path}"))?;
                Ok(BackendSource::Mock(script))
            }
            ("http", rest) => {
                let cfg = match rest.filter(|p| !p.is_empty()) {
                    Some(path) => AppConfig::load(Path::new(path))?.backend,
                    None => app.backend.clone(),
                };
                let backend = HttpBackend::from_config(&cfg).context("configuring http backend")?;
                Ok(BackendSource::Http(Arc::new(backend)))
            }
            _ => bail!("backend must be mock:SCRIPT.json or http[:CONFIG.toml], got {spec:?}"),
        }
    }

    pub fn for_prompt(&self, prompt: &str) -> Box<dyn Backend> {
        match self {
            BackendSource::Mock(script) => Box::new(MockBackend::new(script.for_prompt(prompt))),
            BackendSource::Http(b) => Box::new(Arc::clone(b)),
        }
    }

    /// Logical time for scripted runs keeps transcripts byte-identical.
    pub fn clock(&self) -> Box<dyn Clock> {
        match self {
            BackendSource::Mock(_) => Box::new(LogicalClock::default()),
            BackendSource::Http(_) => Box::new(SystemClock),
        }
    }
}
