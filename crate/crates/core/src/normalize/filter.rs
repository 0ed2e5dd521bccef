use super::{CanonicalDocument, RejectReason};
use crate::metrics::TokenCounter;
use crate::raster::{check_document, RenderCheck};
use serde::{Deserialize, Serialize};

pub const DEFAULT_TOKEN_LIMIT: usize = 8000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizeConfig {
    pub token_limit: usize,
    pub tokens: TokenCounter,
}

impl Default for NormalizeConfig {
    fn default() -> Self {
        NormalizeConfig { token_limit: DEFAULT_TOKEN_LIMIT, tokens: TokenCounter::default() }
    }
}

/// Sample-level gates, checked in a fixed order so every rejection has one
/// primary reason. Returns the token estimate of a kept sample.
pub fn filter_sample(doc: &CanonicalDocument, serialized: &str, cfg: &NormalizeConfig) -> Result<usize, RejectReason> {
    if doc.paths.is_empty() {
        return Err(RejectReason::Empty);
    }
    if doc.distinct_fills() <= 1 {
        return Err(RejectReason::Monochrome);
    }
    let token_estimate = cfg.tokens.count(serialized);
    if token_estimate > cfg.token_limit {
        return Err(RejectReason::TooLong { token_estimate, limit: cfg.token_limit });
    }
    if let RenderCheck::Fail(detail) = check_document(doc) {
        return Err(RejectReason::NonRenderable { detail });
    }
    Ok(token_estimate)
}
