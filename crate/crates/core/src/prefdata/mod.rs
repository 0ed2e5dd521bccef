//! Preference data: candidate sampling, 1-100 scoring, pair construction,
//! the DPO objective, and JSONL dataset export.

mod dpo;
mod export;

pub use dpo::{
    dpo_loss, dpo_loss_from_margin, dpo_loss_grad, sigmoid, softplus, DpoError, DpoInputs, DpoOutput, DEFAULT_BETA,
};
pub use export::{
    export_datasets, read_datasets, records_from_transcript, DatasetKind, DatasetRecord, FileEntry, Manifest,
};

use crate::backend::{Backend, BackendError};
use crate::refine::{extract_svg, first_json_object, generation_request, render_for_feedback, scoring_request};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::fmt;
use thiserror::Error;

pub const DEFAULT_CANDIDATES: usize = 5;
pub const DEFAULT_SAMPLE_TEMPERATURE: f64 = 0.9;
pub const DEFAULT_DELTA: f64 = 5.0;
pub const SCORE_MIN: f64 = 1.0;
pub const SCORE_MAX: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub prompt_id: String,
    pub index: usize,
    pub svg_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_svg: Option<String>,
    pub renderable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    /// Rendered PNG for the scorer; not persisted.
    #[serde(skip)]
    pub image: Option<Vec<u8>>,
}

impl Candidate {
    /// Canonical text when available, otherwise the text as generated.
    pub fn best_text(&self) -> &str {
        self.normalized_svg.as_deref().unwrap_or(&self.svg_text)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PrefError {
    #[error("need at least 2 candidates, got {0}")]
    TooFewCandidates(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub n: usize,
    pub temperature: f64,
    pub render_size: u32,
    pub max_output_tokens: u32,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n: DEFAULT_CANDIDATES,
            temperature: DEFAULT_SAMPLE_TEMPERATURE,
            render_size: crate::raster::FEEDBACK_SIZE,
            max_output_tokens: crate::backend::DEFAULT_MAX_OUTPUT_TOKENS,
        }
    }
}

/// Draws `cfg.n` generations and render-checks each one.
pub fn sample_candidates(
    prompt: &str,
    prompt_id: &str,
    backend: &dyn Backend,
    cfg: &SamplingConfig,
) -> Result<Vec<Candidate>, PrefError> {
    if cfg.n < 2 {
        return Err(PrefError::TooFewCandidates(cfg.n));
    }
    Ok((0..cfg.n)
        .map(|index| {
            let mut req = generation_request(prompt, cfg.temperature);
            req.max_output_tokens = cfg.max_output_tokens;
            let mut c = Candidate {
                prompt_id: prompt_id.to_string(),
                index,
                svg_text: String::new(),
                normalized_svg: None,
                renderable: false,
                detail: None,
                score: None,
                image: None,
            };
            match backend.complete(&req) {
                Err(e) => c.detail = Some(format!("backend: {e}")),
                Ok(resp) => {
                    c.svg_text = extract_svg(&resp.text).to_string();
                    let (normalized, rendered) = render_for_feedback(&c.svg_text, cfg.render_size);
                    c.normalized_svg = normalized;
                    match rendered {
                        Ok(png) => {
                            c.renderable = true;
                            c.image = Some(png);
                        }
                        Err(detail) => c.detail = Some(detail),
                    }
                }
            }
            c
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ScoringFailure {
    NoJson,
    MissingKey { key: String },
    NonNumeric { key: String },
    OutOfRange { key: String, score: f64 },
    Backend { error: BackendError },
}

impl fmt::Display for ScoringFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScoringFailure::NoJson => f.write_str("no JSON object in scoring reply"),
            ScoringFailure::MissingKey { key } => write!(f, "missing {key}"),
            ScoringFailure::NonNumeric { key } => write!(f, "{key} is not a number"),
            ScoringFailure::OutOfRange { key, score } => write!(f, "{key} = {score} outside 1-100"),
            ScoringFailure::Backend { error } => write!(f, "backend: {error}"),
        }
    }
}

/// Reads `image_1_score .. image_k_score` from a scoring reply.
pub fn parse_scores(text: &str, k: usize) -> Result<Vec<f64>, ScoringFailure> {
    let obj = first_json_object(text).ok_or(ScoringFailure::NoJson)?;
    (1..=k)
        .map(|i| {
            let key = format!("image_{i}_score");
            let v = match obj.get(&key) {
                None => return Err(ScoringFailure::MissingKey { key }),
                Some(Value::Number(n)) => n.as_f64().ok_or(ScoringFailure::NonNumeric { key: key.clone() })?,
                // a single-element list mirrors the `[Score]` placeholder
                Some(Value::Array(a)) if a.len() == 1 && a[0].is_number() => a[0].as_f64().unwrap_or(f64::NAN),
                Some(_) => return Err(ScoringFailure::NonNumeric { key }),
            };
            if !(SCORE_MIN..=SCORE_MAX).contains(&v) {
                return Err(ScoringFailure::OutOfRange { key, score: v });
            }
            Ok(v)
        })
        .collect()
}

/// Scores every renderable candidate with one multi-image request. A
/// malformed reply is re-asked once.
pub fn score_candidates(
    prompt: &str,
    candidates: &mut [Candidate],
    backend: &dyn Backend,
    temperature: f64,
) -> Result<(), ScoringFailure> {
    let slots: Vec<usize> = candidates.iter().enumerate().filter(|(_, c)| c.renderable).map(|(i, _)| i).collect();
    if slots.is_empty() {
        return Ok(());
    }
    let pngs: Vec<Vec<u8>> = slots
        .iter()
        .map(|&i| match &candidates[i].image {
            Some(png) => png.clone(),
            None => render_for_feedback(&candidates[i].svg_text, crate::raster::FEEDBACK_SIZE).1.unwrap_or_default(),
        })
        .collect();
    let req = scoring_request(prompt, pngs, temperature);
    let mut last = ScoringFailure::NoJson;
    for attempt in 0..2 {
        let text = match backend.complete(&req) {
            Ok(r) => r.text,
            Err(error) => return Err(ScoringFailure::Backend { error }),
        };
        match parse_scores(&text, slots.len()) {
            Ok(scores) => {
                for (&i, s) in slots.iter().zip(scores) {
                    candidates[i].score = Some(s);
                }
                return Ok(());
            }
            Err(e) => {
                tracing::warn!(attempt, error = %e, "malformed scoring reply");
                last = e;
            }
        }
    }
    Err(last)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRule {
    RenderSuccess,
    HighScore,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairMode {
    #[default]
    AllPairs,
    BestVsRest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub prompt: String,
    pub chosen_index: usize,
    pub rejected_index: usize,
    pub chosen_svg: String,
    pub rejected_svg: String,
    pub rule: PairRule,
    pub chosen_score: Option<f64>,
    pub rejected_score: Option<f64>,
}

/// Applies the two rules to one unordered pair. Renderability is decided
/// first; scores only matter between two renderable candidates.
pub fn judge(a: &Candidate, b: &Candidate, delta: f64) -> Option<(usize, usize, PairRule)> {
    match (a.renderable, b.renderable) {
        (true, false) => Some((a.index, b.index, PairRule::RenderSuccess)),
        (false, true) => Some((b.index, a.index, PairRule::RenderSuccess)),
        (false, false) => None,
        (true, true) => {
            let (sa, sb) = (a.score?, b.score?);
            if sa - sb > delta {
                Some((a.index, b.index, PairRule::HighScore))
            } else if sb - sa > delta {
                Some((b.index, a.index, PairRule::HighScore))
            } else {
                None
            }
        }
    }
}

pub fn build_pairs(prompt: &str, candidates: &[Candidate], delta: f64, mode: PairMode) -> Vec<PreferencePair> {
    let by_index = |i: usize| candidates.iter().find(|c| c.index == i).expect("index from this set");
    let make = |(w, l, rule): (usize, usize, PairRule)| {
        let (cw, cl) = (by_index(w), by_index(l));
        PreferencePair {
            prompt: prompt.to_string(),
            chosen_index: w,
            rejected_index: l,
            chosen_svg: cw.best_text().to_string(),
            rejected_svg: cl.best_text().to_string(),
            rule,
            chosen_score: cw.score,
            rejected_score: cl.score,
        }
    };
    let mut sorted: Vec<&Candidate> = candidates.iter().collect();
    sorted.sort_by_key(|c| c.index);
    let judged: Vec<(usize, usize, PairRule)> = match mode {
        PairMode::AllPairs => sorted
            .iter()
            .enumerate()
            .flat_map(|(i, a)| sorted[i + 1..].iter().filter_map(move |b| judge(a, b, delta)))
            .collect(),
        PairMode::BestVsRest => {
            // highest score among renderable; lowest index breaks ties
            let best = sorted.iter().filter(|c| c.renderable).fold(None::<&Candidate>, |acc, c| match acc {
                Some(b) if b.score.unwrap_or(f64::NEG_INFINITY) >= c.score.unwrap_or(f64::NEG_INFINITY) => Some(b),
                _ => Some(c),
            });
            match best {
                None => Vec::new(),
                Some(best) => sorted
                    .iter()
                    .filter(|c| c.index != best.index)
                    .filter_map(|c| judge(best, c, delta).filter(|(w, _, _)| *w == best.index))
                    .collect(),
            }
        }
    };
    judged.into_iter().map(make).filter(|p| p.chosen_svg != p.rejected_svg).collect()
}
