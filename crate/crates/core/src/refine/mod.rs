//! The generate → render → critique → refine loop as a sequential state
//! machine over a [`Backend`].

mod critique;
mod prompts;

pub use critique::{first_json_object, parse_critique, CritiqueReport, ParseFailure};
pub use prompts::{
    correction_request, correction_text, critique_request, critique_text, generation_request, generation_text,
    parse_correction_text, scoring_request, scoring_text, CorrectionSections,
};

use crate::backend::{Backend, BackendError, BackendRequest};
use crate::normalize::{canonicalize, serialize_canonical};
use crate::raster::{encode_png, render, RasterOptions, FEEDBACK_SIZE};
use serde::{Deserialize, Serialize};
use std::sync::atomic::{AtomicU64, Ordering};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LoopConfig {
    /// Refinement rounds after the initial draft.
    pub n_max: u32,
    pub tau: f64,
    pub gen_temperature: f64,
    pub critique_temperature: f64,
    pub refine_temperature: f64,
    pub render_size: u32,
    pub critique_parse_retries: u32,
    pub max_output_tokens: u32,
}

impl Default for LoopConfig {
    fn default() -> Self {
        LoopConfig {
            n_max: 3,
            tau: 9.5,
            gen_temperature: 0.5,
            critique_temperature: 0.0,
            refine_temperature: 0.0,
            render_size: FEEDBACK_SIZE,
            critique_parse_retries: 2,
            max_output_tokens: crate::backend::DEFAULT_MAX_OUTPUT_TOKENS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoopError {
    #[error("prompt is empty")]
    EmptyPrompt,
    #[error("invalid loop config: {0}")]
    InvalidConfig(String),
}

impl LoopConfig {
    pub fn validate(&self) -> Result<(), LoopError> {
        if !(0.0..=10.0).contains(&self.tau) {
            return Err(LoopError::InvalidConfig(format!("tau {} outside [0, 10]", self.tau)));
        }
        for (name, t) in [
            ("gen_temperature", self.gen_temperature),
            ("critique_temperature", self.critique_temperature),
            ("refine_temperature", self.refine_temperature),
        ] {
            if !(0.0..=2.0).contains(&t) {
                return Err(LoopError::InvalidConfig(format!("{name} {t} outside [0, 2]")));
            }
        }
        if self.render_size == 0 {
            return Err(LoopError::InvalidConfig("render_size must be positive".into()));
        }
        Ok(())
    }
}

/// Millisecond timestamps for transcripts.
pub trait Clock: Send + Sync {
    fn now_ms(&self) -> u64;
}

/// Wall-clock time since the Unix epoch.
#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_millis() as u64)
    }
}

/// A counter that advances by one per reading, for reproducible transcripts.
#[derive(Debug, Default)]
pub struct LogicalClock(AtomicU64);

impl Clock for LogicalClock {
    fn now_ms(&self) -> u64 {
        self.0.fetch_add(1, Ordering::Relaxed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminatedBy {
    Threshold,
    MaxIterations,
    BackendFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Continue,
    Stop(TerminatedBy),
}

/// `n` is the index of the generation just critiqued (0 = initial draft).
pub fn should_terminate(n: u32, score: f64, cfg: &LoopConfig) -> Decision {
    if score >= cfg.tau {
        Decision::Stop(TerminatedBy::Threshold)
    } else if n >= cfg.n_max {
        Decision::Stop(TerminatedBy::MaxIterations)
    } else {
        Decision::Continue
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CritiqueEntry {
    Parsed {
        report: CritiqueReport,
    },
    /// Rendering failed, so no critic was asked; the report is synthetic.
    RenderFailed {
        report: CritiqueReport,
    },
    /// The critic never produced a valid report; counted as score 0.
    ParseFailure {
        failure: ParseFailure,
        raw: String,
    },
    BackendFailure {
        error: BackendError,
    },
}

impl CritiqueEntry {
    pub fn score(&self) -> Option<f64> {
        match self {
            CritiqueEntry::Parsed { report } | CritiqueEntry::RenderFailed { report } => Some(report.score),
            CritiqueEntry::ParseFailure { .. } => Some(0.0),
            CritiqueEntry::BackendFailure { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub index: u32,
    pub svg_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized_svg: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalize_error: Option<String>,
    pub render_ok: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub render_detail: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image_ref: Option<String>,
    pub critique: CritiqueEntry,
    /// Extra critique requests sent after unparseable replies.
    pub reasks: u32,
    pub started_ms: u64,
    pub ended_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopTranscript {
    pub prompt: String,
    pub iterations: Vec<IterationRecord>,
    pub terminated_by: TerminatedBy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<BackendError>,
    pub final_iteration: Option<u32>,
    pub final_svg: Option<String>,
    pub final_score: Option<f64>,
}

impl LoopTranscript {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("transcript serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopRun {
    pub transcript: LoopTranscript,
    /// `(image_ref, png bytes)` for every rendered generation.
    pub images: Vec<(String, Vec<u8>)>,
}

/// The `<svg ... </svg>` span of a model reply, or the whole reply.
pub fn extract_svg(text: &str) -> &str {
    match (text.find("<svg"), text.rfind("</svg>")) {
        (Some(a), Some(b)) if b > a => &text[a..b + "</svg>".len()],
        _ => text.trim(),
    }
}

pub const RENDER_FAILED_SUGGESTION: &str = "produce valid SVG markup with at least one filled shape inside the viewBox";

/// Renders for the critic. Returns the canonical text (if normalization
/// worked) and either PNG bytes or a failure detail.
pub fn render_for_feedback(svg: &str, size: u32) -> (Option<String>, Result<Vec<u8>, String>) {
    match canonicalize(svg) {
        Err(reason) => (None, Err(reason.to_string())),
        Ok(c) => {
            let text = serialize_canonical(&c.document);
            let rendered = render(&c.document, &RasterOptions::feedback(size));
            if rendered.painted_pixels == 0 {
                (Some(text), Err("no-visible-geometry".into()))
            } else {
                (Some(text), Ok(encode_png(&rendered.raster)))
            }
        }
    }
}

fn call(backend: &dyn Backend, mut req: BackendRequest, cfg: &LoopConfig) -> Result<String, BackendError> {
    req.max_output_tokens = cfg.max_output_tokens;
    backend.complete(&req).map(|r| r.text)
}

pub fn run_loop(
    prompt: &str,
    backend: &dyn Backend,
    cfg: &LoopConfig,
    clock: &dyn Clock,
) -> Result<LoopRun, LoopError> {
    if prompt.trim().is_empty() {
        return Err(LoopError::EmptyPrompt);
    }
    cfg.validate()?;
    let mut iterations: Vec<IterationRecord> = Vec::new();
    let mut images = Vec::new();
    let mut failure = None;
    let mut terminated_by = TerminatedBy::MaxIterations;

    for n in 0..=cfg.n_max {
        let started_ms = clock.now_ms();
        let request = match iterations.last() {
            None => generation_request(prompt, cfg.gen_temperature),
            Some(prev) => {
                let (critique, suggestions) = match &prev.critique {
                    CritiqueEntry::Parsed { report } | CritiqueEntry::RenderFailed { report } => {
                        (report.critique.clone(), report.suggestions.clone())
                    }
                    CritiqueEntry::ParseFailure { failure, .. } => {
                        (format!("critique unavailable: {failure}"), String::new())
                    }
                    CritiqueEntry::BackendFailure { .. } => unreachable!("loop stops on backend failure"),
                };
                correction_request(prompt, &prev.svg_text, &critique, &suggestions, cfg.refine_temperature)
            }
        };
        let reply = match call(backend, request, cfg) {
            Ok(t) => t,
            Err(e) => {
                tracing::warn!(iteration = n, error = %e, "generation failed");
                failure = Some(e);
                terminated_by = TerminatedBy::BackendFailure;
                break;
            }
        };
        let svg_text = extract_svg(&reply).to_string();
        let (normalized_svg, rendered) = render_for_feedback(&svg_text, cfg.render_size);
        let normalize_error = match &normalized_svg {
            None => rendered.as_ref().err().cloned(),
            Some(_) => None,
        };

        let mut reasks = 0;
        let (render_ok, render_detail, image_ref, critique) = match rendered {
            Err(detail) => {
                let report = CritiqueReport {
                    score: 0.0,
                    critique: format!("render failed: {detail}"),
                    suggestions: RENDER_FAILED_SUGGESTION.to_string(),
                };
                (false, Some(detail), None, CritiqueEntry::RenderFailed { report })
            }
            Ok(png) => {
                let image_ref = format!("iter{n}.png");
                images.push((image_ref.clone(), png.clone()));
                let mut entry;
                loop {
                    let req = critique_request(prompt, png.clone(), cfg.critique_temperature);
                    entry = match call(backend, req, cfg) {
                        Err(error) => CritiqueEntry::BackendFailure { error },
                        Ok(raw) => match parse_critique(&raw) {
                            Ok(report) => CritiqueEntry::Parsed { report },
                            Err(failure) => CritiqueEntry::ParseFailure { failure, raw },
                        },
                    };
                    if matches!(entry, CritiqueEntry::ParseFailure { .. }) && reasks < cfg.critique_parse_retries {
                        reasks += 1;
                        continue;
                    }
                    break;
                }
                (true, None, Some(image_ref), entry)
            }
        };
        let score = critique.score();
        if let CritiqueEntry::BackendFailure { error } = &critique {
            failure = Some(error.clone());
        }
        iterations.push(IterationRecord {
            index: n,
            svg_text,
            normalized_svg,
            normalize_error,
            render_ok,
            render_detail,
            image_ref,
            critique,
            reasks,
            started_ms,
            ended_ms: clock.now_ms(),
        });
        let Some(score) = score else {
            terminated_by = TerminatedBy::BackendFailure;
            break;
        };
        if let Decision::Stop(cause) = should_terminate(n, score, cfg) {
            terminated_by = cause;
            break;
        }
    }

    // best score wins; later iterations win ties
    let best = iterations.iter().filter_map(|it| it.critique.score().map(|s| (s, it))).fold(
        None::<(f64, &IterationRecord)>,
        |acc, (s, it)| match acc {
            Some((bs, _)) if bs > s => acc,
            _ => Some((s, it)),
        },
    );
    let transcript = LoopTranscript {
        prompt: prompt.to_string(),
        final_iteration: best.map(|(_, it)| it.index),
        final_svg: best.map(|(_, it)| it.svg_text.clone()),
        final_score: best.map(|(s, _)| s),
        iterations,
        terminated_by,
        failure,
    };
    Ok(LoopRun { transcript, images })
}
