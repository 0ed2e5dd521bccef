//! Message templates for the three roles. The wording is fixed; a model
//! trained on these formats depends on it.

use crate::backend::{BackendRequest, Message, TaskKind};

const GENERATION_LEAD: &str = "Please generate an SVG icon that meets the following description: ";

const CORRECTION_LEAD: &str = "Please analyze all the information provided below and generate a final, high-quality SVG code. The original design goal was:";
const DRAFT_LABEL: &str = "A draft SVG code that needs improvement is as follows:";
const CRITIQUE_LABEL: &str = "An expert critique of this draft is:";
const SUGGESTIONS_LABEL: &str = "Specific modification suggestions:";

pub fn generation_text(prompt: &str) -> String {
    format!("{GENERATION_LEAD}{prompt}")
}

pub fn critique_text(prompt: &str) -> String {
    format!(
        "You are a professional SVG design critic. Please analyze the input AI-generated SVG draft <image> \
according to the \"Original Design Prompt\". Original Design Prompt: \"{prompt}\" \
Your task is to output a structured critique report in JSON format (score, critique, suggestions).\n\n\
Return one JSON object with exactly these fields:\n\
- \"score\": a number from 0.0 to 10.0 rating the draft overall\n\
- \"critique\": a string assessing prompt adherence, color, composition and geometry\n\
- \"suggestions\": a string with concrete SVG edits, or an affirmative note if none are needed"
    )
}

pub fn scoring_text(prompt: &str, k: usize) -> String {
    let keys: Vec<String> = (1..=k).map(|i| format!("  \"image_{i}_score\": [Score]")).collect();
    format!(
        "I used this prompt: {prompt}\n\n\
Rate the {k} SVG images I'm uploading from 1-100 based on that prompt. Ensure the scores are differentiated.\n\n\
Evaluate based on:\n\
- Prompt Adherence: match with the prompt's elements and mood.\n\
- Visual Aesthetics: color, composition, visual impact.\n\
- Execution Quality: creativity and technical quality (clean SVG, no flaws).\n\n\
Provide only JSON in this exact format. No other text.\n\n{{\n{}\n}}",
        keys.join(",\n")
    )
}

/// A fence of backticks longer than any backtick run inside `body` (at least three).
fn fence_for(body: &str) -> String {
    let longest = body.split(|c| c != '`').map(str::len).max().unwrap_or(0);
    "`".repeat((longest + 1).max(3))
}

fn push_section(out: &mut String, label: &str, body: &str) {
    let fence = fence_for(body);
    out.push_str(label);
    out.push('\n');
    out.push_str(&fence);
    out.push('\n');
    out.push_str(body);
    out.push('\n');
    out.push_str(&fence);
}

/// Four fenced sections in fixed order: goal, draft, critique, suggestions.
pub fn correction_text(prompt: &str, draft_svg: &str, critique: &str, suggestions: &str) -> String {
    let suggestions = if suggestions.trim().is_empty() { "none" } else { suggestions };
    let mut out = String::new();
    push_section(&mut out, CORRECTION_LEAD, prompt);
    out.push_str("\n\n");
    push_section(&mut out, DRAFT_LABEL, draft_svg);
    out.push_str("\n\n");
    push_section(&mut out, CRITIQUE_LABEL, critique);
    out.push_str("\n\n");
    push_section(&mut out, SUGGESTIONS_LABEL, suggestions);
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorrectionSections {
    pub prompt: String,
    pub draft_svg: String,
    pub critique: String,
    pub suggestions: String,
}

/// Inverse of [`correction_text`].
pub fn parse_correction_text(text: &str) -> Option<CorrectionSections> {
    let mut rest = text;
    let mut bodies = Vec::with_capacity(4);
    for (i, label) in [CORRECTION_LEAD, DRAFT_LABEL, CRITIQUE_LABEL, SUGGESTIONS_LABEL].into_iter().enumerate() {
        if i > 0 {
            rest = rest.strip_prefix("\n\n")?;
        }
        rest = rest.strip_prefix(label)?.strip_prefix('\n')?;
        let fence_len = rest.bytes().take_while(|&b| b == b'`').count();
        if fence_len < 3 {
            return None;
        }
        let fence = &rest[..fence_len];
        rest = rest[fence_len..].strip_prefix('\n')?;
        let close = format!("\n{fence}");
        let end = rest.find(&close)?;
        bodies.push(rest[..end].to_string());
        rest = &rest[end + close.len()..];
    }
    if !rest.is_empty() {
        return None;
    }
    let mut it = bodies.into_iter();
    Some(CorrectionSections {
        prompt: it.next()?,
        draft_svg: it.next()?,
        critique: it.next()?,
        suggestions: it.next()?,
    })
}

pub fn generation_request(prompt: &str, temperature: f64) -> BackendRequest {
    BackendRequest::new(TaskKind::Generate, vec![Message::user(generation_text(prompt))], temperature)
}

pub fn critique_request(prompt: &str, png: Vec<u8>, temperature: f64) -> BackendRequest {
    BackendRequest::new(TaskKind::Critique, vec![Message::user_with_image(critique_text(prompt), png)], temperature)
}

pub fn correction_request(
    prompt: &str,
    draft: &str,
    critique: &str,
    suggestions: &str,
    temperature: f64,
) -> BackendRequest {
    BackendRequest::new(
        TaskKind::Refine,
        vec![Message::user(correction_text(prompt, draft, critique, suggestions))],
        temperature,
    )
}

/// One text message followed by one message per image.
pub fn scoring_request(prompt: &str, pngs: Vec<Vec<u8>>, temperature: f64) -> BackendRequest {
    let mut messages = vec![Message::user(scoring_text(prompt, pngs.len()))];
    messages
        .extend(pngs.into_iter().enumerate().map(|(i, png)| Message::user_with_image(format!("image_{}", i + 1), png)));
    BackendRequest::new(TaskKind::Score, messages, temperature)
}
