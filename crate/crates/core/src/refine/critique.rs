use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CritiqueReport {
    pub score: f64,
    pub critique: String,
    pub suggestions: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum ParseFailure {
    NoJson,
    MissingField { field: String },
    OutOfRange { score: f64 },
    NonNumeric,
}

impl fmt::Display for ParseFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseFailure::NoJson => f.write_str("no JSON object"),
            ParseFailure::MissingField { field } => write!(f, "missing field {field}"),
            ParseFailure::OutOfRange { score } => write!(f, "score {score} outside [0, 10]"),
            ParseFailure::NonNumeric => f.write_str("score is not a number"),
        }
    }
}

/// Byte ranges of balanced `{...}` spans, in order of their opening brace.
/// String literals are skipped so braces inside them do not count.
fn balanced_objects(text: &str) -> impl Iterator<Item = &str> {
    let bytes = text.as_bytes();
    (0..bytes.len()).filter(move |&i| bytes[i] == b'{').filter_map(move |start| {
        let mut depth = 0usize;
        let mut in_str = false;
        let mut escaped = false;
        for (off, &b) in bytes[start..].iter().enumerate() {
            if in_str {
                match b {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match b {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        return Some(&text[start..=start + off]);
                    }
                }
                _ => {}
            }
        }
        None
    })
}

/// The first balanced JSON object in `text`; code fences around it are fine.
pub fn first_json_object(text: &str) -> Option<Map<String, Value>> {
    balanced_objects(text).find_map(|s| match serde_json::from_str::<Value>(s) {
        Ok(Value::Object(m)) => Some(m),
        _ => None,
    })
}

fn text_field(obj: &Map<String, Value>, name: &str) -> Result<String, ParseFailure> {
    match obj.get(name) {
        Some(Value::String(s)) => Ok(s.clone()),
        // lists of suggestions are common; keep them one per line
        Some(Value::Array(items)) if items.iter().all(Value::is_string) => {
            Ok(items.iter().filter_map(Value::as_str).collect::<Vec<_>>().join("\n"))
        }
        _ => Err(ParseFailure::MissingField { field: name.to_string() }),
    }
}

pub fn parse_critique(text: &str) -> Result<CritiqueReport, ParseFailure> {
    let obj = first_json_object(text).ok_or(ParseFailure::NoJson)?;
    let score = match obj.get("score") {
        None | Some(Value::Null) => return Err(ParseFailure::MissingField { field: "score".into() }),
        Some(Value::Number(n)) => n.as_f64().ok_or(ParseFailure::NonNumeric)?,
        Some(_) => return Err(ParseFailure::NonNumeric),
    };
    if !(0.0..=10.0).contains(&score) {
        return Err(ParseFailure::OutOfRange { score });
    }
    Ok(CritiqueReport { score, critique: text_field(&obj, "critique")?, suggestions: text_field(&obj, "suggestions")? })
}
