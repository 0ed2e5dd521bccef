use super::PreferencePair;
use crate::refine::{CritiqueEntry, LoopTranscript, TerminatedBy};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetKind {
    Direct,
    Critique,
    Correction,
    Pref,
}

impl DatasetKind {
    pub const ALL: [DatasetKind; 4] =
        [DatasetKind::Direct, DatasetKind::Critique, DatasetKind::Correction, DatasetKind::Pref];

    pub fn file_name(self) -> &'static str {
        match self {
            DatasetKind::Direct => "direct.jsonl",
            DatasetKind::Critique => "critique.jsonl",
            DatasetKind::Correction => "correction.jsonl",
            DatasetKind::Pref => "pref.jsonl",
        }
    }
}

/// One JSONL line. The file a record lives in determines its variant, so
/// lines carry only the fields.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
#[serde(untagged)]
pub enum DatasetRecord {
    DirectGen { prompt: String, svg: String },
    Critique { prompt: String, image_path: String, critique_json: String },
    Correction { prompt: String, draft_svg: String, critique_json: String, target_svg: String },
    Pref { prompt: String, chosen: String, rejected: String },
}

impl DatasetRecord {
    pub fn kind(&self) -> DatasetKind {
        match self {
            DatasetRecord::DirectGen { .. } => DatasetKind::Direct,
            DatasetRecord::Critique { .. } => DatasetKind::Critique,
            DatasetRecord::Correction { .. } => DatasetKind::Correction,
            DatasetRecord::Pref { .. } => DatasetKind::Pref,
        }
    }

    fn parse_line(kind: DatasetKind, line: &str) -> serde_json::Result<Self> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Direct {
            prompt: String,
            svg: String,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Crit {
            prompt: String,
            image_path: String,
            critique_json: String,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Corr {
            prompt: String,
            draft_svg: String,
            critique_json: String,
            target_svg: String,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Pref {
            prompt: String,
            chosen: String,
            rejected: String,
        }
        Ok(match kind {
            DatasetKind::Direct => {
                let r: Direct = serde_json::from_str(line)?;
                DatasetRecord::DirectGen { prompt: r.prompt, svg: r.svg }
            }
            DatasetKind::Critique => {
                let r: Crit = serde_json::from_str(line)?;
                DatasetRecord::Critique { prompt: r.prompt, image_path: r.image_path, critique_json: r.critique_json }
            }
            DatasetKind::Correction => {
                let r: Corr = serde_json::from_str(line)?;
                DatasetRecord::Correction {
                    prompt: r.prompt,
                    draft_svg: r.draft_svg,
                    critique_json: r.critique_json,
                    target_svg: r.target_svg,
                }
            }
            DatasetKind::Pref => {
                let r: Pref = serde_json::from_str(line)?;
                DatasetRecord::Pref { prompt: r.prompt, chosen: r.chosen, rejected: r.rejected }
            }
        })
    }
}

impl From<&PreferencePair> for DatasetRecord {
    fn from(p: &PreferencePair) -> Self {
        DatasetRecord::Pref { prompt: p.prompt.clone(), chosen: p.chosen_svg.clone(), rejected: p.rejected_svg.clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub count: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub files: BTreeMap<String, FileEntry>,
    pub pref_duplicates_dropped: usize,
}

/// Writes the four JSONL files plus `manifest.json`. Repeated
/// `(prompt, chosen, rejected)` preference lines are written once.
pub fn export_datasets(records: &[DatasetRecord], out_dir: &Path) -> io::Result<Manifest> {
    fs::create_dir_all(out_dir)?;
    let mut seen_pref = HashSet::new();
    let mut dropped = 0;
    let mut files = BTreeMap::new();
    for kind in DatasetKind::ALL {
        let mut body = String::new();
        let mut count = 0;
        for r in records.iter().filter(|r| r.kind() == kind) {
            if kind == DatasetKind::Pref && !seen_pref.insert(r) {
                dropped += 1;
                continue;
            }
            body.push_str(&serde_json::to_string(r).map_err(io::Error::other)?);
            body.push('\n');
            count += 1;
        }
        fs::write(out_dir.join(kind.file_name()), &body)?;
        let sha256 = Sha256::digest(body.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        files.insert(kind.file_name().to_string(), FileEntry { count, sha256 });
    }
    if dropped > 0 {
        tracing::info!(dropped, "duplicate preference pairs dropped");
    }
    let manifest = Manifest { files, pref_duplicates_dropped: dropped };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(out_dir.join("manifest.json"), text)?;
    Ok(manifest)
}

/// Reads back every record, in the file order used by [`export_datasets`].
/// Missing files count as empty.
pub fn read_datasets(dir: &Path) -> io::Result<Vec<DatasetRecord>> {
    let mut out = Vec::new();
    for kind in DatasetKind::ALL {
        let path = dir.join(kind.file_name());
        let text = match fs::read_to_string(&path) {
            Ok(t) => t,
            Err(e) if e.kind() == io::ErrorKind::NotFound => continue,
            Err(e) => return Err(e),
        };
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let rec = DatasetRecord::parse_line(kind, line).map_err(|e| {
                io::Error::new(io::ErrorKind::InvalidData, format!("{}:{}: {e}", path.display(), n + 1))
            })?;
            out.push(rec);
        }
    }
    Ok(out)
}

/// SFT records from one loop run: a critique record per parsed critique, a
/// correction record per earlier draft that the final output improved on,
/// and a direct record when the run reached the threshold.
pub fn records_from_transcript(t: &LoopTranscript, image_dir: &str) -> Vec<DatasetRecord> {
    let text_of = |i: usize| {
        let it = &t.iterations[i];
        it.normalized_svg.clone().unwrap_or_else(|| it.svg_text.clone())
    };
    let mut out = Vec::new();
    for it in &t.iterations {
        if let (CritiqueEntry::Parsed { report }, Some(image)) = (&it.critique, &it.image_ref) {
            out.push(DatasetRecord::Critique {
                prompt: t.prompt.clone(),
                image_path: format!("{image_dir}/{image}"),
                critique_json: serde_json::to_string(report).expect("report serializes"),
            });
        }
    }
    let (Some(final_idx), Some(final_score)) = (t.final_iteration, t.final_score) else {
        return out;
    };
    let final_pos = t.iterations.iter().position(|it| it.index == final_idx).expect("final iteration recorded");
    if t.iterations[final_pos].normalized_svg.is_none() {
        return out;
    }
    let target = text_of(final_pos);
    for (pos, it) in t.iterations[..final_pos].iter().enumerate() {
        let report = match &it.critique {
            CritiqueEntry::Parsed { report } | CritiqueEntry::RenderFailed { report } => report,
            _ => continue,
        };
        if report.score < final_score {
            out.push(DatasetRecord::Correction {
                prompt: t.prompt.clone(),
                draft_svg: text_of(pos),
                critique_json: serde_json::to_string(report).expect("report serializes"),
                target_svg: target.clone(),
            });
        }
    }
    if t.terminated_by == TerminatedBy::Threshold {
        out.push(DatasetRecord::DirectGen { prompt: t.prompt.clone(), svg: target });
    }
    out
}
