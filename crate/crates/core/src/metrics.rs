//! Corpus statistics: render success rate, token estimates, command and
//! color counts, and the table layout of the published comparison.

use crate::normalize::{canonicalize, normalize_pipeline, NormalizeConfig};
use crate::parse::{parse_document, RawElement};
use crate::raster::render_check;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::process::{Command, Stdio};
use thiserror::Error;

pub const DEFAULT_TOKEN_DIVISOR: usize = 3;

/// Sequence-length estimate: `ceil(bytes / divisor)` unless an external
/// tokenizer command is configured.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenCounter {
    pub divisor: usize,
    /// Program and arguments; receives the text on stdin, prints an integer.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
}

impl Default for TokenCounter {
    fn default() -> Self {
        TokenCounter { divisor: DEFAULT_TOKEN_DIVISOR, command: None }
    }
}

impl TokenCounter {
    pub fn proxy(divisor: usize) -> Self {
        TokenCounter { divisor, command: None }
    }

    pub fn count(&self, text: &str) -> usize {
        if let Some(cmd) = &self.command {
            match run_external(cmd, text) {
                Ok(n) => return n,
                Err(e) => tracing::warn!(error = %e, "external tokenizer failed, using byte proxy"),
            }
        }
        token_proxy(text, self.divisor)
    }
}

pub fn token_proxy(text: &str, divisor: usize) -> usize {
    text.len().div_ceil(divisor.max(1))
}

fn run_external(cmd: &[String], text: &str) -> Result<usize, String> {
    let (program, args) = cmd.split_first().ok_or("empty tokenizer command")?;
    let mut child = Command::new(program)
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .map_err(|e| format!("spawn {program}: {e}"))?;
    child.stdin.take().expect("piped stdin").write_all(text.as_bytes()).map_err(|e| format!("write stdin: {e}"))?;
    let out = child.wait_with_output().map_err(|e| format!("wait: {e}"))?;
    if !out.status.success() {
        return Err(format!("exit status {}", out.status));
    }
    String::from_utf8_lossy(&out.stdout).trim().parse().map_err(|e| format!("bad count: {e}"))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MetricsError {
    #[error("empty corpus")]
    EmptyCorpus,
}

/// Render successes out of a total; kept as counts so corpora can be merged exactly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RsrTally {
    pub ok: usize,
    pub total: usize,
}

impl RsrTally {
    pub fn percent(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            100.0 * self.ok as f64 / self.total as f64
        }
    }

    /// Percentage rounded to two decimals.
    pub fn percent_2dp(&self) -> f64 {
        (self.percent() * 100.0).round() / 100.0
    }

    pub fn merge(self, other: RsrTally) -> RsrTally {
        RsrTally { ok: self.ok + other.ok, total: self.total + other.total }
    }
}

pub fn rsr<S: AsRef<str>>(corpus: &[S]) -> Result<RsrTally, MetricsError> {
    if corpus.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let ok = corpus.iter().filter(|t| render_check(t.as_ref()).is_ok()).count();
    Ok(RsrTally { ok, total: corpus.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusReport {
    pub method: String,
    pub n_samples: usize,
    pub rsr: RsrTally,
    pub rsr_percent: f64,
    pub avg_token_estimate: f64,
    /// Command letters as written in the input files.
    pub command_histogram: BTreeMap<String, usize>,
    /// Mean distinct fill count over files that canonicalize.
    pub avg_colors: f64,
    pub n_rejected: usize,
    pub reject_breakdown: BTreeMap<String, usize>,
    pub fid: Option<f64>,
    pub clip_t2i: Option<f64>,
    pub aesthetic: Option<f64>,
    pub hps: Option<f64>,
}

/// Per-file measurements, computed independently so callers can parallelize.
#[derive(Debug, Clone, PartialEq)]
pub struct FileStats {
    pub render_ok: bool,
    pub tokens: usize,
    pub letters: BTreeMap<String, usize>,
    pub colors: Option<usize>,
    pub reject: Option<String>,
}

pub fn file_stats(text: &str, cfg: &NormalizeConfig) -> FileStats {
    let mut letters = BTreeMap::new();
    if let Ok(doc) = parse_document(text) {
        count_letters(&doc.elements, &mut letters);
    }
    FileStats {
        render_ok: render_check(text).is_ok(),
        tokens: cfg.tokens.count(text),
        letters,
        colors: canonicalize(text).ok().map(|c| c.document.distinct_fills()),
        reject: normalize_pipeline(text, cfg).err().map(|r| r.kind().to_string()),
    }
}

fn count_letters(elements: &[RawElement], hist: &mut BTreeMap<String, usize>) {
    for el in elements {
        match el {
            RawElement::Path { commands, .. } => {
                for c in commands {
                    *hist.entry(c.letter.to_string()).or_insert(0) += 1;
                }
            }
            RawElement::Group { children, .. } => count_letters(children, hist),
            _ => {}
        }
    }
}

pub fn aggregate(method: &str, files: &[FileStats]) -> Result<CorpusReport, MetricsError> {
    if files.is_empty() {
        return Err(MetricsError::EmptyCorpus);
    }
    let n = files.len();
    let rsr = RsrTally { ok: files.iter().filter(|f| f.render_ok).count(), total: n };
    let mut command_histogram = BTreeMap::new();
    let mut reject_breakdown = BTreeMap::new();
    for f in files {
        for (k, v) in &f.letters {
            *command_histogram.entry(k.clone()).or_insert(0) += v;
        }
        if let Some(r) = &f.reject {
            *reject_breakdown.entry(r.clone()).or_insert(0) += 1;
        }
    }
    let colored: Vec<usize> = files.iter().filter_map(|f| f.colors).collect();
    let avg_colors = if colored.is_empty() { 0.0 } else { colored.iter().sum::<usize>() as f64 / colored.len() as f64 };
    Ok(CorpusReport {
        method: method.to_string(),
        n_samples: n,
        rsr,
        rsr_percent: rsr.percent_2dp(),
        avg_token_estimate: files.iter().map(|f| f.tokens).sum::<usize>() as f64 / n as f64,
        command_histogram,
        avg_colors,
        n_rejected: reject_breakdown.values().sum(),
        reject_breakdown,
        fid: None,
        clip_t2i: None,
        aesthetic: None,
        hps: None,
    })
}

pub fn corpus_stats<S: AsRef<str>>(
    method: &str,
    corpus: &[S],
    cfg: &NormalizeConfig,
) -> Result<CorpusReport, MetricsError> {
    let files: Vec<FileStats> = corpus.iter().map(|t| file_stats(t.as_ref(), cfg)).collect();
    aggregate(method, &files)
}

const TABLE_HEADER: [&str; 7] = ["Method", "Avg. Token", "RSR%", "FID", "CLIP-T2I", "Aesthetic", "HPS"];

/// Aligned text table with the comparison-table column layout.
/// Columns that need learned models print `n/a`.
pub fn render_table(reports: &[CorpusReport]) -> String {
    let cell = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.2}"));
    let mut rows: Vec<Vec<String>> = vec![TABLE_HEADER.iter().map(|s| s.to_string()).collect()];
    for r in reports {
        rows.push(vec![
            r.method.clone(),
            format!("{:.1}", r.avg_token_estimate),
            format!("{:.2}", r.rsr_percent),
            cell(r.fid),
            cell(r.clip_t2i),
            cell(r.aesthetic),
            cell(r.hps),
        ]);
    }
    let widths: Vec<usize> =
        (0..TABLE_HEADER.len()).map(|i| rows.iter().map(|r| r[i].chars().count()).max().unwrap_or(0)).collect();
    let mut out = String::new();
    for (ri, row) in rows.iter().enumerate() {
        let line: Vec<String> = row.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        out.push_str(line.join(" | ").trim_end());
        out.push('\n');
        if ri == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("-|-"));
            out.push('\n');
        }
    }
    out
}
