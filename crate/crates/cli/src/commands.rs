use crate::config::AppConfig;
use crate::source::BackendSource;
use anyhow::{bail, Context};
use rayon::prelude::*;
use serde_json::json;
use std::fs;
use std::path::{Path, PathBuf};
use svgrefine_core::metrics::{aggregate, file_stats, render_table};
use svgrefine_core::prefdata::{
    build_pairs, export_datasets, records_from_transcript, sample_candidates, score_candidates, DatasetRecord,
    PairMode, SamplingConfig,
};
use svgrefine_core::raster::{encode_png, encode_ppm, render, RasterOptions};
use svgrefine_core::refine::{run_loop, LoopConfig, LoopTranscript, TerminatedBy};
use svgrefine_core::synth::{synth_corpus, synth_prompts};
use svgrefine_core::{canonicalize, normalize_pipeline};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    Partial,
}

impl Outcome {
    fn from_failures(n: usize) -> Self {
        if n == 0 {
            Outcome::Success
        } else {
            Outcome::Partial
        }
    }
}

/// `*.svg` files directly under `dir`, sorted by name.
pub fn svg_files(dir: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg")) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn read_prompts(path: &Path) -> anyhow::Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading prompts {}", path.display()))?;
    let prompts: Vec<String> = text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect();
    if prompts.is_empty() {
        bail!("no prompts in {}", path.display());
    }
    Ok(prompts)
}

fn create_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}

pub struct NormalizeArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    pub report: Option<PathBuf>,
    pub token_limit: Option<usize>,
}

pub fn normalize(args: NormalizeArgs, app: &AppConfig) -> anyhow::Result<Outcome> {
    let cfg = app.normalize.to_config(args.token_limit);
    let files = svg_files(&args.input)?;
    create_dir(&args.output)?;

    let lines: Vec<Result<serde_json::Value, String>> = files
        .par_iter()
        .map(|path| {
            let name = file_name(path);
            let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(match normalize_pipeline(&text, &cfg) {
                Ok(out) => {
                    fs::write(args.output.join(&name), &out.text).map_err(|e| format!("{name}: {e}"))?;
                    for w in &out.warnings {
                        tracing::debug!(file = %name, warning = %w, "normalize warning");
                    }
                    json!({
                        "file": name, "status": "keep", "reason": null,
                        "commands": out.stats.commands, "colors": out.stats.colors,
                        "token_estimate": out.stats.token_estimate,
                    })
                }
                Err(reason) => {
                    tracing::info!(file = %name, reason = %reason, "rejected");
                    json!({
                        "file": name, "status": "reject", "reason": reason.to_string(), "reason_kind": reason.kind(),
                        "commands": null, "colors": null, "token_estimate": null,
                    })
                }
            })
        })
        .collect();

    let mut report = String::new();
    let mut failures = 0;
    let (mut kept, mut rejected) = (0, 0);
    for line in lines {
        match line {
            Ok(v) => {
                if v["status"] == "keep" {
                    kept += 1;
                } else {
                    rejected += 1;
                }
                report.push_str(&v.to_string());
                report.push('\n');
            }
            Err(e) => {
                tracing::error!(error = %e, "sample failed");
                failures += 1;
            }
        }
    }
    let report_path = args.report.unwrap_or_else(|| args.output.join("report.jsonl"));
    write(&report_path, report)?;
    tracing::info!(kept, rejected, failures, "normalize done");
    Ok(Outcome::from_failures(failures))
}

fn render_file(input: &Path, size: u32) -> anyhow::Result<svgrefine_core::Raster> {
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let doc = canonicalize(&text).map_err(|r| anyhow::anyhow!("{}: {r}", input.display()))?;
    Ok(render(&doc.document, &RasterOptions::feedback(size)).raster)
}

pub fn render_one(input: &Path, output: &Path, size: u32) -> anyhow::Result<Outcome> {
    if size == 0 {
        bail!("--size must be positive");
    }
    let text = fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let doc = match canonicalize(&text) {
        Ok(c) => c.document,
        Err(reason) => {
            tracing::error!(file = %input.display(), reason = %reason, "not renderable");
            return Ok(Outcome::Partial);
        }
    };
    let raster = render(&doc, &RasterOptions::feedback(size)).raster;
    let ppm = output.extension().is_some_and(|e| e.eq_ignore_ascii_case("ppm"));
    write(output, if ppm { encode_ppm(&raster) } else { encode_png(&raster) })?;
    Ok(Outcome::Success)
}

pub fn export_renders(input: &Path, output: &Path, size: u32) -> anyhow::Result<Outcome> {
    if size == 0 {
        bail!("--size must be positive");
    }
    let files = svg_files(input)?;
    create_dir(output)?;
    let failures = files
        .par_iter()
        .filter(|path| {
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let result = render_file(path, size)
                .and_then(|raster| write(&output.join(format!("{stem}.png")), encode_png(&raster)));
            if let Err(e) = &result {
                tracing::warn!(error = %e, "render skipped");
            }
            result.is_err()
        })
        .count();
    tracing::info!(rendered = files.len() - failures, failures, "export-renders done");
    Ok(Outcome::from_failures(failures))
}

pub fn stats(
    input: &Path,
    report: &Path,
    table: bool,
    method: Option<String>,
    app: &AppConfig,
) -> anyhow::Result<Outcome> {
    let cfg = app.normalize.to_config(None);
    let files = svg_files(input)?;
    let texts: Vec<anyhow::Result<String>> =
        files.iter().map(|p| fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))).collect();
    let mut failures = 0;
    let texts: Vec<String> =
        texts.into_iter().filter_map(|t| t.map_err(|e| tracing::error!(error = %e, "sample failed")).ok()).collect();
    failures += files.len() - texts.len();
    let per_file: Vec<_> = texts.par_iter().map(|t| file_stats(t, &cfg)).collect();
    let method = method.unwrap_or_else(|| file_name(input));
    let r = aggregate(&method, &per_file).with_context(|| format!("no svg files in {}", input.display()))?;
    write(report, serde_json::to_string_pretty(&r)? + "\n")?;
    if table {
        print!("{}", render_table(std::slice::from_ref(&r)));
    }
    Ok(Outcome::from_failures(failures))
}

pub struct LoopArgs {
    pub prompts: PathBuf,
    pub backend: String,
    pub output: PathBuf,
    pub loop_cfg: LoopConfig,
}

pub fn run_loops(args: LoopArgs, app: &AppConfig) -> anyhow::Result<Outcome> {
    args.loop_cfg.validate()?;
    let prompts = read_prompts(&args.prompts)?;
    let source = BackendSource::parse(&args.backend, app)?;
    create_dir(&args.output)?;

    let results: Vec<anyhow::Result<serde_json::Value>> = prompts
        .par_iter()
        .enumerate()
        .map(|(i, prompt)| {
            let id = format!("{:04}", i + 1);
            let backend = source.for_prompt(prompt);
            let clock = source.clock();
            let run = run_loop(prompt, &*backend, &args.loop_cfg, &*clock)?;
            let dir = args.output.join(&id);
            create_dir(&dir)?;
            write(&dir.join("transcript.json"), run.transcript.to_json() + "\n")?;
            for (name, png) in &run.images {
                write(&dir.join(name), png)?;
            }
            let t = &run.transcript;
            Ok(json!({
                "id": id, "prompt": prompt, "iterations": t.iterations.len(),
                "terminated_by": t.terminated_by, "final_score": t.final_score,
            }))
        })
        .collect();

    let mut index = String::new();
    let mut failures = 0;
    for r in results {
        match r {
            Ok(v) => {
                if v["terminated_by"] == json!(TerminatedBy::BackendFailure) {
                    failures += 1;
                }
                index.push_str(&v.to_string());
                index.push('\n');
            }
            Err(e) => {
                tracing::error!(error = %format!("{e:#}"), "loop failed");
                failures += 1;
            }
        }
    }
    write(&args.output.join("index.jsonl"), index)?;
    Ok(Outcome::from_failures(failures))
}

pub struct PrefArgs {
    pub prompts: PathBuf,
    pub backend: String,
    pub output: PathBuf,
    pub transcripts: Option<PathBuf>,
    pub n: usize,
    pub temperature: f64,
    pub delta: f64,
    pub mode: PairMode,
}

pub fn build_pref(args: PrefArgs, app: &AppConfig) -> anyhow::Result<Outcome> {
    if args.n < 2 {
        bail!("--n must be at least 2");
    }
    if args.delta.is_nan() || args.delta < 0.0 {
        bail!("--delta must be non-negative");
    }
    let prompts = read_prompts(&args.prompts)?;
    let source = BackendSource::parse(&args.backend, app)?;
    create_dir(&args.output)?;
    let sampling = SamplingConfig {
        n: args.n,
        temperature: args.temperature,
        render_size: app.loop_.render_size,
        max_output_tokens: app.loop_.max_output_tokens,
    };

    let per_prompt: Vec<(Vec<DatasetRecord>, String, bool)> = prompts
        .par_iter()
        .enumerate()
        .map(|(i, prompt)| {
            let id = format!("{:04}", i + 1);
            let backend = source.for_prompt(prompt);
            let mut candidates = match sample_candidates(prompt, &id, &*backend, &sampling) {
                Ok(c) => c,
                Err(e) => {
                    tracing::error!(prompt = %id, error = %e, "sampling failed");
                    return (Vec::new(), String::new(), false);
                }
            };
            let mut ok = true;
            if let Err(e) = score_candidates(prompt, &mut candidates, &*backend, app.pref.score_temperature) {
                tracing::error!(prompt = %id, error = %e, "scoring failed");
                ok = false;
            }
            let pairs = build_pairs(prompt, &candidates, args.delta, args.mode);
            let mut log = String::new();
            for c in &candidates {
                log.push_str(&serde_json::to_string(c).expect("candidate serializes"));
                log.push('\n');
            }
            (pairs.iter().map(DatasetRecord::from).collect(), log, ok)
        })
        .collect();

    let mut records = Vec::new();
    let mut candidate_log = String::new();
    let mut failures = 0;
    for (recs, log, ok) in per_prompt {
        records.extend(recs);
        candidate_log.push_str(&log);
        failures += usize::from(!ok);
    }

    if let Some(dir) = &args.transcripts {
        let mut runs: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("listing {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.join("transcript.json").is_file())
            .collect();
        runs.sort();
        for run in runs {
            let path = run.join("transcript.json");
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            match LoopTranscript::from_json(&text) {
                Ok(t) => records.extend(records_from_transcript(&t, &file_name(&run))),
                Err(e) => {
                    tracing::error!(file = %path.display(), error = %e, "bad transcript");
                    failures += 1;
                }
            }
        }
    }

    write(&args.output.join("candidates.jsonl"), candidate_log)?;
    let manifest = export_datasets(&records, &args.output).context("writing datasets")?;
    tracing::info!(files = ?manifest.files.keys().collect::<Vec<_>>(), "datasets written");
    Ok(Outcome::from_failures(failures))
}

pub fn synth(output: &Path, n: usize, seed: u64, prompts: Option<&Path>) -> anyhow::Result<Outcome> {
    create_dir(output)?;
    for (i, svg) in synth_corpus(seed, n).iter().enumerate() {
        write(&output.join(format!("sample_{i:04}.svg")), svg)?;
    }
    if let Some(p) = prompts {
        write(p, synth_prompts(seed, n).join("\n") + "\n")?;
    }
    Ok(Outcome::Success)
}
