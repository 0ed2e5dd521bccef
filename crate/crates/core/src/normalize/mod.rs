//! Canonicalization pipeline.
//!
//! Raw SVG goes through: shape conversion, group/transform flattening,
//! absolutization, reduction to the `M L C A Z` vocabulary, rescaling onto a
//! `0 0 200 200` canvas, integer quantization, sample filters and finally a
//! byte-deterministic serialization with `fill` written before `d`.

mod absolutize;
mod canvas;
mod filter;
mod restrict;
mod serialize;
mod shapes;
mod tree;

pub use absolutize::absolutize;
pub use canvas::{quantize, rescale_viewbox};
pub use filter::{filter_sample, NormalizeConfig, DEFAULT_TOKEN_LIMIT};
pub use restrict::restrict_vocabulary;
pub use serialize::{serialize_canonical, CANONICAL_FOOTER, CANONICAL_HEADER};
pub use shapes::shapes_to_paths;
pub use tree::{flatten_tree, FlatPath, FlatTree};

use crate::geom::Point;
use crate::parse::{parse_document, Rgb};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Side length of the canonical canvas.
pub const CANVAS_SIZE: f64 = 200.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSegment {
    pub rx: f64,
    pub ry: f64,
    /// x-axis rotation in degrees
    pub phi: f64,
    pub large_arc: bool,
    pub sweep: bool,
    pub to: Point,
}

/// The five-command canonical vocabulary, absolute coordinates only.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PathCommand {
    Move(Point),
    Line(Point),
    Cubic(Point, Point, Point),
    Arc(ArcSegment),
    Close,
}

impl PathCommand {
    pub fn letter(&self) -> char {
        match self {
            PathCommand::Move(_) => 'M',
            PathCommand::Line(_) => 'L',
            PathCommand::Cubic(..) => 'C',
            PathCommand::Arc(_) => 'A',
            PathCommand::Close => 'Z',
        }
    }

    /// Applies `f` to every coordinate-like point (endpoints and controls).
    pub(crate) fn map_points(&mut self, mut f: impl FnMut(Point) -> Point) {
        match self {
            PathCommand::Move(p) | PathCommand::Line(p) => *p = f(*p),
            PathCommand::Cubic(c1, c2, p) => {
                *c1 = f(*c1);
                *c2 = f(*c2);
                *p = f(*p);
            }
            PathCommand::Arc(a) => a.to = f(a.to),
            PathCommand::Close => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalPath {
    pub fill: Rgb,
    pub commands: Vec<PathCommand>,
}

/// A document on the fixed `0 0 200 200` canvas.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CanonicalDocument {
    pub paths: Vec<CanonicalPath>,
}

impl CanonicalDocument {
    pub fn distinct_fills(&self) -> usize {
        let mut fills: Vec<Rgb> = self.paths.iter().map(|p| p.fill).collect();
        fills.sort();
        fills.dedup();
        fills.len()
    }

    pub fn command_histogram(&self) -> BTreeMap<String, usize> {
        let mut hist = BTreeMap::new();
        for cmd in self.paths.iter().flat_map(|p| &p.commands) {
            *hist.entry(cmd.letter().to_string()).or_insert(0) += 1;
        }
        hist
    }

    pub fn command_count(&self) -> usize {
        self.paths.iter().map(|p| p.commands.len()).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RejectReason {
    Monochrome,
    NonRenderable { detail: String },
    TooLong { token_estimate: usize, limit: usize },
    UnsupportedPaint { paint: String },
    UnsupportedElement { element: String },
    Empty,
}

impl RejectReason {
    pub fn non_renderable(detail: impl Into<String>) -> Self {
        RejectReason::NonRenderable { detail: detail.into() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RejectReason::Monochrome => "monochrome",
            RejectReason::NonRenderable { .. } => "non_renderable",
            RejectReason::TooLong { .. } => "too_long",
            RejectReason::UnsupportedPaint { .. } => "unsupported_paint",
            RejectReason::UnsupportedElement { .. } => "unsupported_element",
            RejectReason::Empty => "empty",
        }
    }
}

impl fmt::Display for RejectReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectReason::Monochrome => f.write_str("monochrome"),
            RejectReason::NonRenderable { detail } => write!(f, "{detail}"),
            RejectReason::TooLong { token_estimate, limit } => {
                write!(f, "too-long: {token_estimate} tokens > {limit}")
            }
            RejectReason::UnsupportedPaint { paint } => write!(f, "unsupported-paint: {paint}"),
            RejectReason::UnsupportedElement { element } => write!(f, "unsupported-element: {element}"),
            RejectReason::Empty => f.write_str("empty"),
        }
    }
}

/// Geometry-only result of the pipeline, before any sample filter.
#[derive(Debug, Clone, PartialEq)]
pub struct Canonicalized {
    pub document: CanonicalDocument,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleStats {
    pub paths: usize,
    pub commands: usize,
    pub command_histogram: BTreeMap<String, usize>,
    pub colors: usize,
    pub token_estimate: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub text: String,
    pub document: CanonicalDocument,
    pub stats: SampleStats,
    pub warnings: Vec<String>,
}

/// Parse through quantization. Used wherever a renderable form is needed
/// without applying the dataset filters (loop drafts, render checks).
pub fn canonicalize(text: &str) -> Result<Canonicalized, RejectReason> {
    let raw = parse_document(text).map_err(|e| RejectReason::non_renderable(format!("parse: {e}")))?;
    let view_box = raw.view_box;
    let raw = shapes_to_paths(raw)?;
    let FlatTree { paths, mut warnings } = flatten_tree(raw)?;

    let mut canonical = Vec::with_capacity(paths.len());
    for flat in paths {
        let absolute = absolutize(&flat.commands)?;
        let commands = restrict_vocabulary(&absolute);
        if !commands.is_empty() {
            canonical.push(CanonicalPath { fill: flat.fill, commands });
        }
    }
    rescale_viewbox(&mut canonical, &view_box)?;
    quantize(&mut canonical);
    warnings.sort();
    warnings.dedup();
    Ok(Canonicalized { document: CanonicalDocument { paths: canonical }, warnings })
}

pub fn normalize_pipeline(text: &str, cfg: &NormalizeConfig) -> Result<Normalized, RejectReason> {
    let Canonicalized { document, warnings } = canonicalize(text)?;
    let serialized = serialize_canonical(&document);
    let token_estimate = filter_sample(&document, &serialized, cfg)?;
    let stats = SampleStats {
        paths: document.paths.len(),
        commands: document.command_count(),
        command_histogram: document.command_histogram(),
        colors: document.distinct_fills(),
        token_estimate,
    };
    Ok(Normalized { text: serialized, document, stats, warnings })
}
