//! SVG canonicalization, rasterization, and the tooling around an iterative
//! generate/critique/refine loop and preference-pair construction.

pub mod backend;
pub mod geom;
pub mod metrics;
pub mod normalize;
pub mod parse;
pub mod prefdata;
pub mod raster;
pub mod refine;
pub mod synth;

pub use geom::{Affine, Point};
pub use normalize::{
    canonicalize, normalize_pipeline, CanonicalDocument, CanonicalPath, NormalizeConfig, Normalized, PathCommand,
    RejectReason,
};
pub use parse::{parse_document, ParseError, RawCommand, RawDocument, Rgb};
pub use raster::{render, render_check, Raster, RasterOptions, RenderCheck};
