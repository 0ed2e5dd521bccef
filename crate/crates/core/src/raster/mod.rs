//! Scanline rasterizer for canonical documents.
//!
//! Paths are flattened to polygons and filled in document order with the
//! nonzero winding rule, sampling at pixel centers. With supersampling on,
//! each pixel is the box-filtered average of a 4×4 sample grid.

mod arc;
mod encode;
mod flatten;

pub use arc::{arc_endpoint_to_center, arc_to_cubics, ArcParam, CenterArc};
pub use encode::{encode_png, encode_ppm};
pub use flatten::{flatten, DEFAULT_TOLERANCE};

use crate::geom::Point;
use crate::normalize::{canonicalize, CanonicalDocument, CANVAS_SIZE};
use crate::parse::Rgb;
use serde::{Deserialize, Serialize};

/// Samples per axis per pixel when supersampling.
pub const SUPERSAMPLE: u32 = 4;

/// Critic feedback images.
pub const FEEDBACK_SIZE: u32 = 512;

/// Render-check resolution: one pixel per canvas unit.
pub const CHECK_SIZE: u32 = 200;

/// Flattening error budget in device samples.
const DEVICE_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Raster {
    pub width: u32,
    pub height: u32,
    pub pixels: Vec<Rgb>,
    pub background: Rgb,
}

impl Raster {
    pub fn new(width: u32, height: u32, background: Rgb) -> Self {
        Raster { width, height, pixels: vec![background; width as usize * height as usize], background }
    }

    pub fn get(&self, x: u32, y: u32) -> Rgb {
        self.pixels[(y * self.width + x) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterOptions {
    pub width: u32,
    pub height: u32,
    pub supersample: bool,
    pub background: Rgb,
}

impl RasterOptions {
    pub fn new(width: u32, height: u32) -> Self {
        RasterOptions { width: width.max(1), height: height.max(1), supersample: false, background: Rgb::WHITE }
    }

    pub fn supersampled(mut self, on: bool) -> Self {
        self.supersample = on;
        self
    }

    /// Square feedback image for the critic.
    pub fn feedback(size: u32) -> Self {
        RasterOptions::new(size, size).supersampled(true)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RasterError {
    #[error("raster dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
}

/// A filled region in canvas coordinates.
#[derive(Debug, Clone)]
pub struct FillRegion {
    pub color: Rgb,
    pub polygons: Vec<Vec<Point>>,
}

/// Output of a rasterization plus the number of pixels any path touched.
#[derive(Debug, Clone)]
pub struct Rendered {
    pub raster: Raster,
    pub painted_pixels: usize,
}

pub fn rasterize(doc: &CanonicalDocument, opts: &RasterOptions) -> Raster {
    render(doc, opts).raster
}

pub fn render(doc: &CanonicalDocument, opts: &RasterOptions) -> Rendered {
    let (sx, sy) = device_scale(opts);
    let tol = DEVICE_TOLERANCE / sx.max(sy);
    let regions: Vec<FillRegion> =
        doc.paths.iter().map(|p| FillRegion { color: p.fill, polygons: flatten(&p.commands, tol) }).collect();
    render_regions(&regions, opts)
}

fn device_scale(opts: &RasterOptions) -> (f64, f64) {
    let ss = if opts.supersample { SUPERSAMPLE } else { 1 } as f64;
    (opts.width as f64 * ss / CANVAS_SIZE, opts.height as f64 * ss / CANVAS_SIZE)
}

/// Fills pre-flattened regions (canvas coordinates) in order.
pub fn render_regions(regions: &[FillRegion], opts: &RasterOptions) -> Rendered {
    let ss = if opts.supersample { SUPERSAMPLE } else { 1 };
    let sw = (opts.width * ss) as usize;
    let sh = (opts.height * ss) as usize;
    let (sx, sy) = device_scale(opts);

    let mut samples = vec![opts.background; sw * sh];
    let mut covered = vec![false; sw * sh];
    let mut rows: Vec<Vec<(f64, i32)>> = vec![Vec::new(); sh];

    for region in regions {
        let (mut lo, mut hi) = (usize::MAX, 0usize);
        for poly in &region.polygons {
            for i in 0..poly.len() {
                let a = poly[i];
                let b = poly[(i + 1) % poly.len()];
                let (x0, y0, x1, y1) = (a.x * sx, a.y * sy, b.x * sx, b.y * sy);
                if y0 == y1 || !(x0.is_finite() && y0.is_finite() && x1.is_finite() && y1.is_finite()) {
                    continue;
                }
                let (dir, ya, yb) = if y1 > y0 { (1, y0, y1) } else { (-1, y1, y0) };
                // rows whose center y = j + 0.5 lies in [ya, yb)
                let j0 = (ya - 0.5).ceil().max(0.0);
                let j1 = (yb - 0.5).ceil().min(sh as f64);
                if j0 >= j1 {
                    continue;
                }
                let slope = (x1 - x0) / (y1 - y0);
                for (j, row) in rows.iter_mut().enumerate().take(j1 as usize).skip(j0 as usize) {
                    let yc = j as f64 + 0.5;
                    row.push((x0 + (yc - y0) * slope, dir));
                }
                lo = lo.min(j0 as usize);
                hi = hi.max(j1 as usize);
            }
        }
        for (j, row) in rows.iter_mut().enumerate().take(hi).skip(lo) {
            if row.is_empty() {
                continue;
            }
            row.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut winding = 0;
            let mut span_start = 0.0;
            for &(x, dir) in row.iter() {
                let was_inside = winding != 0;
                winding += dir;
                if !was_inside && winding != 0 {
                    span_start = x;
                } else if was_inside && winding == 0 {
                    let i0 = (span_start - 0.5).ceil().max(0.0) as usize;
                    let i1 = ((x - 0.5).ceil().max(0.0) as usize).min(sw);
                    let base = j * sw;
                    for i in i0..i1 {
                        samples[base + i] = region.color;
                        covered[base + i] = true;
                    }
                }
            }
            row.clear();
        }
    }

    let mut raster = Raster::new(opts.width, opts.height, opts.background);
    let mut painted_pixels = 0;
    let n = ss * ss;
    for y in 0..opts.height as usize {
        for x in 0..opts.width as usize {
            let (mut r, mut g, mut b) = (0u32, 0u32, 0u32);
            let mut any = false;
            for dy in 0..ss as usize {
                let row = (y * ss as usize + dy) * sw;
                for dx in 0..ss as usize {
                    let idx = row + x * ss as usize + dx;
                    let c = samples[idx];
                    r += c.r as u32;
                    g += c.g as u32;
                    b += c.b as u32;
                    any |= covered[idx];
                }
            }
            painted_pixels += any as usize;
            raster.pixels[y * opts.width as usize + x] =
                Rgb::new(((r + n / 2) / n) as u8, ((g + n / 2) / n) as u8, ((b + n / 2) / n) as u8);
        }
    }
    Rendered { raster, painted_pixels }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum RenderCheck {
    Ok,
    Fail(String),
}

impl RenderCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, RenderCheck::Ok)
    }
}

/// Parses, canonicalizes and rasterizes at 200×200; success needs a painted pixel.
pub fn render_check(text: &str) -> RenderCheck {
    match canonicalize(text) {
        Ok(c) => check_document(&c.document),
        Err(reason) => RenderCheck::Fail(reason.to_string()),
    }
}

pub fn check_document(doc: &CanonicalDocument) -> RenderCheck {
    if render(doc, &RasterOptions::new(CHECK_SIZE, CHECK_SIZE)).painted_pixels == 0 {
        RenderCheck::Fail("no-visible-geometry".into())
    } else {
        RenderCheck::Ok
    }
}

/// Intersection over union of the pixels selected by `painted` in each raster.
pub fn image_iou(a: &Raster, b: &Raster, painted: impl Fn(Rgb) -> bool) -> Result<f64, RasterError> {
    if a.width != b.width || a.height != b.height {
        return Err(RasterError::DimensionMismatch(a.width, a.height, b.width, b.height));
    }
    let (mut inter, mut union) = (0usize, 0usize);
    for (pa, pb) in a.pixels.iter().zip(&b.pixels) {
        let (ia, ib) = (painted(*pa), painted(*pb));
        inter += (ia && ib) as usize;
        union += (ia || ib) as usize;
    }
    Ok(if union == 0 { 1.0 } else { inter as f64 / union as f64 })
}
