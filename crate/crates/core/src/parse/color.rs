//! Paint values: solid colors, `none`, and the paint servers we do not support.

use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Rgb {
    pub r: u8,
    pub g: u8,
    pub b: u8,
}

impl Rgb {
    pub const BLACK: Rgb = Rgb::new(0, 0, 0);
    pub const WHITE: Rgb = Rgb::new(255, 255, 255);

    pub const fn new(r: u8, g: u8, b: u8) -> Self {
        Rgb { r, g, b }
    }

    /// Canonical text form, `#RRGGBB` uppercase.
    pub fn to_hex(self) -> String {
        format!("#{:02X}{:02X}{:02X}", self.r, self.g, self.b)
    }
}

impl fmt::Display for Rgb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UnsupportedPaint {
    Gradient,
    Pattern,
    Url,
    CurrentColor,
    /// Syntactically unknown color value (e.g. `hsl(...)`, extended keywords).
    Unrecognized,
}

impl UnsupportedPaint {
    pub fn label(self) -> &'static str {
        match self {
            UnsupportedPaint::Gradient => "gradient",
            UnsupportedPaint::Pattern => "pattern",
            UnsupportedPaint::Url => "url",
            UnsupportedPaint::CurrentColor => "currentColor",
            UnsupportedPaint::Unrecognized => "unrecognized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PaintRef {
    Solid(Rgb),
    NoneFill,
    Unsupported(UnsupportedPaint),
}

const BASIC_KEYWORDS: [(&str, Rgb); 16] = [
    ("black", Rgb::new(0, 0, 0)),
    ("silver", Rgb::new(192, 192, 192)),
    ("gray", Rgb::new(128, 128, 128)),
    ("white", Rgb::new(255, 255, 255)),
    ("maroon", Rgb::new(128, 0, 0)),
    ("red", Rgb::new(255, 0, 0)),
    ("purple", Rgb::new(128, 0, 128)),
    ("fuchsia", Rgb::new(255, 0, 255)),
    ("green", Rgb::new(0, 128, 0)),
    ("lime", Rgb::new(0, 255, 0)),
    ("olive", Rgb::new(128, 128, 0)),
    ("yellow", Rgb::new(255, 255, 0)),
    ("navy", Rgb::new(0, 0, 128)),
    ("blue", Rgb::new(0, 0, 255)),
    ("teal", Rgb::new(0, 128, 128)),
    ("aqua", Rgb::new(0, 255, 255)),
];

/// Total: anything we cannot interpret lands in `PaintRef::Unsupported`.
pub fn parse_color(s: &str) -> PaintRef {
    let s = s.trim();
    let lower = s.to_ascii_lowercase();
    if lower == "none" {
        return PaintRef::NoneFill;
    }
    if lower == "currentcolor" {
        return PaintRef::Unsupported(UnsupportedPaint::CurrentColor);
    }
    if lower.starts_with("url(") {
        return PaintRef::Unsupported(UnsupportedPaint::Url);
    }
    if let Some(hex) = s.strip_prefix('#') {
        return parse_hex(hex).map_or(PaintRef::Unsupported(UnsupportedPaint::Unrecognized), PaintRef::Solid);
    }
    if let Some(body) = lower.strip_prefix("rgb(").and_then(|b| b.strip_suffix(')')) {
        return parse_rgb_function(body).map_or(PaintRef::Unsupported(UnsupportedPaint::Unrecognized), PaintRef::Solid);
    }
    BASIC_KEYWORDS
        .iter()
        .find(|(name, _)| *name == lower)
        .map_or(PaintRef::Unsupported(UnsupportedPaint::Unrecognized), |(_, c)| PaintRef::Solid(*c))
}

fn parse_hex(hex: &str) -> Option<Rgb> {
    if !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
        return None;
    }
    let nibble = |i: usize| u8::from_str_radix(&hex[i..i + 1], 16).ok();
    match hex.len() {
        3 => Some(Rgb::new(nibble(0)? * 17, nibble(1)? * 17, nibble(2)? * 17)),
        6 => Some(Rgb::new(
            u8::from_str_radix(&hex[0..2], 16).ok()?,
            u8::from_str_radix(&hex[2..4], 16).ok()?,
            u8::from_str_radix(&hex[4..6], 16).ok()?,
        )),
        _ => None,
    }
}

fn parse_rgb_function(body: &str) -> Option<Rgb> {
    let parts: Vec<&str> = body.split(|c: char| c == ',' || c.is_whitespace()).filter(|p| !p.is_empty()).collect();
    if parts.len() != 3 {
        return None;
    }
    let mut ch = [0u8; 3];
    for (slot, part) in ch.iter_mut().zip(&parts) {
        let v = if let Some(pct) = part.strip_suffix('%') {
            pct.parse::<f64>().ok()? * 255.0 / 100.0
        } else {
            part.parse::<f64>().ok()?
        };
        if !v.is_finite() {
            return None;
        }
        *slot = v.round().clamp(0.0, 255.0) as u8;
    }
    Some(Rgb::new(ch[0], ch[1], ch[2]))
}
