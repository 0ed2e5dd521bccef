//! SVG text → unnormalized document tree.
//!
//! XML structure comes from `roxmltree`; everything SVG-specific (path data,
//! paint, transforms, shape attributes) is interpreted here. Elements outside
//! the supported subset are skipped and noted in [`RawDocument::warnings`].

mod color;
mod path;
mod transform;

pub use color::{parse_color, PaintRef, Rgb, UnsupportedPaint};
pub use path::{arity, parse_path_data, serialize_path_data, RawCommand};
pub use transform::parse_transform;

pub(crate) use path::{parse_number_list, push_number, scan_number};

use crate::geom::{Affine, Point};
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;

pub const MAX_GROUP_DEPTH: usize = 64;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("parse error at byte {offset}: {kind}")]
pub struct ParseError {
    pub offset: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub fn at(offset: usize, kind: ParseErrorKind) -> Self {
        ParseError { offset, kind }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParseErrorKind {
    Xml(String),
    NotSvg(String),
    NoCoordinateSystem,
    TooDeep,
    InvalidAttribute(String),
    ExpectedCommand,
    UnknownCommand(char),
    WrongArity { letter: char, expected: usize, found: usize },
    InvalidFlag,
    InvalidNumber,
    NonFinite,
    UnexpectedNumber,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Xml(msg) => write!(f, "malformed xml: {msg}"),
            ParseErrorKind::NotSvg(tag) => write!(f, "root element is <{tag}>, expected <svg>"),
            ParseErrorKind::NoCoordinateSystem => f.write_str("no-coordinate-system"),
            ParseErrorKind::TooDeep => write!(f, "group nesting deeper than {MAX_GROUP_DEPTH}"),
            ParseErrorKind::InvalidAttribute(name) => write!(f, "invalid value for attribute `{name}`"),
            ParseErrorKind::ExpectedCommand => f.write_str("expected a command letter"),
            ParseErrorKind::UnknownCommand(c) => write!(f, "unknown path command `{c}`"),
            ParseErrorKind::WrongArity { letter, expected, found } => {
                write!(f, "command `{letter}` needs {expected} numbers, found {found}")
            }
            ParseErrorKind::InvalidFlag => f.write_str("arc flag must be 0 or 1"),
            ParseErrorKind::InvalidNumber => f.write_str("invalid number"),
            ParseErrorKind::NonFinite => f.write_str("non-finite number"),
            ParseErrorKind::UnexpectedNumber => f.write_str("number after a command that takes no arguments"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ViewBox {
    pub min_x: f64,
    pub min_y: f64,
    pub width: f64,
    pub height: f64,
}

impl ViewBox {
    pub const CANONICAL: ViewBox = ViewBox { min_x: 0.0, min_y: 0.0, width: 200.0, height: 200.0 };
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Length {
    pub value: f64,
    pub unit: String,
}

/// Fill and stroke as written on an element; `None` means inherited.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Style {
    pub fill: Option<PaintRef>,
    pub stroke: Option<PaintRef>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Rect { x: f64, y: f64, width: f64, height: f64, rx: Option<f64>, ry: Option<f64> },
    Circle { cx: f64, cy: f64, r: f64 },
    Ellipse { cx: f64, cy: f64, rx: f64, ry: f64 },
    Line { x1: f64, y1: f64, x2: f64, y2: f64 },
    Polyline(Vec<Point>),
    Polygon(Vec<Point>),
}

impl Shape {
    pub fn kind(&self) -> &'static str {
        match self {
            Shape::Rect { .. } => "rect",
            Shape::Circle { .. } => "circle",
            Shape::Ellipse { .. } => "ellipse",
            Shape::Line { .. } => "line",
            Shape::Polyline(_) => "polyline",
            Shape::Polygon(_) => "polygon",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RawElement {
    Path {
        style: Style,
        transform: Affine,
        commands: Vec<RawCommand>,
    },
    Shape {
        style: Style,
        transform: Affine,
        shape: Shape,
    },
    Group {
        style: Style,
        transform: Affine,
        children: Vec<RawElement>,
    },
    /// Geometry the canonical form cannot carry (e.g. `line`); kept so that a
    /// sample made only of such elements can be rejected with a reason.
    Unsupported {
        kind: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawDocument {
    pub view_box: ViewBox,
    pub width: Option<Length>,
    pub height: Option<Length>,
    pub elements: Vec<RawElement>,
    pub warnings: Vec<String>,
    /// Sample-level blockers such as `<use>` references.
    pub unsupported: Vec<String>,
}

pub fn parse_document(text: &str) -> Result<RawDocument, ParseError> {
    let xml = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        ParseError::at(byte_offset(text, pos.row, pos.col), ParseErrorKind::Xml(e.to_string()))
    })?;
    let root = xml.root_element();
    if root.tag_name().name() != "svg" {
        return Err(ParseError::at(root.range().start, ParseErrorKind::NotSvg(root.tag_name().name().to_string())));
    }

    let width = root.attribute("width").and_then(parse_length);
    let height = root.attribute("height").and_then(parse_length);
    let view_box = match root.attribute("viewBox").and_then(parse_view_box) {
        Some(vb) => vb,
        None => match (&width, &height) {
            (Some(w), Some(h)) if w.value > 0.0 && h.value > 0.0 => {
                ViewBox { min_x: 0.0, min_y: 0.0, width: w.value, height: h.value }
            }
            _ => return Err(ParseError::at(root.range().start, ParseErrorKind::NoCoordinateSystem)),
        },
    };

    let mut ctx = Ctx { paint_servers: collect_paint_servers(&xml), warnings: Vec::new(), unsupported: Vec::new() };
    if root.attribute("transform").is_some() {
        ctx.warnings.push("transform on root <svg> ignored".into());
    }
    let elements = ctx.children(root, 0)?;
    Ok(RawDocument { view_box, width, height, elements, warnings: ctx.warnings, unsupported: ctx.unsupported })
}

struct Ctx {
    paint_servers: HashMap<String, UnsupportedPaint>,
    warnings: Vec<String>,
    unsupported: Vec<String>,
}

impl Ctx {
    fn children(&mut self, node: roxmltree::Node, depth: usize) -> Result<Vec<RawElement>, ParseError> {
        let mut out = Vec::new();
        for child in node.children().filter(|n| n.is_element()) {
            if let Some(el) = self.element(child, depth)? {
                out.push(el);
            }
        }
        Ok(out)
    }

    fn element(&mut self, node: roxmltree::Node, depth: usize) -> Result<Option<RawElement>, ParseError> {
        let tag = node.tag_name().name();
        let offset = node.range().start;
        let geometry = matches!(tag, "g" | "path" | "rect" | "circle" | "ellipse" | "line" | "polyline" | "polygon");
        if !geometry {
            match tag {
                "use" => {
                    self.unsupported.push("use".into());
                    self.warnings.push("<use> reference marks the sample unsupported".into());
                }
                "defs" | "style" | "title" | "metadata" | "desc" => self.warnings.push(format!("dropped <{tag}>")),
                _ => self.warnings.push(format!("skipped unsupported element <{tag}>")),
            }
            return Ok(None);
        }

        let style = self.style(node);
        let transform = match node.attribute("transform") {
            Some(t) => parse_transform(t)
                .ok_or_else(|| ParseError::at(offset, ParseErrorKind::InvalidAttribute("transform".into())))?,
            None => Affine::IDENTITY,
        };
        if has_opacity(node) {
            self.warnings.push(format!("opacity on <{tag}> ignored"));
        }

        let el = match tag {
            "g" => {
                if depth + 1 > MAX_GROUP_DEPTH {
                    return Err(ParseError::at(offset, ParseErrorKind::TooDeep));
                }
                RawElement::Group { style, transform, children: self.children(node, depth + 1)? }
            }
            "path" => {
                let d = node.attribute("d").unwrap_or("");
                let base = node.attribute_node("d").map_or(offset, |a| a.range_value().start);
                let commands = parse_path_data(d).map_err(|e| ParseError::at(base + e.offset, e.kind))?;
                RawElement::Path { style, transform, commands }
            }
            _ => RawElement::Shape { style, transform, shape: parse_shape(node)? },
        };
        Ok(Some(el))
    }

    fn style(&self, node: roxmltree::Node) -> Style {
        let mut fill = node.attribute("fill").map(str::to_string);
        let mut stroke = node.attribute("stroke").map(str::to_string);
        if let Some(css) = node.attribute("style") {
            for decl in css.split(';') {
                if let Some((k, v)) = decl.split_once(':') {
                    match k.trim() {
                        "fill" => fill = Some(v.trim().to_string()),
                        "stroke" => stroke = Some(v.trim().to_string()),
                        _ => {}
                    }
                }
            }
        }
        Style { fill: fill.and_then(|f| self.paint(&f)), stroke: stroke.and_then(|s| self.paint(&s)) }
    }

    fn paint(&self, value: &str) -> Option<PaintRef> {
        let value = value.trim();
        if value == "inherit" {
            return None;
        }
        let paint = parse_color(value);
        if paint == PaintRef::Unsupported(UnsupportedPaint::Url) {
            if let Some(kind) = url_target(value).and_then(|id| self.paint_servers.get(id)) {
                return Some(PaintRef::Unsupported(*kind));
            }
        }
        Some(paint)
    }
}

fn url_target(value: &str) -> Option<&str> {
    let inner = value.strip_prefix("url(")?.split(')').next()?;
    Some(inner.trim().trim_matches(|c| c == '\'' || c == '"').trim_start_matches('#'))
}

fn collect_paint_servers(xml: &roxmltree::Document) -> HashMap<String, UnsupportedPaint> {
    xml.descendants()
        .filter_map(|n| {
            let kind = match n.tag_name().name() {
                "linearGradient" | "radialGradient" => UnsupportedPaint::Gradient,
                "pattern" => UnsupportedPaint::Pattern,
                _ => return None,
            };
            Some((n.attribute("id")?.to_string(), kind))
        })
        .collect()
}

fn has_opacity(node: roxmltree::Node) -> bool {
    ["opacity", "fill-opacity"].iter().any(|a| node.attribute(*a).is_some())
        || node.attribute("style").is_some_and(|s| s.contains("opacity"))
}

fn parse_shape(node: roxmltree::Node) -> Result<Shape, ParseError> {
    let offset = node.range().start;
    let num = |name: &str| -> Result<Option<f64>, ParseError> {
        match node.attribute(name) {
            None => Ok(None),
            Some(v) => parse_length(v)
                .map(|l| Some(l.value))
                .ok_or_else(|| ParseError::at(offset, ParseErrorKind::InvalidAttribute(name.to_string()))),
        }
    };
    let req = |name: &str| num(name).map(|v| v.unwrap_or(0.0));
    let points = || -> Result<Vec<Point>, ParseError> {
        let list = parse_number_list(node.attribute("points").unwrap_or(""))
            .ok_or_else(|| ParseError::at(offset, ParseErrorKind::InvalidAttribute("points".into())))?;
        // an odd trailing coordinate is ignored, as SVG renderers do
        Ok(list.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect())
    };
    Ok(match node.tag_name().name() {
        "rect" => Shape::Rect {
            x: req("x")?,
            y: req("y")?,
            width: req("width")?,
            height: req("height")?,
            rx: num("rx")?,
            ry: num("ry")?,
        },
        "circle" => Shape::Circle { cx: req("cx")?, cy: req("cy")?, r: req("r")? },
        "ellipse" => Shape::Ellipse { cx: req("cx")?, cy: req("cy")?, rx: req("rx")?, ry: req("ry")? },
        "line" => Shape::Line { x1: req("x1")?, y1: req("y1")?, x2: req("x2")?, y2: req("y2")? },
        "polyline" => Shape::Polyline(points()?),
        "polygon" => Shape::Polygon(points()?),
        other => unreachable!("not a shape: {other}"),
    })
}

/// Number with an optional unit suffix; units are recorded but never applied.
fn parse_length(s: &str) -> Option<Length> {
    let s = s.trim();
    let (value, end) = scan_number(s.as_bytes(), 0)?;
    if !value.is_finite() {
        return None;
    }
    let unit = s[end..].trim();
    if !unit.chars().all(|c| c.is_ascii_alphabetic() || c == '%') {
        return None;
    }
    Some(Length { value, unit: unit.to_string() })
}

fn parse_view_box(s: &str) -> Option<ViewBox> {
    match parse_number_list(s)?.as_slice() {
        [min_x, min_y, width, height] if *width > 0.0 && *height > 0.0 => {
            Some(ViewBox { min_x: *min_x, min_y: *min_y, width: *width, height: *height })
        }
        _ => None,
    }
}

fn byte_offset(text: &str, row: u32, col: u32) -> usize {
    let line_start: usize = text.split_inclusive('\n').take(row.saturating_sub(1) as usize).map(str::len).sum();
    let line = &text[line_start.min(text.len())..];
    line_start + line.chars().take(col.saturating_sub(1) as usize).map(char::len_utf8).sum::<usize>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_path_document() {
        let doc =
            parse_document(r##"<svg viewBox="0 0 200 200"><path fill="#9A8984" d="M24 55 L5 41"/></svg>"##).unwrap();
        assert_eq!(doc.view_box, ViewBox::CANONICAL);
        assert_eq!(doc.elements.len(), 1);
        match &doc.elements[0] {
            RawElement::Path { style, commands, .. } => {
                assert_eq!(style.fill, Some(PaintRef::Solid(Rgb::new(154, 137, 132))));
                assert_eq!(commands.len(), 2);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_document() {
        let doc = parse_document(r#"<svg viewBox="0 0 10 10"></svg>"#).unwrap();
        assert!(doc.elements.is_empty());
    }

    #[test]
    fn truncated_input_fails() {
        let err = parse_document(r#"<svg viewBox="0 0 10 10"><path d="M 0 0 L"#).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Xml(_)));
    }

    #[test]
    fn coordinate_system_rules() {
        let doc = parse_document(r#"<svg width="64px" height="32"><rect width="1" height="1"/></svg>"#).unwrap();
        assert_eq!(doc.view_box, ViewBox { min_x: 0.0, min_y: 0.0, width: 64.0, height: 32.0 });
        assert_eq!(doc.width.unwrap().unit, "px");
        let err = parse_document(r#"<svg viewBox="0 0 0 10"/>"#).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NoCoordinateSystem);
        assert_eq!(parse_document("<svg/>").unwrap_err().kind, ParseErrorKind::NoCoordinateSystem);
    }

    #[test]
    fn painters_order_and_skips() {
        let text = r##"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 10 10">
            <title>t</title>
            <rect width="1" height="1" fill="red"/>
            <defs><linearGradient id="g1"/></defs>
            <g fill="#00f" transform="translate(1 1)"><circle r="2"/><path d="M0 0 L1 1"/></g>
            <text>hi</text>
            <polygon points="0,0 1,0 1,1" style="fill: lime"/>
        </svg>"##;
        let doc = parse_document(text).unwrap();
        let kinds: Vec<&str> = doc
            .elements
            .iter()
            .map(|e| match e {
                RawElement::Shape { shape, .. } => shape.kind(),
                RawElement::Group { .. } => "g",
                RawElement::Path { .. } => "path",
                RawElement::Unsupported { .. } => "unsupported",
            })
            .collect();
        assert_eq!(kinds, ["rect", "g", "polygon"]);
        assert_eq!(doc.warnings.len(), 3);
        match &doc.elements[2] {
            RawElement::Shape { style, .. } => assert_eq!(style.fill, Some(PaintRef::Solid(Rgb::new(0, 255, 0)))),
            _ => unreachable!(),
        }
    }

    #[test]
    fn gradient_reference_is_classified() {
        let text = r##"<svg viewBox="0 0 10 10"><defs><radialGradient id="g"/></defs><path fill="url(#g)" d="M0 0 L1 0 L1 1 Z"/><path fill="url(#nope)" d="M0 0"/></svg>"##;
        let doc = parse_document(text).unwrap();
        let fills: Vec<_> = doc
            .elements
            .iter()
            .map(|e| match e {
                RawElement::Path { style, .. } => style.fill,
                _ => None,
            })
            .collect();
        assert_eq!(
            fills,
            [
                Some(PaintRef::Unsupported(UnsupportedPaint::Gradient)),
                Some(PaintRef::Unsupported(UnsupportedPaint::Url))
            ]
        );
    }

    #[test]
    fn use_marks_sample() {
        let doc = parse_document(r##"<svg viewBox="0 0 10 10"><use href="#a"/></svg>"##).unwrap();
        assert_eq!(doc.unsupported, ["use"]);
    }

    #[test]
    fn path_error_offset_is_document_relative() {
        let text = r#"<svg viewBox="0 0 10 10"><path d="M0 0 Q"/></svg>"#;
        let err = parse_document(text).unwrap_err();
        assert_eq!(&text[err.offset..err.offset + 1], "\"");
    }

    #[test]
    fn nesting_limit() {
        let deep = format!(r#"<svg viewBox="0 0 1 1">{}{}</svg>"#, "<g>".repeat(65), "</g>".repeat(65));
        assert_eq!(parse_document(&deep).unwrap_err().kind, ParseErrorKind::TooDeep);
        let ok = format!(r#"<svg viewBox="0 0 1 1">{}{}</svg>"#, "<g>".repeat(64), "</g>".repeat(64));
        assert!(parse_document(&ok).is_ok());
    }
}
