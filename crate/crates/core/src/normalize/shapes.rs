use super::RejectReason;
use crate::geom::Point;
use crate::parse::{RawCommand, RawDocument, RawElement, Shape};

/// Replaces every basic shape with an equivalent `Path`. Lines become
/// `Unsupported` (they have no fill area); zero-sized shapes are dropped.
pub fn shapes_to_paths(mut doc: RawDocument) -> Result<RawDocument, RejectReason> {
    let elements = std::mem::take(&mut doc.elements);
    doc.elements = convert_all(elements, &mut doc.warnings)?;
    Ok(doc)
}

fn convert_all(elements: Vec<RawElement>, warnings: &mut Vec<String>) -> Result<Vec<RawElement>, RejectReason> {
    let mut out = Vec::with_capacity(elements.len());
    for el in elements {
        match el {
            RawElement::Shape { style, transform, shape } => match shape_commands(&shape)? {
                ShapeGeometry::Path(commands) => out.push(RawElement::Path { style, transform, commands }),
                ShapeGeometry::Unsupported => out.push(RawElement::Unsupported { kind: shape.kind().to_string() }),
                ShapeGeometry::Nothing => warnings.push(format!("zero-size <{}> dropped", shape.kind())),
            },
            RawElement::Group { style, transform, children } => {
                out.push(RawElement::Group { style, transform, children: convert_all(children, warnings)? })
            }
            other => out.push(other),
        }
    }
    Ok(out)
}

enum ShapeGeometry {
    Path(Vec<RawCommand>),
    Unsupported,
    Nothing,
}

fn m(x: f64, y: f64) -> RawCommand {
    RawCommand::new('M', vec![x, y])
}

fn l(x: f64, y: f64) -> RawCommand {
    RawCommand::new('L', vec![x, y])
}

fn a(rx: f64, ry: f64, large: bool, x: f64, y: f64) -> RawCommand {
    RawCommand::new('A', vec![rx, ry, 0.0, large as u8 as f64, 1.0, x, y])
}

fn z() -> RawCommand {
    RawCommand::new('Z', vec![])
}

fn negative(kind: &str, what: &str) -> RejectReason {
    RejectReason::non_renderable(format!("negative {what} on <{kind}>"))
}

fn shape_commands(shape: &Shape) -> Result<ShapeGeometry, RejectReason> {
    use ShapeGeometry::*;
    Ok(match *shape {
        Shape::Rect { x, y, width: w, height: h, rx, ry } => {
            if w < 0.0 || h < 0.0 {
                return Err(negative("rect", "size"));
            }
            if rx.is_some_and(|v| v < 0.0) || ry.is_some_and(|v| v < 0.0) {
                return Err(negative("rect", "radius"));
            }
            if w == 0.0 || h == 0.0 {
                return Ok(Nothing);
            }
            // a missing radius takes the value of the other one
            let rx = rx.or(ry).unwrap_or(0.0).min(w / 2.0);
            let ry = ry.or(Some(rx)).unwrap_or(0.0).min(h / 2.0);
            if rx == 0.0 || ry == 0.0 {
                Path(vec![m(x, y), l(x + w, y), l(x + w, y + h), l(x, y + h), z()])
            } else {
                Path(vec![
                    m(x + rx, y),
                    l(x + w - rx, y),
                    a(rx, ry, false, x + w, y + ry),
                    l(x + w, y + h - ry),
                    a(rx, ry, false, x + w - rx, y + h),
                    l(x + rx, y + h),
                    a(rx, ry, false, x, y + h - ry),
                    l(x, y + ry),
                    a(rx, ry, false, x + rx, y),
                    z(),
                ])
            }
        }
        Shape::Circle { cx, cy, r } => {
            if r < 0.0 {
                return Err(negative("circle", "radius"));
            }
            if r == 0.0 {
                return Ok(Nothing);
            }
            Path(ellipse(cx, cy, r, r))
        }
        Shape::Ellipse { cx, cy, rx, ry } => {
            if rx < 0.0 || ry < 0.0 {
                return Err(negative("ellipse", "radius"));
            }
            if rx == 0.0 || ry == 0.0 {
                return Ok(Nothing);
            }
            Path(ellipse(cx, cy, rx, ry))
        }
        Shape::Line { .. } => Unsupported,
        Shape::Polyline(ref pts) => match poly(pts) {
            Some(cmds) => Path(cmds),
            None => Nothing,
        },
        Shape::Polygon(ref pts) => match poly(pts) {
            Some(mut cmds) => {
                cmds.push(z());
                Path(cmds)
            }
            None => Nothing,
        },
    })
}

/// Four quarter arcs from the rightmost point. Half arcs would need the
/// large-arc flag, which flips to the far side once rounding shortens the chord.
fn ellipse(cx: f64, cy: f64, rx: f64, ry: f64) -> Vec<RawCommand> {
    vec![
        m(cx + rx, cy),
        a(rx, ry, false, cx, cy + ry),
        a(rx, ry, false, cx - rx, cy),
        a(rx, ry, false, cx, cy - ry),
        a(rx, ry, false, cx + rx, cy),
        z(),
    ]
}

fn poly(pts: &[Point]) -> Option<Vec<RawCommand>> {
    let (first, rest) = pts.split_first()?;
    if rest.is_empty() {
        return None;
    }
    let mut cmds = vec![m(first.x, first.y)];
    cmds.extend(rest.iter().map(|p| l(p.x, p.y)));
    Some(cmds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_document, serialize_path_data};

    fn converted(body: &str) -> Result<Vec<RawElement>, RejectReason> {
        let doc = parse_document(&format!(r#"<svg viewBox="0 0 200 200">{body}</svg>"#)).unwrap();
        shapes_to_paths(doc).map(|d| d.elements)
    }

    fn d_of(el: &RawElement) -> String {
        match el {
            RawElement::Path { commands, .. } => serialize_path_data(commands),
            other => panic!("not a path: {other:?}"),
        }
    }

    #[test]
    fn rect_box() {
        let els = converted(r#"<rect x="0" y="0" width="10" height="5"/>"#).unwrap();
        assert_eq!(d_of(&els[0]), "M0 0 L10 0 L10 5 L0 5 Z");
    }

    #[test]
    fn circle_four_quarter_arcs() {
        let els = converted(r#"<circle cx="100" cy="100" r="50"/>"#).unwrap();
        assert_eq!(
            d_of(&els[0]),
            "M150 100 A50 50 0 0 1 100 150 A50 50 0 0 1 50 100 A50 50 0 0 1 100 50 A50 50 0 0 1 150 100 Z"
        );
    }

    #[test]
    fn polygon_vertices() {
        let els = converted(r#"<polygon points="0,0 10,0 5,8"/>"#).unwrap();
        assert_eq!(d_of(&els[0]), "M0 0 L10 0 L5 8 Z");
        let els = converted(r#"<polyline points="0,0 10,0 5,8"/>"#).unwrap();
        assert_eq!(d_of(&els[0]), "M0 0 L10 0 L5 8");
    }

    #[test]
    fn rounded_rect_uses_arcs() {
        let els = converted(r#"<rect x="0" y="0" width="20" height="10" rx="2"/>"#).unwrap();
        assert_eq!(
            d_of(&els[0]),
            "M2 0 L18 0 A2 2 0 0 1 20 2 L20 8 A2 2 0 0 1 18 10 L2 10 A2 2 0 0 1 0 8 L0 2 A2 2 0 0 1 2 0 Z"
        );
        // radii clamp to half the side
        let els = converted(r#"<rect width="20" height="10" ry="9"/>"#).unwrap();
        assert!(d_of(&els[0]).starts_with("M9 0 L11 0 A9 5 "));
    }

    #[test]
    fn negative_sizes_reject() {
        assert!(matches!(converted(r#"<rect width="-1" height="5"/>"#), Err(RejectReason::NonRenderable { .. })));
        assert!(matches!(converted(r#"<circle r="-2"/>"#), Err(RejectReason::NonRenderable { .. })));
    }

    #[test]
    fn lines_and_zero_sizes() {
        let els = converted(r#"<line x2="5" y2="5"/><circle r="0"/><g><ellipse rx="3" ry="0"/></g>"#).unwrap();
        assert_eq!(els[0], RawElement::Unsupported { kind: "line".into() });
        assert_eq!(els.len(), 2);
    }
}
