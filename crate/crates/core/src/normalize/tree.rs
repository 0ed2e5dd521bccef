use super::restrict::{restrict_vocabulary, to_raw};
use super::{absolutize, ArcSegment, PathCommand, RejectReason};
use crate::geom::{Affine, Point};
use crate::parse::{PaintRef, RawCommand, RawDocument, RawElement, Rgb, Style};
use crate::raster::arc_to_cubics;

/// A filled path with every ancestor transform applied.
#[derive(Debug, Clone, PartialEq)]
pub struct FlatPath {
    pub fill: Rgb,
    /// Absolute commands in document space.
    pub commands: Vec<RawCommand>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FlatTree {
    pub paths: Vec<FlatPath>,
    pub warnings: Vec<String>,
}

/// Removes groups: resolves inherited fill/stroke and bakes the composed
/// transform into the coordinates.
pub fn flatten_tree(doc: RawDocument) -> Result<FlatTree, RejectReason> {
    if let Some(kind) = doc.unsupported.first() {
        return Err(RejectReason::UnsupportedElement { element: kind.clone() });
    }
    let mut walk = Walk { out: FlatTree { paths: Vec::new(), warnings: doc.warnings }, dropped_visible: None };
    walk.elements(&doc.elements, Style::default(), Affine::IDENTITY)?;
    if walk.out.paths.is_empty() {
        if let Some(element) = walk.dropped_visible {
            return Err(RejectReason::UnsupportedElement { element });
        }
    }
    Ok(walk.out)
}

struct Walk {
    out: FlatTree,
    /// First element dropped although it would paint something.
    dropped_visible: Option<String>,
}

impl Walk {
    fn elements(&mut self, elements: &[RawElement], inherited: Style, ctm: Affine) -> Result<(), RejectReason> {
        for el in elements {
            match el {
                RawElement::Group { style, transform, children } => {
                    self.elements(children, cascade(inherited, *style), compose(ctm, *transform)?)?;
                }
                RawElement::Path { style, transform, commands } => {
                    let style = cascade(inherited, *style);
                    let ctm = compose(ctm, *transform)?;
                    self.path(style, ctm, commands)?;
                }
                RawElement::Unsupported { kind } => self.drop_visible(kind),
                RawElement::Shape { shape, .. } => {
                    unreachable!("flatten_tree runs after shape conversion, found <{}>", shape.kind())
                }
            }
        }
        Ok(())
    }

    fn drop_visible(&mut self, kind: &str) {
        self.out.warnings.push(format!("{kind} geometry dropped"));
        self.dropped_visible.get_or_insert_with(|| kind.to_string());
    }

    fn path(&mut self, style: Style, ctm: Affine, commands: &[RawCommand]) -> Result<(), RejectReason> {
        let fill = match style.fill {
            None => Rgb::BLACK,
            Some(PaintRef::Solid(c)) => c,
            Some(PaintRef::Unsupported(p)) => {
                return Err(RejectReason::UnsupportedPaint { paint: p.label().to_string() })
            }
            Some(PaintRef::NoneFill) => {
                match style.stroke {
                    Some(PaintRef::Solid(_)) | Some(PaintRef::Unsupported(_)) => self.drop_visible("stroke-only"),
                    _ => self.out.warnings.push("invisible path dropped".to_string()),
                }
                return Ok(());
            }
        };
        let absolute = absolutize(commands)?;
        let commands = if ctm.is_identity() {
            absolute
        } else {
            to_raw(&transform_commands(&restrict_vocabulary(&absolute), &ctm))
        };
        if !commands.is_empty() {
            self.out.paths.push(FlatPath { fill, commands });
        }
        Ok(())
    }
}

fn cascade(parent: Style, own: Style) -> Style {
    Style { fill: own.fill.or(parent.fill), stroke: own.stroke.or(parent.stroke) }
}

fn compose(parent: Affine, own: Affine) -> Result<Affine, RejectReason> {
    let m = parent.then_apply(own);
    if m.is_finite() {
        Ok(m)
    } else {
        Err(RejectReason::non_renderable("non-finite transform"))
    }
}

/// Maps canonical commands through `m`. Arcs survive when the image is still an
/// arc with representable rotation; otherwise they become cubics first.
pub(crate) fn transform_commands(commands: &[PathCommand], m: &Affine) -> Vec<PathCommand> {
    let mut out = Vec::with_capacity(commands.len());
    let mut pen = Point::ORIGIN;
    let mut start = Point::ORIGIN;
    for cmd in commands {
        match *cmd {
            PathCommand::Arc(arc) => {
                match map_arc(&arc, m) {
                    Some(mapped) => out.push(PathCommand::Arc(mapped)),
                    None => {
                        for [c1, c2, p] in arc_to_cubics(pen, &arc) {
                            out.push(PathCommand::Cubic(m.apply(c1), m.apply(c2), m.apply(p)));
                        }
                    }
                }
                pen = arc.to;
            }
            mut other => {
                pen = match other {
                    PathCommand::Move(p) => {
                        start = p;
                        p
                    }
                    PathCommand::Line(p) | PathCommand::Cubic(_, _, p) => p,
                    PathCommand::Close => start,
                    PathCommand::Arc(_) => unreachable!(),
                };
                other.map_points(|p| m.apply(p));
                out.push(other);
            }
        }
    }
    out
}

fn map_arc(arc: &ArcSegment, m: &Affine) -> Option<ArcSegment> {
    if !m.is_axis_aligned() || m.determinant() == 0.0 {
        return None;
    }
    let (sx, sy) = (m.a.abs(), m.d.abs());
    let phi = arc.phi.rem_euclid(180.0);
    let (rx, ry) = if sx == sy {
        (arc.rx * sx, arc.ry * sx)
    } else if phi == 0.0 {
        (arc.rx * sx, arc.ry * sy)
    } else if phi == 90.0 {
        (arc.rx * sy, arc.ry * sx)
    } else {
        return None;
    };
    let mirrored = m.determinant() < 0.0;
    Some(ArcSegment {
        rx,
        ry,
        phi: if mirrored && arc.phi != 0.0 { -arc.phi } else { arc.phi },
        large_arc: arc.large_arc,
        sweep: arc.sweep != mirrored,
        to: m.apply(arc.to),
    })
}
