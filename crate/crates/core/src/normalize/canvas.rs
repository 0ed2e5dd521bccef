use super::{ArcSegment, CanonicalPath, PathCommand, RejectReason, CANVAS_SIZE};
use crate::geom::Point;
use crate::parse::ViewBox;
use crate::raster::{arc_endpoint_to_center, ArcParam};

/// Uniformly scales the source viewBox onto the canonical canvas and centers it.
pub fn rescale_viewbox(paths: &mut [CanonicalPath], vb: &ViewBox) -> Result<(), RejectReason> {
    if !(vb.width > 0.0 && vb.height > 0.0) || !vb.width.is_finite() || !vb.height.is_finite() {
        return Err(RejectReason::non_renderable(format!("invalid viewBox size {} x {}", vb.width, vb.height)));
    }
    let s = (CANVAS_SIZE / vb.width).min(CANVAS_SIZE / vb.height);
    let tx = (CANVAS_SIZE - vb.width * s) / 2.0 - vb.min_x * s;
    let ty = (CANVAS_SIZE - vb.height * s) / 2.0 - vb.min_y * s;
    for cmd in paths.iter_mut().flat_map(|p| p.commands.iter_mut()) {
        if let PathCommand::Arc(a) = cmd {
            a.rx *= s;
            a.ry *= s;
        }
        cmd.map_points(|p| Point::new(p.x * s + tx, p.y * s + ty));
    }
    Ok(())
}

/// Half-away-from-zero rounding with negative zero folded to zero.
pub(crate) fn round_coord(v: f64) -> f64 {
    let r = v.round();
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

/// Rounds every numeric field. Arc radii are not rounded blindly: each goes
/// to its floor or ceiling, whichever pair keeps the arc closest to its
/// unrounded course once the endpoints have moved. An arc whose radius rounds
/// to zero becomes a line.
pub fn quantize(paths: &mut [CanonicalPath]) {
    let round_point = |p: Point| Point::new(round_coord(p.x), round_coord(p.y));
    for path in paths.iter_mut() {
        // exact and rounded pen positions
        let (mut pen, mut start) = (Point::ORIGIN, Point::ORIGIN);
        let (mut qpen, mut qstart) = (Point::ORIGIN, Point::ORIGIN);
        for cmd in path.commands.iter_mut() {
            let exact = *cmd;
            cmd.map_points(round_point);
            match exact {
                PathCommand::Move(p) => {
                    (pen, start) = (p, p);
                    (qpen, qstart) = (round_point(p), round_point(p));
                }
                PathCommand::Line(p) | PathCommand::Cubic(_, _, p) => {
                    pen = p;
                    qpen = round_point(p);
                }
                PathCommand::Arc(a) => {
                    if let PathCommand::Arc(q) = cmd {
                        *q = quantize_arc(pen, &a, qpen);
                        if q.rx == 0.0 || q.ry == 0.0 {
                            *cmd = PathCommand::Line(q.to);
                        }
                    }
                    pen = a.to;
                    qpen = round_point(a.to);
                }
                PathCommand::Close => (pen, qpen) = (start, qstart),
            }
        }
    }
}

const ARC_PROBES: [f64; 3] = [0.25, 0.5, 0.75];

fn arc_probes(from: Point, arc: &ArcSegment) -> Option<[Point; 3]> {
    match arc_endpoint_to_center(from, arc) {
        ArcParam::Center(c) => Some(ARC_PROBES.map(|t| c.point_at_deg(c.theta1_deg + c.delta_theta_deg * t))),
        ArcParam::Degenerate(_) => None,
    }
}

fn quantize_arc(from: Point, exact: &ArcSegment, qfrom: Point) -> ArcSegment {
    let mut q = ArcSegment {
        rx: round_coord(exact.rx),
        ry: round_coord(exact.ry),
        phi: round_coord(exact.phi),
        to: Point::new(round_coord(exact.to.x), round_coord(exact.to.y)),
        ..*exact
    };
    if q.rx == 0.0 || q.ry == 0.0 {
        return q;
    }
    let Some(target) = arc_probes(from, exact) else { return q };
    let other = |v: f64, r: f64| if r > v { r - 1.0 } else { r + 1.0 };
    let xs = [q.rx, other(exact.rx, q.rx)];
    let ys = [q.ry, other(exact.ry, q.ry)];
    let cost = |rx: f64, ry: f64| {
        arc_probes(qfrom, &ArcSegment { rx, ry, ..q })
            .map(|pts| pts.iter().zip(&target).map(|(a, b)| a.distance(*b)).sum::<f64>())
    };
    // the plain rounding is tried first and wins ties, so integer input is a fixed point
    let Some(mut best) = cost(q.rx, q.ry) else { return q };
    for &rx in &xs {
        for &ry in &ys {
            if rx < 1.0 || ry < 1.0 {
                continue;
            }
            if let Some(c) = cost(rx, ry) {
                if c < best {
                    best = c;
                    (q.rx, q.ry) = (rx, ry);
                }
            }
        }
    }
    q
}
