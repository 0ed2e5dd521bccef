use super::arc::{arc_endpoint_to_center, ArcParam};
use crate::geom::Point;
use crate::normalize::PathCommand;

pub const DEFAULT_TOLERANCE: f64 = 0.1;

const MAX_CUBIC_DEPTH: u32 = 18;

/// Flattens a command list into polylines, one per subpath. Every polyline is
/// treated as closed when filled; the closing edge is implicit.
pub fn flatten(commands: &[PathCommand], tolerance: f64) -> Vec<Vec<Point>> {
    let tolerance = tolerance.max(1e-6);
    let mut out = Vec::new();
    let mut current: Vec<Point> = Vec::new();
    let mut pen = Point::ORIGIN;
    let mut start = Point::ORIGIN;

    let finish = |poly: &mut Vec<Point>, out: &mut Vec<Vec<Point>>| {
        if poly.len() >= 2 {
            out.push(std::mem::take(poly));
        } else {
            poly.clear();
        }
    };

    for cmd in commands {
        match *cmd {
            PathCommand::Move(p) => {
                finish(&mut current, &mut out);
                current.push(p);
                pen = p;
                start = p;
            }
            PathCommand::Line(p) => {
                if current.is_empty() {
                    current.push(pen);
                }
                current.push(p);
                pen = p;
            }
            PathCommand::Cubic(c1, c2, p) => {
                if current.is_empty() {
                    current.push(pen);
                }
                flatten_cubic(pen, c1, c2, p, tolerance, 0, &mut current);
                pen = p;
            }
            PathCommand::Arc(ref arc) => {
                if current.is_empty() {
                    current.push(pen);
                }
                match arc_endpoint_to_center(pen, arc) {
                    ArcParam::Degenerate(to) => current.push(to),
                    ArcParam::Center(c) => {
                        let r = c.rx.max(c.ry);
                        let step = 2.0 * (1.0 - tolerance / r).clamp(-1.0, 1.0).acos();
                        let delta = c.delta_theta_deg.to_radians();
                        let n = ((delta.abs() / step).ceil() as usize).max(1);
                        let theta1 = c.theta1_deg.to_radians();
                        for i in 1..n {
                            current.push(c.point_at(theta1 + delta * i as f64 / n as f64));
                        }
                        current.push(arc.to);
                    }
                }
                pen = arc.to;
            }
            PathCommand::Close => {
                finish(&mut current, &mut out);
                pen = start;
            }
        }
    }
    finish(&mut current, &mut out);
    out
}

fn flatten_cubic(p0: Point, c1: Point, c2: Point, p3: Point, tol: f64, depth: u32, out: &mut Vec<Point>) {
    if depth >= MAX_CUBIC_DEPTH || cubic_flatness(p0, c1, c2, p3) <= tol {
        out.push(p3);
        return;
    }
    let p01 = p0.lerp(c1, 0.5);
    let p12 = c1.lerp(c2, 0.5);
    let p23 = c2.lerp(p3, 0.5);
    let p012 = p01.lerp(p12, 0.5);
    let p123 = p12.lerp(p23, 0.5);
    let mid = p012.lerp(p123, 0.5);
    flatten_cubic(p0, p01, p012, mid, tol, depth + 1, out);
    flatten_cubic(mid, p123, p23, p3, tol, depth + 1, out);
}

/// Upper bound on the distance between the curve and its chord.
fn cubic_flatness(p0: Point, c1: Point, c2: Point, p3: Point) -> f64 {
    let chord = p3 - p0;
    let len = chord.x.hypot(chord.y);
    let dist = |p: Point| {
        if len < 1e-12 {
            p.distance(p0)
        } else {
            ((p.x - p0.x) * chord.y - (p.y - p0.y) * chord.x).abs() / len
        }
    };
    let perpendicular = dist(c1).max(dist(c2));
    // control points beyond the chord ends also bulge the curve
    let along = |p: Point| {
        if len < 1e-12 {
            0.0
        } else {
            let t = ((p.x - p0.x) * chord.x + (p.y - p0.y) * chord.y) / (len * len);
            (if t < 0.0 { -t } else { t - 1.0 }).max(0.0) * len
        }
    };
    perpendicular.max(along(c1)).max(along(c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::ArcSegment;

    #[test]
    fn linear_path_passes_through() {
        let cmds = [
            PathCommand::Move(Point::new(0.0, 0.0)),
            PathCommand::Line(Point::new(10.0, 0.0)),
            PathCommand::Line(Point::new(10.0, 10.0)),
            PathCommand::Close,
        ];
        let polys = flatten(&cmds, DEFAULT_TOLERANCE);
        assert_eq!(polys, vec![vec![Point::new(0.0, 0.0), Point::new(10.0, 0.0), Point::new(10.0, 10.0)]]);
    }

    #[test]
    fn straight_cubic_is_one_segment() {
        let cmds = [
            PathCommand::Move(Point::new(0.0, 0.0)),
            PathCommand::Cubic(Point::new(1.0, 0.0), Point::new(2.0, 0.0), Point::new(3.0, 0.0)),
        ];
        assert_eq!(flatten(&cmds, DEFAULT_TOLERANCE), vec![vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0)]]);
    }

    #[test]
    fn half_circle_within_tolerance() {
        let cmds = [
            PathCommand::Move(Point::new(0.0, 0.0)),
            PathCommand::Arc(ArcSegment {
                rx: 1.0,
                ry: 1.0,
                phi: 0.0,
                large_arc: false,
                sweep: true,
                to: Point::new(2.0, 0.0),
            }),
        ];
        let poly = &flatten(&cmds, 0.1)[0];
        let center = Point::new(1.0, 0.0);
        // every polyline vertex is on the circle
        for p in poly {
            assert!((p.distance(center) - 1.0).abs() < 1e-12);
        }
        // dense analytic sampling: each true point is within tolerance of the polyline
        for i in 0..=2000 {
            let t = std::f64::consts::PI * (1.0 + i as f64 / 2000.0);
            let q = Point::new(center.x + t.cos(), center.y + t.sin());
            let d = poly.windows(2).map(|w| segment_distance(q, w[0], w[1])).fold(f64::INFINITY, f64::min);
            assert!(d <= 0.1 + 1e-12, "distance {d}");
        }
    }

    #[test]
    fn cubic_flattening_meets_tolerance() {
        let (p0, c1, c2, p3) =
            (Point::new(0.0, 0.0), Point::new(0.0, 100.0), Point::new(100.0, 100.0), Point::new(100.0, 0.0));
        let cmds = [PathCommand::Move(p0), PathCommand::Cubic(c1, c2, p3)];
        let poly = &flatten(&cmds, 0.1)[0];
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let mt = 1.0 - t;
            let q = p0 * (mt * mt * mt) + c1 * (3.0 * mt * mt * t) + c2 * (3.0 * mt * t * t) + p3 * (t * t * t);
            let d = poly.windows(2).map(|w| segment_distance(q, w[0], w[1])).fold(f64::INFINITY, f64::min);
            assert!(d <= 0.1 + 1e-9);
        }
    }

    fn segment_distance(p: Point, a: Point, b: Point) -> f64 {
        let ab = b - a;
        let len2 = ab.x * ab.x + ab.y * ab.y;
        let t = if len2 == 0.0 { 0.0 } else { (((p.x - a.x) * ab.x + (p.y - a.y) * ab.y) / len2).clamp(0.0, 1.0) };
        p.distance(a + ab * t)
    }
}
