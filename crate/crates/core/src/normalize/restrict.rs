use super::{ArcSegment, PathCommand};
use crate::geom::Point;
use crate::parse::RawCommand;

/// Reduces absolute commands to `M L C A Z`. Quadratics are degree-elevated,
/// smooth curves get their reflected control point made explicit.
pub fn restrict_vocabulary(commands: &[RawCommand]) -> Vec<PathCommand> {
    let mut out: Vec<PathCommand> = Vec::with_capacity(commands.len());
    let mut pen = Point::ORIGIN;
    let mut start = Point::ORIGIN;
    // control point a following S or T reflects, if the previous command had one
    let mut last_cubic_ctrl: Option<Point> = None;
    let mut last_quad_ctrl: Option<Point> = None;
    let mut after_close = false;

    for cmd in commands {
        let a = &cmd.args;
        let pt = |i: usize| Point::new(a[i], a[i + 1]);
        if cmd.letter != 'M' && cmd.letter != 'Z' && after_close {
            out.push(PathCommand::Move(start));
        }
        after_close = false;
        let (mut cubic_ctrl, mut quad_ctrl) = (None, None);
        match cmd.letter {
            'M' => {
                let p = pt(0);
                // a move directly after a move draws nothing
                if let Some(PathCommand::Move(prev)) = out.last_mut() {
                    *prev = p;
                } else {
                    out.push(PathCommand::Move(p));
                }
                start = p;
                pen = p;
            }
            'L' => {
                pen = pt(0);
                out.push(PathCommand::Line(pen));
            }
            'C' => {
                let (c2, p) = (pt(2), pt(4));
                out.push(PathCommand::Cubic(pt(0), c2, p));
                cubic_ctrl = Some(c2);
                pen = p;
            }
            'S' => {
                let c1 = last_cubic_ctrl.map_or(pen, |c| c.reflect_about(pen));
                let (c2, p) = (pt(0), pt(2));
                out.push(PathCommand::Cubic(c1, c2, p));
                cubic_ctrl = Some(c2);
                pen = p;
            }
            'Q' | 'T' => {
                let (q, p) = if cmd.letter == 'Q' {
                    (pt(0), pt(2))
                } else {
                    (last_quad_ctrl.map_or(pen, |c| c.reflect_about(pen)), pt(0))
                };
                let (c1, c2) = elevate(pen, q, p);
                out.push(PathCommand::Cubic(c1, c2, p));
                quad_ctrl = Some(q);
                pen = p;
            }
            'A' => {
                let to = pt(5);
                out.push(PathCommand::Arc(ArcSegment {
                    rx: a[0].abs(),
                    ry: a[1].abs(),
                    phi: a[2],
                    large_arc: a[3] != 0.0,
                    sweep: a[4] != 0.0,
                    to,
                }));
                pen = to;
            }
            'Z' => {
                if !matches!(out.last(), None | Some(PathCommand::Close)) {
                    out.push(PathCommand::Close);
                }
                pen = start;
                after_close = true;
            }
            other => unreachable!("restrict_vocabulary expects absolute input, got {other}"),
        }
        last_cubic_ctrl = cubic_ctrl;
        last_quad_ctrl = quad_ctrl;
    }
    if let Some(PathCommand::Move(_)) = out.last() {
        out.pop();
    }
    out
}

/// Control points of the cubic equal to the quadratic `p0 q p2`.
pub(crate) fn elevate(p0: Point, q: Point, p2: Point) -> (Point, Point) {
    (p0 + (q - p0) * (2.0 / 3.0), p2 + (q - p2) * (2.0 / 3.0))
}

/// The inverse view: canonical commands as absolute raw commands.
pub(crate) fn to_raw(commands: &[PathCommand]) -> Vec<RawCommand> {
    commands
        .iter()
        .map(|c| match *c {
            PathCommand::Move(p) => RawCommand::new('M', vec![p.x, p.y]),
            PathCommand::Line(p) => RawCommand::new('L', vec![p.x, p.y]),
            PathCommand::Cubic(c1, c2, p) => RawCommand::new('C', vec![c1.x, c1.y, c2.x, c2.y, p.x, p.y]),
            PathCommand::Arc(a) => RawCommand::new(
                'A',
                vec![a.rx, a.ry, a.phi, a.large_arc as u8 as f64, a.sweep as u8 as f64, a.to.x, a.to.y],
            ),
            PathCommand::Close => RawCommand::new('Z', vec![]),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalize::absolutize;
    use crate::parse::{parse_path_data, serialize_path_data};
    use proptest::prelude::*;

    fn restricted(d: &str) -> String {
        let abs = absolutize(&parse_path_data(d).unwrap()).unwrap();
        serialize_path_data(&to_raw(&restrict_vocabulary(&abs)))
    }

    #[test]
    fn quadratic_elevation() {
        assert_eq!(restricted("M 0 0 Q 3 3 6 0"), "M0 0 C2 2 4 2 6 0");
    }

    #[test]
    fn smooth_cubic_reflects() {
        assert_eq!(restricted("M 0 0 C 0 1 1 1 1 0 S 2 -1 2 0"), "M0 0 C0 1 1 1 1 0 C1 -1 2 -1 2 0");
        // without a preceding cubic the first control is the current point
        assert_eq!(restricted("M 0 0 L 1 0 S 2 -1 2 0"), "M0 0 L1 0 C1 0 2 -1 2 0");
    }

    #[test]
    fn smooth_quadratic_reflects() {
        // T after Q reflects (3,3) about (6,0) to (9,-3)
        assert_eq!(restricted("M0 0 Q3 3 6 0 T12 0"), "M0 0 C2 2 4 2 6 0 C8 -2 10 -2 12 0");
        // T without a preceding quadratic is a straight line
        assert_eq!(restricted("M0 0 T 6 0"), "M0 0 C0 0 2 0 6 0");
    }

    #[test]
    fn arc_passes_through() {
        assert_eq!(restricted("M 0 0 A 1 1 0 0 1 2 0"), "M0 0 A1 1 0 0 1 2 0");
        assert_eq!(restricted("M 0 0 A -1 -2 0 0 1 2 0"), "M0 0 A1 2 0 0 1 2 0");
    }

    #[test]
    fn drawing_after_close_gets_a_move() {
        assert_eq!(restricted("M1 1 L5 1 L5 5 Z L9 9"), "M1 1 L5 1 L5 5 Z M1 1 L9 9");
        assert_eq!(restricted("M0 0 M3 3 L4 4 M7 7"), "M3 3 L4 4");
    }

    #[test]
    fn elevation_matches_quadratic() {
        let (p0, q, p2) = (Point::new(-3.5, 2.0), Point::new(10.25, -7.0), Point::new(4.0, 9.5));
        let (c1, c2) = elevate(p0, q, p2);
        for i in 0..100 {
            let t = i as f64 / 99.0;
            let mt = 1.0 - t;
            let quad = p0 * (mt * mt) + q * (2.0 * mt * t) + p2 * (t * t);
            let cubic = p0 * (mt * mt * mt) + c1 * (3.0 * mt * mt * t) + c2 * (3.0 * mt * t * t) + p2 * (t * t * t);
            assert!(quad.distance(cubic) < 1e-12);
        }
    }

    /// Independent evaluator of the original command list: samples every
    /// segment straight from the SVG definitions.
    fn sample_raw(cmds: &[RawCommand]) -> Vec<Point> {
        let mut pts = Vec::new();
        let (mut pen, mut start) = (Point::ORIGIN, Point::ORIGIN);
        let (mut prev_c2, mut prev_q): (Option<Point>, Option<Point>) = (None, None);
        for c in cmds {
            let a = &c.args;
            let (mut nc2, mut nq) = (None, None);
            let cubic = |p0: Point, c1: Point, c2: Point, p3: Point, pts: &mut Vec<Point>| {
                for i in 0..=16 {
                    let t = i as f64 / 16.0;
                    let mt = 1.0 - t;
                    pts.push(
                        p0 * (mt * mt * mt) + c1 * (3.0 * mt * mt * t) + c2 * (3.0 * mt * t * t) + p3 * (t * t * t),
                    );
                }
            };
            let quad = |p0: Point, q: Point, p2: Point, pts: &mut Vec<Point>| {
                for i in 0..=16 {
                    let t = i as f64 / 16.0;
                    let mt = 1.0 - t;
                    pts.push(p0 * (mt * mt) + q * (2.0 * mt * t) + p2 * (t * t));
                }
            };
            match c.letter {
                'M' => {
                    pen = Point::new(a[0], a[1]);
                    start = pen;
                    pts.push(pen);
                }
                'L' => {
                    pen = Point::new(a[0], a[1]);
                    pts.push(pen);
                }
                'C' => {
                    let p = Point::new(a[4], a[5]);
                    cubic(pen, Point::new(a[0], a[1]), Point::new(a[2], a[3]), p, &mut pts);
                    nc2 = Some(Point::new(a[2], a[3]));
                    pen = p;
                }
                'S' => {
                    let c1 = match prev_c2 {
                        Some(c) => Point::new(2.0 * pen.x - c.x, 2.0 * pen.y - c.y),
                        None => pen,
                    };
                    let p = Point::new(a[2], a[3]);
                    cubic(pen, c1, Point::new(a[0], a[1]), p, &mut pts);
                    nc2 = Some(Point::new(a[0], a[1]));
                    pen = p;
                }
                'Q' => {
                    let p = Point::new(a[2], a[3]);
                    quad(pen, Point::new(a[0], a[1]), p, &mut pts);
                    nq = Some(Point::new(a[0], a[1]));
                    pen = p;
                }
                'T' => {
                    let q = match prev_q {
                        Some(c) => Point::new(2.0 * pen.x - c.x, 2.0 * pen.y - c.y),
                        None => pen,
                    };
                    let p = Point::new(a[0], a[1]);
                    quad(pen, q, p, &mut pts);
                    nq = Some(q);
                    pen = p;
                }
                'Z' => {
                    pen = start;
                    pts.push(pen);
                }
                _ => unreachable!(),
            }
            prev_c2 = nc2;
            prev_q = nq;
        }
        pts
    }

    fn sample_canonical(cmds: &[PathCommand]) -> Vec<Point> {
        let mut pts = Vec::new();
        let (mut pen, mut start) = (Point::ORIGIN, Point::ORIGIN);
        for c in cmds {
            match *c {
                PathCommand::Move(p) => {
                    pen = p;
                    start = p;
                    pts.push(p);
                }
                PathCommand::Line(p) => {
                    pen = p;
                    pts.push(p);
                }
                PathCommand::Cubic(c1, c2, p) => {
                    for i in 0..=16 {
                        let t = i as f64 / 16.0;
                        let mt = 1.0 - t;
                        pts.push(
                            pen * (mt * mt * mt) + c1 * (3.0 * mt * mt * t) + c2 * (3.0 * mt * t * t) + p * (t * t * t),
                        );
                    }
                    pen = p;
                }
                PathCommand::Close => {
                    pen = start;
                    pts.push(pen);
                }
                PathCommand::Arc(_) => unreachable!(),
            }
        }
        pts
    }

    fn arb_path() -> impl Strategy<Value = Vec<RawCommand>> {
        let coord = || -100.0..100.0f64;
        let cmd = prop_oneof![
            (coord(), coord()).prop_map(|(x, y)| RawCommand::new('l', vec![x, y])),
            coord().prop_map(|x| RawCommand::new('h', vec![x])),
            coord().prop_map(|y| RawCommand::new('V', vec![y])),
            proptest::collection::vec(coord(), 6).prop_map(|a| RawCommand::new('c', a)),
            proptest::collection::vec(coord(), 4).prop_map(|a| RawCommand::new('S', a)),
            proptest::collection::vec(coord(), 4).prop_map(|a| RawCommand::new('q', a)),
            (coord(), coord()).prop_map(|(x, y)| RawCommand::new('t', vec![x, y])),
            (coord(), coord()).prop_map(|(x, y)| RawCommand::new('T', vec![x, y])),
        ];
        (coord(), coord(), proptest::collection::vec(cmd, 1..20)).prop_map(|(x, y, rest)| {
            let mut v = vec![RawCommand::new('m', vec![x, y])];
            v.extend(rest);
            v
        })
    }

    proptest! {
        #[test]
        fn expansions_preserve_geometry(raw in arb_path()) {
            let abs = absolutize(&raw).unwrap();
            let expected = sample_raw(&abs);
            let restricted = restrict_vocabulary(&abs);
            let got = sample_canonical(&restricted);
            prop_assert_eq!(expected.len(), got.len());
            for (e, g) in expected.iter().zip(&got) {
                prop_assert!(e.distance(*g) < 1e-9, "{:?} vs {:?}", e, g);
            }
            prop_assert!(restricted.iter().all(|c| "MLCAZ".contains(c.letter())));
        }
    }
}
