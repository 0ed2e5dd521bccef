use super::path::parse_number_list;
use crate::geom::Affine;

/// Parses a `transform` attribute into one matrix. Returns `None` on malformed input.
pub fn parse_transform(s: &str) -> Option<Affine> {
    let mut m = Affine::IDENTITY;
    let mut rest = s.trim();
    while !rest.is_empty() {
        let open = rest.find('(')?;
        let name = rest[..open].trim().trim_start_matches(',').trim();
        let close = open + rest[open..].find(')')?;
        let args = parse_number_list(&rest[open + 1..close])?;
        let t = match (name, args.as_slice()) {
            ("matrix", [a, b, c, d, e, f]) => Affine::new(*a, *b, *c, *d, *e, *f),
            ("translate", [tx]) => Affine::translate(*tx, 0.0),
            ("translate", [tx, ty]) => Affine::translate(*tx, *ty),
            ("scale", [s]) => Affine::scale(*s, *s),
            ("scale", [sx, sy]) => Affine::scale(*sx, *sy),
            ("rotate", [a]) => Affine::rotate_deg(*a),
            ("rotate", [a, cx, cy]) => {
                Affine::translate(*cx, *cy).then_apply(Affine::rotate_deg(*a)).then_apply(Affine::translate(-cx, -cy))
            }
            ("skewX", [a]) => Affine::skew_x_deg(*a),
            ("skewY", [a]) => Affine::skew_y_deg(*a),
            _ => return None,
        };
        m = m.then_apply(t);
        rest = rest[close + 1..].trim_start_matches(|c: char| c.is_whitespace() || c == ',');
    }
    m.is_finite().then_some(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;

    #[test]
    fn list_composes_left_to_right() {
        let m = parse_transform("translate(10, 0) scale(2)").unwrap();
        assert_eq!(m.apply(Point::new(1.0, 1.0)), Point::new(12.0, 2.0));
    }

    #[test]
    fn rotate_about_center() {
        let m = parse_transform("rotate(180 5 5)").unwrap();
        let p = m.apply(Point::new(0.0, 0.0));
        assert!((p.x - 10.0).abs() < 1e-12 && (p.y - 10.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_and_skew() {
        let m = parse_transform("matrix(1 0 0 1 3 4)").unwrap();
        assert_eq!(m, Affine::translate(3.0, 4.0));
        let k = parse_transform("skewX(45)").unwrap();
        assert!((k.c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn malformed() {
        assert!(parse_transform("translate(1").is_none());
        assert!(parse_transform("wobble(3)").is_none());
        assert!(parse_transform("scale(1 2 3)").is_none());
    }
}
