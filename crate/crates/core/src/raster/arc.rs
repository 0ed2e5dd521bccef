//! Elliptical arcs: endpoint parameterization → center parameterization,
//! point evaluation, and cubic approximation.

use crate::geom::Point;
use crate::normalize::ArcSegment;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CenterArc {
    pub center: Point,
    pub rx: f64,
    pub ry: f64,
    pub phi_deg: f64,
    pub theta1_deg: f64,
    pub delta_theta_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ArcParam {
    Center(CenterArc),
    /// Zero radius or coincident endpoints: the arc is a straight line to the endpoint.
    Degenerate(Point),
}

impl CenterArc {
    pub fn point_at_deg(&self, theta_deg: f64) -> Point {
        self.point_at(theta_deg.to_radians())
    }

    pub fn point_at(&self, theta: f64) -> Point {
        let (sin_phi, cos_phi) = self.phi_deg.to_radians().sin_cos();
        let (sin_t, cos_t) = theta.sin_cos();
        Point::new(
            self.center.x + self.rx * cos_phi * cos_t - self.ry * sin_phi * sin_t,
            self.center.y + self.rx * sin_phi * cos_t + self.ry * cos_phi * sin_t,
        )
    }

    pub fn start(&self) -> Point {
        self.point_at_deg(self.theta1_deg)
    }

    pub fn end(&self) -> Point {
        self.point_at_deg(self.theta1_deg + self.delta_theta_deg)
    }
}

/// Endpoint → center conversion with out-of-range radius correction.
pub fn arc_endpoint_to_center(p0: Point, arc: &ArcSegment) -> ArcParam {
    let p1 = arc.to;
    let (mut rx, mut ry) = (arc.rx.abs(), arc.ry.abs());
    if rx == 0.0 || ry == 0.0 || p0 == p1 {
        return ArcParam::Degenerate(p1);
    }
    let (sin_phi, cos_phi) = arc.phi.to_radians().sin_cos();
    let dx2 = (p0.x - p1.x) / 2.0;
    let dy2 = (p0.y - p1.y) / 2.0;
    let x1p = cos_phi * dx2 + sin_phi * dy2;
    let y1p = -sin_phi * dx2 + cos_phi * dy2;

    let lambda = (x1p * x1p) / (rx * rx) + (y1p * y1p) / (ry * ry);
    if lambda > 1.0 {
        let s = lambda.sqrt();
        rx *= s;
        ry *= s;
    }

    let rx2 = rx * rx;
    let ry2 = ry * ry;
    let num = rx2 * ry2 - rx2 * y1p * y1p - ry2 * x1p * x1p;
    let den = rx2 * y1p * y1p + ry2 * x1p * x1p;
    let mut coef = (num / den).max(0.0).sqrt();
    if arc.large_arc == arc.sweep {
        coef = -coef;
    }
    let cxp = coef * rx * y1p / ry;
    let cyp = -coef * ry * x1p / rx;
    let center = Point::new(
        cos_phi * cxp - sin_phi * cyp + (p0.x + p1.x) / 2.0,
        sin_phi * cxp + cos_phi * cyp + (p0.y + p1.y) / 2.0,
    );

    let ux = (x1p - cxp) / rx;
    let uy = (y1p - cyp) / ry;
    let vx = (-x1p - cxp) / rx;
    let vy = (-y1p - cyp) / ry;
    let theta1 = uy.atan2(ux);
    let mut delta = (ux * vy - uy * vx).atan2(ux * vx + uy * vy);
    if !arc.sweep && delta > 0.0 {
        delta -= std::f64::consts::TAU;
    } else if arc.sweep && delta < 0.0 {
        delta += std::f64::consts::TAU;
    }

    ArcParam::Center(CenterArc {
        center,
        rx,
        ry,
        phi_deg: arc.phi,
        theta1_deg: theta1.to_degrees(),
        delta_theta_deg: delta.to_degrees(),
    })
}

/// Cubic approximation of an arc, each piece spanning at most 90°.
/// Returns `(c1, c2, end)` triples; the last end is exactly `arc.to`.
pub fn arc_to_cubics(p0: Point, arc: &ArcSegment) -> Vec<[Point; 3]> {
    let center_arc = match arc_endpoint_to_center(p0, arc) {
        ArcParam::Center(c) => c,
        ArcParam::Degenerate(to) => return vec![[p0, to, to]],
    };
    let theta1 = center_arc.theta1_deg.to_radians();
    let delta = center_arc.delta_theta_deg.to_radians();
    let n = (delta.abs() / std::f64::consts::FRAC_PI_2 - 1e-9).ceil().max(1.0) as usize;
    let step = delta / n as f64;
    let k = 4.0 / 3.0 * (step / 4.0).tan();
    let (sin_phi, cos_phi) = arc.phi.to_radians().sin_cos();
    // derivative direction of the ellipse at angle t, scaled by k
    let tangent = |t: f64| {
        let (s, c) = t.sin_cos();
        Point::new(
            k * (-center_arc.rx * cos_phi * s - center_arc.ry * sin_phi * c),
            k * (-center_arc.rx * sin_phi * s + center_arc.ry * cos_phi * c),
        )
    };
    let mut out = Vec::with_capacity(n);
    let mut start = p0;
    for i in 0..n {
        let t0 = theta1 + step * i as f64;
        let t1 = t0 + step;
        let end = if i + 1 == n { arc.to } else { center_arc.point_at(t1) };
        out.push([start + tangent(t0), end - tangent(t1), end]);
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn arc(rx: f64, ry: f64, phi: f64, large: bool, sweep: bool, x: f64, y: f64) -> ArcSegment {
        ArcSegment { rx, ry, phi, large_arc: large, sweep, to: Point::new(x, y) }
    }

    #[test]
    fn half_circle() {
        let ArcParam::Center(c) = arc_endpoint_to_center(Point::ORIGIN, &arc(1.0, 1.0, 0.0, false, true, 2.0, 0.0))
        else {
            panic!("expected center form")
        };
        assert!(c.center.distance(Point::new(1.0, 0.0)) < 1e-12);
        assert!((c.delta_theta_deg.abs() - 180.0).abs() < 1e-9);
    }

    #[test]
    fn radius_correction_scales_by_sqrt_lambda() {
        let ArcParam::Center(c) = arc_endpoint_to_center(Point::ORIGIN, &arc(1.0, 1.0, 0.0, false, true, 4.0, 0.0))
        else {
            panic!("expected center form")
        };
        assert!((c.rx - 2.0).abs() < 1e-12 && (c.ry - 2.0).abs() < 1e-12);
        assert!(c.center.distance(Point::new(2.0, 0.0)) < 1e-12);
    }

    #[test]
    fn zero_radius_is_a_line() {
        let got = arc_endpoint_to_center(Point::new(1.0, 1.0), &arc(0.0, 5.0, 0.0, false, false, 9.0, 9.0));
        assert_eq!(got, ArcParam::Degenerate(Point::new(9.0, 9.0)));
        let same = arc_endpoint_to_center(Point::new(3.0, 3.0), &arc(2.0, 2.0, 0.0, false, false, 3.0, 3.0));
        assert_eq!(same, ArcParam::Degenerate(Point::new(3.0, 3.0)));
    }

    #[test]
    fn flags_select_the_four_candidate_arcs() {
        let p0 = Point::ORIGIN;
        let mut deltas = Vec::new();
        for (large, sweep) in [(false, false), (false, true), (true, false), (true, true)] {
            let ArcParam::Center(c) = arc_endpoint_to_center(p0, &arc(2.0, 2.0, 0.0, large, sweep, 2.0, 0.0)) else {
                unreachable!()
            };
            assert_eq!(c.delta_theta_deg > 0.0, sweep);
            assert_eq!(c.delta_theta_deg.abs() > 180.0, large);
            deltas.push(c.delta_theta_deg);
        }
        assert!((deltas[0].abs() + deltas[2].abs() - 360.0).abs() < 1e-9);
    }

    #[test]
    fn random_arcs_reproduce_endpoints() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let p0 = Point::new(rng.gen_range(-100.0..100.0), rng.gen_range(-100.0..100.0));
            let a = arc(
                rng.gen_range(0.1..80.0),
                rng.gen_range(0.1..80.0),
                rng.gen_range(-180.0..180.0),
                rng.gen(),
                rng.gen(),
                rng.gen_range(-100.0..100.0),
                rng.gen_range(-100.0..100.0),
            );
            let ArcParam::Center(c) = arc_endpoint_to_center(p0, &a) else { unreachable!() };
            assert!(c.start().distance(p0) < 1e-9, "{a:?}");
            assert!(c.end().distance(a.to) < 1e-9, "{a:?}");
            assert!(c.delta_theta_deg.abs() <= 360.0);
        }
    }

    #[test]
    fn cubic_pieces_stay_on_the_ellipse() {
        let a = arc(30.0, 10.0, 25.0, true, false, 20.0, 35.0);
        let p0 = Point::new(0.0, 0.0);
        let ArcParam::Center(c) = arc_endpoint_to_center(p0, &a) else { unreachable!() };
        let pieces = arc_to_cubics(p0, &a);
        assert!(pieces.len() >= 2 && pieces.len() <= 4);
        assert_eq!(pieces.last().unwrap()[2], a.to);
        // midpoint of every piece lies close to the ellipse
        let (s, co) = c.phi_deg.to_radians().sin_cos();
        let mut start = p0;
        for [c1, c2, end] in pieces {
            let mid = (start + c1 * 3.0 + c2 * 3.0 + end) * 0.125;
            let d = mid - c.center;
            let u = (co * d.x + s * d.y) / c.rx;
            let v = (-s * d.x + co * d.y) / c.ry;
            assert!(((u * u + v * v).sqrt() - 1.0).abs() < 1e-3);
            start = end;
        }
    }
}
