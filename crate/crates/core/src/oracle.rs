//! Exact, non-differentiable convex geometry used as ground truth.
//!
//! Everything here works on plain `f64` polygons with hard min/max. The smooth
//! primitives in [`crate::geom`] are checked against these functions.

use crate::geom::{ConvexPolygon, Point};
use crate::spatial::{Atom, Scene, SpatialError};

fn unit_normals(poly: &ConvexPolygon<f64>) -> impl Iterator<Item = Point<f64>> + '_ {
    (0..poly.len()).map(move |i| {
        let (a, b) = poly.edge(i);
        let d = b - a;
        let len = d.norm();
        Point::new(-d.y / len, d.x / len)
    })
}

fn projection(poly: &ConvexPolygon<f64>, n: Point<f64>) -> (f64, f64) {
    poly.vertices().iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        let p = v.dot(n);
        (lo.min(p), hi.max(p))
    })
}

/// Smallest interval overlap over all edge normals of both polygons. Negative
/// iff a separating axis exists.
pub fn sat_min_overlap(a: &ConvexPolygon<f64>, b: &ConvexPolygon<f64>) -> f64 {
    unit_normals(a)
        .chain(unit_normals(b))
        .map(|n| {
            let (alo, ahi) = projection(a, n);
            let (blo, bhi) = projection(b, n);
            ahi.min(bhi) - alo.max(blo)
        })
        .fold(f64::INFINITY, f64::min)
}

/// True when the polygons overlap or touch.
pub fn intersects(a: &ConvexPolygon<f64>, b: &ConvexPolygon<f64>) -> bool {
    sat_min_overlap(a, b) >= 0.0
}

pub fn point_segment_distance(p: Point<f64>, a: Point<f64>, b: Point<f64>) -> f64 {
    let ab = b - a;
    let t = ((p - a).dot(ab) / ab.dot(ab)).clamp(0.0, 1.0);
    (p - (a + ab * t)).norm()
}

fn segments_cross(p: Point<f64>, q: Point<f64>, r: Point<f64>, s: Point<f64>) -> bool {
    let d1 = (q - p).cross(r - p);
    let d2 = (q - p).cross(s - p);
    let d3 = (s - r).cross(p - r);
    let d4 = (s - r).cross(q - r);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

pub fn segment_segment_distance(p: Point<f64>, q: Point<f64>, r: Point<f64>, s: Point<f64>) -> f64 {
    if segments_cross(p, q, r, s) {
        return 0.0;
    }
    point_segment_distance(p, r, s)
        .min(point_segment_distance(q, r, s))
        .min(point_segment_distance(r, p, q))
        .min(point_segment_distance(s, p, q))
}

/// Minimum Euclidean distance between the two sets; zero when they intersect.
pub fn exact_distance(a: &ConvexPolygon<f64>, b: &ConvexPolygon<f64>) -> f64 {
    if intersects(a, b) {
        return 0.0;
    }
    let mut best = f64::INFINITY;
    for i in 0..a.len() {
        let (p, q) = a.edge(i);
        for j in 0..b.len() {
            let (r, s) = b.edge(j);
            best = best.min(segment_segment_distance(p, q, r, s));
        }
    }
    best
}

/// Separating-axis penetration depth: the smallest face-normal overlap,
/// clamped at zero.
pub fn exact_penetration(a: &ConvexPolygon<f64>, b: &ConvexPolygon<f64>) -> f64 {
    sat_min_overlap(a, b).max(0.0)
}

/// Distance when disjoint, minus penetration depth otherwise.
pub fn exact_clearance(a: &ConvexPolygon<f64>, b: &ConvexPolygon<f64>) -> f64 {
    let overlap = sat_min_overlap(a, b);
    if overlap > 0.0 {
        -overlap
    } else {
        exact_distance(a, b)
    }
}

/// Signed distance to the boundary: negative strictly inside.
pub fn exact_point_sd(p: Point<f64>, poly: &ConvexPolygon<f64>) -> f64 {
    let inside = unit_normals(poly).enumerate().all(|(i, n)| (p - poly.vertices()[i]).dot(n) > 0.0);
    let dist = (0..poly.len())
        .map(|i| {
            let (a, b) = poly.edge(i);
            point_segment_distance(p, a, b)
        })
        .fold(f64::INFINITY, f64::min);
    if inside {
        -dist
    } else {
        dist
    }
}

/// `-delta_in - max over vertices of a of their signed distance to b`.
pub fn exact_enclosure(a: &ConvexPolygon<f64>, b: &ConvexPolygon<f64>, delta_in: f64) -> f64 {
    let worst = a.vertices().iter().map(|&v| exact_point_sd(v, b)).fold(f64::NEG_INFINITY, f64::max);
    -delta_in - worst
}

/// Exact robustness of one spatial atom in one scene.
pub fn exact_robustness(scene: &Scene<f64>, atom: &Atom) -> Result<f64, SpatialError> {
    crate::spatial::eval_exact(atom, scene)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(x: f64, y: f64) -> ConvexPolygon<f64> {
        ConvexPolygon::rectangle(x, y, x + 1.0, y + 1.0).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(exact_distance(&square(0.0, 0.0), &square(3.0, 0.0)), 2.0);
        assert_eq!(exact_distance(&square(0.0, 0.0), &square(1.0, 0.0)), 0.0);
        assert_eq!(exact_distance(&square(0.0, 0.0), &square(0.5, 0.5)), 0.0);
    }

    #[test]
    fn vertex_to_vertex_case() {
        // nearest pair is the square corner (1, 1) and the triangle apex (2, 2)
        let tri = ConvexPolygon::new(vec![Point::new(2.0, 2.0), Point::new(4.0, 2.5), Point::new(2.5, 4.0)]).unwrap();
        let d = exact_distance(&square(0.0, 0.0), &tri);
        assert!((d - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn penetration_examples() {
        let pen = exact_penetration(&square(0.0, 0.0), &square(0.6, 0.0));
        assert!((pen - 0.4).abs() < 1e-12);
        assert_eq!(exact_penetration(&square(0.0, 0.0), &square(3.0, 0.0)), 0.0);
        let c = exact_clearance(&square(0.0, 0.0), &square(0.6, 0.0));
        assert!((c + 0.4).abs() < 1e-12);
    }

    #[test]
    fn point_sd_examples() {
        let sq = square(0.0, 0.0);
        assert_eq!(exact_point_sd(Point::new(0.5, 0.5), &sq), -0.5);
        assert_eq!(exact_point_sd(Point::new(2.0, 0.5), &sq), 1.0);
        assert_eq!(exact_point_sd(Point::new(1.0, 0.5), &sq), 0.0);
    }

    #[test]
    fn enclosure_example() {
        let inner = ConvexPolygon::rectangle(0.4, 0.4, 0.6, 0.6).unwrap();
        let r = exact_enclosure(&inner, &square(0.0, 0.0), 0.1);
        assert!((r - 0.3).abs() < 1e-12);
        let r = exact_enclosure(&square(0.0, 0.0), &square(0.0, 0.0), 0.1);
        assert_eq!(r, -0.1);
    }
}
