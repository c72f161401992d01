use super::{ConvexPolygon, GeomError, Point};

/// Andrew's monotone chain. Collinear points are dropped; the result is
/// counter-clockwise.
pub fn convex_hull(points: &[Point<f64>]) -> Result<ConvexPolygon<f64>, GeomError> {
    let mut pts: Vec<Point<f64>> = points.to_vec();
    pts.sort_by(|a, b| a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)));
    pts.dedup();
    if pts.len() < 3 {
        return Err(GeomError::TooFewVertices(pts.len()));
    }
    let turn = |o: Point<f64>, a: Point<f64>, b: Point<f64>| (a - o).cross(b - o);
    let mut hull: Vec<Point<f64>> = Vec::with_capacity(2 * pts.len());
    for &p in &pts {
        while hull.len() >= 2 && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    let lower = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower && turn(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();
    ConvexPolygon::new(hull)
}
