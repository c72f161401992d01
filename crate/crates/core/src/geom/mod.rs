//! Convex polygons, rigid poses, and the smooth geometric primitives built on
//! LogSumExp aggregation.

mod hull;
mod smooth;

use std::ops::{Add, Mul, Sub};

use thiserror::Error;

use crate::ad::{AdError, Scalar, Tape, Var};

pub use hull::convex_hull;
pub use smooth::{
    centroid, edge_normals, point_polygon_signed_distance, sample_boundary, signed_clearance,
    smooth_polygon_distance, smooth_sat_penetration, PreparedPolygon, NORM_GUARD,
};

/// Cross products inside `(-COLLINEAR_TOL, COLLINEAR_TOL)` count as collinear.
pub const COLLINEAR_TOL: f64 = 1e-9;
const MIN_EDGE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeomError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("polygon is not counter-clockwise (signed area {0})")]
    NotCounterClockwise(f64),
    #[error("polygon is reflex at vertex {vertex} (cross product {cross})")]
    NotConvex { vertex: usize, cross: f64 },
    #[error("edge {0} has zero length")]
    DegenerateEdge(usize),
    #[error("non-finite coordinate at vertex {0}")]
    NonFinite(usize),
    #[error("boundary sample count must be at least 1")]
    BadSampleCount,
    #[error("sigmoid scale must be positive, got {0}")]
    BadSigmoidScale(f64),
    #[error(transparent)]
    Ad(#[from] AdError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T> Point<T> {
    pub const fn new(x: T, y: T) -> Self {
        Self { x, y }
    }
}

impl<T: Scalar> Point<T> {
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    pub fn scale(self, s: T) -> Self {
        Point::new(self.x * s, self.y * s)
    }

    pub fn scale_f(self, s: f64) -> Self {
        Point::new(self.x * s, self.y * s)
    }

    pub fn value(self) -> Point<f64> {
        Point::new(self.x.value(), self.y.value())
    }

    pub fn norm_squared(self) -> T {
        self.dot(self)
    }
}

impl Point<f64> {
    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn lift<'t>(self, tape: &'t Tape) -> Point<Var<'t>> {
        Point::new(tape.var(self.x), tape.var(self.y))
    }
}

impl<T: Scalar> Add for Point<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Point::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Point::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<f64> for Point<T> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale_f(s)
    }
}

/// Convex polygon with counter-clockwise vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolygon<T> {
    vertices: Vec<Point<T>>,
}

impl<T: Scalar> ConvexPolygon<T> {
    /// Validates vertex count, orientation, and convexity. Near-collinear
    /// corners are accepted with a warning.
    pub fn new(vertices: Vec<Point<T>>) -> Result<Self, GeomError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeomError::TooFewVertices(n));
        }
        let pts: Vec<Point<f64>> = vertices.iter().map(|p| p.value()).collect();
        if let Some(i) = pts.iter().position(|p| !(p.x.is_finite() && p.y.is_finite())) {
            return Err(GeomError::NonFinite(i));
        }
        for i in 0..n {
            if (pts[(i + 1) % n] - pts[i]).norm() < MIN_EDGE {
                return Err(GeomError::DegenerateEdge(i));
            }
        }
        let area = signed_area(&pts);
        if area <= 0.0 {
            return Err(GeomError::NotCounterClockwise(area));
        }
        for i in 0..n {
            let prev = pts[(i + n - 1) % n];
            let cur = pts[i];
            let next = pts[(i + 1) % n];
            let cross = (cur - prev).cross(next - cur);
            if cross <= -COLLINEAR_TOL {
                return Err(GeomError::NotConvex { vertex: i, cross });
            }
            if cross < COLLINEAR_TOL {
                log::warn!("near-collinear polygon corner at vertex {i} (cross {cross:e})");
            }
        }
        Ok(Self { vertices })
    }

    /// Skips validation; for rigid images of an already validated polygon.
    pub(crate) fn trusted(vertices: Vec<Point<T>>) -> Self {
        Self { vertices }
    }

    pub fn vertices(&self) -> &[Point<T>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Edge `i` runs from vertex `i` to vertex `i + 1`.
    pub fn edge(&self, i: usize) -> (Point<T>, Point<T>) {
        let n = self.vertices.len();
        (self.vertices[i], self.vertices[(i + 1) % n])
    }

    pub fn value(&self) -> ConvexPolygon<f64> {
        ConvexPolygon { vertices: self.vertices.iter().map(|p| p.value()).collect() }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> ConvexPolygon<U> {
        ConvexPolygon { vertices: self.vertices.iter().map(|p| Point::new(f(p.x), f(p.y))).collect() }
    }

    /// Longest edge length.
    pub fn max_edge_length(&self) -> f64 {
        (0..self.len())
            .map(|i| {
                let (a, b) = self.edge(i);
                (b.value() - a.value()).norm()
            })
            .fold(0.0, f64::max)
    }
}

impl ConvexPolygon<f64> {
    /// Registers every coordinate as an independent tape input.
    pub fn lift<'t>(&self, tape: &'t Tape) -> ConvexPolygon<Var<'t>> {
        ConvexPolygon { vertices: self.vertices.iter().map(|p| p.lift(tape)).collect() }
    }

    /// Axis-aligned rectangle `[x0, x1] x [y0, y1]`.
    pub fn rectangle(x0: f64, y0: f64, x1: f64, y1: f64) -> Result<Self, GeomError> {
        Self::new(vec![
            Point::new(x0, y0),
            Point::new(x1, y0),
            Point::new(x1, y1),
            Point::new(x0, y1),
        ])
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self { vertices: self.vertices.iter().map(|p| Point::new(p.x + dx, p.y + dy)).collect() }
    }

    /// Rotation by `theta` about the origin followed by translation.
    pub fn transform(&self, theta: f64, dx: f64, dy: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self {
            vertices: self
                .vertices
                .iter()
                .map(|p| Point::new(c * p.x - s * p.y + dx, s * p.x + c * p.y + dy))
                .collect(),
        }
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }
}

fn signed_area(pts: &[Point<f64>]) -> f64 {
    let n = pts.len();
    0.5 * (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>()
}

/// Planar pose; `theta` in radians, heading `(cos theta, sin theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose2D<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

impl<T: Scalar> Pose2D<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self { x, y, theta }
    }

    pub fn heading(&self) -> Point<T> {
        Point::new(self.theta.cos(), self.theta.sin())
    }

    pub fn value(&self) -> Pose2D<f64> {
        Pose2D::new(self.x.value(), self.y.value(), self.theta.value())
    }
}

/// Body-frame polygon placed in the world by a pose.
#[derive(Debug, Clone, PartialEq)]
pub struct PolygonTemplate {
    local: ConvexPolygon<f64>,
}

impl PolygonTemplate {
    pub fn new(local: Vec<Point<f64>>) -> Result<Self, GeomError> {
        Ok(Self { local: ConvexPolygon::new(local)? })
    }

    pub fn local(&self) -> &ConvexPolygon<f64> {
        &self.local
    }

    /// World vertices `R(theta) v + (x, y)`; rigid motion keeps the polygon
    /// convex and counter-clockwise.
    pub fn place<T: Scalar>(&self, pose: &Pose2D<T>) -> ConvexPolygon<T> {
        let (c, s) = (pose.theta.cos(), pose.theta.sin());
        let vertices = self
            .local
            .vertices()
            .iter()
            .map(|v| Point::new(c * v.x - s * v.y + pose.x, s * v.x + c * v.y + pose.y))
            .collect();
        ConvexPolygon::trusted(vertices)
    }
}

/// Points on a polygon boundary, each an affine combination of the two
/// vertices of its edge.
#[derive(Debug, Clone)]
pub struct BoundarySamples<T> {
    pub points: Vec<Point<T>>,
    /// Largest gap between consecutive samples along an edge.
    pub spacing: f64,
    pub per_edge: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let sq = ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap();
        assert_eq!(sq.area(), 1.0);

        let cw = vec![Point::new(0.0, 0.0), Point::new(0.0, 1.0), Point::new(1.0, 1.0), Point::new(1.0, 0.0)];
        assert!(matches!(ConvexPolygon::new(cw), Err(GeomError::NotCounterClockwise(_))));

        let reflex = vec![
            Point::new(0.0, 0.0),
            Point::new(2.0, 0.0),
            Point::new(1.0, 0.5),
            Point::new(2.0, 2.0),
            Point::new(0.0, 2.0),
        ];
        assert!(matches!(ConvexPolygon::new(reflex), Err(GeomError::NotConvex { vertex: 2, .. })));

        let two = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0)];
        assert_eq!(ConvexPolygon::new(two), Err(GeomError::TooFewVertices(2)));

        let dup = vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert_eq!(ConvexPolygon::new(dup), Err(GeomError::DegenerateEdge(1)));
    }

    #[test]
    fn collinear_corner_accepted() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(0.5, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)];
        assert!(ConvexPolygon::new(pts).is_ok());
    }

    #[test]
    fn template_place_matches_transform() {
        let t = PolygonTemplate::new(vec![Point::new(-0.5, -0.25), Point::new(0.5, -0.25), Point::new(0.0, 0.5)]).unwrap();
        let placed = t.place(&Pose2D::new(1.0, 2.0, 0.7));
        let direct = t.local().transform(0.7, 1.0, 2.0);
        for (a, b) in placed.vertices().iter().zip(direct.vertices()) {
            assert!((a.x - b.x).abs() < 1e-15 && (a.y - b.y).abs() < 1e-15);
        }
        assert!((placed.area() - t.local().area()).abs() < 1e-12);
    }
}
