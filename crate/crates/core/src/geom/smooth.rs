use super::{BoundarySamples, ConvexPolygon, GeomError, Point};
use crate::ad::{lse_max, lse_min, AdError, Scalar};

/// Added under every square root that computes a Euclidean norm, so distance
/// gradients stay finite at zero.
pub const NORM_GUARD: f64 = 1e-12;

/// Inward unit normal of every edge, in edge order.
pub fn edge_normals<T: Scalar>(poly: &ConvexPolygon<T>) -> Result<Vec<Point<T>>, GeomError> {
    (0..poly.len())
        .map(|i| {
            let (a, b) = poly.edge(i);
            let d = b - a;
            if d.value().norm() < super::MIN_EDGE {
                return Err(GeomError::DegenerateEdge(i));
            }
            let len = (d.norm_squared() + NORM_GUARD).sqrt();
            // left perpendicular points inward for counter-clockwise winding
            Ok(Point::new(-d.y / len, d.x / len))
        })
        .collect()
}

/// Polygon with its inward normals computed once, for repeated point queries.
#[derive(Debug, Clone)]
pub struct PreparedPolygon<T> {
    pub vertices: Vec<Point<T>>,
    pub normals: Vec<Point<T>>,
}

impl<T: Scalar> PreparedPolygon<T> {
    pub fn new(poly: &ConvexPolygon<T>) -> Result<Self, GeomError> {
        Ok(Self { vertices: poly.vertices().to_vec(), normals: edge_normals(poly)? })
    }

    fn edge(&self, i: usize) -> (Point<T>, Point<T>) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }

    /// Returns `(m_in, m_out, w)`: the smooth inner margin, the smooth distance
    /// to the boundary, and the sigmoid inside-weight.
    fn point_terms(&self, p: Point<T>, tau: f64, k: f64) -> (T, T, T) {
        let n = self.vertices.len();
        let mut margins = Vec::with_capacity(n);
        let mut dists = Vec::with_capacity(n);
        for i in 0..n {
            margins.push((p - self.vertices[i]).dot(self.normals[i]));
            let (a, b) = self.edge(i);
            dists.push(segment_distance(p, a, b));
        }
        let m_in = T::lse_min_unchecked(&margins, tau);
        let m_out = T::lse_min_unchecked(&dists, tau);
        let w = (m_in * k).sigmoid();
        (m_in, m_out, w)
    }

    /// Blended signed distance `(1 - w) m_out - w m_in`.
    pub fn signed_distance(&self, p: Point<T>, tau: f64, k: f64) -> T {
        let (m_in, m_out, w) = self.point_terms(p, tau, k);
        (w * -1.0 + 1.0) * m_out - w * m_in
    }

    /// Smooth unsigned distance from `p` to the polygon as a set: `(1 - w) m_out`
    /// with the inside weight taken from `m_out` signed by `m_in`. The
    /// half-plane margin alone is a poor scale outside sharp vertices, where
    /// it stays near zero far from the polygon.
    pub fn unsigned_distance(&self, p: Point<T>, tau: f64, k: f64) -> T {
        let (m_in, m_out, _) = self.point_terms(p, tau, k);
        let sign = m_in / (m_in.square() + tau * tau).sqrt();
        let w = (m_out * sign * k).sigmoid();
        (w * -1.0 + 1.0) * m_out
    }
}

/// Exact point-to-segment distance via the clamped projection.
fn segment_distance<T: Scalar>(p: Point<T>, a: Point<T>, b: Point<T>) -> T {
    let ab = b - a;
    let ap = p - a;
    let t = ap.dot(ab).value() / ab.norm_squared().value();
    let gap = if t <= 0.0 {
        ap
    } else if t >= 1.0 {
        p - b
    } else {
        ap - ab.scale(ap.dot(ab) / ab.norm_squared())
    };
    (gap.norm_squared() + NORM_GUARD).sqrt()
}

fn check_k(k: f64) -> Result<(), GeomError> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(GeomError::BadSigmoidScale(k))
    }
}

/// Smooth separating-axis penetration depth.
///
/// On every inward edge normal of either polygon the projection extremes are
/// LSE-smoothed, the interval overlap is formed with a smooth min/max pair, and
/// the overlaps are soft-minimized across axes before a final ReLU.
pub fn smooth_sat_penetration<T: Scalar>(
    a: &ConvexPolygon<T>,
    b: &ConvexPolygon<T>,
    tau: f64,
) -> Result<T, GeomError> {
    let mut axes = edge_normals(a)?;
    axes.extend(edge_normals(b)?);
    let mut overlaps = Vec::with_capacity(axes.len());
    for n in axes {
        let pa: Vec<T> = a.vertices().iter().map(|v| v.dot(n)).collect();
        let pb: Vec<T> = b.vertices().iter().map(|v| v.dot(n)).collect();
        let upper = lse_min(&[lse_max(&pa, tau)?, lse_max(&pb, tau)?], tau)?;
        let lower = lse_max(&[lse_min(&pa, tau)?, lse_min(&pb, tau)?], tau)?;
        overlaps.push(upper - lower);
    }
    Ok(lse_min(&overlaps, tau)?.relu())
}

/// `per_edge` samples on each edge at parameters `k / per_edge`.
pub fn sample_boundary<T: Scalar>(
    poly: &ConvexPolygon<T>,
    per_edge: usize,
) -> Result<BoundarySamples<T>, GeomError> {
    if per_edge == 0 {
        return Err(GeomError::BadSampleCount);
    }
    let mut points = Vec::with_capacity(per_edge * poly.len());
    for i in 0..poly.len() {
        let (a, b) = poly.edge(i);
        points.push(a);
        for k in 1..per_edge {
            let t = k as f64 / per_edge as f64;
            points.push(a * (1.0 - t) + b * t);
        }
    }
    Ok(BoundarySamples { points, spacing: poly.max_edge_length() / per_edge as f64, per_edge })
}

/// Smooth signed distance from `p` to the polygon: negative inside, positive
/// outside.
pub fn point_polygon_signed_distance<T: Scalar>(
    p: Point<T>,
    poly: &ConvexPolygon<T>,
    tau: f64,
    k: f64,
) -> Result<T, GeomError> {
    check_k(k)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(AdError::BadTemperature(tau).into());
    }
    Ok(PreparedPolygon::new(poly)?.signed_distance(p, tau, k))
}

/// Symmetric soft-min over boundary samples of each polygon of their smooth
/// unsigned distance to the other polygon.
pub fn smooth_polygon_distance<T: Scalar>(
    a: &ConvexPolygon<T>,
    b: &ConvexPolygon<T>,
    tau: f64,
    per_edge: usize,
    k: f64,
) -> Result<T, GeomError> {
    check_k(k)?;
    let pa = PreparedPolygon::new(a)?;
    let pb = PreparedPolygon::new(b)?;
    let one_way = |from: &ConvexPolygon<T>, to: &PreparedPolygon<T>| -> Result<T, GeomError> {
        let samples = sample_boundary(from, per_edge)?;
        let d: Vec<T> = samples.points.iter().map(|&p| to.unsigned_distance(p, tau, k)).collect();
        Ok(lse_min(&d, tau)?)
    };
    let ab = one_way(a, &pb)?;
    let ba = one_way(b, &pa)?;
    Ok(lse_min(&[ab, ba], tau)?)
}

/// Smooth distance minus smooth penetration: positive when separated, negative
/// when overlapping.
pub fn signed_clearance<T: Scalar>(
    a: &ConvexPolygon<T>,
    b: &ConvexPolygon<T>,
    tau: f64,
    per_edge: usize,
    k: f64,
) -> Result<T, GeomError> {
    Ok(smooth_polygon_distance(a, b, tau, per_edge, k)? - smooth_sat_penetration(a, b, tau)?)
}

/// Vertex mean.
pub fn centroid<T: Scalar>(poly: &ConvexPolygon<T>) -> Point<T> {
    let n = poly.len() as f64;
    let (first, rest) = poly.vertices().split_first().expect("polygon has vertices");
    let sum = rest.iter().fold(*first, |acc, &v| acc + v);
    Point::new(sum.x / n, sum.y / n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ad::Tape;

    fn square(x: f64, y: f64) -> ConvexPolygon<f64> {
        ConvexPolygon::rectangle(x, y, x + 1.0, y + 1.0).unwrap()
    }

    #[test]
    fn square_normals() {
        let n = edge_normals(&square(0.0, 0.0)).unwrap();
        let expect = [(0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)];
        for (n, e) in n.iter().zip(expect) {
            assert!((n.x - e.0).abs() < 1e-9 && (n.y - e.1).abs() < 1e-9);
        }
    }

    #[test]
    fn triangle_normals_point_inward() {
        let tri = ConvexPolygon::new(vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap();
        let c = centroid(&tri);
        let normals = edge_normals(&tri).unwrap();
        for (i, n) in normals.iter().enumerate() {
            let (a, b) = tri.edge(i);
            let mid = (a + b) * 0.5;
            assert!((c - mid).dot(*n) > 0.0);
            assert!((n.norm() - 1.0).abs() < 1e-9);
        }
        let h = normals[1];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((h.x + s).abs() < 1e-9 && (h.y + s).abs() < 1e-9);
    }

    #[test]
    fn normals_rotate_with_pose() {
        let sq = square(-0.5, -0.5);
        let theta = 0.6;
        let rotated = sq.transform(theta, 2.0, -1.0);
        let (s, c) = theta.sin_cos();
        for (n0, n1) in edge_normals(&sq).unwrap().iter().zip(edge_normals(&rotated).unwrap()) {
            let r = Point::new(c * n0.x - s * n0.y, s * n0.x + c * n0.y);
            assert!((r - n1).norm() < 1e-9);
        }
    }

    #[test]
    fn penetration_examples() {
        let pen = smooth_sat_penetration(&square(0.0, 0.0), &square(0.6, 0.0), 1e-3).unwrap();
        assert!((pen - 0.4).abs() <= 0.01, "{pen}");
        let pen = smooth_sat_penetration(&square(0.0, 0.0), &square(3.0, 0.0), 1e-3).unwrap();
        assert_eq!(pen, 0.0);
    }

    #[test]
    fn sampling_counts() {
        let sq = square(0.0, 0.0);
        let s1 = sample_boundary(&sq, 1).unwrap();
        assert_eq!(s1.points, sq.vertices().to_vec());
        let s16 = sample_boundary(&sq, 16).unwrap();
        assert_eq!(s16.points.len(), 64);
        assert_eq!(s16.spacing, 1.0 / 16.0);
        assert!(matches!(sample_boundary(&sq, 0), Err(GeomError::BadSampleCount)));
    }

    #[test]
    fn samples_lie_on_boundary() {
        let tri = ConvexPolygon::new(vec![Point::new(0.0, 0.0), Point::new(2.0, 0.5), Point::new(0.3, 1.7)]).unwrap();
        let s = sample_boundary(&tri, 7).unwrap();
        assert_eq!(s.points.len(), 21);
        for (j, p) in s.points.iter().enumerate() {
            let (a, b) = tri.edge(j / 7);
            assert!((b - a).cross(*p - a).abs() < 1e-12);
        }
    }

    #[test]
    fn point_signed_distance_examples() {
        let sq = square(0.0, 0.0);
        let sd = point_polygon_signed_distance(Point::new(0.5, 0.5), &sq, 1e-3, 50.0).unwrap();
        assert!((sd + 0.5).abs() <= 0.01, "{sd}");
        let sd = point_polygon_signed_distance(Point::new(2.0, 0.5), &sq, 1e-3, 50.0).unwrap();
        assert!((sd - 1.0).abs() <= 0.01, "{sd}");
        assert!(point_polygon_signed_distance(Point::new(2.0, 0.5), &sq, 1e-3, 0.0).is_err());
    }

    #[test]
    fn unsigned_distance_past_a_sharp_tip() {
        let sliver = ConvexPolygon::new(vec![Point::new(-3.0, -0.1), Point::new(0.0, 0.0), Point::new(-3.0, 0.1)]).unwrap();
        let prep = PreparedPolygon::new(&sliver).unwrap();
        let d = prep.unsigned_distance(Point::new(0.7, 0.0), 1e-3, 50.0);
        assert!((d - 0.7).abs() <= 0.01, "{d}");
        let inside = prep.unsigned_distance(Point::new(-2.5, 0.0), 1e-3, 50.0);
        assert!(inside.abs() <= 0.01, "{inside}");
    }

    #[test]
    fn distance_examples() {
        let d = smooth_polygon_distance(&square(0.0, 0.0), &square(3.0, 0.0), 1e-3, 16, 50.0).unwrap();
        assert!((d - 2.0).abs() <= 0.02, "{d}");
        let d = smooth_polygon_distance(&square(0.0, 0.0), &square(0.0, 0.0), 1e-3, 16, 50.0).unwrap();
        assert!(d.abs() <= 0.02, "{d}");
    }

    #[test]
    fn clearance_examples() {
        let c = signed_clearance(&square(0.0, 0.0), &square(3.0, 0.0), 1e-3, 16, 50.0).unwrap();
        assert!((c - 2.0).abs() <= 0.02);
        let c = signed_clearance(&square(0.0, 0.0), &square(0.6, 0.0), 1e-3, 16, 50.0).unwrap();
        assert!((c + 0.4).abs() <= 0.02, "{c}");
    }

    #[test]
    fn distance_is_symmetric_bitwise() {
        let a = square(0.0, 0.0).transform(0.3, 0.2, 0.1);
        let b = ConvexPolygon::new(vec![Point::new(2.0, 0.0), Point::new(3.0, 0.4), Point::new(2.2, 1.5)]).unwrap();
        for tau in [1e-1, 1e-2, 1e-3] {
            let ab = smooth_polygon_distance(&a, &b, tau, 8, 50.0).unwrap();
            let ba = smooth_polygon_distance(&b, &a, tau, 8, 50.0).unwrap();
            assert_eq!(ab.to_bits(), ba.to_bits());
        }
    }

    #[test]
    fn centroid_examples() {
        assert_eq!(centroid(&square(0.0, 0.0)), Point::new(0.5, 0.5));
        let tri = ConvexPolygon::new(vec![Point::new(0.0, 0.0), Point::new(3.0, 0.0), Point::new(0.0, 3.0)]).unwrap();
        assert_eq!(centroid(&tri), Point::new(1.0, 1.0));
        let c = centroid(&tri.translate(2.0, -1.0));
        assert!((c.x - 3.0).abs() < 1e-15 && (c.y - 0.0).abs() < 1e-15);
    }

    #[test]
    fn var_values_match_f64() {
        let a = square(0.0, 0.0).transform(0.2, 0.1, 0.0);
        let b = square(1.5, 0.3);
        let tape = Tape::new();
        let (av, bv) = (a.lift(&tape), b.lift(&tape));
        let f = signed_clearance(&a, &b, 1e-2, 4, 50.0).unwrap();
        let v = signed_clearance(&av, &bv, 1e-2, 4, 50.0).unwrap();
        assert_eq!(f.to_bits(), v.value().to_bits());
    }
}
