use std::f64::consts::PI;

use super::{Atom, Axis, Direction, Predicate, Scene, SceneObject, Shape, Smoothing, SpatialError};
use crate::ad::{hard_max, hard_min, lse_max, lse_min, AdError, OpCode, Scalar};
use crate::geom::{centroid, signed_clearance, smooth_polygon_distance, ConvexPolygon, Point, PreparedPolygon};

/// Smoothing of `|clr|` in `touch`.
pub const TOUCH_ABS_EPS: f64 = 1e-12;
/// Centroids closer than this have no defined bearing.
pub const BEARING_MIN_SEPARATION: f64 = 1e-9;

/// How extremes are aggregated: LSE at a temperature, or hard min/max.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Agg {
    Smooth(f64),
    Hard,
}

impl Agg {
    pub(crate) fn min<T: Scalar>(self, xs: &[T]) -> Result<T, AdError> {
        match self {
            Agg::Smooth(tau) => lse_min(xs, tau),
            Agg::Hard => hard_min(xs).ok_or(AdError::EmptyAggregate { op: OpCode::Min2 }),
        }
    }

    pub(crate) fn max<T: Scalar>(self, xs: &[T]) -> Result<T, AdError> {
        match self {
            Agg::Smooth(tau) => lse_max(xs, tau),
            Agg::Hard => hard_max(xs).ok_or(AdError::EmptyAggregate { op: OpCode::Max2 }),
        }
    }
}

pub(crate) fn polygon<'s, T>(
    scene: &'s Scene<T>,
    name: &str,
    predicate: &'static str,
) -> Result<&'s ConvexPolygon<T>, SpatialError>
where
    T: Scalar,
{
    match &scene.get(name)?.shape {
        Shape::Polygon(p) => Ok(p),
        Shape::Box3(_) => Err(SpatialError::UnsupportedShape { predicate, object: name.to_string() }),
    }
}

fn object<'s, T: Scalar>(scene: &'s Scene<T>, name: &str) -> Result<&'s SceneObject<T>, SpatialError> {
    scene.get(name)
}

/// `(lower, upper)` extent of an object along `axis`. Polygons aggregate
/// vertex coordinates with `agg`; boxes use their corners exactly.
pub(crate) fn extent<T: Scalar>(
    scene: &Scene<T>,
    name: &str,
    axis: Axis,
    agg: Agg,
    predicate: &'static str,
) -> Result<(T, T), SpatialError> {
    match &object(scene, name)?.shape {
        Shape::Box3(b) => {
            let i = match axis {
                Axis::X => 0,
                Axis::Y => 1,
                Axis::Z => 2,
            };
            Ok((b.min[i], b.max[i]))
        }
        Shape::Polygon(p) => {
            let coords: Vec<T> = match axis {
                Axis::X => p.vertices().iter().map(|v| v.x).collect(),
                Axis::Y => p.vertices().iter().map(|v| v.y).collect(),
                Axis::Z => return Err(SpatialError::UnsupportedShape { predicate, object: name.to_string() }),
            };
            Ok((agg.min(&coords)?, agg.max(&coords)?))
        }
    }
}

/// `min_axis(upper) - max_axis(lower) - kappa`.
fn ordered_gap<T: Scalar>(
    scene: &Scene<T>,
    lower: &str,
    upper: &str,
    axis: Axis,
    kappa: f64,
    agg: Agg,
    predicate: &'static str,
) -> Result<T, SpatialError> {
    let (_, lower_hi) = extent(scene, lower, axis, agg, predicate)?;
    let (upper_lo, _) = extent(scene, upper, axis, agg, predicate)?;
    Ok(upper_lo - lower_hi - kappa)
}

pub(crate) fn directional<T: Scalar>(
    scene: &Scene<T>,
    dir: Direction,
    i: &str,
    j: &str,
    kappa: f64,
    agg: Agg,
) -> Result<T, SpatialError> {
    let (lower, upper) = if dir.subject_is_lower() { (i, j) } else { (j, i) };
    ordered_gap(scene, lower, upper, dir.axis(), kappa, agg, dir.name())
}

pub(crate) fn between<T: Scalar>(
    scene: &Scene<T>,
    axis: Axis,
    objs: &[String],
    kappa: f64,
    agg: Agg,
) -> Result<T, SpatialError> {
    let name = if axis == Axis::X { "betweenPx" } else { "betweenPy" };
    let first = ordered_gap(scene, &objs[0], &objs[1], axis, kappa, agg, name)?;
    let second = ordered_gap(scene, &objs[1], &objs[2], axis, kappa, agg, name)?;
    Ok(agg.min(&[first, second])?)
}

pub(crate) fn oriented<T: Scalar>(scene: &Scene<T>, i: &str, j: &str, kappa: f64) -> Result<T, SpatialError> {
    let heading = |name: &str| -> Result<Point<T>, SpatialError> {
        object(scene, name)?.heading.ok_or_else(|| SpatialError::MissingHeading(name.to_string()))
    };
    let d = heading(i)? - heading(j)?;
    Ok(d.norm_squared() * -0.5 + kappa)
}

/// Wraps an angle to `(-pi, pi]`; the branch index depends only on the value.
pub fn wrap_angle<T: Scalar>(a: T) -> T {
    let turns = ((a.value() + PI) / (2.0 * PI)).ceil() - 1.0;
    if turns == 0.0 {
        a
    } else {
        a - 2.0 * PI * turns
    }
}

fn planar_centroid<T: Scalar>(shape: &Shape<T>) -> Point<T> {
    match shape {
        Shape::Polygon(p) => centroid(p),
        Shape::Box3(b) => Point::new((b.min[0] + b.max[0]) * 0.5, (b.min[1] + b.max[1]) * 0.5),
    }
}

pub(crate) fn bearing_to<T: Scalar>(
    scene: &Scene<T>,
    i: &str,
    j: &str,
    theta_ref: f64,
    kappa: f64,
) -> Result<T, SpatialError> {
    let ci = planar_centroid(&object(scene, i)?.shape);
    let cj = planar_centroid(&object(scene, j)?.shape);
    let d = cj - ci;
    if d.value().norm() < BEARING_MIN_SEPARATION {
        return Err(SpatialError::CoincidentCentroids(i.to_string(), j.to_string()));
    }
    let err = wrap_angle(d.y.atan2(d.x) - theta_ref);
    Ok(-err.square() + kappa)
}

/// Face margins of box `a` inside box `b`, hard-min (exact) or lse_min (smooth).
pub(crate) fn box_enclosure<T: Scalar>(
    scene: &Scene<T>,
    i: &str,
    j: &str,
    delta: f64,
    agg: Agg,
) -> Result<Option<T>, SpatialError> {
    let (a, b) = match (&object(scene, i)?.shape, &object(scene, j)?.shape) {
        (Shape::Box3(a), Shape::Box3(b)) => (a, b),
        (Shape::Polygon(_), Shape::Polygon(_)) => return Ok(None),
        (Shape::Box3(_), _) => {
            return Err(SpatialError::UnsupportedShape { predicate: "enclIn", object: j.to_string() })
        }
        _ => return Err(SpatialError::UnsupportedShape { predicate: "enclIn", object: i.to_string() }),
    };
    let mut margins = Vec::with_capacity(6);
    for k in 0..3 {
        margins.push(a.min[k] - b.min[k]);
        margins.push(b.max[k] - a.max[k]);
    }
    Ok(Some(agg.min(&margins)? - delta))
}

fn clearance<T: Scalar>(scene: &Scene<T>, i: &str, j: &str, s: &Smoothing, name: &'static str) -> Result<T, SpatialError> {
    let a = polygon(scene, i, name)?;
    let b = polygon(scene, j, name)?;
    Ok(signed_clearance(a, b, s.tau, s.samples, s.sigmoid_k)?)
}

fn enclosure<T: Scalar>(scene: &Scene<T>, i: &str, j: &str, delta: f64, s: &Smoothing) -> Result<T, SpatialError> {
    if let Some(r) = box_enclosure(scene, i, j, delta, Agg::Smooth(s.tau))? {
        return Ok(r);
    }
    let a = polygon(scene, i, "enclIn")?;
    let b = PreparedPolygon::new(polygon(scene, j, "enclIn")?)?;
    let sd: Vec<T> = a.vertices().iter().map(|&v| b.signed_distance(v, s.tau, s.sigmoid_k)).collect();
    Ok(-lse_max(&sd, s.tau)? - delta)
}

pub(crate) fn eval<T: Scalar>(atom: &Atom, scene: &Scene<T>, s: &Smoothing) -> Result<T, SpatialError> {
    if !(s.tau > 0.0 && s.tau.is_finite()) {
        return Err(AdError::BadTemperature(s.tau).into());
    }
    let o = &atom.objects;
    let agg = Agg::Smooth(s.tau);
    match atom.predicate {
        Predicate::CloseTo { eps } => {
            let a = polygon(scene, &o[0], "closeTo")?;
            let b = polygon(scene, &o[1], "closeTo")?;
            Ok(-smooth_polygon_distance(a, b, s.tau, s.samples, s.sigmoid_k)? + eps)
        }
        // Signed clearance: equal to the distance when apart, and it keeps a
        // gradient through penetration when the objects overlap.
        Predicate::FarFrom { eps } => Ok(clearance(scene, &o[0], &o[1], s, "farFrom")? - eps),
        Predicate::Touch { eps } => Ok(-clearance(scene, &o[0], &o[1], s, "touch")?.abs_smooth(TOUCH_ABS_EPS) + eps),
        Predicate::Ovlp { delta } => Ok(-clearance(scene, &o[0], &o[1], s, "ovlp")? - delta),
        Predicate::PartOvlp { delta_ov, delta_in } => {
            let ov = -clearance(scene, &o[0], &o[1], s, "partOvlp")? - delta_ov;
            let ij = -enclosure(scene, &o[0], &o[1], delta_in, s)?;
            let ji = -enclosure(scene, &o[1], &o[0], delta_in, s)?;
            Ok(lse_min(&[ov, ij, ji], s.tau)?)
        }
        Predicate::EnclIn { delta } => enclosure(scene, &o[0], &o[1], delta, s),
        Predicate::Directional { dir, kappa } => directional(scene, dir, &o[0], &o[1], kappa, agg),
        Predicate::Between { axis, kappa } => between(scene, axis, o, kappa, agg),
        Predicate::Oriented { kappa } => oriented(scene, &o[0], &o[1], kappa),
        Predicate::BearingTo { theta_ref, kappa } => bearing_to(scene, &o[0], &o[1], theta_ref, kappa),
    }
}
