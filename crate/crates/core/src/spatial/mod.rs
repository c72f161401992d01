//! Spatial atomic predicates and their quantitative semantics.
//!
//! Every predicate has a smooth form, generic over [`Scalar`] and built from
//! the LSE-smoothed primitives in [`crate::geom`], and an exact form backed by
//! [`crate::oracle`].

pub mod exact;
pub mod smooth;

use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

use crate::ad::{AdError, Scalar, Tape, Var};
use crate::geom::{GeomError, Point, ConvexPolygon};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpatialError {
    #[error("unknown object `{0}`")]
    UnknownObject(String),
    #[error("object `{0}` defined twice in one scene")]
    DuplicateObject(String),
    #[error("object `{0}` has no heading")]
    MissingHeading(String),
    #[error("`{predicate}` does not support the shape of `{object}`")]
    UnsupportedShape { predicate: &'static str, object: String },
    #[error("bearing undefined: centroids of `{0}` and `{1}` coincide")]
    CoincidentCentroids(String, String),
    #[error("unknown predicate `{0}`")]
    UnknownPredicate(String),
    #[error("`{predicate}` takes {expected} objects, got {got}")]
    Arity { predicate: &'static str, expected: usize, got: usize },
    #[error("`{predicate}` takes {expected} parameters, got {got}")]
    ParamCount { predicate: &'static str, expected: usize, got: usize },
    #[error("`{predicate}`: parameter `{name}` = {value} out of range")]
    InvalidParam { predicate: &'static str, name: &'static str, value: f64 },
    #[error("box corners out of order")]
    InvertedBox,
    #[error(transparent)]
    Geom(#[from] GeomError),
    #[error(transparent)]
    Ad(#[from] AdError),
}

/// Axis-aligned box in 3D, `min <= max` componentwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisAlignedBox3<T> {
    pub min: [T; 3],
    pub max: [T; 3],
}

impl<T: Scalar> AxisAlignedBox3<T> {
    pub fn new(min: [T; 3], max: [T; 3]) -> Result<Self, SpatialError> {
        if (0..3).any(|i| min[i].value() > max[i].value()) {
            return Err(SpatialError::InvertedBox);
        }
        Ok(Self { min, max })
    }

    pub fn value(&self) -> AxisAlignedBox3<f64> {
        AxisAlignedBox3 { min: self.min.map(|v| v.value()), max: self.max.map(|v| v.value()) }
    }
}

impl AxisAlignedBox3<f64> {
    /// Box of the given half extents around `center`.
    pub fn centered(center: [f64; 3], half: [f64; 3]) -> Result<Self, SpatialError> {
        Self::new(
            [center[0] - half[0], center[1] - half[1], center[2] - half[2]],
            [center[0] + half[0], center[1] + half[1], center[2] + half[2]],
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    Polygon(ConvexPolygon<T>),
    Box3(AxisAlignedBox3<T>),
}

impl<T: Scalar> Shape<T> {
    pub fn value(&self) -> Shape<f64> {
        match self {
            Shape::Polygon(p) => Shape::Polygon(p.value()),
            Shape::Box3(b) => Shape::Box3(b.value()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject<T> {
    pub shape: Shape<T>,
    /// Unit heading; required by `oriented`.
    pub heading: Option<Point<T>>,
}

impl<T> SceneObject<T> {
    pub fn polygon(poly: ConvexPolygon<T>) -> Self {
        Self { shape: Shape::Polygon(poly), heading: None }
    }

    pub fn boxed(b: AxisAlignedBox3<T>) -> Self {
        Self { shape: Shape::Box3(b), heading: None }
    }

    pub fn with_heading(mut self, heading: Point<T>) -> Self {
        self.heading = Some(heading);
        self
    }
}

/// Named objects at one time step.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<T> {
    objects: IndexMap<String, SceneObject<T>>,
}

impl<T> Default for Scene<T> {
    fn default() -> Self {
        Self { objects: IndexMap::new() }
    }
}

impl<T: Scalar> Scene<T> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, object: SceneObject<T>) -> Result<(), SpatialError> {
        let name = name.into();
        if self.objects.contains_key(&name) {
            return Err(SpatialError::DuplicateObject(name));
        }
        self.objects.insert(name, object);
        Ok(())
    }

    pub fn with(mut self, name: impl Into<String>, object: SceneObject<T>) -> Result<Self, SpatialError> {
        self.insert(name, object)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Result<&SceneObject<T>, SpatialError> {
        self.objects.get(name).ok_or_else(|| SpatialError::UnknownObject(name.to_string()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.objects.contains_key(name)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.objects.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SceneObject<T>)> {
        self.objects.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U + Copy) -> Scene<U> {
        let objects = self
            .objects
            .iter()
            .map(|(k, o)| {
                let shape = match &o.shape {
                    Shape::Polygon(p) => Shape::Polygon(p.map(f)),
                    Shape::Box3(b) => Shape::Box3(AxisAlignedBox3 { min: b.min.map(f), max: b.max.map(f) }),
                };
                let heading = o.heading.map(|h| Point::new(f(h.x), f(h.y)));
                (k.clone(), SceneObject { shape, heading })
            })
            .collect();
        Scene { objects }
    }

    pub fn value(&self) -> Scene<f64> {
        self.map(|v| v.value())
    }
}

impl Scene<f64> {
    /// Copies the scene onto a tape with every coordinate as an input.
    pub fn lift<'t>(&self, tape: &'t Tape) -> Scene<Var<'t>> {
        self.map(|v| tape.var(v))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    LeftOf,
    RightOf,
    Behind,
    InFrontOf,
    Below,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Direction {
    pub const ALL: [Direction; 6] = [
        Direction::LeftOf,
        Direction::RightOf,
        Direction::Behind,
        Direction::InFrontOf,
        Direction::Below,
        Direction::Above,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Direction::LeftOf => "leftOf",
            Direction::RightOf => "rightOf",
            Direction::Behind => "behind",
            Direction::InFrontOf => "inFrontOf",
            Direction::Below => "below",
            Direction::Above => "above",
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            Direction::LeftOf | Direction::RightOf => Axis::X,
            Direction::Behind | Direction::InFrontOf => Axis::Y,
            Direction::Below | Direction::Above => Axis::Z,
        }
    }

    /// Whether the first operand is the one with the smaller coordinates.
    pub fn subject_is_lower(self) -> bool {
        matches!(self, Direction::LeftOf | Direction::Behind | Direction::Below)
    }
}

/// Spatial predicate with its parameters, in the order they appear in the
/// formula language.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predicate {
    CloseTo { eps: f64 },
    FarFrom { eps: f64 },
    Touch { eps: f64 },
    Ovlp { delta: f64 },
    PartOvlp { delta_ov: f64, delta_in: f64 },
    EnclIn { delta: f64 },
    Directional { dir: Direction, kappa: f64 },
    Between { axis: Axis, kappa: f64 },
    Oriented { kappa: f64 },
    BearingTo { theta_ref: f64, kappa: f64 },
}

pub const PREDICATE_NAMES: [&str; 16] = [
    "closeTo", "farFrom", "touch", "ovlp", "partOvlp", "enclIn", "leftOf", "rightOf", "behind", "inFrontOf",
    "below", "above", "betweenPx", "betweenPy", "oriented", "bearingTo",
];

impl Predicate {
    /// Builds a predicate from its formula-language name and positional
    /// parameters.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self, SpatialError> {
        let canonical = PREDICATE_NAMES
            .iter()
            .find(|n| **n == name)
            .copied()
            .ok_or_else(|| SpatialError::UnknownPredicate(name.to_string()))?;
        let expected = match canonical {
            "partOvlp" | "bearingTo" => 2,
            _ => 1,
        };
        if params.len() != expected {
            return Err(SpatialError::ParamCount { predicate: canonical, expected, got: params.len() });
        }
        let p = params[0];
        let pred = match canonical {
            "closeTo" => Predicate::CloseTo { eps: p },
            "farFrom" => Predicate::FarFrom { eps: p },
            "touch" => Predicate::Touch { eps: p },
            "ovlp" => Predicate::Ovlp { delta: p },
            "partOvlp" => Predicate::PartOvlp { delta_ov: p, delta_in: params[1] },
            "enclIn" => Predicate::EnclIn { delta: p },
            "betweenPx" => Predicate::Between { axis: Axis::X, kappa: p },
            "betweenPy" => Predicate::Between { axis: Axis::Y, kappa: p },
            "oriented" => Predicate::Oriented { kappa: p },
            "bearingTo" => Predicate::BearingTo { theta_ref: p, kappa: params[1] },
            other => {
                let dir = Direction::ALL.into_iter().find(|d| d.name() == other).expect("listed name");
                Predicate::Directional { dir, kappa: p }
            }
        };
        pred.validate()?;
        Ok(pred)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Predicate::CloseTo { .. } => "closeTo",
            Predicate::FarFrom { .. } => "farFrom",
            Predicate::Touch { .. } => "touch",
            Predicate::Ovlp { .. } => "ovlp",
            Predicate::PartOvlp { .. } => "partOvlp",
            Predicate::EnclIn { .. } => "enclIn",
            Predicate::Directional { dir, .. } => dir.name(),
            Predicate::Between { axis: Axis::X, .. } => "betweenPx",
            Predicate::Between { .. } => "betweenPy",
            Predicate::Oriented { .. } => "oriented",
            Predicate::BearingTo { .. } => "bearingTo",
        }
    }

    pub fn params(&self) -> Vec<f64> {
        match *self {
            Predicate::CloseTo { eps } | Predicate::FarFrom { eps } | Predicate::Touch { eps } => vec![eps],
            Predicate::Ovlp { delta } | Predicate::EnclIn { delta } => vec![delta],
            Predicate::PartOvlp { delta_ov, delta_in } => vec![delta_ov, delta_in],
            Predicate::Directional { kappa, .. } | Predicate::Between { kappa, .. } | Predicate::Oriented { kappa } => {
                vec![kappa]
            }
            Predicate::BearingTo { theta_ref, kappa } => vec![theta_ref, kappa],
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Predicate::Between { .. } => 3,
            _ => 2,
        }
    }

    /// Thresholds must be positive and finite; `theta_ref` lies in `(-pi, pi]`.
    pub fn validate(&self) -> Result<(), SpatialError> {
        let predicate = self.name();
        let positive = |name: &'static str, value: f64| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(SpatialError::InvalidParam { predicate, name, value })
            }
        };
        match *self {
            Predicate::CloseTo { eps } => positive("eps_c", eps),
            Predicate::FarFrom { eps } => positive("eps_f", eps),
            Predicate::Touch { eps } => positive("eps", eps),
            Predicate::Ovlp { delta } => positive("delta_ov", delta),
            Predicate::PartOvlp { delta_ov, delta_in } => {
                positive("delta_ov", delta_ov)?;
                positive("delta_in", delta_in)
            }
            Predicate::EnclIn { delta } => positive("delta_in", delta),
            Predicate::Directional { kappa, .. } | Predicate::Between { kappa, .. } | Predicate::Oriented { kappa } => {
                positive("kappa", kappa)
            }
            Predicate::BearingTo { theta_ref, kappa } => {
                let pi = std::f64::consts::PI;
                if !(theta_ref > -pi && theta_ref <= pi) {
                    return Err(SpatialError::InvalidParam { predicate, name: "theta_ref", value: theta_ref });
                }
                positive("kappa", kappa)
            }
        }
    }
}

/// A predicate applied to named objects.
#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub predicate: Predicate,
    pub objects: Vec<String>,
}

impl Atom {
    pub fn new(predicate: Predicate, objects: Vec<String>) -> Result<Self, SpatialError> {
        if objects.len() != predicate.arity() {
            return Err(SpatialError::Arity {
                predicate: predicate.name(),
                expected: predicate.arity(),
                got: objects.len(),
            });
        }
        predicate.validate()?;
        Ok(Self { predicate, objects })
    }

    pub fn binary(predicate: Predicate, a: &str, b: &str) -> Result<Self, SpatialError> {
        Self::new(predicate, vec![a.to_string(), b.to_string()])
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({}; ", self.predicate.name(), self.objects.join(", "))?;
        let params: Vec<String> = self.predicate.params().iter().map(|p| format!("{p:?}")).collect();
        write!(f, "{})", params.join(", "))
    }
}

/// Knobs of the smooth semantics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Smoothing {
    /// LogSumExp temperature.
    pub tau: f64,
    /// Boundary samples per polygon edge.
    pub samples: usize,
    /// Sigmoid scale of the inside/outside blend, in 1/m.
    pub sigmoid_k: f64,
}

impl Default for Smoothing {
    fn default() -> Self {
        Self { tau: 1e-2, samples: 16, sigmoid_k: 50.0 }
    }
}

impl Smoothing {
    pub fn with_tau(tau: f64) -> Self {
        Self { tau, ..Self::default() }
    }
}

/// Smooth robustness of `atom` in `scene`.
pub fn eval_smooth<T: Scalar>(atom: &Atom, scene: &Scene<T>, s: &Smoothing) -> Result<T, SpatialError> {
    smooth::eval(atom, scene, s)
}

/// Exact robustness of `atom` in `scene`.
pub fn eval_exact(atom: &Atom, scene: &Scene<f64>) -> Result<f64, SpatialError> {
    exact::eval(atom, scene)
}

/// Interval `[lo, hi]` guaranteed to contain `smooth - exact` for atoms whose
/// smoothing is a single LSE level over exact quantities. `None` for atoms
/// that involve boundary sampling or nested smoothing.
pub fn smoothing_bias(atom: &Atom, scene: &Scene<f64>, tau: f64) -> Result<Option<(f64, f64)>, SpatialError> {
    let extent_terms = |name: &str| -> Result<f64, SpatialError> {
        Ok(match &scene.get(name)?.shape {
            Shape::Polygon(p) => (p.len() as f64).ln(),
            Shape::Box3(_) => 0.0,
        })
    };
    let o = &atom.objects;
    Ok(match atom.predicate {
        Predicate::Directional { .. } => Some((-tau * (extent_terms(&o[0])? + extent_terms(&o[1])?), 0.0)),
        Predicate::Between { .. } => {
            let (a, b, c) = (extent_terms(&o[0])?, extent_terms(&o[1])?, extent_terms(&o[2])?);
            Some((-tau * ((a + b).max(b + c) + 2f64.ln()), 0.0))
        }
        Predicate::Oriented { .. } => Some((0.0, 0.0)),
        _ => None,
    })
}
