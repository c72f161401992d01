//! Differentiable spatio-temporal logic over convex polygons.
//!
//! Spatial predicates between convex objects and bounded temporal operators
//! compose into one robustness function. Every quantity has two semantics: a
//! smooth one, generic over [`Scalar`] so it can be recorded on an AD
//! [`Tape`], and an exact one computed with hard min/max and exact geometry.

pub mod accuracy;
pub mod ad;
pub mod geom;
pub mod learn;
pub mod logic;
pub mod numdiff;
pub mod opt;
pub mod oracle;
pub mod random;
pub mod spatial;

pub use ad::{lse_max, lse_min, AdError, Gradients, Scalar, Tape, Var};
pub use logic::{Formula, Trajectory};
pub use geom::{ConvexPolygon, GeomError, Point, PolygonTemplate, Pose2D};

pub use spatial::{Atom, AxisAlignedBox3, Predicate, Scene, SceneObject, Shape, Smoothing, SpatialError};
