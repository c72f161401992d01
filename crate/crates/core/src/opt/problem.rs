use crate::ad::Scalar;
use crate::geom::{Point, PolygonTemplate, Pose2D};
use crate::logic::{EvalError, Trajectory};
use crate::spatial::{AxisAlignedBox3, Scene, SceneObject, Shape, SpatialError};

#[derive(Debug, Clone, PartialEq)]
pub enum ObjectKind {
    /// Rigid polygon whose poses at `t >= 1` are decision variables.
    Movable { template: PolygonTemplate, start: Pose2D<f64> },
    /// Fixed geometry with an optional fixed heading angle.
    Static { shape: Shape<f64>, heading: Option<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub name: String,
    pub kind: ObjectKind,
    /// Movable objects expose their pose heading to `oriented` when set.
    pub heading: bool,
}

/// Objects and horizon of a trajectory optimization problem.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    objects: Vec<ObjectSpec>,
    horizon: usize,
    pub dt: f64,
}

/// Poses of every movable object at every time, `poses[m][t]`.
pub type PoseTable<T> = Vec<Vec<Pose2D<T>>>;

impl Problem {
    pub fn new(objects: Vec<ObjectSpec>, horizon: usize, dt: f64) -> Result<Self, SpatialError> {
        for (i, o) in objects.iter().enumerate() {
            if objects[..i].iter().any(|p| p.name == o.name) {
                return Err(SpatialError::DuplicateObject(o.name.clone()));
            }
        }
        Ok(Self { objects, horizon, dt })
    }

    pub fn objects(&self) -> &[ObjectSpec] {
        &self.objects
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn movable(&self) -> impl Iterator<Item = (&str, &PolygonTemplate, &Pose2D<f64>)> {
        self.objects.iter().filter_map(|o| match &o.kind {
            ObjectKind::Movable { template, start } => Some((o.name.as_str(), template, start)),
            ObjectKind::Static { .. } => None,
        })
    }

    pub fn movable_count(&self) -> usize {
        self.movable().count()
    }

    /// Length of the flattened decision vector: 3 per movable object per
    /// time step `1..=T`.
    pub fn dimension(&self) -> usize {
        3 * self.horizon * self.movable_count()
    }

    /// Linear interpolation from each start pose to `targets[m]` over the
    /// horizon.
    pub fn straight_line(&self, targets: &[Pose2D<f64>]) -> PoseTable<f64> {
        self.movable()
            .zip(targets)
            .map(|((_, _, s), g)| {
                (0..=self.horizon)
                    .map(|t| {
                        let a = if self.horizon == 0 { 0.0 } else { t as f64 / self.horizon as f64 };
                        Pose2D::new(
                            s.x + a * (g.x - s.x),
                            s.y + a * (g.y - s.y),
                            s.theta + a * (g.theta - s.theta),
                        )
                    })
                    .collect()
            })
            .collect()
    }

    /// Every movable object resting at its start pose.
    pub fn stationary(&self) -> PoseTable<f64> {
        self.movable().map(|(_, _, s)| vec![*s; self.horizon + 1]).collect()
    }

    /// Decision variables of a pose table, `t = 0` excluded.
    pub fn flatten<T: Scalar>(&self, poses: &PoseTable<T>) -> Vec<T> {
        let mut out = Vec::with_capacity(self.dimension());
        for row in poses {
            for p in &row[1..] {
                out.extend([p.x, p.y, p.theta]);
            }
        }
        out
    }

    /// Inverse of [`Problem::flatten`]; start poses come from the problem.
    pub fn unflatten<T: Scalar>(&self, x: &[T], start_like: impl Fn(f64) -> T) -> PoseTable<T> {
        assert_eq!(x.len(), self.dimension(), "decision vector length");
        self.movable()
            .enumerate()
            .map(|(m, (_, _, s))| {
                let mut row = vec![Pose2D::new(start_like(s.x), start_like(s.y), start_like(s.theta))];
                let base = 3 * self.horizon * m;
                for t in 0..self.horizon {
                    let k = base + 3 * t;
                    row.push(Pose2D::new(x[k], x[k + 1], x[k + 2]));
                }
                row
            })
            .collect()
    }

    /// Scenes of the trajectory induced by `poses`; `constant` lifts static
    /// geometry into the scalar type.
    pub fn trajectory<T: Scalar>(&self, poses: &PoseTable<T>, constant: impl Fn(f64) -> T + Copy) -> Result<Trajectory<T>, EvalError> {
        let mut scenes = Vec::with_capacity(self.horizon + 1);
        for t in 0..=self.horizon {
            let mut scene = Scene::new();
            let mut m = 0;
            for o in &self.objects {
                let object = match &o.kind {
                    ObjectKind::Movable { template, .. } => {
                        let pose = &poses[m][t];
                        m += 1;
                        let obj = SceneObject::polygon(template.place(pose));
                        if o.heading {
                            obj.with_heading(pose.heading())
                        } else {
                            obj
                        }
                    }
                    ObjectKind::Static { shape, heading } => {
                        let shape = match shape {
                            Shape::Polygon(p) => Shape::Polygon(p.map(constant)),
                            Shape::Box3(b) => Shape::Box3(AxisAlignedBox3 { min: b.min.map(constant), max: b.max.map(constant) }),
                        };
                        let heading = heading.map(|a| Point::new(constant(a.cos()), constant(a.sin())));
                        SceneObject { shape, heading }
                    }
                };
                scene
                    .insert(o.name.clone(), object)
                    .map_err(|source| EvalError::Atom { atom: o.name.clone(), t, source })?;
            }
            scenes.push(scene);
        }
        Trajectory::new(scenes, self.dt)
    }
}
