//! Scenario files: objects, horizon, formula and optimizer overrides in TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};
use smoothspatial::geom::{ConvexPolygon, Point, PolygonTemplate, Pose2D};
use smoothspatial::logic::{parse, Formula};
use smoothspatial::opt::{ObjectKind, ObjectSpec, OptimizerConfig, PoseTable, Problem};
use smoothspatial::{AxisAlignedBox3, Shape};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Movable,
    Static,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxEntry {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub name: String,
    pub kind: Kind,
    /// Counter-clockwise vertices: local frame for movable objects, world
    /// frame for static ones.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<[f64; 2]>>,
    #[serde(default, rename = "box", skip_serializing_if = "Option::is_none")]
    pub aabb: Option<BoxEntry>,
    /// Start pose `[x, y, theta]` of a movable object.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pose: Option<[f64; 3]>,
    /// End pose of the straight-line initial guess; defaults to the start.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<[f64; 3]>,
    /// Expose the pose heading of a movable object to `oriented`.
    #[serde(default)]
    pub heading: bool,
    /// Fixed heading angle of a static object.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heading_angle: Option<f64>,
}

/// Optional overrides of the optimizer defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerOverrides {
    pub step: Option<f64>,
    pub iterations: Option<usize>,
    pub margin: Option<f64>,
    pub smoothness: Option<f64>,
    pub perturbation: Option<f64>,
    pub stall_threshold: Option<f64>,
    pub stall_patience: Option<usize>,
    pub adam: Option<bool>,
    pub tau: Option<f64>,
    /// Final temperature of the annealing phase; `anneal = false` disables it.
    pub anneal_to: Option<f64>,
    pub anneal: Option<bool>,
    pub anneal_fraction: Option<f64>,
    pub samples: Option<usize>,
    pub sigmoid_k: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub horizon: usize,
    #[serde(default = "unit_dt")]
    pub dt: f64,
    pub formula: String,
    #[serde(default)]
    pub seed: u64,
    pub objects: Vec<ObjectEntry>,
    #[serde(default)]
    pub optimizer: OptimizerOverrides,
}

fn unit_dt() -> f64 {
    1.0
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub problem: Problem,
    pub formula: Formula,
    /// Straight-line interpolation from every start pose to its target.
    pub init: PoseTable<f64>,
}

fn polygon(name: &str, vertices: &[[f64; 2]]) -> Result<ConvexPolygon<f64>, CliError> {
    let pts = vertices.iter().map(|&[x, y]| Point::new(x, y)).collect();
    ConvexPolygon::new(pts).map_err(|e| CliError::Scenario(format!("object `{name}`: {e}")))
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Scenario(msg) => CliError::Scenario(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let file: ScenarioFile = toml::from_str(text).map_err(|e| CliError::Scenario(e.to_string()))?;
        Self::from_file(file)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, CliError> {
        let bad = |msg: String| Err(CliError::Scenario(msg));
        if file.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if !(file.dt > 0.0 && file.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", file.dt));
        }
        let mut specs = Vec::with_capacity(file.objects.len());
        let mut targets = Vec::new();
        for o in &file.objects {
            let kind = match o.kind {
                Kind::Movable => {
                    let (Some(vertices), None) = (&o.vertices, &o.aabb) else {
                        return bad(format!("movable object `{}` needs `vertices` and no `box`", o.name));
                    };
                    let Some([x, y, theta]) = o.pose else {
                        return bad(format!("movable object `{}` needs a start `pose`", o.name));
                    };
                    if o.heading_angle.is_some() {
                        return bad(format!("movable object `{}` takes `heading`, not `heading_angle`", o.name));
                    }
                    let local = polygon(&o.name, vertices)?;
                    let template = PolygonTemplate::new(local.vertices().to_vec())
                        .map_err(|e| CliError::Scenario(format!("object `{}`: {e}", o.name)))?;
                    let [tx, ty, tt] = o.target.unwrap_or([x, y, theta]);
                    targets.push(Pose2D::new(tx, ty, tt));
                    ObjectKind::Movable { template, start: Pose2D::new(x, y, theta) }
                }
                Kind::Static => {
                    if o.pose.is_some() || o.target.is_some() || o.heading {
                        return bad(format!("static object `{}` takes no `pose`, `target` or `heading`", o.name));
                    }
                    let shape = match (&o.vertices, &o.aabb) {
                        (Some(v), None) => Shape::Polygon(polygon(&o.name, v)?),
                        (None, Some(b)) => Shape::Box3(
                            AxisAlignedBox3::new(b.min, b.max)
                                .map_err(|e| CliError::Scenario(format!("object `{}`: {e}", o.name)))?,
                        ),
                        _ => return bad(format!("static object `{}` needs exactly one of `vertices` and `box`", o.name)),
                    };
                    ObjectKind::Static { shape, heading: o.heading_angle }
                }
            };
            specs.push(ObjectSpec { name: o.name.clone(), kind, heading: o.heading });
        }
        let problem = Problem::new(specs, file.horizon, file.dt).map_err(|e| CliError::Scenario(e.to_string()))?;
        if problem.movable_count() == 0 {
            return bad("scenario has no movable object".into());
        }
        let formula = parse(&file.formula).map_err(|e| CliError::Formula(e.to_string()))?;
        for name in formula.object_names() {
            if !file.objects.iter().any(|o| o.name == name) {
                return Err(CliError::Formula(format!("formula names unknown object `{name}`")));
            }
        }
        let init = problem.straight_line(&targets);
        Ok(Self { file, problem, formula, init })
    }

    pub fn name(&self) -> &str {
        &self.file.name
    }

    /// Defaults, then scenario overrides, then the scenario seed.
    pub fn optimizer_config(&self) -> OptimizerConfig {
        let o = &self.file.optimizer;
        let d = OptimizerConfig::default();
        OptimizerConfig {
            step: o.step.unwrap_or(d.step),
            iterations: o.iterations.unwrap_or(d.iterations),
            margin: o.margin.unwrap_or(d.margin),
            smoothness: o.smoothness.unwrap_or(d.smoothness),
            perturbation: o.perturbation.unwrap_or(d.perturbation),
            stall_threshold: o.stall_threshold.unwrap_or(d.stall_threshold),
            stall_patience: o.stall_patience.unwrap_or(d.stall_patience),
            adam: o.adam.unwrap_or(d.adam),
            tau: o.tau.unwrap_or(d.tau),
            anneal_to: if o.anneal == Some(false) { None } else { o.anneal_to.or(d.anneal_to) },
            anneal_fraction: o.anneal_fraction.unwrap_or(d.anneal_fraction),
            samples: o.samples.unwrap_or(d.samples),
            sigmoid_k: o.sigmoid_k.unwrap_or(d.sigmoid_k),
            seed: self.file.seed,
            ..d
        }
    }
}
