//! Trajectory optimization by gradient ascent on smooth robustness.

mod problem;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ad::{AdError, Scalar, Tape};
use crate::logic::{eval_exact, eval_smooth, EvalError, Formula, Trajectory};
use crate::spatial::smooth::wrap_angle;
use crate::spatial::Smoothing;

pub use problem::{ObjectKind, ObjectSpec, PoseTable, Problem};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("invalid optimizer setting: {0}")]
    Config(String),
    #[error("non-finite loss {value} at iteration {iteration}")]
    NonFiniteLoss { iteration: usize, value: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Ad(#[from] AdError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Step size.
    pub step: f64,
    pub iterations: usize,
    /// Hinge margin: the loss vanishes once smooth robustness reaches it.
    pub margin: f64,
    /// Weight of the squared second-difference regularizer.
    pub smoothness: f64,
    /// Half-width of the uniform per-coordinate kick applied on a stall.
    pub perturbation: f64,
    pub stall_threshold: f64,
    pub stall_patience: usize,
    /// Adam moments when set, plain gradient descent otherwise.
    pub adam: bool,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_eps: f64,
    pub tau: f64,
    /// Geometric annealing of `tau` to this value over the final
    /// `anneal_fraction` of the iterations.
    pub anneal_to: Option<f64>,
    pub anneal_fraction: f64,
    /// Explicit piecewise-constant `(iteration, tau)` schedule; overrides
    /// `tau` and annealing.
    pub tau_schedule: Option<Vec<(usize, f64)>>,
    pub samples: usize,
    pub sigmoid_k: f64,
    pub seed: u64,
    /// Iterations whose poses are kept in the outcome.
    pub snapshots: Vec<usize>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step: 5e-2,
            iterations: 500,
            margin: 0.1,
            smoothness: 1e-2,
            perturbation: 1e-3,
            stall_threshold: 1e-6,
            stall_patience: 5,
            adam: true,
            beta1: 0.9,
            beta2: 0.999,
            adam_eps: 1e-8,
            tau: 1e-2,
            anneal_to: Some(1e-3),
            anneal_fraction: 0.2,
            tau_schedule: None,
            samples: 16,
            sigmoid_k: 50.0,
            seed: 0,
            snapshots: Vec::new(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptError> {
        let bad = |what: &str| Err(OptError::Config(what.to_string()));
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step size must be positive");
        }
        if !(self.margin >= 0.0) || !(self.smoothness >= 0.0) || !(self.perturbation >= 0.0) {
            return bad("margin, smoothness weight and perturbation must be non-negative");
        }
        if !(self.tau > 0.0) || self.anneal_to.is_some_and(|t| !(t > 0.0)) {
            return bad("temperatures must be positive");
        }
        if let Some(s) = &self.tau_schedule {
            if s.is_empty() || s[0].0 != 0 || s.iter().any(|&(_, t)| !(t > 0.0)) {
                return bad("tau schedule must start at iteration 0 with positive temperatures");
            }
            if s.windows(2).any(|w| w[1].0 <= w[0].0) {
                return bad("tau schedule iterations must increase");
            }
        }
        if !(0.0..=1.0).contains(&self.anneal_fraction) {
            return bad("anneal fraction must lie in [0, 1]");
        }
        if self.samples == 0 || !(self.sigmoid_k > 0.0) {
            return bad("samples and sigmoid scale must be positive");
        }
        Ok(())
    }

    /// Temperature used at iteration `k`.
    pub fn tau_at(&self, k: usize) -> f64 {
        if let Some(schedule) = &self.tau_schedule {
            return schedule.iter().rev().find(|(i, _)| *i <= k).map_or(self.tau, |&(_, t)| t);
        }
        let Some(end) = self.anneal_to else { return self.tau };
        let n = self.iterations;
        let span = ((n as f64) * self.anneal_fraction).round() as usize;
        let start = n.saturating_sub(span);
        if k < start || span == 0 {
            return self.tau;
        }
        let a = if span <= 1 { 1.0 } else { ((k - start) as f64 / (span - 1) as f64).min(1.0) };
        self.tau * (end / self.tau).powf(a)
    }

    fn smoothing(&self, k: usize) -> Smoothing {
        Smoothing { tau: self.tau_at(k), samples: self.samples, sigmoid_k: self.sigmoid_k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    pub loss: f64,
    pub rho_smooth: f64,
    pub rho_exact: f64,
    pub grad_norm: f64,
    pub tau: f64,
    pub perturbed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationOutcome {
    pub poses: PoseTable<f64>,
    pub trajectory: Trajectory<f64>,
    pub trace: Vec<TraceRow>,
    pub snapshots: Vec<(usize, PoseTable<f64>)>,
    /// Exact robustness of the returned trajectory.
    pub rho_exact: f64,
    /// Set only when the exact robustness is positive.
    pub success: bool,
}

/// Sum of squared second differences of every movable pose; heading
/// differences are wrapped to `(-pi, pi]`.
pub fn smoothness_penalty<T: Scalar>(poses: &PoseTable<T>) -> Option<T> {
    let mut terms: Vec<T> = Vec::new();
    for row in poses {
        for t in 1..row.len().saturating_sub(1) {
            let (a, b, c) = (row[t - 1], row[t], row[t + 1]);
            let dx = c.x - b.x * 2.0 + a.x;
            let dy = c.y - b.y * 2.0 + a.y;
            let dth = wrap_angle(c.theta - b.theta) - wrap_angle(b.theta - a.theta);
            terms.push(dx.square() + dy.square() + dth.square());
        }
    }
    let (first, rest) = terms.split_first()?;
    Some(rest.iter().fold(*first, |acc, &v| acc + v))
}

struct Evaluation {
    loss: f64,
    rho_smooth: f64,
    grad: Vec<f64>,
}

fn evaluate(problem: &Problem, phi: &Formula, x: &[f64], cfg: &OptimizerConfig, k: usize) -> Result<Evaluation, OptError> {
    let tape = Tape::new();
    let vars: Vec<_> = x.iter().map(|&v| tape.var(v)).collect();
    let poses = problem.unflatten(&vars, |c| tape.constant(c));
    let traj = problem.trajectory(&poses, |c| tape.constant(c))?;
    let rho = eval_smooth(phi, &traj, 0, &cfg.smoothing(k))?.value;
    let mut loss = (-rho + cfg.margin).relu();
    if let Some(r) = smoothness_penalty(&poses) {
        loss = loss + r * cfg.smoothness;
    }
    let grads = loss.backward()?;
    Ok(Evaluation { loss: loss.value(), rho_smooth: rho.value(), grad: vars.iter().map(|&v| grads.wrt(v)).collect() })
}

fn exact_of(problem: &Problem, phi: &Formula, x: &[f64]) -> Result<(PoseTable<f64>, Trajectory<f64>, f64), OptError> {
    let poses = problem.unflatten(x, |c| c);
    let traj = problem.trajectory(&poses, |c| c)?;
    let rho = eval_exact(phi, &traj, 0)?.value;
    Ok((poses, traj, rho))
}

/// Minimizes `relu(margin - smooth robustness) + smoothness * penalty` over
/// the poses at `t >= 1`, starting from `init`.
pub fn optimize(
    problem: &Problem,
    init: &PoseTable<f64>,
    phi: &Formula,
    cfg: &OptimizerConfig,
) -> Result<OptimizationOutcome, OptError> {
    cfg.validate()?;
    let mut x = problem.flatten(init);
    let n = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut m, mut v) = (vec![0.0; n], vec![0.0; n]);
    let mut trace = Vec::new();
    let mut snapshots = Vec::new();
    let mut stalled = 0;
    let mut last = None;
    for k in 0..cfg.iterations.max(1) {
        let eval = evaluate(problem, phi, &x, cfg, k)?;
        if !eval.loss.is_finite() {
            return Err(OptError::NonFiniteLoss { iteration: k, value: eval.loss });
        }
        let (poses, traj, rho_exact) = exact_of(problem, phi, &x)?;
        let grad_norm = eval.grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if cfg.snapshots.contains(&k) {
            snapshots.push((k, poses.clone()));
        }
        let mut row = TraceRow {
            iteration: k,
            loss: eval.loss,
            rho_smooth: eval.rho_smooth,
            rho_exact,
            grad_norm,
            tau: cfg.tau_at(k),
            perturbed: false,
        };
        if rho_exact >= cfg.margin || k + 1 == cfg.iterations.max(1) {
            trace.push(row);
            last = Some((poses, traj, rho_exact));
            break;
        }
        let t = (k + 1) as i32;
        for i in 0..n {
            let g = eval.grad[i];
            if cfg.adam {
                m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
                v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
                let mh = m[i] / (1.0 - cfg.beta1.powi(t));
                let vh = v[i] / (1.0 - cfg.beta2.powi(t));
                x[i] -= cfg.step * mh / (vh.sqrt() + cfg.adam_eps);
            } else {
                x[i] -= cfg.step * g;
            }
        }
        stalled = if grad_norm < cfg.stall_threshold { stalled + 1 } else { 0 };
        if stalled >= cfg.stall_patience && cfg.perturbation > 0.0 {
            for xi in &mut x {
                *xi += rng.gen_range(-cfg.perturbation..=cfg.perturbation);
            }
            row.perturbed = true;
            stalled = 0;
        }
        trace.push(row);
    }
    let (poses, trajectory, rho_exact) = match last {
        Some(l) => l,
        None => exact_of(problem, phi, &x)?,
    };
    let final_iter = trace.last().map_or(0, |r| r.iteration);
    if !snapshots.iter().any(|(k, _)| *k == final_iter) {
        snapshots.push((final_iter, poses.clone()));
    }
    Ok(OptimizationOutcome { poses, trajectory, trace, snapshots, rho_exact, success: rho_exact > 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::{ConvexPolygon, Point, Pose2D};
    use crate::logic::parse;
    use crate::spatial::Shape;

    fn square_template(half: f64) -> crate::geom::PolygonTemplate {
        crate::geom::PolygonTemplate::new(vec![
            Point::new(-half, -half),
            Point::new(half, -half),
            Point::new(half, half),
            Point::new(-half, half),
        ])
        .unwrap()
    }

    fn goal_problem(horizon: usize) -> Problem {
        Problem::new(
            vec![
                ObjectSpec {
                    name: "ee".into(),
                    kind: ObjectKind::Movable { template: square_template(0.2), start: Pose2D::new(0.0, 0.0, 0.0) },
                    heading: false,
                },
                ObjectSpec {
                    name: "goal".into(),
                    kind: ObjectKind::Static {
                        shape: Shape::Polygon(ConvexPolygon::rectangle(3.0, -0.5, 4.0, 0.5).unwrap()),
                        heading: None,
                    },
                    heading: false,
                },
            ],
            horizon,
            0.1,
        )
        .unwrap()
    }

    #[test]
    fn flatten_round_trip() {
        let p = goal_problem(4);
        let init = p.straight_line(&[Pose2D::new(2.0, 1.0, 0.4)]);
        assert_eq!(init[0][4], Pose2D::new(2.0, 1.0, 0.4));
        let x = p.flatten(&init);
        assert_eq!(x.len(), p.dimension());
        assert_eq!(p.unflatten(&x, |c| c), init);
    }

    #[test]
    fn tau_schedule() {
        let cfg = OptimizerConfig { iterations: 100, ..Default::default() };
        assert_eq!(cfg.tau_at(0), 1e-2);
        assert_eq!(cfg.tau_at(79), 1e-2);
        assert!((cfg.tau_at(99) - 1e-3).abs() < 1e-15);
        assert!(cfg.tau_at(90) < 1e-2 && cfg.tau_at(90) > 1e-3);
        let cfg = OptimizerConfig { tau_schedule: Some(vec![(0, 0.1), (10, 0.01)]), ..Default::default() };
        assert_eq!(cfg.tau_at(9), 0.1);
        assert_eq!(cfg.tau_at(10), 0.01);
        assert!(OptimizerConfig { step: 0.0, ..Default::default() }.validate().is_err());
        assert!(OptimizerConfig { tau_schedule: Some(vec![(3, 0.1)]), ..Default::default() }.validate().is_err());
    }

    #[test]
    fn satisfied_start_stops_at_once() {
        let p = goal_problem(3);
        let phi = parse("F[0,3](enclIn(ee, goal; 0.05))").unwrap();
        let init = p.straight_line(&[Pose2D::new(3.5, 0.0, 0.0)]);
        let out = optimize(&p, &init, &phi, &OptimizerConfig::default()).unwrap();
        assert_eq!(out.trace.len(), 1);
        assert_eq!(out.poses, init);
        assert!(out.success);
    }

    #[test]
    fn reaches_goal() {
        let p = goal_problem(10);
        let phi = parse("F[0,10](enclIn(ee, goal; 0.05))").unwrap();
        let init = p.straight_line(&[Pose2D::new(1.5, 0.0, 0.0)]);
        let before = eval_exact(&phi, &p.trajectory(&init, |c| c).unwrap(), 0).unwrap().value;
        assert!(before < 0.0);
        let out = optimize(&p, &init, &phi, &OptimizerConfig { seed: 3, ..Default::default() }).unwrap();
        assert!(out.success, "{:?}", out.trace.last());
        assert!(out.trace.len() <= 500);
        let again = optimize(&p, &init, &phi, &OptimizerConfig { seed: 3, ..Default::default() }).unwrap();
        assert_eq!(out.trace, again.trace);
    }

    #[test]
    fn penalty_wraps_angles() {
        let row = vec![
            Pose2D::new(0.0, 0.0, 3.1),
            Pose2D::new(0.0, 0.0, -3.1),
            Pose2D::new(0.0, 0.0, -3.1 + (2.0 * std::f64::consts::PI - 6.2) + 0.1),
        ];
        let r = smoothness_penalty(&vec![row]).unwrap();
        assert!((r - 0.01).abs() < 1e-9, "{r}");
    }
}
