//! Synthetic pick-and-place demonstrations in a box world.
//!
//! An arm box wanders inside a work region per phase. Three obstacles are
//! laid out so that, relative to each obstacle, exactly one direction holds
//! in each phase: a post the arm passes (left of, then right of), a back wall
//! (behind) and a ceiling shelf (below). Demonstrations are rejection sampled
//! so every planted predicate holds with at least `min_margin`.

use std::f64::consts::TAU;

use rand::Rng;

use super::{DemonstrationSet, LearnError, Phase, TemporalOp};
use crate::logic::{eval_exact, Formula, Trajectory, Window};
use crate::random::stream_rng;
use crate::spatial::{Atom, AxisAlignedBox3, Direction, Predicate, Scene, SceneObject};

pub const ARM: &str = "arm";
pub const OBSTACLES: [&str; 3] = ["post", "wall", "shelf"];
const ARM_HALF: f64 = 0.25;

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub demos: usize,
    /// Last time index; the phases split `[0, horizon]` in half.
    pub horizon: usize,
    pub seed: u64,
    /// Base `kappa` of the planted atoms.
    pub kappa: f64,
    pub min_margin: f64,
    /// Rejection budget per accepted demonstration.
    pub max_attempts: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self { demos: 30, horizon: 118, seed: 7, kappa: 0.01, min_margin: 0.1, max_attempts: 100 }
    }
}

/// A predicate the generator guarantees in one phase.
#[derive(Debug, Clone, PartialEq)]
pub struct Planted {
    pub phase: String,
    pub direction: Direction,
    pub object: String,
}

#[derive(Debug, Clone)]
pub struct SynthDemos {
    pub set: DemonstrationSet,
    pub planted: Vec<Planted>,
    pub rejected: usize,
}

fn aabb(min: [f64; 3], max: [f64; 3]) -> SceneObject<f64> {
    SceneObject::boxed(AxisAlignedBox3::new(min, max).expect("ordered corners"))
}

fn obstacles() -> [SceneObject<f64>; 3] {
    [
        aabb([6.0, 0.0, 0.0], [7.0, 5.5, 5.0]),
        aabb([0.0, 6.0, 0.0], [10.0, 7.0, 5.0]),
        aabb([0.0, 0.0, 6.0], [10.0, 10.0, 7.0]),
    ]
}

pub fn phases(horizon: usize) -> Vec<Phase> {
    let mid = horizon / 2;
    vec![
        Phase { name: "reach".into(), window: Window::new(0, mid).expect("ordered") },
        Phase { name: "place".into(), window: Window::new(mid + 1, horizon).expect("ordered") },
    ]
}

pub fn planted(horizon: usize) -> Vec<Planted> {
    let ph = phases(horizon);
    let plant = |p: usize, direction, object: &str| Planted { phase: ph[p].name.clone(), direction, object: object.into() };
    vec![
        plant(0, Direction::LeftOf, "post"),
        plant(0, Direction::Behind, "wall"),
        plant(0, Direction::Below, "shelf"),
        plant(1, Direction::RightOf, "post"),
        plant(1, Direction::Behind, "wall"),
        plant(1, Direction::Below, "shelf"),
    ]
}

/// `G_I(dir(arm, object; kappa))` for a planted predicate.
pub fn planted_formula(p: &Planted, horizon: usize, kappa: f64) -> Formula {
    let window = phases(horizon).into_iter().find(|ph| ph.name == p.phase).expect("known phase").window;
    let atom = Atom::binary(Predicate::Directional { dir: p.direction, kappa }, ARM, &p.object).expect("binary");
    Formula::always(window, Formula::atom(atom))
}

/// Arm centre per phase: a random anchor plus two random sinusoids per axis.
fn sample_path<R: Rng>(rng: &mut R, horizon: usize) -> Vec<[f64; 3]> {
    let mid = horizon / 2;
    let anchors = [
        [rng.gen_range(2.8..3.6), rng.gen_range(1.5..3.0), rng.gen_range(1.2..2.5)],
        [rng.gen_range(8.2..8.9), rng.gen_range(1.5..3.0), rng.gen_range(1.2..2.5)],
    ];
    let mut wiggle = || {
        let amp: [f64; 3] = [rng.gen_range(0.0..0.45), rng.gen_range(0.0..0.8), rng.gen_range(0.0..0.6)];
        let freq = rng.gen_range(0.5..3.0);
        let phase = rng.gen_range(0.0..TAU);
        (amp, freq, phase)
    };
    let waves = [wiggle(), wiggle()];
    (0..=horizon)
        .map(|t| {
            let p = usize::from(t > mid);
            let (amp, freq, phase) = waves[p];
            let s = (TAU * freq * t as f64 / horizon as f64 + phase).sin();
            [0, 1, 2].map(|k| anchors[p][k] + amp[k] * s * if k == 1 { -1.0 } else { 1.0 })
        })
        .collect()
}

fn trajectory(path: &[[f64; 3]]) -> Trajectory<f64> {
    let [post, wall, shelf] = obstacles();
    let scenes = path
        .iter()
        .map(|c| {
            let arm = aabb(c.map(|v| v - ARM_HALF), c.map(|v| v + ARM_HALF));
            Scene::new()
                .with(ARM, arm)
                .and_then(|s| s.with("post", post.clone()))
                .and_then(|s| s.with("wall", wall.clone()))
                .and_then(|s| s.with("shelf", shelf.clone()))
                .expect("distinct names")
        })
        .collect();
    Trajectory::new(scenes, 1.0).expect("consistent scenes")
}

pub fn synthesize(cfg: &SynthConfig) -> Result<SynthDemos, LearnError> {
    if cfg.horizon < 3 || cfg.demos == 0 {
        return Err(LearnError::Config("need at least one demonstration and a horizon of 3".into()));
    }
    let plants = planted(cfg.horizon);
    let checks: Vec<Formula> = plants.iter().map(|p| planted_formula(p, cfg.horizon, cfg.kappa)).collect();
    let mut demos = Vec::with_capacity(cfg.demos);
    let mut rejected = 0;
    for i in 0..cfg.demos {
        let mut rng = stream_rng(cfg.seed, i as u64);
        let mut accepted = None;
        for _ in 0..cfg.max_attempts {
            let traj = trajectory(&sample_path(&mut rng, cfg.horizon));
            let mut ok = true;
            for phi in &checks {
                let r = eval_exact(phi, &traj, 0).map_err(|source| LearnError::Eval { demo: i, source })?.value;
                ok &= r >= cfg.min_margin;
            }
            if ok {
                accepted = Some(traj);
                break;
            }
            rejected += 1;
        }
        demos.push(accepted.ok_or_else(|| LearnError::Config(format!("demonstration {i} exhausted its rejection budget")))?);
    }
    Ok(SynthDemos { set: DemonstrationSet::new(demos, phases(cfg.horizon))?, planted: plants, rejected })
}

impl Planted {
    pub fn matches(&self, c: &super::Candidate) -> bool {
        c.op == TemporalOp::Always && c.direction == self.direction && c.object == self.object && c.phase.name == self.phase
    }
}
