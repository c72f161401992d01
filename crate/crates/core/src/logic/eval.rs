use std::collections::HashMap;

use thiserror::Error;

use super::ast::{Formula, Window};
use crate::ad::{AdError, Scalar, Tape, Var};
use crate::spatial::smooth::Agg;
use crate::spatial::{self, Atom, Scene, Shape, Smoothing, SpatialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("trajectory has no scenes")]
    EmptyTrajectory,
    #[error("scene {t} does not match scene 0: {detail}")]
    Inconsistent { t: usize, detail: String },
    #[error("`{op}` window {window} at t={t} is empty after clipping to horizon {horizon}")]
    EmptyWindow { op: &'static str, window: Window, t: usize, horizon: usize },
    #[error("evaluation time {t} beyond horizon {horizon}")]
    TimeOutOfRange { t: usize, horizon: usize },
    #[error("atom `{atom}` at t={t}: {source}")]
    Atom { atom: String, t: usize, source: SpatialError },
    #[error(transparent)]
    Ad(#[from] AdError),
}

/// Scenes `s_0, ..., s_T` with a common object schema.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    scenes: Vec<Scene<T>>,
    /// Seconds between scenes; metadata only.
    pub dt: f64,
}

fn schema_mismatch<T: Scalar>(a: &Scene<T>, b: &Scene<T>) -> Option<String> {
    if a.len() != b.len() {
        return Some(format!("{} objects instead of {}", b.len(), a.len()));
    }
    for ((na, oa), (nb, ob)) in a.iter().zip(b.iter()) {
        if na != nb {
            return Some(format!("object `{nb}` where `{na}` was expected"));
        }
        let same_shape = match (&oa.shape, &ob.shape) {
            (Shape::Polygon(p), Shape::Polygon(q)) => p.len() == q.len(),
            (Shape::Box3(_), Shape::Box3(_)) => true,
            _ => false,
        };
        if !same_shape {
            return Some(format!("object `{na}` changes shape"));
        }
        if oa.heading.is_some() != ob.heading.is_some() {
            return Some(format!("object `{na}` gains or loses its heading"));
        }
    }
    None
}

impl<T: Scalar> Trajectory<T> {
    pub fn new(scenes: Vec<Scene<T>>, dt: f64) -> Result<Self, EvalError> {
        let first = scenes.first().ok_or(EvalError::EmptyTrajectory)?;
        for (t, s) in scenes.iter().enumerate().skip(1) {
            if let Some(detail) = schema_mismatch(first, s) {
                return Err(EvalError::Inconsistent { t, detail });
            }
        }
        Ok(Self { scenes, dt })
    }

    /// Index `T` of the last scene.
    pub fn horizon(&self) -> usize {
        self.scenes.len() - 1
    }

    pub fn len(&self) -> usize {
        self.scenes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenes.is_empty()
    }

    pub fn scene(&self, t: usize) -> &Scene<T> {
        &self.scenes[t]
    }

    pub fn scenes(&self) -> &[Scene<T>] {
        &self.scenes
    }

    pub fn value(&self) -> Trajectory<f64> {
        Trajectory { scenes: self.scenes.iter().map(Scene::value).collect(), dt: self.dt }
    }

    /// Appends a scene with the same schema.
    pub fn push(&mut self, scene: Scene<T>) -> Result<(), EvalError> {
        if let Some(detail) = schema_mismatch(&self.scenes[0], &scene) {
            return Err(EvalError::Inconsistent { t: self.scenes.len(), detail });
        }
        self.scenes.push(scene);
        Ok(())
    }
}

impl Trajectory<f64> {
    pub fn lift<'t>(&self, tape: &'t Tape) -> Trajectory<Var<'t>> {
        Trajectory { scenes: self.scenes.iter().map(|s| s.lift(tape)).collect(), dt: self.dt }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Exact,
    Smooth { tau: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessResult<T> {
    pub value: T,
    /// Robustness of the whole formula at each `t` where its windows are
    /// non-empty, when requested.
    pub per_time: Option<Vec<f64>>,
    pub mode: Mode,
}

/// Memoized recursive evaluation. Results are cached per (subformula, time),
/// keyed by node address, so shared windows are computed once.
struct Engine<'a, T, A> {
    traj: &'a Trajectory<T>,
    agg: Agg,
    atom: A,
    memo: HashMap<(usize, usize), T>,
}

impl<'a, T, A> Engine<'a, T, A>
where
    T: Scalar,
    A: Fn(&Atom, &Scene<T>) -> Result<T, SpatialError>,
{
    fn window(&self, op: &'static str, w: Window, t: usize) -> Result<std::ops::RangeInclusive<usize>, EvalError> {
        let horizon = self.traj.horizon();
        let lo = t + w.lo;
        if lo > horizon {
            return Err(EvalError::EmptyWindow { op, window: w, t, horizon });
        }
        Ok(lo..=(t + w.hi).min(horizon))
    }

    fn rob(&mut self, f: &Formula, t: usize) -> Result<T, EvalError> {
        let key = (f as *const Formula as usize, t);
        if let Some(v) = self.memo.get(&key) {
            return Ok(*v);
        }
        let v = match f {
            Formula::Atom(n) => (self.atom)(&n.atom, self.traj.scene(t))
                .map_err(|source| EvalError::Atom { atom: n.atom.to_string(), t, source })?,
            Formula::Not(c) => -self.rob(c, t)?,
            Formula::And(cs) => {
                let vs = cs.iter().map(|c| self.rob(c, t)).collect::<Result<Vec<_>, _>>()?;
                self.agg.min(&vs)?
            }
            Formula::Or(cs) => {
                let vs = cs.iter().map(|c| self.rob(c, t)).collect::<Result<Vec<_>, _>>()?;
                self.agg.max(&vs)?
            }
            Formula::Always(w, c) => {
                let vs = self.window("G", *w, t)?.map(|k| self.rob(c, k)).collect::<Result<Vec<_>, _>>()?;
                self.agg.min(&vs)?
            }
            Formula::Eventually(w, c) => {
                let vs = self.window("F", *w, t)?.map(|k| self.rob(c, k)).collect::<Result<Vec<_>, _>>()?;
                self.agg.max(&vs)?
            }
            Formula::Until(w, lhs, rhs) => {
                let mut outer = Vec::with_capacity(w.len());
                for k in self.window("U", *w, t)? {
                    let mut inner = Vec::with_capacity(k - t + 2);
                    inner.push(self.rob(rhs, k)?);
                    for j in t..=k {
                        inner.push(self.rob(lhs, j)?);
                    }
                    outer.push(self.agg.min(&inner)?);
                }
                self.agg.max(&outer)?
            }
        };
        self.memo.insert(key, v);
        Ok(v)
    }

    fn run(&mut self, f: &Formula, t: usize) -> Result<T, EvalError> {
        let horizon = self.traj.horizon();
        if t > horizon {
            return Err(EvalError::TimeOutOfRange { t, horizon });
        }
        self.rob(f, t)
    }

    fn per_time(&mut self, f: &Formula) -> Result<Vec<f64>, EvalError> {
        let mut out = Vec::new();
        for t in 0..=self.traj.horizon() {
            match self.rob(f, t) {
                Ok(v) => out.push(v.value()),
                Err(EvalError::EmptyWindow { .. }) if t > 0 => break,
                Err(e) => return Err(e),
            }
        }
        Ok(out)
    }
}

fn exact_engine(traj: &Trajectory<f64>) -> Engine<'_, f64, impl Fn(&Atom, &Scene<f64>) -> Result<f64, SpatialError>> {
    Engine { traj, agg: Agg::Hard, atom: spatial::eval_exact, memo: HashMap::new() }
}

/// Robustness with hard min/max and exact geometry.
pub fn eval_exact(phi: &Formula, traj: &Trajectory<f64>, t: usize) -> Result<RobustnessResult<f64>, EvalError> {
    let value = exact_engine(traj).run(phi, t)?;
    Ok(RobustnessResult { value, per_time: None, mode: Mode::Exact })
}

/// Exact robustness at time 0 together with its value at every later time
/// where the formula's windows are non-empty.
pub fn eval_exact_breakdown(phi: &Formula, traj: &Trajectory<f64>) -> Result<RobustnessResult<f64>, EvalError> {
    let mut engine = exact_engine(traj);
    let value = engine.run(phi, 0)?;
    let per_time = engine.per_time(phi)?;
    Ok(RobustnessResult { value, per_time: Some(per_time), mode: Mode::Exact })
}

/// Robustness with every min/max replaced by its LSE counterpart. With `T =
/// Var` the result is recorded on the trajectory's tape.
pub fn eval_smooth<T: Scalar>(
    phi: &Formula,
    traj: &Trajectory<T>,
    t: usize,
    s: &Smoothing,
) -> Result<RobustnessResult<T>, EvalError> {
    if !(s.tau > 0.0 && s.tau.is_finite()) {
        return Err(AdError::BadTemperature(s.tau).into());
    }
    let mut engine = Engine {
        traj,
        agg: Agg::Smooth(s.tau),
        atom: |a: &Atom, scene: &Scene<T>| spatial::eval_smooth(a, scene, s),
        memo: HashMap::new(),
    };
    let value = engine.run(phi, t)?;
    Ok(RobustnessResult { value, per_time: None, mode: Mode::Smooth { tau: s.tau } })
}

/// Smooth robustness at time 0 plus the per-time breakdown, on plain values.
pub fn eval_smooth_breakdown(
    phi: &Formula,
    traj: &Trajectory<f64>,
    s: &Smoothing,
) -> Result<RobustnessResult<f64>, EvalError> {
    let mut engine = Engine {
        traj,
        agg: Agg::Smooth(s.tau),
        atom: |a: &Atom, scene: &Scene<f64>| spatial::eval_smooth(a, scene, s),
        memo: HashMap::new(),
    };
    let value = engine.run(phi, 0)?;
    let per_time = engine.per_time(phi)?;
    Ok(RobustnessResult { value, per_time: Some(per_time), mode: Mode::Smooth { tau: s.tau } })
}

/// Interval `[lo, hi]` containing `smooth - exact` at any evaluation time,
/// composed from the LogSumExp gap bound of every aggregation in the formula.
/// `None` when an atom involves boundary sampling or nested geometric
/// smoothing, which this bound does not cover.
pub fn smoothing_budget(phi: &Formula, scene: &Scene<f64>, tau: f64) -> Result<Option<(f64, f64)>, SpatialError> {
    let gap = |n: usize| tau * (n as f64).ln();
    let fold = |cs: &[Formula]| -> Result<Option<Vec<(f64, f64)>>, SpatialError> {
        let mut out = Vec::with_capacity(cs.len());
        for c in cs {
            match smoothing_budget(c, scene, tau)? {
                Some(b) => out.push(b),
                None => return Ok(None),
            }
        }
        Ok(Some(out))
    };
    let lo_hi = |bs: &[(f64, f64)]| {
        (bs.iter().map(|b| b.0).fold(f64::INFINITY, f64::min), bs.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max))
    };
    Ok(match phi {
        Formula::Atom(n) => spatial::smoothing_bias(&n.atom, scene, tau)?,
        Formula::Not(c) => smoothing_budget(c, scene, tau)?.map(|(lo, hi)| (-hi, -lo)),
        Formula::And(cs) => fold(cs)?.map(|bs| {
            let (lo, hi) = lo_hi(&bs);
            (lo - gap(cs.len()), hi)
        }),
        Formula::Or(cs) => fold(cs)?.map(|bs| {
            let (lo, hi) = lo_hi(&bs);
            (lo, hi + gap(cs.len()))
        }),
        Formula::Always(w, c) => smoothing_budget(c, scene, tau)?.map(|(lo, hi)| (lo - gap(w.len()), hi)),
        Formula::Eventually(w, c) => smoothing_budget(c, scene, tau)?.map(|(lo, hi)| (lo, hi + gap(w.len()))),
        Formula::Until(w, a, b) => match (smoothing_budget(a, scene, tau)?, smoothing_budget(b, scene, tau)?) {
            (Some(ba), Some(bb)) => {
                let (lo, hi) = lo_hi(&[ba, bb]);
                Some((lo - gap(w.hi + 2), hi + gap(w.len())))
            }
            _ => None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ConvexPolygon;
    use crate::logic::parse;
    use crate::spatial::{AxisAlignedBox3, SceneObject};

    fn unit_box(x: f64) -> SceneObject<f64> {
        SceneObject::boxed(AxisAlignedBox3::new([x, 0.0, 0.0], [x + 1.0, 1.0, 1.0]).unwrap())
    }

    /// Object `a` slides along x, so `leftOf(b, a; 1)` reads `x_a - 2`;
    /// `leftOf(b, c; 1)` is constantly 5.
    fn sliding(xs: &[f64]) -> Trajectory<f64> {
        let scenes = xs
            .iter()
            .map(|&x| {
                Scene::new()
                    .with("a", unit_box(x))
                    .unwrap()
                    .with("b", unit_box(0.0))
                    .unwrap()
                    .with("c", unit_box(7.0))
                    .unwrap()
            })
            .collect();
        Trajectory::new(scenes, 0.1).unwrap()
    }

    /// Positions giving atom values `vals` for `leftOf(b, a; 1)`.
    fn with_values(vals: &[f64]) -> Trajectory<f64> {
        sliding(&vals.iter().map(|v| v + 2.0).collect::<Vec<_>>())
    }

    const ATOM: &str = "leftOf(b, a; 1)";

    #[test]
    fn always_and_eventually() {
        let traj = with_values(&[1.0, 3.0, -2.0]);
        let g = parse(&format!("G[0,2]({ATOM})")).unwrap();
        assert_eq!(eval_exact(&g, &traj, 0).unwrap().value, -2.0);
        let traj = with_values(&[-1.0, 2.0, 0.0]);
        let f = parse(&format!("F[0,2]({ATOM})")).unwrap();
        assert_eq!(eval_exact(&f, &traj, 0).unwrap().value, 2.0);
    }

    #[test]
    fn until_matches_brute_force() {
        let rhs = [-1.0f64, -1.0, 4.0];
        let traj = with_values(&rhs);
        let phi = parse(&format!("leftOf(b, c; 1) U[0,2] {ATOM}")).unwrap();
        let brute = (0..=2).map(|k| (0..=k).map(|_| 5.0).fold(rhs[k], f64::min)).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(brute, 4.0);
        assert_eq!(eval_exact(&phi, &traj, 0).unwrap().value, brute);
        let late = parse(&format!("leftOf(b, c; 1) U[1,2] {ATOM}")).unwrap();
        assert_eq!(eval_exact(&late, &traj, 0).unwrap().value, 4.0);
    }

    #[test]
    fn window_clipping() {
        let traj = with_values(&[1.0, 2.0, 3.0]);
        let g = parse(&format!("G[1,10]({ATOM})")).unwrap();
        assert_eq!(eval_exact(&g, &traj, 0).unwrap().value, 2.0);
        let late = parse(&format!("F[3,4]({ATOM})")).unwrap();
        assert!(matches!(eval_exact(&late, &traj, 0), Err(EvalError::EmptyWindow { op: "F", t: 0, .. })));
        assert!(matches!(eval_exact(&g, &traj, 3), Err(EvalError::TimeOutOfRange { .. })));
        let r = eval_exact_breakdown(&g, &traj).unwrap();
        assert_eq!(r.per_time.unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn smooth_and_of_equal_values() {
        let traj = with_values(&[0.7]);
        let phi = parse(&format!("{ATOM} & {ATOM}")).unwrap();
        let tau = 1e-2;
        let v = eval_smooth(&phi, &traj, 0, &Smoothing::with_tau(tau)).unwrap().value;
        assert!(v <= 0.7 && v >= 0.7 - tau * 2f64.ln() - 1e-12, "{v}");
    }

    #[test]
    fn single_step_window_is_exact() {
        let traj = with_values(&[0.7, 0.2]);
        let phi = parse(&format!("G[1,1]({ATOM})")).unwrap();
        let v = eval_smooth(&phi, &traj, 0, &Smoothing::with_tau(0.5)).unwrap().value;
        assert!((v - 0.2).abs() < 1e-12);
    }

    #[test]
    fn budget_contains_gap() {
        let traj = with_values(&[0.7, 0.2, -0.4, 1.1]);
        let phi = parse(&format!("G[0,3]({ATOM}) | (F[1,2]({ATOM}) & !{ATOM})")).unwrap();
        let tau = 1e-2;
        let (lo, hi) = smoothing_budget(&phi, traj.scene(0), tau).unwrap().unwrap();
        let gap = eval_smooth(&phi, &traj, 0, &Smoothing::with_tau(tau)).unwrap().value
            - eval_exact(&phi, &traj, 0).unwrap().value;
        assert!(lo <= gap && gap <= hi, "{lo} {gap} {hi}");
        let sampled = parse("farFrom(a, b; 1)").unwrap();
        assert_eq!(smoothing_budget(&sampled, traj.scene(0), tau).unwrap(), None);
    }

    #[test]
    fn inconsistent_trajectory() {
        let a = sliding(&[0.0]).scene(0).clone();
        let b = Scene::new()
            .with("a", SceneObject::polygon(ConvexPolygon::rectangle(0.0, 0.0, 1.0, 1.0).unwrap()))
            .unwrap();
        assert!(matches!(Trajectory::new(vec![a, b], 0.1), Err(EvalError::Inconsistent { t: 1, .. })));
        assert_eq!(Trajectory::<f64>::new(vec![], 0.1), Err(EvalError::EmptyTrajectory));
    }

    #[test]
    fn unknown_object_names_atom() {
        let traj = with_values(&[1.0]);
        let phi = parse("leftOf(a, zz; 1)").unwrap();
        let err = eval_exact(&phi, &traj, 0).unwrap_err();
        assert!(matches!(err, EvalError::Atom { source: SpatialError::UnknownObject(_), .. }));
    }
}
