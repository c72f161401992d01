//! Specification mining from demonstrations: enumerate temporal directional
//! candidates, keep those every demonstration satisfies, then learn the
//! tightest margins by gradient ascent on smooth robustness.

pub mod synth;

use std::fmt;

use thiserror::Error;

use crate::ad::{lse_min, Tape};
use crate::logic::{eval_exact, eval_smooth, smoothing_budget, EvalError, Formula, Trajectory, Window};
use crate::spatial::{Atom, Direction, Predicate, Smoothing, SpatialError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnError {
    #[error("demonstration set is empty")]
    NoDemonstrations,
    #[error("phase `{name}` {window} lies beyond the horizon {horizon} of demonstration {demo}")]
    PhaseBeyondHorizon { name: String, window: Window, horizon: usize, demo: usize },
    #[error("phases `{0}` and `{1}` overlap")]
    OverlappingPhases(String, String),
    #[error("demonstration {demo} has objects {found:?}, expected {expected:?}")]
    Schema { demo: usize, expected: Vec<String>, found: Vec<String> },
    #[error("candidate `{candidate}` is violated by demonstration {demo} (robustness {rho})")]
    Unsatisfied { candidate: String, demo: usize, rho: f64 },
    #[error("invalid learning setting: {0}")]
    Config(String),
    #[error("demonstration {demo}: {source}")]
    Eval { demo: usize, source: EvalError },
    #[error(transparent)]
    Spatial(#[from] SpatialError),
}

/// Named absolute time interval of the task.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub name: String,
    pub window: Window,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemonstrationSet {
    trajectories: Vec<Trajectory<f64>>,
    phases: Vec<Phase>,
}

impl DemonstrationSet {
    pub fn new(trajectories: Vec<Trajectory<f64>>, phases: Vec<Phase>) -> Result<Self, LearnError> {
        let first = trajectories.first().ok_or(LearnError::NoDemonstrations)?;
        let names: Vec<String> = first.scene(0).names().map(str::to_string).collect();
        for (demo, traj) in trajectories.iter().enumerate() {
            let found: Vec<String> = traj.scene(0).names().map(str::to_string).collect();
            if found != names {
                return Err(LearnError::Schema { demo, expected: names, found });
            }
            for p in &phases {
                if p.window.hi > traj.horizon() {
                    return Err(LearnError::PhaseBeyondHorizon {
                        name: p.name.clone(),
                        window: p.window,
                        horizon: traj.horizon(),
                        demo,
                    });
                }
            }
        }
        for (i, a) in phases.iter().enumerate() {
            for b in &phases[i + 1..] {
                if a.window.lo <= b.window.hi && b.window.lo <= a.window.hi {
                    return Err(LearnError::OverlappingPhases(a.name.clone(), b.name.clone()));
                }
            }
        }
        Ok(Self { trajectories, phases })
    }

    pub fn trajectories(&self) -> &[Trajectory<f64>] {
        &self.trajectories
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    /// A copy with one more demonstration.
    pub fn with(&self, traj: Trajectory<f64>) -> Result<Self, LearnError> {
        let mut all = self.trajectories.clone();
        all.push(traj);
        Self::new(all, self.phases.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TemporalOp {
    Always,
    Eventually,
}

impl TemporalOp {
    pub fn symbol(self) -> &'static str {
        match self {
            TemporalOp::Always => "G",
            TemporalOp::Eventually => "F",
        }
    }
}

/// `op_I(dir(subject, object; kappa + margin))`.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub op: TemporalOp,
    pub direction: Direction,
    pub kappa: f64,
    pub subject: String,
    pub object: String,
    pub phase: Phase,
}

impl Candidate {
    /// The candidate with its threshold tightened by `margin`.
    pub fn formula_with_margin(&self, margin: f64) -> Formula {
        let pred = Predicate::Directional { dir: self.direction, kappa: self.kappa + margin };
        let atom = Atom { predicate: pred, objects: vec![self.subject.clone(), self.object.clone()] };
        let body = Formula::atom(atom);
        match self.op {
            TemporalOp::Always => Formula::always(self.phase.window, body),
            TemporalOp::Eventually => Formula::eventually(self.phase.window, body),
        }
    }

    pub fn formula(&self) -> Formula {
        self.formula_with_margin(0.0)
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.formula())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryConfig {
    /// Base clearance `kappa` of every directional atom; must be positive.
    pub kappa: f64,
    pub directions: Vec<Direction>,
    pub keep_per_pair: usize,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self { kappa: 0.01, directions: Direction::ALL.to_vec(), keep_per_pair: 2 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub candidate: Candidate,
    /// Minimum exact robustness over the demonstrations.
    pub worst_case: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Discovery {
    /// Size of the enumeration before filtering.
    pub enumerated: usize,
    /// Every candidate whose worst case is positive, in enumeration order.
    pub satisfied: Vec<ScoredCandidate>,
    /// The kept candidates, best first within each (phase, object) pair.
    pub retained: Vec<ScoredCandidate>,
    /// (phase, object) pairs with no satisfied candidate.
    pub omitted: Vec<(String, String)>,
}

impl Discovery {
    /// Conjunction of the retained candidates.
    pub fn specification(&self) -> Option<Formula> {
        if self.retained.is_empty() {
            return None;
        }
        Some(Formula::and(self.retained.iter().map(|c| c.candidate.formula()).collect()))
    }
}

/// Minimum exact robustness of `phi` over the demonstrations.
pub fn worst_case(d: &DemonstrationSet, phi: &Formula) -> Result<f64, LearnError> {
    let mut worst = f64::INFINITY;
    for (demo, traj) in d.trajectories.iter().enumerate() {
        let r = eval_exact(phi, traj, 0).map_err(|source| LearnError::Eval { demo, source })?.value;
        worst = worst.min(r);
    }
    Ok(worst)
}

/// Enumerates `{G, F} x directions x (subject, object) x phase`, keeps every
/// candidate all demonstrations satisfy, and retains the `keep_per_pair`
/// most robust per (phase, object). Ties keep enumeration order: G before F,
/// then the order of `cfg.directions`.
pub fn discover(
    d: &DemonstrationSet,
    subjects: &[&str],
    objects: &[&str],
    cfg: &DiscoveryConfig,
) -> Result<Discovery, LearnError> {
    if !(cfg.kappa > 0.0 && cfg.kappa.is_finite()) {
        return Err(LearnError::Config(format!("kappa must be positive, got {}", cfg.kappa)));
    }
    let mut enumerated = 0;
    let mut satisfied = Vec::new();
    let mut retained = Vec::new();
    let mut omitted = Vec::new();
    for phase in &d.phases {
        for &object in objects {
            let mut pool: Vec<ScoredCandidate> = Vec::new();
            for &subject in subjects {
                if subject == object {
                    continue;
                }
                for op in [TemporalOp::Always, TemporalOp::Eventually] {
                    for &direction in &cfg.directions {
                        enumerated += 1;
                        let candidate = Candidate {
                            op,
                            direction,
                            kappa: cfg.kappa,
                            subject: subject.to_string(),
                            object: object.to_string(),
                            phase: phase.clone(),
                        };
                        let worst = match worst_case(d, &candidate.formula()) {
                            Ok(w) => w,
                            Err(LearnError::Eval {
                                source: EvalError::Atom { source: SpatialError::UnsupportedShape { .. }, .. },
                                ..
                            }) => {
                                log::debug!("{candidate} does not apply to these shapes");
                                continue;
                            }
                            Err(e) => return Err(e),
                        };
                        if worst > 0.0 {
                            pool.push(ScoredCandidate { candidate, worst_case: worst });
                        }
                    }
                }
            }
            if pool.is_empty() {
                log::warn!("no candidate holds for object `{object}` in phase `{}`", phase.name);
                omitted.push((phase.name.clone(), object.to_string()));
                continue;
            }
            satisfied.extend(pool.iter().cloned());
            pool.sort_by(|a, b| b.worst_case.total_cmp(&a.worst_case));
            retained.extend(pool.into_iter().take(cfg.keep_per_pair));
        }
    }
    Ok(Discovery { enumerated, satisfied, retained, omitted })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MarginConfig {
    /// Temperature of the smooth robustness and of the constraint soft-min.
    pub tau: f64,
    pub iterations: usize,
    /// Initial Adam step; decays as `step / (1 + k / decay)`.
    pub step: f64,
    pub decay: f64,
    /// Weight of the quadratic penalty on constraint violation.
    pub penalty: f64,
    /// Largest accepted distance between learned and closed-form margins.
    pub tolerance: f64,
}

impl Default for MarginConfig {
    fn default() -> Self {
        Self { tau: 2e-5, iterations: 3000, step: 5e-2, decay: 300.0, penalty: 1e3, tolerance: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnedMargin {
    pub candidate: Candidate,
    /// Margin from gradient ascent.
    pub margin: f64,
    /// `min` over demonstrations of the exact robustness.
    pub closed_form: f64,
    /// Every demonstration satisfies the tightened candidate exactly.
    pub sound: bool,
    /// Some demonstration has exact slack at most `TIGHTNESS_TOL`.
    pub tight: bool,
}

impl LearnedMargin {
    pub fn deviation(&self) -> f64 {
        (self.margin - self.closed_form).abs()
    }
}

pub const SOUNDNESS_TOL: f64 = 1e-9;
pub const TIGHTNESS_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct MarginReport {
    pub margins: Vec<LearnedMargin>,
    pub iterations: usize,
    pub tolerance: f64,
}

impl MarginReport {
    pub fn max_deviation(&self) -> f64 {
        self.margins.iter().map(LearnedMargin::deviation).fold(0.0, f64::max)
    }

    /// Sound, tight and within tolerance of the closed form for every margin.
    pub fn ok(&self) -> bool {
        self.margins.iter().all(|m| m.sound && m.tight && m.deviation() <= self.tolerance)
    }

    /// Conjunction of the tightened candidates.
    pub fn specification(&self) -> Option<Formula> {
        if self.margins.is_empty() {
            return None;
        }
        Some(Formula::and(self.margins.iter().map(|m| m.candidate.formula_with_margin(m.margin)).collect()))
    }

    /// Fixed-width table: one row per formula with its margin.
    pub fn table(&self) -> String {
        let mut rows = vec![(
            "Phase".to_string(),
            "Formula".to_string(),
            "Margin".to_string(),
            "Closed form".to_string(),
        )];
        for m in &self.margins {
            rows.push((
                m.candidate.phase.name.clone(),
                m.candidate.to_string(),
                format!("{:.4}", m.margin),
                format!("{:.4}", m.closed_form),
            ));
        }
        let w0 = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let w1 = rows.iter().map(|r| r.1.len()).max().unwrap_or(0);
        let w2 = rows.iter().map(|r| r.2.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (i, (a, b, c, d)) in rows.iter().enumerate() {
            out.push_str(&format!("{a:<w0$}  {b:<w1$}  {c:>w2$}  {d:>11}\n"));
            if i == 0 {
                out.push_str(&format!("{}\n", "-".repeat(w0 + w1 + w2 + 17)));
            }
        }
        out
    }
}

/// `min` over demonstrations of exact robustness: the largest margin every
/// demonstration respects.
pub fn closed_form_margin(d: &DemonstrationSet, c: &Candidate) -> Result<f64, LearnError> {
    worst_case(d, &c.formula())
}

/// Maximizes `sum(eps_k)` subject to `softmin_{xi,k}(rho~(xi, phi_k) - eps_k) >= 0`
/// by projected Adam ascent on a quadratic-penalty objective, then restores
/// smooth feasibility per candidate. Margins enter additively, so the smooth
/// robustness of every (candidate, demonstration) pair is computed once.
pub fn learn_margins(
    d: &DemonstrationSet,
    candidates: &[Candidate],
    cfg: &MarginConfig,
) -> Result<MarginReport, LearnError> {
    if !(cfg.tau > 0.0) || !(cfg.step > 0.0) || !(cfg.penalty > 0.0) || !(cfg.decay > 0.0) {
        return Err(LearnError::Config("tau, step, decay and penalty must be positive".into()));
    }
    let smoothing = Smoothing::with_tau(cfg.tau);
    let mut base: Vec<Vec<f64>> = Vec::with_capacity(candidates.len());
    let mut upper_gap = Vec::with_capacity(candidates.len());
    for c in candidates {
        let phi = c.formula();
        let gap = smoothing_budget(&phi, d.trajectories[0].scene(0), cfg.tau)?.map_or(0.0, |b| b.1.max(0.0));
        upper_gap.push(gap);
        let mut row = Vec::with_capacity(d.len());
        for (demo, traj) in d.trajectories.iter().enumerate() {
            let r = eval_smooth(&phi, traj, 0, &smoothing).map_err(|source| LearnError::Eval { demo, source })?.value;
            if r <= 0.0 {
                return Err(LearnError::Unsatisfied { candidate: c.to_string(), demo, rho: r });
            }
            row.push(r);
        }
        base.push(row);
    }

    let k = candidates.len();
    let mut eps = vec![0.0; k];
    let (mut m, mut v) = (vec![0.0; k], vec![0.0; k]);
    let (b1, b2) = (0.9, 0.999);
    for it in 0..cfg.iterations {
        let tape = Tape::new();
        let e: Vec<_> = eps.iter().map(|&x| tape.var(x)).collect();
        let slack: Vec<_> = base
            .iter()
            .zip(&e)
            .flat_map(|(row, &ek)| row.iter().map(move |&r| -ek + r))
            .collect();
        if slack.is_empty() {
            break;
        }
        let g = lse_min(&slack, cfg.tau).expect("non-empty slack");
        let violation = (-g).relu();
        let total = e.iter().skip(1).fold(e[0], |acc, &x| acc + x);
        let objective = total - violation.square() * (0.5 * cfg.penalty);
        let grads = objective.backward().expect("finite tape");
        let lr = cfg.step / (1.0 + it as f64 / cfg.decay);
        let t = (it + 1) as i32;
        for j in 0..k {
            let gj = grads.wrt(e[j]);
            m[j] = b1 * m[j] + (1.0 - b1) * gj;
            v[j] = b2 * v[j] + (1.0 - b2) * gj * gj;
            let step = lr * (m[j] / (1.0 - b1.powi(t))) / ((v[j] / (1.0 - b2.powi(t))).sqrt() + 1e-12);
            eps[j] = (eps[j] + step).max(0.0);
        }
    }
    log::debug!("margins before projection: {eps:?}");
    // Project onto each constraint, shifted by the smoothing over-estimate so
    // the margin is also feasible for the exact semantics.
    for ((ej, row), gap) in eps.iter_mut().zip(&base).zip(&upper_gap) {
        let floor = row.iter().copied().fold(f64::INFINITY, f64::min) - gap;
        *ej = ej.min(floor).max(0.0);
    }

    let mut margins = Vec::with_capacity(k);
    for (c, &margin) in candidates.iter().zip(&eps) {
        let closed_form = closed_form_margin(d, c)?;
        let slack = closed_form - margin;
        margins.push(LearnedMargin {
            candidate: c.clone(),
            margin,
            closed_form,
            sound: slack >= -SOUNDNESS_TOL,
            tight: slack <= TIGHTNESS_TOL,
        });
    }
    Ok(MarginReport { margins, iterations: cfg.iterations, tolerance: cfg.tolerance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spatial::{AxisAlignedBox3, Scene, SceneObject};

    /// Arm box at x positions `xs`, obstacle box spanning x in [5, 6].
    fn demo(xs: &[f64]) -> Trajectory<f64> {
        let scenes = xs
            .iter()
            .map(|&x| {
                Scene::new()
                    .with("arm", SceneObject::boxed(AxisAlignedBox3::new([x - 0.5, 0.0, 0.0], [x + 0.5, 1.0, 1.0]).unwrap()))
                    .unwrap()
                    .with("obs", SceneObject::boxed(AxisAlignedBox3::new([5.0, 0.0, 0.0], [6.0, 1.0, 1.0]).unwrap()))
                    .unwrap()
            })
            .collect();
        Trajectory::new(scenes, 1.0).unwrap()
    }

    fn phase(lo: usize, hi: usize) -> Phase {
        Phase { name: format!("p{lo}"), window: Window::new(lo, hi).unwrap() }
    }

    fn left_of(op: TemporalOp) -> Candidate {
        Candidate {
            op,
            direction: Direction::LeftOf,
            kappa: 0.01,
            subject: "arm".into(),
            object: "obs".into(),
            phase: phase(0, 2),
        }
    }

    #[test]
    fn closed_form_examples() {
        // leftOf reads 5 - (x + 0.5) - 0.01
        let d = DemonstrationSet::new(vec![demo(&[3.19, 3.0, 2.0])], vec![phase(0, 2)]).unwrap();
        let e = closed_form_margin(&d, &left_of(TemporalOp::Always)).unwrap();
        assert!((e - 1.3).abs() < 1e-12);

        let d = DemonstrationSet::new(vec![demo(&[2.49; 3]), demo(&[3.79; 3])], vec![phase(0, 2)]).unwrap();
        let e = closed_form_margin(&d, &left_of(TemporalOp::Always)).unwrap();
        assert!((e - 0.7).abs() < 1e-12);
    }

    #[test]
    fn discovery_counts_and_filters() {
        let d = DemonstrationSet::new(vec![demo(&[1.0, 2.0, 3.0]), demo(&[1.5, 1.5, 1.5])], vec![phase(0, 2)]).unwrap();
        let found = discover(&d, &["arm"], &["obs"], &DiscoveryConfig::default()).unwrap();
        assert_eq!(found.enumerated, 12);
        assert_eq!(found.retained.len(), 2);
        let ops: Vec<_> = found.retained.iter().map(|c| (c.candidate.op, c.candidate.direction)).collect();
        assert_eq!(ops, vec![(TemporalOp::Eventually, Direction::LeftOf), (TemporalOp::Always, Direction::LeftOf)]);
        assert!((found.retained[1].worst_case - (5.0 - 3.5 - 0.01)).abs() < 1e-12);

        let bad = d.with(demo(&[1.0, 5.0, 1.0])).unwrap();
        let found = discover(&bad, &["arm"], &["obs"], &DiscoveryConfig::default()).unwrap();
        let kinds: Vec<_> = found.retained.iter().map(|c| c.candidate.op).collect();
        assert_eq!(kinds, vec![TemporalOp::Eventually]);
    }

    #[test]
    fn ties_follow_enumeration_order() {
        let d = DemonstrationSet::new(vec![demo(&[2.0, 2.0, 2.0])], vec![phase(0, 2)]).unwrap();
        let found = discover(&d, &["arm"], &["obs"], &DiscoveryConfig::default()).unwrap();
        assert_eq!(found.retained[0].candidate.op, TemporalOp::Always);
        assert_eq!(found.retained[1].candidate.op, TemporalOp::Eventually);
    }

    #[test]
    fn margins_match_closed_form() {
        let d = DemonstrationSet::new(
            vec![demo(&[1.0, 2.0, 3.0]), demo(&[1.5, 1.5, 1.5]), demo(&[0.0, 2.5, 1.0])],
            vec![phase(0, 2)],
        )
        .unwrap();
        let cands = [left_of(TemporalOp::Always), left_of(TemporalOp::Eventually)];
        let report = learn_margins(&d, &cands, &MarginConfig::default()).unwrap();
        for m in &report.margins {
            assert!(m.sound && m.tight, "{m:?}");
        }
        assert!(report.ok(), "{}", report.max_deviation());
        assert!(report.table().contains("Closed form"));
    }

    #[test]
    fn set_validation() {
        assert_eq!(DemonstrationSet::new(vec![], vec![]), Err(LearnError::NoDemonstrations));
        let err = DemonstrationSet::new(vec![demo(&[1.0, 2.0])], vec![phase(0, 2)]).unwrap_err();
        assert!(matches!(err, LearnError::PhaseBeyondHorizon { .. }));
        let err = DemonstrationSet::new(vec![demo(&[1.0, 2.0, 3.0])], vec![phase(0, 1), phase(1, 2)]).unwrap_err();
        assert!(matches!(err, LearnError::OverlappingPhases(..)));
    }
}
