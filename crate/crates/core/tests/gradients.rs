mod common;

use smoothspatial::geom::PolygonTemplate;
use smoothspatial::logic::{eval_smooth, parse};
use smoothspatial::numdiff::{central_gradient, max_relative_error};
use smoothspatial::random::stream_rng;
use smoothspatial::spatial::{self, PREDICATE_NAMES};
use smoothspatial::{Atom, Formula, Predicate, Scalar, Smoothing, Tape, Trajectory, Var};

const STEP: f64 = 1e-5;
const TOL: f64 = 1e-4;
const CONFIGS: usize = 25;

/// Worst relative gradient error, or `None` when the configuration sits on a
/// kink (finite differences at two step sizes disagree) or is undefined.
fn check<V, G>(value: V, gradient: G, x: &[f64]) -> Option<f64>
where
    V: Fn(&[f64]) -> Option<f64>,
    G: for<'t> Fn(&[Var<'t>]) -> Option<Var<'t>>,
{
    let tape = Tape::new();
    let vars: Vec<Var<'_>> = x.iter().map(|&v| tape.var(v)).collect();
    let g = gradient(&vars)?.backward().ok()?;
    let analytic: Vec<f64> = vars.iter().map(|&v| g.wrt(v)).collect();
    let value = |p: &[f64]| value(p).unwrap_or(f64::NAN);
    let n1 = central_gradient(value, x, STEP);
    let n2 = central_gradient(value, x, 2.0 * STEP);
    if n1.iter().chain(&n2).any(|g| !g.is_finite()) || max_relative_error(&n1, &n2) > 0.1 * TOL {
        return None;
    }
    Some(max_relative_error(&analytic, &n1))
}

fn atom_for(name: &str) -> Atom {
    let params: &[f64] = match name {
        "partOvlp" => &[0.1, 0.1],
        "bearingTo" => &[0.7, 0.3],
        _ => &[0.2],
    };
    let p = Predicate::from_name(name, params).unwrap();
    let objects = if p.arity() == 3 { vec!["a", "c", "b"] } else { vec!["a", "b"] };
    Atom::new(p, objects.into_iter().map(String::from).collect()).unwrap()
}

fn atom_value<T: Scalar>(atom: &Atom, t: &[PolygonTemplate], x: &[T]) -> Option<T> {
    spatial::eval_smooth(atom, &common::scene(t, x), &Smoothing::default()).ok()
}

#[test]
fn planar_predicates_match_finite_differences() {
    for name in PREDICATE_NAMES.iter().filter(|n| !matches!(**n, "below" | "above")) {
        let atom = atom_for(name);
        let (mut checked, mut worst) = (0, 0.0f64);
        for i in 0..4 * CONFIGS as u64 {
            if checked == CONFIGS {
                break;
            }
            let t = common::templates(i);
            let x = common::random_poses(&mut stream_rng(i, 1), 3, 2.0);
            if let Some(e) = check(|x| atom_value(&atom, &t, x), |x| atom_value(&atom, &t, x), &x) {
                checked += 1;
                worst = worst.max(e);
            }
        }
        assert_eq!(checked, CONFIGS, "{name}: too many degenerate configurations");
        assert!(worst <= TOL, "{name}: relative gradient error {worst:e}");
    }
}

fn moving_trajectory<T: Scalar>(t: &[PolygonTemplate], x: &[T], fixed: &[f64]) -> Trajectory<T> {
    let steps = x.len() / 3;
    let scenes = (0..steps)
        .map(|k| {
            let mut poses: Vec<T> = x[3 * k..3 * k + 3].to_vec();
            poses.extend(fixed.iter().map(|&v| x[0].constant_like(v)));
            common::scene(t, &poses)
        })
        .collect();
    Trajectory::new(scenes, 1.0).unwrap()
}

fn formula_value<T: Scalar>(phi: &Formula, t: &[PolygonTemplate], x: &[T], fixed: &[f64]) -> Option<T> {
    eval_smooth(phi, &moving_trajectory(t, x, fixed), 0, &Smoothing::default()).ok().map(|r| r.value)
}

fn fixture_formulas() -> Vec<Formula> {
    [
        "G[0,5](farFrom(a, b; 0.3)) & F[0,5](enclIn(a, c; 0.05))",
        "F[0,5](closeTo(a, b; 1) & leftOf(a, c; 0.1)) | G[0,5](oriented(a, b; 0.5))",
        "!ovlp(a, b; 0.1) U[1,4] touch(a, c; 0.2)",
    ]
    .iter()
    .map(|s| parse(s).unwrap())
    .collect()
}

#[test]
fn formulas_match_finite_differences() {
    for phi in fixture_formulas() {
        let (mut checked, mut worst) = (0, 0.0f64);
        for i in 0..4 * CONFIGS as u64 {
            if checked == CONFIGS {
                break;
            }
            let t = common::templates(i);
            let mut rng = stream_rng(i, 2);
            let x = common::random_poses(&mut rng, 6, 2.0);
            let fixed = common::random_poses(&mut rng, 2, 2.0);
            let value = |x: &[f64]| formula_value(&phi, &t, x, &fixed);
            if let Some(e) = check(value, |x| formula_value(&phi, &t, x, &fixed), &x) {
                checked += 1;
                worst = worst.max(e);
            }
        }
        assert_eq!(checked, CONFIGS, "{phi}: too many degenerate configurations");
        assert!(worst <= TOL, "{phi}: relative gradient error {worst:e}");
    }
}
