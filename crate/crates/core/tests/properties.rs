mod common;

use std::sync::OnceLock;

use proptest::prelude::*;

use smoothspatial::learn::synth::{self, SynthConfig, SynthDemos};
use smoothspatial::learn::{closed_form_margin, discover, DemonstrationSet, DiscoveryConfig};
use smoothspatial::logic::{eval_exact, eval_smooth, is_pnf, parse, satisfies, to_pnf, Window};
use smoothspatial::spatial::{self, Axis, Direction, Smoothing};
use smoothspatial::{lse_max, lse_min, Atom, Formula, Predicate};

const HORIZON: usize = 12;

fn atom_strategy() -> impl Strategy<Value = Formula> {
    let eps = 0.05f64..2.0;
    let pred = prop_oneof![
        eps.clone().prop_map(|e| Predicate::CloseTo { eps: e }),
        eps.clone().prop_map(|e| Predicate::FarFrom { eps: e }),
        eps.clone().prop_map(|e| Predicate::Touch { eps: e }),
        eps.clone().prop_map(|d| Predicate::Ovlp { delta: d }),
        (eps.clone(), eps.clone()).prop_map(|(a, b)| Predicate::PartOvlp { delta_ov: a, delta_in: b }),
        eps.clone().prop_map(|d| Predicate::EnclIn { delta: d }),
        (0usize..4, eps.clone()).prop_map(|(i, k)| Predicate::Directional { dir: Direction::ALL[i], kappa: k }),
        (any::<bool>(), eps.clone()).prop_map(|(x, k)| Predicate::Between {
            axis: if x { Axis::X } else { Axis::Y },
            kappa: k
        }),
        eps.clone().prop_map(|k| Predicate::Oriented { kappa: k }),
        (-3.0f64..3.0, eps).prop_map(|(t, k)| Predicate::BearingTo { theta_ref: t, kappa: k }),
    ];
    (pred, any::<bool>()).prop_map(|(p, swap)| {
        let (x, y) = if swap { ("b", "a") } else { ("a", "b") };
        let objects: Vec<String> =
            if p.arity() == 3 { vec![x.into(), "c".into(), y.into()] } else { vec![x.into(), y.into()] };
        Formula::atom(Atom::new(p, objects).unwrap())
    })
}

fn window() -> impl Strategy<Value = Window> {
    (0usize..=3, 0usize..=3).prop_map(|(lo, len)| Window::new(lo, lo + len).unwrap())
}

/// Formulas of temporal depth at most 3, so every window starts inside the
/// horizon.
fn formula(with_until: bool) -> impl Strategy<Value = Formula> {
    atom_strategy().prop_recursive(3, 24, 3, move |inner| {
        let mut ops = vec![
            inner.clone().prop_map(Formula::not).boxed(),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::and).boxed(),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Formula::or).boxed(),
            (window(), inner.clone()).prop_map(|(w, f)| Formula::always(w, f)).boxed(),
            (window(), inner.clone()).prop_map(|(w, f)| Formula::eventually(w, f)).boxed(),
        ];
        if with_until {
            ops.push((window(), inner.clone(), inner).prop_map(|(w, a, b)| Formula::until(w, a, b)).boxed());
        }
        prop::strategy::Union::new(ops)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lse_brackets_hard_extremes(xs in prop::collection::vec(-100.0f64..100.0, 1..=64), ti in 0usize..3) {
        let tau = [1.0, 0.1, 0.01][ti];
        let gap = tau * (xs.len() as f64).ln();
        let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = xs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = lse_max(&xs, tau).unwrap();
        let lo = lse_min(&xs, tau).unwrap();
        prop_assert!(max <= hi && hi <= max + gap, "{max} {hi} {gap}");
        prop_assert!(min - gap <= lo && lo <= min, "{min} {lo} {gap}");
    }

    #[test]
    fn display_parses_back(phi in formula(true)) {
        let text = phi.to_string();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &phi, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn pnf_preserves_robustness(phi in formula(false), seed in 0u64..1000) {
        let pnf = to_pnf(&phi);
        prop_assert!(is_pnf(&pnf));
        let traj = common::trajectory(seed, HORIZON);
        let a = eval_exact(&phi, &traj, 0).unwrap().value;
        let b = eval_exact(&pnf, &traj, 0).unwrap().value;
        prop_assert_eq!(a.to_bits(), b.to_bits(), "{} vs {}", phi, pnf);
    }

    #[test]
    fn boolean_monitor_agrees_with_sign(phi in formula(true), seed in 0u64..1000) {
        let traj = common::trajectory(seed, HORIZON);
        let rho = eval_exact(&phi, &traj, 0).unwrap().value;
        prop_assume!(rho != 0.0);
        prop_assert_eq!(satisfies(&phi, &traj, 0).unwrap(), rho > 0.0);
    }

    #[test]
    fn directional_smoothing_is_sound(seed in 0u64..10_000, di in 0usize..4, between in any::<bool>(), kappa in 0.01f64..1.0) {
        let traj = common::trajectory(seed, 0);
        let scene = traj.scene(0);
        let atom = if between {
            Atom::new(Predicate::Between { axis: if di % 2 == 0 { Axis::X } else { Axis::Y }, kappa },
                vec!["a".into(), "c".into(), "b".into()]).unwrap()
        } else {
            Atom::binary(Predicate::Directional { dir: Direction::ALL[di], kappa }, "a", "b").unwrap()
        };
        for tau in [1e-1, 1e-2, 1e-3] {
            let s = spatial::eval_smooth(&atom, scene, &Smoothing::with_tau(tau)).unwrap();
            let e = spatial::eval_exact(&atom, scene).unwrap();
            prop_assert!(s <= e, "{atom}: smooth {s} > exact {e}");
        }
    }

    #[test]
    fn oriented_is_exact(seed in 0u64..10_000, kappa in 0.01f64..2.0, tau in 1e-4f64..1.0) {
        let traj = common::trajectory(seed, 0);
        let atom = Atom::binary(Predicate::Oriented { kappa }, "a", "b").unwrap();
        let s = spatial::eval_smooth(&atom, traj.scene(0), &Smoothing::with_tau(tau)).unwrap();
        let e = spatial::eval_exact(&atom, traj.scene(0)).unwrap();
        prop_assert_eq!(s.to_bits(), e.to_bits());
    }

    #[test]
    fn always_of_sound_atoms_stays_below_exact(seed in 0u64..1000, di in 0usize..4) {
        let traj = common::trajectory(seed, HORIZON);
        let phi = parse(&format!("G[0,{HORIZON}]({}(a, b; 0.1) & oriented(a, c; 0.5))", Direction::ALL[di].name())).unwrap();
        let s = eval_smooth(&phi, &traj, 0, &Smoothing::default()).unwrap().value;
        let e = eval_exact(&phi, &traj, 0).unwrap().value;
        prop_assert!(s <= e, "{s} > {e}");
    }
}

fn demos() -> &'static SynthDemos {
    static DEMOS: OnceLock<SynthDemos> = OnceLock::new();
    DEMOS.get_or_init(|| synth::synthesize(&SynthConfig { demos: 8, ..SynthConfig::default() }).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn closed_form_margin_never_grows_with_more_demos(n in 1usize..8, pick in 0usize..64) {
        let d = demos();
        let subset = |k: usize| DemonstrationSet::new(d.set.trajectories()[..k].to_vec(), d.set.phases().to_vec()).unwrap();
        let small = subset(n);
        let found = discover(&small, &[synth::ARM], &synth::OBSTACLES, &DiscoveryConfig::default()).unwrap();
        let c = &found.satisfied[pick % found.satisfied.len()].candidate;
        let before = closed_form_margin(&small, c).unwrap();
        let after = closed_form_margin(&subset(n + 1), c).unwrap();
        prop_assert!(after <= before, "{c}: {before} -> {after}");
    }
}
