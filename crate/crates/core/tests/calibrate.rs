//! Regenerates the frozen accuracy constants. Run with
//! `cargo test -p smoothspatial-core --test calibrate -- --ignored --nocapture`.

use smoothspatial::accuracy::{frozen, measure_pair, summarize, Quantity};

/// 25% headroom, rounded up to two significant digits.
fn headroom(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let y = 1.25 * x;
    let scale = 10f64.powi(y.log10().floor() as i32 - 1);
    (y / scale).ceil() * scale
}

#[test]
#[ignore]
fn calibrate_frozen_constants() {
    let mut rows = Vec::new();
    for i in 0..frozen::PAIRS {
        rows.extend(measure_pair(frozen::SEED, i, &[frozen::TAU], &[frozen::SAMPLES], frozen::SIGMOID_K).unwrap());
    }
    for q in Quantity::ALL {
        let of_q: Vec<_> = rows.iter().filter(|m| m.quantity == q).collect();
        let c = of_q
            .iter()
            .map(|m| (m.error() - m.tau * m.log_terms).max(0.0) / m.spacing)
            .fold(0.0, f64::max);
        let worst = of_q.iter().map(|m| m.error()).fold(0.0, f64::max);
        let flips = of_q.iter().filter(|m| m.exact.abs() > 0.05 && m.exact.signum() != m.smooth.signum()).count();
        let max_h = of_q.iter().map(|m| m.spacing).fold(0.0, f64::max);
        let max_log = of_q.iter().map(|m| m.tau * m.log_terms).fold(0.0, f64::max);
        let frozen_c = headroom(c);
        let bound = of_q.iter().map(|m| frozen_c * m.spacing + m.tau * m.log_terms).fold(0.0, f64::max);
        println!("{q}: C={frozen_c:e} bound={:e}", headroom(bound));
        println!("{q}: C_raw={c:.6e} worst_err={worst:.6e} max_h={max_h:.4} max_taulog={max_log:.4e} sign_flips={flips}");
    }
    for s in summarize(&rows) {
        println!("{s:?}");
    }
}

#[test]
#[ignore]
fn sensitivity_probe() {
    let mut rows = Vec::new();
    for i in 0..200 {
        rows.extend(measure_pair(1, i, &[1e-1, 1e-2, 1e-3], &[16], 50.0).unwrap());
        rows.extend(measure_pair(1, i, &[1e-2], &[4, 64], 50.0).unwrap());
    }
    for s in summarize(&rows) {
        println!("{:<16} tau={:<6} S={:<3} max={:.6e} mean={:.6e}", s.quantity, s.tau, s.samples, s.max_error, s.mean_error);
    }
}
