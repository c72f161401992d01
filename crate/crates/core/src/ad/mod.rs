//! Scalar reverse-mode automatic differentiation and LogSumExp smoothing.

mod scalar;
mod tape;

pub use scalar::Scalar;
pub use tape::{AdError, Gradients, OpCode, Tape, Var};

fn check(len: usize, tau: f64, op: OpCode) -> Result<(), AdError> {
    if len == 0 {
        return Err(AdError::EmptyAggregate { op });
    }
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(AdError::BadTemperature(tau));
    }
    Ok(())
}

/// Smooth maximum `tau * ln(sum(exp(x_i / tau)))`, evaluated with max-shift.
///
/// Lies in `[max(xs), max(xs) + tau * ln(N)]`; its partials are the softmax
/// weights of `xs / tau`.
pub fn lse_max<T: Scalar>(xs: &[T], tau: f64) -> Result<T, AdError> {
    check(xs.len(), tau, OpCode::LseMax)?;
    Ok(T::lse_max_unchecked(xs, tau))
}

/// Smooth minimum `-lse_max(-xs)`, in `[min(xs) - tau * ln(N), min(xs)]`.
pub fn lse_min<T: Scalar>(xs: &[T], tau: f64) -> Result<T, AdError> {
    check(xs.len(), tau, OpCode::LseMin)?;
    Ok(T::lse_min_unchecked(xs, tau))
}

/// Hard maximum over a non-empty slice (first index wins ties).
pub fn hard_max<T: Scalar>(xs: &[T]) -> Option<T> {
    let (first, rest) = xs.split_first()?;
    Some(rest.iter().fold(*first, |acc, &x| acc.max2(x)))
}

/// Hard minimum over a non-empty slice (first index wins ties).
pub fn hard_min<T: Scalar>(xs: &[T]) -> Option<T> {
    let (first, rest) = xs.split_first()?;
    Some(rest.iter().fold(*first, |acc, &x| acc.min2(x)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn tie_closed_form() {
        let v = lse_max(&[0.0, 0.0], 0.01).unwrap();
        assert!((v - 0.01 * LN2).abs() < 1e-15);
        let v = lse_min(&[0.0, 0.0], 0.01).unwrap();
        assert!((v + 0.01 * LN2).abs() < 1e-15);
    }

    #[test]
    fn single_element_is_exact() {
        for tau in [1e-6, 0.01, 1.0, 100.0] {
            assert_eq!(lse_max(&[5.0], tau).unwrap(), 5.0);
            assert_eq!(lse_min(&[5.0], tau).unwrap(), 5.0);
        }
    }

    #[test]
    fn lemma_bounds_examples() {
        let v = lse_max(&[1.0, 2.0, 3.0], 0.01).unwrap();
        assert!((3.0..=3.0 + 0.01 * 3f64.ln()).contains(&v));
        let v = lse_min(&[1.0, 2.0, 3.0], 0.5).unwrap();
        assert!((1.0 - 0.5 * 3f64.ln()..=1.0).contains(&v));
    }

    #[test]
    fn small_tau_recovers_hard_min() {
        let v = lse_min(&[-1.0, 4.0], 1e-6).unwrap();
        assert!((v + 1.0).abs() < 1e-9);
    }

    #[test]
    fn no_overflow_at_small_tau() {
        let v = lse_max(&[800.0, 799.0, -800.0], 1e-3).unwrap();
        assert!(v.is_finite());
        assert!((v - 800.0).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        let empty: [f64; 0] = [];
        assert_eq!(lse_max(&empty, 0.1), Err(AdError::EmptyAggregate { op: OpCode::LseMax }));
        assert_eq!(lse_min(&empty, 0.1), Err(AdError::EmptyAggregate { op: OpCode::LseMin }));
        assert_eq!(lse_max(&[1.0], 0.0), Err(AdError::BadTemperature(0.0)));
    }

    #[test]
    fn softmax_partials() {
        let tape = Tape::new();
        let x = tape.var(0.0);
        let zero = tape.constant(0.0);
        let f = lse_max(&[x, zero], 0.1).unwrap();
        let g = f.backward().unwrap();
        assert!((g.wrt(x) - 0.5).abs() < 1e-15);

        let xs: Vec<Var> = [0.3, -0.2, 0.9].iter().map(|&v| tape.var(v)).collect();
        let f = lse_min(&xs, 0.5).unwrap();
        let g = f.backward().unwrap();
        let e: Vec<f64> = [0.3f64, -0.2, 0.9].iter().map(|v| (-v / 0.5).exp()).collect();
        let z: f64 = e.iter().sum();
        for (v, ei) in xs.iter().zip(&e) {
            assert!((g.wrt(*v) - ei / z).abs() < 1e-14);
        }
    }

    #[test]
    fn var_and_f64_agree_bitwise() {
        let vals = [0.25, -1.5, 2.0, 2.0, 0.1];
        let tape = Tape::new();
        let xs: Vec<Var> = vals.iter().map(|&v| tape.var(v)).collect();
        for tau in [1.0, 0.1, 0.01] {
            assert_eq!(lse_max(&xs, tau).unwrap().value(), lse_max(&vals, tau).unwrap());
            assert_eq!(lse_min(&xs, tau).unwrap().value(), lse_min(&vals, tau).unwrap());
        }
    }
}
