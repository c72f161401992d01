//! Boolean STL monitor: the same recursion as the quantitative semantics, with
//! atoms decided by `exact robustness > 0`.

use std::collections::HashMap;

use super::ast::{Formula, Window};
use super::eval::{EvalError, Trajectory};
use crate::spatial;

struct Monitor<'a> {
    traj: &'a Trajectory<f64>,
    memo: HashMap<(usize, usize), bool>,
}

impl Monitor<'_> {
    fn window(&self, op: &'static str, w: Window, t: usize) -> Result<std::ops::RangeInclusive<usize>, EvalError> {
        let horizon = self.traj.horizon();
        if t + w.lo > horizon {
            return Err(EvalError::EmptyWindow { op, window: w, t, horizon });
        }
        Ok(t + w.lo..=(t + w.hi).min(horizon))
    }

    fn sat(&mut self, f: &Formula, t: usize) -> Result<bool, EvalError> {
        let key = (f as *const Formula as usize, t);
        if let Some(&b) = self.memo.get(&key) {
            return Ok(b);
        }
        let b = match f {
            Formula::Atom(n) => {
                let r = spatial::eval_exact(&n.atom, self.traj.scene(t))
                    .map_err(|source| EvalError::Atom { atom: n.atom.to_string(), t, source })?;
                r > 0.0
            }
            Formula::Not(c) => !self.sat(c, t)?,
            Formula::And(cs) => {
                let mut all = true;
                for c in cs {
                    all &= self.sat(c, t)?;
                }
                all
            }
            Formula::Or(cs) => {
                let mut any = false;
                for c in cs {
                    any |= self.sat(c, t)?;
                }
                any
            }
            Formula::Always(w, c) => {
                let mut all = true;
                for k in self.window("G", *w, t)? {
                    all &= self.sat(c, k)?;
                }
                all
            }
            Formula::Eventually(w, c) => {
                let mut any = false;
                for k in self.window("F", *w, t)? {
                    any |= self.sat(c, k)?;
                }
                any
            }
            Formula::Until(w, a, b) => {
                let mut any = false;
                for k in self.window("U", *w, t)? {
                    let mut holds = self.sat(b, k)?;
                    for j in t..=k {
                        holds &= self.sat(a, j)?;
                    }
                    any |= holds;
                }
                any
            }
        };
        self.memo.insert(key, b);
        Ok(b)
    }
}

/// Whether the trajectory satisfies `phi` at time `t`.
pub fn satisfies(phi: &Formula, traj: &Trajectory<f64>, t: usize) -> Result<bool, EvalError> {
    let horizon = traj.horizon();
    if t > horizon {
        return Err(EvalError::TimeOutOfRange { t, horizon });
    }
    Monitor { traj, memo: HashMap::new() }.sat(phi, t)
}
