use super::ast::Formula;

/// Pushes negations down to atoms with De Morgan and the G/F duality. A
/// negated Until is left in place.
pub fn to_pnf(phi: &Formula) -> Formula {
    push(phi, false)
}

fn push(phi: &Formula, negate: bool) -> Formula {
    match phi {
        Formula::Atom(_) if negate => Formula::not(phi.clone()),
        Formula::Atom(_) => phi.clone(),
        Formula::Not(c) => push(c, !negate),
        Formula::And(cs) | Formula::Or(cs) => {
            let cs: Vec<Formula> = cs.iter().map(|c| push(c, negate)).collect();
            if matches!(phi, Formula::And(_)) != negate {
                Formula::And(cs)
            } else {
                Formula::Or(cs)
            }
        }
        Formula::Always(w, c) if negate => Formula::eventually(*w, push(c, true)),
        Formula::Always(w, c) => Formula::always(*w, push(c, false)),
        Formula::Eventually(w, c) if negate => Formula::always(*w, push(c, true)),
        Formula::Eventually(w, c) => Formula::eventually(*w, push(c, false)),
        Formula::Until(w, a, b) => {
            let u = Formula::until(*w, push(a, false), push(b, false));
            if negate {
                log::warn!("negated Until has no dual here; left as `!({u})`");
                Formula::not(u)
            } else {
                u
            }
        }
    }
}

/// True when every negation sits directly on an atom.
pub fn is_pnf(phi: &Formula) -> bool {
    match phi {
        Formula::Not(c) => matches!(c.as_ref(), Formula::Atom(_)),
        _ => phi.children().into_iter().all(is_pnf),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::parse;

    #[test]
    fn de_morgan() {
        let f = parse("!(leftOf(a,b;1) & above(a,b;1))").unwrap();
        assert_eq!(to_pnf(&f), parse("!leftOf(a,b;1) | !above(a,b;1)").unwrap());
    }

    #[test]
    fn temporal_duality() {
        let f = parse("!G[0,5](leftOf(a,b;1))").unwrap();
        assert_eq!(to_pnf(&f), parse("F[0,5](!leftOf(a,b;1))").unwrap());
        let f = parse("!!F[0,5](!(leftOf(a,b;1) | behind(a,b;1)))").unwrap();
        let p = to_pnf(&f);
        assert_eq!(p, parse("F[0,5](!leftOf(a,b;1) & !behind(a,b;1))").unwrap());
        assert!(is_pnf(&p) && !is_pnf(&f));
    }

    #[test]
    fn negated_until_kept() {
        let f = parse("!(leftOf(a,b;1) U[0,2] !behind(a,b;1))").unwrap();
        assert_eq!(to_pnf(&f), f);
        assert!(!is_pnf(&f));
    }
}
