use std::collections::BTreeSet;
use std::fmt;

use crate::spatial::Atom;

/// Location of a token in formula source; 1-based line and column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

/// Bounded time window `[lo, hi]` relative to the evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Window {
    pub lo: usize,
    pub hi: usize,
}

impl Window {
    pub fn new(lo: usize, hi: usize) -> Option<Self> {
        (lo <= hi).then_some(Self { lo, hi })
    }

    pub fn len(&self) -> usize {
        self.hi - self.lo + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.lo, self.hi)
    }
}

/// An atom with the source span it was parsed from. Equality ignores the span.
#[derive(Debug, Clone)]
pub struct AtomNode {
    pub atom: Atom,
    pub span: Option<Span>,
}

impl PartialEq for AtomNode {
    fn eq(&self, other: &Self) -> bool {
        self.atom == other.atom
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    Atom(AtomNode),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Eventually(Window, Box<Formula>),
    Always(Window, Box<Formula>),
    Until(Window, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn atom(atom: Atom) -> Self {
        Formula::Atom(AtomNode { atom, span: None })
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    /// Conjunction; a single operand is returned unchanged.
    pub fn and(mut fs: Vec<Formula>) -> Self {
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Formula::And(fs)
        }
    }

    pub fn or(mut fs: Vec<Formula>) -> Self {
        if fs.len() == 1 {
            fs.pop().unwrap()
        } else {
            Formula::Or(fs)
        }
    }

    pub fn eventually(w: Window, f: Formula) -> Self {
        Formula::Eventually(w, Box::new(f))
    }

    pub fn always(w: Window, f: Formula) -> Self {
        Formula::Always(w, Box::new(f))
    }

    pub fn until(w: Window, lhs: Formula, rhs: Formula) -> Self {
        Formula::Until(w, Box::new(lhs), Box::new(rhs))
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Atom(_) => vec![],
            Formula::Not(f) | Formula::Eventually(_, f) | Formula::Always(_, f) => vec![f],
            Formula::And(fs) | Formula::Or(fs) => fs.iter().collect(),
            Formula::Until(_, a, b) => vec![a, b],
        }
    }

    /// Atoms in left-to-right order.
    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        if let Formula::Atom(n) = self {
            out.push(&n.atom);
        }
        for c in self.children() {
            c.collect_atoms(out);
        }
    }

    pub fn object_names(&self) -> BTreeSet<&str> {
        self.atoms().into_iter().flat_map(|a| a.objects.iter().map(String::as_str)).collect()
    }

    /// Number of future steps the formula looks at beyond the evaluation time.
    pub fn horizon(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) => f.horizon(),
            Formula::And(fs) | Formula::Or(fs) => fs.iter().map(Formula::horizon).max().unwrap_or(0),
            Formula::Eventually(w, f) | Formula::Always(w, f) => w.hi + f.horizon(),
            Formula::Until(w, a, b) => w.hi + a.horizon().max(b.horizon()),
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().iter().map(|c| c.size()).sum::<usize>()
    }

    fn needs_parens_in_operand(&self) -> bool {
        matches!(self, Formula::And(_) | Formula::Or(_) | Formula::Until(..))
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, child: &Formula) -> fmt::Result {
    if child.needs_parens_in_operand() {
        write!(f, "({child})")
    } else {
        write!(f, "{child}")
    }
}

/// Canonical text; parses back to an equal formula.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Atom(n) => write!(f, "{}", n.atom),
            Formula::Not(c) => {
                f.write_str("!")?;
                write_operand(f, c)
            }
            Formula::And(cs) | Formula::Or(cs) => {
                let sep = if matches!(self, Formula::And(_)) { " & " } else { " | " };
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write_operand(f, c)?;
                }
                Ok(())
            }
            Formula::Eventually(w, c) => write!(f, "F{w}({c})"),
            Formula::Always(w, c) => write!(f, "G{w}({c})"),
            Formula::Until(w, a, b) => {
                write_operand(f, a)?;
                write!(f, " U{w} ")?;
                write_operand(f, b)
            }
        }
    }
}
