//! Formulas over spatial atoms with bounded temporal operators: AST, parser,
//! and exact, smooth and Boolean evaluation.

mod ast;
mod boolean;
mod eval;
mod parse;
mod pnf;

pub use ast::{AtomNode, Formula, Span, Window};
pub use boolean::satisfies;
pub use eval::{
    eval_exact, eval_exact_breakdown, eval_smooth, eval_smooth_breakdown, smoothing_budget, EvalError, Mode,
    RobustnessResult, Trajectory,
};
pub use parse::{parse, ParseError, ParseErrorKind};
pub use pnf::{is_pnf, to_pnf};
