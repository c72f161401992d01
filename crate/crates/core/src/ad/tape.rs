//! Append-only reverse-mode tape.
//!
//! Every [`Var`] is a handle into a [`Tape`]. Nodes are recorded in creation
//! order, so parent indices are always smaller than child indices and a single
//! descending sweep in [`Var::backward`] propagates adjoints.

use std::cell::RefCell;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

static NEXT_TAPE_ID: AtomicU64 = AtomicU64::new(0);

/// Operation recorded on a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpCode {
    Input,
    Const,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    AddConst,
    MulConst,
    DivConst,
    ConstDiv,
    Sqrt,
    Exp,
    Ln,
    AbsSmooth,
    Relu,
    Sigmoid,
    Atan2,
    Sin,
    Cos,
    Min2,
    Max2,
    Square,
    LseMax,
    LseMin,
}

impl fmt::Display for OpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            OpCode::Input => "input",
            OpCode::Const => "const",
            OpCode::Add => "add",
            OpCode::Sub => "sub",
            OpCode::Mul => "mul",
            OpCode::Div => "div",
            OpCode::Neg => "neg",
            OpCode::AddConst => "add_const",
            OpCode::MulConst => "mul_const",
            OpCode::DivConst => "div_const",
            OpCode::ConstDiv => "const_div",
            OpCode::Sqrt => "sqrt",
            OpCode::Exp => "exp",
            OpCode::Ln => "log",
            OpCode::AbsSmooth => "abs_smooth",
            OpCode::Relu => "relu",
            OpCode::Sigmoid => "sigmoid",
            OpCode::Atan2 => "atan2",
            OpCode::Sin => "sin",
            OpCode::Cos => "cos",
            OpCode::Min2 => "min2",
            OpCode::Max2 => "max2",
            OpCode::Square => "square",
            OpCode::LseMax => "lse_max",
            OpCode::LseMin => "lse_min",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdError {
    #[error("domain violation in `{op}` at node {node}: argument {arg}")]
    Domain { op: OpCode, node: usize, arg: f64 },
    #[error("`{op}` over an empty list")]
    EmptyAggregate { op: OpCode },
    #[error("temperature must be positive and finite, got {0}")]
    BadTemperature(f64),
    #[error("variables from different tapes combined")]
    CrossTape,
}

#[derive(Default)]
struct Nodes {
    ops: Vec<OpCode>,
    values: Vec<f64>,
    // args of node i live in args[offsets[i]..offsets[i + 1]]
    offsets: Vec<u32>,
    args: Vec<u32>,
    partials: Vec<f64>,
    fault: Option<AdError>,
}

/// Expression graph for one evaluation. Not `Sync`; confine to one thread.
pub struct Tape {
    id: u64,
    nodes: RefCell<Nodes>,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl fmt::Debug for Tape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Tape").field("id", &self.id).field("len", &self.len()).finish()
    }
}

impl Tape {
    pub fn new() -> Self {
        let nodes = Nodes { offsets: vec![0], ..Default::default() };
        Self { id: NEXT_TAPE_ID.fetch_add(1, Ordering::Relaxed), nodes: RefCell::new(nodes) }
    }

    /// Registers an independent input.
    pub fn var(&self, value: f64) -> Var<'_> {
        self.push(OpCode::Input, value, &[])
    }

    pub fn constant(&self, value: f64) -> Var<'_> {
        self.push(OpCode::Const, value, &[])
    }

    pub fn len(&self) -> usize {
        self.nodes.borrow().ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// First domain violation recorded on this tape, if any.
    pub fn status(&self) -> Result<(), AdError> {
        match &self.nodes.borrow().fault {
            Some(err) => Err(err.clone()),
            None => Ok(()),
        }
    }

    pub(crate) fn push(&self, op: OpCode, value: f64, parents: &[(u32, f64)]) -> Var<'_> {
        let mut nodes = self.nodes.borrow_mut();
        let index = nodes.ops.len();
        nodes.ops.push(op);
        nodes.values.push(value);
        for &(p, d) in parents {
            debug_assert!((p as usize) < index);
            nodes.args.push(p);
            nodes.partials.push(d);
        }
        let end = nodes.args.len() as u32;
        nodes.offsets.push(end);
        Var { tape: self, index: index as u32, value }
    }

    pub(crate) fn record_fault(&self, op: OpCode, arg: f64) {
        let mut nodes = self.nodes.borrow_mut();
        if nodes.fault.is_none() {
            let node = nodes.ops.len();
            nodes.fault = Some(AdError::Domain { op, node, arg });
        }
    }

    fn same(&self, other: &Tape) -> bool {
        self.id == other.id
    }

    fn sweep(&self, output: u32) -> Gradients {
        let nodes = self.nodes.borrow();
        let mut adjoints = vec![0.0; nodes.ops.len()];
        adjoints[output as usize] = 1.0;
        for i in (0..=output as usize).rev() {
            let adj = adjoints[i];
            if adj == 0.0 {
                continue;
            }
            let (lo, hi) = (nodes.offsets[i] as usize, nodes.offsets[i + 1] as usize);
            for k in lo..hi {
                adjoints[nodes.args[k] as usize] += adj * nodes.partials[k];
            }
        }
        Gradients { tape: self.id, adjoints }
    }
}

/// Differentiable scalar: a node on a [`Tape`].
#[derive(Clone, Copy)]
pub struct Var<'t> {
    tape: &'t Tape,
    index: u32,
    value: f64,
}

impl fmt::Debug for Var<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Var(#{} = {})", self.index, self.value)
    }
}

/// Adjoints from one reverse sweep, indexed by node.
#[derive(Debug, Clone)]
pub struct Gradients {
    tape: u64,
    adjoints: Vec<f64>,
}

impl Gradients {
    /// Adjoint of `v`. Nodes the output does not depend on report 0.
    pub fn wrt(&self, v: Var<'_>) -> f64 {
        assert_eq!(self.tape, v.tape.id, "gradient queried with a variable from another tape");
        self.adjoints[v.index as usize]
    }

    pub fn get(&self, index: usize) -> f64 {
        self.adjoints.get(index).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.adjoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adjoints.is_empty()
    }
}

impl<'t> Var<'t> {
    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn index(&self) -> usize {
        self.index as usize
    }

    pub fn tape(&self) -> &'t Tape {
        self.tape
    }

    /// Reverse sweep seeded at this node. Fails if any primitive on the tape
    /// recorded a domain violation.
    pub fn backward(&self) -> Result<Gradients, AdError> {
        self.tape.status()?;
        Ok(self.tape.sweep(self.index))
    }

    fn unary(self, op: OpCode, value: f64, partial: f64) -> Self {
        self.tape.push(op, value, &[(self.index, partial)])
    }

    fn binary(self, other: Self, op: OpCode, value: f64, da: f64, db: f64) -> Self {
        if !self.tape.same(other.tape) {
            panic!("{}", AdError::CrossTape);
        }
        self.tape.push(op, value, &[(self.index, da), (other.index, db)])
    }

    pub fn constant_like(self, c: f64) -> Self {
        self.tape.constant(c)
    }

    pub fn sqrt(self) -> Self {
        let x = self.value;
        if x < 0.0 {
            self.tape.record_fault(OpCode::Sqrt, x);
            return self.unary(OpCode::Sqrt, f64::NAN, 0.0);
        }
        let y = x.sqrt();
        let d = if y > 0.0 { 0.5 / y } else { f64::INFINITY };
        self.unary(OpCode::Sqrt, y, d)
    }

    pub fn exp(self) -> Self {
        let y = self.value.exp();
        self.unary(OpCode::Exp, y, y)
    }

    pub fn ln(self) -> Self {
        let x = self.value;
        if x <= 0.0 {
            self.tape.record_fault(OpCode::Ln, x);
            return self.unary(OpCode::Ln, f64::NAN, 0.0);
        }
        self.unary(OpCode::Ln, x.ln(), 1.0 / x)
    }

    /// `sqrt(x^2 + eps)`.
    pub fn abs_smooth(self, eps: f64) -> Self {
        let x = self.value;
        let y = (x * x + eps).sqrt();
        self.unary(OpCode::AbsSmooth, y, x / y)
    }

    pub fn relu(self) -> Self {
        let x = self.value;
        if x > 0.0 {
            self.unary(OpCode::Relu, x, 1.0)
        } else {
            self.unary(OpCode::Relu, 0.0, 0.0)
        }
    }

    pub fn sigmoid(self) -> Self {
        let y = super::scalar::sigmoid(self.value);
        self.unary(OpCode::Sigmoid, y, y * (1.0 - y))
    }

    /// Four-quadrant arctangent of `self / x`.
    pub fn atan2(self, x: Self) -> Self {
        let (yv, xv) = (self.value, x.value);
        let r2 = xv * xv + yv * yv;
        let (dy, dx) = if r2 > 0.0 { (xv / r2, -yv / r2) } else { (0.0, 0.0) };
        self.binary(x, OpCode::Atan2, yv.atan2(xv), dy, dx)
    }

    pub fn sin(self) -> Self {
        self.unary(OpCode::Sin, self.value.sin(), self.value.cos())
    }

    pub fn cos(self) -> Self {
        self.unary(OpCode::Cos, self.value.cos(), -self.value.sin())
    }

    pub fn square(self) -> Self {
        self.unary(OpCode::Square, self.value * self.value, 2.0 * self.value)
    }

    /// Hard minimum; ties route the gradient to `self`.
    pub fn min2(self, other: Self) -> Self {
        if other.value < self.value {
            self.binary(other, OpCode::Min2, other.value, 0.0, 1.0)
        } else {
            self.binary(other, OpCode::Min2, self.value, 1.0, 0.0)
        }
    }

    /// Hard maximum; ties route the gradient to `self`.
    pub fn max2(self, other: Self) -> Self {
        if other.value > self.value {
            self.binary(other, OpCode::Max2, other.value, 0.0, 1.0)
        } else {
            self.binary(other, OpCode::Max2, self.value, 1.0, 0.0)
        }
    }

    /// Single n-ary LogSumExp node. `xs` must be non-empty and share a tape.
    pub(crate) fn lse(xs: &[Self], tau: f64, maximum: bool) -> Self {
        let tape = xs[0].tape;
        let op = if maximum { OpCode::LseMax } else { OpCode::LseMin };
        if xs.iter().any(|v| !tape.same(v.tape)) {
            panic!("{}", AdError::CrossTape);
        }
        if xs.len() == 1 {
            return xs[0];
        }
        let sign = if maximum { 1.0 } else { -1.0 };
        let values: Vec<f64> = xs.iter().map(|v| v.value).collect();
        let (value, weights) = super::scalar::lse_with_weights(&values, tau, sign);
        let parents: Vec<(u32, f64)> = xs.iter().zip(weights).map(|(v, w)| (v.index, w)).collect();
        tape.push(op, value, &parents)
    }
}

impl<'t> Add for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: Self) -> Self {
        self.binary(rhs, OpCode::Add, self.value + rhs.value, 1.0, 1.0)
    }
}

impl<'t> Sub for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: Self) -> Self {
        self.binary(rhs, OpCode::Sub, self.value - rhs.value, 1.0, -1.0)
    }
}

impl<'t> Mul for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: Self) -> Self {
        self.binary(rhs, OpCode::Mul, self.value * rhs.value, rhs.value, self.value)
    }
}

impl<'t> Div for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: Self) -> Self {
        let b = rhs.value;
        if b == 0.0 {
            self.tape.record_fault(OpCode::Div, b);
            return self.binary(rhs, OpCode::Div, f64::NAN, 0.0, 0.0);
        }
        let q = self.value / b;
        self.binary(rhs, OpCode::Div, q, 1.0 / b, -q / b)
    }
}

impl<'t> Neg for Var<'t> {
    type Output = Var<'t>;
    fn neg(self) -> Self {
        self.unary(OpCode::Neg, -self.value, -1.0)
    }
}

impl<'t> Add<f64> for Var<'t> {
    type Output = Var<'t>;
    fn add(self, rhs: f64) -> Self {
        self.unary(OpCode::AddConst, self.value + rhs, 1.0)
    }
}

impl<'t> Sub<f64> for Var<'t> {
    type Output = Var<'t>;
    fn sub(self, rhs: f64) -> Self {
        self.unary(OpCode::AddConst, self.value - rhs, 1.0)
    }
}

impl<'t> Mul<f64> for Var<'t> {
    type Output = Var<'t>;
    fn mul(self, rhs: f64) -> Self {
        self.unary(OpCode::MulConst, self.value * rhs, rhs)
    }
}

impl<'t> Div<f64> for Var<'t> {
    type Output = Var<'t>;
    fn div(self, rhs: f64) -> Self {
        if rhs == 0.0 {
            self.tape.record_fault(OpCode::DivConst, rhs);
            return self.unary(OpCode::DivConst, f64::NAN, 0.0);
        }
        self.unary(OpCode::DivConst, self.value / rhs, 1.0 / rhs)
    }
}

impl<'t> Sub<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn sub(self, rhs: Var<'t>) -> Var<'t> {
        rhs.unary(OpCode::AddConst, self - rhs.value, -1.0)
    }
}

impl<'t> Div<Var<'t>> for f64 {
    type Output = Var<'t>;
    fn div(self, rhs: Var<'t>) -> Var<'t> {
        let b = rhs.value;
        if b == 0.0 {
            rhs.tape.record_fault(OpCode::ConstDiv, b);
            return rhs.unary(OpCode::ConstDiv, f64::NAN, 0.0);
        }
        let q = self / b;
        rhs.unary(OpCode::ConstDiv, q, -q / b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule() {
        let tape = Tape::new();
        let x = tape.var(2.0);
        let y = tape.var(3.0);
        let f = x * y;
        let g = f.backward().unwrap();
        assert_eq!(g.wrt(f), 1.0);
        assert_eq!(g.wrt(x), 3.0);
        assert_eq!(g.wrt(y), 2.0);
    }

    #[test]
    fn parents_precede_children() {
        let tape = Tape::new();
        let x = tape.var(0.3);
        let y = (x.sin() * x + 1.0).exp() / (x.square() + 2.0);
        let nodes = tape.nodes.borrow();
        for i in 0..nodes.ops.len() {
            for k in nodes.offsets[i]..nodes.offsets[i + 1] {
                assert!((nodes.args[k as usize] as usize) < i);
            }
        }
        assert_eq!(y.index(), nodes.ops.len() - 1);
    }

    #[test]
    fn unreachable_nodes_have_zero_adjoint() {
        let tape = Tape::new();
        let x = tape.var(1.5);
        let z = tape.var(4.0);
        let _later = z * 2.0;
        let f = x.exp();
        let g = f.backward().unwrap();
        assert_eq!(g.wrt(z), 0.0);
        assert_eq!(g.get(10_000), 0.0);
    }

    #[test]
    fn relu_subgradient_at_zero() {
        let tape = Tape::new();
        let x = tape.var(0.0);
        let r = x.relu();
        assert_eq!(r.value(), 0.0);
        assert_eq!(r.backward().unwrap().wrt(x), 0.0);

        let x = tape.var(-3.0);
        let r = x.relu();
        assert_eq!(r.value(), 0.0);
        assert_eq!(r.backward().unwrap().wrt(x), 0.0);
    }

    #[test]
    fn elementary_values() {
        let tape = Tape::new();
        assert_eq!(tape.var(0.0).sigmoid().value(), 0.5);
        let one = tape.var(1.0);
        let a = one.atan2(tape.var(1.0));
        assert!((a.value() - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn domain_violations_name_op_and_node() {
        let tape = Tape::new();
        let x = tape.var(-1.0);
        let y = x.ln();
        assert!(y.value().is_nan());
        match y.backward() {
            Err(AdError::Domain { op: OpCode::Ln, node, arg }) => {
                assert_eq!(node, 1);
                assert_eq!(arg, -1.0);
            }
            other => panic!("unexpected {other:?}"),
        }

        let tape = Tape::new();
        let x = tape.var(1.0);
        let z = tape.var(0.0);
        let q = x / z;
        assert!(matches!(q.backward(), Err(AdError::Domain { op: OpCode::Div, .. })));

        let tape = Tape::new();
        let s = tape.var(-0.5).sqrt();
        assert!(matches!(s.backward(), Err(AdError::Domain { op: OpCode::Sqrt, .. })));
    }

    #[test]
    #[should_panic(expected = "different tapes")]
    fn cross_tape_use_panics() {
        let a = Tape::new();
        let b = Tape::new();
        let _ = a.var(1.0) + b.var(2.0);
    }

    #[test]
    fn hard_min_max_route_to_winner() {
        let tape = Tape::new();
        let a = tape.var(1.0);
        let b = tape.var(2.0);
        let m = a.min2(b);
        let g = m.backward().unwrap();
        assert_eq!((g.wrt(a), g.wrt(b)), (1.0, 0.0));
        let m = a.max2(b);
        let g = m.backward().unwrap();
        assert_eq!((g.wrt(a), g.wrt(b)), (0.0, 1.0));
    }
}
