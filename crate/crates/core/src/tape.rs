//! Flat evaluation tape for one or more expressions.
//!
//! Expressions are compiled into SSA form with common subexpressions merged,
//! so generated expressions with heavy sharing (frames, parallel surfaces)
//! evaluate in time proportional to their distinct nodes.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{BinOp, Expr, Func, Var};
use crate::jet::Jet2;
use crate::Point;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Node {
    Const(f64),
    U,
    V,
    Neg(usize),
    Bin(BinOp, usize, usize),
    PowI(usize, i32),
    Call(Func, usize),
}

#[derive(PartialEq, Eq, Hash)]
enum Key {
    Const(u64),
    U,
    V,
    Neg(usize),
    Bin(u8, usize, usize),
    PowI(usize, i32),
    Call(u8, usize),
}

impl Node {
    fn key(&self) -> Key {
        match *self {
            Node::Const(x) => Key::Const(x.to_bits()),
            Node::U => Key::U,
            Node::V => Key::V,
            Node::Neg(a) => Key::Neg(a),
            Node::Bin(op, a, b) => Key::Bin(op as u8, a, b),
            Node::PowI(a, n) => Key::PowI(a, n),
            Node::Call(f, a) => Key::Call(f as u8, a),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Tape {
    nodes: Vec<Node>,
    outputs: Vec<usize>,
}

struct Builder {
    nodes: Vec<Node>,
    interned: HashMap<Key, usize>,
    by_ptr: HashMap<*const Expr, usize>,
}

impl Builder {
    fn push(&mut self, node: Node) -> usize {
        *self.interned.entry(node.key()).or_insert_with(|| {
            self.nodes.push(node);
            self.nodes.len() - 1
        })
    }

    fn shared(&mut self, e: &Arc<Expr>) -> usize {
        let ptr = Arc::as_ptr(e);
        if let Some(&i) = self.by_ptr.get(&ptr) {
            return i;
        }
        let i = self.lower(e);
        self.by_ptr.insert(ptr, i);
        i
    }

    fn lower(&mut self, e: &Expr) -> usize {
        match e {
            Expr::Num(x) => self.push(Node::Const(*x)),
            Expr::Pi => self.push(Node::Const(std::f64::consts::PI)),
            Expr::Var(Var::U) => self.push(Node::U),
            Expr::Var(Var::V) => self.push(Node::V),
            Expr::Neg(a) => {
                let a = self.shared(a);
                if let Node::Const(x) = self.nodes[a] {
                    return self.push(Node::Const(-x));
                }
                self.push(Node::Neg(a))
            }
            Expr::Bin(BinOp::Pow, a, b) => {
                let ia = self.shared(a);
                if let Some(n) = b.as_integer() {
                    return self.push(Node::PowI(ia, n));
                }
                let ib = self.shared(b);
                self.push(Node::Bin(BinOp::Pow, ia, ib))
            }
            Expr::Bin(op, a, b) => {
                let a = self.shared(a);
                let b = self.shared(b);
                self.push(Node::Bin(*op, a, b))
            }
            Expr::Call(f, a) => {
                let a = self.shared(a);
                self.push(Node::Call(*f, a))
            }
        }
    }
}

impl Tape {
    pub fn compile(exprs: &[Expr]) -> Tape {
        let mut b = Builder {
            nodes: Vec::new(),
            interned: HashMap::new(),
            by_ptr: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| b.lower(e)).collect();
        Tape {
            nodes: b.nodes,
            outputs,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn outputs(&self) -> usize {
        self.outputs.len()
    }

    fn decompile(&self, i: usize) -> Expr {
        match self.nodes[i] {
            Node::Const(x) => Expr::num(x),
            Node::U => Expr::u(),
            Node::V => Expr::v(),
            Node::Neg(a) => Expr::Neg(Arc::new(self.decompile(a))),
            Node::Bin(op, a, b) => Expr::bin(op, self.decompile(a), self.decompile(b)),
            Node::PowI(a, n) => Expr::bin(BinOp::Pow, self.decompile(a), Expr::num(n as f64)),
            Node::Call(f, a) => Expr::call(f, self.decompile(a)),
        }
    }

    fn domain_error(&self, i: usize, p: Point) -> Error {
        Error::Domain {
            expr: self.decompile(i).to_string(),
            point: p,
        }
    }

    /// Plain values of all outputs.
    pub fn eval_values(&self, p: Point) -> Result<Vec<f64>> {
        let mut s: Vec<f64> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let x = match *node {
                Node::Const(x) => x,
                Node::U => p.0,
                Node::V => p.1,
                Node::Neg(a) => -s[a],
                Node::Bin(op, a, b) => {
                    let (x, y): (f64, f64) = (s[a], s[b]);
                    match op {
                        BinOp::Add => x + y,
                        BinOp::Sub => x - y,
                        BinOp::Mul => x * y,
                        BinOp::Div => {
                            if y == 0.0 {
                                return Err(self.domain_error(i, p));
                            }
                            x / y
                        }
                        BinOp::Pow => {
                            if x <= 0.0 {
                                return Err(self.domain_error(i, p));
                            }
                            x.powf(y)
                        }
                    }
                }
                Node::PowI(a, n) => {
                    let x: f64 = s[a];
                    if n < 0 && x == 0.0 {
                        return Err(self.domain_error(i, p));
                    }
                    powi_exact(x, n)
                }
                Node::Call(f, a) => {
                    let x: f64 = s[a];
                    let ok = match f {
                        Func::Log => x > 0.0,
                        Func::Sqrt => x >= 0.0,
                        Func::Tan => x.cos() != 0.0,
                        _ => true,
                    };
                    if !ok {
                        return Err(self.domain_error(i, p));
                    }
                    match f {
                        Func::Sin => x.sin(),
                        Func::Cos => x.cos(),
                        Func::Tan => x.tan(),
                        Func::Exp => x.exp(),
                        Func::Log => x.ln(),
                        Func::Sqrt => x.sqrt(),
                        Func::Atan => x.atan(),
                        Func::Abs => x.abs(),
                    }
                }
            };
            s.push(x);
        }
        Ok(self.outputs.iter().map(|&o| s[o]).collect())
    }

    /// Jets of all outputs at `p`.
    pub fn eval_jets(&self, p: Point, order: usize) -> Result<Vec<Jet2>> {
        let mut s: Vec<Jet2> = Vec::with_capacity(self.nodes.len());
        for (i, node) in self.nodes.iter().enumerate() {
            let j = match *node {
                Node::Const(x) => Some(Jet2::constant(x, order)),
                Node::U => Some(Jet2::var_u(p.0, order)),
                Node::V => Some(Jet2::var_v(p.1, order)),
                Node::Neg(a) => Some(-s[a]),
                Node::Bin(op, a, b) => match op {
                    BinOp::Add => Some(s[a] + s[b]),
                    BinOp::Sub => Some(s[a] - s[b]),
                    BinOp::Mul => Some(s[a] * s[b]),
                    BinOp::Div => s[b].recip().map(|r| s[a] * r),
                    BinOp::Pow => s[a].powf(&s[b]),
                },
                Node::PowI(a, n) => s[a].powi(n),
                Node::Call(f, a) => {
                    let x = &s[a];
                    match f {
                        Func::Sin => Some(x.sin()),
                        Func::Cos => Some(x.cos()),
                        Func::Tan => x.tan(),
                        Func::Exp => Some(x.exp()),
                        Func::Log => x.ln(),
                        Func::Sqrt => x.sqrt(),
                        Func::Atan => Some(x.atan()),
                        Func::Abs => x.abs(),
                    }
                }
            };
            match j {
                Some(j) => s.push(j),
                None => return Err(self.domain_error(i, p)),
            }
        }
        Ok(self.outputs.iter().map(|&o| s[o]).collect())
    }
}

fn powi_exact(x: f64, n: i32) -> f64 {
    // repeated multiplication, matching the jet path bit for bit
    let mut r = 1.0;
    let mut b = x;
    let mut e = n.unsigned_abs();
    while e > 0 {
        if e & 1 == 1 {
            r *= b;
        }
        e >>= 1;
        if e > 0 {
            b *= b;
        }
    }
    if n < 0 {
        1.0 / r
    } else {
        r
    }
}

/// Jet of a single expression at `p`.
pub fn eval_jet(e: &Expr, p: Point, order: usize) -> Result<Jet2> {
    Ok(Tape::compile(std::slice::from_ref(e)).eval_jets(p, order)?[0])
}
