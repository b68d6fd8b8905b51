//! Scalar expressions in the two chart variables `u` and `v`.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          // right associative
//! atom    := number | 'u' | 'v' | 'pi' | func '(' sum ')' | '(' sum ')'
//! func    := sin | cos | tan | exp | log | sqrt | atan | abs
//! ```
//!
//! Numbers accept an optional fraction and exponent (`1.5e-3`).

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    U,
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
            BinOp::Pow => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Atan,
    Abs,
}

impl Func {
    pub const ALL: [Func; 8] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Atan,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }
}

/// Expression tree. Subtrees are reference counted so large generated
/// expressions (parallel surfaces, frame conversions) can share nodes.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Pi,
    Neg(Arc<Expr>),
    Bin(BinOp, Arc<Expr>, Arc<Expr>),
    Call(Func, Arc<Expr>),
}

impl Expr {
    pub fn num(x: f64) -> Expr {
        if x < 0.0 || (x == 0.0 && x.is_sign_negative()) {
            Expr::Neg(Arc::new(Expr::Num(-x)))
        } else {
            Expr::Num(x)
        }
    }

    pub fn u() -> Expr {
        Expr::Var(Var::U)
    }

    pub fn v() -> Expr {
        Expr::Var(Var::V)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Arc::new(arg))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Arc::new(a), Arc::new(b))
    }

    pub fn powi(self, n: i32) -> Expr {
        Expr::bin(BinOp::Pow, self, Expr::num(n as f64))
    }

    pub fn sqrt(self) -> Expr {
        Expr::call(Func::Sqrt, self)
    }

    pub fn sin(self) -> Expr {
        Expr::call(Func::Sin, self)
    }

    pub fn cos(self) -> Expr {
        Expr::call(Func::Cos, self)
    }

    /// True when the expression contains no variables.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Bin(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }

    /// Evaluates a variable-free expression.
    pub fn eval_constant(&self) -> Option<f64> {
        if !self.is_constant() {
            return None;
        }
        crate::tape::Tape::compile(std::slice::from_ref(self))
            .eval_values((0.0, 0.0))
            .ok()
            .map(|v| v[0])
    }

    /// Exact integer value of a constant exponent, if it has one.
    pub(crate) fn as_integer(&self) -> Option<i32> {
        let x = match self {
            Expr::Num(x) => *x,
            Expr::Neg(a) => match a.as_ref() {
                Expr::Num(x) => -*x,
                _ => return None,
            },
            _ => return None,
        };
        (x.fract() == 0.0 && x.abs() <= 64.0).then_some(x as i32)
    }

    /// Symbolic partial derivative. No simplification beyond dropping
    /// obvious zeros.
    pub fn derivative(&self, var: Var) -> Expr {
        match self {
            Expr::Num(_) | Expr::Pi => Expr::Num(0.0),
            Expr::Var(w) => Expr::Num(if *w == var { 1.0 } else { 0.0 }),
            Expr::Neg(a) => -a.derivative(var),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.as_ref().clone(), b.as_ref().clone());
                let da = a.derivative(var);
                let db = b.derivative(var);
                match op {
                    BinOp::Add => da + db,
                    BinOp::Sub => da - db,
                    BinOp::Mul => da * b + a * db,
                    BinOp::Div => (da * b.clone() - a * db) / b.powi(2),
                    BinOp::Pow => {
                        if let Some(n) = b.as_integer() {
                            Expr::num(n as f64) * a.powi(n - 1) * da
                        } else if b.is_constant() {
                            b.clone() * Expr::bin(BinOp::Pow, a, b - Expr::Num(1.0)) * da
                        } else {
                            let log_a = Expr::call(Func::Log, a.clone());
                            self.clone() * (db * log_a + b * da / a)
                        }
                    }
                }
            }
            Expr::Call(f, a) => {
                let arg = a.as_ref().clone();
                let da = arg.derivative(var);
                let outer = match f {
                    Func::Sin => arg.cos(),
                    Func::Cos => -arg.sin(),
                    Func::Tan => Expr::Num(1.0) + self.clone().powi(2),
                    Func::Exp => self.clone(),
                    Func::Log => Expr::Num(1.0) / arg,
                    Func::Sqrt => Expr::Num(0.5) / self.clone(),
                    Func::Atan => Expr::Num(1.0) / (Expr::Num(1.0) + arg.powi(2)),
                    Func::Abs => arg.clone() / self.clone(),
                };
                outer * da
            }
        }
    }

    /// Substitutes both chart variables.
    pub fn substitute(&self, u: &Expr, v: &Expr) -> Expr {
        match self {
            Expr::Var(Var::U) => u.clone(),
            Expr::Var(Var::V) => v.clone(),
            Expr::Num(_) | Expr::Pi => self.clone(),
            Expr::Neg(a) => -a.substitute(u, v),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.substitute(u, v), b.substitute(u, v)),
            Expr::Call(f, a) => Expr::call(*f, a.substitute(u, v)),
        }
    }

    fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(x) if *x == 0.0)
    }

    fn is_one(&self) -> bool {
        matches!(self, Expr::Num(x) if *x == 1.0)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, _, _) => op.precedence(),
            Expr::Neg(_) => 3,
            _ => 5,
        }
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        if self.is_zero() {
            rhs
        } else if rhs.is_zero() {
            self
        } else {
            Expr::bin(BinOp::Add, self, rhs)
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        if rhs.is_zero() {
            self
        } else if self.is_zero() {
            -rhs
        } else {
            Expr::bin(BinOp::Sub, self, rhs)
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        if self.is_zero() || rhs.is_zero() {
            Expr::Num(0.0)
        } else if self.is_one() {
            rhs
        } else if rhs.is_one() {
            self
        } else {
            Expr::bin(BinOp::Mul, self, rhs)
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        if self.is_zero() {
            Expr::Num(0.0)
        } else if rhs.is_one() {
            self
        } else {
            Expr::bin(BinOp::Div, self, rhs)
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        if self.is_zero() {
            Expr::Num(0.0)
        } else {
            Expr::Neg(Arc::new(self))
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Var(Var::U) => f.write_str("u"),
            Expr::Var(Var::V) => f.write_str("v"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(a) => {
                // unary minus binds looser than ^ and tighter than * /
                if a.precedence() < 3 {
                    write!(f, "-({a})")
                } else {
                    write!(f, "-{a}")
                }
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                let (left_parens, right_parens) = if *op == BinOp::Pow {
                    (a.precedence() <= p, b.precedence() < 3)
                } else {
                    (a.precedence() < p, b.precedence() <= p && b.precedence() != 3)
                };
                if left_parens {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_fmt(format_args!("{}", op.symbol()))?;
                if right_parens {
                    write!(f, "({b})")
                } else {
                    write!(f, "{b}")
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Token,
    tok_start: usize,
}

/// Parses an expression in `u`, `v`.
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser {
        src: text,
        pos: 0,
        tok: Token::End,
        tok_start: 0,
    };
    p.advance()?;
    let e = p.sum()?;
    if p.tok != Token::End {
        return Err(p.syntax_error(&["operator", "end of input"]));
    }
    Ok(e)
}

impl<'a> Parser<'a> {
    fn syntax_error(&self, expected: &[&str]) -> Error {
        Error::Syntax {
            offset: self.tok_start,
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn advance(&mut self) -> Result<()> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Token::End;
            return Ok(());
        }
        let c = bytes[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                let save = self.pos;
                self.pos += 1;
                if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                    self.pos += 1;
                }
                if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                } else {
                    self.pos = save;
                }
            }
            let text = &self.src[start..self.pos];
            let x: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                expected: vec!["number".into()],
            })?;
            self.tok = Token::Num(x);
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                self.pos += 1;
            }
            self.tok = Token::Ident(self.src[start..self.pos].to_string());
        } else if b"+-*/^()".contains(&c) {
            self.pos += 1;
            self.tok = Token::Sym(c as char);
        } else {
            return Err(self.syntax_error(&["number", "identifier", "operator", "("]));
        }
        Ok(())
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.tok {
                Token::Sym('+') => BinOp::Add,
                Token::Sym('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.product()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.tok {
                Token::Sym('*') => BinOp::Mul,
                Token::Sym('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.advance()?;
            let rhs = self.unary()?;
            lhs = Expr::bin(op, lhs, rhs);
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.tok == Token::Sym('-') {
            self.advance()?;
            let inner = self.unary()?;
            return Ok(Expr::Neg(Arc::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.tok == Token::Sym('^') {
            self.advance()?;
            let exp = self.unary()?;
            return Ok(Expr::bin(BinOp::Pow, base, exp));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.tok.clone() {
            Token::Num(x) => {
                self.advance()?;
                Ok(Expr::Num(x))
            }
            Token::Ident(name) => {
                self.advance()?;
                match name.as_str() {
                    "u" => Ok(Expr::Var(Var::U)),
                    "v" => Ok(Expr::Var(Var::V)),
                    "pi" => Ok(Expr::Pi),
                    _ => {
                        let func = Func::from_name(&name).ok_or(Error::UnknownIdentifier(name))?;
                        if self.tok != Token::Sym('(') {
                            return Err(self.syntax_error(&["("]));
                        }
                        self.advance()?;
                        let arg = self.sum()?;
                        self.expect_close()?;
                        Ok(Expr::call(func, arg))
                    }
                }
            }
            Token::Sym('(') => {
                self.advance()?;
                let e = self.sum()?;
                self.expect_close()?;
                Ok(e)
            }
            _ => Err(self.syntax_error(&["number", "u", "v", "pi", "function", "("])),
        }
    }

    fn expect_close(&mut self) -> Result<()> {
        if self.tok != Token::Sym(')') {
            return Err(self.syntax_error(&[")"]));
        }
        self.advance()
    }
}
