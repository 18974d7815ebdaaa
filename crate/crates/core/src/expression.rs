//! One-variable analytic expressions.
//!
//! Grammar (conventional precedence, `^` right-associative and binding
//! tighter than unary minus):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident '(' expr ')' | ident | '(' expr ')'
//! ```
//!
//! Supported functions: `sin cos tan sqrt exp log`. Evaluation is generic
//! over [`Scalar`], so derivatives come from dual-number propagation.

use std::fmt;

use thiserror::Error;

use crate::dual::{Dual, Scalar};

/// Distance of `cos(x)` from zero below which `tan(x)` is treated as a pole.
const TAN_POLE_GUARD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("expression uses more than one variable: `{first}` and `{second}`")]
    MultipleVariables { first: String, second: String },
    #[error("domain error in `{node}` at {value}: {reason}")]
    Domain {
        node: String,
        value: f64,
        reason: &'static str,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Tan,
    Sqrt,
    Exp,
    Log,
}

impl Function {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Function::Sin,
            "cos" => Function::Cos,
            "tan" => Function::Tan,
            "sqrt" => Function::Sqrt,
            "exp" => Function::Exp,
            "log" => Function::Log,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Tan => "tan",
            Function::Sqrt => "sqrt",
            Function::Exp => "exp",
            Function::Log => "log",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Number(f64),
    Variable,
    Neg(Box<Node>),
    Binary(BinaryOp, Box<Node>, Box<Node>),
    Call(Function, Box<Node>),
}

impl Node {
    fn is_constant(&self) -> bool {
        match self {
            Node::Number(_) => true,
            Node::Variable => false,
            Node::Neg(a) | Node::Call(_, a) => a.is_constant(),
            Node::Binary(_, a, b) => a.is_constant() && b.is_constant(),
        }
    }
}

/// A parsed expression in (at most) one named variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    variable: Option<String>,
}

impl Expr {
    pub fn root(&self) -> &Node {
        &self.root
    }

    /// Name of the free variable, if the expression has one.
    pub fn variable(&self) -> Option<&str> {
        self.variable.as_deref()
    }

    pub fn evaluate(&self, value: f64) -> Result<f64, ExprError> {
        self.eval(value)
    }

    /// Exact first derivative by dual-number propagation.
    pub fn differentiate_at(&self, value: f64) -> Result<f64, ExprError> {
        Ok(self.eval(Dual::variable(value))?.eps)
    }

    /// Evaluate over any scalar type.
    pub fn eval<T: Scalar>(&self, x: T) -> Result<T, ExprError> {
        self.eval_node(&self.root, x)
    }

    /// Value and first derivative with respect to the variable, both in `T`.
    pub fn eval_with_derivative<T: Scalar>(&self, x: T) -> Result<(T, T), ExprError> {
        let d = self.eval(Dual::variable(x))?;
        Ok((d.re, d.eps))
    }

    fn display_node(&self, node: &Node) -> String {
        let mut s = String::new();
        write_node(&mut s, node, self.variable.as_deref().unwrap_or("x"));
        s
    }

    fn domain<T>(&self, node: &Node, value: f64, reason: &'static str) -> Result<T, ExprError> {
        Err(ExprError::Domain {
            node: self.display_node(node),
            value,
            reason,
        })
    }

    fn eval_node<T: Scalar>(&self, node: &Node, x: T) -> Result<T, ExprError> {
        let out = match node {
            Node::Number(c) => T::constant(*c),
            Node::Variable => x,
            Node::Neg(a) => -self.eval_node(a, x)?,
            Node::Binary(op, a, b) => {
                let lhs = self.eval_node(a, x)?;
                match op {
                    BinaryOp::Add => lhs + self.eval_node(b, x)?,
                    BinaryOp::Sub => lhs - self.eval_node(b, x)?,
                    BinaryOp::Mul => lhs * self.eval_node(b, x)?,
                    BinaryOp::Div => {
                        let rhs = self.eval_node(b, x)?;
                        if rhs.re() == 0.0 {
                            return self.domain(node, x.re(), "division by zero");
                        }
                        lhs / rhs
                    }
                    BinaryOp::Pow => self.eval_pow(node, lhs, b, x)?,
                }
            }
            Node::Call(f, a) => {
                let arg = self.eval_node(a, x)?;
                match f {
                    Function::Sin => arg.sin(),
                    Function::Cos => arg.cos(),
                    Function::Tan => {
                        if arg.re().cos().abs() < TAN_POLE_GUARD {
                            return self.domain(node, x.re(), "pole of tan");
                        }
                        arg.tan()
                    }
                    Function::Sqrt => {
                        if arg.re() < 0.0 {
                            return self.domain(node, x.re(), "square root of a negative number");
                        }
                        arg.sqrt()
                    }
                    Function::Exp => arg.exp(),
                    Function::Log => {
                        if arg.re() <= 0.0 {
                            return self.domain(node, x.re(), "logarithm of a non-positive number");
                        }
                        arg.ln()
                    }
                }
            }
        };
        if !out.all_finite() {
            return self.domain(node, x.re(), "non-finite result");
        }
        Ok(out)
    }

    fn eval_pow<T: Scalar>(&self, node: &Node, base: T, exponent: &Node, x: T) -> Result<T, ExprError> {
        if exponent.is_constant() {
            let c = self.eval_node::<f64>(exponent, x.re())?;
            if c.fract() == 0.0 && c.abs() <= i32::MAX as f64 {
                if c < 0.0 && base.re() == 0.0 {
                    return self.domain(node, x.re(), "zero raised to a negative power");
                }
                return Ok(base.powi(c as i32));
            }
            if base.re() < 0.0 {
                return self.domain(node, x.re(), "negative base with fractional exponent");
            }
            return Ok(base.powf(c));
        }
        if base.re() <= 0.0 {
            return self.domain(node, x.re(), "non-positive base with variable exponent");
        }
        let e = self.eval_node(exponent, x)?;
        Ok((e * base.ln()).exp())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_node(&self.root))
    }
}

fn write_node(out: &mut String, node: &Node, var: &str) {
    match node {
        Node::Number(c) => {
            if *c < 0.0 {
                out.push_str(&format!("(-{:?})", -c));
            } else {
                out.push_str(&format!("{c:?}"));
            }
        }
        Node::Variable => out.push_str(var),
        Node::Neg(a) => {
            out.push_str("(-");
            write_node(out, a, var);
            out.push(')');
        }
        Node::Binary(op, a, b) => {
            out.push('(');
            write_node(out, a, var);
            out.push(op.symbol());
            write_node(out, b, var);
            out.push(')');
        }
        Node::Call(func, a) => {
            out.push_str(func.name());
            out.push('(');
            write_node(out, a, var);
            out.push(')');
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse(s)
    }
}

pub fn parse(text: &str) -> Result<Expr, ExprError> {
    let mut parser = Parser {
        src: text.as_bytes(),
        pos: 0,
        variable: None,
    };
    let root = parser.expr()?;
    parser.skip_ws();
    if parser.pos < parser.src.len() {
        return Err(parser.syntax("unexpected trailing input"));
    }
    Ok(Expr {
        root,
        variable: parser.variable,
    })
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    variable: Option<String>,
}

impl Parser<'_> {
    fn syntax(&self, message: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if self.eat(b'-') {
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let exponent = self.unary()?;
            return Ok(Node::Binary(BinaryOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            None => Err(self.syntax("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.syntax("expected `)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            Some(_) => Err(self.syntax("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
                digits(self);
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        text.parse::<f64>().map(Node::Number).map_err(|_| ExprError::Syntax {
            offset: start,
            message: format!("malformed number `{text}`"),
        })
    }

    fn identifier(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii slice");
        if self.peek() == Some(b'(') {
            let func = Function::from_name(name).ok_or_else(|| ExprError::UnknownFunction {
                name: name.to_string(),
                offset: start,
            })?;
            self.pos += 1;
            let arg = self.expr()?;
            if !self.eat(b')') {
                return Err(self.syntax("expected `)`"));
            }
            return Ok(Node::Call(func, Box::new(arg)));
        }
        match &self.variable {
            Some(existing) if existing != name => Err(ExprError::MultipleVariables {
                first: existing.clone(),
                second: name.to_string(),
            }),
            Some(_) => Ok(Node::Variable),
            None => {
                self.variable = Some(name.to_string());
                Ok(Node::Variable)
            }
        }
    }
}
