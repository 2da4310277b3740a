//! Complex-valued coefficient expressions in the variable `x`.
//!
//! Grammar, lowest precedence first:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('-' | '+') unary | power
//! power   := primary ('^' unary)?          right associative
//! primary := number ['i'] | 'x' | 'i' | 'pi' | 'e'
//!          | func '(' expr ')' | '(' expr ')'
//! ```

use std::fmt;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("evaluation error at x = {x}: {message}")]
pub struct EvalError {
    pub x: f64,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(Complex64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, ParseError> {
        let mut p = Parser { src, pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64) -> Result<Complex64, EvalError> {
        let err = |message: &str| EvalError {
            x,
            message: message.to_string(),
        };
        Ok(match self {
            Expr::Num(c) => *c,
            Expr::Var => Complex64::new(x, 0.0),
            // adding zero clears the sign of a negated zero imaginary part
            Expr::Neg(e) => -e.eval(x)? + Complex64::new(0.0, 0.0),
            Expr::Bin(op, l, r) => {
                let a = l.eval(x)?;
                let b = r.eval(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.norm_sqr() == 0.0 {
                            return Err(err("division by zero"));
                        }
                        a / b
                    }
                    BinOp::Pow => pow(a, b).ok_or_else(|| err("zero raised to a negative power"))?,
                }
            }
            Expr::Call(f, arg) => {
                let z = arg.eval(x)?;
                match f {
                    Func::Sin => z.sin(),
                    Func::Cos => z.cos(),
                    Func::Tan => z.tan(),
                    Func::Exp => z.exp(),
                    Func::Log => {
                        if z.norm_sqr() == 0.0 {
                            return Err(err("logarithm of zero"));
                        }
                        z.ln()
                    }
                    Func::Sqrt => z.sqrt(),
                    Func::Sinh => z.sinh(),
                    Func::Cosh => z.cosh(),
                    Func::Abs => Complex64::new(z.norm(), 0.0),
                }
            }
        })
    }

    /// True when the expression contains no imaginary literal.
    pub fn is_real(&self) -> bool {
        match self {
            Expr::Num(c) => c.im == 0.0,
            Expr::Var => true,
            Expr::Neg(e) => e.is_real(),
            // fractional powers and logs of negatives leave the real line; checked numerically by callers
            Expr::Bin(_, l, r) => l.is_real() && r.is_real(),
            Expr::Call(_, e) => e.is_real(),
        }
    }
}

fn pow(a: Complex64, b: Complex64) -> Option<Complex64> {
    if b.im == 0.0 && b.re.fract() == 0.0 && b.re.abs() <= 1024.0 {
        let n = b.re as i32;
        if a.norm_sqr() == 0.0 {
            return match n.cmp(&0) {
                std::cmp::Ordering::Less => None,
                std::cmp::Ordering::Equal => Some(Complex64::new(1.0, 0.0)),
                std::cmp::Ordering::Greater => Some(Complex64::new(0.0, 0.0)),
            };
        }
        if a.im == 0.0 {
            return Some(Complex64::new(a.re.powi(n), 0.0));
        }
        return Some(a.powi(n));
    }
    if a.norm_sqr() == 0.0 {
        return if b.re > 0.0 {
            Some(Complex64::new(0.0, 0.0))
        } else {
            None
        };
    }
    if a.im == 0.0 && a.re > 0.0 && b.im == 0.0 {
        return Some(Complex64::new(a.re.powf(b.re), 0.0));
    }
    Some(a.powc(b))
}

struct Num(Complex64);

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.0;
        match (c.re == 0.0 && c.re.is_sign_positive(), c.im == 0.0) {
            (_, true) => write!(f, "{:?}", c.re),
            (true, false) => write!(f, "({:?}*i)", c.im),
            (false, false) => write!(f, "({:?} + {:?}*i)", c.re, c.im),
        }
    }
}

/// Fully parenthesised rendering that parses back to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) if c.re < 0.0 || (c.re == 0.0 && c.re.is_sign_negative()) => {
                write!(f, "({})", Num(*c))
            }
            Expr::Num(c) => write!(f, "{}", Num(*c)),
            Expr::Var => write!(f, "x"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => {
                let sym = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({l} {sym} {r})")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> ParseError {
        ParseError {
            offset: self.pos,
            message: message.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat('^') {
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let start = self.pos;
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let name = self.ident();
                match name {
                    "x" => Ok(Expr::Var),
                    "i" => Ok(Expr::Num(Complex64::new(0.0, 1.0))),
                    "pi" => Ok(Expr::Num(Complex64::new(std::f64::consts::PI, 0.0))),
                    "e" => Ok(Expr::Num(Complex64::new(std::f64::consts::E, 0.0))),
                    _ => match Func::from_name(name) {
                        Some(func) => {
                            if !self.eat('(') {
                                return Err(self.error(&format!("expected '(' after `{name}`")));
                            }
                            let arg = self.expr()?;
                            if !self.eat(')') {
                                return Err(self.error("expected ')'"));
                            }
                            Ok(Expr::Call(func, Box::new(arg)))
                        }
                        None => Err(ParseError {
                            offset: start,
                            message: format!("unknown identifier `{name}`"),
                        }),
                    },
                }
            }
            Some(c) => Err(self.error(&format!("unexpected character `{c}`"))),
        }
    }

    fn ident(&mut self) -> &'a str {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_ascii_alphanumeric() || c == '_' {
                self.pos += 1;
            } else {
                break;
            }
        }
        &self.src[start..self.pos]
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end < bytes.len() && bytes[end] == b'.' {
            end += 1;
            while end < bytes.len() && bytes[end].is_ascii_digit() {
                end += 1;
            }
        }
        if end < bytes.len() && (bytes[end] == b'e' || bytes[end] == b'E') {
            let mut k = end + 1;
            if k < bytes.len() && (bytes[k] == b'+' || bytes[k] == b'-') {
                k += 1;
            }
            if k < bytes.len() && bytes[k].is_ascii_digit() {
                while k < bytes.len() && bytes[k].is_ascii_digit() {
                    k += 1;
                }
                end = k;
            }
        }
        let text = &self.src[start..end];
        let value: f64 = text.parse().map_err(|_| ParseError {
            offset: start,
            message: format!("malformed number `{text}`"),
        })?;
        self.pos = end;
        // `2i` is an imaginary literal, `2 * i` works as well
        let imaginary = bytes.get(end) == Some(&b'i')
            && !bytes
                .get(end + 1)
                .is_some_and(|b| b.is_ascii_alphanumeric() || *b == b'_');
        if imaginary {
            self.pos += 1;
            return Ok(Expr::Num(Complex64::new(0.0, value)));
        }
        Ok(Expr::Num(Complex64::new(value, 0.0)))
    }
}
