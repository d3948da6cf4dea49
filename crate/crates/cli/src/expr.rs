//! Arithmetic expressions over x1, y1, x2, y2, t: + - * / ^, unary minus,
//! sin, cos, exp and parentheses.

use std::sync::Arc;

use jleg::acs::ScalarField5;
use jleg::Point5;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("expression '{input}': {message} at offset {pos}")]
pub struct ParseError {
    pub input: String,
    pub pos: usize,
    pub message: String,
}

const VARS: [&str; 5] = ["x1", "y1", "x2", "y2", "t"];

impl Expr {
    pub fn eval(&self, p: &[f64; 5]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(k) => p[*k],
            Expr::Neg(e) => -e.eval(p),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(p), b.eval(p));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, e) => {
                let v = e.eval(p);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
        }
    }

    pub fn into_field(self) -> ScalarField5 {
        let e = Arc::new(self);
        ScalarField5::from_fn(move |p: &Point5| e.eval(&[p.x1, p.y1, p.x2, p.y2, p.t]))
    }
}

pub fn parse(input: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: input, bytes: input.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos < p.bytes.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ParseError {
        ParseError { input: self.src.to_string(), pos: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => Op::Add,
                Some(b'-') => Op::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => Op::Mul,
                Some(b'/') => Op::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    // right-associative; binds tighter than unary minus on its left: -x^2 = -(x^2)
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = &self.src[start..self.pos];
                if let Some(k) = VARS.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(k));
                }
                let func = match name {
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => {
                        self.pos = start;
                        return Err(self.error(&format!("unknown identifier '{name}'")));
                    }
                };
                if !self.eat(b'(') {
                    return Err(self.error("expected '(' after function name"));
                }
                let arg = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.error("expected ')'"));
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let b = self.bytes;
        while self.pos < b.len() && (b[self.pos].is_ascii_digit() || b[self.pos] == b'.') {
            self.pos += 1;
        }
        if self.pos < b.len() && (b[self.pos] == b'e' || b[self.pos] == b'E') {
            let save = self.pos;
            self.pos += 1;
            if self.pos < b.len() && (b[self.pos] == b'+' || b[self.pos] == b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < b.len() && b[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = save;
            }
        }
        self.src[start..self.pos].parse::<f64>().map(Expr::Num).map_err(|_| {
            self.pos = start;
            self.error("malformed number")
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(s: &str, p: [f64; 5]) -> f64 {
        parse(s).unwrap().eval(&p)
    }

    #[test]
    fn precedence_and_associativity() {
        let p = [2.0, 3.0, 0.5, -1.0, 0.25];
        assert_eq!(ev("1 + 2 * 3", p), 7.0);
        assert_eq!(ev("(1 + 2) * 3", p), 9.0);
        assert_eq!(ev("2 ^ 3 ^ 2", p), 512.0);
        assert_eq!(ev("-x1 ^ 2", p), -4.0);
        assert_eq!(ev("x1 - y1 - t", p), 2.0 - 3.0 - 0.25);
        assert_eq!(ev("8 / 4 / 2", p), 1.0);
        assert_eq!(ev("2 * -y2", p), 2.0);
        assert_eq!(ev("1.5e-1 * x2", p), 0.075);
    }

    #[test]
    fn functions() {
        let p = [0.3, 0.0, 0.0, 0.0, 0.0];
        assert!((ev("sin(x1)^2 + cos(x1)^2", p) - 1.0).abs() < 1e-15);
        assert_eq!(ev("exp(0)", p), 1.0);
    }

    #[test]
    fn errors() {
        for bad in ["", "1 +", "x3", "sin x1", "(1 + 2", "1 2", "tan(1)", "1..2"] {
            assert!(parse(bad).is_err(), "{bad}");
        }
        assert_eq!(parse("x1 + q").unwrap_err().pos, 5);
    }
}
