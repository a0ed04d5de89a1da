//! A minimal arithmetic grammar for symbols, entry generators and test functions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := atom ('^' unary)?            (right associative)
//! atom    := number ['i'] | 'i' | 'pi' | 'e' | variable
//!          | func '(' expr ')' | '(' expr ')'
//! func    := exp | sqrt | ln | sin | cos | abs | re | im | conj
//! ```
//!
//! Numbers follow the usual decimal / exponent syntax; a number immediately
//! followed by `i` is imaginary (`2i`, `0.5i`). Evaluation is in complex
//! arithmetic; the allowed variable names are fixed when parsing.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Imag(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text
                .parse()
                .map_err(|_| Error::parse(src, format!("bad number `{text}`")))?;
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !(i + 1 < chars.len() && chars[i + 1].is_alphanumeric());
            if imaginary {
                i += 1;
                out.push(Token::Imag(value));
            } else {
                out.push(Token::Num(value));
            }
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^".contains(c) {
            out.push(Token::Op(c));
            i += 1;
        } else if c == '(' {
            out.push(Token::LParen);
            i += 1;
        } else if c == ')' {
            out.push(Token::RParen);
            i += 1;
        } else {
            return Err(Error::parse(src, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Exp,
    Sqrt,
    Ln,
    Sin,
    Cos,
    Abs,
    Re,
    Im,
    Conj,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            "ln" | "log" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            "re" => Func::Re,
            "im" => Func::Im,
            "conj" => Func::Conj,
            _ => return None,
        })
    }

    fn apply(self, z: Complex64) -> Complex64 {
        match self {
            Func::Exp => z.exp(),
            Func::Sqrt => z.sqrt(),
            Func::Ln => z.ln(),
            Func::Sin => z.sin(),
            Func::Cos => z.cos(),
            Func::Abs => Complex64::new(z.norm(), 0.0),
            Func::Re => Complex64::new(z.re, 0.0),
            Func::Im => Complex64::new(z.im, 0.0),
            Func::Conj => z.conj(),
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Const(Complex64),
    Var(usize),
    Neg(Box<Node>),
    Bin(char, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

impl Node {
    fn eval(&self, vars: &[Complex64]) -> Complex64 {
        match self {
            Node::Const(c) => *c,
            Node::Var(k) => vars[*k],
            Node::Neg(a) => -a.eval(vars),
            Node::Bin(op, a, b) => {
                let (x, y) = (a.eval(vars), b.eval(vars));
                match op {
                    '+' => x + y,
                    '-' => x - y,
                    '*' => x * y,
                    '/' => x / y,
                    _ => pow(x, y),
                }
            }
            Node::Call(f, a) => f.apply(a.eval(vars)),
        }
    }
}

fn pow(base: Complex64, exponent: Complex64) -> Complex64 {
    if exponent.im == 0.0 {
        let p = exponent.re;
        if base.im == 0.0 && (base.re >= 0.0 || p.fract() == 0.0) {
            return Complex64::new(base.re.powf(p), 0.0);
        }
        if p.fract() == 0.0 && p.abs() <= 64.0 {
            return base.powi(p as i32);
        }
        return base.powf(p);
    }
    base.powc(exponent)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<Token>,
    pos: usize,
    vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn err(&self, msg: &str) -> Error {
        Error::parse(self.src, msg)
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Node::Bin('^', Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Node::Const(Complex64::new(v, 0.0))),
            Some(Token::Imag(v)) => Ok(Node::Const(Complex64::new(0.0, v))),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(inner),
                    _ => Err(self.err("missing `)`")),
                }
            }
            Some(Token::Ident(name)) => {
                if let Some(k) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Node::Var(k));
                }
                match name.as_str() {
                    "i" => return Ok(Node::Const(Complex64::new(0.0, 1.0))),
                    "pi" => return Ok(Node::Const(Complex64::new(std::f64::consts::PI, 0.0))),
                    "e" => return Ok(Node::Const(Complex64::new(std::f64::consts::E, 0.0))),
                    _ => {}
                }
                let func = Func::lookup(&name)
                    .ok_or_else(|| self.err(&format!("unknown identifier `{name}`")))?;
                if self.next() != Some(Token::LParen) {
                    return Err(self.err(&format!("expected `(` after `{name}`")));
                }
                let arg = self.expr()?;
                if self.next() != Some(Token::RParen) {
                    return Err(self.err("missing `)`"));
                }
                Ok(Node::Call(func, Box::new(arg)))
            }
            Some(tok) => Err(self.err(&format!("unexpected token {tok:?}"))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// A parsed expression over a fixed list of variables.
#[derive(Clone)]
pub struct Expr {
    source: String,
    vars: Vec<String>,
    root: Node,
}

impl Expr {
    pub fn parse(src: &str, vars: &[&str]) -> Result<Expr> {
        let tokens = tokenize(src)?;
        if tokens.is_empty() {
            return Err(Error::parse(src, "empty expression"));
        }
        let mut parser = Parser { src, tokens, pos: 0, vars };
        let root = parser.expr()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::parse(src, "trailing input"));
        }
        Ok(Expr { source: src.to_string(), vars: vars.iter().map(|s| s.to_string()).collect(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn variables(&self) -> &[String] {
        &self.vars
    }

    pub fn eval(&self, vars: &[Complex64]) -> Complex64 {
        self.root.eval(vars)
    }

    pub fn eval_real(&self, x: f64) -> Complex64 {
        self.root.eval(&[Complex64::new(x, 0.0)])
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

/// Parses a complex literal of the form `a`, `bi`, `a+bi`, `a-bi` (also `a+i`).
pub fn parse_complex(src: &str) -> Result<Complex64> {
    let expr = Expr::parse(src.trim(), &[])?;
    let z = expr.eval(&[]);
    if !z.re.is_finite() || !z.im.is_finite() {
        return Err(Error::parse(src, "not a finite complex number"));
    }
    // drop signed zeros so that `-1` prints as `[-1, 0]`
    Ok(Complex64::new(z.re + 0.0, z.im + 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(src: &str, x: f64) -> Complex64 {
        Expr::parse(src, &["n"]).unwrap().eval_real(x)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(ev("1+2*3", 0.0).re, 7.0);
        assert_eq!(ev("2^3^2", 0.0).re, 512.0);
        assert_eq!(ev("-2^2", 0.0).re, -4.0);
        assert_eq!(ev("(n+1)/(n+2)", 2.0).re, 0.75);
        assert_eq!(ev("1/(n+1)", 3.0).re, 0.25);
    }

    #[test]
    fn functions_and_constants() {
        assert!((ev("exp(1) - e", 0.0)).norm() < 1e-15);
        assert!((ev("cos(pi)", 0.0).re + 1.0).abs() < 1e-15);
        assert_eq!(ev("sqrt(n)", 16.0).re, 4.0);
        assert_eq!(ev("abs(3+4i)", 0.0).re, 5.0);
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0+1i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("2-0.5i").unwrap(), Complex64::new(2.0, -0.5));
        assert_eq!(parse_complex("-1").unwrap(), Complex64::new(-1.0, 0.0));
        assert_eq!(parse_complex("i").unwrap(), Complex64::new(0.0, 1.0));
        assert_eq!(parse_complex("1e-3+2e1i").unwrap(), Complex64::new(1e-3, 20.0));
    }

    #[test]
    fn rejects_garbage() {
        assert!(Expr::parse("n+", &["n"]).is_err());
        assert!(Expr::parse("foo(n)", &["n"]).is_err());
        assert!(Expr::parse("x", &["n"]).is_err());
        assert!(Expr::parse("(n", &["n"]).is_err());
        assert!(Expr::parse("", &["n"]).is_err());
        assert!(parse_complex("1+").is_err());
    }
}
