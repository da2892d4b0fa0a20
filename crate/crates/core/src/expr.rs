//! A small expression language for graph functions and custom scalar
//! fields, e.g. `0.1 * sin(x0) * x1^2 + exp(-t)`.
//!
//! Expressions are parsed once and evaluated in any [`Scalar`] type, so the
//! same tree yields values, jets and series.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                i += 1;
            }
        } else if c.is_whitespace() {
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
            let v = text
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("bad number '{text}'")))?;
            out.push(Token::Num(v));
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
            return Err(Error::Parse(format!("unexpected character '{c}'")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            // right associative, binds tighter than unary minus on the left
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.next() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::LParen) => {
                let e = self.expr()?;
                match self.next() {
                    Some(Token::RParen) => Ok(e),
                    _ => Err(Error::Parse("missing ')'".into())),
                }
            }
            Some(Token::Ident(name)) => {
                let func = match name.as_str() {
                    "sin" => Some(Func::Sin),
                    "cos" => Some(Func::Cos),
                    "exp" => Some(Func::Exp),
                    "log" | "ln" => Some(Func::Log),
                    "sqrt" => Some(Func::Sqrt),
                    _ => None,
                };
                match func {
                    Some(f) => {
                        if self.next() != Some(Token::LParen) {
                            return Err(Error::Parse(format!("expected '(' after {name}")));
                        }
                        let arg = self.expr()?;
                        if self.next() != Some(Token::RParen) {
                            return Err(Error::Parse(format!("missing ')' in call to {name}")));
                        }
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    None if name == "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    None => Ok(Expr::Var(name)),
                }
            }
            Some(t) => Err(Error::Parse(format!("unexpected token {t:?}"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        if tokens.is_empty() {
            return Err(Error::Parse("empty expression".into()));
        }
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!(
                "trailing input after position {}",
                p.pos
            )));
        }
        Ok(e)
    }

    /// Names of all free variables.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                out.insert(v.clone());
            }
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_vars(out),
            Expr::Bin(_, a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Evaluates with `like` fixing the shape of constants.
    pub fn eval<S: Scalar>(&self, like: &S, vars: &dyn Fn(&str) -> Option<S>) -> Result<S> {
        Ok(match self {
            Expr::Num(v) => like.lift(*v),
            Expr::Var(name) => {
                vars(name).ok_or_else(|| Error::Parse(format!("unknown variable '{name}'")))?
            }
            Expr::Neg(e) => -e.eval(like, vars)?,
            Expr::Call(f, e) => {
                let x = e.eval(like, vars)?;
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln()?,
                    Func::Sqrt => x.sqrt()?,
                }
            }
            Expr::Bin(op, a, b) => {
                let x = a.eval(like, vars)?;
                if *op == BinOp::Pow {
                    if b.variables().is_empty() {
                        let r = b.eval(&0.0, &|_| None)?;
                        return int_pow(&x, r).map_or_else(|| x.powf(r), Ok);
                    }
                    return Ok((b.eval(like, vars)? * x.ln()?).exp());
                }
                let y = b.eval(like, vars)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x.checked_div(&y)?,
                    BinOp::Pow => unreachable!(),
                }
            }
        })
    }
}

fn int_pow<S: Scalar>(x: &S, r: f64) -> Option<S> {
    if r.fract() != 0.0 || !(0.0..=16.0).contains(&r) {
        return None;
    }
    let mut acc = x.lift(1.0);
    for _ in 0..r as u32 {
        acc = acc * x.clone();
    }
    Some(acc)
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => {
                let name = match func {
                    Func::Sin => "sin",
                    Func::Cos => "cos",
                    Func::Exp => "exp",
                    Func::Log => "log",
                    Func::Sqrt => "sqrt",
                };
                write!(f, "{name}({e})")
            }
            Expr::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a} {s} {b})")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::Jet;

    fn eval_f64(src: &str, x: f64) -> Result<f64> {
        Expr::parse(src)?.eval(&0.0, &|v| (v == "x").then_some(x))
    }

    #[test]
    fn precedence_and_functions() {
        assert_eq!(eval_f64("1 + 2 * 3", 0.0).unwrap(), 7.0);
        assert_eq!(eval_f64("-2^2", 0.0).unwrap(), -4.0);
        assert_eq!(eval_f64("2^3^2", 0.0).unwrap(), 512.0);
        assert_eq!(eval_f64("(1 + 2) * 3", 0.0).unwrap(), 9.0);
        assert!((eval_f64("sin(pi / 2) + exp(0) + log(1) + sqrt(4)", 0.0).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(eval_f64("x^2 - 1e-1 * x", 2.0).unwrap(), 3.8);
        assert_eq!(eval_f64("x^3", -2.0).unwrap(), -8.0);
        assert_eq!(eval_f64("# comment\n x / 4", 2.0).unwrap(), 0.5);
    }

    #[test]
    fn errors() {
        assert!(matches!(Expr::parse("1 +"), Err(Error::Parse(_))));
        assert!(matches!(Expr::parse("sin 2"), Err(Error::Parse(_))));
        assert!(matches!(Expr::parse("(1"), Err(Error::Parse(_))));
        assert!(matches!(Expr::parse("1 $ 2"), Err(Error::Parse(_))));
        assert!(matches!(eval_f64("y", 0.0), Err(Error::Parse(_))));
        assert!(matches!(eval_f64("log(x)", -1.0), Err(Error::Singularity(_))));
        assert!(matches!(eval_f64("1 / x", 0.0), Err(Error::Singularity(_))));
    }

    #[test]
    fn variables_are_collected() {
        let e = Expr::parse("x0 * sin(x1) + t^2 + x0").unwrap();
        let v: Vec<String> = e.variables().into_iter().collect();
        assert_eq!(v, vec!["t", "x0", "x1"]);
    }

    #[test]
    fn jet_evaluation() {
        let e = Expr::parse("x^2 * exp(x)").unwrap();
        let x = Jet::variable(1.0, 0, 1, 2).unwrap();
        let j = e.eval(&x, &|v| (v == "x").then_some(x)).unwrap();
        let ex = 1f64.exp();
        // (x² eˣ)' = (2x + x²) eˣ, (x² eˣ)'' = (2 + 4x + x²) eˣ
        assert!((j.value() - ex).abs() < 1e-14);
        assert!((j.d1(0) - 3.0 * ex).abs() < 1e-13);
        assert!((j.d2(0, 0) - 7.0 * ex).abs() < 1e-13);
    }
}
