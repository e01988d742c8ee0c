use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

/// Expression tree; variables are stored 0-based (`x1` is `Var(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Fully parenthesized; parsing the output yields the same tree for any parser-produced tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var(i) => write!(f, "x{}", i + 1),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a})^{k}"),
            Expr::Neg(a) => write!(f, "(-({a}))"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64, bool),
    Var(usize),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let ch = bytes[i] as char;
        if ch.is_ascii_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            let mut integral = true;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i < bytes.len() && bytes[i] == b'.' {
                integral = false;
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let lit = &text[start..i];
            let v: f64 = lit.parse().map_err(|_| Error::Syntax { pos: start, msg: format!("malformed number '{lit}'") })?;
            out.push((Tok::Num(v, integral), start));
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            if let Some(idx) = word.strip_prefix('x').filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit())) {
                let k: usize = idx.parse().map_err(|_| Error::Syntax { pos: start, msg: format!("bad variable '{word}'") })?;
                out.push((Tok::Var(k), start));
            } else {
                out.push((Tok::Ident(word.to_string()), start));
            }
        } else if "+-*/^()".contains(ch) {
            out.push((Tok::Sym(ch), i));
            i += 1;
        } else {
            return Err(Error::Syntax { pos: i, msg: format!("unexpected character '{ch}'") });
        }
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Tok::Sym('/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Sym('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().clone() {
            Tok::Num(v, true) if v <= i32::MAX as f64 => {
                self.bump();
                let k = v as i32;
                Ok(Expr::Pow(Box::new(base), if negative { -k } else { k }))
            }
            _ => self.err("exponent must be an integer literal"),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v, _) => Ok(Expr::Num(v)),
            Tok::Var(k) => {
                if k == 0 || k > self.n {
                    Err(Error::Syntax { pos, msg: format!("variable x{k} out of range 1..{}", self.n) })
                } else {
                    Ok(Expr::Var(k - 1))
                }
            }
            Tok::Ident(name) => {
                let Some(func) = Func::from_name(&name) else {
                    return Err(Error::Syntax { pos, msg: format!("unknown function '{name}'") });
                };
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            Tok::Sym('(') => {
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Tok::Sym('-') => Ok(Expr::Neg(Box::new(self.base()?))),
            Tok::End => Err(Error::Syntax { pos, msg: "unexpected end of input".into() }),
            Tok::Sym(c) => Err(Error::Syntax { pos, msg: format!("unexpected '{c}'") }),
        }
    }
}

/// Parses one component over variables `x1..xn`.
pub fn parse_expr(text: &str, n: usize) -> Result<Expr> {
    let mut p = Parser { toks: tokenize(text)?, at: 0, n };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err("trailing input");
    }
    Ok(e)
}
