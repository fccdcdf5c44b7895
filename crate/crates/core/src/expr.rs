//! Arithmetic expressions over indexed variables such as `x[0]` or `theta[1]`.
//!
//! Grammar: `+ - * / ^` (right-associative power, binds tighter than unary
//! minus), parentheses, numeric literals, the constants `pi` and `e`, and the
//! functions `exp`, `log`, `sqrt`, `abs`. Indices are zero-based.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var { slot: usize, index: usize },
    Neg(Box<Node>),
    Bin(Op, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
}

/// A parsed expression bound to a fixed list of variable names.
#[derive(Clone, PartialEq)]
pub struct Expr {
    root: Node,
    source: String,
    names: Vec<String>,
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({:?})", self.source)
    }
}

impl Expr {
    /// Parses `source`; only the indexed variables in `names` are accepted.
    pub fn parse(source: &str, names: &[&str]) -> Result<Self> {
        let tokens = lex(source)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            names,
        };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::schema(format!(
                "unexpected trailing input in expression `{source}`"
            )));
        }
        Ok(Expr {
            root,
            source: source.to_string(),
            names: names.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Largest index used per variable slot, `None` when unused.
    pub fn max_index(&self) -> Vec<Option<usize>> {
        let mut out = vec![None; self.names.len()];
        fn visit(n: &Node, out: &mut [Option<usize>]) {
            match n {
                Node::Var { slot, index } => {
                    out[*slot] = Some(out[*slot].map_or(*index, |m: usize| m.max(*index)));
                }
                Node::Neg(a) | Node::Call(_, a) => visit(a, out),
                Node::Bin(_, a, b) => {
                    visit(a, out);
                    visit(b, out);
                }
                Node::Num(_) => {}
            }
        }
        visit(&self.root, &mut out);
        out
    }

    /// Rejects indices beyond the given per-slot lengths.
    pub fn check_bounds(&self, lengths: &[usize]) -> Result<()> {
        for (slot, m) in self.max_index().into_iter().enumerate() {
            if let Some(m) = m {
                if m >= lengths[slot] {
                    return Err(Error::UnknownSymbol(format!("{}[{m}]", self.names[slot])));
                }
            }
        }
        Ok(())
    }

    /// Evaluates with one slice per variable slot, in the order given to `parse`.
    pub fn eval(&self, vars: &[&[f64]]) -> f64 {
        eval(&self.root, vars)
    }
}

fn eval(n: &Node, vars: &[&[f64]]) -> f64 {
    match n {
        Node::Num(v) => *v,
        Node::Var { slot, index } => vars[*slot].get(*index).copied().unwrap_or(f64::NAN),
        Node::Neg(a) => -eval(a, vars),
        Node::Bin(op, a, b) => {
            let (a, b) = (eval(a, vars), eval(b, vars));
            match op {
                Op::Add => a + b,
                Op::Sub => a - b,
                Op::Mul => a * b,
                Op::Div => a / b,
                Op::Pow => {
                    if b.fract() == 0.0 && b.abs() < 64.0 {
                        a.powi(b as i32)
                    } else {
                        a.powf(b)
                    }
                }
            }
        }
        Node::Call(f, a) => {
            let a = eval(a, vars);
            match f {
                Func::Exp => a.exp(),
                Func::Log => a.ln(),
                Func::Sqrt => a.sqrt(),
                Func::Abs => a.abs(),
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    LBracket,
    RBracket,
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut i = 0;
    let mut out = Vec::new();
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Tok::Op(c));
                i += 1;
            }
            '(' => {
                out.push(Tok::LParen);
                i += 1;
            }
            ')' => {
                out.push(Tok::RParen);
                i += 1;
            }
            '[' => {
                out.push(Tok::LBracket);
                i += 1;
            }
            ']' => {
                out.push(Tok::RBracket);
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
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
                let v: f64 = text
                    .parse()
                    .map_err(|_| Error::schema(format!("bad number `{text}`")))?;
                out.push(Tok::Num(v));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                out.push(Tok::Ident(chars[start..i].iter().collect()));
            }
            other => return Err(Error::schema(format!("unexpected character `{other}`"))),
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<Tok>,
    pos: usize,
    names: &'a [&'a str],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expect(&mut self, t: Tok) -> Result<()> {
        match self.next() {
            Some(ref got) if *got == t => Ok(()),
            got => Err(Error::schema(format!("expected {t:?}, found {got:?}"))),
        }
    }

    fn expr(&mut self) -> Result<Node> {
        let mut lhs = self.term()?;
        while let Some(Tok::Op(c @ ('+' | '-'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { Op::Add } else { Op::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node> {
        let mut lhs = self.unary()?;
        while let Some(Tok::Op(c @ ('*' | '/'))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { Op::Mul } else { Op::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node> {
        match self.peek() {
            Some(Tok::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(Box::new(self.unary()?)))
            }
            Some(Tok::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.atom()?;
        if let Some(Tok::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node> {
        match self.next() {
            Some(Tok::Num(v)) => Ok(Node::Num(v)),
            Some(Tok::LParen) => {
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => self.ident(name),
            other => Err(Error::schema(format!("unexpected token {other:?}"))),
        }
    }

    fn ident(&mut self, name: String) -> Result<Node> {
        let func = match name.as_str() {
            "exp" => Some(Func::Exp),
            "log" | "ln" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            _ => None,
        };
        if let Some(f) = func {
            self.expect(Tok::LParen)?;
            let arg = self.expr()?;
            self.expect(Tok::RParen)?;
            return Ok(Node::Call(f, Box::new(arg)));
        }
        match name.as_str() {
            "pi" => return Ok(Node::Num(std::f64::consts::PI)),
            "e" => return Ok(Node::Num(std::f64::consts::E)),
            _ => {}
        }
        let slot = self
            .names
            .iter()
            .position(|n| *n == name)
            .ok_or_else(|| Error::UnknownSymbol(name.clone()))?;
        self.expect(Tok::LBracket)?;
        let index = match self.next() {
            Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 => v as usize,
            other => return Err(Error::schema(format!("bad index {other:?} for `{name}`"))),
        };
        self.expect(Tok::RBracket)?;
        Ok(Node::Var { slot, index })
    }
}
