//! Arithmetic expressions over time, state components and nonlocal samples.
//!
//! Grammar, with `^` right-associative and binding tighter than unary minus
//! (so `-2^2` is `-4` and `2^-1` is `0.5`):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-' factor | power
//! power  := base ('^' factor)?
//! base   := number | var | var '@' point | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Variables are `t`, `s`, `u` (alias of `u1`) and `u1`, `u2`, ... ; a
//! nonlocal sample is written `u@t1` or `u2@t3`, indices starting at 1.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Abs,
    Tanh,
}

impl Func {
    pub const ALL: [Func; 5] = [Func::Sin, Func::Cos, Func::Exp, Func::Abs, Func::Tanh];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Abs => "abs",
            Func::Tanh => "tanh",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == name)
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Abs => x.abs(),
            Func::Tanh => x.tanh(),
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
}

/// Zero-based variable references.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    S,
    U(usize),
    UAt { component: usize, point: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum Ast {
    Num(f64),
    Var(Var),
    Neg(Box<Ast>),
    Bin(BinOp, Box<Ast>, Box<Ast>),
    Call(Func, Box<Ast>),
}

impl Ast {
    fn visit_vars(&self, f: &mut impl FnMut(Var)) {
        match self {
            Ast::Num(_) => {}
            Ast::Var(v) => f(*v),
            Ast::Neg(x) | Ast::Call(_, x) => x.visit_vars(f),
            Ast::Bin(_, l, r) => {
                l.visit_vars(f);
                r.visit_vars(f);
            }
        }
    }
}

/// Fully parenthesized source text; parsing it yields the same tree.
impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ast::Num(x) => write!(f, "{x:?}"),
            Ast::Var(Var::T) => f.write_str("t"),
            Ast::Var(Var::S) => f.write_str("s"),
            Ast::Var(Var::U(k)) => write!(f, "u{}", k + 1),
            Ast::Var(Var::UAt { component, point }) => write!(f, "u{}@t{}", component + 1, point + 1),
            Ast::Neg(x) => write!(f, "(-{x})"),
            Ast::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Ast::Call(func, x) => write!(f, "{}({x})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {offset}: expected {}, found {found}", .expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("variable {0} has no value in this context")]
    Unbound(String),
}

/// Which variables an expression may mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scope {
    pub dim: usize,
    pub t: bool,
    pub s: bool,
    pub u: bool,
    pub points: usize,
}

impl Scope {
    /// Every variable, with no bound on component or point indices.
    pub fn any() -> Self {
        Self {
            dim: usize::MAX,
            t: true,
            s: true,
            u: true,
            points: usize::MAX,
        }
    }

    pub fn source(dim: usize) -> Self {
        Self {
            dim,
            t: true,
            s: false,
            u: true,
            points: 0,
        }
    }

    pub fn kernel(dim: usize) -> Self {
        Self {
            s: true,
            ..Self::source(dim)
        }
    }

    pub fn nonlocal(dim: usize, points: usize) -> Self {
        Self {
            dim,
            t: false,
            s: false,
            u: false,
            points,
        }
    }

    pub fn time() -> Self {
        Self {
            dim: 0,
            t: true,
            s: false,
            u: false,
            points: 0,
        }
    }

    fn admits(&self, v: Var) -> bool {
        match v {
            Var::T => self.t,
            Var::S => self.s,
            Var::U(k) => self.u && k < self.dim,
            Var::UAt { component, point } => component < self.dim && point < self.points,
        }
    }

    fn describe(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.t {
            out.push("`t`".to_string());
        }
        if self.s {
            out.push("`s`".to_string());
        }
        if self.u {
            out.push(if self.dim == 1 { "`u`".to_string() } else { format!("`u1`..`u{}`", self.dim) });
        }
        if self.points > 0 {
            out.push(format!("`u@t1`..`u@t{}`", self.points));
        }
        out.push("a number".to_string());
        out
    }
}

/// Values bound to the variables during evaluation.
#[derive(Debug, Clone, Copy, Default)]
pub struct Env<'a> {
    pub t: f64,
    pub s: f64,
    pub u: &'a [f64],
    /// state at each nonlocal point
    pub at: &'a [&'a [f64]],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    source: String,
    ast: Ast,
}

impl Expression {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn ast(&self) -> &Ast {
        &self.ast
    }

    pub fn vars(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.ast.visit_vars(&mut |v| {
            if !out.contains(&v) {
                out.push(v);
            }
        });
        out
    }

    pub fn eval(&self, env: &Env<'_>) -> Result<f64, EvalError> {
        eval(&self.ast, env)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.ast.fmt(f)
    }
}

fn eval(ast: &Ast, env: &Env<'_>) -> Result<f64, EvalError> {
    Ok(match ast {
        Ast::Num(x) => *x,
        Ast::Var(v) => lookup(*v, env)?,
        Ast::Neg(x) => -eval(x, env)?,
        Ast::Call(func, x) => func.apply(eval(x, env)?),
        Ast::Bin(op, l, r) => {
            let a = eval(l, env)?;
            let b = eval(r, env)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(EvalError::DivisionByZero(ast.to_string()));
                    }
                    a / b
                }
                BinOp::Pow => a.powf(b),
            }
        }
    })
}

fn lookup(v: Var, env: &Env<'_>) -> Result<f64, EvalError> {
    let missing = || EvalError::Unbound(Ast::Var(v).to_string());
    match v {
        Var::T => Ok(env.t),
        Var::S => Ok(env.s),
        Var::U(k) => env.u.get(k).copied().ok_or_else(missing),
        Var::UAt { component, point } => env
            .at
            .get(point)
            .and_then(|x| x.get(component))
            .copied()
            .ok_or_else(missing),
    }
}

/// Parses with every variable admitted.
pub fn parse_expression(source: &str) -> Result<Expression, ParseError> {
    parse_in(source, &Scope::any())
}

/// Parses and rejects variables outside `scope`.
pub fn parse_in(source: &str, scope: &Scope) -> Result<Expression, ParseError> {
    let tokens = lex(source)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        scope,
    };
    let ast = p.expr()?;
    let tok = p.peek();
    if tok.kind != Tok::End {
        return Err(p.error(&["an operator", "end of input"]));
    }
    Ok(Expression {
        source: source.to_string(),
        ast,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    At,
    End,
}

#[derive(Debug, Clone)]
struct Token {
    kind: Tok,
    offset: usize,
    text: String,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'@' => Tok::At,
            b'0'..=b'9' | b'.' => {
                i = scan_number(bytes, i);
                let text = &src[start..i];
                let x: f64 = text.parse().map_err(|_| ParseError {
                    offset: start,
                    expected: vec!["a number".into()],
                    found: format!("`{text}`"),
                })?;
                out.push(Token {
                    kind: Tok::Num(x),
                    offset: start,
                    text: text.to_string(),
                });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                let text = &src[start..i];
                out.push(Token {
                    kind: Tok::Ident(text.to_string()),
                    offset: start,
                    text: text.to_string(),
                });
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ParseError {
                    offset: start,
                    expected: vec!["a number, variable, function, operator or parenthesis".into()],
                    found: format!("`{ch}`"),
                });
            }
        };
        i += 1;
        out.push(Token {
            kind,
            offset: start,
            text: src[start..i].to_string(),
        });
    }
    out.push(Token {
        kind: Tok::End,
        offset: src.len(),
        text: String::new(),
    });
    Ok(out)
}

fn scan_number(b: &[u8], mut i: usize) -> usize {
    let digits = |b: &[u8], mut i: usize| {
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        i
    };
    i = digits(b, i);
    if i < b.len() && b[i] == b'.' {
        i = digits(b, i + 1);
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        let mut j = i + 1;
        if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
            j += 1;
        }
        if j < b.len() && b[j].is_ascii_digit() {
            i = digits(b, j);
        }
    }
    i
}

struct Parser<'s> {
    tokens: Vec<Token>,
    pos: usize,
    scope: &'s Scope,
}

const OPERAND: [&str; 5] = ["a number", "a variable", "a function", "`(`", "`-`"];

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.kind != Tok::End {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let tok = self.peek();
        ParseError {
            offset: tok.offset,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: if tok.kind == Tok::End {
                "end of input".into()
            } else {
                format!("`{}`", tok.text)
            },
        }
    }

    fn expr(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek().kind {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Ast, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek().kind {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Ast::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Ast, ParseError> {
        if self.peek().kind == Tok::Minus {
            self.bump();
            return Ok(Ast::Neg(Box::new(self.factor()?)));
        }
        let base = self.base()?;
        if self.peek().kind == Tok::Caret {
            self.bump();
            let exp = self.factor()?;
            return Ok(Ast::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Ast, ParseError> {
        let tok = self.peek().clone();
        match &tok.kind {
            &Tok::Num(x) => {
                self.bump();
                Ok(Ast::Num(x))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(func) = Func::from_name(name) {
                    self.bump();
                    if self.peek().kind != Tok::LParen {
                        return Err(self.error(&["`(`"]));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Ast::Call(func, Box::new(arg)));
                }
                let v = self.variable(&tok, name)?;
                Ok(Ast::Var(v))
            }
            _ => Err(self.error(&OPERAND)),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if self.peek().kind != Tok::RParen {
            return Err(self.error(&["an operator", "`)`"]));
        }
        self.bump();
        Ok(())
    }

    fn variable(&mut self, tok: &Token, name: &str) -> Result<Var, ParseError> {
        let unknown = |scope: &Scope| ParseError {
            offset: tok.offset,
            expected: scope.describe().into_iter().chain(["a function".to_string()]).collect(),
            found: format!("`{name}`"),
        };
        let v = match name {
            "t" => Var::T,
            "s" => Var::S,
            _ => {
                let component = state_index(name).ok_or_else(|| unknown(self.scope))?;
                self.bump();
                if self.peek().kind == Tok::At {
                    self.bump();
                    let at = self.peek().clone();
                    let point = match &at.kind {
                        Tok::Ident(p) => point_index(p),
                        _ => None,
                    };
                    let Some(point) = point else {
                        return Err(self.error(&["a point name `t1`, `t2`, ..."]));
                    };
                    let v = Var::UAt { component, point };
                    if !self.scope.admits(v) {
                        return Err(ParseError {
                            offset: tok.offset,
                            expected: self.scope.describe(),
                            found: format!("`{name}@{}`", at.text),
                        });
                    }
                    self.bump();
                    return Ok(v);
                }
                let v = Var::U(component);
                if !self.scope.admits(v) {
                    return Err(unknown(self.scope));
                }
                return Ok(v);
            }
        };
        if !self.scope.admits(v) {
            return Err(unknown(self.scope));
        }
        self.bump();
        Ok(v)
    }
}

/// `u` -> 0, `u3` -> 2.
fn state_index(name: &str) -> Option<usize> {
    let rest = name.strip_prefix('u')?;
    if rest.is_empty() {
        return Some(0);
    }
    one_based(rest)
}

/// `t2` -> 1.
fn point_index(name: &str) -> Option<usize> {
    one_based(name.strip_prefix('t')?)
}

fn one_based(digits: &str) -> Option<usize> {
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) || digits.starts_with('0') {
        return None;
    }
    digits.parse::<usize>().ok().map(|k| k - 1)
}
