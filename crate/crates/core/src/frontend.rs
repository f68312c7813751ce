//! Parser, pretty-printer and concrete interpreter for the loop language:
//!
//! ```text
//! i ::= i ; i | (x1,..,xn) := (e1,..,en) | i OR i | while (*) do i done | { i }
//! e ::= cst | x | e + e | e - e | e * e | e / cst | e ^ n | -e | (e)
//! ```
//!
//! `;` binds tighter than `OR`. Lines starting at `#` are comments.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::poly::{format_rational, parse_rational, PolyMap, Polynomial, Rational};

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Instr {
    Seq(Vec<Instr>),
    /// A total simultaneous assignment, one component per program variable.
    Assign(PolyMap),
    Or(Vec<Instr>),
    WhileStar(Box<Instr>),
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Program {
    pub variables: Vec<String>,
    pub body: Instr,
}

/// Positions recovered while parsing that are not part of the AST.
#[derive(Clone, Debug, Default)]
pub struct SourceInfo {
    /// 1-based line of the analyzed `while` keyword.
    pub loop_line: Option<usize>,
}

impl Program {
    pub fn nvars(&self) -> usize {
        self.variables.len()
    }

    /// The instruction whose repetition is analyzed: the body of the first
    /// top-level `while (*)`, or the whole program when it has no loop.
    pub fn analyzed_body(&self) -> &Instr {
        fn first_loop(i: &Instr) -> Option<&Instr> {
            match i {
                Instr::WhileStar(b) => Some(b),
                Instr::Seq(items) | Instr::Or(items) => items.iter().find_map(first_loop),
                Instr::Assign(_) => None,
            }
        }
        first_loop(&self.body).unwrap_or(&self.body)
    }

    /// The loop bodies as single simultaneous assignments: sequences are
    /// folded by substitution, `OR` alternatives enumerated in source order.
    pub fn loop_bodies(&self) -> Vec<PolyMap> {
        flatten_bodies(self.analyzed_body(), self.nvars())
    }
}

fn flatten_bodies(i: &Instr, nvars: usize) -> Vec<PolyMap> {
    match i {
        Instr::Assign(g) => vec![g.clone()],
        Instr::Or(alts) => alts.iter().flat_map(|a| flatten_bodies(a, nvars)).collect(),
        Instr::Seq(items) => {
            let mut acc = vec![PolyMap::identity(nvars)];
            for item in items {
                let next = flatten_bodies(item, nvars);
                acc = acc
                    .iter()
                    .flat_map(|a| next.iter().map(move |b| a.then(b)))
                    .collect();
            }
            acc
        }
        // Nested loops are rejected by the parser; an outer loop around the
        // analyzed body cannot reach here.
        Instr::WhileStar(b) => flatten_bodies(b, nvars),
    }
}

// ---------------------------------------------------------------------------
// Lexer

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Assign,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Semi,
    While,
    Do,
    Done,
    Or,
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (lineno + 1, i + 1);
            let push = |out: &mut Vec<Token>, tok| out.push(Token { tok, line, column });
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let tok = match word.as_str() {
                    "while" => Tok::While,
                    "do" => Tok::Do,
                    "done" => Tok::Done,
                    "OR" | "or" => Tok::Or,
                    _ => Tok::Ident(word),
                };
                push(&mut out, tok);
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i + 1 < chars.len() && chars[i] == '.' && chars[i + 1].is_ascii_digit() {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                push(&mut out, Tok::Number(chars[start..i].iter().collect()));
                continue;
            }
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '{' => Tok::LBrace,
                '}' => Tok::RBrace,
                ',' => Tok::Comma,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                ';' => Tok::Semi,
                ':' if chars.get(i + 1) == Some(&'=') => {
                    i += 1;
                    Tok::Assign
                }
                _ => {
                    return Err(Error::Syntax {
                        line,
                        column,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            };
            push(&mut out, tok);
            i += 1;
        }
    }
    let line = text.lines().count().max(1);
    out.push(Token {
        tok: Tok::Eof,
        line,
        column: text.lines().last().map_or(1, |l| l.chars().count() + 1),
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Raw syntax tree, before variables are resolved

#[derive(Debug)]
enum Expr {
    Num(Rational),
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>, usize, usize),
    Pow(Box<Expr>, u32),
    Neg(Box<Expr>),
}

#[derive(Debug)]
enum Raw {
    Seq(Vec<Raw>),
    Assign(Vec<String>, Vec<Expr>),
    Or(Vec<Raw>),
    While(Box<Raw>),
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    loop_depth: usize,
    first_loop_line: Option<usize>,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        let t = &self.toks[self.pos];
        (t.line, t.column)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        let (line, column) = self.here();
        Err(Error::Syntax {
            line,
            column,
            message: message.into(),
        })
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", describe(self.peek())))
        }
    }

    fn instr(&mut self) -> Result<Raw> {
        let mut alts = vec![self.seq()?];
        while *self.peek() == Tok::Or {
            self.bump();
            alts.push(self.seq()?);
        }
        Ok(flatten_raw(alts, true))
    }

    fn seq(&mut self) -> Result<Raw> {
        let mut items = vec![self.atom()?];
        while *self.peek() == Tok::Semi {
            self.bump();
            if matches!(self.peek(), Tok::Or | Tok::Done | Tok::RBrace | Tok::Eof) {
                break;
            }
            items.push(self.atom()?);
        }
        Ok(flatten_raw(items, false))
    }

    fn atom(&mut self) -> Result<Raw> {
        match self.peek().clone() {
            Tok::While => {
                let (line, column) = self.here();
                if self.loop_depth > 0 {
                    return Err(Error::NestedLoop { line, column });
                }
                self.first_loop_line.get_or_insert(line);
                self.bump();
                self.expect(Tok::LParen, "`(`")?;
                self.expect(Tok::Star, "`*`")?;
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Do, "`do`")?;
                self.loop_depth += 1;
                let body = self.instr()?;
                self.loop_depth -= 1;
                self.expect(Tok::Done, "`done`")?;
                Ok(Raw::While(Box::new(body)))
            }
            Tok::LBrace => {
                self.bump();
                let inner = self.instr()?;
                self.expect(Tok::RBrace, "`}`")?;
                Ok(inner)
            }
            Tok::LParen => {
                self.bump();
                let mut targets = vec![self.ident()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    targets.push(self.ident()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                self.expect(Tok::Assign, "`:=`")?;
                let (line, column) = self.here();
                self.expect(Tok::LParen, "`(`")?;
                let mut values = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    values.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                if targets.len() != values.len() {
                    return Err(Error::Syntax {
                        line,
                        column,
                        message: format!(
                            "{} targets but {} expressions",
                            targets.len(),
                            values.len()
                        ),
                    });
                }
                self.check_distinct(&targets)?;
                Ok(Raw::Assign(targets, values))
            }
            Tok::Ident(_) => {
                let target = self.ident()?;
                self.expect(Tok::Assign, "`:=`")?;
                let value = self.expr()?;
                Ok(Raw::Assign(vec![target], vec![value]))
            }
            other => self.error(format!("expected an instruction, found {}", describe(&other))),
        }
    }

    fn check_distinct(&self, targets: &[String]) -> Result<()> {
        for (i, t) in targets.iter().enumerate() {
            if targets[..i].contains(t) {
                return self.error(format!("variable `{t}` assigned twice"));
            }
        }
        Ok(())
    }

    fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            other => self.error(format!("expected a variable, found {}", describe(&other))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    let (line, column) = self.here();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?), line, column);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.primary()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = match self.peek().clone() {
                Tok::Number(n) => n.parse::<u32>().ok(),
                _ => None,
            };
            let Some(exp) = exp else {
                return self.error("expected a non-negative integer exponent");
            };
            self.bump();
            return Ok(Expr::Pow(Box::new(base), exp));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Number(n) => {
                self.bump();
                match parse_rational(&n) {
                    Some(q) => Ok(Expr::Num(q)),
                    None => self.error(format!("bad number `{n}`")),
                }
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr::Var(name))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            other => self.error(format!("expected an expression, found {}", describe(&other))),
        }
    }
}

fn flatten_raw(items: Vec<Raw>, is_or: bool) -> Raw {
    let mut flat = Vec::new();
    for item in items {
        match item {
            Raw::Or(inner) if is_or => flat.extend(inner),
            Raw::Seq(inner) if !is_or => flat.extend(inner),
            other => flat.push(other),
        }
    }
    if flat.len() == 1 {
        flat.pop().unwrap()
    } else if is_or {
        Raw::Or(flat)
    } else {
        Raw::Seq(flat)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Number(s) => format!("number `{s}`"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}").to_lowercase(),
    }
}

fn collect_vars(raw: &Raw, out: &mut Vec<String>) {
    fn expr_vars(e: &Expr, out: &mut Vec<String>) {
        match e {
            Expr::Num(_) => {}
            Expr::Var(v) => {
                if !out.contains(v) {
                    out.push(v.clone());
                }
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b, ..) => {
                expr_vars(a, out);
                expr_vars(b, out);
            }
            Expr::Pow(a, _) | Expr::Neg(a) => expr_vars(a, out),
        }
    }
    match raw {
        Raw::Seq(items) | Raw::Or(items) => items.iter().for_each(|i| collect_vars(i, out)),
        Raw::While(b) => collect_vars(b, out),
        Raw::Assign(targets, values) => {
            for t in targets {
                if !out.contains(t) {
                    out.push(t.clone());
                }
            }
            values.iter().for_each(|e| expr_vars(e, out));
        }
    }
}

fn lower_expr(e: &Expr, index: &HashMap<&str, usize>, n: usize) -> Result<Polynomial> {
    Ok(match e {
        Expr::Num(q) => Polynomial::constant(n, q.clone()),
        Expr::Var(v) => Polynomial::var(n, index[v.as_str()]),
        Expr::Add(a, b) => &lower_expr(a, index, n)? + &lower_expr(b, index, n)?,
        Expr::Sub(a, b) => &lower_expr(a, index, n)? - &lower_expr(b, index, n)?,
        Expr::Mul(a, b) => &lower_expr(a, index, n)? * &lower_expr(b, index, n)?,
        Expr::Div(a, b, line, column) => {
            let divisor = lower_expr(b, index, n)?;
            match divisor.as_constant() {
                Some(c) if !c.is_zero() => lower_expr(a, index, n)?.scale(&c.recip()),
                Some(_) => {
                    return Err(Error::Syntax {
                        line: *line,
                        column: *column,
                        message: "division by zero".into(),
                    })
                }
                None => {
                    return Err(Error::Syntax {
                        line: *line,
                        column: *column,
                        message: "division is only allowed by a constant".into(),
                    })
                }
            }
        }
        Expr::Pow(a, k) => lower_expr(a, index, n)?.pow(*k),
        Expr::Neg(a) => -&lower_expr(a, index, n)?,
    })
}

fn lower(raw: &Raw, index: &HashMap<&str, usize>, n: usize) -> Result<Instr> {
    Ok(match raw {
        Raw::Seq(items) => Instr::Seq(
            items
                .iter()
                .map(|i| lower(i, index, n))
                .collect::<Result<_>>()?,
        ),
        Raw::Or(items) => Instr::Or(
            items
                .iter()
                .map(|i| lower(i, index, n))
                .collect::<Result<_>>()?,
        ),
        Raw::While(b) => Instr::WhileStar(Box::new(lower(b, index, n)?)),
        Raw::Assign(targets, values) => {
            let mut comps: Vec<Polynomial> = (0..n).map(|i| Polynomial::var(n, i)).collect();
            for (t, e) in targets.iter().zip(values) {
                comps[index[t.as_str()]] = lower_expr(e, index, n)?;
            }
            Instr::Assign(PolyMap::new(comps))
        }
    })
}

pub fn parse(text: &str) -> Result<Program> {
    parse_with_info(text).map(|(p, _)| p)
}

pub fn parse_with_info(text: &str) -> Result<(Program, SourceInfo)> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        loop_depth: 0,
        first_loop_line: None,
    };
    let raw = parser.instr()?;
    if *parser.peek() != Tok::Eof {
        return parser.error(format!("unexpected {}", describe(parser.peek())));
    }
    let mut variables = Vec::new();
    collect_vars(&raw, &mut variables);
    let index: HashMap<&str, usize> = variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    let body = lower(&raw, &index, variables.len())?;
    let info = SourceInfo {
        loop_line: parser.first_loop_line,
    };
    Ok((Program { variables, body }, info))
}

// ---------------------------------------------------------------------------
// Pretty-printing

pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    print_instr(&p.body, &p.variables, 0, &mut out);
    out.push('\n');
    out
}

fn print_instr(i: &Instr, vars: &[String], indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match i {
        Instr::Assign(g) => {
            let values: Vec<String> = g.components().iter().map(|c| c.render(vars)).collect();
            out.push_str(&format!("{pad}({}) := ({})", vars.join(","), values.join(", ")));
        }
        Instr::Seq(items) => {
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push_str(";\n");
                }
                if let Instr::Or(_) = item {
                    out.push_str(&format!("{pad}{{\n"));
                    print_instr(item, vars, indent + 1, out);
                    out.push_str(&format!("\n{pad}}}"));
                } else {
                    print_instr(item, vars, indent, out);
                }
            }
        }
        Instr::Or(alts) => {
            for (k, alt) in alts.iter().enumerate() {
                if k > 0 {
                    out.push_str(&format!("\n{pad}OR\n"));
                }
                print_instr(alt, vars, indent, out);
            }
        }
        Instr::WhileStar(body) => {
            out.push_str(&format!("{pad}while (*) do\n"));
            print_instr(body, vars, indent + 1, out);
            out.push_str(&format!("\n{pad}done"));
        }
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_print(self))
    }
}

// ---------------------------------------------------------------------------
// Concrete interpretation

/// A program state; the constant variable `1` always evaluates to 1.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct State(BTreeMap<String, Rational>);

impl State {
    pub fn new() -> Self {
        State(BTreeMap::new())
    }

    pub fn from_pairs<S: Into<String>>(pairs: impl IntoIterator<Item = (S, Rational)>) -> Self {
        State(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    /// Builds a state from a vector laid out in `variables` order.
    pub fn from_vector(variables: &[String], values: &[Rational]) -> Self {
        State(variables.iter().cloned().zip(values.iter().cloned()).collect())
    }

    /// Parses `"x=0,y=1/2"`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut s = State::new();
        for part in text.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("bad binding `{part}`")))?;
            let v = parse_rational(v)
                .ok_or_else(|| Error::InvalidArgument(format!("bad value in `{part}`")))?;
            s.0.insert(k.trim().to_string(), v);
        }
        Ok(s)
    }

    pub fn get(&self, name: &str) -> Option<Rational> {
        if name == "1" {
            return Some(Rational::from_integer(BigInt::from(1)));
        }
        self.0.get(name).cloned()
    }

    pub fn set(&mut self, name: impl Into<String>, value: Rational) {
        self.0.insert(name.into(), value);
    }

    pub fn to_vector(&self, variables: &[String]) -> Result<Vec<Rational>> {
        variables
            .iter()
            .map(|v| {
                self.0
                    .get(v)
                    .cloned()
                    .ok_or_else(|| Error::UnboundVariable(v.clone()))
            })
            .collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Rational)> {
        self.0.iter()
    }
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|(k, v)| format!("{k}={}", format_rational(v)))
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// States before the first and after every completed iteration.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trace {
    pub variables: Vec<String>,
    pub values: Vec<Vec<Rational>>,
    pub choices: Vec<usize>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn state(&self, i: usize) -> State {
        State::from_vector(&self.variables, &self.values[i])
    }

    pub fn states(&self) -> impl Iterator<Item = State> + '_ {
        (0..self.len()).map(|i| self.state(i))
    }
}

/// Executes `iters` iterations of the analyzed loop from `init`, picking
/// body `choices[t]` at iteration `t`.
pub fn run(p: &Program, init: &State, iters: usize, choices: &[usize]) -> Result<Trace> {
    if choices.len() != iters {
        return Err(Error::InvalidArgument(format!(
            "{iters} iterations but {} body choices",
            choices.len()
        )));
    }
    let bodies = p.loop_bodies();
    let mut cur = init.to_vector(&p.variables)?;
    let mut values = vec![cur.clone()];
    for &c in choices {
        let body = bodies.get(c).ok_or_else(|| {
            Error::InvalidArgument(format!("body {c} out of range ({} bodies)", bodies.len()))
        })?;
        cur = body.apply(&cur);
        values.push(cur.clone());
    }
    Ok(Trace {
        variables: p.variables.clone(),
        values,
        choices: choices.to_vec(),
    })
}

/// Syntactic modification check used to flag evident invariants.
pub fn modified_variables(p: &Program) -> Vec<bool> {
    let mut modified = vec![false; p.nvars()];
    for body in p.loop_bodies() {
        for (v, m) in modified.iter_mut().enumerate() {
            *m |= !body.is_identity_on(v);
        }
    }
    modified
}
