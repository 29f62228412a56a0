//! Line-oriented program file parser.
//!
//! ```text
//! vars <name> <name> ...
//! const <name> = <rational>
//! constraint <affine> (<=|==|>=) <affine>
//! bound <expr>
//! ```
//!
//! `<expr>` is an affine expression, `max(e, e, ...)`, `min(e, e, ...)` or
//! `if(<affine> <= <affine>; e; e)`. Sums and rational multiples of these are
//! accepted too and are pushed down to the leaves, so `a + max(b, c)` is
//! stored as `max(a + b, a + c)`. `#` starts a comment.

use std::collections::{BTreeMap, HashSet};

use num_bigint::BigInt;
use num_traits::Zero;
use thiserror::Error;

use super::{AffineExpr, AffineInequality, BoundExpr, Program, Relation};
use crate::lp::{self, LpStatus};
use crate::rational::Rational;

const KEYWORDS: &[&str] = &["vars", "const", "constraint", "bound", "max", "min", "if"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}, column {column}: undeclared identifier `{name}`")]
    Undeclared {
        line: usize,
        column: usize,
        name: String,
    },
    #[error("program declares no bounds")]
    NoBounds,
    #[error("variable `{0}` is unbounded over the constraint polytope")]
    Unbounded(String),
}

/// Parses a program and checks that every variable is bounded over the
/// constraint polytope.
pub fn parse_program(text: &str) -> Result<Program, ParseError> {
    let mut program = Program {
        variables: Vec::new(),
        constants: BTreeMap::new(),
        constraints: Vec::new(),
        bounds: Vec::new(),
    };
    let mut declared: HashSet<String> = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let tokens = tokenize(content, line)?;
        let mut p = LineParser {
            tokens,
            pos: 0,
            line,
            program: &program,
        };
        let (keyword, column) = p.expect_ident("a statement keyword")?;
        match keyword.as_str() {
            "vars" => {
                let mut names = Vec::new();
                while !p.at_end() {
                    let (name, column) = p.expect_ident("a variable name")?;
                    check_new_name(&name, &declared, line, column)?;
                    declared.insert(name.clone());
                    names.push(name);
                }
                if names.is_empty() {
                    return Err(syntax(line, p.column(), "`vars` needs at least one name"));
                }
                program.variables.extend(names);
            }
            "const" => {
                let (name, column) = p.expect_ident("a constant name")?;
                check_new_name(&name, &declared, line, column)?;
                p.expect(&Tok::Assign, "`=`")?;
                let col = p.column();
                let value = p.affine()?;
                p.finish()?;
                if !value.is_constant() {
                    return Err(syntax(line, col, "constant value must not mention variables"));
                }
                declared.insert(name.clone());
                program.constants.insert(name, value.constant_term().clone());
            }
            "constraint" => {
                let lhs = p.affine()?;
                let relation = p.relation(&[Relation::Le, Relation::Eq, Relation::Ge])?;
                let rhs = p.affine()?;
                p.finish()?;
                program
                    .constraints
                    .push(AffineInequality::new(lhs, relation, rhs));
            }
            "bound" => {
                let b = p.expr()?;
                p.finish()?;
                program.bounds.push(b);
            }
            _ => {
                return Err(syntax(
                    line,
                    column,
                    &format!("unknown statement `{keyword}` (expected vars, const, constraint or bound)"),
                ))
            }
        }
    }

    if program.bounds.is_empty() {
        return Err(ParseError::NoBounds);
    }
    check_bounded(&program)?;
    Ok(program)
}

fn check_bounded(program: &Program) -> Result<(), ParseError> {
    for v in &program.variables {
        for sign in [1, -1] {
            let objective = AffineExpr::term(v, Rational::from_integer(sign.into()));
            let r = lp::maximize(&program.variables, &program.constraints, &objective);
            match r.status {
                LpStatus::Unbounded => return Err(ParseError::Unbounded(v.clone())),
                // an empty polytope is bounded; the optimizer reports it
                LpStatus::Infeasible => return Ok(()),
                LpStatus::Optimal => {}
            }
        }
    }
    Ok(())
}

fn check_new_name(
    name: &str,
    declared: &HashSet<String>,
    line: usize,
    column: usize,
) -> Result<(), ParseError> {
    if KEYWORDS.contains(&name) {
        return Err(syntax(line, column, &format!("`{name}` is a reserved word")));
    }
    if declared.contains(name) {
        return Err(syntax(line, column, &format!("`{name}` declared twice")));
    }
    Ok(())
}

fn syntax(line: usize, column: usize, message: &str) -> ParseError {
    ParseError::Syntax {
        line,
        column,
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num(BigInt),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
    Semi,
    Le,
    Ge,
    EqEq,
    Assign,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Semi => "`;`".into(),
            Tok::Le => "`<=`".into(),
            Tok::Ge => "`>=`".into(),
            Tok::EqEq => "`==`".into(),
            Tok::Assign => "`=`".into(),
        }
    }
}

fn tokenize(content: &str, line: usize) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = content.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                return Err(syntax(line, i + 1, "decimal literals are not allowed; write p/q"));
            }
            let digits: String = chars[start..i].iter().collect();
            out.push((Tok::Num(digits.parse().expect("ascii digits")), column));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), column));
            continue;
        }
        let next = chars.get(i + 1).copied();
        let (tok, width) = match (c, next) {
            ('<', Some('=')) => (Tok::Le, 2),
            ('>', Some('=')) => (Tok::Ge, 2),
            ('=', Some('=')) => (Tok::EqEq, 2),
            ('<', _) | ('>', _) => {
                return Err(syntax(line, column, "strict inequalities are not supported"))
            }
            ('=', _) => (Tok::Assign, 1),
            ('+', _) => (Tok::Plus, 1),
            ('-', _) => (Tok::Minus, 1),
            ('*', _) => (Tok::Star, 1),
            ('/', _) => (Tok::Slash, 1),
            ('(', _) => (Tok::LParen, 1),
            (')', _) => (Tok::RParen, 1),
            (',', _) => (Tok::Comma, 1),
            (';', _) => (Tok::Semi, 1),
            _ => return Err(syntax(line, column, &format!("unexpected character `{c}`"))),
        };
        out.push((tok, column));
        i += width;
    }
    Ok(out)
}

struct LineParser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    line: usize,
    program: &'a Program,
}

impl LineParser<'_> {
    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn column(&self) -> usize {
        match self.tokens.get(self.pos) {
            Some((_, c)) => *c,
            None => self.tokens.last().map_or(1, |(_, c)| c + 1),
        }
    }

    fn error_here(&self, expected: &str) -> ParseError {
        let found = self
            .peek()
            .map_or_else(|| "end of line".to_string(), Tok::describe);
        syntax(self.line, self.column(), &format!("expected {expected}, found {found}"))
    }

    fn expect(&mut self, tok: &Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(tok) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error_here(what))
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize), ParseError> {
        match self.tokens.get(self.pos) {
            Some((Tok::Ident(s), c)) => {
                let out = (s.clone(), *c);
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.error_here(what)),
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.error_here("end of line"))
        }
    }

    fn relation(&mut self, allowed: &[Relation]) -> Result<Relation, ParseError> {
        let rel = match self.peek() {
            Some(Tok::Le) => Relation::Le,
            Some(Tok::Ge) => Relation::Ge,
            Some(Tok::EqEq) => Relation::Eq,
            _ => return Err(self.error_here(&relation_list(allowed))),
        };
        if !allowed.contains(&rel) {
            return Err(self.error_here(&relation_list(allowed)));
        }
        self.pos += 1;
        Ok(rel)
    }

    fn affine(&mut self) -> Result<AffineExpr, ParseError> {
        let column = self.column();
        match self.expr()? {
            BoundExpr::Affine(a) => Ok(a),
            _ => Err(syntax(
                self.line,
                column,
                "max/min/if are only allowed in bound expressions",
            )),
        }
    }

    // expr := term (('+' | '-') term)*
    fn expr(&mut self) -> Result<BoundExpr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.plus(&self.term()?);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.plus(&self.term()?.times(&minus_one()));
                }
                _ => return Ok(acc),
            }
        }
    }

    // term := unary (('*' | '/') unary)*
    fn term(&mut self) -> Result<BoundExpr, ParseError> {
        let mut acc = self.unary()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => Tok::Star,
                Some(Tok::Slash) => Tok::Slash,
                _ => return Ok(acc),
            };
            let column = self.column();
            self.pos += 1;
            let rhs = self.unary()?;
            acc = match op {
                Tok::Star => match (constant_of(&acc), constant_of(&rhs)) {
                    (Some(c), _) => rhs.times(&c),
                    (_, Some(c)) => acc.times(&c),
                    _ => return Err(syntax(self.line, column, "nonlinear term: product of two variable expressions")),
                },
                _ => match constant_of(&rhs) {
                    Some(c) if c.is_zero() => return Err(syntax(self.line, column, "division by zero")),
                    Some(c) => acc.times(&c.recip()),
                    None => return Err(syntax(self.line, column, "division by a variable expression")),
                },
            };
        }
    }

    fn unary(&mut self) -> Result<BoundExpr, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(self.unary()?.times(&minus_one()))
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<BoundExpr, ParseError> {
        let Some((tok, column)) = self.tokens.get(self.pos).cloned() else {
            return Err(self.error_here("an expression"));
        };
        match tok {
            Tok::Num(n) => {
                self.pos += 1;
                Ok(BoundExpr::Affine(AffineExpr::constant(Rational::from_integer(n))))
            }
            Tok::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "max" || name == "min" => {
                self.pos += 1;
                self.expect(&Tok::LParen, "`(`")?;
                let mut children = vec![self.expr()?];
                while self.peek() == Some(&Tok::Comma) {
                    self.pos += 1;
                    children.push(self.expr()?);
                }
                self.expect(&Tok::RParen, "`,` or `)`")?;
                if children.len() < 2 {
                    return Err(syntax(self.line, column, &format!("`{name}` needs at least two arguments")));
                }
                Ok(if name == "max" {
                    BoundExpr::Max(children)
                } else {
                    BoundExpr::Min(children)
                })
            }
            Tok::Ident(name) if name == "if" => {
                self.pos += 1;
                self.expect(&Tok::LParen, "`(`")?;
                let lhs = self.affine()?;
                let relation = self.relation(&[Relation::Le])?;
                let rhs = self.affine()?;
                self.expect(&Tok::Semi, "`;`")?;
                let then = self.expr()?;
                self.expect(&Tok::Semi, "`;`")?;
                let otherwise = self.expr()?;
                self.expect(&Tok::RParen, "`)`")?;
                Ok(BoundExpr::If {
                    condition: AffineInequality::new(lhs, relation, rhs),
                    then: Box::new(then),
                    otherwise: Box::new(otherwise),
                })
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if let Some(value) = self.program.constants.get(&name) {
                    Ok(BoundExpr::Affine(AffineExpr::constant(value.clone())))
                } else if self.program.variables.contains(&name) {
                    Ok(BoundExpr::Affine(AffineExpr::var(&name)))
                } else {
                    Err(ParseError::Undeclared {
                        line: self.line,
                        column,
                        name,
                    })
                }
            }
            _ => Err(self.error_here("an expression")),
        }
    }
}

fn relation_list(allowed: &[Relation]) -> String {
    allowed
        .iter()
        .map(|r| format!("`{}`", r.symbol()))
        .collect::<Vec<_>>()
        .join(" or ")
}

fn constant_of(e: &BoundExpr) -> Option<Rational> {
    match e {
        BoundExpr::Affine(a) if a.is_constant() => Some(a.constant_term().clone()),
        _ => None,
    }
}

fn minus_one() -> Rational {
    Rational::from_integer((-1).into())
}
