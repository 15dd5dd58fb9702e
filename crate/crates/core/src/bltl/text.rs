//! Text form of B-LTL formulas.
//!
//! ```text
//! G[<=30]({a.p} => X[<=0] F[<=180] {b.q = false})
//! & occ{c.r}[0,5] >= 2
//! ```
//!
//! Operators by increasing precedence: `=>` (right-associative), `|`, `&`,
//! then the prefix forms `!`, `F[<=k]`, `G[<=k]`, `X[<=k]`. `U[<=k](a, b)`
//! and `W[<=k](a, b)` take two arguments. `[<=k clip]` marks a bound
//! clipped at the end of the trace. State propositions are OCL in braces,
//! optionally with variable bindings to instance indices: `{x.p @ x=3}`.

use std::fmt;

use crate::error::Result;
use crate::lexer::{Cursor, Tok};
use crate::model::InstanceId;
use crate::ocl::{parse_expr_at, Bindings};

use super::ast::{Bound, Formula, OccCmp, RunPred, StatePred};

const IMPLIES: u8 = 1;
const OR: u8 = 2;
const AND: u8 = 3;
const PREFIX: u8 = 4;

fn precedence(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => IMPLIES,
        Formula::Or(_) => OR,
        Formula::And(_) => AND,
        _ => PREFIX,
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[<={}", self.limit)?;
        if self.clip {
            f.write_str(" clip")?;
        }
        f.write_str("]")
    }
}

impl fmt::Display for StatePred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}", self.expr)?;
        for (i, (var, id)) in self.bindings.iter().enumerate() {
            let sep = if i == 0 { " @ " } else { ", " };
            write!(f, "{sep}{var}={}", id.0)?;
        }
        f.write_str("}")
    }
}

impl fmt::Display for RunPred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunPred::Occ {
                prop,
                lo,
                hi,
                cmp,
                n,
            } => {
                let op = match cmp {
                    OccCmp::AtLeast => ">=",
                    OccCmp::AtMost => "<=",
                };
                write!(f, "occ{prop}[{lo},{hi}] {op} {n}")
            }
            RunPred::Path(p) => write!(f, "{p}"),
            RunPred::Split {
                prop,
                lo,
                hi,
                first,
                second,
            } => write!(f, "split[{lo},{hi}]{prop}{first}{second}"),
        }
    }
}

struct Prec<'a>(&'a Formula, u8);

impl fmt::Display for Prec<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if precedence(self.0) < self.1 {
            write!(f, "({})", Prec(self.0, 0))
        } else {
            write_formula(self.0, f)
        }
    }
}

fn join(f: &mut fmt::Formatter<'_>, items: &[Formula], sep: &str, prec: u8) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            f.write_str(sep)?;
        }
        write!(f, "{}", Prec(item, prec))?;
    }
    Ok(())
}

fn write_formula(formula: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::True => f.write_str("true"),
        Formula::False => f.write_str("false"),
        Formula::State(p) => write!(f, "{p}"),
        Formula::Run(r) => write!(f, "{r}"),
        Formula::Not(inner) => write!(f, "!{}", Prec(inner, PREFIX)),
        Formula::And(items) => join(f, items, " & ", PREFIX),
        Formula::Or(items) => join(f, items, " | ", AND),
        Formula::Implies(l, r) => write!(f, "{} => {}", Prec(l, OR), Prec(r, IMPLIES)),
        Formula::F(b, inner) => write!(f, "F{b} {}", Prec(inner, PREFIX)),
        Formula::G(b, inner) => write!(f, "G{b}{}", Prefixed(inner)),
        Formula::X(b, inner) => write!(f, "X{b} {}", Prec(inner, PREFIX)),
        Formula::U(b, l, r) => write!(f, "U{b}({}, {})", Prec(l, 0), Prec(r, 0)),
        Formula::W(b, l, r) => write!(f, "W{b}({}, {})", Prec(l, 0), Prec(r, 0)),
    }
}

/// `G[<=k](body)` reads better with the parentheses glued to the bound.
struct Prefixed<'a>(&'a Formula);

impl fmt::Display for Prefixed<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if precedence(self.0) < PREFIX {
            write!(f, "({})", Prec(self.0, 0))
        } else {
            write!(f, " {}", Prec(self.0, PREFIX))
        }
    }
}

impl fmt::Display for Formula {
    /// A top-level conjunction is printed one conjunct per line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::And(items) => join(f, items, "\n& ", PREFIX),
            other => write_formula(other, f),
        }
    }
}

/// Parses the text form produced by `Display`.
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut c = Cursor::new(text)?;
    let f = implies(&mut c)?;
    if !c.at_eof() {
        return Err(c.error_expected(&["`&`", "`|`", "`=>`", "end of input"]));
    }
    Ok(f)
}

fn implies(c: &mut Cursor) -> Result<Formula> {
    let lhs = or(c)?;
    if c.eat(&Tok::FatArrow) {
        let rhs = implies(c)?;
        return Ok(Formula::implies(lhs, rhs));
    }
    Ok(lhs)
}

fn or(c: &mut Cursor) -> Result<Formula> {
    let mut items = vec![and(c)?];
    while c.eat(&Tok::Pipe) {
        items.push(and(c)?);
    }
    Ok(if items.len() == 1 {
        items.pop().unwrap()
    } else {
        Formula::Or(items)
    })
}

fn and(c: &mut Cursor) -> Result<Formula> {
    let mut items = vec![unary(c)?];
    while c.eat(&Tok::Amp) {
        items.push(unary(c)?);
    }
    Ok(if items.len() == 1 {
        items.pop().unwrap()
    } else {
        Formula::And(items)
    })
}

fn number(c: &mut Cursor) -> Result<f64> {
    let v = match c.peek() {
        Tok::Int(v) => *v as f64,
        Tok::Real(v) => *v,
        _ => return Err(c.error_expected(&["number"])),
    };
    c.advance();
    Ok(v)
}

fn bound(c: &mut Cursor) -> Result<Bound> {
    c.expect(&Tok::LBracket)?;
    c.expect(&Tok::Le)?;
    let limit = number(c)?;
    let clip = c.eat_word("clip");
    c.expect(&Tok::RBracket)?;
    Ok(Bound { limit, clip })
}

fn temporal_word(c: &Cursor) -> Option<char> {
    match c.peek() {
        Tok::Ident(w) if w.len() == 1 && matches!(c.peek_at(1), Tok::LBracket) => {
            let ch = w.chars().next().unwrap();
            "FGXUW".contains(ch).then_some(ch)
        }
        _ => None,
    }
}

fn unary(c: &mut Cursor) -> Result<Formula> {
    if c.eat(&Tok::Bang) {
        return Ok(Formula::not(unary(c)?));
    }
    if let Some(op) = temporal_word(c) {
        c.advance();
        let b = bound(c)?;
        if op == 'U' || op == 'W' {
            c.expect(&Tok::LParen)?;
            let lhs = Box::new(implies(c)?);
            c.expect(&Tok::Comma)?;
            let rhs = Box::new(implies(c)?);
            c.expect(&Tok::RParen)?;
            return Ok(if op == 'U' {
                Formula::U(b, lhs, rhs)
            } else {
                Formula::W(b, lhs, rhs)
            });
        }
        let inner = Box::new(unary(c)?);
        return Ok(match op {
            'F' => Formula::F(b, inner),
            'G' => Formula::G(b, inner),
            _ => Formula::X(b, inner),
        });
    }
    atom(c)
}

fn state_pred(c: &mut Cursor) -> Result<StatePred> {
    c.expect(&Tok::LBrace)?;
    let expr = parse_expr_at(c)?;
    let mut bindings = Bindings::new();
    if c.eat(&Tok::At) {
        loop {
            let var = c.expect_ident()?;
            c.expect(&Tok::Eq)?;
            let id = match c.peek() {
                Tok::Int(v) if *v >= 0 && *v <= u32::MAX as i64 => *v as u32,
                _ => return Err(c.error_expected(&["instance index"])),
            };
            c.advance();
            bindings.insert(var, InstanceId(id));
            if !c.eat(&Tok::Comma) {
                break;
            }
        }
    }
    if !c.eat(&Tok::RBrace) {
        return Err(c.error_expected(&["operator", "`@`", "`}`"]));
    }
    Ok(StatePred { expr, bindings })
}

fn window(c: &mut Cursor) -> Result<(f64, f64)> {
    c.expect(&Tok::LBracket)?;
    let lo = number(c)?;
    c.expect(&Tok::Comma)?;
    let hi = number(c)?;
    c.expect(&Tok::RBracket)?;
    Ok((lo, hi))
}

fn atom(c: &mut Cursor) -> Result<Formula> {
    match c.peek().clone() {
        Tok::LParen => {
            c.advance();
            let f = implies(c)?;
            c.expect(&Tok::RParen)?;
            Ok(f)
        }
        Tok::LBrace => {
            let p = state_pred(c)?;
            Ok(if p.expr.has_path_op() {
                Formula::Run(RunPred::Path(p))
            } else {
                Formula::State(p)
            })
        }
        _ if c.eat_word("true") => Ok(Formula::True),
        _ if c.eat_word("false") => Ok(Formula::False),
        _ if c.is_word("occ") && matches!(c.peek_at(1), Tok::LBrace) => {
            c.advance();
            let prop = state_pred(c)?;
            let (lo, hi) = window(c)?;
            let cmp = if c.eat(&Tok::Ge) {
                OccCmp::AtLeast
            } else if c.eat(&Tok::Le) {
                OccCmp::AtMost
            } else {
                return Err(c.error_expected(&["`>=`", "`<=`"]));
            };
            let n = match c.peek() {
                Tok::Int(v) if *v >= 0 => *v as u64,
                _ => return Err(c.error_expected(&["occurrence count"])),
            };
            c.advance();
            Ok(Formula::Run(RunPred::Occ {
                prop,
                lo,
                hi,
                cmp,
                n,
            }))
        }
        _ if c.is_word("split") && matches!(c.peek_at(1), Tok::LBracket) => {
            c.advance();
            let (lo, hi) = window(c)?;
            let prop = state_pred(c)?;
            let first = state_pred(c)?;
            let second = state_pred(c)?;
            Ok(Formula::Run(RunPred::Split {
                prop,
                lo,
                hi,
                first,
                second,
            }))
        }
        _ => Err(c.error_expected(&["`(`", "`{`", "`true`", "`false`", "`!`", "temporal operator"])),
    }
}
