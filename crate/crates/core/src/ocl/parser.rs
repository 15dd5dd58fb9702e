use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::time::{TimeSpan, TimeUnit};

use super::ast::{BinOp, Expr, PathOp, Quantifier, Symbol};

const RESERVED: &[&str] = &["and", "or", "not", "implies", "true", "false"];

/// Parses a complete OCL expression.
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut cursor = Cursor::new(text)?;
    let expr = expr(&mut cursor)?;
    if !cursor.at_eof() {
        return Err(cursor.error_expected(&["operator", "end of expression"]));
    }
    Ok(expr)
}

pub(crate) fn expr(c: &mut Cursor) -> Result<Expr> {
    let mut lhs = or_expr(c)?;
    while c.eat_word("implies") {
        let rhs = or_expr(c)?;
        lhs = Expr::binary(BinOp::Implies, lhs, rhs);
    }
    Ok(lhs)
}

fn or_expr(c: &mut Cursor) -> Result<Expr> {
    let mut lhs = and_expr(c)?;
    while c.eat_word("or") {
        let rhs = and_expr(c)?;
        lhs = Expr::binary(BinOp::Or, lhs, rhs);
    }
    Ok(lhs)
}

fn and_expr(c: &mut Cursor) -> Result<Expr> {
    let mut lhs = cmp_expr(c)?;
    while c.eat_word("and") {
        let rhs = cmp_expr(c)?;
        lhs = Expr::binary(BinOp::And, lhs, rhs);
    }
    Ok(lhs)
}

fn cmp_expr(c: &mut Cursor) -> Result<Expr> {
    let lhs = add_expr(c)?;
    let op = match c.peek() {
        Tok::Eq => BinOp::Eq,
        Tok::Ne => BinOp::Ne,
        Tok::Lt => BinOp::Lt,
        Tok::Le => BinOp::Le,
        Tok::Gt => BinOp::Gt,
        Tok::Ge => BinOp::Ge,
        _ => return Ok(lhs),
    };
    c.advance();
    let rhs = add_expr(c)?;
    Ok(Expr::binary(op, lhs, rhs))
}

fn add_expr(c: &mut Cursor) -> Result<Expr> {
    let mut lhs = mul_expr(c)?;
    loop {
        let op = match c.peek() {
            Tok::Plus => BinOp::Add,
            Tok::Minus => BinOp::Sub,
            _ => return Ok(lhs),
        };
        c.advance();
        let rhs = mul_expr(c)?;
        lhs = Expr::binary(op, lhs, rhs);
    }
}

fn mul_expr(c: &mut Cursor) -> Result<Expr> {
    let mut lhs = unary(c)?;
    loop {
        let op = match c.peek() {
            Tok::Star => BinOp::Mul,
            Tok::Slash => BinOp::Div,
            _ => return Ok(lhs),
        };
        c.advance();
        let rhs = unary(c)?;
        lhs = Expr::binary(op, lhs, rhs);
    }
}

fn unary(c: &mut Cursor) -> Result<Expr> {
    if c.eat_word("not") {
        return Ok(Expr::Not(Box::new(unary(c)?)));
    }
    if c.eat(&Tok::Minus) {
        return Ok(Expr::Neg(Box::new(unary(c)?)));
    }
    postfix(c)
}

fn postfix(c: &mut Cursor) -> Result<Expr> {
    let mut e = primary(c)?;
    loop {
        if c.eat(&Tok::Dot) {
            let name = c.expect_ident()?;
            e = Expr::Nav(Box::new(e), name);
        } else if c.eat(&Tok::Arrow) {
            e = collection_op(c, e)?;
        } else {
            return Ok(e);
        }
    }
}

fn collection_op(c: &mut Cursor, source: Expr) -> Result<Expr> {
    let op = c.expect_ident()?;
    let source = Box::new(source);
    match op.as_str() {
        "size" | "sum" => {
            c.expect(&Tok::LParen)?;
            c.expect(&Tok::RParen)?;
            Ok(if op == "size" {
                Expr::Size(source)
            } else {
                Expr::CollSum(source)
            })
        }
        _ if op.eq_ignore_ascii_case("forall") || op == "exists" => {
            let kind = if op == "exists" {
                Quantifier::Exists
            } else {
                Quantifier::ForAll
            };
            c.expect(&Tok::LParen)?;
            let var = match (c.peek().clone(), c.peek_at(1)) {
                (Tok::Ident(name), Tok::Pipe) if !RESERVED.contains(&name.as_str()) => {
                    c.advance();
                    c.advance();
                    Some(name)
                }
                _ => None,
            };
            let body = expr(c)?;
            c.expect(&Tok::RParen)?;
            Ok(Expr::Iterate {
                kind,
                source,
                var,
                body: Box::new(body),
            })
        }
        _ => Err(c.error(format!(
            "unsupported collection operation `{op}` (expected size, sum, forAll or exists)"
        ))),
    }
}

fn primary(c: &mut Cursor) -> Result<Expr> {
    match c.peek().clone() {
        Tok::Int(v) => {
            c.advance();
            Ok(Expr::Int(v))
        }
        Tok::Real(v) => {
            c.advance();
            Ok(Expr::Real(v))
        }
        Tok::Hash => {
            c.advance();
            Ok(Expr::Enum(Symbol::new(&c.expect_ident()?)))
        }
        Tok::LParen => {
            c.advance();
            let e = expr(c)?;
            c.expect(&Tok::RParen)?;
            Ok(e)
        }
        Tok::Ident(name) => {
            let call = matches!(c.peek_at(1), Tok::LParen);
            match name.as_str() {
                "true" => {
                    c.advance();
                    Ok(Expr::Bool(true))
                }
                "false" => {
                    c.advance();
                    Ok(Expr::Bool(false))
                }
                "SoS" => {
                    c.advance();
                    Ok(Expr::Root)
                }
                "self" => {
                    c.advance();
                    Ok(Expr::SelfRef)
                }
                "mean" | "sum" | "prod" if call => {
                    c.advance();
                    c.advance();
                    let inner = expr(c)?;
                    c.expect(&Tok::RParen)?;
                    let op = match name.as_str() {
                        "mean" => PathOp::Mean,
                        "sum" => PathOp::Sum,
                        _ => PathOp::Prod,
                    };
                    Ok(Expr::Path(op, Box::new(inner)))
                }
                "at" if call => {
                    c.advance();
                    c.advance();
                    let inner = expr(c)?;
                    c.expect(&Tok::Comma)?;
                    let time = time_literal(c)?;
                    c.expect(&Tok::RParen)?;
                    Ok(Expr::At(Box::new(inner), time))
                }
                _ if RESERVED.contains(&name.as_str()) => {
                    Err(c.error_expected(&["expression"]))
                }
                _ => {
                    c.advance();
                    Ok(Expr::Name(name))
                }
            }
        }
        _ => Err(c.error_expected(&["expression"])),
    }
}

/// Parses `<number> <unit>` (or a bare `0`) into a normalized span.
pub(crate) fn time_literal(c: &mut Cursor) -> Result<TimeSpan> {
    let amount = match c.peek() {
        Tok::Int(v) => *v as f64,
        Tok::Real(v) => *v,
        _ => return Err(c.error_expected(&["time literal"])),
    };
    c.advance();
    if let Tok::Ident(unit) = c.peek().clone() {
        match TimeUnit::parse(&unit) {
            Ok(unit) => {
                c.advance();
                return Ok(TimeSpan::new(amount, unit));
            }
            Err(err) if !is_keyword_after_time(&unit) => return Err(err),
            Err(_) => {}
        }
    }
    if amount == 0.0 {
        Ok(TimeSpan::ZERO)
    } else {
        Err(Error::UnknownTimeUnit(format!(
            "missing unit after `{amount}` at {}",
            c.location()
        )))
    }
}

fn is_keyword_after_time(word: &str) -> bool {
    matches!(word, "times" | "raises" | "then" | "implies" | "during")
}
