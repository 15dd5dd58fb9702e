use std::fmt::{self, Display, Write};

use super::ast::{BinOp, Expr};

const UNARY: u8 = 7;
const POSTFIX: u8 = 8;

fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => op.precedence(),
        Expr::Not(_) | Expr::Neg(_) => UNARY,
        Expr::Int(v) if *v < 0 => UNARY,
        Expr::Real(v) if v.is_sign_negative() => UNARY,
        _ => POSTFIX,
    }
}

fn write_real(f: &mut fmt::Formatter<'_>, v: f64) -> fmt::Result {
    // Debug keeps a decimal point (`1.0`) so the literal re-parses as real.
    write!(f, "{v:?}")
}

fn write_child(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Real(v) => write_real(f, *v),
            Expr::Enum(sym) => write!(f, "#{sym}"),
            Expr::Name(name) => f.write_str(name),
            Expr::Root => f.write_str("SoS"),
            Expr::SelfRef => f.write_str("self"),
            Expr::Nav(src, attr) => {
                write_child(f, src, precedence(src) < POSTFIX)?;
                write!(f, ".{attr}")
            }
            Expr::Size(src) => {
                write_child(f, src, precedence(src) < POSTFIX)?;
                f.write_str("->size()")
            }
            Expr::CollSum(src) => {
                write_child(f, src, precedence(src) < POSTFIX)?;
                f.write_str("->sum()")
            }
            Expr::Iterate {
                kind,
                source,
                var,
                body,
            } => {
                write_child(f, source, precedence(source) < POSTFIX)?;
                write!(f, "->{}(", kind.keyword())?;
                if let Some(var) = var {
                    write!(f, "{var} | ")?;
                }
                write!(f, "{body})")
            }
            Expr::Not(inner) => {
                f.write_str("not ")?;
                write_child(f, inner, precedence(inner) < UNARY)
            }
            Expr::Neg(inner) => {
                f.write_char('-')?;
                let parens = precedence(inner) <= UNARY;
                write_child(f, inner, parens)
            }
            Expr::Binary(op, lhs, rhs) => {
                let p = op.precedence();
                let (lp, rp) = if op.is_comparison() {
                    (precedence(lhs) <= p, precedence(rhs) <= p)
                } else {
                    (precedence(lhs) < p, precedence(rhs) <= p)
                };
                write_child(f, lhs, lp)?;
                write!(f, " {} ", op.symbol())?;
                write_child(f, rhs, rp)
            }
            Expr::Path(op, inner) => write!(f, "{}({inner})", op.keyword()),
            Expr::At(inner, time) => write!(f, "at({inner}, {time})"),
        }
    }
}

impl BinOp {
    pub fn is_logical(self) -> bool {
        matches!(self, BinOp::And | BinOp::Or | BinOp::Implies)
    }
}

#[cfg(test)]
mod tests {
    use crate::ocl::parse_expr;

    #[test]
    fn prints_minimal_parentheses() {
        for text in [
            "a.x + 1 * 2 > 3 and not b.y or c.z implies d.w",
            "(a.x + 1) * 2 > 3",
            "a.x - (b.y - c.z) = 0",
            "not (a.p and b.q)",
            "-(-a.x) < 0",
            "SoS.itsDistricts->exists(d | d.containedFireStations->size() > 1) implies SoS.itsDistricts->forAll(d | d.containedFireStations->size() >= 1)",
            "mean(SoS.itsDistricts.fireArea->sum()) <= 0.0001",
            "fs.cars->forAll(isAtFireStation = false)",
            "x.state = #Burning",
            "at(x.p, 3 days) > 1.0",
        ] {
            let e = parse_expr(text).unwrap();
            assert_eq!(e.to_string(), text);
        }
    }

    #[test]
    fn right_nested_operators_keep_parentheses() {
        let e = parse_expr("a.p and (b.q and c.r)").unwrap();
        assert_eq!(parse_expr(&e.to_string()).unwrap(), e);
        assert_eq!(e.to_string(), "a.p and (b.q and c.r)");
    }
}
