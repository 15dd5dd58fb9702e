use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::ocl::{parse_expr_at, time_literal, Expr, Quantifier};
use crate::time::TimeSpan;

use super::ast::{Contract, Pattern, Property, Threshold, TimeInterval};

/// Deepest allowed nesting, counted separately for property-level
/// quantifiers and for iterators inside one OCL expression.
pub const MAX_NESTING: usize = 2;

/// Parses a document holding one or more contracts.
pub fn parse_contracts(text: &str) -> Result<Vec<Contract>> {
    let mut c = Cursor::new(text)?;
    let mut out = vec![contract(&mut c)?];
    while !c.at_eof() {
        out.push(contract(&mut c)?);
    }
    Ok(out)
}

/// Parses a document that must hold exactly one contract.
pub fn parse_contract(text: &str) -> Result<Contract> {
    let mut c = Cursor::new(text)?;
    let contract = contract(&mut c)?;
    if !c.at_eof() {
        return Err(c.error_expected(&["end of input"]));
    }
    Ok(contract)
}

pub fn parse_property(text: &str) -> Result<Property> {
    let mut c = Cursor::new(text)?;
    let p = checked_property(&mut c)?;
    if !c.at_eof() {
        return Err(c.error_expected(&["end of input"]));
    }
    Ok(p)
}

pub fn parse_pattern(text: &str) -> Result<Pattern> {
    let mut c = Cursor::new(text)?;
    let p = pattern(&mut c)?;
    if !c.at_eof() {
        return Err(c.error_expected(&["end of input"]));
    }
    check_depth(&Property::Pattern(p.clone()))?;
    Ok(p)
}

fn contract(c: &mut Cursor) -> Result<Contract> {
    let mut viewpoints = Vec::new();
    while !c.is_word("contract") {
        match c.peek() {
            Tok::Ident(_) => viewpoints.push(c.expect_ident()?),
            _ => return Err(c.error_expected(&["viewpoint identifier", "`contract`"])),
        }
    }
    c.advance();
    let name = c.expect_ident()?;
    let assumption = if section(c, "Assumption")? {
        Some(checked_property(c)?)
    } else {
        None
    };
    if !section(c, "Goal")? {
        return Err(c.error_expected(&["`Assumption:`", "`Goal:`"]));
    }
    let goal = checked_property(c)?;
    if !section(c, "Confidence")? {
        return Err(c.error_expected(&["`Confidence:`"]));
    }
    let confidence = threshold(c)?;
    Ok(Contract {
        viewpoints,
        name,
        assumption,
        goal,
        confidence,
    })
}

fn section(c: &mut Cursor, keyword: &str) -> Result<bool> {
    if c.is_word(keyword) && matches!(c.peek_at(1), Tok::Colon) {
        c.advance();
        c.advance();
        Ok(true)
    } else {
        Ok(false)
    }
}

fn threshold(c: &mut Cursor) -> Result<Threshold> {
    let value = match c.peek() {
        Tok::Int(v) => *v as f64,
        Tok::Real(v) => *v,
        _ => return Err(c.error_expected(&["percentage", "probability"])),
    };
    c.advance();
    let (threshold, max) = if c.eat(&Tok::Percent) {
        (Threshold::Percent(value), 100.0)
    } else {
        (Threshold::Probability(value), 1.0)
    };
    if !(value > 0.0 && value <= max) {
        return Err(c.error(format!(
            "confidence {value} is outside (0, {max}]"
        )));
    }
    Ok(threshold)
}

fn checked_property(c: &mut Cursor) -> Result<Property> {
    let p = property(c, &mut Vec::new())?;
    check_depth(&p)?;
    Ok(p)
}

fn check_depth(p: &Property) -> Result<()> {
    let depth = p.quantifier_depth();
    if depth > MAX_NESTING {
        return Err(Error::NestingDepth {
            depth,
            limit: MAX_NESTING,
        });
    }
    let exprs: Vec<&Expr> = match innermost(p) {
        Property::Pattern(pat) => pat.propositions(),
        Property::Ocl(e) => vec![e],
        Property::Quantified { .. } => unreachable!(),
    };
    for e in exprs {
        let depth = e.quantifier_depth();
        if depth > MAX_NESTING {
            return Err(Error::NestingDepth {
                depth,
                limit: MAX_NESTING,
            });
        }
    }
    Ok(())
}

fn innermost(p: &Property) -> &Property {
    match p {
        Property::Quantified { body, .. } => innermost(body),
        other => other,
    }
}

fn starts_pattern(c: &Cursor) -> bool {
    c.is_word("whenever") || c.is_word("always") || matches!(c.peek(), Tok::LBracket)
}

fn property(c: &mut Cursor, bound: &mut Vec<String>) -> Result<Property> {
    if starts_pattern(c) {
        return Ok(Property::Pattern(pattern(c)?));
    }
    let start = c.position();
    if let Some((collection, kind, var)) = quantifier_head(c)? {
        if bound.contains(&var) {
            return Err(c.error(format!("variable `{var}` is already bound")));
        }
        bound.push(var.clone());
        let body = property(c, bound);
        bound.pop();
        let body = body?;
        if body.contains_pattern() {
            c.expect(&Tok::RParen)?;
            return Ok(Property::Quantified {
                kind,
                collection,
                var,
                body: Box::new(body),
            });
        }
        c.rewind(start);
    }
    let e = parse_expr_at(c)?;
    check_path_ops(&e).map_err(|msg| c.error(msg))?;
    Ok(Property::Ocl(e))
}

/// Recognizes `path->forAll(v |` and consumes it; restores the cursor and
/// returns `None` on anything else.
fn quantifier_head(c: &mut Cursor) -> Result<Option<(Expr, Quantifier, String)>> {
    let start = c.position();
    let mut source = match c.peek().clone() {
        Tok::Ident(name) if name == "SoS" => Expr::Root,
        Tok::Ident(name) if name == "self" => Expr::SelfRef,
        Tok::Ident(name) => Expr::Name(name),
        _ => return Ok(None),
    };
    c.advance();
    while c.eat(&Tok::Dot) {
        match c.peek().clone() {
            Tok::Ident(name) => {
                c.advance();
                source = Expr::Nav(Box::new(source), name);
            }
            _ => {
                c.rewind(start);
                return Ok(None);
            }
        }
    }
    let kind = if !c.eat(&Tok::Arrow) {
        None
    } else if c.is_word("forall") {
        Some(Quantifier::ForAll)
    } else if c.is_word("exists") {
        Some(Quantifier::Exists)
    } else {
        None
    };
    let (Some(kind), Tok::LParen, Tok::Ident(var), Tok::Pipe) = (
        kind,
        c.peek_at(1).clone(),
        c.peek_at(2).clone(),
        c.peek_at(3).clone(),
    ) else {
        c.rewind(start);
        return Ok(None);
    };
    for _ in 0..4 {
        c.advance();
    }
    Ok(Some((source, kind, var)))
}

/// Path operators are run-level: they may not nest and a comparison may
/// hold at most one of them.
fn check_path_ops(e: &Expr) -> std::result::Result<(), String> {
    match e {
        Expr::Path(_, inner) | Expr::At(inner, _) if inner.has_path_op() => {
            return Err("path operators cannot be nested".into())
        }
        Expr::Binary(op, _, _) if op.is_comparison() && e.path_op_count() > 1 => {
            return Err(format!(
                "a comparison may use at most one path operator, found {}",
                e.path_op_count()
            ))
        }
        _ => {}
    }
    e.children().into_iter().try_for_each(check_path_ops)
}

fn slot(c: &mut Cursor) -> Result<Expr> {
    c.expect(&Tok::LBracket)?;
    let e = parse_expr_at(c)?;
    check_path_ops(&e).map_err(|msg| c.error(msg))?;
    if !c.eat(&Tok::RBracket) {
        return Err(c.error_expected(&["operator", "`]`"]));
    }
    Ok(e)
}

fn count(c: &mut Cursor) -> Result<u64> {
    let bracketed = c.eat(&Tok::LBracket);
    let n = match c.peek() {
        Tok::Int(n) if *n >= 0 => *n as u64,
        _ => return Err(c.error_expected(&["occurrence count"])),
    };
    c.advance();
    if bracketed {
        c.expect(&Tok::RBracket)?;
    }
    Ok(n)
}

fn bound(c: &mut Cursor) -> Result<Option<TimeSpan>> {
    if c.eat(&Tok::Infinity) {
        Ok(None)
    } else {
        Ok(Some(time_literal(c)?))
    }
}

fn interval(c: &mut Cursor) -> Result<TimeInterval> {
    let lo_closed = match c.peek() {
        Tok::LBracket => true,
        Tok::LParen => false,
        _ => return Err(c.error_expected(&["`[`", "`(`"])),
    };
    c.advance();
    let at = c.location();
    let first = bound(c)?;
    let (lo, hi) = if c.eat(&Tok::Minus) || c.eat(&Tok::Comma) {
        (first, bound(c)?)
    } else {
        (Some(TimeSpan::ZERO), first)
    };
    let hi_closed = match c.peek() {
        Tok::RBracket => true,
        Tok::RParen => false,
        _ => return Err(c.error_expected(&["`-`", "`]`", "`)`"])),
    };
    c.advance();
    let lo = lo.ok_or_else(|| {
        Error::InvalidInterval(format!("lower bound at {at} cannot be +inf"))
    })?;
    if matches!(hi, Some(hi) if lo.seconds() > hi.seconds()) {
        return Err(Error::InvalidInterval(format!(
            "interval at {at} has lower bound {lo} above upper bound {}",
            hi.unwrap()
        )));
    }
    Ok(TimeInterval {
        lo,
        hi,
        lo_closed,
        hi_closed,
    })
}

fn during_following(c: &mut Cursor) -> Result<TimeInterval> {
    c.expect_word("during")?;
    c.expect_word("following")?;
    interval(c)
}

fn during(c: &mut Cursor) -> Result<TimeInterval> {
    c.expect_word("during")?;
    interval(c)
}

fn pattern(c: &mut Cursor) -> Result<Pattern> {
    if c.eat_word("always") {
        return Ok(Pattern::Always { prop: slot(c)? });
    }
    if c.eat_word("whenever") {
        let trigger = slot(c)?;
        c.expect_word("occurs")?;
        c.eat(&Tok::Comma);
        let response = slot(c)?;
        if c.eat_word("holds") {
            if c.is_word("during") {
                let interval = during_following(c)?;
                return Ok(Pattern::HoldsDuringFollowing {
                    trigger,
                    response,
                    interval,
                });
            }
            return Ok(Pattern::WheneverHolds { trigger, response });
        }
        if c.eat_word("implies") {
            let consequent = slot(c)?;
            let interval = during_following(c)?;
            return Ok(Pattern::ImpliesDuringFollowing {
                trigger,
                antecedent: response,
                consequent,
                interval,
            });
        }
        if c.eat_word("does") {
            c.expect_word("not")?;
            c.expect_word("occur")?;
            let interval = during_following(c)?;
            return Ok(Pattern::DoesNotOccur {
                trigger,
                response,
                interval,
            });
        }
        if c.eat_word("occurs") {
            c.expect_word("within")?;
            let interval = interval(c)?;
            return Ok(Pattern::OccursWithin {
                trigger,
                response,
                interval,
            });
        }
        return Err(c.error_expected(&["`holds`", "`implies`", "`does`", "`occurs`"]));
    }
    if !matches!(c.peek(), Tok::LBracket) {
        return Err(c.error_expected(&["`whenever`", "`always`", "`[`"]));
    }
    let prop = slot(c)?;
    if c.eat_word("implies") {
        let response = slot(c)?;
        if c.eat_word("holds") {
            c.expect_word("forever")?;
            return Ok(Pattern::HoldsForever {
                trigger: prop,
                response,
            });
        }
        let interval = during_following(c)?;
        return Ok(Pattern::ImpliesDuringFollowing {
            trigger: Expr::Bool(true),
            antecedent: prop,
            consequent: response,
            interval,
        });
    }
    if c.eat_word("occurs") {
        if c.eat_word("at") {
            c.expect_word("most")?;
            let count = count(c)?;
            c.expect_word("times")?;
            let interval = during(c)?;
            return Ok(Pattern::OccursAtMost {
                prop,
                count,
                interval,
            });
        }
        let count = count(c)?;
        c.expect_word("times")?;
        let interval = during(c)?;
        c.expect_word("raises")?;
        let response = slot(c)?;
        return Ok(Pattern::OccursTimesRaises {
            prop,
            count,
            interval,
            response,
        });
    }
    if c.is_word("during") {
        let interval = during(c)?;
        if c.eat_word("raises") {
            let response = slot(c)?;
            return Ok(Pattern::DuringRaises {
                prop,
                interval,
                response,
            });
        }
        c.expect_word("implies")?;
        let first = slot(c)?;
        let first_interval = during(c)?;
        c.expect_word("then")?;
        let second = slot(c)?;
        let second_interval = during(c)?;
        return Ok(Pattern::DuringImpliesThen {
            prop,
            interval,
            first,
            first_interval,
            second,
            second_interval,
        });
    }
    Err(c.error_expected(&["`implies`", "`occurs`", "`during`"]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcsl::PatternKind;
    use crate::time::TimeUnit;

    const REQ1: &str = "SoS.itsDistricts->exists(district | district.containedFireStations->size() > 1) implies SoS.itsDistricts->forAll(district | district.containedFireStations->size() >= 1)";

    const REQ3: &str = "SoS.itsFireStations->forAll(fireStation |
        Whenever [fireStation.hostedFireFightingCars->exists(ffCar | ffCar.isAtFireStation)] occurs,
        [fireStation.hostedFireFightingCars->forall(ffCar | ffCar.isAtFireStation = false)]
        occurs within [6 months])";

    #[test]
    fn minimal_contract() {
        let c = parse_contract("contract C Goal: always [true] Confidence: 90%").unwrap();
        assert_eq!(c.name, "C");
        assert!(c.assumption.is_none());
        assert_eq!(
            c.goal,
            Property::Pattern(Pattern::Always {
                prop: Expr::Bool(true)
            })
        );
        assert_eq!(c.confidence.probability(), 0.9);
    }

    #[test]
    fn structural_requirement_is_an_ocl_property() {
        let p = parse_property(REQ1).unwrap();
        let Property::Ocl(Expr::Binary(op, lhs, rhs)) = &p else {
            panic!("{p:?}")
        };
        assert_eq!(*op, crate::ocl::BinOp::Implies);
        assert!(matches!(**lhs, Expr::Iterate { kind: Quantifier::Exists, .. }));
        assert!(matches!(**rhs, Expr::Iterate { kind: Quantifier::ForAll, .. }));
    }

    #[test]
    fn quantified_occurs_within() {
        let p = parse_property(REQ3).unwrap();
        let Property::Quantified { kind, var, body, .. } = &p else {
            panic!("{p:?}")
        };
        assert_eq!((*kind, var.as_str()), (Quantifier::ForAll, "fireStation"));
        let Property::Pattern(Pattern::OccursWithin { interval, .. }) = body.as_ref() else {
            panic!("{body:?}")
        };
        assert_eq!(interval.lo, TimeSpan::ZERO);
        assert_eq!(interval.hi, Some(TimeSpan::new(6.0, TimeUnit::Month)));
    }

    #[test]
    fn always_is_pattern_c() {
        assert_eq!(parse_pattern("always [x.p]").unwrap().kind(), PatternKind::C);
    }

    #[test]
    fn three_nested_quantifiers_are_rejected() {
        let text = "SoS.a->forAll(x | SoS.b->forAll(y | SoS.c->forAll(z | always [z.p])))";
        assert!(matches!(
            parse_property(text),
            Err(Error::NestingDepth { depth: 3, limit: 2 })
        ));
        let ocl = "always [SoS.a->forAll(x | SoS.b->forAll(y | SoS.c->exists(z | z.p)))]";
        assert!(matches!(
            parse_property(ocl),
            Err(Error::NestingDepth { depth: 3, .. })
        ));
    }

    #[test]
    fn rebinding_a_variable_is_rejected() {
        let text = "SoS.a->forAll(x | SoS.b->exists(x | always [x.p]))";
        assert!(matches!(parse_property(text), Err(Error::Syntax { .. })));
    }

    #[test]
    fn reversed_interval_is_rejected() {
        assert!(matches!(
            parse_pattern("[p.x] during [5 days - 2 days] raises [p.y]"),
            Err(Error::InvalidInterval(_))
        ));
    }

    #[test]
    fn unknown_time_unit() {
        assert!(matches!(
            parse_pattern("[p.x] during [5 fortnights] raises [p.y]"),
            Err(Error::UnknownTimeUnit(_))
        ));
    }

    #[test]
    fn month_count_equals_day_count() {
        let a = parse_pattern("always [p.x]").unwrap();
        assert_eq!(a.kind(), PatternKind::C);
        let x = parse_pattern("[p.x] during [6 months] raises [p.y]").unwrap();
        let y = parse_pattern("[p.x] during [0 - 180 days] raises [p.y]").unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn syntax_error_carries_expected_tokens() {
        let err = parse_contract("contract C Goal: always [true]").unwrap_err();
        let Error::Syntax { expected, .. } = err else {
            panic!("{err:?}")
        };
        assert_eq!(expected, vec!["`Confidence:`"]);
    }

    #[test]
    fn two_path_operators_in_one_comparison() {
        assert!(parse_pattern("always [mean(p.x) <= sum(p.y)]").is_err());
        assert!(parse_pattern("always [mean(at(p.x, 1 day)) <= 1]").is_err());
        assert!(parse_pattern("always [mean(p.x) <= 1 and sum(p.y) > 0]").is_ok());
    }

    #[test]
    fn confidence_bounds() {
        assert!(parse_contract("contract C Goal: always [true] Confidence: 0").is_err());
        assert!(parse_contract("contract C Goal: always [true] Confidence: 101%").is_err());
        assert!(parse_contract("contract C Goal: always [true] Confidence: 1").is_ok());
    }
}
