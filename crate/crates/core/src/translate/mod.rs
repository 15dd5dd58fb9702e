//! Contract to B-LTL compilation.
//!
//! Collections are frozen at the initial state, so `forAll` and `exists`
//! become finite conjunctions and disjunctions, both at the property level
//! and inside OCL propositions. Patterns are then mapped to bounded
//! formulas, with the time bound `k` standing in for unbounded horizons.

use crate::bltl::{Bound, Formula, OccCmp, RunPred, StatePred};
use crate::error::{Error, Result};
use crate::gcsl::{Contract, Pattern, PatternKind, Property, TimeInterval};
use crate::model::{InstanceId, SosModel};
use crate::ocl::{Evaluator, Expr, Quantifier, Value};
use crate::time::{TimeSpan, TimeUnit};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TranslateOptions {
    /// Translate "[P] during [a,b] implies [P1] during [a,c] then [P2]
    /// during [c,b]" with an existential split point instead of the fixed `c`.
    pub split_reading: bool,
    /// Keep OCL iterators inside state propositions instead of unfolding them.
    pub keep_ocl_quantifiers: bool,
    /// Remove `X[<=0]` wrappers from the result.
    pub simplify: bool,
}

/// A property with its collection quantifiers expanded.
#[derive(Debug, Clone, PartialEq)]
pub enum Unfolded {
    And(Vec<Unfolded>),
    Or(Vec<Unfolded>),
    Pattern(Pattern),
    Prop(Expr),
}

enum Scope {
    Var(String, InstanceId),
    /// Element of an implicit-iterator body.
    Implicit(InstanceId),
    /// A variable left for the evaluator; hides outer bindings.
    Opaque(Option<String>),
}

struct Unfolder<'a> {
    model: &'a SosModel,
    scopes: Vec<Scope>,
    ocl: bool,
}

/// Expands property-level and OCL quantifiers over the collections of the
/// initial state.
pub fn unfold(property: &Property, model: &SosModel) -> Result<Unfolded> {
    Unfolder {
        model,
        scopes: Vec::new(),
        ocl: true,
    }
    .property(property)
}

/// Expands the `forAll`/`exists` iterators of a closed OCL expression.
pub fn unfold_expr(expr: &Expr, model: &SosModel) -> Result<Expr> {
    Unfolder {
        model,
        scopes: Vec::new(),
        ocl: true,
    }
    .expr(expr)
}

impl Unfolder<'_> {
    fn property(&mut self, p: &Property) -> Result<Unfolded> {
        match p {
            Property::Quantified {
                kind,
                collection,
                var,
                body,
            } => {
                let source = self.expr(collection)?;
                let members = self.instances(&source)?.ok_or_else(|| {
                    Error::Type(format!("`{collection}` is not a collection of instances"))
                })?;
                let mut items = Vec::with_capacity(members.len());
                for id in members {
                    self.scopes.push(Scope::Var(var.clone(), id));
                    let item = self.property(body);
                    self.scopes.pop();
                    items.push(item?);
                }
                Ok(match kind {
                    Quantifier::ForAll => Unfolded::And(items),
                    Quantifier::Exists => Unfolded::Or(items),
                })
            }
            Property::Pattern(pat) => Ok(Unfolded::Pattern(pat.map_propositions(|e| self.expr(e))?)),
            Property::Ocl(e) => Ok(Unfolded::Prop(self.expr(e)?)),
        }
    }

    /// Instances denoted by `source` in the initial state, or `None` when
    /// it denotes plain values.
    fn instances(&self, source: &Expr) -> Result<Option<Vec<InstanceId>>> {
        let value = Evaluator::new(self.model, self.model.initial_state()).eval(source)?;
        let Value::Collection(items) = value else {
            return Err(Error::Type(format!("`{source}` is not a collection")));
        };
        Ok(items
            .into_iter()
            .map(|v| match v {
                Value::Instance(id) => Some(id),
                _ => None,
            })
            .collect())
    }

    fn resolve(&self, name: &str) -> Option<Expr> {
        for scope in self.scopes.iter().rev() {
            match scope {
                Scope::Var(var, id) if var == name => {
                    return Some(Expr::name(self.model.instance_name(*id)))
                }
                Scope::Implicit(id) if self.model.component_of(*id).has_feature(name) => {
                    return Some(Expr::name(self.model.instance_name(*id)).nav(name))
                }
                Scope::Opaque(Some(var)) if var == name => return None,
                _ => {}
            }
        }
        None
    }

    fn expr(&mut self, e: &Expr) -> Result<Expr> {
        let b = |x: Expr| Box::new(x);
        Ok(match e {
            Expr::Name(name) => self.resolve(name).unwrap_or_else(|| e.clone()),
            Expr::Iterate {
                kind,
                source,
                var,
                body,
            } => {
                let source = self.expr(source)?;
                let members = if self.ocl {
                    self.instances(&source)?
                } else {
                    None
                };
                match members {
                    Some(members) => {
                        let mut items = Vec::with_capacity(members.len());
                        for id in members {
                            self.scopes.push(match var {
                                Some(v) => Scope::Var(v.clone(), id),
                                None => Scope::Implicit(id),
                            });
                            let item = self.expr(body);
                            self.scopes.pop();
                            items.push(item?);
                        }
                        match kind {
                            Quantifier::ForAll => Expr::conjunction(items),
                            Quantifier::Exists => Expr::disjunction(items),
                        }
                    }
                    None => {
                        self.scopes.push(Scope::Opaque(var.clone()));
                        let body = self.expr(body);
                        self.scopes.pop();
                        Expr::Iterate {
                            kind: *kind,
                            source: b(source),
                            var: var.clone(),
                            body: b(body?),
                        }
                    }
                }
            }
            Expr::Bool(_)
            | Expr::Int(_)
            | Expr::Real(_)
            | Expr::Enum(_)
            | Expr::Root
            | Expr::SelfRef => e.clone(),
            Expr::Nav(src, name) => Expr::Nav(b(self.expr(src)?), name.clone()),
            Expr::Size(src) => Expr::Size(b(self.expr(src)?)),
            Expr::CollSum(src) => Expr::CollSum(b(self.expr(src)?)),
            Expr::Not(x) => Expr::Not(b(self.expr(x)?)),
            Expr::Neg(x) => Expr::Neg(b(self.expr(x)?)),
            Expr::Binary(op, l, r) => Expr::Binary(*op, b(self.expr(l)?), b(self.expr(r)?)),
            Expr::Path(op, x) => Expr::Path(*op, b(self.expr(x)?)),
            Expr::At(x, t) => Expr::At(b(self.expr(x)?), *t),
        })
    }
}

/// Interval endpoints in base units; `+inf` becomes `k`.
fn endpoints(i: &TimeInterval, k: f64, unit: TimeUnit) -> (f64, f64) {
    (
        i.lo.in_unit(unit),
        i.hi.map_or(k, |hi| hi.in_unit(unit)),
    )
}

fn inconsistent(kind: PatternKind, condition: &str, detail: String) -> Error {
    Error::Inconsistent {
        pattern: format!("{}: {}", kind.letter(), kind.template()),
        condition: condition.into(),
        detail,
    }
}

/// Checks `a <= b` and, when `k` is given, `b <= k`.
fn ordered(kind: PatternKind, a: f64, b: f64, k: Option<f64>) -> Result<()> {
    let ok = a <= b && k.is_none_or(|k| b <= k);
    if ok {
        return Ok(());
    }
    Err(match k {
        Some(k) => inconsistent(kind, "a <= b <= k", format!("a = {a}, b = {b}, k = {k}")),
        None => inconsistent(kind, "a <= b", format!("a = {a}, b = {b}")),
    })
}

fn sp(e: &Expr) -> Formula {
    Formula::state(e.clone())
}

fn pred(e: &Expr) -> StatePred {
    StatePred::new(e.clone())
}

/// Maps one pattern to its bounded formula. `k` is the simulation horizon.
pub fn translate_pattern(
    pattern: &Pattern,
    k: TimeSpan,
    unit: TimeUnit,
    options: TranslateOptions,
) -> Result<Formula> {
    let kind = pattern.kind();
    let k = k.in_unit(unit);
    #[allow(clippy::neg_cmp_op_on_partial_ord)] // also rejects NaN
    if !(k > 0.0) {
        return Err(Error::InvalidInterval(format!("time bound k = {k} must be positive")));
    }
    let interval = |i: &TimeInterval| endpoints(i, k, unit);
    Ok(match pattern {
        Pattern::Always { prop } => Formula::g(k, sp(prop)),
        Pattern::WheneverHolds { trigger, response } => {
            Formula::g(k, Formula::implies(sp(trigger), sp(response)))
        }
        Pattern::HoldsForever { trigger, response } => Formula::g(
            k,
            Formula::implies(
                sp(trigger),
                Formula::G(Bound::clipped(k), Box::new(sp(response))),
            ),
        ),
        Pattern::HoldsDuringFollowing {
            trigger,
            response,
            interval: i,
        } => {
            let (a, b) = interval(i);
            ordered(kind, a, b, Some(k))?;
            Formula::g(
                k - b,
                Formula::implies(sp(trigger), Formula::x(a, Formula::g(b - a, sp(response)))),
            )
        }
        Pattern::ImpliesDuringFollowing {
            trigger,
            antecedent,
            consequent,
            interval: i,
        } => {
            let (a, b) = interval(i);
            let body = Formula::implies(sp(antecedent), sp(consequent));
            if *trigger == Expr::Bool(true) {
                ordered(kind, a, b, None)?;
                Formula::x(a, Formula::g(b - a, body))
            } else {
                ordered(kind, a, b, Some(k))?;
                Formula::g(
                    k - b,
                    Formula::implies(sp(trigger), Formula::x(a, Formula::g(b - a, body))),
                )
            }
        }
        Pattern::DoesNotOccur {
            trigger,
            response,
            interval: i,
        } => {
            let (a, b) = interval(i);
            ordered(kind, a, b, Some(k))?;
            Formula::g(
                k - b,
                Formula::implies(
                    sp(trigger),
                    Formula::x(a, Formula::g(b - a, Formula::not(sp(response)))),
                ),
            )
        }
        Pattern::OccursWithin {
            trigger,
            response,
            interval: i,
        } => {
            let (a, b) = interval(i);
            ordered(kind, a, b, Some(k))?;
            Formula::g(
                k - b,
                Formula::implies(sp(trigger), Formula::x(a, Formula::f(b - a, sp(response)))),
            )
        }
        Pattern::OccursTimesRaises {
            prop,
            count,
            interval: i,
            response,
        } => {
            let (a, b) = interval(i);
            ordered(kind, a, b, Some(k))?;
            Formula::implies(
                Formula::Run(RunPred::Occ {
                    prop: pred(prop),
                    lo: a,
                    hi: b,
                    cmp: OccCmp::AtLeast,
                    n: *count,
                }),
                Formula::x(b, Formula::f(k - b, sp(response))),
            )
        }
        Pattern::OccursAtMost {
            prop,
            count,
            interval: i,
        } => {
            let (a, b) = interval(i);
            ordered(kind, a, b, None)?;
            Formula::Run(RunPred::Occ {
                prop: pred(prop),
                lo: a,
                hi: b,
                cmp: OccCmp::AtMost,
                n: *count,
            })
        }
        Pattern::DuringRaises {
            prop,
            interval: i,
            response,
        } => {
            let (a, b) = interval(i);
            ordered(kind, a, b, Some(k))?;
            Formula::implies(
                Formula::x(a, Formula::g(b - a, sp(prop))),
                Formula::x(b, sp(response)),
            )
        }
        Pattern::DuringImpliesThen {
            prop,
            interval: i,
            first,
            first_interval,
            second,
            second_interval,
        } => {
            let (a, b) = interval(i);
            let (a1, c) = interval(first_interval);
            let (c2, b2) = interval(second_interval);
            if a1 != a || b2 != b || c2 != c {
                return Err(inconsistent(
                    kind,
                    "[a,c] and [c,b] split [a,b]",
                    format!("[{a},{b}] vs [{a1},{c}] and [{c2},{b2}]"),
                ));
            }
            if !(a <= c && c <= b) {
                return Err(inconsistent(
                    kind,
                    "a <= c <= b",
                    format!("a = {a}, c = {c}, b = {b}"),
                ));
            }
            if options.split_reading {
                Formula::Run(RunPred::Split {
                    prop: pred(prop),
                    lo: a,
                    hi: b,
                    first: pred(first),
                    second: pred(second),
                })
            } else {
                Formula::implies(
                    Formula::x(a, Formula::g(b - a, sp(prop))),
                    Formula::and(vec![
                        Formula::x(a, Formula::g(c - a, sp(first))),
                        Formula::x(c, Formula::g(b - c, sp(second))),
                    ]),
                )
            }
        }
    })
}

fn translate_unfolded(
    u: &Unfolded,
    k: TimeSpan,
    unit: TimeUnit,
    options: TranslateOptions,
) -> Result<Formula> {
    let all = |items: &[Unfolded]| {
        items
            .iter()
            .map(|i| translate_unfolded(i, k, unit, options))
            .collect::<Result<Vec<_>>>()
    };
    Ok(match u {
        Unfolded::And(items) => Formula::and(all(items)?),
        Unfolded::Or(items) => Formula::or(all(items)?),
        Unfolded::Pattern(p) => translate_pattern(p, k, unit, options)?,
        // Pattern-free propositions are decided at the initial state, or
        // over the whole run when they use path operators.
        Unfolded::Prop(e) => sp(e),
    })
}

/// Translates an assumption or goal.
pub fn translate_property(
    property: &Property,
    model: &SosModel,
    k: TimeSpan,
    options: TranslateOptions,
) -> Result<Formula> {
    let unfolded = Unfolder {
        model,
        scopes: Vec::new(),
        ocl: !options.keep_ocl_quantifiers,
    }
    .property(property)?;
    let f = translate_unfolded(&unfolded, k, model.time_unit, options)?;
    Ok(if options.simplify { f.simplify() } else { f })
}

/// `A' => G'`, or `G'` alone when the contract has no assumption.
pub fn translate_contract(
    contract: &Contract,
    model: &SosModel,
    k: TimeSpan,
    options: TranslateOptions,
) -> Result<Formula> {
    let goal = translate_property(&contract.goal, model, k, options)?;
    match &contract.assumption {
        None => Ok(goal),
        Some(a) => Ok(Formula::implies(
            translate_property(a, model, k, options)?,
            goal,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcsl::{parse_contract, parse_pattern, parse_property};
    use crate::model::load_model;

    const MODEL: &str = r#"
time_unit = "day"

[[component]]
name = "Station"
links = ["cars"]

[[component]]
name = "Car"
[[component.attribute]]
name = "home"
kind = "boolean"

[[instance]]
id = "s1"
type = "Station"
links = { cars = ["c1", "c2"] }

[[instance]]
id = "s2"
type = "Station"
links = { cars = ["c3"] }

[[instance]]
id = "c1"
type = "Car"
[[instance]]
id = "c2"
type = "Car"
[[instance]]
id = "c3"
type = "Car"

[[collection]]
name = "stations"
members = ["s1", "s2"]

[[collection]]
name = "none"
members = []
"#;

    fn model() -> SosModel {
        load_model(MODEL).unwrap()
    }

    fn days(n: f64) -> TimeSpan {
        TimeSpan::new(n, TimeUnit::Day)
    }

    fn tr(text: &str, k: f64) -> Result<Formula> {
        translate_property(
            &parse_property(text).unwrap(),
            &model(),
            days(k),
            TranslateOptions::default(),
        )
    }

    #[test]
    fn forall_over_stations_is_a_conjunction() {
        let f = tr(
            "SoS.stations->forAll(s | whenever [s.cars->exists(home)] occurs [s.cars->forAll(c | c.home = false)] occurs within [5 days])",
            7.0,
        )
        .unwrap();
        assert_eq!(
            f.to_string(),
            "G[<=2]({c1.home or c2.home} => X[<=0] F[<=5] {c1.home = false and c2.home = false})\n\
             & G[<=2]({c3.home} => X[<=0] F[<=5] {c3.home = false})"
        );
    }

    #[test]
    fn empty_quantifiers() {
        assert_eq!(tr("SoS.none->forAll(s | always [s.home])", 1.0).unwrap(), Formula::True);
        assert_eq!(tr("SoS.none->exists(s | always [s.home])", 1.0).unwrap(), Formula::False);
        assert_eq!(
            unfold_expr(&crate::ocl::parse_expr("SoS.none->exists(x | x.home)").unwrap(), &model())
                .unwrap(),
            Expr::Bool(false)
        );
    }

    #[test]
    fn always_with_k_10() {
        assert_eq!(tr("always [c1.home]", 10.0).unwrap().to_string(), "G[<=10] {c1.home}");
    }

    #[test]
    fn inconsistent_interval_names_the_condition() {
        let p = parse_pattern("whenever [c1.home] occurs [c2.home] occurs within [5 days - 3 days]");
        // Reversed intervals are already rejected by the parser.
        assert!(matches!(p, Err(Error::InvalidInterval(_))));
        let p = parse_pattern("whenever [c1.home] occurs [c2.home] occurs within [3 days - 5 days]")
            .unwrap();
        let err = translate_pattern(&p, days(4.0), TimeUnit::Day, TranslateOptions::default())
            .unwrap_err();
        assert!(
            matches!(&err, Error::Inconsistent { condition, .. } if condition == "a <= b <= k"),
            "{err}"
        );
    }

    #[test]
    fn contract_composition() {
        let c = parse_contract(
            "contract C Assumption: always [c1.home] Goal: always [c2.home] Confidence: 0.5",
        )
        .unwrap();
        let f = translate_contract(&c, &model(), days(3.0), TranslateOptions::default()).unwrap();
        assert_eq!(f.to_string(), "G[<=3] {c1.home} => G[<=3] {c2.home}");
    }

    #[test]
    fn shadowed_names_are_left_alone() {
        let e = crate::ocl::parse_expr("SoS.stations->forAll(s | s.cars->exists(s | s.home))").unwrap();
        let u = unfold_expr(&e, &model()).unwrap();
        assert_eq!(u.to_string(), "(c1.home or c2.home) and c3.home");
    }

    #[test]
    fn split_reading_and_simplify() {
        let p = parse_pattern(
            "[c1.home] during [1 day - 4 days] implies [c2.home] during [1 day - 2 days] then [c3.home] during [2 days - 4 days]",
        )
        .unwrap();
        let fixed = translate_pattern(&p, days(5.0), TimeUnit::Day, TranslateOptions::default()).unwrap();
        assert_eq!(
            fixed.to_string(),
            "X[<=1] G[<=3] {c1.home} => X[<=1] G[<=1] {c2.home} & X[<=2] G[<=2] {c3.home}"
        );
        let opts = TranslateOptions {
            split_reading: true,
            ..Default::default()
        };
        let split = translate_pattern(&p, days(5.0), TimeUnit::Day, opts).unwrap();
        assert_eq!(split.to_string(), "split[1,4]{c1.home}{c2.home}{c3.home}");
        let g = parse_pattern("whenever [c1.home] occurs [c2.home] occurs within [2 days]").unwrap();
        let opts = TranslateOptions {
            simplify: true,
            ..Default::default()
        };
        let f = translate_pattern(&g, days(5.0), TimeUnit::Day, opts).unwrap();
        assert_eq!(f.simplify().to_string(), "G[<=3]({c1.home} => F[<=2] {c2.home})");
    }
}
