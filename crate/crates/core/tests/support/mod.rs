//! Independent reference implementations and random generators shared by
//! the integration tests and the acceptance suite.
#![allow(dead_code)]

use gcsl_core::bltl::{Formula, OccCmp, RunPred, StatePred};
use gcsl_core::gcsl::{parse_property, Pattern, Property};
use gcsl_core::model::{load_model, AttrKind};
use gcsl_core::ocl::{Bindings, Evaluator, Quantifier, RunContext, Value};
use gcsl_core::translate::{translate_pattern, TranslateOptions};
use gcsl_core::{SosModel, StateValuation, TimeSpan, TimedTrace};
use rand::seq::IndexedRandom;
use rand::Rng;

/// Three boolean cells, for the monitor oracle.
pub const CELLS: &str = r#"
time_unit = "s"

[[component]]
name = "Cell"
[[component.attribute]]
name = "p"
kind = "boolean"
[[component.attribute]]
name = "q"
kind = "boolean"

[[instance]]
id = "a"
type = "Cell"
[[instance]]
id = "b"
type = "Cell"
"#;

pub fn cells() -> SosModel {
    load_model(CELLS).unwrap()
}

/// Random trace starting at 0 with strictly increasing times and random
/// boolean attributes.
pub fn random_trace<R: Rng>(rng: &mut R, model: &SosModel, len: usize) -> TimedTrace {
    let kinds = model.slot_kinds();
    let init = model.initial_state();
    let mut t = 0.0;
    let mut samples = Vec::with_capacity(len);
    for i in 0..len {
        if i > 0 {
            t += *[0.5, 1.0, 1.5, 2.0].choose(rng).unwrap();
        }
        let values = kinds
            .iter()
            .enumerate()
            .map(|(slot, kind)| match kind {
                AttrKind::Boolean => Value::Bool(rng.random_bool(0.5)),
                _ => init.value(slot).clone(),
            })
            .collect();
        samples.push(StateValuation::new(t, values));
    }
    TimedTrace::new(samples).unwrap()
}

const ATOMS: [&str; 5] = ["a.p", "a.q", "b.p", "b.q", "a.p = b.q"];
const BOUNDS: [f64; 6] = [0.0, 0.5, 1.0, 1.5, 2.0, 3.0];

fn atom<R: Rng>(rng: &mut R) -> StatePred {
    StatePred::new(gcsl_core::ocl::parse_expr(ATOMS.choose(rng).unwrap()).unwrap())
}

/// Random formula of tree depth at most `depth`.
pub fn random_formula<R: Rng>(rng: &mut R, depth: usize) -> Formula {
    let b = |rng: &mut R| *BOUNDS.choose(rng).unwrap();
    if depth == 0 || rng.random_bool(0.25) {
        return match rng.random_range(0..10) {
            0 => Formula::True,
            1 => Formula::False,
            2 => {
                let lo = b(rng);
                let hi = lo + b(rng);
                Formula::Run(RunPred::Occ {
                    prop: atom(rng),
                    lo,
                    hi,
                    cmp: if rng.random() { OccCmp::AtLeast } else { OccCmp::AtMost },
                    n: rng.random_range(0..3),
                })
            }
            _ => Formula::State(atom(rng)),
        };
    }
    let sub = |rng: &mut R| Box::new(random_formula(rng, depth - 1));
    let bound = |rng: &mut R| {
        let limit = b(rng);
        if rng.random_bool(0.1) {
            gcsl_core::bltl::Bound::clipped(limit)
        } else {
            gcsl_core::bltl::Bound::new(limit)
        }
    };
    match rng.random_range(0..9) {
        0 => Formula::Not(sub(rng)),
        1 => Formula::And(vec![*sub(rng), *sub(rng)]),
        2 => Formula::Or(vec![*sub(rng), *sub(rng)]),
        3 => Formula::Implies(sub(rng), sub(rng)),
        4 => Formula::F(bound(rng), sub(rng)),
        5 => Formula::G(bound(rng), sub(rng)),
        6 => Formula::X(bound(rng), sub(rng)),
        7 => Formula::U(bound(rng), sub(rng), sub(rng)),
        _ => Formula::W(bound(rng), sub(rng), sub(rng)),
    }
}

/// Time the trace must span for every bound of `f` to be observable.
pub fn naive_required(f: &Formula) -> f64 {
    let reach = |b: &gcsl_core::bltl::Bound| if b.clip { 0.0 } else { b.limit };
    match f {
        Formula::True | Formula::False | Formula::State(_) => 0.0,
        Formula::Run(RunPred::Occ { hi, .. }) => *hi,
        Formula::Run(_) => panic!("not generated"),
        Formula::Not(g) => naive_required(g),
        Formula::And(v) | Formula::Or(v) => v.iter().map(naive_required).fold(0.0, f64::max),
        Formula::Implies(a, b) => naive_required(a).max(naive_required(b)),
        Formula::F(b, g) | Formula::G(b, g) | Formula::X(b, g) => reach(b) + naive_required(g),
        Formula::U(b, g, h) | Formula::W(b, g, h) => {
            reach(b) + naive_required(g).max(naive_required(h))
        }
    }
}

fn holds(p: &StatePred, trace: &TimedTrace, i: usize, model: &SosModel) -> bool {
    Evaluator::new(model, &trace.samples()[i])
        .with_bindings(&p.bindings)
        .with_run(RunContext { trace, start: i })
        .eval_bool(&p.expr)
        .unwrap()
}

/// Positions `j >= i` whose time lies within `limit` of position `i`.
fn window(trace: &TimedTrace, i: usize, limit: f64) -> Vec<usize> {
    (i..trace.len())
        .filter(|&j| trace.time(j) <= trace.time(i) + limit)
        .collect()
}

/// Direct recursive evaluation of `f` on the suffix starting at `i`, by
/// enumerating positions. `standard_w` selects `G phi1` for weak until.
pub fn naive_check(f: &Formula, trace: &TimedTrace, i: usize, model: &SosModel, standard_w: bool) -> bool {
    let rec = |g: &Formula, j: usize| naive_check(g, trace, j, model, standard_w);
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::State(p) => holds(p, trace, i, model),
        Formula::Run(RunPred::Occ { prop, lo, hi, cmp, n }) => {
            let t = trace.time(i);
            let first = (0..trace.len()).filter(|&j| trace.time(j) <= t + lo).max().unwrap();
            let mut count = holds(prop, trace, first, model) as u64;
            for j in first + 1..trace.len() {
                if trace.time(j) <= t + hi
                    && holds(prop, trace, j, model)
                    && !holds(prop, trace, j - 1, model)
                {
                    count += 1;
                }
            }
            match cmp {
                OccCmp::AtLeast => count >= *n,
                OccCmp::AtMost => count <= *n,
            }
        }
        Formula::Run(_) => panic!("not generated"),
        Formula::Not(g) => !rec(g, i),
        Formula::And(v) => v.iter().all(|g| rec(g, i)),
        Formula::Or(v) => v.iter().any(|g| rec(g, i)),
        Formula::Implies(a, b) => !rec(a, i) || rec(b, i),
        Formula::F(b, g) => window(trace, i, b.limit).into_iter().any(|j| rec(g, j)),
        Formula::G(b, g) => window(trace, i, b.limit).into_iter().all(|j| rec(g, j)),
        Formula::X(b, g) => rec(g, *window(trace, i, b.limit).last().unwrap()),
        Formula::U(b, g, h) => until(trace, i, b.limit, |j| rec(g, j), |j| rec(h, j)),
        Formula::W(b, g, h) => {
            let keep = if standard_w { g } else { h };
            until(trace, i, b.limit, |j| rec(g, j), |j| rec(h, j))
                || window(trace, i, b.limit).into_iter().all(|j| rec(keep, j))
        }
    }
}

fn until(
    trace: &TimedTrace,
    i: usize,
    limit: f64,
    left: impl Fn(usize) -> bool,
    right: impl Fn(usize) -> bool,
) -> bool {
    window(trace, i, limit)
        .into_iter()
        .any(|j| right(j) && (i..j).all(&left))
}

/// Copies `bindings` into every state predicate of `f`.
pub fn bind(f: &Formula, bindings: &Bindings) -> Formula {
    let sp = |p: &StatePred| StatePred::with_bindings(p.expr.clone(), bindings.clone());
    let b = |g: &Formula| Box::new(bind(g, bindings));
    match f {
        Formula::True => Formula::True,
        Formula::False => Formula::False,
        Formula::State(p) => Formula::State(sp(p)),
        Formula::Run(RunPred::Path(p)) => Formula::Run(RunPred::Path(sp(p))),
        Formula::Run(RunPred::Occ { prop, lo, hi, cmp, n }) => Formula::Run(RunPred::Occ {
            prop: sp(prop),
            lo: *lo,
            hi: *hi,
            cmp: *cmp,
            n: *n,
        }),
        Formula::Run(RunPred::Split { prop, lo, hi, first, second }) => {
            Formula::Run(RunPred::Split {
                prop: sp(prop),
                lo: *lo,
                hi: *hi,
                first: sp(first),
                second: sp(second),
            })
        }
        Formula::Not(g) => Formula::Not(b(g)),
        Formula::And(v) => Formula::And(v.iter().map(|g| bind(g, bindings)).collect()),
        Formula::Or(v) => Formula::Or(v.iter().map(|g| bind(g, bindings)).collect()),
        Formula::Implies(x, y) => Formula::Implies(b(x), b(y)),
        Formula::F(k, g) => Formula::F(*k, b(g)),
        Formula::G(k, g) => Formula::G(*k, b(g)),
        Formula::X(k, g) => Formula::X(*k, b(g)),
        Formula::U(k, g, h) => Formula::U(*k, b(g), b(h)),
        Formula::W(k, g, h) => Formula::W(*k, b(g), b(h)),
    }
}

/// Random model with at most four instances: boxes with two booleans and
/// groups linking some of the boxes.
pub fn random_small_model<R: Rng>(rng: &mut R) -> SosModel {
    let groups = rng.random_range(1..=2);
    let boxes = rng.random_range(1..=4 - groups);
    let mut text = String::from(
        "time_unit = \"day\"\n\n[[component]]\nname = \"Box\"\n\
         [[component.attribute]]\nname = \"p\"\nkind = \"boolean\"\n\
         [[component.attribute]]\nname = \"q\"\nkind = \"boolean\"\n\n\
         [[component]]\nname = \"Group\"\nlinks = [\"members\"]\n\n",
    );
    let box_ids: Vec<String> = (1..=boxes).map(|i| format!("box_{i}")).collect();
    for id in &box_ids {
        text += &format!("[[instance]]\nid = \"{id}\"\ntype = \"Box\"\n\n");
    }
    let mut group_ids = Vec::new();
    for g in 1..=groups {
        let members: Vec<String> = box_ids
            .iter()
            .filter(|_| rng.random_bool(0.6))
            .map(|m| format!("\"{m}\""))
            .collect();
        let id = format!("group_{g}");
        text += &format!(
            "[[instance]]\nid = \"{id}\"\ntype = \"Group\"\nlinks = {{ members = [{}] }}\n\n",
            members.join(", ")
        );
        group_ids.push(format!("\"{id}\""));
    }
    let quoted: Vec<String> = box_ids.iter().map(|b| format!("\"{b}\"")).collect();
    text += &format!(
        "[[collection]]\nname = \"boxes\"\nmembers = [{}]\n\n[[collection]]\nname = \"groups\"\nmembers = [{}]\n",
        quoted.join(", "),
        group_ids.join(", ")
    );
    load_model(&text).unwrap()
}

#[derive(Clone, Copy)]
enum Var<'a> {
    Box(&'a str),
    Group(&'a str),
}

fn proposition<R: Rng>(rng: &mut R, scope: &[Var]) -> String {
    let mut options = vec![
        "box_1.p".to_string(),
        "SoS.boxes->exists(x | x.q)".to_string(),
        "SoS.groups->forAll(g | g.members->size() > 0)".to_string(),
    ];
    for v in scope {
        match v {
            Var::Box(b) => {
                options.push(format!("{b}.p"));
                options.push(format!("{b}.q"));
                options.push(format!("not {b}.p"));
            }
            Var::Group(g) => {
                options.push(format!("{g}.members->exists(m | m.p)"));
                options.push(format!("{g}.members->forAll(m | m.q)"));
                options.push(format!("{g}.members->exists(q)"));
            }
        }
    }
    let one = |rng: &mut R| options.choose(rng).unwrap().clone();
    match rng.random_range(0..4) {
        0 => format!("{} and {}", one(rng), one(rng)),
        1 => format!("{} or {}", one(rng), one(rng)),
        _ => one(rng),
    }
}

fn random_pattern<R: Rng>(rng: &mut R, scope: &[Var]) -> String {
    let mut p = || format!("[{}]", proposition(rng, scope));
    let (p1, p2, p3, p4) = (p(), p(), p(), p());
    let a = rng.random_range(0..=1);
    let b = a + rng.random_range(0..=2);
    let c = rng.random_range(a..=b);
    let n = rng.random_range(0..=2);
    let i = format!("[{a} days - {b} days]");
    match rng.random_range(0..11) {
        0 => format!("whenever {p1} occurs {p2} holds during following {i}"),
        1 => format!("{p1} implies {p2} holds forever"),
        2 => format!("always {p1}"),
        3 => format!("whenever {p1} occurs {p2} holds"),
        4 => format!("whenever {p1} occurs {p2} implies {p3} during following {i}"),
        5 => format!("whenever {p1} occurs {p2} does not occur during following {i}"),
        6 => format!("whenever {p1} occurs {p2} occurs within {i}"),
        7 => format!("{p1} occurs {n} times during {i} raises {p2}"),
        8 => format!("{p1} occurs at most {n} times during {i}"),
        9 => format!("{p1} during {i} raises {p2}"),
        _ => format!(
            "{p1} during {i} implies {p2} during [{a} days - {c} days] then {p4} during [{c} days - {b} days]"
        ),
    }
}

/// Random property text with at most two property-level quantifiers.
pub fn random_property_text<R: Rng>(rng: &mut R) -> String {
    let names = [("b1", "g1"), ("b2", "g2")];
    let mut scope = Vec::new();
    let mut heads = Vec::new();
    for (b, g) in names.iter().take(rng.random_range(0..=2)) {
        let kind = if rng.random() { "forAll" } else { "exists" };
        if rng.random() {
            heads.push(format!("SoS.boxes->{kind}({b} | "));
            scope.push(Var::Box(b));
        } else {
            heads.push(format!("SoS.groups->{kind}({g} | "));
            scope.push(Var::Group(g));
        }
    }
    let body = random_pattern(rng, &scope);
    format!("{}{}{}", heads.concat(), body, ")".repeat(heads.len()))
}

pub fn parse(text: &str) -> Property {
    parse_property(text).unwrap_or_else(|e| panic!("{text}: {e}"))
}

/// Decides `property` by iterating its quantifiers over the collection
/// members and checking each pattern instance with the variables bound.
pub fn direct_verdict(
    property: &Property,
    model: &SosModel,
    trace: &TimedTrace,
    k: TimeSpan,
    bindings: &Bindings,
) -> gcsl_core::Result<bool> {
    match property {
        Property::Quantified { kind, collection, var, body } => {
            let members = Evaluator::new(model, model.initial_state())
                .with_bindings(bindings)
                .eval(collection)?;
            let Value::Collection(items) = members else {
                panic!("collection expected");
            };
            let mut results = Vec::new();
            for item in items {
                let Value::Instance(id) = item else { panic!("instance expected") };
                let mut inner = bindings.clone();
                inner.insert(var.clone(), id);
                results.push(direct_verdict(body, model, trace, k, &inner)?);
            }
            Ok(match kind {
                Quantifier::ForAll => results.into_iter().all(|r| r),
                Quantifier::Exists => results.into_iter().any(|r| r),
            })
        }
        Property::Pattern(p) => pattern_verdict(p, model, trace, k, bindings),
        Property::Ocl(e) => Evaluator::new(model, &trace.samples()[0])
            .with_bindings(bindings)
            .with_run(RunContext { trace, start: 0 })
            .eval_bool(e),
    }
}

fn pattern_verdict(
    p: &Pattern,
    model: &SosModel,
    trace: &TimedTrace,
    k: TimeSpan,
    bindings: &Bindings,
) -> gcsl_core::Result<bool> {
    let f = translate_pattern(p, k, model.time_unit, TranslateOptions::default())?;
    Ok(gcsl_core::bltl::check(&bind(&f, bindings), trace, model)?.holds)
}

/// Runs one pattern fixture: a `-- expect: <outcome>` line, a `-- k: <span>`
/// line and the pattern text. Outcomes are `ok`, `syntax`, `interval`,
/// `nesting` and `inconsistent`.
pub fn run_pattern_fixture(text: &str) -> Result<(), String> {
    let header = |key: &str| {
        text.lines()
            .find_map(|l| l.strip_prefix(&format!("-- {key}: ")))
            .map(str::trim)
            .ok_or(format!("missing `-- {key}:` line"))
    };
    let expect = header("expect")?;
    let k = TimeSpan::parse(header("k")?).map_err(|e| e.to_string())?;
    let outcome = match gcsl_core::gcsl::parse_pattern(text) {
        Err(gcsl_core::Error::Syntax { .. }) => "syntax".to_string(),
        Err(gcsl_core::Error::InvalidInterval(_)) => "interval".to_string(),
        Err(gcsl_core::Error::NestingDepth { .. }) => "nesting".to_string(),
        Err(e) => format!("parse error {e}"),
        Ok(p) => match translate_pattern(&p, k, gcsl_core::TimeUnit::Day, TranslateOptions::default()) {
            Ok(_) => "ok".to_string(),
            Err(gcsl_core::Error::Inconsistent { .. }) => "inconsistent".to_string(),
            Err(e) => format!("translation error {e}"),
        },
    };
    if outcome == expect {
        Ok(())
    } else {
        Err(format!("expected {expect}, got {outcome}"))
    }
}
