use gcsl_core::bltl::{occ, run_aggregate, StatePred};
use gcsl_core::model::load_model;
use gcsl_core::ocl::{parse_expr, PathOp, Value};
use gcsl_core::{Error, SosModel, StateValuation, TimedTrace};
use proptest::prelude::*;

fn gauge() -> SosModel {
    load_model(
        r#"
time_unit = "s"
[[component]]
name = "Gauge"
[[component.attribute]]
name = "on"
kind = "boolean"
[[component.attribute]]
name = "level"
kind = "real"
[[instance]]
id = "g"
type = "Gauge"
"#,
    )
    .unwrap()
}

fn trace(points: &[(f64, bool, f64)]) -> TimedTrace {
    TimedTrace::new(
        points
            .iter()
            .map(|&(t, on, level)| StateValuation::new(t, vec![Value::Bool(on), Value::Real(level)]))
            .collect(),
    )
    .unwrap()
}

fn on() -> StatePred {
    StatePred::new(parse_expr("g.on").unwrap())
}

#[test]
fn two_separate_episodes_count_twice() {
    // Holds on the first two samples, drops, then holds again once.
    let m = gauge();
    let tr = trace(&[(0.0, true, 0.0), (1.0, true, 0.0), (2.0, false, 0.0), (3.0, true, 0.0), (4.0, false, 0.0)]);
    assert_eq!(occ(&on(), 0.0, 4.0, &tr, 0, &m).unwrap(), 2);
}

#[test]
fn one_episode_in_every_sub_window() {
    let m = gauge();
    let tr = trace(&[(0.0, false, 0.0), (1.0, true, 0.0), (2.0, true, 0.0), (3.0, true, 0.0), (4.0, false, 0.0)]);
    assert_eq!(occ(&on(), 1.0, 3.0, &tr, 0, &m).unwrap(), 1);
    assert_eq!(occ(&on(), 1.0, 2.0, &tr, 0, &m).unwrap(), 1);
    assert_eq!(occ(&on(), 2.0, 3.0, &tr, 0, &m).unwrap(), 1);
}

#[test]
fn never_holding_counts_zero() {
    let m = gauge();
    let tr = trace(&[(0.0, false, 0.0), (5.0, false, 0.0)]);
    assert_eq!(occ(&on(), 0.0, 5.0, &tr, 0, &m).unwrap(), 0);
}

#[test]
fn windows_are_relative_to_the_suffix() {
    let m = gauge();
    let tr = trace(&[(0.0, true, 0.0), (1.0, false, 0.0), (2.0, true, 0.0), (3.0, false, 0.0)]);
    assert_eq!(occ(&on(), 0.0, 1.0, &tr, 1, &m).unwrap(), 1);
    assert!(matches!(occ(&on(), 0.0, 3.0, &tr, 1, &m), Err(Error::OutOfRange { .. })));
}

#[test]
fn aggregates_of_known_values() {
    let m = gauge();
    let level = parse_expr("g.level").unwrap();
    let tr = trace(&[(0.0, false, 7.0), (1.0, false, 7.0), (4.0, false, 7.0)]);
    assert_eq!(run_aggregate(PathOp::Mean, &level, &tr, (0.0, 4.0), &m).unwrap(), 7.0);
    let tr = trace(&[(0.0, false, 1.0), (1.0, false, 2.0), (4.0, false, 3.0)]);
    assert_eq!(run_aggregate(PathOp::Sum, &level, &tr, (0.0, 4.0), &m).unwrap(), 6.0);
    assert_eq!(run_aggregate(PathOp::Prod, &level, &tr, (0.5, 4.0), &m).unwrap(), 6.0);
    assert!(matches!(
        run_aggregate(PathOp::Mean, &level, &tr, (1.5, 3.5), &m),
        Err(Error::Eval(_))
    ));
}

proptest! {
    #[test]
    fn aggregates_match_a_fold(
        levels in prop::collection::vec(-10.0f64..10.0, 1..12),
        lo in 0usize..12,
        width in 0usize..12,
    ) {
        let m = gauge();
        let points: Vec<_> = levels.iter().enumerate().map(|(i, &l)| (i as f64, false, l)).collect();
        let tr = trace(&points);
        let level = parse_expr("g.level").unwrap();
        let window = (lo as f64, (lo + width) as f64);
        let inside: Vec<f64> = levels.iter().enumerate()
            .filter(|(i, _)| *i >= lo && *i <= lo + width)
            .map(|(_, &l)| l)
            .collect();
        let sum = run_aggregate(PathOp::Sum, &level, &tr, window, &m).unwrap();
        prop_assert!((sum - inside.iter().sum::<f64>()).abs() < 1e-9);
        let mean = run_aggregate(PathOp::Mean, &level, &tr, window, &m);
        if inside.is_empty() {
            prop_assert!(mean.is_err());
        } else {
            let want = inside.iter().sum::<f64>() / inside.len() as f64;
            prop_assert!((mean.unwrap() - want).abs() < 1e-9);
        }
    }
}
