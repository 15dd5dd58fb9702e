use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gcsl_cli::report::parse_records;
use gcsl_core::smc::Decision;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn gcsl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gcsl"))
        .args(args)
        .env_remove("GCSL_SEED")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli");
    fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn translate_matches_golden_file() {
    let o = gcsl(&[
        "translate",
        "--model", p(&fixture("fire.sosm")),
        "--contract", p(&fixture("req3.gcsl")),
        "--time-bound", "7months",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), fs::read_to_string(fixture("req3_7months.bltl")).unwrap());
}

#[test]
fn inconsistent_time_bound_is_an_error() {
    let o = gcsl(&[
        "translate",
        "--model", p(&fixture("fire.sosm")),
        "--contract", p(&fixture("req3.gcsl")),
        "--time-bound", "4months",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("a <= b <= k"), "{}", stderr(&o));
}

#[test]
fn missing_time_bound_names_the_flag() {
    let o = gcsl(&["check", "--model", p(&fixture("coin.sosm")), "--contract", p(&fixture("coin.gcsl"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--time-bound"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = gcsl(&["simulate", "--modle", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn check_reports_records() {
    let o = gcsl(&[
        "check",
        "--model", p(&fixture("fire.sosm")),
        "--contract", p(&fixture("reqs.gcsl")),
        "--time-bound", "4months",
        "--mode", "fixed:20",
        "--seed", "42",
        "--format", "records",
    ]);
    let code = o.status.code().unwrap();
    assert!(code == 0 || code == 1, "{}", stderr(&o));
    let records = parse_records(&stdout(&o)).unwrap();
    assert_eq!(records.len(), 2);
    assert_eq!(records[0].contract, "StationSpread");
    assert_eq!(records[0].successes, 20);
    assert_eq!(records[1].runs, 20);
    assert_eq!(records[1].seed, 42);
}

#[test]
fn text_report_shows_percentages() {
    let o = gcsl(&[
        "check",
        "--model", p(&fixture("fire.sosm")),
        "--contract", p(&fixture("req1.gcsl")),
        "--time-bound", "1day",
        "--mode", "fixed:5",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("P = 100 % >= 100 %"), "{}", stdout(&o));
}

#[test]
fn estimate_close_to_threshold_is_undecided() {
    let o = gcsl(&[
        "check",
        "--model", p(&fixture("coin.sosm")),
        "--contract", p(&fixture("coin.gcsl")),
        "--time-bound", "1s",
        "--mode", "chernoff:0.05,0.05",
        "--seed", "3",
        "--format", "records",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}{}", stdout(&o), stderr(&o));
    assert_eq!(parse_records(&stdout(&o)).unwrap()[0].decision, Decision::Undecided);
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let cfg = scratch("check.toml");
    fs::write(&cfg, "time-bound = \"1s\"\nmode = \"fixed:7\"\nseed = 5\nformat = \"records\"\n").unwrap();
    let (model, contract) = (fixture("coin.sosm"), fixture("coin.gcsl"));
    let base = ["check", "--model", p(&model), "--contract", p(&contract), "--config", p(&cfg)];
    let o = gcsl(&base);
    let r = &parse_records(&stdout(&o)).unwrap()[0];
    assert_eq!((r.runs, r.seed), (7, 5));
    let mut args = base.to_vec();
    args.extend(["--seed", "6", "--mode", "fixed:9"]);
    let r = &parse_records(&stdout(&gcsl(&args))).unwrap()[0];
    assert_eq!((r.runs, r.seed), (9, 6));

    fs::write(&cfg, "tim-bound = \"1s\"\n").unwrap();
    let o = gcsl(&base);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn seed_comes_from_the_environment() {
    let out = |env: Option<&str>, extra: &[&str]| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_gcsl"));
        c.args(["simulate", "--model", p(&fixture("coin.sosm")), "--horizon", "20s"]).args(extra);
        match env {
            Some(v) => c.env("GCSL_SEED", v),
            None => c.env_remove("GCSL_SEED"),
        };
        c.output().unwrap().stdout
    };
    assert_eq!(out(Some("17"), &[]), out(None, &["--seed", "17"]));
    assert_ne!(out(Some("17"), &[]), out(None, &["--seed", "18"]));
    assert_eq!(out(Some("17"), &["--seed", "18"]), out(None, &["--seed", "18"]));
}

#[test]
fn simulate_then_monitor() {
    let trace = scratch("fire.jsonl");
    let o = gcsl(&[
        "simulate",
        "--model", p(&fixture("fire.sosm")),
        "--horizon", "7months",
        "--seed", "4",
        "--output", p(&trace),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let o = gcsl(&[
        "monitor",
        "--model", p(&fixture("fire.sosm")),
        "--trace", p(&trace),
        "--contract", p(&fixture("req3.gcsl")),
        "--time-bound", "7months",
    ]);
    let code = o.status.code().unwrap();
    assert!(code == 0 || code == 1, "{}", stderr(&o));
    assert!(stdout(&o).starts_with("CarsUsedTogether: "));

    let formula = scratch("never.bltl");
    fs::write(&formula, "G[<=30] {SoS.itsDistricts->forAll(d | not d.onFire)}").unwrap();
    let o = gcsl(&["monitor", "--model", p(&fixture("fire.sosm")), "--trace", p(&trace), "--formula", p(&formula)]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    if o.status.code() == Some(1) {
        assert!(stdout(&o).contains("at t = "), "{}", stdout(&o));
    }

    fs::write(&formula, "G[<=300] {true}").unwrap();
    let o = gcsl(&["monitor", "--model", p(&fixture("fire.sosm")), "--trace", p(&trace), "--formula", p(&formula)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("trace too short"), "{}", stderr(&o));
}

#[test]
fn monitor_needs_a_model() {
    let o = gcsl(&["monitor", "--trace", "t.jsonl", "--formula", "f.bltl"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--model"));
}

#[test]
fn eval_on_the_initial_state() {
    let o = gcsl(&["eval", "--model", p(&fixture("fire.sosm")), "fireStation_1.hostedFireFightingCars->size()"]);
    assert_eq!(stdout(&o), "3\n");
    let o = gcsl(&["eval", "--model", p(&fixture("fire.sosm")), "district_1.neighbors"]);
    assert_eq!(stdout(&o), "Collection{district_10, district_2}\n");
}

#[test]
fn parse_prints_canonical_form_or_fails() {
    let o = gcsl(&["parse", p(&fixture("req2.gcsl"))]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("Goal: mean(SoS.itsDistricts.fireArea->sum()) <= 0.0001"));
    let o = gcsl(&["parse", "--kind", "pattern", p(&fixture("patterns/d_no_response.gcsl"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("3:37"), "{}", stderr(&o));
}
