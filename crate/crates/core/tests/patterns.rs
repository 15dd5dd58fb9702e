mod support;

use std::fs;
use std::path::Path;

#[test]
fn every_pattern_has_a_valid_and_a_rejected_fixture() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/patterns");
    let mut valid = Vec::new();
    let mut rejected = Vec::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = fs::read_to_string(&path).unwrap();
        support::run_pattern_fixture(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        let letter = path.file_name().unwrap().to_string_lossy().chars().next().unwrap();
        if text.contains("-- expect: ok") {
            valid.push(letter);
        } else {
            rejected.push(letter);
        }
    }
    valid.sort();
    rejected.sort();
    let all: Vec<char> = ('a'..='k').collect();
    assert_eq!(valid, all);
    assert_eq!(rejected, all);
}
