//! Check reports, as human-readable text or as `key=value` records.
//!
//! A records document holds one block per contract, blocks separated by a
//! blank line. Lines starting with `#` are comments.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use gcsl_core::smc::{Decision, Mode, Relation, Report};

/// Flat view of one contract's outcome, shared by both formats.
#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub contract: String,
    pub decision: Decision,
    pub relation: Relation,
    pub threshold: f64,
    pub mode: Mode,
    pub seed: u64,
    pub runs: u64,
    pub successes: u64,
    /// Seeds of the runs that violated the formula.
    pub failing_seeds: Vec<u64>,
}

impl Summary {
    pub fn new(report: &Report, seed: u64) -> Self {
        Self {
            contract: report.contract.clone(),
            decision: report.decision,
            relation: report.relation,
            threshold: report.threshold,
            mode: report.mode,
            seed,
            runs: report.estimate.runs,
            successes: report.estimate.successes,
            failing_seeds: report
                .estimate
                .outcomes
                .iter()
                .filter(|o| !o.holds)
                .map(|o| o.seed)
                .collect(),
        }
    }

    pub fn p_hat(&self) -> f64 {
        self.successes as f64 / self.runs as f64
    }

    pub fn text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "contract {}: {}", self.contract, self.decision);
        let _ = writeln!(
            out,
            "  P = {} {} {} ({} of {} runs, {}, seed {})",
            percent(self.p_hat()),
            self.relation,
            percent(self.threshold),
            self.successes,
            self.runs,
            self.mode,
            self.seed
        );
        out
    }
}

fn percent(p: f64) -> String {
    let s = format!("{:.1}", p * 100.0);
    format!("{} %", s.strip_suffix(".0").unwrap_or(&s))
}

impl fmt::Display for Summary {
    /// The records form.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "contract={}", self.contract)?;
        writeln!(f, "decision={}", self.decision)?;
        writeln!(f, "relation={}", self.relation)?;
        writeln!(f, "threshold={}", self.threshold)?;
        writeln!(f, "mode={}", self.mode)?;
        writeln!(f, "seed={}", self.seed)?;
        writeln!(f, "runs={}", self.runs)?;
        writeln!(f, "successes={}", self.successes)?;
        writeln!(f, "p_hat={}", self.p_hat())?;
        let seeds: Vec<String> = self.failing_seeds.iter().map(u64::to_string).collect();
        writeln!(f, "failing_seeds={}", seeds.join(","))
    }
}

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("records line {line}: {message}")]
pub struct RecordsError {
    pub line: usize,
    pub message: String,
}

/// Parses a records document back into summaries. `p_hat` is derived, so
/// it is checked against the counts rather than stored.
pub fn parse_records(text: &str) -> Result<Vec<Summary>, RecordsError> {
    let mut out = Vec::new();
    let mut block: BTreeMap<&str, (usize, &str)> = BTreeMap::new();
    let mut last = 0;
    for (i, line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = line.trim();
        if line.starts_with('#') {
            continue;
        }
        if line.is_empty() {
            if !block.is_empty() {
                out.push(summary(&std::mem::take(&mut block), lineno)?);
            }
            continue;
        }
        let (key, value) = line.split_once('=').ok_or(RecordsError {
            line: lineno,
            message: format!("expected `key=value`, found `{line}`"),
        })?;
        if block.insert(key, (lineno, value)).is_some() {
            return Err(RecordsError {
                line: lineno,
                message: format!("duplicate key `{key}`"),
            });
        }
        last = lineno;
    }
    if !block.is_empty() {
        out.push(summary(&block, last)?);
    }
    Ok(out)
}

fn summary(block: &BTreeMap<&str, (usize, &str)>, end: usize) -> Result<Summary, RecordsError> {
    fn field<T: std::str::FromStr>(
        block: &BTreeMap<&str, (usize, &str)>,
        key: &str,
        end: usize,
    ) -> Result<T, RecordsError> {
        let (line, raw) = block.get(key).copied().ok_or(RecordsError {
            line: end,
            message: format!("missing `{key}`"),
        })?;
        raw.parse().map_err(|_| RecordsError {
            line,
            message: format!("bad value `{raw}` for `{key}`"),
        })
    }
    let decision = match field::<String>(block, "decision", end)?.as_str() {
        "holds" => Decision::Holds,
        "violated" => Decision::Violated,
        "undecided" => Decision::Undecided,
        other => {
            return Err(RecordsError {
                line: block["decision"].0,
                message: format!("unknown decision `{other}`"),
            })
        }
    };
    let failing = block.get("failing_seeds").map_or("", |v| v.1);
    let failing_seeds = failing
        .split(',')
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|_| RecordsError {
                line: block["failing_seeds"].0,
                message: format!("bad seed `{s}`"),
            })
        })
        .collect::<Result<_, _>>()?;
    let s = Summary {
        contract: field(block, "contract", end)?,
        decision,
        relation: field(block, "relation", end)?,
        threshold: field(block, "threshold", end)?,
        mode: field(block, "mode", end)?,
        seed: field(block, "seed", end)?,
        runs: field(block, "runs", end)?,
        successes: field(block, "successes", end)?,
        failing_seeds,
    };
    if let Some(&(line, raw)) = block.get("p_hat") {
        if raw.parse::<f64>().ok() != Some(s.p_hat()) {
            return Err(RecordsError {
                line,
                message: format!("p_hat {raw} does not match the counts"),
            });
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Summary {
        Summary {
            contract: "MeanAreaUnderFire".into(),
            decision: Decision::Holds,
            relation: Relation::AtLeast,
            threshold: 0.9,
            mode: Mode::Fixed(1000),
            seed: 42,
            runs: 1000,
            successes: 923,
            failing_seeds: vec![7, 19],
        }
    }

    #[test]
    fn text_shows_percentages() {
        let text = sample().text();
        assert!(text.starts_with("contract MeanAreaUnderFire: holds\n"));
        assert!(text.contains("P = 92.3 % >= 90 %"), "{text}");
    }

    #[test]
    fn records_round_trip() {
        let mut b = sample();
        b.contract = "Other".into();
        b.decision = Decision::Undecided;
        b.mode = Mode::Chernoff { epsilon: 0.02, delta: 0.01 };
        b.failing_seeds.clear();
        let doc = format!("# two blocks\n{}\n{}", sample(), b);
        assert_eq!(parse_records(&doc).unwrap(), vec![sample(), b]);
    }

    #[test]
    fn records_errors_name_the_line() {
        let doc = sample().to_string().replace("runs=1000", "runs=lots");
        let err = parse_records(&doc).unwrap_err();
        assert_eq!(err.line, 7);
        assert!(parse_records("contract=x\n").unwrap_err().message.contains("missing"));
        let bad = sample().to_string().replace("p_hat=0.923", "p_hat=0.5");
        assert!(parse_records(&bad).is_err());
    }
}
