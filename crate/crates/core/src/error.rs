use std::fmt;

use thiserror::Error;

/// Line/column position in a source text, both 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Location {
    pub line: usize,
    pub column: usize,
}

impl Location {
    pub fn new(line: usize, column: usize) -> Self {
        Self { line, column }
    }

    /// Computes the location of a byte offset inside `text`.
    pub fn from_offset(text: &str, offset: usize) -> Self {
        let offset = offset.min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before
            .rfind('\n')
            .map_or(before.chars().count(), |nl| before[nl + 1..].chars().count())
            + 1;
        Self { line, column }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at {location}: {message}{}", expected_suffix(.expected))]
    Syntax {
        location: Location,
        message: String,
        expected: Vec<String>,
    },

    #[error("quantifier nesting depth {depth} exceeds the limit of {limit}")]
    NestingDepth { depth: usize, limit: usize },

    #[error("unknown time unit `{0}`")]
    UnknownTimeUnit(String),

    #[error("invalid interval: {0}")]
    InvalidInterval(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("duplicate instance id `{0}`")]
    DuplicateInstance(String),

    #[error("unresolved name `{0}`")]
    Unresolved(String),

    #[error("type mismatch: {0}")]
    Type(String),

    #[error("division by zero")]
    DivisionByZero,

    #[error("evaluation error: {0}")]
    Eval(String),

    #[error("time {time} is outside the trace range [{start}, {end}]")]
    OutOfRange { time: f64, start: f64, end: f64 },

    #[error("trace too short: {bound} needs the trace to reach t = {required}, but it ends at {end}")]
    TraceTooShort {
        bound: String,
        required: f64,
        end: f64,
    },

    #[error("invalid trace: {0}")]
    Trace(String),

    #[error("inconsistent pattern `{pattern}`: condition {condition} violated ({detail})")]
    Inconsistent {
        pattern: String,
        condition: String,
        detail: String,
    },

    #[error("invalid distribution: {0}")]
    Distribution(String),

    #[error("simulation aborted: {0}")]
    Simulation(String),

    #[error("statistics error: {0}")]
    Statistics(String),

    #[error("run with seed {seed} failed: {source}")]
    Run {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(String),
}

fn expected_suffix(expected: &[String]) -> String {
    if expected.is_empty() {
        String::new()
    } else {
        format!(" (expected one of: {})", expected.join(", "))
    }
}

impl From<std::io::Error> for Error {
    fn from(err: std::io::Error) -> Self {
        Error::Io(err.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
