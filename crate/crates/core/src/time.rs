//! Time literals and unit normalization.
//!
//! Every time literal in a contract, on the command line or in a model
//! header goes through [`TimeUnit::parse`], so "6 months" means the same
//! thing everywhere. Internally, contract times are kept in seconds;
//! temporal bounds handed to the monitor are expressed in the model's
//! base unit.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

const MINUTE: f64 = 60.0;
const HOUR: f64 = 3600.0;
const DAY: f64 = 86_400.0;

/// A named time unit. Months are 30 days and years 365 days.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TimeUnit {
    Millisecond,
    Second,
    Minute,
    Hour,
    Day,
    Week,
    Month,
    Year,
}

impl TimeUnit {
    pub const ALL: [TimeUnit; 8] = [
        TimeUnit::Millisecond,
        TimeUnit::Second,
        TimeUnit::Minute,
        TimeUnit::Hour,
        TimeUnit::Day,
        TimeUnit::Week,
        TimeUnit::Month,
        TimeUnit::Year,
    ];

    pub fn seconds(self) -> f64 {
        match self {
            TimeUnit::Millisecond => 0.001,
            TimeUnit::Second => 1.0,
            TimeUnit::Minute => MINUTE,
            TimeUnit::Hour => HOUR,
            TimeUnit::Day => DAY,
            TimeUnit::Week => 7.0 * DAY,
            TimeUnit::Month => 30.0 * DAY,
            TimeUnit::Year => 365.0 * DAY,
        }
    }

    /// Singular/plural spellings accepted for this unit.
    pub fn parse(name: &str) -> Result<Self> {
        let unit = match name {
            "ms" | "millisecond" | "milliseconds" => TimeUnit::Millisecond,
            "s" | "sec" | "secs" | "second" | "seconds" => TimeUnit::Second,
            "min" | "mins" | "minute" | "minutes" => TimeUnit::Minute,
            "h" | "hour" | "hours" => TimeUnit::Hour,
            "day" | "days" => TimeUnit::Day,
            "week" | "weeks" => TimeUnit::Week,
            "month" | "months" => TimeUnit::Month,
            "year" | "years" => TimeUnit::Year,
            other => return Err(Error::UnknownTimeUnit(other.to_string())),
        };
        Ok(unit)
    }

    fn name(self, plural: bool) -> &'static str {
        match (self, plural) {
            (TimeUnit::Millisecond, _) => "ms",
            (TimeUnit::Second, _) => "s",
            (TimeUnit::Minute, _) => "min",
            (TimeUnit::Hour, false) => "hour",
            (TimeUnit::Hour, true) => "hours",
            (TimeUnit::Day, false) => "day",
            (TimeUnit::Day, true) => "days",
            (TimeUnit::Week, false) => "week",
            (TimeUnit::Week, true) => "weeks",
            (TimeUnit::Month, false) => "month",
            (TimeUnit::Month, true) => "months",
            (TimeUnit::Year, false) => "year",
            (TimeUnit::Year, true) => "years",
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name(false))
    }
}

impl FromStr for TimeUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TimeUnit::parse(s.trim())
    }
}

/// A non-negative span of time, stored in seconds.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct TimeSpan(f64);

impl TimeSpan {
    pub const ZERO: TimeSpan = TimeSpan(0.0);

    pub fn from_seconds(seconds: f64) -> Self {
        TimeSpan(seconds)
    }

    pub fn new(amount: f64, unit: TimeUnit) -> Self {
        TimeSpan(amount * unit.seconds())
    }

    pub fn seconds(self) -> f64 {
        self.0
    }

    /// Expresses the span as a multiple of `unit`.
    pub fn in_unit(self, unit: TimeUnit) -> f64 {
        self.0 / unit.seconds()
    }

    /// Parses "6 months", "4months", "0.5 day" or a bare "0".
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        let split = text
            .find(|c: char| !(c.is_ascii_digit() || c == '.' || c == '_'))
            .unwrap_or(text.len());
        let (number, unit) = text.split_at(split);
        let amount: f64 = number
            .replace('_', "")
            .parse()
            .map_err(|_| Error::InvalidInterval(format!("`{text}` is not a time literal")))?;
        let unit = unit.trim();
        if unit.is_empty() {
            if amount == 0.0 {
                return Ok(TimeSpan::ZERO);
            }
            return Err(Error::UnknownTimeUnit(format!(
                "missing unit in `{text}`"
            )));
        }
        Ok(TimeSpan::new(amount, TimeUnit::parse(unit)?))
    }
}

impl fmt::Display for TimeSpan {
    /// Prints with the largest unit that divides the span exactly, so
    /// that the printed text parses back to the same value.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0 == 0.0 {
            return f.write_str("0 s");
        }
        for unit in TimeUnit::ALL.iter().rev() {
            let amount = self.0 / unit.seconds();
            if amount.fract() == 0.0 && amount.abs() < 1e15 && amount * unit.seconds() == self.0 {
                return write!(f, "{} {}", amount as i64, unit.name(amount != 1.0));
            }
        }
        write!(f, "{} s", self.0)
    }
}

impl FromStr for TimeSpan {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TimeSpan::parse(s)
    }
}
