use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution as _, Exp, Normal, Uniform};

use crate::error::{Error, Result};
use crate::lexer::{Cursor, Tok};
use crate::ocl::Value;

/// Distribution attached to a stochastic attribute, delay or action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Distribution {
    Uniform { lo: f64, hi: f64 },
    Exponential { rate: f64 },
    Normal { mean: f64, std_dev: f64 },
    Bernoulli { p: f64 },
}

impl Distribution {
    pub const NAMES: [&'static str; 4] = ["uniform", "exponential", "normal", "bernoulli"];

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Distribution::Uniform { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
            Distribution::Exponential { rate } => rate.is_finite() && rate > 0.0,
            Distribution::Normal { mean, std_dev } => {
                mean.is_finite() && std_dev.is_finite() && std_dev >= 0.0
            }
            Distribution::Bernoulli { p } => (0.0..=1.0).contains(&p),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Distribution(format!("invalid parameters in {self}")))
        }
    }

    /// True when draws are booleans rather than reals.
    pub fn is_boolean(&self) -> bool {
        matches!(self, Distribution::Bernoulli { .. })
    }

    /// Draws one value, advancing `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Value> {
        self.validate()?;
        let value = match *self {
            Distribution::Uniform { lo, hi } if lo == hi => Value::Real(lo),
            Distribution::Uniform { lo, hi } => Value::Real(
                Uniform::new(lo, hi)
                    .map_err(|e| Error::Distribution(e.to_string()))?
                    .sample(rng),
            ),
            Distribution::Exponential { rate } => Value::Real(
                Exp::new(rate)
                    .map_err(|e| Error::Distribution(e.to_string()))?
                    .sample(rng),
            ),
            Distribution::Normal { mean, std_dev } => Value::Real(
                Normal::new(mean, std_dev)
                    .map_err(|e| Error::Distribution(e.to_string()))?
                    .sample(rng),
            ),
            Distribution::Bernoulli { p } => Value::Bool(rng.random_bool(p)),
        };
        Ok(value)
    }

    /// Parses `name(args)`; returns `Ok(None)` when `text` is not a
    /// distribution call at all.
    pub fn parse_call(text: &str) -> Result<Option<Self>> {
        let mut c = Cursor::new(text)?;
        let name = match c.peek() {
            Tok::Ident(name) if Self::NAMES.contains(&name.as_str()) => name.clone(),
            _ => return Ok(None),
        };
        if !matches!(c.peek_at(1), Tok::LParen) {
            return Ok(None);
        }
        c.advance();
        c.advance();
        let mut args = Vec::new();
        loop {
            let negative = c.eat(&Tok::Minus);
            let v = match c.advance() {
                Tok::Int(v) => v as f64,
                Tok::Real(v) => v,
                _ => return Err(c.error_expected(&["number"])),
            };
            args.push(if negative { -v } else { v });
            if !c.eat(&Tok::Comma) {
                break;
            }
        }
        c.expect(&Tok::RParen)?;
        if !c.at_eof() {
            return Err(c.error_expected(&["end of distribution"]));
        }
        let arity = |n: usize| {
            if args.len() == n {
                Ok(())
            } else {
                Err(Error::Distribution(format!(
                    "{name} takes {n} parameter(s), got {}",
                    args.len()
                )))
            }
        };
        let dist = match name.as_str() {
            "uniform" => {
                arity(2)?;
                Distribution::Uniform {
                    lo: args[0],
                    hi: args[1],
                }
            }
            "exponential" => {
                arity(1)?;
                Distribution::Exponential { rate: args[0] }
            }
            "normal" => {
                arity(2)?;
                Distribution::Normal {
                    mean: args[0],
                    std_dev: args[1],
                }
            }
            _ => {
                arity(1)?;
                Distribution::Bernoulli { p: args[0] }
            }
        };
        dist.validate()?;
        Ok(Some(dist))
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distribution::Uniform { lo, hi } => write!(f, "uniform({lo:?}, {hi:?})"),
            Distribution::Exponential { rate } => write!(f, "exponential({rate:?})"),
            Distribution::Normal { mean, std_dev } => write!(f, "normal({mean:?}, {std_dev:?})"),
            Distribution::Bernoulli { p } => write!(f, "bernoulli({p:?})"),
        }
    }
}

impl FromStr for Distribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Distribution::parse_call(s)?
            .ok_or_else(|| Error::Distribution(format!("`{s}` is not a distribution")))
    }
}

#[cfg(test)]
mod tests {
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn reals(dist: Distribution, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        (0..n)
            .map(|_| dist.draw(&mut rng).unwrap().as_f64().unwrap())
            .collect()
    }

    #[test]
    fn degenerate_uniform() {
        assert_eq!(reals(Distribution::Uniform { lo: 2.0, hi: 2.0 }, 5), vec![2.0; 5]);
    }

    #[test]
    fn exponential_mean_is_inverse_rate() {
        let rate = 2.5;
        let xs = reals(Distribution::Exponential { rate }, 100_000);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        assert!((mean - 1.0 / rate).abs() < 0.02 / rate, "mean {mean}");
    }

    #[test]
    fn standard_normal_moments() {
        let xs = reals(
            Distribution::Normal {
                mean: 0.0,
                std_dev: 1.0,
            },
            100_000,
        );
        let n = xs.len() as f64;
        let mean = xs.iter().sum::<f64>() / n;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "variance {var}");
    }

    #[test]
    fn bernoulli_frequency_within_three_sigma() {
        let p = 0.3;
        let n = 10_000;
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let dist = Distribution::Bernoulli { p };
        let hits = (0..n)
            .filter(|_| dist.draw(&mut rng).unwrap() == Value::Bool(true))
            .count();
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        assert!((hits as f64 - n as f64 * p).abs() < 3.0 * sigma, "hits {hits}");
    }

    #[test]
    fn invalid_parameters() {
        for text in [
            "exponential(0)",
            "exponential(-1)",
            "normal(0, -1)",
            "uniform(3, 1)",
            "bernoulli(1.5)",
            "uniform(1)",
        ] {
            assert!(text.parse::<Distribution>().is_err(), "{text}");
        }
    }

    #[test]
    fn parse_and_print() {
        for text in [
            "uniform(0.5, 2.0)",
            "exponential(1.0)",
            "normal(-1.0, 0.25)",
            "bernoulli(0.7)",
        ] {
            let d: Distribution = text.parse().unwrap();
            assert_eq!(d.to_string(), text);
        }
        assert_eq!(Distribution::parse_call("self.x + 1").unwrap(), None);
    }
}
