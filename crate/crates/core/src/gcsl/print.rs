use std::fmt;

use crate::ocl::Expr;
use crate::time::TimeSpan;

use super::ast::{Contract, Pattern, Property, Threshold, TimeInterval};

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Percent(p) => write!(f, "{p}%"),
            Threshold::Probability(p) => write!(f, "{p:?}"),
        }
    }
}

impl fmt::Display for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.viewpoints {
            write!(f, "{v} ")?;
        }
        writeln!(f, "contract {}", self.name)?;
        if let Some(a) = &self.assumption {
            writeln!(f, "  Assumption: {a}")?;
        }
        writeln!(f, "  Goal: {}", self.goal)?;
        writeln!(f, "  Confidence: {}", self.confidence)
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Property::Quantified {
                kind,
                collection,
                var,
                body,
            } => write!(f, "{collection}->{}({var} | {body})", kind.keyword()),
            Property::Pattern(p) => p.fmt(f),
            Property::Ocl(e) => e.fmt(f),
        }
    }
}

fn bound(t: Option<TimeSpan>) -> String {
    t.map_or_else(|| "+inf".to_string(), |t| t.to_string())
}

impl fmt::Display for TimeInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(if self.lo_closed { "[" } else { "(" })?;
        if self.lo == TimeSpan::ZERO && self.lo_closed {
            f.write_str(&bound(self.hi))?;
        } else {
            write!(f, "{} - {}", self.lo, bound(self.hi))?;
        }
        f.write_str(if self.hi_closed { "]" } else { ")" })
    }
}

struct Slot<'a>(&'a Expr);

impl fmt::Display for Slot<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.0)
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pattern::HoldsDuringFollowing {
                trigger,
                response,
                interval,
            } => write!(
                f,
                "whenever {} occurs {} holds during following {interval}",
                Slot(trigger),
                Slot(response)
            ),
            Pattern::HoldsForever { trigger, response } => write!(
                f,
                "{} implies {} holds forever",
                Slot(trigger),
                Slot(response)
            ),
            Pattern::Always { prop } => write!(f, "always {}", Slot(prop)),
            Pattern::WheneverHolds { trigger, response } => write!(
                f,
                "whenever {} occurs {} holds",
                Slot(trigger),
                Slot(response)
            ),
            Pattern::ImpliesDuringFollowing {
                trigger,
                antecedent,
                consequent,
                interval,
            } => {
                if *trigger != Expr::Bool(true) {
                    write!(f, "whenever {} occurs ", Slot(trigger))?;
                }
                write!(
                    f,
                    "{} implies {} during following {interval}",
                    Slot(antecedent),
                    Slot(consequent)
                )
            }
            Pattern::DoesNotOccur {
                trigger,
                response,
                interval,
            } => write!(
                f,
                "whenever {} occurs {} does not occur during following {interval}",
                Slot(trigger),
                Slot(response)
            ),
            Pattern::OccursWithin {
                trigger,
                response,
                interval,
            } => write!(
                f,
                "whenever {} occurs {} occurs within {interval}",
                Slot(trigger),
                Slot(response)
            ),
            Pattern::OccursTimesRaises {
                prop,
                count,
                interval,
                response,
            } => write!(
                f,
                "{} occurs [{count}] times during {interval} raises {}",
                Slot(prop),
                Slot(response)
            ),
            Pattern::OccursAtMost {
                prop,
                count,
                interval,
            } => write!(
                f,
                "{} occurs at most [{count}] times during {interval}",
                Slot(prop)
            ),
            Pattern::DuringRaises {
                prop,
                interval,
                response,
            } => write!(
                f,
                "{} during {interval} raises {}",
                Slot(prop),
                Slot(response)
            ),
            Pattern::DuringImpliesThen {
                prop,
                interval,
                first,
                first_interval,
                second,
                second_interval,
            } => write!(
                f,
                "{} during {interval} implies {} during {first_interval} then {} during {second_interval}",
                Slot(prop),
                Slot(first),
                Slot(second)
            ),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::{parse_contract, parse_pattern, parse_property};

    #[test]
    fn trivial_contract_prints_keywords() {
        let c = parse_contract("contract C Goal: always [true] Confidence: 90%").unwrap();
        let text = c.to_string();
        for kw in ["contract C", "Goal:", "always [true]", "Confidence: 90%"] {
            assert!(text.contains(kw), "{text}");
        }
        assert_eq!(parse_contract(&text).unwrap(), c);
    }

    #[test]
    fn mean_requirement_prints_intact() {
        let c = parse_contract(
            "behavior contract MeanFire Goal: mean(SoS.itsDistricts.fireArea->sum()) <= 0.0001 Confidence: 0.9",
        )
        .unwrap();
        let text = c.to_string();
        assert!(text.contains("Goal: mean(SoS.itsDistricts.fireArea->sum()) <= 0.0001"));
        assert_eq!(parse_contract(&text).unwrap(), c);
    }

    #[test]
    fn intervals_print_in_short_and_long_form() {
        let p = parse_pattern("[a.x] during [6 months] raises [a.y]").unwrap();
        assert_eq!(p.to_string(), "[a.x] during [6 months] raises [a.y]");
        let p = parse_pattern("[a.x] during (1 day, +∞) raises [a.y]").unwrap();
        assert_eq!(p.to_string(), "[a.x] during (1 day - +inf) raises [a.y]");
        assert_eq!(parse_pattern(&p.to_string()).unwrap(), p);
    }

    #[test]
    fn short_form_of_pattern_e() {
        let text = "[a.x] implies [a.y] during following [1 day - 2 days]";
        let p = parse_pattern(text).unwrap();
        assert_eq!(p.to_string(), text);
        let q = parse_property("SoS.xs->exists(v | whenever [v.p] occurs [v.q] holds)").unwrap();
        assert_eq!(
            q.to_string(),
            "SoS.xs->exists(v | whenever [v.p] occurs [v.q] holds)"
        );
    }
}
