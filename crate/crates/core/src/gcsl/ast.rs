use crate::ocl::{Expr, Quantifier};
use crate::time::TimeSpan;

/// Lower bound on the satisfaction probability, as written.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    /// `90%`
    Percent(f64),
    /// `0.9`
    Probability(f64),
}

impl Threshold {
    /// Normalized value in `(0, 1]`.
    pub fn probability(self) -> f64 {
        match self {
            Threshold::Percent(p) => p / 100.0,
            Threshold::Probability(p) => p,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Contract {
    /// Free-form viewpoint tags (`behavior`, `safety`, ...); metadata only.
    pub viewpoints: Vec<String>,
    pub name: String,
    /// `None` reads as `true`.
    pub assumption: Option<Property>,
    pub goal: Property,
    pub confidence: Threshold,
}

/// Assumption or goal: patterns, possibly wrapped in collection
/// quantifiers, or a plain OCL proposition.
#[derive(Debug, Clone, PartialEq)]
pub enum Property {
    Quantified {
        kind: Quantifier,
        collection: Expr,
        var: String,
        body: Box<Property>,
    },
    Pattern(Pattern),
    Ocl(Expr),
}

impl Property {
    /// Depth of property-level quantifiers.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Property::Quantified { body, .. } => 1 + body.quantifier_depth(),
            _ => 0,
        }
    }

    pub fn contains_pattern(&self) -> bool {
        match self {
            Property::Quantified { body, .. } => body.contains_pattern(),
            Property::Pattern(_) => true,
            Property::Ocl(_) => false,
        }
    }
}

/// Time interval; `hi = None` is `+inf`. Closedness is kept for printing,
/// bounds are treated as closed when translated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeInterval {
    pub lo: TimeSpan,
    pub hi: Option<TimeSpan>,
    pub lo_closed: bool,
    pub hi_closed: bool,
}

impl TimeInterval {
    pub fn closed(lo: TimeSpan, hi: TimeSpan) -> Self {
        Self {
            lo,
            hi: Some(hi),
            lo_closed: true,
            hi_closed: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternKind {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
    I,
    J,
    K,
}

impl PatternKind {
    pub const ALL: [PatternKind; 11] = [
        PatternKind::A,
        PatternKind::B,
        PatternKind::C,
        PatternKind::D,
        PatternKind::E,
        PatternKind::F,
        PatternKind::G,
        PatternKind::H,
        PatternKind::I,
        PatternKind::J,
        PatternKind::K,
    ];

    pub fn letter(self) -> char {
        (b'a' + self as u8) as char
    }

    /// Keyword skeleton of the pattern.
    pub fn template(self) -> &'static str {
        match self {
            PatternKind::A => "whenever [P1] occurs [P2] holds during following [a,b]",
            PatternKind::B => "[P1] implies [P2] holds forever",
            PatternKind::C => "always [P]",
            PatternKind::D => "whenever [P1] occurs [P2] holds",
            PatternKind::E => "whenever [P] occurs [P1] implies [P2] during following [a,b]",
            PatternKind::F => "whenever [P1] occurs [P2] does not occur during following [a,b]",
            PatternKind::G => "whenever [P1] occurs [P2] occurs within [a,b]",
            PatternKind::H => "[P1] occurs [n] times during [a,b] raises [P2]",
            PatternKind::I => "[P] occurs at most [n] times during [a,b]",
            PatternKind::J => "[P1] during [a,b] raises [P2]",
            PatternKind::K => "[P] during [a,b] implies [P1] during [a,c] then [P2] during [c,b]",
        }
    }
}

/// The eleven behavioural patterns. Slot names follow the pattern text:
/// `trigger` is the "whenever" proposition.
#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    /// whenever [trigger] occurs [response] holds during following [a,b]
    HoldsDuringFollowing {
        trigger: Expr,
        response: Expr,
        interval: TimeInterval,
    },
    /// [trigger] implies [response] holds forever
    HoldsForever { trigger: Expr, response: Expr },
    /// always [prop]
    Always { prop: Expr },
    /// whenever [trigger] occurs [response] holds
    WheneverHolds { trigger: Expr, response: Expr },
    /// whenever [trigger] occurs [antecedent] implies [consequent] during
    /// following [a,b]; a literal `true` trigger is the short form
    /// "[antecedent] implies [consequent] during following [a,b]".
    ImpliesDuringFollowing {
        trigger: Expr,
        antecedent: Expr,
        consequent: Expr,
        interval: TimeInterval,
    },
    /// whenever [trigger] occurs [response] does not occur during following [a,b]
    DoesNotOccur {
        trigger: Expr,
        response: Expr,
        interval: TimeInterval,
    },
    /// whenever [trigger] occurs [response] occurs within [a,b]
    OccursWithin {
        trigger: Expr,
        response: Expr,
        interval: TimeInterval,
    },
    /// [prop] occurs [n] times during [a,b] raises [response]
    OccursTimesRaises {
        prop: Expr,
        count: u64,
        interval: TimeInterval,
        response: Expr,
    },
    /// [prop] occurs at most [n] times during [a,b]
    OccursAtMost {
        prop: Expr,
        count: u64,
        interval: TimeInterval,
    },
    /// [prop] during [a,b] raises [response]
    DuringRaises {
        prop: Expr,
        interval: TimeInterval,
        response: Expr,
    },
    /// [prop] during [a,b] implies [first] during [a,c] then [second] during [c,b]
    DuringImpliesThen {
        prop: Expr,
        interval: TimeInterval,
        first: Expr,
        first_interval: TimeInterval,
        second: Expr,
        second_interval: TimeInterval,
    },
}

impl Pattern {
    pub fn kind(&self) -> PatternKind {
        match self {
            Pattern::HoldsDuringFollowing { .. } => PatternKind::A,
            Pattern::HoldsForever { .. } => PatternKind::B,
            Pattern::Always { .. } => PatternKind::C,
            Pattern::WheneverHolds { .. } => PatternKind::D,
            Pattern::ImpliesDuringFollowing { .. } => PatternKind::E,
            Pattern::DoesNotOccur { .. } => PatternKind::F,
            Pattern::OccursWithin { .. } => PatternKind::G,
            Pattern::OccursTimesRaises { .. } => PatternKind::H,
            Pattern::OccursAtMost { .. } => PatternKind::I,
            Pattern::DuringRaises { .. } => PatternKind::J,
            Pattern::DuringImpliesThen { .. } => PatternKind::K,
        }
    }

    /// State propositions in slot order.
    pub fn propositions(&self) -> Vec<&Expr> {
        match self {
            Pattern::Always { prop } => vec![prop],
            Pattern::HoldsForever { trigger, response }
            | Pattern::WheneverHolds { trigger, response }
            | Pattern::HoldsDuringFollowing {
                trigger, response, ..
            }
            | Pattern::DoesNotOccur {
                trigger, response, ..
            }
            | Pattern::OccursWithin {
                trigger, response, ..
            } => vec![trigger, response],
            Pattern::ImpliesDuringFollowing {
                trigger,
                antecedent,
                consequent,
                ..
            } => vec![trigger, antecedent, consequent],
            Pattern::OccursTimesRaises { prop, response, .. }
            | Pattern::DuringRaises { prop, response, .. } => vec![prop, response],
            Pattern::OccursAtMost { prop, .. } => vec![prop],
            Pattern::DuringImpliesThen {
                prop,
                first,
                second,
                ..
            } => vec![prop, first, second],
        }
    }

    /// Rewrites every state proposition with `f`.
    pub fn map_propositions<E>(
        &self,
        mut f: impl FnMut(&Expr) -> Result<Expr, E>,
    ) -> Result<Pattern, E> {
        let mut p = self.clone();
        match &mut p {
            Pattern::Always { prop } => *prop = f(prop)?,
            Pattern::HoldsForever { trigger, response }
            | Pattern::WheneverHolds { trigger, response }
            | Pattern::HoldsDuringFollowing {
                trigger, response, ..
            }
            | Pattern::DoesNotOccur {
                trigger, response, ..
            }
            | Pattern::OccursWithin {
                trigger, response, ..
            } => {
                *trigger = f(trigger)?;
                *response = f(response)?;
            }
            Pattern::ImpliesDuringFollowing {
                trigger,
                antecedent,
                consequent,
                ..
            } => {
                *trigger = f(trigger)?;
                *antecedent = f(antecedent)?;
                *consequent = f(consequent)?;
            }
            Pattern::OccursTimesRaises { prop, response, .. }
            | Pattern::DuringRaises { prop, response, .. } => {
                *prop = f(prop)?;
                *response = f(response)?;
            }
            Pattern::OccursAtMost { prop, .. } => *prop = f(prop)?,
            Pattern::DuringImpliesThen {
                prop,
                first,
                second,
                ..
            } => {
                *prop = f(prop)?;
                *first = f(first)?;
                *second = f(second)?;
            }
        }
        Ok(p)
    }

    pub fn intervals(&self) -> Vec<&TimeInterval> {
        match self {
            Pattern::HoldsForever { .. } | Pattern::Always { .. } | Pattern::WheneverHolds { .. } => {
                Vec::new()
            }
            Pattern::HoldsDuringFollowing { interval, .. }
            | Pattern::ImpliesDuringFollowing { interval, .. }
            | Pattern::DoesNotOccur { interval, .. }
            | Pattern::OccursWithin { interval, .. }
            | Pattern::OccursTimesRaises { interval, .. }
            | Pattern::OccursAtMost { interval, .. }
            | Pattern::DuringRaises { interval, .. } => vec![interval],
            Pattern::DuringImpliesThen {
                interval,
                first_interval,
                second_interval,
                ..
            } => vec![interval, first_interval, second_interval],
        }
    }
}
