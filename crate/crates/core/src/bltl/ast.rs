use crate::ocl::{Bindings, Expr};

/// Upper time bound of a temporal operator, in model base units.
/// A clipped bound stops at the end of the trace instead of requiring the
/// trace to reach it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bound {
    pub limit: f64,
    pub clip: bool,
}

impl Bound {
    pub fn new(limit: f64) -> Self {
        Self { limit, clip: false }
    }

    pub fn clipped(limit: f64) -> Self {
        Self { limit, clip: true }
    }

    /// Contribution to the trace length a formula needs.
    pub fn reach(self) -> f64 {
        if self.clip {
            0.0
        } else {
            self.limit
        }
    }
}

/// OCL proposition evaluated on the state at the current position.
#[derive(Debug, Clone, PartialEq)]
pub struct StatePred {
    pub expr: Expr,
    pub bindings: Bindings,
}

impl StatePred {
    pub fn new(expr: Expr) -> Self {
        Self {
            expr,
            bindings: Bindings::new(),
        }
    }

    pub fn with_bindings(expr: Expr, bindings: Bindings) -> Self {
        Self { expr, bindings }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OccCmp {
    AtLeast,
    AtMost,
}

/// Predicates over the run from the current position onward.
#[derive(Debug, Clone, PartialEq)]
pub enum RunPred {
    /// `occ(prop, lo, hi) >= n` or `<= n`.
    Occ {
        prop: StatePred,
        lo: f64,
        hi: f64,
        cmp: OccCmp,
        n: u64,
    },
    /// Proposition containing `mean`, `sum`, `prod` or `at`.
    Path(StatePred),
    /// If `prop` holds throughout `[lo, hi]`, some split point `c` in that
    /// window has `first` throughout `[lo, c]` and `second` throughout `[c, hi]`.
    Split {
        prop: StatePred,
        lo: f64,
        hi: f64,
        first: StatePred,
        second: StatePred,
    },
}

impl RunPred {
    fn reach(&self) -> f64 {
        match self {
            RunPred::Occ { hi, prop, .. } => hi.max(prop.expr.max_at_offset()),
            RunPred::Path(p) => p.expr.max_at_offset(),
            RunPred::Split { hi, .. } => *hi,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    False,
    State(StatePred),
    Run(RunPred),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    F(Bound, Box<Formula>),
    G(Bound, Box<Formula>),
    X(Bound, Box<Formula>),
    U(Bound, Box<Formula>, Box<Formula>),
    W(Bound, Box<Formula>, Box<Formula>),
}

impl Formula {
    pub fn state(expr: Expr) -> Formula {
        if expr.has_path_op() {
            Formula::Run(RunPred::Path(StatePred::new(expr)))
        } else {
            Formula::State(StatePred::new(expr))
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Implies(Box::new(lhs), Box::new(rhs))
    }

    pub fn f(limit: f64, f: Formula) -> Formula {
        Formula::F(Bound::new(limit), Box::new(f))
    }

    pub fn g(limit: f64, f: Formula) -> Formula {
        Formula::G(Bound::new(limit), Box::new(f))
    }

    pub fn x(limit: f64, f: Formula) -> Formula {
        Formula::X(Bound::new(limit), Box::new(f))
    }

    pub fn u(limit: f64, lhs: Formula, rhs: Formula) -> Formula {
        Formula::U(Bound::new(limit), Box::new(lhs), Box::new(rhs))
    }

    pub fn w(limit: f64, lhs: Formula, rhs: Formula) -> Formula {
        Formula::W(Bound::new(limit), Box::new(lhs), Box::new(rhs))
    }

    /// Conjunction with nested conjunctions flattened; `[]` is `true` and a
    /// single item is returned as is.
    pub fn and(items: Vec<Formula>) -> Formula {
        let mut flat = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Formula::And(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::True,
            1 => flat.pop().unwrap(),
            _ => Formula::And(flat),
        }
    }

    /// Disjunction, normalized like [`Formula::and`]; `[]` is `false`.
    pub fn or(items: Vec<Formula>) -> Formula {
        let mut flat = Vec::with_capacity(items.len());
        for item in items {
            match item {
                Formula::Or(inner) => flat.extend(inner),
                other => flat.push(other),
            }
        }
        match flat.len() {
            0 => Formula::False,
            1 => flat.pop().unwrap(),
            _ => Formula::Or(flat),
        }
    }

    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::False | Formula::State(_) | Formula::Run(_) => Vec::new(),
            Formula::Not(f) | Formula::F(_, f) | Formula::G(_, f) | Formula::X(_, f) => vec![f],
            Formula::And(items) | Formula::Or(items) => items.iter().collect(),
            Formula::Implies(a, b) | Formula::U(_, a, b) | Formula::W(_, a, b) => vec![a, b],
        }
    }

    /// Longest chain of nested bounds: the trace must span at least this
    /// much time for the formula to be decidable.
    pub fn required_length(&self) -> f64 {
        let own = match self {
            Formula::F(b, _)
            | Formula::G(b, _)
            | Formula::X(b, _)
            | Formula::U(b, _, _)
            | Formula::W(b, _, _) => b.reach(),
            Formula::State(p) => p.expr.max_at_offset(),
            Formula::Run(r) => r.reach(),
            _ => 0.0,
        };
        own + self
            .children()
            .into_iter()
            .map(Formula::required_length)
            .fold(0.0, f64::max)
    }

    /// The bound chain reaching [`Formula::required_length`], for error
    /// messages.
    pub fn longest_chain(&self) -> String {
        let mut parts = Vec::new();
        let mut node = self;
        loop {
            match node {
                Formula::F(b, _) => parts.push(format!("F[<={}]", b.limit)),
                Formula::G(b, _) => parts.push(format!("G[<={}]", b.limit)),
                Formula::X(b, _) => parts.push(format!("X[<={}]", b.limit)),
                Formula::U(b, _, _) => parts.push(format!("U[<={}]", b.limit)),
                Formula::W(b, _, _) => parts.push(format!("W[<={}]", b.limit)),
                Formula::Run(RunPred::Occ { lo, hi, .. }) => parts.push(format!("occ[{lo},{hi}]")),
                Formula::Run(RunPred::Split { lo, hi, .. }) => {
                    parts.push(format!("split[{lo},{hi}]"))
                }
                _ => {}
            }
            let next = node.children().into_iter().max_by(|a, b| {
                a.required_length().total_cmp(&b.required_length())
            });
            match next {
                Some(n) => node = n,
                None => break,
            }
        }
        if parts.is_empty() {
            "at()".into()
        } else {
            parts.join(" ")
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// Drops `X[<=0]` wrappers, which are identities.
    pub fn simplify(self) -> Formula {
        let b = |f: Box<Formula>| Box::new(f.simplify());
        match self {
            Formula::X(bound, f) if bound.limit == 0.0 => f.simplify(),
            Formula::Not(f) => Formula::Not(b(f)),
            Formula::And(items) => Formula::and(items.into_iter().map(Formula::simplify).collect()),
            Formula::Or(items) => Formula::or(items.into_iter().map(Formula::simplify).collect()),
            Formula::Implies(l, r) => Formula::Implies(b(l), b(r)),
            Formula::F(bound, f) => Formula::F(bound, b(f)),
            Formula::G(bound, f) => Formula::G(bound, b(f)),
            Formula::X(bound, f) => Formula::X(bound, b(f)),
            Formula::U(bound, l, r) => Formula::U(bound, b(l), b(r)),
            Formula::W(bound, l, r) => Formula::W(bound, b(l), b(r)),
            leaf => leaf,
        }
    }
}
