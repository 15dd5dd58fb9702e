use std::fmt;
use std::sync::Arc;

use crate::time::TimeSpan;

/// Interned enumeration literal. Symbols only support equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantifier {
    ForAll,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::ForAll => "forAll",
            Quantifier::Exists => "exists",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Implies,
    Or,
    And,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Implies => 1,
            BinOp::Or => 2,
            BinOp::And => 3,
            BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 4,
            BinOp::Add | BinOp::Sub => 5,
            BinOp::Mul | BinOp::Div => 6,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Implies => "implies",
            BinOp::Or => "or",
            BinOp::And => "and",
            BinOp::Eq => "=",
            BinOp::Ne => "<>",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 4
    }
}

/// Run-level aggregation over the samples of a trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathOp {
    Mean,
    Sum,
    Prod,
}

impl PathOp {
    pub fn keyword(self) -> &'static str {
        match self {
            PathOp::Mean => "mean",
            PathOp::Sum => "sum",
            PathOp::Prod => "prod",
        }
    }
}

/// OCL expression tree. Boolean and numeric expressions share one type;
/// evaluation reports a type error when they are mixed up.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Bool(bool),
    Int(i64),
    Real(f64),
    /// `#Literal`
    Enum(Symbol),
    /// A bare identifier: bound variable, attribute of the implicit
    /// iterator or of `self`, or an instance id.
    Name(String),
    /// The `SoS` root.
    Root,
    SelfRef,
    Nav(Box<Expr>, String),
    Size(Box<Expr>),
    CollSum(Box<Expr>),
    Iterate {
        kind: Quantifier,
        source: Box<Expr>,
        /// `None` for the implicit-iterator form `coll->exists(attr)`.
        var: Option<String>,
        body: Box<Expr>,
    },
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Path(PathOp, Box<Expr>),
    At(Box<Expr>, TimeSpan),
}

impl Expr {
    pub fn name(name: &str) -> Expr {
        Expr::Name(name.to_string())
    }

    pub fn nav(self, attr: &str) -> Expr {
        Expr::Nav(Box::new(self), attr.to_string())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary(op, Box::new(lhs), Box::new(rhs))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Expr {
        Expr::Not(Box::new(self))
    }

    /// Left-nested conjunction; the empty conjunction is `true`.
    pub fn conjunction(items: Vec<Expr>) -> Expr {
        fold(items, BinOp::And, true)
    }

    /// Left-nested disjunction; the empty disjunction is `false`.
    pub fn disjunction(items: Vec<Expr>) -> Expr {
        fold(items, BinOp::Or, false)
    }

    pub fn children(&self) -> Vec<&Expr> {
        match self {
            Expr::Bool(_)
            | Expr::Int(_)
            | Expr::Real(_)
            | Expr::Enum(_)
            | Expr::Name(_)
            | Expr::Root
            | Expr::SelfRef => Vec::new(),
            Expr::Nav(e, _)
            | Expr::Size(e)
            | Expr::CollSum(e)
            | Expr::Not(e)
            | Expr::Neg(e)
            | Expr::Path(_, e)
            | Expr::At(e, _) => vec![e],
            Expr::Iterate { source, body, .. } => vec![source, body],
            Expr::Binary(_, l, r) => vec![l, r],
        }
    }

    /// True if a path operator (`mean`, `sum`, `prod`, `at`) occurs anywhere.
    pub fn has_path_op(&self) -> bool {
        matches!(self, Expr::Path(..) | Expr::At(..))
            || self.children().into_iter().any(Expr::has_path_op)
    }

    /// Number of path operators, not counting ones nested inside another.
    pub fn path_op_count(&self) -> usize {
        match self {
            Expr::Path(..) | Expr::At(..) => 1,
            _ => self.children().into_iter().map(Expr::path_op_count).sum(),
        }
    }

    /// Deepest nesting of `forAll`/`exists` iterators.
    pub fn quantifier_depth(&self) -> usize {
        match self {
            Expr::Iterate { source, body, .. } => {
                source.quantifier_depth().max(1 + body.quantifier_depth())
            }
            _ => self
                .children()
                .into_iter()
                .map(Expr::quantifier_depth)
                .max()
                .unwrap_or(0),
        }
    }

    /// Largest `at(_, t)` offset, in seconds.
    pub fn max_at_offset(&self) -> f64 {
        let own = match self {
            Expr::At(_, t) => t.seconds(),
            _ => 0.0,
        };
        self.children()
            .into_iter()
            .map(Expr::max_at_offset)
            .fold(own, f64::max)
    }
}

fn fold(items: Vec<Expr>, op: BinOp, empty: bool) -> Expr {
    let mut iter = items.into_iter();
    match iter.next() {
        None => Expr::Bool(empty),
        Some(first) => iter.fold(first, |acc, e| Expr::binary(op, acc, e)),
    }
}
