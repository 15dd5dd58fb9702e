//! The OCL subset used in state propositions: navigation, collection
//! operations, boolean connectives, comparisons, arithmetic and the
//! run-level path operators.

mod ast;
mod eval;
mod parser;
mod print;

pub use ast::{BinOp, Expr, PathOp, Quantifier, Symbol};
pub use eval::{eval_arith, eval_bool, Bindings, Evaluator, RunContext, Value};
pub use parser::parse_expr;
pub(crate) use eval::aggregate;
pub(crate) use parser::{expr as parse_expr_at, time_literal};
