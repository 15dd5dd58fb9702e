//! The contract language: contracts, properties and the eleven patterns.

mod ast;
mod parser;
mod print;

pub use ast::{Contract, Pattern, PatternKind, Property, Threshold, TimeInterval};
pub use parser::{parse_contract, parse_contracts, parse_pattern, parse_property, MAX_NESTING};
