//! Bounded linear temporal logic over finite timed traces.
//!
//! Every temporal operator is evaluated relative to the time of the sample
//! it is applied at, and bounds include both ends: `F[<=k] p` holds at
//! position `i` when `p` holds at some `j >= i` with `t_j <= t_i + k`.
//! `G`, `X` (the last position within the bound), `U` and `W` follow the
//! same convention. A trace shorter than the formula's nested bounds is an
//! error, not a verdict.

mod ast;
mod monitor;
mod text;

pub use ast::{Bound, Formula, OccCmp, RunPred, StatePred};
pub use monitor::{
    check, check_with, ensure_long_enough, occ, run_aggregate, CheckOptions, Diagnostic, Verdict,
};
pub use text::parse_formula;
