use std::fmt;

use crate::error::{Error, Result};
use crate::model::{SosModel, TimedTrace};
use crate::ocl::{Evaluator, Expr, PathOp, RunContext};

use super::ast::{Bound, Formula, OccCmp, RunPred, StatePred};

/// Relative slack when comparing a trace's span with a formula's needs;
/// bound arithmetic such as `(k - b) + b` is done in floating point.
const LENGTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CheckOptions {
    /// Read `a W b` as `(a U b) | G a` instead of `(a U b) | G b`.
    pub standard_weak_until: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// Trace time of the innermost position the explanation reached.
    pub time: f64,
    /// Subformula path from the root, e.g. `&[1] / G / =>.rhs / F`.
    pub path: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at t = {}: {}", self.time, self.path)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub holds: bool,
    /// Best-effort explanation of a violation.
    pub diagnostic: Option<Diagnostic>,
}

/// Decides `formula` on `trace` from its first sample.
pub fn check(formula: &Formula, trace: &TimedTrace, model: &SosModel) -> Result<Verdict> {
    check_with(formula, trace, model, CheckOptions::default())
}

pub fn check_with(
    formula: &Formula,
    trace: &TimedTrace,
    model: &SosModel,
    options: CheckOptions,
) -> Result<Verdict> {
    ensure_long_enough(formula, trace)?;
    let mut monitor = Monitor::new(formula, trace, model, options);
    let holds = monitor.eval(0, 0)?;
    let diagnostic = if holds {
        None
    } else {
        let mut path = Vec::new();
        let pos = monitor.explain(0, 0, false, &mut path)?;
        Some(Diagnostic {
            time: trace.time(pos),
            path: if path.is_empty() {
                "root".into()
            } else {
                path.join(" / ")
            },
        })
    };
    Ok(Verdict { holds, diagnostic })
}

/// Fails with [`Error::TraceTooShort`] when the trace does not span every
/// bound of the formula.
pub fn ensure_long_enough(formula: &Formula, trace: &TimedTrace) -> Result<()> {
    let required = formula.required_length();
    let span = trace.end() - trace.start();
    if span < required - LENGTH_TOLERANCE * required.max(1.0) {
        return Err(Error::TraceTooShort {
            bound: formula.longest_chain(),
            required: trace.start() + required,
            end: trace.end(),
        });
    }
    Ok(())
}

fn eval_pred(
    pred: &StatePred,
    trace: &TimedTrace,
    pos: usize,
    model: &SosModel,
) -> Result<bool> {
    Evaluator::new(model, &trace.samples()[pos])
        .with_bindings(&pred.bindings)
        .with_run(RunContext { trace, start: pos })
        .eval_bool(&pred.expr)
}

/// Last position reachable from `pos` within `bound`.
fn window_end(trace: &TimedTrace, pos: usize, bound: f64) -> usize {
    trace.last_index_within(pos, trace.time(pos) + bound)
}

/// Occurrences of `prop` in `[t_start + lo, t_start + hi]`: one if it holds
/// in the state in force at the window start, plus one per rising edge at
/// a later sample inside the window.
pub fn occ(
    prop: &StatePred,
    lo: f64,
    hi: f64,
    trace: &TimedTrace,
    start: usize,
    model: &SosModel,
) -> Result<u64> {
    let to = trace.time(start) + hi;
    if to > trace.end() + LENGTH_TOLERANCE * to.abs().max(1.0) {
        return Err(Error::OutOfRange {
            time: to,
            start: trace.start(),
            end: trace.end(),
        });
    }
    occ_clipped(prop, lo, hi, trace, start, model)
}

/// [`occ`] with the window cut at the end of the trace. Only reachable
/// below a clipped bound, since the length check covers every other case.
fn occ_clipped(
    prop: &StatePred,
    lo: f64,
    hi: f64,
    trace: &TimedTrace,
    start: usize,
    model: &SosModel,
) -> Result<u64> {
    let t0 = trace.time(start);
    let (from, to) = (t0 + lo, t0 + hi);
    let first = trace.index_at(from.min(trace.end()))?;
    let mut previous = eval_pred(prop, trace, first, model)?;
    let mut count = previous as u64;
    for j in first + 1..trace.len() {
        if trace.time(j) > to {
            break;
        }
        let now = eval_pred(prop, trace, j, model)?;
        if now && !previous {
            count += 1;
        }
        previous = now;
    }
    Ok(count)
}

/// Unweighted mean, sum or product of `expr` over the samples whose time
/// lies in `[lo, hi]`.
pub fn run_aggregate(
    op: PathOp,
    expr: &Expr,
    trace: &TimedTrace,
    window: (f64, f64),
    model: &SosModel,
) -> Result<f64> {
    let values = trace
        .samples()
        .iter()
        .filter(|s| s.time() >= window.0 && s.time() <= window.1)
        .map(|s| Evaluator::new(model, s).eval_number(expr))
        .collect::<Result<Vec<_>>>()?;
    crate::ocl::aggregate(op, &values)
}

const UNKNOWN: u8 = 0;
const FALSE: u8 = 1;
const TRUE: u8 = 2;

/// Memoized evaluation over a flattened formula: each (node, position)
/// pair is decided at most once.
struct Monitor<'a> {
    nodes: Vec<&'a Formula>,
    children: Vec<Vec<usize>>,
    memo: Vec<u8>,
    trace: &'a TimedTrace,
    model: &'a SosModel,
    options: CheckOptions,
}

impl<'a> Monitor<'a> {
    fn new(
        formula: &'a Formula,
        trace: &'a TimedTrace,
        model: &'a SosModel,
        options: CheckOptions,
    ) -> Self {
        let mut m = Self {
            nodes: Vec::new(),
            children: Vec::new(),
            memo: Vec::new(),
            trace,
            model,
            options,
        };
        m.add(formula);
        m.memo = vec![UNKNOWN; m.nodes.len() * trace.len()];
        m
    }

    fn add(&mut self, f: &'a Formula) -> usize {
        let id = self.nodes.len();
        self.nodes.push(f);
        self.children.push(Vec::new());
        let kids = f.children().into_iter().map(|c| self.add(c)).collect();
        self.children[id] = kids;
        id
    }

    fn child(&self, node: usize, k: usize) -> usize {
        self.children[node][k]
    }

    fn end(&self, pos: usize, bound: &Bound) -> usize {
        window_end(self.trace, pos, bound.limit)
    }

    fn eval(&mut self, node: usize, pos: usize) -> Result<bool> {
        let slot = node * self.trace.len() + pos;
        match self.memo[slot] {
            TRUE => return Ok(true),
            FALSE => return Ok(false),
            _ => {}
        }
        let value = self.compute(node, pos)?;
        self.memo[slot] = if value { TRUE } else { FALSE };
        Ok(value)
    }

    fn compute(&mut self, node: usize, pos: usize) -> Result<bool> {
        let trace = self.trace;
        Ok(match self.nodes[node] {
            Formula::True => true,
            Formula::False => false,
            Formula::State(p) | Formula::Run(RunPred::Path(p)) => {
                eval_pred(p, trace, pos, self.model)?
            }
            Formula::Run(RunPred::Occ {
                prop,
                lo,
                hi,
                cmp,
                n,
            }) => {
                let count = occ_clipped(prop, *lo, *hi, trace, pos, self.model)?;
                match cmp {
                    OccCmp::AtLeast => count >= *n,
                    OccCmp::AtMost => count <= *n,
                }
            }
            Formula::Run(RunPred::Split {
                prop,
                lo,
                hi,
                first,
                second,
            }) => self.split(pos, prop, *lo, *hi, first, second)?,
            Formula::Not(_) => !self.eval(self.child(node, 0), pos)?,
            Formula::And(items) => {
                for k in 0..items.len() {
                    if !self.eval(self.child(node, k), pos)? {
                        return Ok(false);
                    }
                }
                true
            }
            Formula::Or(items) => {
                for k in 0..items.len() {
                    if self.eval(self.child(node, k), pos)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::Implies(..) => {
                !self.eval(self.child(node, 0), pos)? || self.eval(self.child(node, 1), pos)?
            }
            Formula::F(b, _) => {
                let c = self.child(node, 0);
                for j in pos..=self.end(pos, b) {
                    if self.eval(c, j)? {
                        return Ok(true);
                    }
                }
                false
            }
            Formula::G(b, _) => self.globally(self.child(node, 0), pos, b)?,
            Formula::X(b, _) => self.eval(self.child(node, 0), self.end(pos, b))?,
            Formula::U(b, _, _) => self.until(node, pos, b)?,
            Formula::W(b, _, _) => {
                self.until(node, pos, b)? || {
                    let k = if self.options.standard_weak_until { 0 } else { 1 };
                    self.globally(self.child(node, k), pos, b)?
                }
            }
        })
    }

    fn globally(&mut self, child: usize, pos: usize, b: &Bound) -> Result<bool> {
        for j in pos..=self.end(pos, b) {
            if !self.eval(child, j)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn until(&mut self, node: usize, pos: usize, b: &Bound) -> Result<bool> {
        let (lhs, rhs) = (self.child(node, 0), self.child(node, 1));
        for j in pos..=self.end(pos, b) {
            if self.eval(rhs, j)? {
                return Ok(true);
            }
            if !self.eval(lhs, j)? {
                return Ok(false);
            }
        }
        Ok(false)
    }

    /// `X[<=x] G[<=g] pred` at `pos`.
    fn next_globally(&self, pos: usize, x: f64, g: f64, pred: &StatePred) -> Result<bool> {
        let start = window_end(self.trace, pos, x);
        for j in start..=window_end(self.trace, start, g) {
            if !eval_pred(pred, self.trace, j, self.model)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn split(
        &self,
        pos: usize,
        prop: &StatePred,
        lo: f64,
        hi: f64,
        first: &StatePred,
        second: &StatePred,
    ) -> Result<bool> {
        if !self.next_globally(pos, lo, hi - lo, prop)? {
            return Ok(true);
        }
        let t0 = self.trace.time(pos);
        let mut cuts = vec![lo];
        for j in pos..self.trace.len() {
            let rel = self.trace.time(j) - t0;
            if rel > lo && rel < hi {
                cuts.push(rel);
            }
        }
        cuts.push(hi);
        for c in cuts {
            if self.next_globally(pos, lo, c - lo, first)?
                && self.next_globally(pos, c, hi - c, second)?
            {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Follows the subformula responsible for `value` at (`node`, `pos`)
    /// and returns the position where the explanation stops.
    fn explain(
        &mut self,
        node: usize,
        pos: usize,
        value: bool,
        path: &mut Vec<String>,
    ) -> Result<usize> {
        let f = self.nodes[node];
        match (f, value) {
            (Formula::Not(_), _) => {
                path.push("!".into());
                self.explain(self.child(node, 0), pos, !value, path)
            }
            (Formula::And(items), false) | (Formula::Or(items), true) => {
                let sep = if value { "|" } else { "&" };
                for k in 0..items.len() {
                    let c = self.child(node, k);
                    if self.eval(c, pos)? == value {
                        path.push(format!("{sep}[{k}]"));
                        return self.explain(c, pos, value, path);
                    }
                }
                Ok(pos)
            }
            (Formula::Implies(..), false) => {
                path.push("=>.rhs".into());
                self.explain(self.child(node, 1), pos, false, path)
            }
            (Formula::G(b, _), false) | (Formula::F(b, _), true) => {
                path.push(if value { "F" } else { "G" }.into());
                let c = self.child(node, 0);
                for j in pos..=self.end(pos, b) {
                    if self.eval(c, j)? == value {
                        return self.explain(c, j, value, path);
                    }
                }
                Ok(pos)
            }
            (Formula::F(b, _), false) => {
                path.push(format!("F{b} never satisfied"));
                Ok(self.end(pos, b))
            }
            (Formula::X(b, _), _) => {
                path.push("X".into());
                let j = self.end(pos, b);
                self.explain(self.child(node, 0), j, value, path)
            }
            (Formula::State(p), _) | (Formula::Run(RunPred::Path(p)), _) => {
                path.push(p.to_string());
                Ok(pos)
            }
            (Formula::Run(r), _) => {
                path.push(r.to_string());
                Ok(pos)
            }
            (Formula::U(..), _) => {
                path.push("U".into());
                Ok(pos)
            }
            (Formula::W(..), _) => {
                path.push("W".into());
                Ok(pos)
            }
            _ => Ok(pos),
        }
    }
}
