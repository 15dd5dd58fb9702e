use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::model::{InstanceId, SosModel, StateValuation, TimedTrace};

use super::ast::{BinOp, Expr, PathOp, Quantifier, Symbol};

/// Runtime value. State valuations only ever hold the scalar variants.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Bool(bool),
    Int(i64),
    Real(f64),
    Enum(Symbol),
    Instance(InstanceId),
    Collection(Vec<Value>),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Real(r) => Some(*r),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Bool(_) => "boolean",
            Value::Int(_) => "integer",
            Value::Real(_) => "real",
            Value::Enum(_) => "enum",
            Value::Instance(_) => "instance",
            Value::Collection(_) => "collection",
        }
    }

    /// Renders instance references by name.
    pub fn display<'a>(&'a self, model: &'a SosModel) -> impl fmt::Display + 'a {
        DisplayValue { value: self, model }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Real(r) => write!(f, "{r:?}"),
            Value::Enum(s) => write!(f, "#{s}"),
            Value::Instance(id) => write!(f, "instance#{}", id.0),
            Value::Collection(items) => {
                f.write_str("Collection{")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_str("}")
            }
        }
    }
}

struct DisplayValue<'a> {
    value: &'a Value,
    model: &'a SosModel,
}

impl fmt::Display for DisplayValue<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.value {
            Value::Instance(id) => f.write_str(self.model.instance_name(*id)),
            Value::Collection(items) => {
                f.write_str("Collection{")?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{}", item.display(self.model))?;
                }
                f.write_str("}")
            }
            other => write!(f, "{other}"),
        }
    }
}

/// Variable name to instance, for the free variables of an expression.
pub type Bindings = BTreeMap<String, InstanceId>;

/// A suffix of a trace, needed by the path operators.
#[derive(Debug, Clone, Copy)]
pub struct RunContext<'a> {
    pub trace: &'a TimedTrace,
    pub start: usize,
}

enum Scope {
    Var(String, Value),
    Implicit(Value),
}

/// Evaluates expressions against one state of a model.
pub struct Evaluator<'a> {
    model: &'a SosModel,
    state: &'a StateValuation,
    run: Option<RunContext<'a>>,
    self_instance: Option<InstanceId>,
    scopes: Vec<Scope>,
}

impl<'a> Evaluator<'a> {
    pub fn new(model: &'a SosModel, state: &'a StateValuation) -> Self {
        Self {
            model,
            state,
            run: None,
            self_instance: None,
            scopes: Vec::new(),
        }
    }

    pub fn with_bindings(mut self, bindings: &Bindings) -> Self {
        for (var, id) in bindings {
            self.scopes.push(Scope::Var(var.clone(), Value::Instance(*id)));
        }
        self
    }

    pub fn with_run(mut self, run: RunContext<'a>) -> Self {
        self.run = Some(run);
        self
    }

    /// Resolves bare attribute names and `self` against `id`.
    pub fn with_self(mut self, id: InstanceId) -> Self {
        self.self_instance = Some(id);
        self
    }

    pub fn eval_bool(&mut self, expr: &Expr) -> Result<bool> {
        let v = self.eval(expr)?;
        v.as_bool()
            .ok_or_else(|| Error::Type(format!("`{expr}` is {}, expected boolean", v.kind())))
    }

    pub fn eval_number(&mut self, expr: &Expr) -> Result<f64> {
        let v = self.eval(expr)?;
        v.as_f64()
            .ok_or_else(|| Error::Type(format!("`{expr}` is {}, expected a number", v.kind())))
    }

    pub fn eval(&mut self, expr: &Expr) -> Result<Value> {
        match expr {
            Expr::Bool(b) => Ok(Value::Bool(*b)),
            Expr::Int(i) => Ok(Value::Int(*i)),
            Expr::Real(r) => Ok(Value::Real(*r)),
            Expr::Enum(s) => Ok(Value::Enum(s.clone())),
            Expr::Root => Err(Error::Type("`SoS` must be followed by a collection name".into())),
            Expr::SelfRef => self
                .self_instance
                .map(Value::Instance)
                .ok_or_else(|| Error::Unresolved("self".into())),
            Expr::Name(name) => self.resolve_name(name),
            Expr::Nav(src, name) => {
                if matches!(src.as_ref(), Expr::Root) {
                    return self
                        .model
                        .collection(name)
                        .map(|m| Value::Collection(m.iter().copied().map(Value::Instance).collect()))
                        .ok_or_else(|| Error::Unresolved(format!("SoS.{name}")));
                }
                let src = self.eval(src)?;
                self.navigate(&src, name)
            }
            Expr::Size(src) => match self.eval(src)? {
                Value::Collection(items) => Ok(Value::Int(items.len() as i64)),
                other => Err(Error::Type(format!("size() applied to {}", other.kind()))),
            },
            Expr::CollSum(src) => match self.eval(src)? {
                Value::Collection(items) => sum_values(&items),
                other => Err(Error::Type(format!("sum() applied to {}", other.kind()))),
            },
            Expr::Iterate {
                kind,
                source,
                var,
                body,
            } => {
                let items = match self.eval(source)? {
                    Value::Collection(items) => items,
                    other => {
                        return Err(Error::Type(format!(
                            "{}() applied to {}",
                            kind.keyword(),
                            other.kind()
                        )))
                    }
                };
                let want = *kind == Quantifier::Exists;
                for item in items {
                    self.scopes.push(match var {
                        Some(v) => Scope::Var(v.clone(), item),
                        None => Scope::Implicit(item),
                    });
                    let r = self.eval_bool(body);
                    self.scopes.pop();
                    if r? == want {
                        return Ok(Value::Bool(want));
                    }
                }
                Ok(Value::Bool(!want))
            }
            Expr::Not(inner) => Ok(Value::Bool(!self.eval_bool(inner)?)),
            Expr::Neg(inner) => match self.eval(inner)? {
                Value::Int(i) => i
                    .checked_neg()
                    .map(Value::Int)
                    .ok_or_else(|| Error::Eval("integer overflow".into())),
                Value::Real(r) => Ok(Value::Real(-r)),
                other => Err(Error::Type(format!("cannot negate {}", other.kind()))),
            },
            Expr::Binary(op, lhs, rhs) => self.binary(*op, lhs, rhs),
            Expr::Path(op, inner) => {
                let run = self.require_run(expr)?;
                let last = run.trace.len() - 1;
                let values = (run.start..=last)
                    .map(|j| self.at_sample(run.trace, j, inner))
                    .collect::<Result<Vec<_>>>()?;
                Ok(Value::Real(aggregate(*op, &values)?))
            }
            Expr::At(inner, offset) => {
                let run = self.require_run(expr)?;
                let t = run.trace.time(run.start) + offset.in_unit(self.model.time_unit);
                let j = run.trace.index_at(t)?;
                Ok(Value::Real(self.at_sample(run.trace, j, inner)?))
            }
        }
    }

    fn require_run(&self, expr: &Expr) -> Result<RunContext<'a>> {
        self.run.ok_or_else(|| {
            Error::Eval(format!(
                "path operator in `{expr}` needs a run, not a single state"
            ))
        })
    }

    /// Evaluates a numeric expression at sample `j`, keeping variable
    /// scopes but without run context (path operators do not nest).
    fn at_sample(&mut self, trace: &'a TimedTrace, j: usize, inner: &Expr) -> Result<f64> {
        let saved_state = std::mem::replace(&mut self.state, &trace.samples()[j]);
        let saved_run = self.run.take();
        let r = self.eval_number(inner);
        self.state = saved_state;
        self.run = saved_run;
        r
    }

    fn resolve_name(&self, name: &str) -> Result<Value> {
        for scope in self.scopes.iter().rev() {
            match scope {
                Scope::Var(var, value) if var == name => return Ok(value.clone()),
                Scope::Implicit(Value::Instance(id))
                    if self.model.component_of(*id).has_feature(name) =>
                {
                    return self.navigate(&Value::Instance(*id), name);
                }
                _ => {}
            }
        }
        if let Some(id) = self.self_instance {
            if self.model.component_of(id).has_feature(name) {
                return self.navigate(&Value::Instance(id), name);
            }
        }
        self.model
            .instance(name)
            .map(Value::Instance)
            .ok_or_else(|| Error::Unresolved(name.to_string()))
    }

    fn navigate(&self, src: &Value, name: &str) -> Result<Value> {
        match src {
            Value::Instance(id) => {
                if let Some(slot) = self.model.slot(*id, name) {
                    Ok(self.state.value(slot).clone())
                } else if let Some(targets) = self.model.links(*id, name) {
                    Ok(Value::Collection(
                        targets.iter().copied().map(Value::Instance).collect(),
                    ))
                } else {
                    Err(Error::Unresolved(format!(
                        "{}.{name}",
                        self.model.instance_name(*id)
                    )))
                }
            }
            Value::Collection(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match self.navigate(item, name)? {
                        Value::Collection(inner) => out.extend(inner),
                        v => out.push(v),
                    }
                }
                Ok(Value::Collection(out))
            }
            other => Err(Error::Type(format!(
                "cannot navigate `.{name}` on {}",
                other.kind()
            ))),
        }
    }

    fn binary(&mut self, op: BinOp, lhs: &Expr, rhs: &Expr) -> Result<Value> {
        match op {
            BinOp::And => {
                Ok(Value::Bool(self.eval_bool(lhs)? && self.eval_bool(rhs)?))
            }
            BinOp::Or => Ok(Value::Bool(self.eval_bool(lhs)? || self.eval_bool(rhs)?)),
            BinOp::Implies => Ok(Value::Bool(!self.eval_bool(lhs)? || self.eval_bool(rhs)?)),
            _ => {
                let l = self.eval(lhs)?;
                let r = self.eval(rhs)?;
                if op.is_comparison() {
                    compare(op, &l, &r).map(Value::Bool)
                } else {
                    arithmetic(op, &l, &r)
                }
            }
        }
    }
}

fn compare(op: BinOp, l: &Value, r: &Value) -> Result<bool> {
    let mismatch = || {
        Error::Type(format!(
            "cannot compare {} with {} using `{}`",
            l.kind(),
            r.kind(),
            op.symbol()
        ))
    };
    let ordering = match (l, r) {
        (Value::Int(a), Value::Int(b)) => a.partial_cmp(b),
        (a, b) if a.as_f64().is_some() && b.as_f64().is_some() => {
            a.as_f64().unwrap().partial_cmp(&b.as_f64().unwrap())
        }
        (Value::Bool(a), Value::Bool(b)) if matches!(op, BinOp::Eq | BinOp::Ne) => {
            return Ok((a == b) == (op == BinOp::Eq))
        }
        (Value::Enum(a), Value::Enum(b)) if matches!(op, BinOp::Eq | BinOp::Ne) => {
            return Ok((a == b) == (op == BinOp::Eq))
        }
        (Value::Instance(a), Value::Instance(b)) if matches!(op, BinOp::Eq | BinOp::Ne) => {
            return Ok((a == b) == (op == BinOp::Eq))
        }
        _ => return Err(mismatch()),
    };
    let Some(ord) = ordering else {
        return Ok(op == BinOp::Ne);
    };
    use std::cmp::Ordering::*;
    Ok(match op {
        BinOp::Eq => ord == Equal,
        BinOp::Ne => ord != Equal,
        BinOp::Lt => ord == Less,
        BinOp::Le => ord != Greater,
        BinOp::Gt => ord == Greater,
        BinOp::Ge => ord != Less,
        _ => unreachable!("not a comparison"),
    })
}

fn arithmetic(op: BinOp, l: &Value, r: &Value) -> Result<Value> {
    if let (Value::Int(a), Value::Int(b)) = (l, r) {
        let checked = match op {
            BinOp::Add => a.checked_add(*b),
            BinOp::Sub => a.checked_sub(*b),
            BinOp::Mul => a.checked_mul(*b),
            _ => {
                if *b == 0 {
                    return Err(Error::DivisionByZero);
                }
                return Ok(Value::Real(*a as f64 / *b as f64));
            }
        };
        return checked
            .map(Value::Int)
            .ok_or_else(|| Error::Eval("integer overflow".into()));
    }
    let (Some(a), Some(b)) = (l.as_f64(), r.as_f64()) else {
        return Err(Error::Type(format!(
            "arithmetic `{}` on {} and {}",
            op.symbol(),
            l.kind(),
            r.kind()
        )));
    };
    Ok(Value::Real(match op {
        BinOp::Add => a + b,
        BinOp::Sub => a - b,
        BinOp::Mul => a * b,
        _ => {
            if b == 0.0 {
                return Err(Error::DivisionByZero);
            }
            a / b
        }
    }))
}

fn sum_values(items: &[Value]) -> Result<Value> {
    let mut int_total: i64 = 0;
    let mut real_total = 0.0;
    let mut all_int = true;
    for item in items {
        match item {
            Value::Int(i) => {
                int_total = int_total
                    .checked_add(*i)
                    .ok_or_else(|| Error::Eval("integer overflow".into()))?;
                real_total += *i as f64;
            }
            Value::Real(r) => {
                all_int = false;
                real_total += r;
            }
            other => return Err(Error::Type(format!("sum() over {}", other.kind()))),
        }
    }
    Ok(if all_int {
        Value::Int(int_total)
    } else {
        Value::Real(real_total)
    })
}

/// Unweighted mean, sum or product of per-sample values.
pub(crate) fn aggregate(op: PathOp, values: &[f64]) -> Result<f64> {
    match op {
        PathOp::Sum => Ok(values.iter().sum()),
        PathOp::Mean if values.is_empty() => Err(Error::Eval("mean over an empty window".into())),
        PathOp::Mean => Ok(values.iter().sum::<f64>() / values.len() as f64),
        PathOp::Prod if values.is_empty() => Err(Error::Eval("prod over an empty window".into())),
        PathOp::Prod => Ok(values.iter().product()),
    }
}

/// Truth value of a closed boolean expression in `state`.
pub fn eval_bool(
    expr: &Expr,
    state: &StateValuation,
    bindings: &Bindings,
    model: &SosModel,
) -> Result<bool> {
    Evaluator::new(model, state)
        .with_bindings(bindings)
        .eval_bool(expr)
}

/// Numeric value of a closed arithmetic expression in `state`.
pub fn eval_arith(
    expr: &Expr,
    state: &StateValuation,
    bindings: &Bindings,
    model: &SosModel,
) -> Result<f64> {
    Evaluator::new(model, state)
        .with_bindings(bindings)
        .eval_number(expr)
}
