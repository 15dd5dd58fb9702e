use std::io::{BufRead, Write};

use serde_json::{Map, Number, Value as Json};

use crate::error::{Error, Result};
use crate::ocl::{Symbol, Value};

use super::{AttrKind, SosModel};

/// Full valuation of every model slot at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct StateValuation {
    time: f64,
    values: Vec<Value>,
}

impl StateValuation {
    pub fn new(time: f64, values: Vec<Value>) -> Self {
        Self { time, values }
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn value(&self, slot: usize) -> &Value {
        &self.values[slot]
    }

    pub fn set(&mut self, slot: usize, value: Value) {
        self.values[slot] = value;
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }
}

/// Finite run: samples with strictly increasing times, piecewise constant
/// and left-closed in between (`[t_i, t_{i+1})`).
#[derive(Debug, Clone, PartialEq)]
pub struct TimedTrace {
    samples: Vec<StateValuation>,
}

impl TimedTrace {
    pub fn new(samples: Vec<StateValuation>) -> Result<Self> {
        let first = samples
            .first()
            .ok_or_else(|| Error::Trace("a trace needs at least one sample".into()))?;
        if !(first.time >= 0.0 && first.time.is_finite()) {
            return Err(Error::Trace(format!(
                "start time {} must be a non-negative number",
                first.time
            )));
        }
        let width = first.values.len();
        for (i, pair) in samples.windows(2).enumerate() {
            #[allow(clippy::neg_cmp_op_on_partial_ord)]
            if !(pair[0].time < pair[1].time) || !pair[1].time.is_finite() {
                return Err(Error::Trace(format!(
                    "times must strictly increase: sample {} at {} follows {}",
                    i + 1,
                    pair[1].time,
                    pair[0].time
                )));
            }
            if pair[1].values.len() != width {
                return Err(Error::Trace(format!(
                    "sample {} has {} values, expected {width}",
                    i + 1,
                    pair[1].values.len()
                )));
            }
        }
        Ok(Self { samples })
    }

    pub fn samples(&self) -> &[StateValuation] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, i: usize) -> f64 {
        self.samples[i].time
    }

    pub fn start(&self) -> f64 {
        self.samples[0].time
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].time
    }

    /// Index of the sample in force at `t`: the `i` with
    /// `t_i <= t < t_{i+1}`, or the last sample when `t = t_n`.
    pub fn index_at(&self, t: f64) -> Result<usize> {
        if !(t >= self.start() && t <= self.end()) {
            return Err(Error::OutOfRange {
                time: t,
                start: self.start(),
                end: self.end(),
            });
        }
        Ok(self.samples.partition_point(|s| s.time <= t) - 1)
    }

    pub fn state_at(&self, t: f64) -> Result<&StateValuation> {
        Ok(&self.samples[self.index_at(t)?])
    }

    /// Last index `j >= from` with `t_j <= limit`.
    pub fn last_index_within(&self, from: usize, limit: f64) -> usize {
        let rest = &self.samples[from..];
        from + rest.partition_point(|s| s.time <= limit).saturating_sub(1)
    }
}

/// Writes one JSON record per sample: `{"t": <time>, "values": {...}}`,
/// keys in model slot order. The output is a pure function of the trace.
pub fn write_trace<W: Write>(model: &SosModel, trace: &TimedTrace, mut out: W) -> Result<()> {
    let names = model.slot_names();
    for sample in trace.samples() {
        let mut values = Map::with_capacity(names.len());
        for (name, value) in names.iter().zip(sample.values()) {
            values.insert(name.clone(), value_to_json(value)?);
        }
        let mut record = Map::with_capacity(2);
        record.insert("t".into(), float(sample.time())?);
        record.insert("values".into(), Json::Object(values));
        let line = serde_json::to_string(&Json::Object(record))
            .map_err(|e| Error::Io(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    Ok(())
}

fn float(v: f64) -> Result<Json> {
    Number::from_f64(v)
        .map(Json::Number)
        .ok_or_else(|| Error::Trace(format!("cannot encode non-finite number {v}")))
}

fn value_to_json(value: &Value) -> Result<Json> {
    Ok(match value {
        Value::Bool(b) => Json::Bool(*b),
        Value::Int(i) => Json::Number((*i).into()),
        Value::Real(r) => float(*r)?,
        Value::Enum(sym) => Json::String(sym.as_str().to_string()),
        other => {
            return Err(Error::Trace(format!(
                "{other} cannot be stored in a state valuation"
            )))
        }
    })
}

/// Reads a trace written by [`write_trace`], checking every record against
/// the model's slot table.
pub fn read_trace<R: BufRead>(model: &SosModel, input: R) -> Result<TimedTrace> {
    let names = model.slot_names();
    let kinds = model.slot_kinds();
    let mut samples = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let bad = |msg: String| Error::Trace(format!("line {}: {msg}", lineno + 1));
        let record: Json = serde_json::from_str(&line).map_err(|e| bad(e.to_string()))?;
        let time = record
            .get("t")
            .and_then(Json::as_f64)
            .ok_or_else(|| bad("missing numeric `t`".into()))?;
        let map = record
            .get("values")
            .and_then(Json::as_object)
            .ok_or_else(|| bad("missing `values` object".into()))?;
        if map.len() != names.len() {
            return Err(bad(format!(
                "expected {} values, found {}",
                names.len(),
                map.len()
            )));
        }
        let mut values = Vec::with_capacity(names.len());
        for (name, kind) in names.iter().zip(&kinds) {
            let raw = map
                .get(name)
                .ok_or_else(|| bad(format!("missing value for `{name}`")))?;
            values.push(
                json_to_value(raw, kind)
                    .ok_or_else(|| bad(format!("`{name}`: {raw} is not a valid {}", kind.name())))?,
            );
        }
        samples.push(StateValuation::new(time, values));
    }
    TimedTrace::new(samples)
}

fn json_to_value(raw: &Json, kind: &AttrKind) -> Option<Value> {
    let value = match raw {
        Json::Bool(b) => Value::Bool(*b),
        Json::Number(n) if kind == &AttrKind::Integer => Value::Int(n.as_i64()?),
        Json::Number(n) => Value::Real(n.as_f64()?),
        Json::String(s) => Value::Enum(Symbol::new(s)),
        _ => return None,
    };
    kind.coerce(value)
}
