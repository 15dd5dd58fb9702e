//! Discrete-event simulation of the model's stochastic state machines.
//!
//! Every enabled transition owns a timer, drawn when its guard becomes true
//! and dropped when the guard turns false or the instance leaves the source
//! state. The earliest timer fires; ties go to the earlier instance, then
//! the earlier transition. Firing moves the instance to the target state,
//! drops its other timers, redraws its stochastic attributes and runs the
//! transition's actions in order. One sample is recorded per instant at
//! which something fired, plus a final sample at the horizon.

mod distribution;

pub use distribution::Distribution;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{InstanceId, SosModel, StateValuation, TimedTrace, ValueExpr};
use crate::ocl::{Evaluator, Symbol, Value};
use crate::time::TimeSpan;

/// Cap on transitions fired at a single instant.
const MAX_FIRINGS_PER_INSTANT: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub horizon: TimeSpan,
    /// Livelock guard on the number of samples.
    pub max_samples: usize,
}

impl SimConfig {
    pub fn new(seed: u64, horizon: TimeSpan) -> Self {
        Self {
            seed,
            horizon,
            max_samples: 1_000_000,
        }
    }
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `index` in a batch seeded with `seed`.
pub fn run_seed(seed: u64, index: u64) -> u64 {
    mix(seed ^ mix(index))
}

struct Engine<'a> {
    model: &'a SosModel,
    rng: ChaCha8Rng,
    state: StateValuation,
    /// Pending firing time per instance and transition.
    timers: Vec<Vec<Option<f64>>>,
}

/// Runs the model from its initial state up to `config.horizon`.
pub fn simulate(model: &SosModel, config: &SimConfig) -> Result<TimedTrace> {
    let horizon = config.horizon.in_unit(model.time_unit);
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(Error::Simulation(format!(
            "horizon must be positive, got {}",
            config.horizon
        )));
    }
    let mut engine = Engine {
        model,
        rng: ChaCha8Rng::seed_from_u64(config.seed),
        state: model.initial_state().clone().with_time(0.0),
        timers: model
            .instance_ids()
            .map(|id| {
                let n = model
                    .component_of(id)
                    .machine
                    .as_ref()
                    .map_or(0, |m| m.transitions.len());
                vec![None; n]
            })
            .collect(),
    };
    for id in model.instance_ids() {
        engine.redraw(id)?;
    }
    engine.refresh(0.0)?;

    let mut samples = vec![engine.state.clone()];
    while let Some((t, _, _)) = engine.next_event() {
        if t > horizon {
            break;
        }
        let mut fired = 0;
        while let Some((te, id, tr)) = engine.next_event() {
            if te != t {
                break;
            }
            engine.fire(id, tr, t)?;
            fired += 1;
            if fired > MAX_FIRINGS_PER_INSTANT {
                return Err(Error::Simulation(format!(
                    "more than {MAX_FIRINGS_PER_INSTANT} transitions fired at t = {t}"
                )));
            }
        }
        let sample = engine.state.clone().with_time(t);
        if t == 0.0 {
            samples[0] = sample;
        } else {
            samples.push(sample);
        }
        if samples.len() > config.max_samples {
            return Err(Error::Simulation(format!(
                "exceeded {} samples before t = {horizon}",
                config.max_samples
            )));
        }
    }
    if samples.last().unwrap().time() < horizon {
        samples.push(engine.state.clone().with_time(horizon));
    }
    TimedTrace::new(samples)
}

impl Engine<'_> {
    fn next_event(&self) -> Option<(f64, usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for (i, timers) in self.timers.iter().enumerate() {
            for (k, t) in timers.iter().enumerate() {
                if let Some(t) = *t {
                    if best.is_none_or(|(bt, _, _)| t < bt) {
                        best = Some((t, i, k));
                    }
                }
            }
        }
        best
    }

    fn machine_state(&self, id: InstanceId) -> Option<usize> {
        let machine = self.model.component_of(id).machine.as_ref()?;
        let slot = self.model.slot(id, crate::model::STATE_ATTRIBUTE)?;
        match self.state.value(slot) {
            Value::Enum(s) => machine.states.iter().position(|x| x == s),
            _ => None,
        }
    }

    fn value(&mut self, id: InstanceId, expr: &ValueExpr) -> Result<Value> {
        match expr {
            ValueExpr::Draw(d) => d.draw(&mut self.rng),
            ValueExpr::Expr(e) => Evaluator::new(self.model, &self.state)
                .with_self(id)
                .eval(e),
        }
    }

    /// Draws fresh values for the stochastic attributes of `id`.
    fn redraw(&mut self, id: InstanceId) -> Result<()> {
        let ty = self.model.component_of(id);
        let offset = self.model.instance_offset(id);
        for (i, attr) in ty.attributes.iter().enumerate() {
            if let Some(d) = &attr.distribution {
                let v = d.draw(&mut self.rng)?;
                let v = attr.kind.coerce(v).ok_or_else(|| {
                    Error::Simulation(format!("{d} does not fit attribute `{}`", attr.name))
                })?;
                self.state.set(offset + i, v);
            }
        }
        Ok(())
    }

    /// Schedules newly enabled transitions and drops disabled ones.
    fn refresh(&mut self, now: f64) -> Result<()> {
        let model = self.model;
        for id in model.instance_ids() {
            let Some(machine) = &model.component_of(id).machine else {
                continue;
            };
            let current = self.machine_state(id);
            for (k, tr) in machine.transitions.iter().enumerate() {
                let enabled = Some(tr.from) == current
                    && match &tr.guard {
                        None => true,
                        Some(g) => Evaluator::new(model, &self.state)
                            .with_self(id)
                            .eval_bool(g)?,
                    };
                let timer = &self.timers[id.index()][k];
                if !enabled {
                    self.timers[id.index()][k] = None;
                } else if timer.is_none() {
                    let delay = self
                        .value(id, &tr.delay)?
                        .as_f64()
                        .ok_or_else(|| Error::Simulation("transition delay is not a number".into()))?;
                    if !(delay >= 0.0 && delay.is_finite()) {
                        return Err(Error::Simulation(format!(
                            "transition delay {delay} of `{}` is not a non-negative number",
                            model.instance_name(id)
                        )));
                    }
                    self.timers[id.index()][k] = Some(now + delay);
                }
            }
        }
        Ok(())
    }

    fn fire(&mut self, instance: usize, transition: usize, now: f64) -> Result<()> {
        let model = self.model;
        let id = InstanceId(instance as u32);
        let ty = model.component_of(id);
        let machine = ty.machine.as_ref().expect("timers exist only for machines");
        let tr = &machine.transitions[transition];
        let slot = model.slot(id, crate::model::STATE_ATTRIBUTE).unwrap();
        self.state
            .set(slot, Value::Enum(Symbol::new(machine.states[tr.to].as_str())));
        self.timers[instance].iter_mut().for_each(|t| *t = None);
        self.redraw(id)?;
        let offset = model.instance_offset(id);
        for action in &tr.actions {
            let attr = &ty.attributes[action.attribute];
            let v = self.value(id, &action.value)?;
            let v = attr.kind.coerce(v.clone()).ok_or_else(|| {
                Error::Simulation(format!("cannot assign {v} to `{}`", attr.name))
            })?;
            self.state.set(offset + action.attribute, v);
        }
        self.refresh(now)
    }
}
