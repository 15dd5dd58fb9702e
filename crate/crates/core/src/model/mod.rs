//! System-of-systems model: component types with stochastic state
//! machines, a static instance table, named collections and the initial
//! valuation.

mod document;
mod trace;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::ocl::{Expr, Symbol, Value};
use crate::sim::Distribution;
use crate::time::TimeUnit;

pub use document::{load_model, save_model};
pub use trace::{read_trace, write_trace, StateValuation, TimedTrace};

/// Name of the implicit enum attribute holding an instance's machine state.
pub const STATE_ATTRIBUTE: &str = "state";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct InstanceId(pub u32);

impl InstanceId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrKind {
    Boolean,
    Integer,
    Real,
    Enum(Vec<Symbol>),
}

impl AttrKind {
    pub fn default_value(&self) -> Value {
        match self {
            AttrKind::Boolean => Value::Bool(false),
            AttrKind::Integer => Value::Int(0),
            AttrKind::Real => Value::Real(0.0),
            AttrKind::Enum(variants) => Value::Enum(variants[0].clone()),
        }
    }

    /// Checks that `value` fits this kind; integers are widened for reals.
    pub fn coerce(&self, value: Value) -> Option<Value> {
        match (self, value) {
            (AttrKind::Boolean, v @ Value::Bool(_)) => Some(v),
            (AttrKind::Integer, v @ Value::Int(_)) => Some(v),
            (AttrKind::Integer, Value::Real(r)) if r.fract() == 0.0 && r.abs() < 9e15 => {
                Some(Value::Int(r as i64))
            }
            (AttrKind::Real, Value::Real(r)) => Some(Value::Real(r)),
            (AttrKind::Real, Value::Int(i)) => Some(Value::Real(i as f64)),
            (AttrKind::Enum(variants), Value::Enum(sym)) if variants.contains(&sym) => {
                Some(Value::Enum(sym))
            }
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AttrKind::Boolean => "boolean",
            AttrKind::Integer => "integer",
            AttrKind::Real => "real",
            AttrKind::Enum(_) => "enum",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttrKind,
    /// Stochastic attributes are redrawn at start-up and whenever their
    /// instance fires a transition.
    pub distribution: Option<Distribution>,
}

/// Right-hand side of an action or a delay: a fresh random draw or an
/// expression over the current state.
#[derive(Debug, Clone, PartialEq)]
pub enum ValueExpr {
    Draw(Distribution),
    Expr(Expr),
}

impl ValueExpr {
    pub fn parse(text: &str) -> Result<Self> {
        match Distribution::parse_call(text)? {
            Some(dist) => Ok(ValueExpr::Draw(dist)),
            None => Ok(ValueExpr::Expr(crate::ocl::parse_expr(text)?)),
        }
    }
}

impl fmt::Display for ValueExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValueExpr::Draw(d) => write!(f, "{d}"),
            ValueExpr::Expr(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    /// Index into the owning component's attributes.
    pub attribute: usize,
    pub value: ValueExpr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub guard: Option<Expr>,
    pub delay: ValueExpr,
    pub actions: Vec<Action>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateMachine {
    pub states: Vec<Symbol>,
    pub initial: usize,
    pub transitions: Vec<Transition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentType {
    pub name: String,
    pub attributes: Vec<Attribute>,
    /// Static associations to other instances, e.g. `hostedFireFightingCars`.
    pub links: Vec<String>,
    pub machine: Option<StateMachine>,
}

impl ComponentType {
    pub fn attribute_index(&self, name: &str) -> Option<usize> {
        self.attributes.iter().position(|a| a.name == name)
    }

    /// Number of valuation slots: declared attributes plus the machine state.
    pub fn slot_count(&self) -> usize {
        self.attributes.len() + usize::from(self.machine.is_some())
    }

    /// Slot index of `name` within this type, including `state`.
    pub fn slot_of(&self, name: &str) -> Option<usize> {
        self.attribute_index(name).or_else(|| {
            (name == STATE_ATTRIBUTE && self.machine.is_some()).then_some(self.attributes.len())
        })
    }

    pub fn has_feature(&self, name: &str) -> bool {
        self.slot_of(name).is_some() || self.links.iter().any(|l| l == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub id: String,
    pub component: usize,
    pub links: BTreeMap<String, Vec<InstanceId>>,
}

/// A validated, immutable model.
#[derive(Debug, Clone, PartialEq)]
pub struct SosModel {
    pub name: String,
    pub time_unit: TimeUnit,
    pub components: Vec<ComponentType>,
    pub instances: Vec<Instance>,
    /// Named root collections, in declaration order.
    pub collections: Vec<(String, Vec<InstanceId>)>,
    initial: StateValuation,
    offsets: Vec<usize>,
    by_name: HashMap<String, InstanceId>,
}

/// Raw parts of a model before validation.
#[derive(Debug, Clone, Default)]
pub struct ModelParts {
    pub name: String,
    pub time_unit: Option<TimeUnit>,
    pub components: Vec<ComponentType>,
    pub instances: Vec<Instance>,
    pub collections: Vec<(String, Vec<InstanceId>)>,
    /// Explicit initial values per (instance, attribute name).
    pub initial_values: Vec<(InstanceId, String, Value)>,
}

impl SosModel {
    /// Validates `parts` and computes the initial valuation.
    pub fn new(parts: ModelParts) -> Result<Self> {
        let ModelParts {
            name,
            time_unit,
            components,
            instances,
            collections,
            initial_values,
        } = parts;
        let mut by_name = HashMap::new();
        for (idx, inst) in instances.iter().enumerate() {
            if by_name
                .insert(inst.id.clone(), InstanceId(idx as u32))
                .is_some()
            {
                return Err(Error::DuplicateInstance(inst.id.clone()));
            }
            if inst.component >= components.len() {
                return Err(Error::Model(format!(
                    "instance `{}` has an unknown type",
                    inst.id
                )));
            }
        }
        let mut offsets = Vec::with_capacity(instances.len());
        let mut slots = 0;
        for inst in &instances {
            offsets.push(slots);
            slots += components[inst.component].slot_count();
        }

        let mut seen = Vec::new();
        for (cname, members) in &collections {
            if seen.contains(&cname) {
                return Err(Error::Model(format!("duplicate collection `{cname}`")));
            }
            seen.push(cname);
            if let Some(bad) = members.iter().find(|m| m.index() >= instances.len()) {
                return Err(Error::Model(format!(
                    "collection `{cname}` references unknown instance #{}",
                    bad.0
                )));
            }
        }

        let mut values = Vec::with_capacity(slots);
        for inst in &instances {
            let ty = &components[inst.component];
            values.extend(ty.attributes.iter().map(|a| a.kind.default_value()));
            if let Some(m) = &ty.machine {
                values.push(Value::Enum(m.states[m.initial].clone()));
            }
        }
        let mut model = SosModel {
            name,
            time_unit: time_unit.unwrap_or(TimeUnit::Second),
            components,
            instances,
            collections,
            initial: StateValuation::new(0.0, Vec::new()),
            offsets,
            by_name,
        };
        for (inst, attr, value) in initial_values {
            let ty = model.component_of(inst);
            let idx = ty.attribute_index(&attr).ok_or_else(|| {
                Error::Model(format!(
                    "instance `{}`: attribute `{attr}` is not declared on `{}`",
                    model.instances[inst.index()].id,
                    ty.name
                ))
            })?;
            let kind = &ty.attributes[idx].kind;
            let coerced = kind.coerce(value.clone()).ok_or_else(|| {
                Error::Model(format!(
                    "instance `{}`: value {value} does not fit {} attribute `{attr}`",
                    model.instances[inst.index()].id,
                    kind.name()
                ))
            })?;
            values[model.offsets[inst.index()] + idx] = coerced;
        }
        model.initial = StateValuation::new(0.0, values);
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        for ty in &self.components {
            let ctx = |msg: String| Error::Model(format!("component `{}`: {msg}", ty.name));
            for (i, a) in ty.attributes.iter().enumerate() {
                if ty.attributes[..i].iter().any(|b| b.name == a.name) {
                    return Err(ctx(format!("duplicate attribute `{}`", a.name)));
                }
                if let AttrKind::Enum(v) = &a.kind {
                    if v.is_empty() {
                        return Err(ctx(format!("enum attribute `{}` has no variants", a.name)));
                    }
                }
                if let Some(d) = &a.distribution {
                    d.validate()?;
                    let fits = if d.is_boolean() {
                        a.kind == AttrKind::Boolean
                    } else {
                        a.kind == AttrKind::Real
                    };
                    if !fits {
                        return Err(ctx(format!(
                            "distribution {d} does not fit {} attribute `{}`",
                            a.kind.name(),
                            a.name
                        )));
                    }
                }
            }
            let Some(machine) = &ty.machine else {
                continue;
            };
            if ty.attribute_index(STATE_ATTRIBUTE).is_some() {
                return Err(ctx(format!(
                    "attribute name `{STATE_ATTRIBUTE}` is reserved for the state machine"
                )));
            }
            if machine.initial >= machine.states.len() {
                return Err(ctx("initial state is not declared".into()));
            }
            for t in &machine.transitions {
                if t.from >= machine.states.len() || t.to >= machine.states.len() {
                    return Err(ctx("transition references an undeclared state".into()));
                }
                if let Some(g) = &t.guard {
                    self.check_names(ty, g)?;
                }
                self.check_value_expr(ty, &t.delay)?;
                for action in &t.actions {
                    if action.attribute >= ty.attributes.len() {
                        return Err(ctx("action assigns an undeclared attribute".into()));
                    }
                    self.check_value_expr(ty, &action.value)?;
                }
            }
        }
        for inst in &self.instances {
            let ty = &self.components[inst.component];
            for (link, targets) in &inst.links {
                if !ty.links.contains(link) {
                    return Err(Error::Model(format!(
                        "instance `{}`: link `{link}` is not declared on `{}`",
                        inst.id, ty.name
                    )));
                }
                if targets.iter().any(|t| t.index() >= self.instances.len()) {
                    return Err(Error::Model(format!(
                        "instance `{}`: link `{link}` targets an unknown instance",
                        inst.id
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_value_expr(&self, owner: &ComponentType, v: &ValueExpr) -> Result<()> {
        match v {
            ValueExpr::Draw(d) => d.validate(),
            ValueExpr::Expr(e) => self.check_names(owner, e),
        }
    }

    /// Rejects guard/action expressions that mention undeclared features.
    fn check_names(&self, owner: &ComponentType, expr: &Expr) -> Result<()> {
        self.check_names_in(owner, expr, &mut Vec::new())
    }

    /// `scope` holds bound variables; `None` marks an implicit iterator,
    /// under which a bare name may be any element feature.
    fn check_names_in(
        &self,
        owner: &ComponentType,
        expr: &Expr,
        scope: &mut Vec<Option<String>>,
    ) -> Result<()> {
        let undeclared = |name: &str| {
            Error::Model(format!(
                "component `{}`: reference to undeclared attribute `{name}`",
                owner.name
            ))
        };
        let bound = |scope: &[Option<String>], name: &str| {
            scope.iter().any(|v| v.as_deref() == Some(name))
        };
        match expr {
            Expr::Name(name) => {
                let implicit_ok = scope.iter().any(Option::is_none)
                    && self.components.iter().any(|c| c.has_feature(name));
                if bound(scope, name)
                    || implicit_ok
                    || owner.has_feature(name)
                    || self.by_name.contains_key(name)
                {
                    Ok(())
                } else {
                    Err(undeclared(name))
                }
            }
            Expr::Nav(src, name) => {
                self.check_names_in(owner, src, scope)?;
                let ok = match src.as_ref() {
                    Expr::SelfRef => owner.has_feature(name),
                    Expr::Root => self.collection(name).is_some(),
                    Expr::Name(inst) if !bound(scope, inst) => match self.instance(inst) {
                        Some(id) => self.component_of(id).has_feature(name),
                        None => self.components.iter().any(|c| c.has_feature(name)),
                    },
                    _ => self.components.iter().any(|c| c.has_feature(name)),
                };
                if ok {
                    Ok(())
                } else {
                    Err(undeclared(name))
                }
            }
            Expr::Iterate {
                source, var, body, ..
            } => {
                self.check_names_in(owner, source, scope)?;
                scope.push(var.clone());
                let r = self.check_names_in(owner, body, scope);
                scope.pop();
                r
            }
            _ => expr
                .children()
                .into_iter()
                .try_for_each(|c| self.check_names_in(owner, c, scope)),
        }
    }

    pub fn initial_state(&self) -> &StateValuation {
        &self.initial
    }

    pub fn instance(&self, id: &str) -> Option<InstanceId> {
        self.by_name.get(id).copied()
    }

    pub fn instance_name(&self, id: InstanceId) -> &str {
        &self.instances[id.index()].id
    }

    pub fn component_of(&self, id: InstanceId) -> &ComponentType {
        &self.components[self.instances[id.index()].component]
    }

    pub fn collection(&self, name: &str) -> Option<&[InstanceId]> {
        self.collections
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, m)| m.as_slice())
    }

    pub fn links(&self, id: InstanceId, link: &str) -> Option<&[InstanceId]> {
        let inst = &self.instances[id.index()];
        match inst.links.get(link) {
            Some(targets) => Some(targets.as_slice()),
            None if self.component_of(id).links.iter().any(|l| l == link) => Some(&[]),
            None => None,
        }
    }

    /// Valuation slot for `attr` on instance `id` (`state` included).
    pub fn slot(&self, id: InstanceId, attr: &str) -> Option<usize> {
        self.component_of(id)
            .slot_of(attr)
            .map(|i| self.offsets[id.index()] + i)
    }

    pub fn instance_offset(&self, id: InstanceId) -> usize {
        self.offsets[id.index()]
    }

    pub fn slot_count(&self) -> usize {
        self.initial.values().len()
    }

    /// `instance.attribute` names of every slot, in slot order.
    pub fn slot_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.slot_count());
        for inst in &self.instances {
            let ty = &self.components[inst.component];
            for a in &ty.attributes {
                names.push(format!("{}.{}", inst.id, a.name));
            }
            if ty.machine.is_some() {
                names.push(format!("{}.{STATE_ATTRIBUTE}", inst.id));
            }
        }
        names
    }

    /// Kind of each slot, in slot order.
    pub fn slot_kinds(&self) -> Vec<AttrKind> {
        let mut kinds = Vec::with_capacity(self.slot_count());
        for inst in &self.instances {
            let ty = &self.components[inst.component];
            kinds.extend(ty.attributes.iter().map(|a| a.kind.clone()));
            if let Some(m) = &ty.machine {
                kinds.push(AttrKind::Enum(m.states.clone()));
            }
        }
        kinds
    }

    pub fn instance_ids(&self) -> impl Iterator<Item = InstanceId> {
        (0..self.instances.len() as u32).map(InstanceId)
    }
}
