//! `.sosm` model documents (TOML).
//!
//! ```toml
//! name = "lamp"
//! time_unit = "day"
//!
//! [[component]]
//! name = "Lamp"
//! links = ["neighbours"]
//! states = ["Off", "On"]
//! initial = "Off"
//!
//! [[component.attribute]]
//! name = "brightness"
//! kind = "real"
//! distribution = "uniform(0.5, 1.0)"
//!
//! [[component.transition]]
//! from = "Off"
//! to = "On"
//! guard = "not self.broken"
//! delay = "exponential(2.0)"
//! actions = ["brightness := 1.0"]
//!
//! [[instance]]
//! id = "lamp_1"
//! type = "Lamp"
//! values = { brightness = 0.0 }
//! links = { neighbours = ["lamp_2"] }
//!
//! [[collection]]
//! name = "itsLamps"
//! members = ["lamp_1", "lamp_2"]
//! ```

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Location, Result};
use crate::ocl::{Symbol, Value};
use crate::sim::Distribution;
use crate::time::TimeUnit;

use super::{
    Action, AttrKind, Attribute, ComponentType, Instance, InstanceId, ModelParts, SosModel,
    StateMachine, Transition, ValueExpr,
};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    #[serde(default)]
    name: String,
    time_unit: String,
    #[serde(rename = "component", default)]
    components: Vec<ComponentDoc>,
    #[serde(rename = "instance", default)]
    instances: Vec<InstanceDoc>,
    #[serde(rename = "collection", default)]
    collections: Vec<CollectionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentDoc {
    name: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    links: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    states: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    initial: Option<String>,
    #[serde(rename = "attribute", default)]
    attributes: Vec<AttributeDoc>,
    #[serde(rename = "transition", default)]
    transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttributeDoc {
    name: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    variants: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    distribution: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TransitionDoc {
    from: String,
    to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<String>,
    delay: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    actions: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    id: String,
    #[serde(rename = "type")]
    component: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    values: BTreeMap<String, toml::Value>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    links: BTreeMap<String, Vec<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CollectionDoc {
    name: String,
    members: Vec<String>,
}

/// Parses and validates a model document.
pub fn load_model(text: &str) -> Result<SosModel> {
    let doc: ModelDoc = toml::from_str(text).map_err(|e| {
        let location = e
            .span()
            .map(|span| Location::from_offset(text, span.start))
            .unwrap_or_default();
        Error::Syntax {
            location,
            message: e.message().to_string(),
            expected: Vec::new(),
        }
    })?;
    from_doc(doc)
}

/// Serializes a model back to document form.
pub fn save_model(model: &SosModel) -> Result<String> {
    toml::to_string(&to_doc(model)).map_err(|e| Error::Io(e.to_string()))
}

fn from_doc(doc: ModelDoc) -> Result<SosModel> {
    let time_unit = TimeUnit::parse(doc.time_unit.trim())?;

    let mut components = Vec::with_capacity(doc.components.len());
    for c in &doc.components {
        if components.iter().any(|k: &ComponentType| k.name == c.name) {
            return Err(Error::Model(format!("duplicate component type `{}`", c.name)));
        }
        components.push(component_from_doc(c)?);
    }

    let mut names: BTreeMap<&str, InstanceId> = BTreeMap::new();
    for (i, inst) in doc.instances.iter().enumerate() {
        if names.insert(&inst.id, InstanceId(i as u32)).is_some() {
            return Err(Error::DuplicateInstance(inst.id.clone()));
        }
    }
    let resolve = |owner: &str, id: &str| {
        names.get(id).copied().ok_or_else(|| {
            Error::Model(format!("{owner}: reference to unknown instance `{id}`"))
        })
    };

    let mut instances = Vec::with_capacity(doc.instances.len());
    let mut initial_values = Vec::new();
    for (i, inst) in doc.instances.iter().enumerate() {
        let component = components
            .iter()
            .position(|c| c.name == inst.component)
            .ok_or_else(|| {
                Error::Model(format!(
                    "instance `{}`: unknown component type `{}`",
                    inst.id, inst.component
                ))
            })?;
        let mut links = BTreeMap::new();
        for (link, targets) in &inst.links {
            let ids = targets
                .iter()
                .map(|t| resolve(&format!("instance `{}`", inst.id), t))
                .collect::<Result<Vec<_>>>()?;
            links.insert(link.clone(), ids);
        }
        for (attr, raw) in &inst.values {
            let value = toml_to_value(raw).ok_or_else(|| {
                Error::Model(format!(
                    "instance `{}`: unsupported value {raw} for `{attr}`",
                    inst.id
                ))
            })?;
            initial_values.push((InstanceId(i as u32), attr.clone(), value));
        }
        instances.push(Instance {
            id: inst.id.clone(),
            component,
            links,
        });
    }

    let collections = doc
        .collections
        .iter()
        .map(|c| {
            let members = c
                .members
                .iter()
                .map(|m| resolve(&format!("collection `{}`", c.name), m))
                .collect::<Result<Vec<_>>>()?;
            Ok((c.name.clone(), members))
        })
        .collect::<Result<Vec<_>>>()?;

    SosModel::new(ModelParts {
        name: doc.name,
        time_unit: Some(time_unit),
        components,
        instances,
        collections,
        initial_values,
    })
}

fn component_from_doc(c: &ComponentDoc) -> Result<ComponentType> {
    let ctx = |msg: String| Error::Model(format!("component `{}`: {msg}", c.name));
    let mut attributes = Vec::with_capacity(c.attributes.len());
    for a in &c.attributes {
        let kind = match a.kind.as_str() {
            "boolean" | "bool" => AttrKind::Boolean,
            "integer" | "int" => AttrKind::Integer,
            "real" => AttrKind::Real,
            "enum" => AttrKind::Enum(a.variants.iter().map(|v| Symbol::new(v)).collect()),
            other => return Err(ctx(format!("attribute `{}` has unknown kind `{other}`", a.name))),
        };
        if !matches!(kind, AttrKind::Enum(_)) && !a.variants.is_empty() {
            return Err(ctx(format!("only enum attributes take variants (`{}`)", a.name)));
        }
        let distribution = a
            .distribution
            .as_deref()
            .map(str::parse::<Distribution>)
            .transpose()?;
        attributes.push(Attribute {
            name: a.name.clone(),
            kind,
            distribution,
        });
    }

    let machine = if c.states.is_empty() {
        if !c.transitions.is_empty() || c.initial.is_some() {
            return Err(ctx("transitions need a `states` list".into()));
        }
        None
    } else {
        let states: Vec<Symbol> = c.states.iter().map(|s| Symbol::new(s)).collect();
        let state_index = |name: &str| {
            c.states
                .iter()
                .position(|s| s == name)
                .ok_or_else(|| ctx(format!("undeclared state `{name}`")))
        };
        let initial = match &c.initial {
            Some(name) => state_index(name)?,
            None => return Err(ctx("a state machine needs exactly one `initial` state".into())),
        };
        let mut transitions = Vec::with_capacity(c.transitions.len());
        for t in &c.transitions {
            let guard = t
                .guard
                .as_deref()
                .map(crate::ocl::parse_expr)
                .transpose()
                .map_err(|e| ctx(format!("guard of {} -> {}: {e}", t.from, t.to)))?;
            let delay = ValueExpr::parse(&t.delay)
                .map_err(|e| ctx(format!("delay of {} -> {}: {e}", t.from, t.to)))?;
            let actions = t
                .actions
                .iter()
                .map(|a| parse_action(a, &attributes).map_err(|e| ctx(e.to_string())))
                .collect::<Result<Vec<_>>>()?;
            transitions.push(Transition {
                from: state_index(&t.from)?,
                to: state_index(&t.to)?,
                guard,
                delay,
                actions,
            });
        }
        Some(StateMachine {
            states,
            initial,
            transitions,
        })
    };

    Ok(ComponentType {
        name: c.name.clone(),
        attributes,
        links: c.links.clone(),
        machine,
    })
}

fn parse_action(text: &str, attributes: &[Attribute]) -> Result<Action> {
    let (target, value) = text
        .split_once(":=")
        .ok_or_else(|| Error::Model(format!("action `{text}` must have the form `attr := value`")))?;
    let target = target.trim();
    let target = target.strip_prefix("self.").unwrap_or(target);
    let attribute = attributes
        .iter()
        .position(|a| a.name == target)
        .ok_or_else(|| Error::Model(format!("action assigns undeclared attribute `{target}`")))?;
    Ok(Action {
        attribute,
        value: ValueExpr::parse(value.trim())?,
    })
}

fn toml_to_value(raw: &toml::Value) -> Option<Value> {
    Some(match raw {
        toml::Value::Boolean(b) => Value::Bool(*b),
        toml::Value::Integer(i) => Value::Int(*i),
        toml::Value::Float(f) => Value::Real(*f),
        toml::Value::String(s) => Value::Enum(Symbol::new(s)),
        _ => return None,
    })
}

fn value_to_toml(value: &Value) -> toml::Value {
    match value {
        Value::Bool(b) => toml::Value::Boolean(*b),
        Value::Int(i) => toml::Value::Integer(*i),
        Value::Real(r) => toml::Value::Float(*r),
        Value::Enum(s) => toml::Value::String(s.as_str().to_string()),
        other => toml::Value::String(other.to_string()),
    }
}

fn to_doc(model: &SosModel) -> ModelDoc {
    let components = model
        .components
        .iter()
        .map(|c| {
            let (states, initial, transitions) = match &c.machine {
                None => (Vec::new(), None, Vec::new()),
                Some(m) => {
                    let name = |i: usize| m.states[i].as_str().to_string();
                    let transitions = m
                        .transitions
                        .iter()
                        .map(|t| TransitionDoc {
                            from: name(t.from),
                            to: name(t.to),
                            guard: t.guard.as_ref().map(ToString::to_string),
                            delay: t.delay.to_string(),
                            actions: t
                                .actions
                                .iter()
                                .map(|a| format!("{} := {}", c.attributes[a.attribute].name, a.value))
                                .collect(),
                        })
                        .collect();
                    (
                        m.states.iter().map(|s| s.as_str().to_string()).collect(),
                        Some(name(m.initial)),
                        transitions,
                    )
                }
            };
            ComponentDoc {
                name: c.name.clone(),
                links: c.links.clone(),
                states,
                initial,
                attributes: c
                    .attributes
                    .iter()
                    .map(|a| AttributeDoc {
                        name: a.name.clone(),
                        kind: a.kind.name().to_string(),
                        variants: match &a.kind {
                            AttrKind::Enum(v) => v.iter().map(|s| s.as_str().to_string()).collect(),
                            _ => Vec::new(),
                        },
                        distribution: a.distribution.map(|d| d.to_string()),
                    })
                    .collect(),
                transitions,
            }
        })
        .collect();

    let initial = model.initial_state();
    let instances = model
        .instance_ids()
        .map(|id| {
            let inst = &model.instances[id.index()];
            let ty = model.component_of(id);
            let offset = model.instance_offset(id);
            let values = ty
                .attributes
                .iter()
                .enumerate()
                .map(|(i, a)| (a.name.clone(), value_to_toml(initial.value(offset + i))))
                .collect();
            let links = inst
                .links
                .iter()
                .map(|(name, targets)| {
                    (
                        name.clone(),
                        targets.iter().map(|t| model.instance_name(*t).to_string()).collect(),
                    )
                })
                .collect();
            InstanceDoc {
                id: inst.id.clone(),
                component: ty.name.clone(),
                values,
                links,
            }
        })
        .collect();

    ModelDoc {
        name: model.name.clone(),
        time_unit: model.time_unit.to_string(),
        components,
        instances,
        collections: model
            .collections
            .iter()
            .map(|(name, members)| CollectionDoc {
                name: name.clone(),
                members: members
                    .iter()
                    .map(|m| model.instance_name(*m).to_string())
                    .collect(),
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
time_unit = "s"

[[component]]
name = "Lamp"
[[component.attribute]]
name = "on"
kind = "boolean"

[[instance]]
id = "lamp"
type = "Lamp"

[[collection]]
name = "itsLamps"
members = ["lamp"]
"#;

    #[test]
    fn minimal_document() {
        let m = load_model(MINIMAL).unwrap();
        assert_eq!(m.instances.len(), 1);
        assert_eq!(m.collection("itsLamps").unwrap().len(), 1);
        assert_eq!(m.initial_state().values(), &[Value::Bool(false)]);
    }

    #[test]
    fn syntax_errors_carry_location() {
        let err = load_model("time_unit = \"s\"\n[[component]\nname = 1").unwrap_err();
        match err {
            Error::Syntax { location, .. } => assert_eq!(location.line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn duplicate_instance_in_document() {
        let text = MINIMAL.replace(
            "[[collection]]",
            "[[instance]]\nid = \"lamp\"\ntype = \"Lamp\"\n\n[[collection]]",
        );
        assert_eq!(
            load_model(&text).unwrap_err(),
            Error::DuplicateInstance("lamp".into())
        );
    }

    #[test]
    fn undeclared_guard_attribute() {
        let text = r#"
time_unit = "s"

[[component]]
name = "Lamp"
states = ["Off", "On"]
initial = "Off"

[[component.attribute]]
name = "on"
kind = "boolean"

[[component.transition]]
from = "Off"
to = "On"
guard = "self.voltage > 3"
delay = "1.0"

[[instance]]
id = "lamp"
type = "Lamp"
"#;
        let err = load_model(text).unwrap_err();
        assert!(err.to_string().contains("voltage"), "{err}");
    }

    #[test]
    fn save_then_load_is_identity() {
        let m = load_model(MINIMAL).unwrap();
        let again = load_model(&save_model(&m).unwrap()).unwrap();
        assert_eq!(m, again);
    }
}
