//! Config parsing and schema validation.

use std::collections::BTreeMap;
use std::fmt;

use hforge_core::ToleranceConfig;
use serde_json::{Map, Value};

use crate::schema::{self, Kind, ParamType, ScenarioSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    /// Dotted path of the offending field, e.g. `parameters.theta`.
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}: {}", self.field, self.message),
            None => write!(f, "{}: {}", self.field, self.message),
        }
    }
}

/// A validated config with defaults filled in.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub kind: Kind,
    pub builder: &'static str,
    pub parameters: Params,
    pub tolerances: ToleranceConfig,
    /// Keys changed from their defaults, in the order applied.
    pub tolerance_overrides: Vec<(String, f64)>,
    pub seed: u64,
    pub output: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Params(pub BTreeMap<String, Value>);

impl Params {
    pub fn f64(&self, key: &str) -> f64 {
        self.0[key].as_f64().unwrap_or_else(|| panic!("parameter {key} is not numeric"))
    }

    pub fn opt_f64(&self, key: &str) -> Option<f64> {
        self.0.get(key).and_then(Value::as_f64)
    }

    pub fn usize(&self, key: &str) -> usize {
        self.0[key].as_u64().unwrap_or_else(|| panic!("parameter {key} is not an integer")) as usize
    }

    pub fn str(&self, key: &str) -> &str {
        self.0[key].as_str().unwrap_or_else(|| panic!("parameter {key} is not text"))
    }

    pub fn opt_str(&self, key: &str) -> Option<&str> {
        self.0.get(key).and_then(Value::as_str)
    }

    pub fn bool(&self, key: &str) -> bool {
        self.0[key].as_bool().unwrap_or_else(|| panic!("parameter {key} is not a bool"))
    }

    pub fn to_json(&self) -> Value {
        Value::Object(self.0.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
    }
}

/// Line of the first `"key"` occurrence, searched after the line holding `after` when given.
fn line_of(source: &str, key: &str, after: Option<&str>) -> Option<usize> {
    let needle = format!("\"{key}\"");
    let start = after.and_then(|a| source.find(&format!("\"{a}\""))).unwrap_or(0);
    source[start..].find(&needle).map(|off| source[..start + off].matches('\n').count() + 1)
}

struct Collector<'a> {
    source: &'a str,
    out: Vec<Diagnostic>,
}

impl Collector<'_> {
    fn push(&mut self, field: impl Into<String>, key: &str, parent: Option<&str>, message: impl Into<String>) {
        let line = line_of(self.source, key, parent);
        self.out.push(Diagnostic { field: field.into(), line, message: message.into() });
    }
}

pub const TOP_LEVEL: [&str; 5] = ["kind", "parameters", "tolerances", "seed", "output"];

/// Parses and validates `source`; every problem found is reported, not just the first.
pub fn parse(source: &str) -> Result<ScenarioConfig, Vec<Diagnostic>> {
    let root: Value = serde_json::from_str(source).map_err(|e| {
        vec![Diagnostic { field: "<document>".into(), line: Some(e.line()), message: format!("invalid JSON: {e}") }]
    })?;
    let Value::Object(root) = root else {
        return Err(vec![Diagnostic { field: "<document>".into(), line: Some(1), message: "config must be a JSON object".into() }]);
    };
    let mut c = Collector { source, out: Vec::new() };
    for key in root.keys() {
        if !TOP_LEVEL.contains(&key.as_str()) {
            c.push(key.clone(), key, None, format!("unknown field (expected one of {})", TOP_LEVEL.join(", ")));
        }
    }

    let kind = match root.get("kind") {
        None => {
            c.out.push(Diagnostic { field: "kind".into(), line: None, message: "missing required field".into() });
            None
        }
        Some(Value::String(s)) => {
            let k = Kind::parse(s);
            if k.is_none() {
                let names: Vec<_> = Kind::ALL.iter().map(|k| k.name()).collect();
                c.push("kind", "kind", None, format!("unknown kind `{s}` (expected one of {})", names.join(", ")));
            }
            k
        }
        Some(_) => {
            c.push("kind", "kind", None, "must be a string");
            None
        }
    };

    let empty = Map::new();
    let params = match root.get("parameters") {
        None => &empty,
        Some(Value::Object(m)) => m,
        Some(_) => {
            c.push("parameters", "parameters", None, "must be an object");
            &empty
        }
    };

    let spec = kind.and_then(|k| resolve_builder(k, params, &mut c));
    let parameters = spec.as_ref().map(|s| check_params(s, params, &mut c)).unwrap_or_default();

    let mut tolerances = ToleranceConfig::default();
    let mut tolerance_overrides = Vec::new();
    match root.get("tolerances") {
        None => {}
        Some(Value::Object(m)) => {
            for (k, v) in m {
                let field = format!("tolerances.{k}");
                match v.as_f64() {
                    Some(x) => match tolerances.set(k, x) {
                        Ok(()) => tolerance_overrides.push((k.clone(), x)),
                        Err(e) => c.push(field, k, Some("tolerances"), e.to_string()),
                    },
                    None => c.push(field, k, Some("tolerances"), "must be a number"),
                }
            }
        }
        Some(_) => c.push("tolerances", "tolerances", None, "must be an object"),
    }

    let seed = match root.get("seed") {
        None => 0,
        Some(v) => v.as_u64().unwrap_or_else(|| {
            c.push("seed", "seed", None, "must be a non-negative integer");
            0
        }),
    };

    let output = match root.get("output") {
        None => spec.as_ref().map(|s| s.name.to_string()).unwrap_or_default(),
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(_) => {
            c.push("output", "output", None, "must be a non-empty string");
            String::new()
        }
    };

    if !c.out.is_empty() {
        return Err(c.out);
    }
    let spec = spec.expect("validated");
    Ok(ScenarioConfig { kind: spec.kind, builder: spec.name, parameters, tolerances, tolerance_overrides, seed, output })
}

fn resolve_builder(kind: Kind, params: &Map<String, Value>, c: &mut Collector) -> Option<ScenarioSpec> {
    let builders = schema::builders_of(kind);
    match params.get("builder") {
        Some(Value::String(b)) => match schema::find(b) {
            Some(s) if s.kind == kind => Some(s),
            Some(s) => {
                c.push("parameters.builder", "builder", Some("parameters"), format!("`{b}` is a {} builder, not {}", s.kind.name(), kind.name()));
                None
            }
            None => {
                c.push("parameters.builder", "builder", Some("parameters"), format!("unknown builder `{b}` (expected one of {})", builders.join(", ")));
                None
            }
        },
        Some(_) => {
            c.push("parameters.builder", "builder", Some("parameters"), "must be a string");
            None
        }
        None if builders.len() == 1 => schema::find(builders[0]),
        None => {
            c.out.push(Diagnostic {
                field: "parameters.builder".into(),
                line: line_of(c.source, "parameters", None),
                message: format!("missing required field (one of {})", builders.join(", ")),
            });
            None
        }
    }
}

fn check_params(spec: &ScenarioSpec, given: &Map<String, Value>, c: &mut Collector) -> Params {
    let mut out = BTreeMap::new();
    for key in given.keys() {
        if key != "builder" && spec.param(key).is_none() {
            let known: Vec<_> = spec.params.iter().map(|p| p.name).collect();
            c.push(format!("parameters.{key}"), key, Some("parameters"), format!("unknown parameter for {} (expected one of {})", spec.name, known.join(", ")));
        }
    }
    for p in &spec.params {
        let field = format!("parameters.{}", p.name);
        let value = match given.get(p.name) {
            Some(v) => v.clone(),
            None => match &p.default {
                Some(d) => d.clone(),
                None => {
                    c.out.push(Diagnostic {
                        field,
                        line: line_of(c.source, "parameters", None),
                        message: format!("missing required parameter ({})", p.doc),
                    });
                    continue;
                }
            },
        };
        if value.is_null() {
            continue;
        }
        let ok = match &p.ty {
            ParamType::Number => match value.as_f64() {
                Some(x) if p.bound.admits(x) => true,
                Some(x) => {
                    c.push(&field, p.name, Some("parameters"), format!("{x} violates bound {}", p.bound.describe()));
                    false
                }
                None => {
                    c.push(&field, p.name, Some("parameters"), "must be a number");
                    false
                }
            },
            ParamType::Integer => match value.as_u64() {
                Some(n) if p.bound.admits(n as f64) => true,
                Some(n) => {
                    c.push(&field, p.name, Some("parameters"), format!("{n} violates bound {}", p.bound.describe()));
                    false
                }
                None => {
                    c.push(&field, p.name, Some("parameters"), "must be a non-negative integer");
                    false
                }
            },
            ParamType::Bool => value.is_boolean() || {
                c.push(&field, p.name, Some("parameters"), "must be true or false");
                false
            },
            ParamType::Text { choices } => match value.as_str() {
                Some(s) if choices.contains(&s) => true,
                _ => {
                    c.push(&field, p.name, Some("parameters"), format!("must be one of {}", choices.join(", ")));
                    false
                }
            },
        };
        if ok {
            out.insert(p.name.to_string(), value);
        }
    }
    Params(out)
}

/// Applies a `key=value` tolerance override.
pub fn apply_override(cfg: &mut ScenarioConfig, spec: &str) -> Result<(), String> {
    let (key, value) = spec.split_once('=').ok_or_else(|| format!("--tol-override expects key=value, got `{spec}`"))?;
    let x: f64 = value.trim().parse().map_err(|_| format!("--tol-override {key}: `{value}` is not a number"))?;
    cfg.tolerances.set(key.trim(), x).map_err(|e| format!("--tol-override: {e}"))?;
    cfg.tolerance_overrides.push((key.trim().to_string(), x));
    Ok(())
}
