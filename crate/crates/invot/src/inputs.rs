//! Cost, measure and family specifications: shorthands, JSON documents and
//! files, all normalized to one canonical JSON form before use.

use std::path::Path;

use invot_core::measures::GridGenerator;
use invot_core::{CostSpec, LocationScaleFamily, Measure1D};
use serde_json::{json, Map, Value};

use crate::error::{CliError, CliResult};

/// Problems found while checking a specification, as `(code, path, message)`.
pub type Diagnostics = Vec<Diagnostic>;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Diagnostic {
    pub code: String,
    pub path: String,
    pub message: String,
}

impl Diagnostic {
    pub fn new(code: &str, path: &str, message: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            path: path.into(),
            message: message.into(),
        }
    }
}

fn first_error(diags: Diagnostics) -> CliResult<()> {
    match diags.into_iter().next() {
        Some(d) => Err(CliError::config(d.code, format!("{}: {}", d.path, d.message))),
        None => Ok(()),
    }
}

/// Reads `arg` as inline JSON, a JSON file, or `None` for a shorthand.
fn load_document(arg: &str) -> CliResult<Option<Value>> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return Ok(Some(serde_json::from_str(trimmed)?));
    }
    let path = Path::new(arg);
    if arg.ends_with(".json") || path.is_file() {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        return Ok(Some(serde_json::from_str(&text)?));
    }
    Ok(None)
}

fn parse_numbers(list: &str, what: &str) -> CliResult<Vec<f64>> {
    list.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| CliError::config("InvalidShorthand", format!("{what}: cannot read {s:?} as a number")))
        })
        .collect()
}

/// Expands a cost argument to canonical JSON.
///
/// Shorthands: `power:p` (convex for `p > 1`, concave for `0 < p < 1`),
/// `concave:p`, each optionally followed by `+k` for a constant offset.
pub fn canonical_cost(arg: &str) -> CliResult<Value> {
    if let Some(doc) = load_document(arg)? {
        return Ok(doc);
    }
    let (body, offset) = match arg.split_once('+') {
        Some((b, k)) => (b, Some(parse_numbers(k, "cost offset")?[0])),
        None => (arg, None),
    };
    let (name, param) = body
        .split_once(':')
        .ok_or_else(|| CliError::config("InvalidShorthand", format!("cost {arg:?}: expected name:parameter")))?;
    let p = parse_numbers(param, "cost parameter")?;
    if p.len() != 1 {
        return Err(CliError::config("InvalidShorthand", format!("cost {arg:?}: one parameter expected")));
    }
    let kind = match name {
        "power" if p[0] < 1.0 => "concave",
        "power" => "convex",
        "concave" => "concave",
        _ => return Err(CliError::config("InvalidShorthand", format!("unknown cost shorthand {name:?}"))),
    };
    let mut doc = json!({"kind": kind, "builtin": "power", "p": p[0]});
    if let Some(k) = offset {
        doc["offset"] = json!(k);
    }
    Ok(doc)
}

fn number(obj: &Map<String, Value>, key: &str, path: &str, diags: &mut Diagnostics) -> Option<f64> {
    match obj.get(key) {
        Some(Value::Number(n)) => n.as_f64(),
        Some(_) => {
            diags.push(Diagnostic::new("SchemaError", &format!("{path}.{key}"), "expected a number"));
            None
        }
        None => {
            diags.push(Diagnostic::new("SchemaError", &format!("{path}.{key}"), "missing"));
            None
        }
    }
}

fn numbers(obj: &Map<String, Value>, key: &str, path: &str, diags: &mut Diagnostics) -> Option<Vec<f64>> {
    match obj.get(key) {
        Some(Value::Array(items)) => {
            let out: Option<Vec<f64>> = items.iter().map(|v| v.as_f64()).collect();
            if out.is_none() {
                diags.push(Diagnostic::new("SchemaError", &format!("{path}.{key}"), "expected an array of numbers"));
            }
            out
        }
        _ => {
            diags.push(Diagnostic::new("SchemaError", &format!("{path}.{key}"), "expected an array of numbers"));
            None
        }
    }
}

fn object<'a>(doc: &'a Value, path: &str, diags: &mut Diagnostics) -> Option<&'a Map<String, Value>> {
    let obj = doc.as_object();
    if obj.is_none() {
        diags.push(Diagnostic::new("SchemaError", path, "expected an object"));
    }
    obj
}

fn unknown_keys(obj: &Map<String, Value>, allowed: &[&str], path: &str, diags: &mut Diagnostics) {
    for key in obj.keys() {
        if !allowed.contains(&key.as_str()) {
            diags.push(Diagnostic::new("SchemaError", &format!("{path}.{key}"), "unknown field"));
        }
    }
}

/// Every invariant violated by a canonical cost document.
pub fn check_cost(doc: &Value, path: &str) -> Diagnostics {
    let mut diags = Vec::new();
    let _ = build_cost_checked(doc, path, &mut diags);
    diags
}

fn build_cost_checked(doc: &Value, path: &str, diags: &mut Diagnostics) -> Option<CostSpec> {
    let obj = object(doc, path, diags)?;
    let kind = obj.get("kind").and_then(Value::as_str);
    let builtin = obj.get("builtin").and_then(Value::as_str);
    let offset = match obj.get("offset") {
        None => 0.0,
        Some(_) => number(obj, "offset", path, diags)?,
    };
    let cost = match (kind, builtin) {
        (Some(kind @ ("convex" | "concave")), Some("power")) => {
            unknown_keys(obj, &["kind", "builtin", "p", "offset"], path, diags);
            let p = number(obj, "p", path, diags)?;
            let built = if kind == "convex" {
                CostSpec::convex_power(p)
            } else {
                CostSpec::concave_power(p)
            };
            match built {
                Ok(c) => c,
                Err(e) => {
                    diags.push(Diagnostic::new("OutOfRange", &format!("{path}.p"), e.to_string()));
                    return None;
                }
            }
        }
        (Some(kind @ ("convex" | "concave")), Some("grid")) => {
            let (xk, hk) = if kind == "convex" || obj.contains_key("x") {
                ("x", "h")
            } else {
                ("t", "l")
            };
            unknown_keys(obj, &["kind", "builtin", xk, hk, "offset"], path, diags);
            let x = numbers(obj, xk, path, diags)?;
            let h = numbers(obj, hk, path, diags)?;
            let class = if kind == "convex" {
                invot_core::CostKind::Convex
            } else {
                invot_core::CostKind::Concave
            };
            let problems = invot_core::cost::grid_cost_diagnostics(class, &x, &h);
            if !problems.is_empty() {
                for p in problems {
                    diags.push(Diagnostic::new("NonMonotoneCostGrid", &format!("{path}.{hk}"), p));
                }
                return None;
            }
            let built = if kind == "convex" {
                CostSpec::convex_grid(x, h)
            } else {
                CostSpec::concave_grid(x, h)
            };
            match built {
                Ok(c) => c,
                Err(e) => {
                    diags.push(Diagnostic::new(e.name(), path, e.to_string()));
                    return None;
                }
            }
        }
        _ => {
            diags.push(Diagnostic::new(
                "SchemaError",
                path,
                "expected kind convex|concave and builtin power|grid",
            ));
            return None;
        }
    };
    Some(cost.with_offset(offset))
}

pub fn build_cost(doc: &Value, path: &str) -> CliResult<CostSpec> {
    let mut diags = Vec::new();
    let cost = build_cost_checked(doc, path, &mut diags);
    first_error(diags)?;
    Ok(cost.expect("diagnostics are empty"))
}

/// Expands a measure argument to canonical JSON.
///
/// Shorthands: `normal:a,b`, `cauchy:a,b`, `laplace:a,b`,
/// `exponential-scale:a,b` and `uniform:lo,hi`.
pub fn canonical_measure(arg: &str) -> CliResult<Value> {
    if let Some(doc) = load_document(arg)? {
        return Ok(doc);
    }
    let (name, params) = arg
        .split_once(':')
        .ok_or_else(|| CliError::config("InvalidShorthand", format!("measure {arg:?}: expected name:a,b")))?;
    let p = parse_numbers(params, "measure parameters")?;
    if p.len() != 2 {
        return Err(CliError::config(
            "InvalidShorthand",
            format!("measure {arg:?}: two parameters expected"),
        ));
    }
    if name == "uniform" {
        return Ok(json!({"family": "uniform", "lo": p[0], "hi": p[1]}));
    }
    if LocationScaleFamily::from_name(name).is_none() {
        return Err(CliError::config("InvalidShorthand", format!("unknown family {name:?}")));
    }
    Ok(json!({"family": name, "a": p[0], "b": p[1]}))
}

fn generator(doc: &Value, path: &str, diags: &mut Diagnostics) -> Option<LocationScaleFamily> {
    let obj = object(doc, path, diags)?;
    unknown_keys(obj, &["grid", "density"], path, diags);
    let grid = numbers(obj, "grid", path, diags)?;
    let density = numbers(obj, "density", path, diags)?;
    match GridGenerator::new(grid, density) {
        Ok(g) => Some(LocationScaleFamily::CustomGrid(g)),
        Err(e) => {
            diags.push(Diagnostic::new(e.name(), path, e.to_string()));
            None
        }
    }
}

fn build_measure_checked(doc: &Value, path: &str, grid_n: usize, diags: &mut Diagnostics) -> Option<Measure1D> {
    let obj = object(doc, path, diags)?;
    let built = match obj.get("family").and_then(Value::as_str) {
        None if obj.contains_key("grid") => {
            unknown_keys(obj, &["grid", "density"], path, diags);
            let grid = numbers(obj, "grid", path, diags)?;
            let density = numbers(obj, "density", path, diags)?;
            Measure1D::from_density(grid, density)
        }
        Some("uniform") => {
            unknown_keys(obj, &["family", "lo", "hi"], path, diags);
            let lo = number(obj, "lo", path, diags)?;
            let hi = number(obj, "hi", path, diags)?;
            Measure1D::uniform(lo, hi, grid_n)
        }
        Some(name) => {
            let family = if name == "custom-grid" {
                unknown_keys(obj, &["family", "generator", "a", "b"], path, diags);
                let gen_doc = obj.get("generator").cloned().unwrap_or(Value::Null);
                generator(&gen_doc, &format!("{path}.generator"), diags)?
            } else {
                unknown_keys(obj, &["family", "a", "b"], path, diags);
                match LocationScaleFamily::from_name(name) {
                    Some(f) => f,
                    None => {
                        diags.push(Diagnostic::new(
                            "SchemaError",
                            &format!("{path}.family"),
                            format!("unknown family {name:?}"),
                        ));
                        return None;
                    }
                }
            };
            let a = number(obj, "a", path, diags)?;
            let b = number(obj, "b", path, diags)?;
            if b <= 0.0 {
                diags.push(Diagnostic::new(
                    "NonPositiveScale",
                    &format!("{path}.b"),
                    format!("scale must be positive, got {b}"),
                ));
                return None;
            }
            family.member_with(a, b, grid_n, invot_core::measures::DEFAULT_TAIL_MASS)
        }
        None => {
            diags.push(Diagnostic::new("SchemaError", path, "expected grid/density or a family"));
            return None;
        }
    };
    match built {
        Ok(m) => Some(m),
        Err(e) => {
            diags.push(Diagnostic::new(e.name(), path, e.to_string()));
            None
        }
    }
}

pub fn check_measure(doc: &Value, path: &str, grid_n: usize) -> Diagnostics {
    let mut diags = Vec::new();
    let _ = build_measure_checked(doc, path, grid_n, &mut diags);
    diags
}

pub fn build_measure(doc: &Value, path: &str, grid_n: usize) -> CliResult<Measure1D> {
    let mut diags = Vec::new();
    let m = build_measure_checked(doc, path, grid_n, &mut diags);
    first_error(diags)?;
    Ok(m.expect("diagnostics are empty"))
}

/// Family argument: a builtin name, or a JSON generator `{"grid", "density"}`.
pub fn canonical_family(arg: &str) -> CliResult<Value> {
    if let Some(doc) = load_document(arg)? {
        return Ok(json!({"family": "custom-grid", "generator": doc}));
    }
    if LocationScaleFamily::from_name(arg).is_none() {
        return Err(CliError::config("InvalidShorthand", format!("unknown family {arg:?}")));
    }
    Ok(json!({"family": arg}))
}

pub fn check_family(doc: &Value, path: &str) -> Diagnostics {
    let mut diags = Vec::new();
    let _ = build_family_checked(doc, path, &mut diags);
    diags
}

fn build_family_checked(doc: &Value, path: &str, diags: &mut Diagnostics) -> Option<LocationScaleFamily> {
    let obj = object(doc, path, diags)?;
    match obj.get("family").and_then(Value::as_str) {
        Some("custom-grid") => generator(obj.get("generator").unwrap_or(&Value::Null), &format!("{path}.generator"), diags),
        Some(name) => {
            let f = LocationScaleFamily::from_name(name);
            if f.is_none() {
                diags.push(Diagnostic::new("SchemaError", path, format!("unknown family {name:?}")));
            }
            f
        }
        None => {
            diags.push(Diagnostic::new("SchemaError", path, "missing family"));
            None
        }
    }
}

pub fn build_family(doc: &Value, path: &str) -> CliResult<LocationScaleFamily> {
    let mut diags = Vec::new();
    let f = build_family_checked(doc, path, &mut diags);
    first_error(diags)?;
    Ok(f.expect("diagnostics are empty"))
}
