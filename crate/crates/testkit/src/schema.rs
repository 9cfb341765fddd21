//! Small JSON Schema validator covering the subset the published response
//! schemas use: `type`, `enum`, `required`, `properties`,
//! `additionalProperties`, `items`, `minItems`, `maxItems`, `minimum`, and
//! sibling-file `$ref`.

use std::path::Path;

use serde_json::Value;

/// Validate `instance` against `schema_file` inside `schema_dir`.
pub fn validate_against_file(
    schema_dir: &Path,
    schema_file: &str,
    instance: &Value,
) -> Result<(), String> {
    let text = std::fs::read_to_string(schema_dir.join(schema_file))
        .map_err(|e| format!("cannot read schema {schema_file}: {e}"))?;
    let schema: Value =
        serde_json::from_str(&text).map_err(|e| format!("schema {schema_file} not JSON: {e}"))?;
    validate_node(schema_dir, &schema, instance, "$")
}

fn validate_node(
    schema_dir: &Path,
    schema: &Value,
    instance: &Value,
    path: &str,
) -> Result<(), String> {
    if let Some(reference) = schema.get("$ref").and_then(Value::as_str) {
        return validate_against_file(schema_dir, reference, instance);
    }

    if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
        if !allowed.contains(instance) {
            return Err(format!("{path}: {instance} not in enum {allowed:?}"));
        }
        return Ok(());
    }

    if let Some(type_spec) = schema.get("type") {
        let names: Vec<&str> = match type_spec {
            Value::String(s) => vec![s.as_str()],
            Value::Array(items) => items.iter().filter_map(Value::as_str).collect(),
            _ => return Err(format!("{path}: malformed type keyword")),
        };
        if !names.iter().any(|n| type_matches(n, instance)) {
            return Err(format!("{path}: expected type {names:?}, got {instance}"));
        }
    }

    if let Some(minimum) = schema.get("minimum").and_then(Value::as_f64) {
        if let Some(v) = instance.as_f64() {
            if v < minimum {
                return Err(format!("{path}: {v} below minimum {minimum}"));
            }
        }
    }

    if let Some(obj) = instance.as_object() {
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    return Err(format!("{path}: missing required property {key:?}"));
                }
            }
        }
        let properties = schema.get("properties").and_then(Value::as_object);
        if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
            for key in obj.keys() {
                if properties.is_none_or(|p| !p.contains_key(key)) {
                    return Err(format!("{path}: unexpected property {key:?}"));
                }
            }
        }
        if let Some(props) = properties {
            for (key, sub_schema) in props {
                if let Some(value) = obj.get(key) {
                    validate_node(schema_dir, sub_schema, value, &format!("{path}.{key}"))?;
                }
            }
        }
    }

    if let Some(arr) = instance.as_array() {
        if let Some(min) = schema.get("minItems").and_then(Value::as_u64) {
            if (arr.len() as u64) < min {
                return Err(format!("{path}: {} items, minItems {min}", arr.len()));
            }
        }
        if let Some(max) = schema.get("maxItems").and_then(Value::as_u64) {
            if (arr.len() as u64) > max {
                return Err(format!("{path}: {} items, maxItems {max}", arr.len()));
            }
        }
        if let Some(item_schema) = schema.get("items") {
            for (i, item) in arr.iter().enumerate() {
                validate_node(schema_dir, item_schema, item, &format!("{path}[{i}]"))?;
            }
        }
    }

    Ok(())
}

fn type_matches(name: &str, instance: &Value) -> bool {
    match name {
        "object" => instance.is_object(),
        "array" => instance.is_array(),
        "string" => instance.is_string(),
        "number" => instance.is_number(),
        "integer" => instance.is_u64() || instance.is_i64(),
        "boolean" => instance.is_boolean(),
        "null" => instance.is_null(),
        _ => false,
    }
}
