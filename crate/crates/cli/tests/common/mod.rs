//! Validator for the JSON-Schema subset used by the certificate schema:
//! `type`, `enum`, `required`, `properties`, `additionalProperties: false`,
//! `oneOf`, `minimum`, `exclusiveMinimum`.

#![allow(dead_code)]

use serde_json::Value;

pub const CERTIFICATE_SCHEMA: &str = include_str!("../../../core/schema/certificate.schema.json");

pub fn validate(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    if let Some(t) = schema.get("type").and_then(Value::as_str) {
        let ok = match t {
            "object" => value.is_object(),
            "string" => value.is_string(),
            "number" => value.is_number(),
            "integer" => value.is_u64() || value.is_i64(),
            other => return Err(format!("{path}: unsupported type {other}")),
        };
        if !ok {
            return Err(format!("{path}: expected {t}, got {value}"));
        }
    }
    if let Some(options) = schema.get("enum").and_then(Value::as_array) {
        if !options.contains(value) {
            return Err(format!("{path}: {value} not in {options:?}"));
        }
    }
    if let Some(x) = value.as_f64() {
        if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
            if x < min {
                return Err(format!("{path}: {x} < {min}"));
            }
        }
        if let Some(min) = schema.get("exclusiveMinimum").and_then(Value::as_f64) {
            if x <= min {
                return Err(format!("{path}: {x} <= {min}"));
            }
        }
    }
    if let Some(branches) = schema.get("oneOf").and_then(Value::as_array) {
        let matched = branches
            .iter()
            .filter(|b| validate(b, value, path).is_ok())
            .count();
        if matched != 1 {
            return Err(format!("{path}: matched {matched} oneOf branches"));
        }
    }
    if let Some(obj) = value.as_object() {
        let props = schema.get("properties").and_then(Value::as_object);
        if let Some(req) = schema.get("required").and_then(Value::as_array) {
            for key in req.iter().filter_map(Value::as_str) {
                if !obj.contains_key(key) {
                    return Err(format!("{path}: missing {key}"));
                }
            }
        }
        for (key, v) in obj {
            match props.and_then(|p| p.get(key)) {
                Some(sub) => validate(sub, v, &format!("{path}.{key}"))?,
                None if schema.get("additionalProperties") == Some(&Value::Bool(false)) => {
                    return Err(format!("{path}: unexpected key {key}"));
                }
                None => {}
            }
        }
    }
    Ok(())
}

pub fn validate_certificate(json: &str) -> Result<(), String> {
    let schema: Value = serde_json::from_str(CERTIFICATE_SCHEMA).map_err(|e| e.to_string())?;
    let value: Value = serde_json::from_str(json).map_err(|e| e.to_string())?;
    validate(&schema, &value, "$")
}
