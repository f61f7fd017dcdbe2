//! Minimal JSON shape descriptors for schema-constrained responses.
//!
//! A [`Shape`] renders to a JSON Schema (for providers that enforce it
//! server-side) and validates responses locally. Objects are strict: every
//! declared field is required and undeclared fields are rejected.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shape {
    String,
    Bool,
    Number,
    Array(Box<Shape>),
    Object(Vec<(String, Shape)>),
}

impl Shape {
    pub fn object<'a>(fields: impl IntoIterator<Item = (&'a str, Shape)>) -> Self {
        Shape::Object(fields.into_iter().map(|(k, v)| (k.to_string(), v)).collect())
    }

    pub fn array(item: Shape) -> Self {
        Shape::Array(Box::new(item))
    }

    pub fn to_json_schema(&self) -> Value {
        match self {
            Shape::String => json!({"type": "string"}),
            Shape::Bool => json!({"type": "boolean"}),
            Shape::Number => json!({"type": "number"}),
            Shape::Array(item) => json!({"type": "array", "items": item.to_json_schema()}),
            Shape::Object(fields) => {
                let properties: Map<String, Value> =
                    fields.iter().map(|(k, v)| (k.clone(), v.to_json_schema())).collect();
                let required: Vec<&str> = fields.iter().map(|(k, _)| k.as_str()).collect();
                json!({
                    "type": "object",
                    "properties": properties,
                    "required": required,
                    "additionalProperties": false,
                })
            }
        }
    }

    /// Stable textual form, used when hashing requests.
    pub fn fingerprint(&self) -> String {
        self.to_json_schema().to_string()
    }

    pub fn validate(&self, value: &Value) -> Result<(), String> {
        self.validate_at(value, "$")
    }

    fn validate_at(&self, value: &Value, path: &str) -> Result<(), String> {
        match (self, value) {
            (Shape::String, Value::String(_)) | (Shape::Bool, Value::Bool(_)) | (Shape::Number, Value::Number(_)) => {
                Ok(())
            }
            (Shape::Array(item), Value::Array(items)) => items
                .iter()
                .enumerate()
                .try_for_each(|(i, v)| item.validate_at(v, &format!("{path}[{i}]"))),
            (Shape::Object(fields), Value::Object(map)) => {
                for (name, shape) in fields {
                    match map.get(name) {
                        Some(v) => shape.validate_at(v, &format!("{path}.{name}"))?,
                        None => return Err(format!("{path}: missing required field \"{name}\"")),
                    }
                }
                if let Some(extra) = map.keys().find(|k| !fields.iter().any(|(name, _)| name == *k)) {
                    return Err(format!("{path}: unexpected field \"{extra}\""));
                }
                Ok(())
            }
            (expected, found) => Err(format!("{path}: expected {}, found {}", expected.kind(), kind_of(found))),
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Shape::String => "string",
            Shape::Bool => "boolean",
            Shape::Number => "number",
            Shape::Array(_) => "array",
            Shape::Object(_) => "object",
        }
    }

    /// Parses raw model output and validates it. A single surrounding
    /// markdown code fence is tolerated.
    pub fn parse(&self, content: &str) -> Result<Value, String> {
        let value: Value =
            serde_json::from_str(strip_fence(content)).map_err(|e| format!("response is not valid JSON: {e}"))?;
        self.validate(&value)?;
        Ok(value)
    }
}

fn kind_of(value: &Value) -> &'static str {
    match value {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

fn strip_fence(content: &str) -> &str {
    let trimmed = content.trim();
    let Some(rest) = trimmed.strip_prefix("```") else { return trimmed };
    let rest = rest.strip_prefix("json").unwrap_or(rest);
    rest.strip_suffix("```").map(str::trim).unwrap_or(trimmed)
}
