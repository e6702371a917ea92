//! Canonical JSON text: compact separators, object keys in byte order,
//! one trailing line feed.
//!
//! Used for policy documents, profiles, graph exports and every service
//! response body, so that equal values always hash to equal bytes.

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Render a JSON value canonically, including the trailing LF.
pub fn to_canonical_string(value: &Value) -> String {
    let mut out = String::new();
    write_value(value, &mut out);
    out.push('\n');
    out
}

/// Serialize any value through [`serde_json::Value`] and render it canonically.
pub fn to_canonical<T: Serialize + ?Sized>(value: &T) -> String {
    let value = serde_json::to_value(value).expect("in-memory values always serialize to JSON");
    to_canonical_string(&value)
}

/// Lowercase hex SHA-256 of the given bytes.
pub fn content_hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<_> = map.iter().collect();
            entries.sort_by(|a, b| a.0.cmp(b.0));
            out.push('{');
            for (i, (k, v)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_scalar(&Value::String(k.clone()), out);
                out.push(':');
                write_value(v, out);
            }
            out.push('}');
        }
        Value::Array(items) => {
            out.push('[');
            for (i, v) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(v, out);
            }
            out.push(']');
        }
        scalar => write_scalar(scalar, out),
    }
}

fn write_scalar(value: &Value, out: &mut String) {
    out.push_str(&serde_json::to_string(value).expect("scalars always serialize"));
}
