//! Canonical byte encoding.
//!
//! Every hashed or signed object goes through one JSON dialect:
//!
//! * a single line, no insignificant whitespace, UTF-8;
//! * object keys sorted ascending by their UTF-8 bytes;
//! * integers in plain decimal;
//! * floats as the shortest decimal that round-trips to the same `f64`,
//!   in positional notation (no exponent), with no trailing `.0` on
//!   integral values and `-0` written as `0`;
//! * absent optional fields omitted entirely (never `null`).
//!
//! Strings use standard JSON escaping.

use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::types::Example;

/// Shortest round-trip decimal for a finite `f64`.
pub fn render_number(value: f64) -> Result<String> {
    if !value.is_finite() {
        return Err(Error::NonFiniteValue(format!("{value}")));
    }
    if value == 0.0 {
        return Ok("0".to_owned());
    }
    // `Display` for f64 emits the shortest digit string that parses back to
    // the same value, always positionally.
    Ok(format!("{value}"))
}

/// Writes `value` in canonical form. Non-finite floats cannot appear in a
/// `serde_json::Value`, so this cannot fail.
pub fn write_value(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = n.as_f64().expect("json number is i64, u64 or f64");
                out.push_str(&render_number(f).expect("json numbers are finite"));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string escaping")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            out.push('{');
            let mut first = true;
            for (key, item) in entries {
                // Absent optionals are omitted, never serialised as null.
                if item.is_null() {
                    continue;
                }
                if !first {
                    out.push(',');
                }
                first = false;
                out.push_str(&serde_json::to_string(key).expect("string escaping"));
                out.push(':');
                write_value(item, out);
            }
            out.push('}');
        }
    }
}

/// Canonical JSON string of any serialisable value.
///
/// Callers must make sure floats are finite beforehand: serde_json maps
/// NaN and infinities to `null`, which would then be silently dropped.
pub fn to_canonical_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let value = serde_json::to_value(value)?;
    let mut out = String::new();
    write_value(&value, &mut out);
    Ok(out)
}

/// Canonical bytes of an example: the preimage of its per-example hash and
/// the line format of dataset files.
pub fn canonical_encode(example: &Example) -> Result<Vec<u8>> {
    example.check_finite()?;
    Ok(to_canonical_string(example)?.into_bytes())
}
