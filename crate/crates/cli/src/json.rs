//! JSON text output. Metric reports print every non-integer number with
//! exactly four decimals; documents keep full precision so they read back equal.

use serde_json::Value;

pub fn fixed(value: &Value) -> String {
    let mut out = String::new();
    write_fixed(value, &mut out);
    out
}

fn write_fixed(value: &Value, out: &mut String) {
    match value {
        Value::Number(n) if n.is_f64() => match n.as_f64() {
            Some(x) if x.is_finite() => {
                let s = format!("{x:.4}");
                // avoid "-0.0000"
                out.push_str(if s == "-0.0000" { "0.0000" } else { &s });
            }
            _ => out.push_str("null"),
        },
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_fixed(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&Value::String(k.clone()).to_string());
                out.push(':');
                write_fixed(v, out);
            }
            out.push('}');
        }
        other => out.push_str(&other.to_string()),
    }
}
