//! Output formatting: nine significant digits everywhere, JSON or CSV.

use amplitude_core::io::sig9;
use serde::Serialize;
use serde_json::{Map, Value};

/// Rounds every floating-point number inside `v` to nine significant digits.
pub fn round_value(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = sig9(n.as_f64().expect("f64 number"));
            serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(round_value).collect()),
        Value::Object(fields) => Value::Object(
            fields
                .into_iter()
                .map(|(k, v)| (k, round_value(v)))
                .collect(),
        ),
        other => other,
    }
}

/// Compact JSON with rounded numbers, newline-terminated.
pub fn json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("serializable report");
    format!("{}\n", round_value(v))
}

/// Nine significant digits, plain notation for moderate magnitudes and
/// exponent notation otherwise.
pub fn num(x: f64) -> String {
    let r = sig9(x);
    if r == 0.0 || (1e-4..1e9).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// CSV from a header and rows of preformatted cells.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// `key,value` rows for a flat JSON object; nested values are emitted as
/// compact JSON and null as an empty cell.
pub fn flat_csv<T: Serialize>(value: &T) -> String {
    let v = round_value(serde_json::to_value(value).expect("serializable report"));
    let fields = match v {
        Value::Object(fields) => fields,
        other => {
            let mut m = Map::new();
            m.insert("value".into(), other);
            m
        }
    };
    let rows: Vec<Vec<String>> = fields
        .into_iter()
        .map(|(k, v)| {
            let cell = match v {
                Value::Null => String::new(),
                Value::Number(n) if n.is_f64() => num(n.as_f64().expect("f64 number")),
                Value::Number(n) => n.to_string(),
                Value::Bool(b) => b.to_string(),
                Value::String(s) => s,
                nested => format!("\"{}\"", nested.to_string().replace('"', "\"\"")),
            };
            vec![k, cell]
        })
        .collect();
    csv(&["key", "value"], &rows)
}

pub fn error_json(kind: &str, message: &str) -> String {
    serde_json::json!({ "error": { "kind": kind, "message": message } }).to_string()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_integers_and_nine_digits() {
        let v = serde_json::json!({"a": std::f64::consts::FRAC_1_SQRT_2, "n": 3, "xs": [1.0, 2.0000000001]});
        let r = round_value(v);
        assert_eq!(r["a"].to_string(), "0.707106781");
        assert_eq!(r["n"].as_u64().unwrap(), 3);
        assert_eq!(r["xs"][1].as_f64().unwrap(), 2.0);
    }

    #[test]
    fn cells_use_exponents_for_extreme_magnitudes() {
        assert_eq!(num(std::f64::consts::FRAC_1_SQRT_2), "0.707106781");
        assert_eq!(num(8.0 * f64::EPSILON), "1.77635684e-15");
        assert_eq!(num(0.0), "0");
        assert_eq!(num(-2.5e10), "-2.5e10");
    }

    #[test]
    fn flat_csv_lists_fields() {
        #[derive(Serialize)]
        struct R {
            amplitude: f64,
            upper: Option<f64>,
        }
        let text = flat_csv(&R {
            amplitude: 0.5,
            upper: None,
        });
        assert_eq!(text, "key,value\namplitude,0.5\nupper,\n");
    }

    #[test]
    fn emitted_json_reparses_to_the_same_value() {
        let text = json(&serde_json::json!({"x": 1.0 / 3.0, "y": [1e-20, -2.5e7]}));
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(json(&v), text);
    }
}
