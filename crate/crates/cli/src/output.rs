//! Deterministic text encodings for CSV and JSON artifacts.
//!
//! Two numeric encodings are used: sample dumps carry 17 significant
//! digits (enough to reconstruct any f64 bit pattern), all other outputs
//! use Rust's shortest round-trip decimal. Both re-parse to the exact
//! bits, so golden files are byte-stable.

use std::fmt::Write as _;

/// 17-significant-digit scientific encoding (exact f64 round trip).
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Shortest decimal that round-trips to the same f64.
pub fn fmt_shortest(x: f64) -> String {
    format!("{x}")
}

/// Minimal ordered JSON document builder.
#[derive(Debug, Clone)]
pub enum Json {
    Null,
    Bool(bool),
    U64(u64),
    F64(f64),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn s(v: impl Into<String>) -> Json {
        Json::Str(v.into())
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => {
                let _ = write!(out, "{b}");
            }
            Json::U64(v) => {
                let _ = write!(out, "{v}");
            }
            Json::F64(v) => {
                if v.is_finite() {
                    let _ = write!(out, "{v}");
                } else {
                    out.push_str("null");
                }
            }
            Json::Str(s) => write_json_string(out, s),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                    return;
                }
                out.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    newline_indent(out, indent + 1);
                    item.write(out, indent + 1);
                }
                newline_indent(out, indent);
                out.push(']');
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push('{');
                for (i, (key, value)) in fields.iter().enumerate() {
                    if i > 0 {
                        out.push(',');
                    }
                    newline_indent(out, indent + 1);
                    write_json_string(out, key);
                    out.push_str(": ");
                    value.write(out, indent + 1);
                }
                newline_indent(out, indent);
                out.push('}');
            }
        }
    }
}

fn newline_indent(out: &mut String, indent: usize) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}

fn write_json_string(out: &mut String, s: &str) {
    out.push('"');
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fmt17_round_trips() {
        for x in [0.1, 0.25, 1.0 / 3.0, 6.531973029389123, 1e-300, -4.9e-324] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn fmt_shortest_round_trips() {
        for x in [0.1, 0.003639477080072, 2.0f64.powi(-40), 123456789.125] {
            assert_eq!(fmt_shortest(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn json_renders_deterministically() {
        let doc = Json::Obj(vec![
            ("name".into(), Json::s("x")),
            ("value".into(), Json::F64(0.25)),
            ("items".into(), Json::Arr(vec![Json::U64(3), Json::Null])),
        ]);
        assert_eq!(
            doc.render(),
            "{\n  \"name\": \"x\",\n  \"value\": 0.25,\n  \"items\": [\n    3,\n    null\n  ]\n}"
        );
    }
}
