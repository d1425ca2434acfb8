//! Minimal JSON and CSV emitters. Reals carry 17 significant digits,
//! non-finite reals become `null`, and counts travel as decimal strings.

use std::fmt::{self, Write as _};

pub const FORMAT_VERSION: u32 = 1;
pub const CSV_MAGIC: &str = "# planepart-format: 1";

#[derive(Clone, Debug, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    Int(i64),
    Real(f64),
    Str(String),
    Array(Vec<Json>),
    Object(Vec<(String, Json)>),
}

impl Json {
    pub fn object<K: Into<String>>(fields: impl IntoIterator<Item = (K, Json)>) -> Json {
        Json::Object(fields.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    pub fn uint(v: usize) -> Json {
        Json::Int(v as i64)
    }

    pub fn opt_real(v: Option<f64>) -> Json {
        v.map_or(Json::Null, Json::Real)
    }

    /// Envelope shared by every JSON document.
    pub fn document(command: &str, mut body: Vec<(String, Json)>) -> Json {
        let mut fields = vec![
            (
                "format_version".to_string(),
                Json::Int(FORMAT_VERSION.into()),
            ),
            ("log_base".to_string(), Json::str("e")),
            ("command".to_string(), Json::str(command)),
        ];
        fields.append(&mut body);
        Json::Object(fields)
    }
}

fn write_str(out: &mut fmt::Formatter<'_>, s: &str) -> fmt::Result {
    out.write_char('"')?;
    for c in s.chars() {
        match c {
            '"' => out.write_str("\\\"")?,
            '\\' => out.write_str("\\\\")?,
            '\n' => out.write_str("\\n")?,
            '\r' => out.write_str("\\r")?,
            '\t' => out.write_str("\\t")?,
            c if (c as u32) < 0x20 => write!(out, "\\u{:04x}", c as u32)?,
            c => out.write_char(c)?,
        }
    }
    out.write_char('"')
}

/// `{:.16e}` with the exponent left as Rust prints it (`1.5e2`), which is
/// valid JSON.
pub fn real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        String::new()
    }
}

impl fmt::Display for Json {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Json::Null => f.write_str("null"),
            Json::Bool(b) => write!(f, "{b}"),
            Json::Int(i) => write!(f, "{i}"),
            Json::Real(v) if v.is_finite() => f.write_str(&real(*v)),
            Json::Real(_) => f.write_str("null"),
            Json::Str(s) => write_str(f, s),
            Json::Array(items) => {
                f.write_char('[')?;
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    write!(f, "{item}")?;
                }
                f.write_char(']')
            }
            Json::Object(fields) => {
                f.write_char('{')?;
                for (i, (k, v)) in fields.iter().enumerate() {
                    if i > 0 {
                        f.write_char(',')?;
                    }
                    write_str(f, k)?;
                    write!(f, ":{v}")?;
                }
                f.write_char('}')
            }
        }
    }
}
