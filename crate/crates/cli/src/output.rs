use std::fs;
use std::io::Write;
use std::path::Path;

use microformal::{Error, Result};
use serde_json::{Map, Value};

use crate::Format;

/// Result of a subcommand.
pub enum Output {
    Json(Value),
    Table { header: Vec<String>, rows: Vec<Vec<String>> },
}

impl Output {
    pub fn table(header: &[&str], rows: Vec<Vec<String>>) -> Self {
        Output::Table { header: header.iter().map(|s| s.to_string()).collect(), rows }
    }

    fn render(&self, format: Option<Format>) -> Result<String> {
        match (self, format) {
            (Output::Json(v), None | Some(Format::Json)) => Ok(pretty(v)),
            (Output::Json(_), Some(Format::Csv)) => Err(Error::Parse("csv output is only available for sampled tables".into())),
            (Output::Table { header, rows }, None | Some(Format::Csv)) => {
                let mut s = header.join(",");
                s.push('\n');
                for r in rows {
                    s.push_str(&r.join(","));
                    s.push('\n');
                }
                Ok(s)
            }
            (Output::Table { header, rows }, Some(Format::Json)) => {
                let v: Vec<Value> = rows
                    .iter()
                    .map(|r| Value::Object(header.iter().cloned().zip(r.iter().map(|c| cell(c))).collect::<Map<_, _>>()))
                    .collect();
                Ok(pretty(&Value::Array(v)))
            }
        }
    }

    pub fn write(&self, format: Option<Format>, out: Option<&Path>) -> Result<()> {
        let text = self.render(format)?;
        let io = |e: std::io::Error| Error::Parse(format!("cannot write output: {e}"));
        match out {
            Some(p) => fs::write(p, text).map_err(io),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(io),
        }
    }
}

fn cell(c: &str) -> Value {
    c.parse::<f64>().ok().and_then(|x| serde_json::Number::from_f64(x).map(Value::Number)).unwrap_or_else(|| Value::String(c.to_string()))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

pub fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key).ok_or_else(|| Error::Parse(format!("missing field `{key}`")))
}

/// Run `$body` with `$F` bound to `Rational` when every coefficient of `$doc`
/// is rational and to `f64` otherwise.
macro_rules! with_field {
    ($doc:expr, $F:ident => $body:expr) => {
        if microformal::jet::json::all_rational($doc) {
            type $F = microformal::Rational;
            $body
        } else {
            type $F = f64;
            $body
        }
    };
}
pub(crate) use with_field;
