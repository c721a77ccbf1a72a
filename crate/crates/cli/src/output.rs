//! Headered CSV and JSON-lines tables with round-trip float formatting.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    F(f64),
    I(i64),
    B(bool),
    S(String),
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::F(v)
    }
}

impl From<usize> for Value {
    fn from(v: usize) -> Self {
        Value::I(v as i64)
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::I(v)
    }
}

impl From<u32> for Value {
    fn from(v: u32) -> Self {
        Value::I(v.into())
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::B(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::S(v.to_string())
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::S(v)
    }
}

/// Shortest representation that parses back to the same `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:?}")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn write(&self, format: Format, out: &mut dyn Write) -> io::Result<()> {
        match format {
            Format::Csv => self.write_csv(out),
            Format::Jsonl => self.write_jsonl(out),
        }
    }

    fn write_csv(&self, out: &mut dyn Write) -> io::Result<()> {
        let header: Vec<String> = self.columns.iter().map(|c| csv_field(c)).collect();
        writeln!(out, "{}", header.join(","))?;
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::F(x) => format_float(*x),
                    Value::I(i) => i.to_string(),
                    Value::B(b) => b.to_string(),
                    Value::S(s) => csv_field(s),
                })
                .collect();
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }

    fn write_jsonl(&self, out: &mut dyn Write) -> io::Result<()> {
        for row in &self.rows {
            let mut line = String::from("{");
            for (k, (name, v)) in self.columns.iter().zip(row).enumerate() {
                if k > 0 {
                    line.push(',');
                }
                json_string(&mut line, name);
                line.push(':');
                match v {
                    // JSON has no NaN or infinity
                    Value::F(x) if !x.is_finite() => line.push_str("null"),
                    Value::F(x) => line.push_str(&format_float(*x)),
                    Value::I(i) => line.push_str(&i.to_string()),
                    Value::B(b) => line.push_str(&b.to_string()),
                    Value::S(s) => json_string(&mut line, s),
                }
            }
            line.push('}');
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn json_string(buf: &mut String, s: &str) {
    buf.push('"');
    for c in s.chars() {
        match c {
            '"' => buf.push_str("\\\""),
            '\\' => buf.push_str("\\\\"),
            '\n' => buf.push_str("\\n"),
            '\r' => buf.push_str("\\r"),
            '\t' => buf.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(buf, "\\u{:04x}", c as u32);
            }
            c => buf.push(c),
        }
    }
    buf.push('"');
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Table {
        let mut t = Table::new(["x", "label", "ok", "n"]);
        t.push(vec![0.1.into(), "a,b".into(), true.into(), 3usize.into()]);
        t.push(vec![f64::NAN.into(), "say \"hi\"".into(), false.into(), 4usize.into()]);
        t
    }

    #[test]
    fn floats_round_trip() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 1e16, 123456789.0123] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
            let digits = s
                .chars()
                .take_while(|c| *c != 'e')
                .filter(|c| c.is_ascii_digit())
                .count();
            assert!(digits <= 17, "{s}");
        }
    }

    #[test]
    fn csv_quotes_and_header() {
        let mut buf = Vec::new();
        sample().write(Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "x,label,ok,n\n0.1,\"a,b\",true,3\nNaN,\"say \"\"hi\"\"\",false,4\n"
        );
    }

    #[test]
    fn jsonl_maps_nan_to_null() {
        let mut buf = Vec::new();
        sample().write(Format::Jsonl, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], r#"{"x":0.1,"label":"a,b","ok":true,"n":3}"#);
        assert_eq!(lines[1], r#"{"x":null,"label":"say \"hi\"","ok":false,"n":4}"#);
    }
}
