use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::{Map, Value};

pub const SCHEMA: &str = "monomial-lab/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Jsonl,
    Csv,
}

/// Destination for one command's output.
pub struct Sink {
    out: Box<dyn Write>,
    pub format: Format,
}

impl Sink {
    pub fn open(path: Option<&Path>, format: Format) -> io::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(BufWriter::new(File::create(p)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        };
        Ok(Sink { out, format })
    }

    /// Writes one record tagged with the schema and command name.
    pub fn record<T: Serialize>(&mut self, command: &str, body: &T) -> io::Result<()> {
        let value = envelope(command, body);
        let text = match self.format {
            Format::Json => serde_json::to_string_pretty(&value)?,
            _ => serde_json::to_string(&value)?,
        };
        writeln!(self.out, "{text}")
    }

    /// Writes a bare JSON line (used for streamed members).
    pub fn line<T: Serialize>(&mut self, body: &T) -> io::Result<()> {
        writeln!(self.out, "{}", serde_json::to_string(body)?)
    }

    pub fn csv(&mut self, header: &[&str], rows: &[Vec<String>]) -> io::Result<()> {
        let mut w = csv::Writer::from_writer(&mut self.out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()
    }

    pub fn finish(mut self) -> io::Result<()> {
        self.out.flush()
    }
}

pub fn envelope<T: Serialize>(command: &str, body: &T) -> Value {
    let mut map = Map::new();
    map.insert("schema".into(), SCHEMA.into());
    map.insert("command".into(), command.into());
    match serde_json::to_value(body).unwrap_or(Value::Null) {
        Value::Object(fields) => {
            for (k, v) in fields {
                map.insert(k, v);
            }
        }
        other => {
            map.insert("result".into(), other);
        }
    }
    Value::Object(map)
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_flattens_objects() {
        let v = envelope("bound", &serde_json::json!({ "value": 1.5 }));
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(v["command"], "bound");
        assert_eq!(v["value"], 1.5);
        assert_eq!(envelope("enum", &3)["result"], 3);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 8.963378140676129, 1e-300, -2.5e17] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
