//! Trajectory files.
//!
//! CSV: `#key=value` metadata lines, then the header `t,x1..xn,w1..wn,C,h`
//! and one row per sample. JSONL: a metadata object on the first line, then
//! one `{"t","x","w","C","h"}` object per sample. Floats are written in
//! shortest round-trip form, so reading a file back gives identical bits.

use std::io::{self, BufRead, Write};

use rpsflow_core::{sampling::GENERATOR, SystemState, Trajectory};
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};

/// Self-description attached to every output: command, resolved config and
/// the actual initial state.
pub fn metadata(command: &str, cfg: &RunConfig, initial: &SystemState) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "generator": GENERATOR,
        "config": cfg,
        "initial": { "x": initial.x().coords(), "w": initial.w().coords() },
    })
}

/// Flattens nested objects into dotted `key=value` pairs. Arrays and strings
/// keep their JSON text except that strings are unquoted.
pub fn flatten(meta: &Value) -> Vec<(String, String)> {
    fn walk(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
        match v {
            Value::Object(map) => {
                for (k, v) in map {
                    let key = if prefix.is_empty() {
                        k.clone()
                    } else {
                        format!("{prefix}.{k}")
                    };
                    walk(&key, v, out);
                }
            }
            Value::String(s) => out.push((prefix.to_string(), s.clone())),
            other => out.push((prefix.to_string(), other.to_string())),
        }
    }
    let mut out = Vec::new();
    walk("", meta, &mut out);
    out
}

pub fn header(n: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend((1..=n).map(|i| format!("w{i}")));
    cols.push("C".into());
    cols.push("h".into());
    cols
}

/// `Debug` formatting of `f64` is the shortest string that parses back to the
/// same value, switching to exponent notation for very large or small numbers.
fn float(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_trajectory<W: Write>(
    out: W,
    format: Format,
    meta: &Value,
    traj: &Trajectory,
) -> io::Result<()> {
    match format {
        Format::Csv => write_csv(out, meta, traj),
        Format::Jsonl => write_jsonl(out, meta, traj),
    }
}

pub fn write_csv<W: Write>(mut out: W, meta: &Value, traj: &Trajectory) -> io::Result<()> {
    for (k, v) in flatten(meta) {
        writeln!(out, "#{k}={v}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header(traj.n()))?;
    let mut row = Vec::with_capacity(2 * traj.n() + 3);
    for k in 0..traj.len() {
        row.clear();
        row.push(float(traj.times()[k]));
        row.extend(traj.sample(k).iter().map(|&v| float(v)));
        row.push(float(traj.conserved()[k]));
        row.push(float(traj.steps()[k]));
        w.write_record(&row)?;
    }
    w.flush()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub t: f64,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    #[serde(rename = "C")]
    pub c: f64,
    pub h: f64,
}

pub fn write_jsonl<W: Write>(mut out: W, meta: &Value, traj: &Trajectory) -> io::Result<()> {
    serde_json::to_writer(&mut out, meta)?;
    writeln!(out)?;
    let n = traj.n();
    for k in 0..traj.len() {
        let u = traj.sample(k);
        let row = Row {
            t: traj.times()[k],
            x: u[..n].to_vec(),
            w: u[n..].to_vec(),
            c: traj.conserved()[k],
            h: traj.steps()[k],
        };
        serde_json::to_writer(&mut out, &row)?;
        writeln!(out)?;
    }
    out.flush()
}

/// A parsed trajectory file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryFile {
    pub meta: Vec<(String, String)>,
    pub n: usize,
    pub rows: Vec<Row>,
}

impl TrajectoryFile {
    pub fn meta_value(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

fn invalid(msg: impl Into<String>) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg.into())
}

pub fn read_csv<R: BufRead>(input: R) -> io::Result<TrajectoryFile> {
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in input.lines() {
        let line = line?;
        match line.strip_prefix('#') {
            Some(kv) => {
                let (k, v) = kv
                    .split_once('=')
                    .ok_or_else(|| invalid(format!("metadata line without `=`: {line}")))?;
                meta.push((k.to_string(), v.to_string()));
            }
            None => {
                body.push_str(&line);
                body.push('\n');
            }
        }
    }
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let cols = reader.headers()?.len();
    if cols < 9 || (cols - 3) % 2 != 0 {
        return Err(invalid(format!("unexpected column count {cols}")));
    }
    let n = (cols - 3) / 2;
    if reader
        .headers()?
        .iter()
        .ne(header(n).iter().map(String::as_str))
    {
        return Err(invalid("header does not match t,x1..xn,w1..wn,C,h"));
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let v: Vec<f64> = rec
            .iter()
            .map(|f| f.parse().map_err(|_| invalid(format!("bad number `{f}`"))))
            .collect::<io::Result<_>>()?;
        rows.push(Row {
            t: v[0],
            x: v[1..=n].to_vec(),
            w: v[n + 1..=2 * n].to_vec(),
            c: v[2 * n + 1],
            h: v[2 * n + 2],
        });
    }
    Ok(TrajectoryFile { meta, n, rows })
}

pub fn read_jsonl<R: BufRead>(input: R) -> io::Result<(Map<String, Value>, Vec<Row>)> {
    let mut lines = input.lines();
    let first = lines.next().ok_or_else(|| invalid("empty file"))??;
    let meta: Map<String, Value> = serde_json::from_str(&first)?;
    let rows = lines
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect::<io::Result<_>>()?;
    Ok((meta, rows))
}
