//! Record sinks: CSV, JSON lines and per-metric two-column plot files.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::config::RecordFormat;
use crate::error::{Error, Result};
use crate::metrics::IterationRecord;

pub const CSV_HEADER: &str = "k,consensus_sq,stationarity_sq,dre,obj,ds,mu_sq_max,wall_ns";

const FIELDS: [&str; 6] = ["consensus_sq", "stationarity_sq", "dre", "obj", "ds", "mu_sq_max"];

/// 17 significant digits, enough to round-trip any `f64`.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_num(v: Option<f64>) -> String {
    match v {
        Some(v) if v.is_finite() => num(v),
        _ => "null".into(),
    }
}

fn values(r: &IterationRecord) -> [Option<f64>; 6] {
    [
        Some(r.consensus_sq),
        Some(r.stationarity_sq),
        Some(r.dre),
        Some(r.obj),
        r.ds,
        r.mu_sq_max,
    ]
}

pub fn format_csv(records: &[IterationRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = write!(out, "{}", r.k);
        for v in values(r) {
            out.push(',');
            if let Some(v) = v {
                out.push_str(&num(v));
            }
        }
        let _ = writeln!(out, ",{}", r.wall_ns);
    }
    out
}

pub fn format_jsonl(records: &[IterationRecord]) -> String {
    let mut out = String::new();
    for r in records {
        let _ = write!(out, "{{\"k\":{}", r.k);
        for (name, v) in FIELDS.iter().zip(values(r)) {
            let _ = write!(out, ",\"{name}\":{}", json_num(v));
        }
        let _ = writeln!(out, ",\"wall_ns\":{}}}", r.wall_ns);
    }
    out
}

pub fn write_records(records: &[IterationRecord], path: impl AsRef<Path>, format: RecordFormat) -> Result<()> {
    let text = match format {
        RecordFormat::Csv => format_csv(records),
        RecordFormat::Jsonl => format_jsonl(records),
    };
    let path = path.as_ref();
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, text)?;
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

pub fn parse_csv(text: &str) -> Result<Vec<IterationRecord>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        _ => return Err(parse_err(1, "missing record header")),
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != 8 {
            return Err(parse_err(lineno, format!("expected 8 cells, found {}", cells.len())));
        }
        let float = |c: &str, required: bool| -> Result<Option<f64>> {
            if c.is_empty() {
                return if required {
                    Err(parse_err(lineno, "empty required cell"))
                } else {
                    Ok(None)
                };
            }
            c.parse()
                .map(Some)
                .map_err(|_| parse_err(lineno, format!("bad number `{c}`")))
        };
        let req = |c: &str| float(c, true).map(|v| v.unwrap_or_default());
        out.push(IterationRecord {
            k: cells[0].parse().map_err(|_| parse_err(lineno, "bad iteration index"))?,
            consensus_sq: req(cells[1])?,
            stationarity_sq: req(cells[2])?,
            dre: req(cells[3])?,
            obj: req(cells[4])?,
            ds: float(cells[5], false)?,
            mu_sq_max: float(cells[6], false)?,
            wall_ns: cells[7].parse().map_err(|_| parse_err(lineno, "bad wall time"))?,
        });
    }
    Ok(out)
}

pub fn parse_jsonl(text: &str) -> Result<Vec<IterationRecord>> {
    #[derive(serde::Deserialize)]
    struct Row {
        k: usize,
        consensus_sq: Option<f64>,
        stationarity_sq: Option<f64>,
        dre: Option<f64>,
        obj: Option<f64>,
        ds: Option<f64>,
        mu_sq_max: Option<f64>,
        wall_ns: u64,
    }
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, l)| {
            let r: Row = serde_json::from_str(l).map_err(|e| parse_err(idx + 1, e.to_string()))?;
            let nan = f64::NAN;
            Ok(IterationRecord {
                k: r.k,
                consensus_sq: r.consensus_sq.unwrap_or(nan),
                stationarity_sq: r.stationarity_sq.unwrap_or(nan),
                dre: r.dre.unwrap_or(nan),
                obj: r.obj.unwrap_or(nan),
                ds: r.ds,
                mu_sq_max: r.mu_sq_max,
                wall_ns: r.wall_ns,
            })
        })
        .collect()
}

pub fn read_records(path: impl AsRef<Path>, format: RecordFormat) -> Result<Vec<IterationRecord>> {
    let text = fs::read_to_string(path)?;
    match format {
        RecordFormat::Csv => parse_csv(&text),
        RecordFormat::Jsonl => parse_jsonl(&text),
    }
}

/// Writes `<stem>.<metric>.dat` files of `k value` lines next to `path`;
/// returns the paths written. Metrics absent from every record are skipped.
pub fn write_plotdata(records: &[IterationRecord], path: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let path = path.as_ref();
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    let dir = path.parent().unwrap_or(Path::new(""));
    let mut written = Vec::new();
    for (j, name) in FIELDS.iter().enumerate() {
        let mut text = String::new();
        for r in records {
            if let Some(v) = values(r)[j] {
                let _ = writeln!(text, "{} {}", r.k, num(v));
            }
        }
        if text.is_empty() {
            continue;
        }
        let file = dir.join(format!("{stem}.{name}.dat"));
        fs::write(&file, text)?;
        written.push(file);
    }
    Ok(written)
}
