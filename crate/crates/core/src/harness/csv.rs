//! Trace file format.
//!
//! ```text
//! # vikit-trace: 1
//! # scheme: imsegm
//! # preset: table1
//! # problem: ex1:n=100,seed=7
//! # init: random_uniform(1)
//! # seed: 1
//! # rng: chacha8/seed_from_u64/rand-0.9
//! # dim: 100
//! # max_iter: 400
//! # params: theta=one_over_kp1 eta=half_one_minus_theta ...
//! # tol: none
//! # record_invariants: false
//! # timestamp: 1760000000
//! k,D_k,gamma_k,delta_k,elapsed_s[,residual...]
//! 1,1.2345678901234567e0,5.0000000000000000e-1,...
//! ```
//!
//! Floats use `{:.16e}` (17 significant digits, exact round trip). An empty
//! field is a missing value.

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::algorithms::{ConvergenceTrace, TraceRow};

pub const FORMAT_VERSION: u32 = 1;
pub const BASE_COLUMNS: [&str; 5] = ["k", "D_k", "gamma_k", "delta_k", "elapsed_s"];
const ELAPSED_COLUMN: usize = 4;

#[derive(Debug, Clone, PartialEq)]
pub struct TraceFileHeader {
    pub scheme: String,
    pub preset: String,
    pub problem: String,
    pub init: String,
    pub seed: Option<u64>,
    pub rng: String,
    pub dim: usize,
    pub max_iter: usize,
    pub params: String,
    pub tol: Option<f64>,
    pub record_invariants: bool,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl TraceFileHeader {
    fn lines(&self) -> Vec<(&'static str, String)> {
        vec![
            ("vikit-trace", FORMAT_VERSION.to_string()),
            ("scheme", self.scheme.clone()),
            ("preset", self.preset.clone()),
            ("problem", self.problem.clone()),
            ("init", self.init.clone()),
            ("seed", self.seed.map_or("none".into(), |s| s.to_string())),
            ("rng", self.rng.clone()),
            ("dim", self.dim.to_string()),
            ("max_iter", self.max_iter.to_string()),
            ("params", self.params.clone()),
            ("tol", self.tol.map_or("none".into(), |t| format!("{t:e}"))),
            ("record_invariants", self.record_invariants.to_string()),
            ("timestamp", self.timestamp.to_string()),
        ]
    }

    fn from_pairs(pairs: &[(String, String)]) -> Result<Self, ParseError> {
        let get = |key: &str| {
            pairs
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| ParseError::MissingHeader(key.to_string()))
        };
        let num = |key: &str| -> Result<u64, ParseError> {
            let v = get(key)?;
            v.parse().map_err(|_| ParseError::BadHeader { key: key.into(), value: v })
        };
        let optional = |key: &str| -> Result<Option<String>, ParseError> {
            let v = get(key)?;
            Ok((v != "none").then_some(v))
        };
        let seed = optional("seed")?
            .map(|v| v.parse().map_err(|_| ParseError::BadHeader { key: "seed".into(), value: v }))
            .transpose()?;
        let tol = optional("tol")?
            .map(|v| v.parse().map_err(|_| ParseError::BadHeader { key: "tol".into(), value: v }))
            .transpose()?;
        let record = get("record_invariants")?;
        Ok(Self {
            scheme: get("scheme")?,
            preset: get("preset")?,
            problem: get("problem")?,
            init: get("init")?,
            seed,
            rng: get("rng")?,
            dim: num("dim")? as usize,
            max_iter: num("max_iter")? as usize,
            params: get("params")?,
            tol,
            record_invariants: record
                .parse()
                .map_err(|_| ParseError::BadHeader { key: "record_invariants".into(), value: record })?,
            timestamp: num("timestamp")?,
        })
    }
}

#[derive(Debug, Error)]
#[error("cannot write trace {}: {source}", path.display())]
pub struct CsvError {
    pub path: PathBuf,
    #[source]
    pub source: io::Error,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("missing header `{0}`")]
    MissingHeader(String),
    #[error("bad header value {key} = `{value}`")]
    BadHeader { key: String, value: String },
    #[error("missing column row")]
    MissingColumns,
    #[error("unexpected columns `{0}`")]
    BadColumns(String),
    #[error("line {line}: {detail}")]
    BadRow { line: usize, detail: String },
}

fn push_float(out: &mut String, v: Option<f64>) {
    if let Some(v) = v {
        let _ = write!(out, "{v:.16e}");
    }
}

/// Renders a trace file.
pub fn render_csv(trace: &ConvergenceTrace, header: &TraceFileHeader) -> String {
    let mut out = String::new();
    for (key, value) in header.lines() {
        let _ = writeln!(out, "# {key}: {value}");
    }
    let mut columns: Vec<&str> = BASE_COLUMNS.to_vec();
    columns.extend(trace.residual_names.iter().map(String::as_str));
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in &trace.rows {
        let _ = write!(out, "{}", row.k);
        for v in [Some(row.error), Some(Some(row.gamma)), Some(Some(row.delta)), Some(Some(row.elapsed_seconds))] {
            out.push(',');
            push_float(&mut out, v.flatten());
        }
        for i in 0..trace.residual_names.len() {
            out.push(',');
            push_float(&mut out, row.residuals.as_ref().and_then(|r| r.get(i).copied().flatten()));
        }
        out.push('\n');
    }
    out
}

/// Writes [`render_csv`] to `path`, creating parent directories.
pub fn emit_csv(trace: &ConvergenceTrace, header: &TraceFileHeader, path: &Path) -> Result<(), CsvError> {
    let err = |source| CsvError {
        path: path.to_path_buf(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(err)?;
    }
    fs::write(path, render_csv(trace, header)).map_err(err)
}

/// Inverse of [`render_csv`]. Every row of a file with `record_invariants`
/// on gets a residual vector, possibly all `None`.
pub fn parse_csv(text: &str) -> Result<(TraceFileHeader, ConvergenceTrace), ParseError> {
    let mut pairs = Vec::new();
    let mut lines = text.lines().enumerate().peekable();
    while let Some((_, line)) = lines.peek() {
        let Some(rest) = line.strip_prefix('#') else { break };
        if let Some((k, v)) = rest.trim_start().split_once(':') {
            pairs.push((k.trim().to_string(), v.trim().to_string()));
        }
        lines.next();
    }
    let header = TraceFileHeader::from_pairs(&pairs)?;
    let (_, col_line) = lines.next().ok_or(ParseError::MissingColumns)?;
    let columns: Vec<&str> = col_line.split(',').collect();
    if columns.len() < BASE_COLUMNS.len() || columns[..BASE_COLUMNS.len()] != BASE_COLUMNS {
        return Err(ParseError::BadColumns(col_line.to_string()));
    }
    let residual_names: Vec<String> = columns[BASE_COLUMNS.len()..].iter().map(|s| s.to_string()).collect();
    let mut trace = ConvergenceTrace::new(residual_names);
    for (idx, line) in lines {
        if line.is_empty() {
            continue;
        }
        let bad = |detail: String| ParseError::BadRow { line: idx + 1, detail };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != columns.len() {
            return Err(bad(format!("{} fields, expected {}", fields.len(), columns.len())));
        }
        let float = |s: &str| -> Result<Option<f64>, ParseError> {
            if s.is_empty() {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|_| bad(format!("bad number `{s}`")))
            }
        };
        let required = |s: &str| float(s)?.ok_or_else(|| bad("missing required value".into()));
        let residuals = if trace.residual_names.is_empty() || !header.record_invariants {
            None
        } else {
            Some(
                fields[BASE_COLUMNS.len()..]
                    .iter()
                    .map(|s| float(s))
                    .collect::<Result<Vec<_>, _>>()?,
            )
        };
        trace.rows.push(TraceRow {
            k: fields[0].parse().map_err(|_| bad(format!("bad index `{}`", fields[0])))?,
            error: float(fields[1])?,
            gamma: required(fields[2])?,
            delta: required(fields[3])?,
            elapsed_seconds: required(fields[ELAPSED_COLUMN])?,
            residuals,
        });
    }
    Ok((header, trace))
}

/// The column row and data rows with the elapsed-time column removed: the
/// part of a trace file that is reproducible bit for bit.
pub fn deterministic_body(text: &str) -> String {
    let mut out = String::new();
    for line in text.lines().filter(|l| !l.starts_with('#')) {
        let kept: Vec<&str> = line
            .split(',')
            .enumerate()
            .filter(|&(i, _)| i != ELAPSED_COLUMN)
            .map(|(_, f)| f)
            .collect();
        out.push_str(&kept.join(","));
        out.push('\n');
    }
    out
}
