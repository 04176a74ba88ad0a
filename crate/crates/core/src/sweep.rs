//! Cartesian parameter sweeps with errors captured as row data, plus CSV and
//! JSON table writers.

use std::io::Write;

use rayon::prelude::*;
use serde_json::{Map, Value};
use thiserror::Error;

pub const STATUS_OK: &str = "ok";

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid axis '{name}': {message}")]
    InvalidAxis { name: String, message: String },
    #[error("duplicate axis '{0}'")]
    DuplicateAxis(String),
    #[error("sweep of {0} rows is too large")]
    TooLarge(u128),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    name: String,
    start: f64,
    stop: f64,
    points: usize,
    scale: Scale,
}

impl Axis {
    pub fn new(name: &str, start: f64, stop: f64, points: usize, scale: Scale) -> Result<Self, SweepError> {
        let bad = |message: &str| SweepError::InvalidAxis {
            name: name.to_string(),
            message: message.to_string(),
        };
        if points == 0 {
            return Err(bad("points must be >= 1"));
        }
        if !(start.is_finite() && stop.is_finite()) {
            return Err(bad("endpoints must be finite"));
        }
        if points > 1 && !(start < stop) {
            return Err(bad("start must be below stop"));
        }
        if scale == Scale::Log && !(start > 0.0 && stop > 0.0) {
            return Err(bad("log scale needs positive endpoints"));
        }
        Ok(Self {
            name: name.to_string(),
            start,
            stop,
            points,
            scale,
        })
    }

    /// Single-point axis.
    pub fn fixed(name: &str, value: f64) -> Result<Self, SweepError> {
        Self::new(name, value, value, 1, Scale::Linear)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> usize {
        self.points
    }

    /// Grid values; both endpoints are reproduced exactly.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.start];
        }
        let last = (n - 1) as f64;
        (0..n)
            .map(|i| {
                if i == 0 {
                    return self.start;
                }
                if i == n - 1 {
                    return self.stop;
                }
                let f = i as f64 / last;
                match self.scale {
                    Scale::Linear => self.start + f * (self.stop - self.start),
                    Scale::Log => (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

/// Shortest round-trip text; exponent form outside `[1e-5, 1e16)`.
pub fn format_float(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || !x.is_finite() || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            _ => None,
        }
    }

    fn text(&self) -> String {
        match self {
            Cell::Num(x) => format_float(*x),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => serde_json::Number::from_f64(*x).map_or(Value::Null, Value::Number),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

/// A failed grid point: a short status token plus free text.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub status: String,
    pub detail: String,
}

impl Failure {
    pub fn new(status: &str, detail: impl Into<String>) -> Self {
        Self {
            status: status.to_string(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<&Cell>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| &r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), SweepError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::text))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Array of objects keyed by column, in column order.
    pub fn write_json<W: Write>(&self, mut out: W) -> Result<(), SweepError> {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: Map<String, Value> = self.columns.iter().cloned().zip(row.iter().map(Cell::json)).collect();
                Value::Object(obj)
            })
            .collect();
        serde_json::to_writer_pretty(&mut out, &Value::Array(rows))?;
        writeln!(out)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Evaluation {
    Serial,
    #[default]
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axes: Vec<Axis>,
    pub outputs: Vec<String>,
}

impl SweepSpec {
    pub fn new(axes: Vec<Axis>, outputs: &[&str]) -> Result<Self, SweepError> {
        for (i, a) in axes.iter().enumerate() {
            if axes[..i].iter().any(|b| b.name == a.name) {
                return Err(SweepError::DuplicateAxis(a.name.clone()));
            }
        }
        Ok(Self {
            axes,
            outputs: outputs.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn row_count(&self) -> u128 {
        self.axes.iter().map(|a| a.points as u128).product()
    }

    /// Grid points, last axis varying fastest.
    pub fn points(&self) -> Result<Vec<Vec<f64>>, SweepError> {
        let n = self.row_count();
        if n > 1 << 26 {
            return Err(SweepError::TooLarge(n));
        }
        let grids: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out = Vec::with_capacity(n as usize);
        for mut k in 0..n as usize {
            let mut p = vec![0.0; grids.len()];
            for (slot, g) in p.iter_mut().zip(&grids).rev() {
                *slot = g[k % g.len()];
                k /= g.len();
            }
            out.push(p);
        }
        Ok(out)
    }
}

/// Evaluates `f` on every grid point. Each row holds the inputs, the outputs
/// (empty on failure), then `status` and `detail`.
pub fn run_sweep<F>(spec: &SweepSpec, eval: Evaluation, f: F) -> Result<Table, SweepError>
where
    F: Fn(&[f64]) -> Result<Vec<Cell>, Failure> + Sync,
{
    let points = spec.points()?;
    let width = spec.outputs.len();
    let row = |p: &Vec<f64>| -> Vec<Cell> {
        let mut r: Vec<Cell> = p.iter().map(|&x| Cell::Num(x)).collect();
        match f(p) {
            Ok(mut cells) => {
                cells.resize(width, Cell::Empty);
                r.extend(cells);
                r.push(STATUS_OK.into());
                r.push(Cell::Empty);
            }
            Err(fail) => {
                r.extend(std::iter::repeat_n(Cell::Empty, width));
                r.push(Cell::Text(fail.status));
                r.push(Cell::Text(fail.detail));
            }
        }
        r
    };
    let rows = match eval {
        Evaluation::Serial => points.iter().map(row).collect(),
        Evaluation::Parallel => points.par_iter().map(row).collect(),
    };
    let mut columns: Vec<String> = spec.axes.iter().map(|a| a.name.clone()).collect();
    columns.extend(spec.outputs.iter().cloned());
    columns.push("status".into());
    columns.push("detail".into());
    Ok(Table { columns, rows })
}
