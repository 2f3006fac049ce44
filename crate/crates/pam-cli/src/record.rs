//! Result records and artifact writers.
//!
//! Every command emits one JSON record per result line into
//! `result.jsonl`. Real-valued outputs always travel with an uncertainty
//! companion: `<name>_stderr` for Monte Carlo estimates, `<name>_tol` for
//! quadrature and closed-form values (0 when exact). Grid commands add a
//! `table.csv` and a `plot.gp` that references only columns present in the
//! table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::error::{CliError, Result};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// One result line: the echoed inputs plus a flat output map.
#[derive(Clone, Debug, Serialize)]
pub struct ResultRecord {
    pub version: &'static str,
    pub command: String,
    pub config_hash: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, Value>,
    pub timing_ms: u64,
}

impl ResultRecord {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serialization cannot fail")
    }
}

fn number_value(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::from(x.to_string())
    }
}

/// Builder enforcing the uncertainty companion for real-valued outputs.
#[derive(Clone, Debug, Default)]
pub struct OutputMap {
    entries: BTreeMap<String, Value>,
}

impl OutputMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// A Monte Carlo estimate with its standard error.
    pub fn number_se(&mut self, key: &str, value: f64, std_error: f64) -> &mut Self {
        self.entries.insert(key.to_string(), number_value(value));
        self.entries
            .insert(format!("{key}_stderr"), number_value(std_error));
        self
    }

    /// A deterministic value with its numerical tolerance (0 for exact).
    pub fn number_tol(&mut self, key: &str, value: f64, tol: f64) -> &mut Self {
        self.entries.insert(key.to_string(), number_value(value));
        self.entries.insert(format!("{key}_tol"), number_value(tol));
        self
    }

    pub fn flag(&mut self, key: &str, value: bool) -> &mut Self {
        self.entries.insert(key.to_string(), Value::from(value));
        self
    }

    pub fn text(&mut self, key: &str, value: &str) -> &mut Self {
        self.entries.insert(key.to_string(), Value::from(value));
        self
    }

    pub fn count(&mut self, key: &str, value: u64) -> &mut Self {
        self.entries.insert(key.to_string(), Value::from(value));
        self
    }

    pub fn into_map(self) -> BTreeMap<String, Value> {
        self.entries
    }
}

/// A rectangular table destined for `table.csv`.
#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "ragged table row");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer
            .write_record(&self.columns)
            .map_err(|e| CliError::Io(e.to_string()))?;
        for row in &self.rows {
            writer
                .write_record(row)
                .map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = writer
            .into_inner()
            .map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

/// One plotted line: 1-based CSV column indices.
#[derive(Clone, Debug)]
pub struct PlotSeries {
    pub x: usize,
    pub y: usize,
    pub y_err: Option<usize>,
    pub title: String,
}

/// Render a line-plot script over the emitted CSV. Panics if a series
/// references a column outside the table, which keeps the script and the
/// table consistent by construction.
pub fn plot_script(table: &Table, title: &str, xlabel: &str, ylabel: &str, series: &[PlotSeries]) -> String {
    let ncols = table.columns.len();
    let mut out = String::new();
    let _ = writeln!(out, "# gnuplot script; expects table.csv alongside");
    let _ = writeln!(out, "set datafile separator ','");
    let _ = writeln!(out, "set title '{title}'");
    let _ = writeln!(out, "set xlabel '{xlabel}'");
    let _ = writeln!(out, "set ylabel '{ylabel}'");
    let _ = writeln!(out, "set key left top");
    out.push_str("plot ");
    for (i, s) in series.iter().enumerate() {
        assert!(
            s.x >= 1 && s.x <= ncols && s.y >= 1 && s.y <= ncols,
            "plot series references a missing column"
        );
        if i > 0 {
            out.push_str(", \\\n     ");
        }
        match s.y_err {
            Some(e) => {
                assert!(e >= 1 && e <= ncols, "plot series references a missing column");
                let _ = write!(
                    out,
                    "'table.csv' using {}:{}:{} skip 1 with yerrorlines title '{}'",
                    s.x, s.y, e, s.title
                );
            }
            None => {
                let _ = write!(
                    out,
                    "'table.csv' using {}:{} skip 1 with linespoints title '{}'",
                    s.x, s.y, s.title
                );
            }
        }
    }
    out.push('\n');
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn outputs_pair_every_number_with_an_uncertainty() {
        let mut out = OutputMap::new();
        out.number_se("value", 1.25, 0.01)
            .number_tol("t_zero", 5.85, 0.0)
            .flag("stable", true)
            .text("regime", "Critical")
            .count("samples", 400);
        let map = out.into_map();
        for (key, value) in &map {
            if value.is_f64() && !key.ends_with("_stderr") && !key.ends_with("_tol") {
                assert!(
                    map.contains_key(&format!("{key}_stderr"))
                        || map.contains_key(&format!("{key}_tol")),
                    "output `{key}` lacks an uncertainty companion"
                );
            }
        }
    }

    #[test]
    fn records_serialize_with_stable_field_order() {
        let record = ResultRecord {
            version: TOOL_VERSION,
            command: "regime".into(),
            config_hash: "ab".into(),
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            timing_ms: 7,
        };
        let line = record.to_line();
        assert!(line.starts_with("{\"version\""));
        assert!(line.contains("\"timing_ms\":7"));
    }

    #[test]
    fn csv_quotes_fields_when_needed() {
        let mut table = Table::new(&["a", "b"]);
        table.push_row(vec!["1".into(), "x,y".into()]);
        let csv = table.to_csv().unwrap();
        assert_eq!(csv, "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn plot_series_must_reference_existing_columns() {
        let mut table = Table::new(&["x", "y"]);
        table.push_row(vec!["0".into(), "1".into()]);
        let script = plot_script(
            &table,
            "demo",
            "x",
            "y",
            &[PlotSeries {
                x: 1,
                y: 2,
                y_err: None,
                title: "line".into(),
            }],
        );
        assert!(script.contains("using 1:2"));
        let bad = std::panic::catch_unwind(|| {
            plot_script(
                &table,
                "demo",
                "x",
                "y",
                &[PlotSeries {
                    x: 1,
                    y: 3,
                    y_err: None,
                    title: "line".into(),
                }],
            )
        });
        assert!(bad.is_err());
    }
}
