//! Plot-ready tables with `#`-prefixed metadata, serialized as CSV or JSON.

use std::fmt::Display;

use serde_json::{json, Map, Value};

/// Rectangular table of named float columns plus ordered metadata.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub meta: Vec<(String, String)>,
}

/// 17 significant digits, enough for a lossless round trip.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            meta: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    /// Appends a row; panics if its width differs from the header.
    pub fn push(&mut self, row: Vec<f64>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    /// Appends the rows of `other`, which must have the same columns.
    pub fn extend(&mut self, other: Table) {
        assert_eq!(self.columns, other.columns, "column mismatch");
        self.rows.extend(other.rows);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k}: {v}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&x| format_float(x)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let meta: Map<String, Value> = self
            .meta
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        json!({
            "meta": meta,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(|&x| float_value(x)).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    /// Parses the CSV layout produced by [`Table::to_csv`].
    pub fn parse_csv(text: &str) -> Result<Self, String> {
        let mut table = Table::default();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest
                    .split_once(": ")
                    .ok_or_else(|| format!("line {}: malformed metadata", lineno + 1))?;
                table.meta.push((k.to_string(), v.to_string()));
            } else if !header_seen {
                table.columns = line.split(',').map(str::to_string).collect();
                header_seen = true;
            } else {
                let row = line
                    .split(',')
                    .map(|c| c.parse::<f64>().map_err(|e| format!("line {}: {e}", lineno + 1)))
                    .collect::<Result<Vec<_>, _>>()?;
                if row.len() != table.columns.len() {
                    return Err(format!("line {}: width mismatch", lineno + 1));
                }
                table.rows.push(row);
            }
        }
        if !header_seen {
            return Err("missing header".into());
        }
        Ok(table)
    }
}

/// JSON has no NaN/∞; those become strings.
fn float_value(x: f64) -> Value {
    serde_json::Number::from_f64(x)
        .map(Value::Number)
        .unwrap_or_else(|| Value::String(x.to_string()))
}
