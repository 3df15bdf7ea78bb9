//! CSV tables with a JSON mirror carrying the same numbers.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

pub const SIG_DIGITS: usize = 9;

/// Decimal notation with [`SIG_DIGITS`] significant digits and trailing
/// zeros dropped.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let magnitude = x.abs().log10().floor() as i64;
    if magnitude >= SIG_DIGITS as i64 {
        let k = (magnitude + 1 - SIG_DIGITS as i64) as usize;
        let scaled = (x / 10f64.powi(k as i32)).round();
        return format!("{scaled:.0}{}", "0".repeat(k));
    }
    let decimals = (SIG_DIGITS as i64 - 1 - magnitude).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    // Rounding can carry into a new leading digit (9.99999999e2 -> 1000.0000).
    let digits = s.chars().filter(char::is_ascii_digit).collect::<String>();
    if digits.trim_start_matches('0').len() > SIG_DIGITS && decimals > 0 {
        let d = decimals - 1;
        s = format!("{x:.d$}");
    }
    if s.contains('.') {
        s = s.trim_end_matches('0').trim_end_matches('.').to_string();
    }
    if s == "-0" {
        s = "0".into();
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => fmt_sig(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    /// Parsing the formatted text keeps the JSON number identical to the
    /// CSV cell.
    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => {
                let printed: f64 = fmt_sig(*v).parse().unwrap_or(*v);
                serde_json::Number::from_f64(printed).map_or(Value::Null, Value::Number)
            }
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Table { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> io::Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv))?;
        }
        let bytes = w.into_inner().map_err(|e| io::Error::other(e.to_string()))?;
        String::from_utf8(bytes).map_err(io::Error::other)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    /// Writes `<stem>.csv` and its `<stem>.json` mirror into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> io::Result<(PathBuf, PathBuf)> {
        fs::create_dir_all(dir)?;
        let csv_path = dir.join(format!("{stem}.csv"));
        let json_path = dir.join(format!("{stem}.json"));
        fs::write(&csv_path, self.to_csv()?)?;
        fs::write(&json_path, serde_json::to_string_pretty(&self.to_json())? + "\n")?;
        Ok((csv_path, json_path))
    }
}

/// Rounds every float in a JSON value to the printed precision.
pub fn round_json(v: Value) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().unwrap_or_default();
            Cell::Num(x).json()
        }
        Value::Array(a) => Value::Array(a.into_iter().map(round_json).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, round_json(v))).collect()),
        other => other,
    }
}

pub fn write_json(dir: &Path, name: &str, v: &Value) -> io::Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string_pretty(v)? + "\n")?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nine_significant_digits() {
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig(2079721.8034), "2079721.8");
        assert_eq!(fmt_sig(50.0), "50");
        assert_eq!(fmt_sig(-0.0), "0");
        assert_eq!(fmt_sig(999.9999999), "1000");
        assert_eq!(fmt_sig(7.8231314e-8), "0.000000078231314");
        assert_eq!(fmt_sig(123456789012.0), "123456789000");
        assert_eq!(fmt_sig(-1.5), "-1.5");
    }

    #[test]
    fn formatted_value_keeps_nine_digits() {
        for x in [std::f64::consts::PI, 1e-7 * std::f64::consts::E, 12345.678901234, -0.000123456789123] {
            let back: f64 = fmt_sig(x).parse().unwrap();
            assert!(((back - x) / x).abs() < 1e-8, "{x} -> {}", fmt_sig(x));
        }
    }

    #[test]
    fn csv_and_json_carry_the_same_numbers() {
        let mut t = Table::new(["t", "y", "name"]);
        t.push(vec![0.1.into(), (2.0 / 3.0).into(), "a".into()]);
        t.push(vec![0.2.into(), Cell::Empty, "b".into()]);
        let csv = t.to_csv().unwrap();
        assert_eq!(csv, "t,y,name\n0.1,0.666666667,a\n0.2,,b\n");
        let json = t.to_json();
        assert_eq!(json["rows"][0][1].as_f64().unwrap(), "0.666666667".parse::<f64>().unwrap());
        assert!(json["rows"][1][1].is_null());
    }
}
