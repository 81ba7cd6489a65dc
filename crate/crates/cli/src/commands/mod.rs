pub mod divisibility;
pub mod duality;
pub mod dynamics;
pub mod frequency;
pub mod markov;

use crate::args::Format;
use crate::output::{csv, num};

/// A numeric table rendered as CSV or as JSON `{columns, rows}`.
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => num(*x),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Num(x) if x.is_finite() => serde_json::json!(x),
            Cell::Num(x) => serde_json::json!(num(*x)),
            Cell::Text(s) => serde_json::json!(s),
        }
    }
}

impl Table {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let rows: Vec<Vec<String>> = self.rows.iter().map(|r| r.iter().map(Cell::csv).collect()).collect();
                csv(&self.columns, &rows)
            }
            Format::Json => {
                let rows: Vec<Vec<serde_json::Value>> = self.rows.iter().map(|r| r.iter().map(Cell::json).collect()).collect();
                let mut s = serde_json::to_string_pretty(&serde_json::json!({ "columns": self.columns, "rows": rows }))
                    .expect("table serializes");
                s.push('\n');
                s
            }
        }
    }
}
