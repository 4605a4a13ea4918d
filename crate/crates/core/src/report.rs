//! Result records and their CSV / structured-text renderings.
//!
//! Floats are written with Rust's shortest round-trip formatting, so output
//! is byte-stable for identical inputs.

use crate::averages::AverageResult;
use crate::config::{format_complex, OutputFormat};
use crate::darboux::JacobiOperator;
use crate::measure::RecurrenceTable;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub formula_id: String,
    /// Space separated `key=value` pairs; never contains commas or quotes.
    pub inputs: String,
    pub value: C64,
    pub condition: f64,
    pub node_count: usize,
}

impl Record {
    pub fn from_average(result: &AverageResult, inputs: String, node_count: usize) -> Self {
        Record { formula_id: result.formula.name().to_string(), inputs, value: result.value, condition: result.condition, node_count }
    }
}

/// `key=a|b|c` for a list of complex inputs.
pub fn list_input(key: &str, values: &[C64]) -> String {
    let items: Vec<String> = values.iter().map(|&z| format_complex(z)).collect();
    format!("{key}={}", items.join("|"))
}

pub const RECORD_HEADER: &str = "formula_id,inputs,value_re,value_im,condition,node_count";

pub fn render_records(records: &[Record], format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            out.push_str(RECORD_HEADER);
            out.push('\n');
            for r in records {
                out.push_str(&format!(
                    "{},{},{:e},{:e},{:e},{}\n",
                    r.formula_id, r.inputs, r.value.re, r.value.im, r.condition, r.node_count
                ));
            }
        }
        OutputFormat::Text => {
            for r in records {
                out.push_str(&format!(
                    "formula_id={} inputs=\"{}\" value_re={:e} value_im={:e} condition={:e} node_count={}\n",
                    r.formula_id, r.inputs, r.value.re, r.value.im, r.condition, r.node_count
                ));
            }
        }
    }
    out
}

/// Rows j, aⱼ = diag[j], bⱼ = offdiag[j], cⱼ² for j = 0..=n_max.
pub fn render_recurrence(table: &RecurrenceTable, format: OutputFormat) -> String {
    let mut out = String::new();
    if format == OutputFormat::Csv {
        out.push_str("j,a,b,c_sq\n");
    }
    for j in 0..=table.n_max() {
        let (a, b, c) = (table.diag()[j], table.offdiag()[j], table.c_sq()[j]);
        match format {
            OutputFormat::Csv => out.push_str(&format!("{j},{a:e},{b:e},{c:e}\n")),
            OutputFormat::Text => out.push_str(&format!("j={j} a={a:e} b={b:e} c_sq={c:e}\n")),
        }
    }
    out
}

pub fn render_operator(op: &JacobiOperator, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => op.to_csv(),
        OutputFormat::Text => {
            let mut out = String::new();
            for i in 0..op.dim() {
                let b = op.offdiag.get(i).map(|b| format!("{b:e}")).unwrap_or_default();
                out.push_str(&format!("index={} a={:e} b={}\n", i + 1, op.diag[i], b));
            }
            out
        }
    }
}
