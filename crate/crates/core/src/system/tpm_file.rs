//! Plain-text transition matrices.
//!
//! ```text
//! elements: 2,2
//! 0 0 0 1
//! 0 0 1 0
//! 0 1 0 0
//! 1 0 0 0
//! ```
//!
//! One whitespace-separated row per past state, in mixed-radix order.

use std::path::Path;

use crate::error::{Error, Result};
use crate::system::TransitionModel;

pub fn parse_tpm(text: &str) -> Result<TransitionModel> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty TPM file".into(),
    })?;
    let spec = header
        .strip_prefix("elements:")
        .ok_or_else(|| Error::Parse {
            line: header_line,
            message: "expected header `elements: c1,c2,...`".into(),
        })?;
    let cards: Vec<usize> = spec
        .split(',')
        .map(|c| c.trim().parse::<usize>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Parse {
            line: header_line,
            message: format!("bad cardinality: {e}"),
        })?;
    let n: usize = cards.iter().product();

    let mut rows = Vec::with_capacity(n);
    for (row_index, (line, text)) in lines.enumerate() {
        if row_index >= n {
            return Err(Error::Parse {
                line,
                message: format!("row {row_index} exceeds the {n} expected rows"),
            });
        }
        let row: Vec<f64> = text
            .split_whitespace()
            .map(|tok| tok.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line,
                message: format!("row {row_index}: {e}"),
            })?;
        if row.len() != n {
            return Err(Error::Parse {
                line,
                message: format!("row {row_index} has {} entries, expected {n}", row.len()),
            });
        }
        let total: f64 = row.iter().sum();
        if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parse {
                line,
                message: format!("row {row_index} is not a probability vector (sum {total})"),
            });
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(Error::Parse {
            line: text.lines().count(),
            message: format!("found {} rows, expected {n}", rows.len()),
        });
    }
    TransitionModel::new(cards, rows)
}

pub fn format_tpm(model: &TransitionModel) -> String {
    let cards: Vec<String> = model
        .element_cardinalities()
        .iter()
        .map(|c| c.to_string())
        .collect();
    let mut out = format!("elements: {}\n", cards.join(","));
    for row in model.rows() {
        let cells: Vec<String> = row.iter().map(|p| format!("{p}")).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

pub fn read_tpm(path: &Path) -> Result<TransitionModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_tpm(&text)
}

pub fn write_tpm(model: &TransitionModel, path: &Path) -> Result<()> {
    std::fs::write(path, format_tpm(model)).map_err(|e| Error::io(path, e))
}
