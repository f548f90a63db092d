//! CSV ingestion: one observation per row, `p` numeric columns, an optional
//! header line, `#` comment lines ignored.

use std::io::Read;
use std::path::Path;

use tailmean_core::Matrix;

use crate::error::{CliError, CliResult};

/// Numeric table plus the header, when the first line was not numeric.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Option<Vec<String>>,
    pub width: usize,
    pub values: Vec<f64>,
}

impl Table {
    pub fn rows(&self) -> usize {
        self.values.len().checked_div(self.width).unwrap_or(0)
    }
}

pub fn read_table<R: Read>(reader: R) -> CliResult<Table> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut header = None;
    let mut width = 0;
    let mut values = Vec::new();
    let mut first = true;
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::Data(format!("malformed CSV: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        let parsed: Result<Vec<f64>, _> = record.iter().map(str::parse::<f64>).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if first => {
                header = Some(record.iter().map(str::to_owned).collect::<Vec<_>>());
                width = record.len();
                first = false;
                continue;
            }
            Err(_) => {
                return Err(CliError::Data(format!("line {line}: non-numeric field")));
            }
        };
        if first && header.is_none() {
            width = row.len();
        }
        first = false;
        if row.len() != width {
            return Err(CliError::Data(format!(
                "line {line}: expected {width} fields, found {}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Data(format!("line {line}: non-finite value")));
        }
        values.extend(row);
    }
    Ok(Table {
        header,
        width,
        values,
    })
}

pub fn read_matrix(path: &Path) -> CliResult<Matrix> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let table = read_table(file)?;
    let n = table.rows();
    Matrix::new(n, table.width, table.values)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Reads a hypothesised mean vector; every numeric field in the file, in
/// reading order.
pub fn read_vector(path: &Path, expected: usize) -> CliResult<Vec<f64>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let table = read_table(file)?;
    if table.values.len() != expected {
        let hint = if table.header.is_some() && table.values.is_empty() {
            " (the only line was read as a header; separate values with commas or newlines)"
        } else {
            ""
        };
        return Err(CliError::Data(format!(
            "{}: expected {expected} values, found {}{hint}",
            path.display(),
            table.values.len()
        )));
    }
    Ok(table.values)
}
