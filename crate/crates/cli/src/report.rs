//! Output files: a JSON summary and a CSV table next to it. Both carry the
//! resolved configuration; the CSV as a leading `#` comment line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

/// `out.json` pairs with `out.csv`; any other name gets `.csv` appended.
pub fn table_path(summary: &Path) -> PathBuf {
    if summary.extension().is_some_and(|e| e == "json") {
        summary.with_extension("csv")
    } else {
        let mut name = summary.as_os_str().to_owned();
        name.push(".csv");
        PathBuf::from(name)
    }
}

pub fn to_json<S: Serialize>(value: &S) -> CliResult<String> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Config(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Comment line identifying the run that produced a table.
pub fn provenance_line(command: &str, cfg: &RunConfig) -> CliResult<String> {
    let meta = serde_json::json!({ "command": command, "config": cfg });
    Ok(format!(
        "# {}",
        serde_json::to_string(&meta).map_err(|e| CliError::Config(e.to_string()))?
    ))
}

/// CSV text with a provenance comment, a header and the given rows.
pub fn csv_text(
    provenance: &str,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> CliResult<String> {
    let mut out = String::new();
    out.push_str(provenance);
    out.push('\n');
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record(header)
        .map_err(|e| CliError::Data(e.to_string()))?;
    for row in rows {
        writer
            .write_record(&row)
            .map_err(|e| CliError::Data(e.to_string()))?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::Data(e.to_string()))?;
    out.push_str(&String::from_utf8(bytes).expect("csv output is utf-8"));
    Ok(out)
}
