//! CSV panels: a header row of identifiers, then one numeric row per day.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use poolmax::DataMatrix;

use crate::CliError;

/// Identifiers and values of a panel file.
#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub ids: Vec<String>,
    pub data: DataMatrix,
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

pub fn ingest_panel(path: &Path) -> Result<Panel, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    read_panel(file, path)
}

pub(crate) fn read_panel<R: std::io::Read>(reader: R, path: &Path) -> Result<Panel, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let ids: Vec<String> = rdr
        .headers()
        .map_err(|e| io_err(path, e))?
        .iter()
        .map(str::to_string)
        .collect();
    let p = ids.len();
    let mut values = Vec::new();
    let mut rows = 0;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let line = rec.position().map_or(0, |pos| pos.line() as usize);
        if rec.len() != p {
            return Err(CliError::RaggedRows { line });
        }
        for (column, field) in rec.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| CliError::ParseError {
                line,
                column: column + 1,
                field: field.to_string(),
            })?;
            values.push(v);
        }
        rows += 1;
    }
    let data = DataMatrix::new(rows, p, values)?;
    Ok(Panel { ids, data })
}

/// Writes a panel in the ingest schema.
pub fn write_panel(path: &Path, ids: &[String], data: &DataMatrix) -> Result<(), CliError> {
    let mut out = String::new();
    out.push_str(&ids.join(","));
    out.push('\n');
    for row in data.rows() {
        let cells: Vec<String> = row.iter().map(f64::to_string).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    let mut f = File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| io_err(path, e))
}

/// Two-column `id,group` file; returns labels aligned with `ids`.
pub fn read_groups(path: &Path, ids: &[String]) -> Result<Vec<String>, CliError> {
    let file = File::open(path).map_err(|e| io_err(path, e))?;
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let mut map = std::collections::HashMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| io_err(path, e))?;
        let line = rec.position().map_or(0, |pos| pos.line() as usize);
        if rec.len() != 2 {
            return Err(CliError::RaggedRows { line });
        }
        map.insert(rec[0].to_string(), rec[1].to_string());
    }
    ids.iter()
        .map(|id| {
            map.get(id)
                .cloned()
                .ok_or_else(|| CliError::Io(format!("{}: no group for '{id}'", path.display())))
        })
        .collect()
}
