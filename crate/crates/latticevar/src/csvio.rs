//! Versioned CSV tables: a `# latticevar-csv v1` comment line, then a header row.

use std::path::Path;

use crate::error::CliError;

pub const VERSION_LINE: &str = "# latticevar-csv v1";

pub const SCAN_COLUMNS: [&str; 12] =
    ["x_name", "x", "y_name", "y", "energy", "phase", "phi_o", "phi_e", "rho_o", "rho_e", "converged", "error"];
pub const BOUNDARY_COLUMNS: [&str; 6] = ["sweep_name", "sweep", "critical_name", "critical", "iterations", "error"];
pub const FSS_COLUMNS: [&str; 2] = ["size", "mu_c"];

/// 17 significant digits; round-trips every f64.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableKind {
    Scan,
    Boundary,
    Fss,
}

impl TableKind {
    pub fn columns(self) -> &'static [&'static str] {
        match self {
            TableKind::Scan => &SCAN_COLUMNS,
            TableKind::Boundary => &BOUNDARY_COLUMNS,
            TableKind::Fss => &FSS_COLUMNS,
        }
    }
}

/// Serialize rows under the version line and the header of `kind`.
pub fn render(kind: TableKind, rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    // writes to a Vec cannot fail
    w.write_record(kind.columns()).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii fields");
    format!("{VERSION_LINE}\n{body}")
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// A parsed table with its columns checked against one of the known schemas.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub kind: TableKind,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.kind.columns().iter().position(|c| *c == name)
    }

    /// Numeric column; unparsable cells become NaN.
    pub fn floats(&self, idx: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[idx].parse().unwrap_or(f64::NAN)).collect()
    }
}

pub fn parse(text: &str) -> Result<Table, CliError> {
    let mut lines = text.splitn(2, '\n');
    let first = lines.next().unwrap_or("").trim_end_matches('\r');
    if first != VERSION_LINE {
        return Err(CliError::Schema(format!("first line must be `{VERSION_LINE}`")));
    }
    let rest = lines.next().unwrap_or("");
    let mut rd = csv::ReaderBuilder::new().has_headers(true).from_reader(rest.as_bytes());
    let header: Vec<String> = rd
        .headers()
        .map_err(|e| CliError::Schema(e.to_string()))?
        .iter()
        .map(str::to_owned)
        .collect();
    let kind = [TableKind::Scan, TableKind::Boundary, TableKind::Fss]
        .into_iter()
        .find(|k| k.columns() == header.as_slice())
        .ok_or_else(|| CliError::Schema(format!("unknown column set {header:?}")))?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(|e| CliError::Schema(e.to_string()))?;
        rows.push(rec.iter().map(str::to_owned).collect());
    }
    if rows.is_empty() {
        return Err(CliError::Schema("table has no rows".into()));
    }
    Ok(Table { kind, rows })
}

pub fn read_file(path: &Path) -> Result<Table, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse(&text)
}
