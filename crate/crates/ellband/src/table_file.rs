//! Plain-text local-level tables and the bundled table set.
//!
//! ```text
//! ellband-table v1 two-sided alpha=0.05 tol=0.000001
//! 10	0.0103...
//! 20	0.0058...
//! ```
//!
//! Values are written with the shortest representation that round-trips, so
//! a table reloads bit-identically.

use std::fmt::Write as _;
use std::path::Path;

use ellband_core::level_solver::{EtaTable, Side};

use crate::error::CliError;

const MAGIC: &str = "ellband-table";
const VERSION: &str = "v1";

/// Environment variable naming a directory that replaces the bundled tables.
pub const TABLE_DIR_ENV: &str = "ELLBAND_TABLE_DIR";

const BUNDLED: &[(&str, &str)] = &[
    (
        "two-sided-0.05.tsv",
        include_str!("../tables/two-sided-0.05.tsv"),
    ),
    (
        "two-sided-0.01.tsv",
        include_str!("../tables/two-sided-0.01.tsv"),
    ),
];

fn side_from_str(s: &str) -> Option<Side> {
    match s {
        "one-sided" => Some(Side::OneSided),
        "two-sided" => Some(Side::TwoSided),
        _ => None,
    }
}

pub fn format_table(table: &EtaTable) -> String {
    let mut out = format!(
        "{MAGIC} {VERSION} {} alpha={} tol={}\n",
        table.side.as_str(),
        table.alpha,
        table.tol
    );
    for &(n, eta) in table.grid() {
        let _ = writeln!(out, "{n}\t{eta}");
    }
    out
}

fn bad(line: usize, msg: impl Into<String>) -> CliError {
    CliError::TableFormat {
        line,
        msg: msg.into(),
    }
}

fn parse_key<'a>(field: Option<&'a str>, key: &str) -> Option<&'a str> {
    field?.strip_prefix(key)?.strip_prefix('=')
}

fn parse_prob(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| *v > 0.0 && *v < 1.0)
}

pub fn parse_table(text: &str) -> Result<EtaTable, CliError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| bad(1, "missing header"))?;
    let mut fields = header.split(' ');
    if fields.next() != Some(MAGIC) {
        return Err(bad(1, "not an ellband table"));
    }
    if fields.next() != Some(VERSION) {
        return Err(bad(1, "unsupported table version"));
    }
    let side = fields
        .next()
        .and_then(side_from_str)
        .ok_or_else(|| bad(1, "bad side"))?;
    let alpha = parse_key(fields.next(), "alpha")
        .and_then(parse_prob)
        .ok_or_else(|| bad(1, "bad alpha"))?;
    let tol = parse_key(fields.next(), "tol")
        .and_then(|s| s.parse::<f64>().ok())
        .filter(|t| *t > 0.0)
        .ok_or_else(|| bad(1, "bad tol"))?;
    if fields.next().is_some() {
        return Err(bad(1, "trailing header fields"));
    }
    let mut grid = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let (n, eta) = line
            .split_once('\t')
            .ok_or_else(|| bad(lineno, "expected n<TAB>eta"))?;
        let n: usize = n.parse().map_err(|_| bad(lineno, "bad n"))?;
        let eta = parse_prob(eta).ok_or_else(|| bad(lineno, "bad eta"))?;
        grid.push((n, eta));
    }
    EtaTable::new(alpha, side, tol, grid).map_err(|e| bad(0, e.to_string()))
}

pub fn read_table(path: &Path) -> Result<EtaTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_table(&text).map_err(|e| e.in_file(path))
}

pub fn bundled_tables() -> Vec<EtaTable> {
    BUNDLED
        .iter()
        .map(|(name, text)| {
            parse_table(text).unwrap_or_else(|e| panic!("bundled table {name}: {e}"))
        })
        .collect()
}

/// Every `*.tsv` table in `dir`, in file-name order.
pub fn tables_in_dir(dir: &Path) -> Result<Vec<EtaTable>, CliError> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "tsv"))
        .collect();
    paths.sort();
    paths.iter().map(|p| read_table(p)).collect()
}

/// Tables from `ELLBAND_TABLE_DIR` when set, the bundled set otherwise.
pub fn load_tables() -> Result<Vec<EtaTable>, CliError> {
    match std::env::var_os(TABLE_DIR_ENV) {
        Some(dir) => tables_in_dir(Path::new(&dir)),
        None => Ok(bundled_tables()),
    }
}
