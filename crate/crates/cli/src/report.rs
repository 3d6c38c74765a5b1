//! Report documents (pretty JSON) and flat CSV tables.
//!
//! Output is deterministic: no timestamps, no hash-ordered maps, and floats
//! printed with the shortest representation that round-trips.

use std::fs;
use std::path::Path;

use pseudohyp_core::catalog::{ex4_1_circle, hyperboloid_mesh};
use pseudohyp_core::checker::{FailureWitness, HyperbolicityReport};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};

pub const TOOL: &str = "pseudohyp";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Growth sequences are tabulated for this many leading points only.
pub const GROWTH_TABLE_POINTS: usize = 8;

#[derive(Debug, Serialize)]
pub struct ReportDocument<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub seed: u64,
    pub config: &'a RunConfig,
    /// CSV files written next to this document.
    pub tables: Vec<String>,
    pub result: T,
}

pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(&self.name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(&self.header).map_err(|e| csv_error(&path, e))?;
        for row in &self.rows {
            w.write_record(row).map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| CliError::io(&path, e))
    }
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    CliError::io(path, std::io::Error::other(e))
}

/// Shortest round-trip form; exponent notation for very small or large values.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

pub fn coords_header(prefix: &str, dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("{prefix}{i}")).collect()
}

pub fn ensure_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes the tables, then `report.json` listing them.
pub fn write_outputs<T: Serialize>(
    dir: &Path,
    command: &'static str,
    config: &RunConfig,
    tables: &[Table],
    result: T,
) -> CliResult<()> {
    ensure_dir(dir)?;
    for t in tables {
        t.write(dir)?;
    }
    let doc = ReportDocument {
        tool: TOOL,
        version: VERSION,
        command,
        seed: config.seed,
        config,
        tables: tables.iter().map(|t| t.name.clone()).collect(),
        result,
    };
    let mut text = serde_json::to_string_pretty(&doc).map_err(|e| CliError::Serialize(e.to_string()))?;
    text.push('\n');
    let path = dir.join("report.json");
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))
}

/// One row per sample point with the four condition flags and fitted rates.
pub fn per_point_table(name: &str, report: &HyperbolicityReport) -> Table {
    let dim = report.per_point.first().map_or(0, |p| p.point.len());
    let mut header = vec!["point".to_string()];
    header.extend(coords_header("x", dim));
    header.extend(
        [
            "cond_i",
            "cond_ii",
            "cond_iii",
            "cond_iv",
            "fitted_a",
            "fitted_b",
            "stable_b_fit",
            "unstable_b_fit",
            "worst_cross_tail",
            "stable_invariance",
            "unstable_invariance",
            "error",
        ]
        .map(String::from),
    );
    let mut t = Table { name: name.into(), header, rows: Vec::with_capacity(report.per_point.len()) };
    for (i, p) in report.per_point.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(p.point.iter().copied().map(num));
        row.extend([p.cond_i, p.cond_ii, p.cond_iii, p.cond_iv].map(|b| b.to_string()));
        row.extend([
            opt(p.fitted_a),
            opt(p.fitted_b),
            opt(p.stable_fit.as_ref().map(|f| f.b_fit)),
            opt(p.unstable_fit.as_ref().map(|f| f.b_fit)),
            num(p.worst_cross_tail),
            num(p.stable_invariance),
            num(p.unstable_invariance),
            p.error.clone().unwrap_or_default(),
        ]);
        t.push(row);
    }
    t
}

/// log(r_n / r_0) per sample vector, for the leading points.
pub fn growth_table(name: &str, report: &HyperbolicityReport) -> Table {
    let mut t = Table::new(name, &["point", "subspace", "sample", "n", "log_ratio"]);
    for (i, p) in report.per_point.iter().take(GROWTH_TABLE_POINTS).enumerate() {
        for (kind, records) in [("stable", &p.stable_records), ("unstable", &p.unstable_records)] {
            for (k, rec) in records.iter().enumerate() {
                for n in 0..rec.entries.len() {
                    t.push(vec![i.to_string(), kind.into(), k.to_string(), n.to_string(), num(rec.log_ratio(n))]);
                }
            }
        }
    }
    t
}

/// The measured sequence of each reported witness.
pub fn witness_table(name: &str, witnesses: &[FailureWitness]) -> Table {
    let mut t = Table::new(name, &["witness", "condition", "n", "measured"]);
    for (i, w) in witnesses.iter().enumerate() {
        let cond = serde_json::to_value(w.condition).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        for (n, m) in w.measured.iter().enumerate() {
            t.push(vec![i.to_string(), cond.clone(), n.to_string(), num(*m)]);
        }
    }
    t
}

/// Point cloud of H²(1) on a polar grid.
pub fn mesh_table() -> Table {
    const RADIAL: usize = 16;
    const ANGULAR: usize = 48;
    let mut t = Table::new("hyperboloid_mesh.csv", &["i", "j", "x", "y", "z"]);
    for (k, p) in hyperboloid_mesh(RADIAL, ANGULAR, 2.0).into_iter().enumerate() {
        t.push(vec![(k / ANGULAR).to_string(), (k % ANGULAR).to_string(), num(p[0]), num(p[1]), num(p[2])]);
    }
    t
}

/// The invariant circle z = √2 of H²(1).
pub fn circle_table() -> Table {
    const POINTS: usize = 96;
    let mut t = Table::new("attractor_circle.csv", &["k", "theta", "x", "y", "z"]);
    for (k, p) in ex4_1_circle(POINTS).into_iter().enumerate() {
        let c = p.coords();
        t.push(vec![k.to_string(), num(c[1].atan2(c[0])), num(c[0]), num(c[1]), num(c[2])]);
    }
    t
}
