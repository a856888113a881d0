//! Shared report plumbing: every artifact embeds the tool version and the
//! config hash, numeric CSV cells carry 17 significant digits, and all
//! output is deterministic for a fixed config and seed.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::LoadedConfig;
use crate::Failure;

/// Provenance block included in every JSON report and echoed as comment
/// lines at the top of every CSV.
#[derive(Debug, Clone, Serialize)]
pub struct Meta {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub seed: u64,
}

impl Meta {
    pub fn new(loaded: &LoadedConfig) -> Meta {
        Meta {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: loaded.sha256.clone(),
            seed: loaded.config.seed,
        }
    }
}

/// One line of a verification report.  `lhs` is the measured quantity,
/// `rhs` the target it is compared against, and the row passes when
/// `residual <= tolerance` (rows that only record a value use a zero
/// residual).
#[derive(Debug, Clone, Serialize)]
pub struct CheckRow {
    pub check: String,
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRow {
    /// A `residual <= tolerance` comparison of `lhs` against `rhs`.
    pub fn residual(check: impl Into<String>, lhs: f64, rhs: f64, tolerance: f64) -> CheckRow {
        let residual = (lhs - rhs).abs();
        CheckRow {
            check: check.into(),
            lhs,
            rhs,
            residual,
            tolerance,
            pass: residual <= tolerance,
        }
    }

    /// A `lhs >= floor` check (determinants, convergence orders); the
    /// residual records the shortfall.
    pub fn at_least(check: impl Into<String>, lhs: f64, floor: f64) -> CheckRow {
        CheckRow {
            check: check.into(),
            lhs,
            rhs: floor,
            residual: (floor - lhs).max(0.0),
            tolerance: 0.0,
            pass: lhs >= floor,
        }
    }

    /// A row that only records a measured value.
    pub fn info(check: impl Into<String>, value: f64) -> CheckRow {
        CheckRow {
            check: check.into(),
            lhs: value,
            rhs: value,
            residual: 0.0,
            tolerance: 0.0,
            pass: true,
        }
    }
}

/// Scientific notation with 17 significant digits, enough to round-trip
/// any `f64` bit pattern.
pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn ensure_dir(dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::Usage(format!("cannot create {}: {e}", dir.display())))
}

pub fn write_json(dir: &Path, name: &str, report: &impl Serialize) -> Result<PathBuf, Failure> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    let body = serde_json::to_string_pretty(report)
        .map_err(|e| Failure::Usage(format!("cannot serialize {name}: {e}")))?;
    std::fs::write(&path, body + "\n")
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Open a CSV file with the provenance comment lines already written.
/// Readers that strip `#` comments see a plain header-plus-rows table.
pub fn csv_writer(
    dir: &Path,
    name: &str,
    meta: &Meta,
    flexible: bool,
) -> Result<(csv::Writer<File>, PathBuf), Failure> {
    ensure_dir(dir)?;
    let path = dir.join(name);
    let mut file = File::create(&path)
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    writeln!(file, "# tool={} {}", meta.tool, meta.version)
        .and_then(|_| writeln!(file, "# config_sha256={}", meta.config_sha256))
        .and_then(|_| writeln!(file, "# seed={}", meta.seed))
        .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    let writer = csv::WriterBuilder::new().flexible(flexible).from_writer(file);
    Ok((writer, path))
}

pub fn write_check_csv(dir: &Path, name: &str, meta: &Meta, rows: &[CheckRow]) -> Result<PathBuf, Failure> {
    let (mut writer, path) = csv_writer(dir, name, meta, false)?;
    let io_err = |e: csv::Error| Failure::Usage(format!("cannot write {}: {e}", path.display()));
    writer
        .write_record(["check", "lhs", "rhs", "residual", "tolerance", "pass"])
        .map_err(io_err)?;
    for row in rows {
        writer
            .write_record([
                row.check.clone(),
                sig17(row.lhs),
                sig17(row.rhs),
                sig17(row.residual),
                sig17(row.tolerance),
                row.pass.to_string(),
            ])
            .map_err(io_err)?;
    }
    writer.flush().map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}
