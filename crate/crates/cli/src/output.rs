//! Result envelopes and CSV time series, written atomically.

use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use gkp_core::lindblad::Record;
use serde::{Deserialize, Serialize};
use tempfile::NamedTempFile;

use crate::error::{CliError, CliResult, ExitKind};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GKP_SIM_OUT_DIR";

/// Fixed column set of every time-series file.
pub const SERIES_COLUMNS: [&str; 7] = ["t", "trace", "TrW", "jx", "jy", "jz", "nbar"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Failure {
    pub kind: String,
    pub exit_code: i32,
    pub message: String,
}

impl Failure {
    pub fn from_error(e: &CliError) -> Self {
        let kind: ExitKind = e.kind();
        Self {
            kind: kind.label().into(),
            exit_code: kind as i32,
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope<C, P> {
    pub artifact_version: String,
    pub command: String,
    pub config: C,
    pub started_at: DateTime<Utc>,
    pub finished_at: DateTime<Utc>,
    pub runtime_seconds: f64,
    pub payload: Option<P>,
    pub failure: Option<Failure>,
    /// Files written next to the envelope, relative to the output directory.
    pub files: Vec<String>,
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| CliError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Config(format!("cannot serialize result: {e}")))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// CSV bytes with the fixed [`SERIES_COLUMNS`]; unrecorded values are empty.
pub fn series_csv(records: &[Record]) -> CliResult<Vec<u8>> {
    let rows: Vec<[Option<f64>; 7]> = records
        .iter()
        .map(|r| {
            let b = r.bloch;
            [
                Some(r.t),
                Some(r.trace),
                r.lyapunov,
                b.map(|b| b[0]),
                b.map(|b| b[1]),
                b.map(|b| b[2]),
                r.photon_number,
            ]
        })
        .collect();
    series_rows_csv(&rows)
}

/// CSV bytes with the fixed [`SERIES_COLUMNS`] from raw rows.
pub fn series_rows_csv(rows: &[[Option<f64>; 7]]) -> CliResult<Vec<u8>> {
    let err = |e: csv::Error| CliError::Config(format!("cannot format CSV: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SERIES_COLUMNS).map_err(err)?;
    for row in rows {
        w.write_record(row.map(fmt_opt)).map_err(err)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Config(format!("cannot format CSV: {e}")))
}

/// Output directory: flag, then config file, then environment, then `results`.
pub fn resolve_out_dir(flag: Option<PathBuf>, config: Option<PathBuf>) -> PathBuf {
    flag.or(config)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits(), "{s}");
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn csv_has_fixed_columns_and_blank_missing_values() {
        let r = Record {
            t: 0.5,
            trace: 1.0,
            lyapunov: Some(0.25),
            bloch: None,
            photon_number: Some(4.0),
            min_eigenvalue: None,
        };
        let text = String::from_utf8(series_csv(&[r]).unwrap()).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,trace,TrW,jx,jy,jz,nbar");
        let row: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(row.len(), 7);
        assert_eq!(row[3], "");
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.25);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub").join("a.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
