//! CSV rows, JSON records and the run manifest written next to every CSV.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::estimate::EstimatorResult;
use crate::numerics::NumericsConfig;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

pub fn fmt_vec(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| fmt_float(*x))
        .collect::<Vec<_>>()
        .join(";")
}

pub const NA: &str = "n/a";

/// Everything needed to regenerate a CSV: re-running `command` reproduces
/// every column except wall-clock timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// Full argument vector, program name first.
    pub command: Vec<String>,
    pub subcommand: String,
    pub config: Option<String>,
    pub numerics_overrides: Vec<String>,
    /// Effective tolerances after overrides.
    pub numerics: NumericsConfig,
    pub seed: Option<u64>,
    pub epsilon: f64,
    pub max_runs: Option<u64>,
    pub horizon_cap: Option<f64>,
    pub threads: Option<usize>,
    pub output: String,
    /// Seconds since the Unix epoch at start.
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    pub toolkit_version: String,
}

impl RunManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let text = fs::read_to_string(path.as_ref()).map_err(CliError::io)?;
        serde_json::from_str(&text).map_err(|e| CliError::usage(format!("bad manifest: {e}")))
    }
}

/// A table with a header row, rendered as RFC-4180 CSV.
#[derive(Debug, Clone, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn write<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header).map_err(CliError::csv)?;
        for row in &self.rows {
            w.write_record(row).map_err(CliError::csv)?;
        }
        w.flush().map_err(CliError::io)
    }
}

pub const ESTIMATOR_HEADER: [&str; 13] = [
    "method",
    "level_or_horizon",
    "estimate",
    "variance",
    "rel_std_err",
    "runs",
    "wall_time",
    "lundberg_bound",
    "theta",
    "ci95_low",
    "ci95_high",
    "bound_violations",
    "status",
];

pub fn estimator_table(with_kappa: bool) -> Table {
    let mut t = Table::new(&ESTIMATOR_HEADER);
    if with_kappa {
        t.header.push("kappa".into());
    }
    t
}

/// One estimator row. `lundberg` is filled for ruin estimators only.
pub fn estimator_row(r: &EstimatorResult, level: f64, lundberg: bool, status: &str) -> Vec<String> {
    vec![
        r.method.clone(),
        fmt_float(level),
        fmt_float(r.estimate),
        fmt_float(r.variance),
        fmt_float(r.rel_std_err),
        r.runs.to_string(),
        r.wall_time.map(fmt_float).unwrap_or_else(|| NA.into()),
        match (lundberg, r.bound) {
            (true, Some(b)) => fmt_float(b),
            _ => String::new(),
        },
        fmt_vec(&r.theta),
        fmt_float(r.ci95.0),
        fmt_float(r.ci95.1),
        r.bound_violations.to_string(),
        status.to_string(),
    ]
}

/// Row for a sub-problem that failed before producing any runs.
pub fn failed_row(method: &str, level: f64, status: &str) -> Vec<String> {
    let mut row = vec![method.to_string(), fmt_float(level)];
    row.resize(ESTIMATOR_HEADER.len() - 1, NA.to_string());
    row.push(status.to_string());
    row
}

/// Where a command's artifacts go: stdout, or `<dir>/<stem>.csv` plus a
/// `<stem>.manifest.json` sidecar.
pub struct Sink<'a> {
    pub out_dir: Option<PathBuf>,
    pub stdout: &'a mut (dyn Write + Send),
}

impl Sink<'_> {
    pub fn csv(
        &mut self,
        stem: &str,
        table: &Table,
        manifest: &RunManifest,
    ) -> Result<(), CliError> {
        match &self.out_dir {
            None => table.write(&mut *self.stdout),
            Some(dir) => {
                fs::create_dir_all(dir).map_err(CliError::io)?;
                let path = dir.join(format!("{stem}.csv"));
                table.write(fs::File::create(&path).map_err(CliError::io)?)?;
                let mut m = manifest.clone();
                m.output = path.display().to_string();
                let text = serde_json::to_string_pretty(&m).expect("manifest serializes");
                fs::write(dir.join(format!("{stem}.manifest.json")), text).map_err(CliError::io)?;
                writeln!(self.stdout, "{}", path.display()).map_err(CliError::io)
            }
        }
    }

    pub fn json(&mut self, stem: &str, value: &serde_json::Value) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(value).expect("json serializes");
        if let Some(dir) = &self.out_dir {
            fs::create_dir_all(dir).map_err(CliError::io)?;
            fs::write(dir.join(format!("{stem}.json")), &text).map_err(CliError::io)?;
        }
        writeln!(self.stdout, "{text}").map_err(CliError::io)
    }

    pub fn text(&mut self, file_name: &str, text: &str) -> Result<(), CliError> {
        if let Some(dir) = &self.out_dir {
            fs::create_dir_all(dir).map_err(CliError::io)?;
            fs::write(dir.join(file_name), text).map_err(CliError::io)?;
        }
        write!(self.stdout, "{text}").map_err(CliError::io)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.18e-5, 6.31e-15, 12345.678901234567] {
            assert_eq!(fmt_float(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(fmt_float(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x,y".into(), "1".into()]);
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n\"x,y\",1\n");
    }
}
