//! Check records, rate verdicts, and deterministic artifact emission.
//!
//! Canonical outputs (report.json and all CSVs) are byte-stable for a
//! fixed seed: sorted JSON keys, 17-significant-digit scientific floats,
//! LF line endings, and atomic writes. Wall-clock and tool versions go
//! to a separate non-canonical run_meta.json.

use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sided {
    Two,
    Upper,
}

/// One verdict line of a run report.
#[derive(Debug, Clone, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub measured: f64,
    pub expected: f64,
    pub tolerance: f64,
    pub sided: Sided,
    pub pass: bool,
}

impl CheckRecord {
    pub fn line(&self) -> String {
        let verdict = if self.pass { "PASS" } else { "FAIL" };
        let rel = match self.sided {
            Sided::Two => "within",
            Sided::Upper => "at most",
        };
        format!(
            "[{verdict}] {}: measured {:.6} vs expected {:.6} ({rel} {:.3})",
            self.name, self.measured, self.expected, self.tolerance
        )
    }
}

/// Uniform verdict logic for every theorem-rate comparison.
pub fn compare_rates(
    name: &str,
    measured: f64,
    expected: f64,
    tol: f64,
    sided: Sided,
) -> CheckRecord {
    let pass = match sided {
        Sided::Two => (measured - expected).abs() <= tol,
        Sided::Upper => measured <= expected + tol,
    };
    CheckRecord {
        name: name.to_string(),
        measured,
        expected,
        tolerance: tol,
        sided,
        pass,
    }
}

/// Boolean check expressed in the same record shape (expected = 1).
pub fn check_flag(name: &str, pass: bool) -> CheckRecord {
    CheckRecord {
        name: name.to_string(),
        measured: if pass { 1.0 } else { 0.0 },
        expected: 1.0,
        tolerance: 0.0,
        sided: Sided::Two,
        pass,
    }
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// In-memory CSV with a header row; rows are written in insertion order.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        Self {
            buf: format!("{}\n", header.join(",")),
            columns: header.len(),
        }
    }

    pub fn row(&mut self, values: &[f64]) {
        assert_eq!(values.len(), self.columns);
        let cells: Vec<String> = values.iter().map(|&v| fmt17(v)).collect();
        self.buf.push_str(&cells.join(","));
        self.buf.push('\n');
    }

    pub fn row_mixed(&mut self, label: &str, values: &[f64]) {
        assert_eq!(values.len() + 1, self.columns);
        let cells: Vec<String> = values.iter().map(|&v| fmt17(v)).collect();
        self.buf.push_str(label);
        if !cells.is_empty() {
            self.buf.push(',');
            self.buf.push_str(&cells.join(","));
        }
        self.buf.push('\n');
    }

    pub fn contents(&self) -> &str {
        &self.buf
    }
}

/// A finished experiment: verdicts plus named CSV artifacts.
#[derive(Debug, Default)]
pub struct ExperimentOutput {
    pub checks: Vec<CheckRecord>,
    pub artifacts: Vec<(String, String)>,
}

impl ExperimentOutput {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn push_csv(&mut self, name: &str, csv: Csv) {
        self.artifacts.push((name.to_string(), csv.buf));
    }
}

#[derive(Serialize)]
struct ReportJson<'a> {
    experiment: &'a str,
    seed: u64,
    pass: bool,
    checks: &'a [CheckRecord],
    /// Echo of the resolved configuration the experiment ran with.
    #[serde(skip_serializing_if = "Option::is_none")]
    config: Option<serde_json::Value>,
}

/// Write text atomically (temp file + rename).
pub fn write_atomic(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Emit report.json + CSVs into `out_dir`; returns the report path.
pub fn emit(
    out_dir: &Path,
    experiment: &str,
    seed: u64,
    output: &ExperimentOutput,
    config_echo: Option<serde_json::Value>,
) -> anyhow::Result<PathBuf> {
    for (name, contents) in &output.artifacts {
        write_atomic(&out_dir.join(name), contents)?;
    }
    let report = ReportJson {
        experiment,
        seed,
        pass: output.all_pass(),
        checks: &output.checks,
        config: config_echo,
    };
    // round-trip through Value so the object keys are emitted sorted
    let value = serde_json::to_value(&report)?;
    let path = out_dir.join(format!("{experiment}_report.json"));
    write_atomic(
        &path,
        &format!("{}\n", serde_json::to_string_pretty(&value)?),
    )?;
    Ok(path)
}

/// Non-canonical side channel for timing and version stamps.
pub fn emit_meta(out_dir: &Path, experiment: &str, wall_seconds: f64) -> anyhow::Result<()> {
    let meta = serde_json::json!({
        "experiment": experiment,
        "wall_seconds": wall_seconds,
        "package_version": env!("CARGO_PKG_VERSION"),
    });
    write_atomic(
        &out_dir.join("run_meta.json"),
        &format!("{}\n", serde_json::to_string_pretty(&meta)?),
    )
}
