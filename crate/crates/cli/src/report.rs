use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{csv_bytes, json_bytes, pgm_bytes, write_atomic};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// "<=" or ">=".
    pub comparison: String,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub experiment: String,
    pub metrics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
    pub config_echo: ExperimentConfig,
}

impl RunReport {
    pub fn failed_checks(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Collects metrics and artifacts of one run.
pub struct Run {
    pub out_dir: PathBuf,
    pub report: RunReport,
}

impl Run {
    pub fn new(config: &ExperimentConfig, experiment: &str) -> Result<Self, CliError> {
        let out_dir = config.output_dir.clone();
        if !out_dir.is_dir() {
            std::fs::create_dir_all(&out_dir)?;
        }
        Ok(Self {
            out_dir,
            report: RunReport {
                version: env!("CARGO_PKG_VERSION").to_string(),
                experiment: experiment.to_string(),
                metrics: BTreeMap::new(),
                checks: Vec::new(),
                artifacts: Vec::new(),
                config_echo: config.clone(),
            },
        })
    }

    pub fn metric(&mut self, name: impl Into<String>, value: f64) -> Result<(), CliError> {
        let name = name.into();
        if !value.is_finite() {
            return Err(CliError::NonFiniteMetric { name });
        }
        self.report.metrics.insert(name, value);
        Ok(())
    }

    pub fn check_le(&mut self, name: &str, value: f64, tolerance: f64) -> Result<(), CliError> {
        self.check(name, value, "<=", tolerance, value <= tolerance)
    }

    pub fn check_ge(&mut self, name: &str, value: f64, tolerance: f64) -> Result<(), CliError> {
        self.check(name, value, ">=", tolerance, value >= tolerance)
    }

    fn check(&mut self, name: &str, value: f64, cmp: &str, tolerance: f64, passed: bool) -> Result<(), CliError> {
        self.metric(name, value)?;
        self.report.checks.push(Check {
            name: name.to_string(),
            value,
            comparison: cmp.to_string(),
            tolerance,
            passed: passed && value.is_finite(),
        });
        Ok(())
    }

    fn artifact(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.out_dir.join(name);
        write_atomic(&path, bytes)?;
        self.report.artifacts.push(name.to_string());
        Ok(path)
    }

    pub fn csv(&mut self, name: &str, header: &[&str], rows: &[Vec<f64>]) -> Result<PathBuf, CliError> {
        let bytes = csv_bytes(header, rows)?;
        self.artifact(name, &bytes)
    }

    /// Writes the heatmap and records its value range as metrics.
    pub fn pgm(&mut self, name: &str, rows: usize, cols: usize, values: &[f64]) -> Result<PathBuf, CliError> {
        let (bytes, lo, hi) = pgm_bytes(rows, cols, values)?;
        let stem = name.trim_end_matches(".pgm");
        self.metric(format!("{stem}.min"), lo)?;
        self.metric(format!("{stem}.max"), hi)?;
        self.artifact(name, &bytes)
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf, CliError> {
        let bytes = json_bytes(value)?;
        self.artifact(name, &bytes)
    }

    /// Writes report.json and returns the report; failing checks become an error
    /// after the report is on disk.
    pub fn finish(mut self) -> Result<RunReport, (Box<RunReport>, CliError)> {
        let path = self.out_dir.join("report.json");
        self.report.artifacts.push("report.json".to_string());
        let report = self.report;
        if let Err(e) = json_bytes(&report).and_then(|b| write_atomic(&path, &b)) {
            return Err((Box::new(report), e));
        }
        let failed = report.failed_checks();
        if !failed.is_empty() {
            let names = failed.iter().map(|c| c.name.as_str()).collect::<Vec<_>>().join(", ");
            let err = CliError::ChecksFailed { failed: failed.len(), names };
            return Err((Box::new(report), err));
        }
        Ok(report)
    }
}

pub fn read_report(path: &Path) -> Result<RunReport, CliError> {
    Ok(serde_json::from_slice(&std::fs::read(path)?)?)
}
