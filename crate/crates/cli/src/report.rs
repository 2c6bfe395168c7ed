//! Run context: setup loading, CSV/JSON artifacts and in-run assertions.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use dunkl::config::SetupConfig;
use dunkl::error::DunklError;
use dunkl::rootsys::ReflectionSetup;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::Common;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("assertion failed: {invariant}: {detail}")]
    Assertion { invariant: String, detail: String },
    #[error(transparent)]
    Dunkl(#[from] DunklError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

/// One in-run assertion: value <= limit, NaN fails.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub invariant: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

/// Everything that identifies a run; serialized into every JSON report.
#[derive(Debug, Clone, Serialize)]
struct RunConfig<'a, P: Serialize> {
    command: &'a str,
    setup_file: String,
    setup: &'a SetupConfig,
    seed: u64,
    tol: Option<f64>,
    params: &'a P,
}

pub struct Run {
    pub command: &'static str,
    pub common: Common,
    pub config: SetupConfig,
    setup_file: String,
    checks: Vec<Check>,
    /// Wall-clock checks: enforced and printed, kept out of the JSON.
    timings: Vec<Check>,
    written: Vec<PathBuf>,
    start: Instant,
}

/// Floats in artifacts: shortest round-trip form.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

impl Run {
    pub fn new(command: &'static str, common: &Common) -> Result<Self, CliError> {
        let path = common
            .setup
            .as_ref()
            .ok_or_else(|| CliError::Usage(format!("{command}: --setup <path> is required")))?;
        let config = SetupConfig::load(path).map_err(|e| CliError::Usage(e.to_string()))?;
        if let Some(t) = common.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(CliError::Usage(format!("--tol must be positive, got {t}")));
            }
        }
        Ok(Self {
            command,
            common: common.clone(),
            config,
            setup_file: path.display().to_string(),
            checks: Vec::new(),
            timings: Vec::new(),
            written: Vec::new(),
            start: Instant::now(),
        })
    }

    pub fn setup(&self) -> ReflectionSetup {
        self.config.setup().expect("validated when the file was loaded")
    }

    pub fn tol(&self, default: f64) -> f64 {
        self.common.tol.unwrap_or(default)
    }

    pub fn check(&mut self, invariant: impl Into<String>, value: f64, limit: f64) {
        self.checks.push(Check {
            invariant: invariant.into(),
            value,
            limit,
            pass: value <= limit,
        });
    }

    pub fn check_timing(&mut self, invariant: impl Into<String>, seconds: f64, limit: f64) {
        self.timings.push(Check {
            invariant: invariant.into(),
            value: seconds,
            limit,
            pass: seconds <= limit,
        });
    }

    fn target(&mut self, name: &str) -> Result<PathBuf, CliError> {
        let dir = &self.common.out;
        fs::create_dir_all(dir).map_err(|source| CliError::Io {
            path: dir.clone(),
            source,
        })?;
        let path = dir.join(name);
        self.written.push(path.clone());
        Ok(path)
    }

    pub fn write_csv(&mut self, name: &str, header: &[String], rows: &[Vec<String>]) -> Result<(), CliError> {
        let path = self.target(name)?;
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush().map_err(|source| CliError::Io { path, source })?;
        Ok(())
    }

    /// {"config": ..., "checks": ..., "report": ...}; call after the checks.
    pub fn write_json<P: Serialize, T: Serialize>(&mut self, name: &str, params: &P, report: &T) -> Result<(), CliError> {
        let config = RunConfig {
            command: self.command,
            setup_file: self.setup_file.clone(),
            setup: &self.config,
            seed: self.common.seed,
            tol: self.common.tol,
            params,
        };
        let doc: Value = json!({
            "config": config,
            "checks": self.checks,
            "report": report,
        });
        let path = self.target(name)?;
        let text = serde_json::to_string_pretty(&doc)? + "\n";
        write_file(&path, &text)
    }

    /// Prints the summary; the first failing check becomes the error.
    pub fn finish(self) -> Result<(), CliError> {
        for c in self.checks.iter().chain(&self.timings) {
            let mark = if c.pass { "ok  " } else { "FAIL" };
            println!("  {mark} {} = {:.3e} (limit {:.1e})", c.invariant, c.value, c.limit);
        }
        for p in &self.written {
            println!("  wrote {}", p.display());
        }
        let failed: Vec<&Check> = self.checks.iter().chain(&self.timings).filter(|c| !c.pass).collect();
        println!(
            "{} {}: {} checks, {} failing, {:.1} s",
            self.command,
            if failed.is_empty() { "PASS" } else { "FAIL" },
            self.checks.len() + self.timings.len(),
            failed.len(),
            self.start.elapsed().as_secs_f64()
        );
        match failed.first() {
            None => Ok(()),
            Some(c) => Err(CliError::Assertion {
                invariant: c.invariant.clone(),
                detail: format!("{:e} exceeds {:e}", c.value, c.limit),
            }),
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
