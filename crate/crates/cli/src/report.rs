//! Check records and the reports assembled from them.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;

/// How `measured` is compared with `tolerance`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    /// Passes when `measured <= tolerance`.
    Upper,
    /// Passes when `measured >= tolerance`.
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    /// The mathematical statement the check exercises.
    pub anchor: String,
    pub measured: f64,
    pub tolerance: f64,
    pub bound: Bound,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
    /// Excluded from the deterministic report; see [`TimingRecord`].
    #[serde(skip)]
    pub wall_time: Duration,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, anchor: impl Into<String>, measured: f64, tolerance: f64, bound: Bound) -> Self {
        let pass = match bound {
            Bound::Upper => measured <= tolerance,
            Bound::Lower => measured >= tolerance,
        };
        Self {
            name: name.into(),
            anchor: anchor.into(),
            measured,
            tolerance,
            bound,
            pass,
            error: None,
            wall_time: Duration::ZERO,
        }
    }

    pub fn failed(name: impl Into<String>, anchor: impl Into<String>, tolerance: f64, bound: Bound, error: String) -> Self {
        Self {
            pass: false,
            error: Some(error),
            ..Self::new(name, anchor, f64::NAN, tolerance, bound)
        }
    }
}

/// Runs `f` and records it; errors become failing records.
pub fn timed<F>(name: &str, anchor: &str, tolerance: f64, bound: Bound, f: F) -> CheckRecord
where
    F: FnOnce() -> heisenberg::Result<f64>,
{
    let start = Instant::now();
    let mut rec = match f() {
        Ok(v) => CheckRecord::new(name, anchor, v, tolerance, bound),
        Err(e) => CheckRecord::failed(name, anchor, tolerance, bound, e.to_string()),
    };
    rec.wall_time = start.elapsed();
    rec
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
}

/// Deterministic for a fixed configuration: no clocks inside.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suites: Vec<String>,
    pub pass: bool,
    pub records: Vec<CheckRecord>,
    pub environment: Environment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingRecord {
    pub name: String,
    pub wall_time_s: f64,
}

/// Wall-clock data kept apart from the report so the report stays byte-stable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub generated_unix_s: u64,
    pub records: Vec<TimingRecord>,
}

impl VerificationReport {
    pub fn new(suites: Vec<String>, records: Vec<CheckRecord>, config: &RunConfig) -> Self {
        Self {
            suites,
            pass: records.iter().all(|r| r.pass),
            records,
            environment: Environment {
                version: env!("CARGO_PKG_VERSION").to_string(),
                seed: config.seed,
                config: config.clone(),
            },
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn timing(&self) -> Timing {
        Timing {
            generated_unix_s: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            records: self
                .records
                .iter()
                .map(|r| TimingRecord {
                    name: r.name.clone(),
                    wall_time_s: r.wall_time.as_secs_f64(),
                })
                .collect(),
        }
    }

    /// Aligned plain-text table; `with_times` adds the wall-time column.
    pub fn summary(&self, with_times: bool) -> String {
        let width = self.records.iter().map(|r| r.name.len()).max().unwrap_or(4).max(4);
        let mut out = String::new();
        for r in &self.records {
            let cmp = match r.bound {
                Bound::Upper => "<=",
                Bound::Lower => ">=",
            };
            let verdict = if r.pass { "PASS" } else { "FAIL" };
            let _ = write!(
                out,
                "{verdict}  {:<width$}  {:>12.4e} {cmp} {:<10.3e}",
                r.name, r.measured, r.tolerance
            );
            if with_times {
                let _ = write!(out, "  {:>8.3}s", r.wall_time.as_secs_f64());
            }
            if let Some(e) = &r.error {
                let _ = write!(out, "  error: {e}");
            }
            out.push('\n');
        }
        let passed = self.records.iter().filter(|r| r.pass).count();
        let _ = writeln!(
            out,
            "{} {passed}/{} checks passed",
            if self.pass { "PASS" } else { "FAIL" },
            self.records.len()
        );
        out
    }

    /// One row per record: `name,anchor,measured,tolerance,bound,pass`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("name,anchor,measured,tolerance,bound,pass\n");
        for r in &self.records {
            let bound = match r.bound {
                Bound::Upper => "upper",
                Bound::Lower => "lower",
            };
            let anchor = r.anchor.replace('"', "\"\"");
            let _ = writeln!(out, "{},\"{anchor}\",{:e},{:e},{bound},{}", r.name, r.measured, r.tolerance, r.pass);
        }
        out
    }

    /// Writes `report.json` (or `report.csv`), `report.txt` and `timing.json` into `dir`.
    pub fn write(&self, dir: &Path, csv: bool) -> std::io::Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = if csv {
            let p = dir.join("report.csv");
            std::fs::write(&p, self.to_csv())?;
            p
        } else {
            let p = dir.join("report.json");
            std::fs::write(&p, self.to_json())?;
            p
        };
        std::fs::write(dir.join("report.txt"), self.summary(false))?;
        let timing = serde_json::to_string_pretty(&self.timing()).expect("timing serializes");
        std::fs::write(dir.join("timing.json"), timing + "\n")?;
        Ok(path)
    }
}
