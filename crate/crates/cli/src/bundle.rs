//! Report bundles: the fixed output-directory layout shared by `plan` and
//! `simulate`, plus the machine-readable report object.
//!
//! Regenerating a bundle from the same run yields byte-identical files; no
//! wall-clock content is ever written.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use racsim_core::{CpuSummary, Metrics, StorageReport, Violation};

pub const METRICS_STATIONS: &str = "metrics_stations.csv";
pub const METRICS_LINKS: &str = "metrics_links.csv";
pub const METRICS_JOBS: &str = "metrics_jobs.csv";
pub const STORAGE_REPORT: &str = "storage_report.csv";
pub const SUMMARY: &str = "summary.txt";
pub const CATALOG_DUMP: &str = "catalog.dump";

/// Everything one command run produced. File contents are kept in memory so
/// tests can compare bundles without touching the filesystem.
#[derive(Debug, Clone, Default)]
pub struct ReportBundle {
    pub files: BTreeMap<&'static str, String>,
    pub report: StructuredReport,
}

/// The machine-readable side of a bundle.
#[derive(Debug, Clone, Default, Serialize)]
pub struct StructuredReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub storage: Option<StorageReport>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub projection: Vec<StorageReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cpu: Option<CpuSummary>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fit_violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metrics: Option<Metrics>,
}

impl StructuredReport {
    /// JSON form of the machine-readable report.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

impl ReportBundle {
    pub fn insert(&mut self, name: &'static str, contents: String) {
        self.files.insert(name, contents);
    }

    /// Write every file into `dir`, creating it if needed. Returns the paths
    /// written, sorted by file name.
    pub fn write_to(&self, dir: &Path) -> io::Result<Vec<PathBuf>> {
        fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        for (name, contents) in &self.files {
            let path = dir.join(name);
            fs::write(&path, contents)?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn summary(&self) -> &str {
        self.files.get(SUMMARY).map(String::as_str).unwrap_or("")
    }
}
