use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Identifies the CSV layout; bump when columns change.
pub const CSV_SCHEMA: &str = "channelformer-results/1";
pub const CSV_HEADER: &str = "axis,estimator,metric,mean,std_err,n";

/// Enough to regenerate a result file exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    /// sha256 of the configuration text
    pub config_hash: String,
    pub seed: u64,
    pub version: String,
}

impl Provenance {
    pub fn new(config_text: &str, seed: u64) -> Self {
        let digest = Sha256::digest(config_text.as_bytes());
        let config_hash = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        Provenance {
            config_hash,
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub axis: f64,
    pub estimator: String,
    pub metric: String,
    pub mean: f64,
    pub std_err: f64,
    pub n: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub kind: String,
    pub axis_name: String,
    pub rows: Vec<ResultRow>,
    pub provenance: Provenance,
}

impl ExperimentResult {
    pub fn row(&self, axis: f64, estimator: &str) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.axis == axis && r.estimator == estimator)
    }

    /// Rows of one estimator in axis order.
    pub fn series(&self, estimator: &str) -> Vec<&ResultRow> {
        self.rows.iter().filter(|r| r.estimator == estimator).collect()
    }

    pub fn to_csv(&self) -> String {
        let p = &self.provenance;
        let mut s = format!(
            "# {CSV_SCHEMA} kind={} axis={} config_sha256={} seed={} version={}\n{CSV_HEADER}\n",
            self.kind, self.axis_name, p.config_hash, p.seed, p.version
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{:.9e},{:.9e},{}",
                r.axis, r.estimator, r.metric, r.mean, r.std_err, r.n
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}
