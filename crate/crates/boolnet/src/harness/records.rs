//! JSON-lines experiment records.
//!
//! One record per (replicate, loss) training outcome. Streams are written in
//! a canonical job order and contain nothing non-deterministic, so re-running
//! a config byte-reproduces the file; wall-clock timing goes to stderr only.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::loss::LossKind;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub problem: String,
    pub pool_size: usize,
    pub train_size: usize,
    pub replicate: usize,
    pub loss: LossKind,
    /// Seed of the training run (derived, not the config base seed).
    pub seed: u64,
    /// Target order used, as original target indices, easiest first.
    pub curriculum: Vec<usize>,
    /// Rank correlation of `curriculum` against the known order, when one
    /// exists and the problem has at least two targets.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tau_vs_known: Option<f64>,
    /// Nestedness of the estimated curriculum (auto mode only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eta: Option<f64>,
    /// Estimated minimum-feature-set sizes, indexed by original target
    /// (auto mode only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mfs_sizes: Option<Vec<usize>>,
    /// Inversion-count stratum of the sampled order (τ-sweep only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub inversions: Option<u64>,
    /// Index of the sampled permutation within its stratum (τ-sweep only).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub perm_index: Option<usize>,
    /// Set when curriculum estimation failed on this replicate's training
    /// data; such records carry no training outcome and are skipped by
    /// aggregation.
    pub infeasible: bool,
    pub reached_zero: bool,
    pub final_training_loss: f64,
    pub iterations: u64,
    pub restarts: u64,
    /// Per-target training accuracy, indexed by original target.
    pub train_acc: Vec<f64>,
    /// Per-target test accuracy, indexed by original target; absent when the
    /// test set is empty.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub test_acc: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub mean_test_acc: Option<f64>,
}

impl ExperimentRecord {
    /// Identity of the job step this record belongs to, used for resume
    /// matching.
    pub fn key(&self) -> RecordKey {
        RecordKey {
            train_size: self.train_size,
            replicate: self.replicate,
            loss: self.loss,
            inversions: self.inversions,
            perm_index: self.perm_index,
        }
    }

    pub fn to_json_line(&self) -> Result<String> {
        let mut line = serde_json::to_string(self)?;
        line.push('\n');
        Ok(line)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct RecordKey {
    pub train_size: usize,
    pub replicate: usize,
    pub loss: LossKind,
    pub inversions: Option<u64>,
    pub perm_index: Option<usize>,
}

/// Read a whole record stream, failing on any malformed line.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<ExperimentRecord>> {
    let file = std::fs::File::open(path)?;
    let reader = std::io::BufReader::new(file);
    let mut records = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line)?);
    }
    Ok(records)
}

pub fn write_records(path: impl AsRef<Path>, records: &[ExperimentRecord]) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for r in records {
        out.write_all(r.to_json_line()?.as_bytes())?;
    }
    out.flush()?;
    Ok(())
}
