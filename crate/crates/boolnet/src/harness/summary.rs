//! Aggregation of record streams into plot-ready CSV summaries.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::harness::records::ExperimentRecord;
use crate::loss::LossKind;
use crate::stats::mean_ci;

/// Grouping selector. Groups always include problem, train size and loss;
/// `per_target` additionally emits one row per target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroupBy {
    pub per_target: bool,
}

impl GroupBy {
    /// Parse `size,loss` or `size,loss,target` (order-insensitive).
    pub fn parse(s: &str) -> Result<Self> {
        let mut keys: Vec<&str> = s.split(',').map(str::trim).collect();
        keys.sort_unstable();
        match keys.as_slice() {
            ["loss", "size"] => Ok(GroupBy { per_target: false }),
            ["loss", "size", "target"] => Ok(GroupBy { per_target: true }),
            _ => Err(Error::InvalidArgument(format!(
                "group-by must be \"size,loss\" or \"size,loss,target\", got {s:?}"
            ))),
        }
    }
}

/// One summary line: `target` of `None` aggregates across targets.
#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub problem: String,
    pub size: usize,
    pub fraction: f64,
    pub loss: LossKind,
    pub target: Option<usize>,
    pub mean_acc: f64,
    /// Mean paired difference in test accuracy against the same-replicate
    /// L1 baseline; zero for the L1 rows themselves.
    pub diff_vs_l1: f64,
    /// 95% CI half-width of the paired difference (of the mean accuracy for
    /// L1 rows); zero when fewer than two values exist.
    pub ci95: f64,
}

fn ci_or_zero(values: &[f64]) -> f64 {
    if values.len() < 2 {
        0.0
    } else {
        mean_ci(values, 0.95).expect("length checked").1
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Aggregate records into per-(problem, size, loss) rows with paired
/// differences against L1. Records flagged infeasible or lacking a test set
/// are excluded; a (problem, size) group without any L1 baseline is skipped
/// with a warning on stderr.
pub fn summarize(records: &[ExperimentRecord], group_by: GroupBy) -> Result<Vec<SummaryRow>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to summarize".into()));
    }
    let usable: Vec<&ExperimentRecord> = records
        .iter()
        .filter(|r| !r.infeasible && r.test_acc.is_some())
        .collect();

    // (problem, size) -> replicate -> L1 baseline record.
    let mut baselines: BTreeMap<(String, usize), BTreeMap<usize, &ExperimentRecord>> =
        BTreeMap::new();
    for &r in &usable {
        if r.loss == LossKind::L1 {
            baselines
                .entry((r.problem.clone(), r.train_size))
                .or_default()
                .entry(r.replicate)
                .or_insert(r);
        }
    }

    let mut groups: BTreeMap<(String, usize, usize), Vec<&ExperimentRecord>> = BTreeMap::new();
    for &r in &usable {
        let loss_idx = LossKind::ALL.iter().position(|&l| l == r.loss).unwrap();
        groups
            .entry((r.problem.clone(), r.train_size, loss_idx))
            .or_default()
            .push(r);
    }

    let mut rows = Vec::new();
    for ((problem, size, loss_idx), group) in &groups {
        let loss = LossKind::ALL[*loss_idx];
        let Some(base) = baselines.get(&(problem.clone(), *size)) else {
            eprintln!("[summarize] {problem} size {size}: no L1 baseline, group skipped");
            continue;
        };
        let fraction = *size as f64 / group[0].pool_size as f64;
        let n_targets = group[0].test_acc.as_ref().unwrap().len();

        let mut emit = |target: Option<usize>| {
            let acc_of = |r: &ExperimentRecord| match target {
                None => r.mean_test_acc.unwrap(),
                Some(t) => r.test_acc.as_ref().unwrap()[t],
            };
            let accs: Vec<f64> = group.iter().map(|r| acc_of(r)).collect();
            let (diff, ci) = if loss == LossKind::L1 {
                (0.0, ci_or_zero(&accs))
            } else {
                let diffs: Vec<f64> = group
                    .iter()
                    .filter_map(|r| base.get(&r.replicate).map(|b| acc_of(r) - acc_of(b)))
                    .collect();
                if diffs.is_empty() {
                    return;
                }
                (mean(&diffs), ci_or_zero(&diffs))
            };
            rows.push(SummaryRow {
                problem: problem.clone(),
                size: *size,
                fraction,
                loss,
                target,
                mean_acc: mean(&accs),
                diff_vs_l1: diff,
                ci95: ci,
            });
        };

        emit(None);
        if group_by.per_target {
            for t in 0..n_targets {
                emit(Some(t));
            }
        }
    }
    Ok(rows)
}

pub const CSV_HEADER: &str = "problem,size,fraction,loss,target,mean_acc,diff_vs_l1,ci95";

pub fn to_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let target = r
            .target
            .map_or_else(|| "mean".to_string(), |t| t.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.problem, r.size, r.fraction, r.loss, target, r.mean_acc, r.diff_vs_l1, r.ci95
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(
        size: usize,
        replicate: usize,
        loss: LossKind,
        test_acc: Vec<f64>,
    ) -> ExperimentRecord {
        let mean_acc = mean(&test_acc);
        ExperimentRecord {
            problem: "toy".into(),
            pool_size: 16,
            train_size: size,
            replicate,
            loss,
            seed: 0,
            curriculum: (0..test_acc.len()).collect(),
            tau_vs_known: None,
            eta: None,
            mfs_sizes: None,
            inversions: None,
            perm_index: None,
            infeasible: false,
            reached_zero: true,
            final_training_loss: 0.0,
            iterations: 1,
            restarts: 0,
            train_acc: vec![1.0; test_acc.len()],
            test_acc: Some(test_acc),
            mean_test_acc: Some(mean_acc),
        }
    }

    #[test]
    fn paired_difference_arithmetic() {
        let records = vec![
            record(8, 0, LossKind::L1, vec![0.5, 0.5]),
            record(8, 0, LossKind::Lgh, vec![0.7, 0.7]),
        ];
        let rows = summarize(&records, GroupBy { per_target: false }).unwrap();
        assert_eq!(rows.len(), 2);
        let lgh = rows.iter().find(|r| r.loss == LossKind::Lgh).unwrap();
        assert!((lgh.diff_vs_l1 - 0.2).abs() < 1e-12);
        assert_eq!(lgh.ci95, 0.0); // single pair
        assert_eq!(lgh.fraction, 0.5);
        let l1 = rows.iter().find(|r| r.loss == LossKind::L1).unwrap();
        assert_eq!(l1.diff_vs_l1, 0.0);
    }

    #[test]
    fn identical_accuracies_give_zero_diff_and_zero_ci() {
        let mut records = Vec::new();
        for rep in 0..5 {
            records.push(record(8, rep, LossKind::L1, vec![0.75, 0.25]));
            records.push(record(8, rep, LossKind::Llh, vec![0.75, 0.25]));
        }
        let rows = summarize(&records, GroupBy { per_target: true }).unwrap();
        for row in rows.iter().filter(|r| r.loss == LossKind::Llh) {
            assert_eq!(row.diff_vs_l1, 0.0);
            assert_eq!(row.ci95, 0.0);
        }
        // Per-target rows: mean + 2 targets per loss.
        assert_eq!(rows.len(), 6);
        let t1 = rows
            .iter()
            .find(|r| r.loss == LossKind::Llh && r.target == Some(1))
            .unwrap();
        assert_eq!(t1.mean_acc, 0.25);
    }

    #[test]
    fn missing_baseline_skips_group() {
        let records = vec![record(8, 0, LossKind::Lgh, vec![0.7])];
        let rows = summarize(&records, GroupBy { per_target: false }).unwrap();
        assert!(rows.is_empty());
    }

    #[test]
    fn infeasible_records_are_excluded() {
        let mut flagged = record(8, 0, LossKind::Lgh, vec![0.7]);
        flagged.infeasible = true;
        flagged.test_acc = None;
        flagged.mean_test_acc = None;
        let records = vec![record(8, 0, LossKind::L1, vec![0.5]), flagged];
        let rows = summarize(&records, GroupBy { per_target: false }).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].loss, LossKind::L1);
    }

    #[test]
    fn group_by_parser() {
        assert_eq!(GroupBy::parse("size,loss").unwrap(), GroupBy { per_target: false });
        assert_eq!(
            GroupBy::parse("size,loss,target").unwrap(),
            GroupBy { per_target: true }
        );
        assert_eq!(
            GroupBy::parse("loss, size").unwrap(),
            GroupBy { per_target: false }
        );
        assert!(GroupBy::parse("size").is_err());
    }

    #[test]
    fn csv_shape() {
        let records = vec![
            record(8, 0, LossKind::L1, vec![0.5]),
            record(8, 1, LossKind::L1, vec![0.7]),
        ];
        let rows = summarize(&records, GroupBy { per_target: false }).unwrap();
        let csv = to_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_HEADER);
        let row = lines.next().unwrap();
        assert!(row.starts_with("toy,8,0.5,l1,mean,"));
    }
}
