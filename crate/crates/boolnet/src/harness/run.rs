//! Experiment execution: paired-loss sweeps and τ-stratified order sweeps.
//!
//! All randomness is derived from per-record seeds, never from scheduling,
//! so a fixed config yields a byte-identical record stream regardless of the
//! worker count. Jobs run on a fixed-size thread pool; a single writer emits
//! records in canonical job order through a reorder buffer and flushes after
//! every job, which makes interrupted runs resumable: on restart the output
//! file is matched job-by-job against the plan and only the missing suffix
//! is computed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitdata::{sample_split, Dataset};
use crate::error::{Error, Result};
use crate::harness::config::{CurriculumMode, ResolvedConfig};
use crate::harness::records::{ExperimentRecord, RecordKey};
use crate::loss::{Curriculum, LossKind};
use crate::minfs::estimate_curriculum;
use crate::network::{evaluate, NetworkStructure};
use crate::optimizer::{lahc_train, LahcConfig};
use crate::stats::{kendall_tau, pair_count, sample_permutation_with_inversions, tau_for_inversions};

/// SplitMix64 finalizer; the documented mixing step behind every derived
/// seed.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derived seed: fold each part into the SplitMix64 state in order. Seeds
/// depend only on (base, role, coordinates), so adding losses or sizes to a
/// config never perturbs other replicates' randomness.
pub fn derive_seed(base: u64, parts: &[u64]) -> u64 {
    let mut state = splitmix64(base);
    for &p in parts {
        state = splitmix64(state ^ p);
    }
    state
}

mod role {
    pub const SPLIT: u64 = 1;
    pub const SHUFFLE: u64 = 2;
    pub const CURRICULUM: u64 = 3;
    pub const TRAIN: u64 = 4;
    pub const PERM: u64 = 5;
}

fn loss_tag(loss: LossKind) -> u64 {
    LossKind::ALL.iter().position(|&l| l == loss).unwrap() as u64
}

fn split_seed(base: u64, size: usize, replicate: usize) -> u64 {
    derive_seed(base, &[role::SPLIT, size as u64, replicate as u64])
}

/// The exact train/test split a given (size, replicate) cell uses under
/// `base_seed`. Splits depend only on these coordinates, never on the loss
/// list, so paired records share them by construction.
pub fn replicate_split(
    pool: &Dataset,
    base_seed: u64,
    size: usize,
    replicate: usize,
) -> Result<crate::bitdata::SampleSplit> {
    sample_split(pool, size, split_seed(base_seed, size, replicate))
}

fn train_seed(
    base: u64,
    size: usize,
    replicate: usize,
    loss: LossKind,
    stratum: Option<u64>,
    perm_index: Option<usize>,
) -> u64 {
    derive_seed(
        base,
        &[
            role::TRAIN,
            size as u64,
            replicate as u64,
            loss_tag(loss),
            stratum.map_or(0, |q| q + 1),
            perm_index.map_or(0, |p| p as u64 + 1),
        ],
    )
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Job {
    /// One split, one network per loss.
    Paired { size: usize, replicate: usize },
    /// τ-sweep baseline: one L1 network on this replicate's split.
    TauBaseline { size: usize, replicate: usize },
    /// τ-sweep stratum: one sampled order, one Lgh network per replicate.
    TauStratum {
        size: usize,
        inversions: u64,
        perm_index: usize,
    },
}

impl Job {
    fn label(&self) -> String {
        match self {
            Job::Paired { size, replicate } => format!("size={size} replicate={replicate}"),
            Job::TauBaseline { size, replicate } => {
                format!("size={size} replicate={replicate} baseline")
            }
            Job::TauStratum {
                size,
                inversions,
                perm_index,
            } => format!("size={size} q={inversions} perm={perm_index}"),
        }
    }

    fn expected_keys(&self, ctx: &RunContext) -> Vec<RecordKey> {
        match *self {
            Job::Paired { size, replicate } => ctx
                .cfg
                .losses
                .iter()
                .map(|&loss| RecordKey {
                    train_size: size,
                    replicate,
                    loss,
                    inversions: None,
                    perm_index: None,
                })
                .collect(),
            Job::TauBaseline { size, replicate } => vec![RecordKey {
                train_size: size,
                replicate,
                loss: LossKind::L1,
                inversions: None,
                perm_index: None,
            }],
            Job::TauStratum {
                size,
                inversions,
                perm_index,
            } => (0..ctx.cfg.replicates)
                .map(|replicate| RecordKey {
                    train_size: size,
                    replicate,
                    loss: LossKind::Lgh,
                    inversions: Some(inversions),
                    perm_index: Some(perm_index),
                })
                .collect(),
        }
    }
}

struct RunContext<'a> {
    cfg: &'a ResolvedConfig,
    pool: &'a Dataset,
    problem_id: String,
    known_order: Option<Vec<usize>>,
}

pub struct RunStats {
    pub jobs_total: usize,
    pub jobs_skipped: usize,
    pub records_written: usize,
}

fn validate_order(order: &[usize], m: usize, what: &str) -> Result<()> {
    let mut seen = vec![false; m];
    if order.len() != m {
        return Err(Error::InvalidArgument(format!(
            "{what} has {} entries for {m} targets",
            order.len()
        )));
    }
    for &t in order {
        if t >= m || seen[t] {
            return Err(Error::InvalidArgument(format!(
                "{what} {order:?} is not a permutation of 0..{m}"
            )));
        }
        seen[t] = true;
    }
    Ok(())
}

/// Per-target accuracy of `net` on `ds`, indexed by `ds` target order.
fn per_target_accuracy(net: &NetworkStructure, ds: &Dataset) -> Result<Vec<f64>> {
    let preds = evaluate(net, ds.inputs())?;
    let n = ds.n_examples();
    Ok((0..ds.n_targets())
        .map(|j| {
            let mismatches = (0..n)
                .filter(|&r| preds.get(r, j) != ds.targets().get(r, j))
                .count();
            1.0 - mismatches as f64 / n as f64
        })
        .collect())
}

/// Scatter `values` (indexed by shuffled target) back to original target
/// indices: original index of shuffled target `k` is `shuffle[k]`.
fn unshuffle<T: Copy + Default>(values: &[T], shuffle: &[usize]) -> Vec<T> {
    let mut out = vec![T::default(); values.len()];
    for (k, &v) in values.iter().enumerate() {
        out[shuffle[k]] = v;
    }
    out
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn run_paired_job(ctx: &RunContext, size: usize, replicate: usize) -> Result<Vec<ExperimentRecord>> {
    let cfg = ctx.cfg;
    let pool = ctx.pool;
    let m = pool.n_targets();
    let base = cfg.base_seed;
    let split = replicate_split(pool, base, size, replicate)?;

    // Resolve the dataset (possibly target-shuffled) and the curriculum.
    let (ds, shuffle, curriculum, eta, mfs_sizes): (
        Dataset,
        Vec<usize>,
        Curriculum,
        Option<f64>,
        Option<Vec<usize>>,
    ) = match &cfg.curriculum_mode {
        CurriculumMode::Identity => (
            pool.clone(),
            (0..m).collect(),
            Curriculum::identity(m),
            None,
            None,
        ),
        CurriculumMode::Given(order) => (
            pool.clone(),
            (0..m).collect(),
            Curriculum::new(order.clone())?,
            None,
            None,
        ),
        CurriculumMode::Auto => {
            let mut shuffle: Vec<usize> = (0..m).collect();
            shuffle.shuffle(&mut ChaCha8Rng::seed_from_u64(derive_seed(
                base,
                &[role::SHUFFLE, size as u64, replicate as u64],
            )));
            let ds = pool.permute_targets(&shuffle);
            let train_ds = ds.select_rows(&split.train_indices);
            let cur_seed =
                derive_seed(base, &[role::CURRICULUM, size as u64, replicate as u64]);
            match estimate_curriculum(&train_ds, cur_seed) {
                Ok(est) => {
                    let sizes = unshuffle(&est.sizes, &shuffle);
                    let eta = est.nestedness;
                    (ds, shuffle, est.order, Some(eta), Some(sizes))
                }
                Err(Error::Infeasible { target, first, second }) => {
                    // Flag every loss's record and keep the run going.
                    eprintln!(
                        "[harness] size={size} replicate={replicate}: infeasible curriculum \
                         estimate (target {target:?}, examples {first}/{second}); flagged"
                    );
                    return Ok(cfg
                        .losses
                        .iter()
                        .map(|&loss| ExperimentRecord {
                            problem: ctx.problem_id.clone(),
                            pool_size: pool.n_examples(),
                            train_size: size,
                            replicate,
                            loss,
                            seed: train_seed(base, size, replicate, loss, None, None),
                            curriculum: Vec::new(),
                            tau_vs_known: None,
                            eta: None,
                            mfs_sizes: None,
                            inversions: None,
                            perm_index: None,
                            infeasible: true,
                            reached_zero: false,
                            final_training_loss: 1.0,
                            iterations: 0,
                            restarts: 0,
                            train_acc: Vec::new(),
                            test_acc: None,
                            mean_test_acc: None,
                        })
                        .collect());
                }
                Err(other) => return Err(other),
            }
        }
    };

    // Curriculum in original-target indices, for the record and for τ.
    let curriculum_orig: Vec<usize> = curriculum
        .as_slice()
        .iter()
        .map(|&pos| shuffle[pos])
        .collect();
    let tau_vs_known = match (&ctx.known_order, m >= 2) {
        (Some(known), true) => Some(kendall_tau(&curriculum_orig, known)?.value()),
        _ => None,
    };

    let train_ds = ds.select_rows(&split.train_indices);
    let test_ds = ds.select_rows(&split.test_indices);
    let n_g = cfg.gates.resolve(m);

    let mut records = Vec::with_capacity(cfg.losses.len());
    for &loss in &cfg.losses {
        let seed = train_seed(base, size, replicate, loss, None, None);
        let lahc = LahcConfig {
            history_length: cfg.history_length,
            iteration_limit: cfg.iteration_limit,
            restart_limit: cfg.restart_limit,
            loss,
            curriculum: curriculum.clone(),
            return_best: false,
        };
        let result = lahc_train(&train_ds, &lahc, n_g, seed)?;
        let train_acc = unshuffle(&per_target_accuracy(&result.network, &train_ds)?, &shuffle);
        let (test_acc, mean_test_acc) = if test_ds.n_examples() > 0 {
            let acc = unshuffle(&per_target_accuracy(&result.network, &test_ds)?, &shuffle);
            let mean_acc = mean(&acc);
            (Some(acc), Some(mean_acc))
        } else {
            (None, None)
        };
        records.push(ExperimentRecord {
            problem: ctx.problem_id.clone(),
            pool_size: pool.n_examples(),
            train_size: size,
            replicate,
            loss,
            seed,
            curriculum: curriculum_orig.clone(),
            tau_vs_known,
            eta,
            mfs_sizes: mfs_sizes.clone(),
            inversions: None,
            perm_index: None,
            infeasible: false,
            reached_zero: result.reached_zero,
            final_training_loss: result.final_training_loss,
            iterations: result.iterations_used,
            restarts: result.restarts_used,
            train_acc,
            test_acc,
            mean_test_acc,
        });
    }
    Ok(records)
}

fn run_one_training(
    ctx: &RunContext,
    size: usize,
    replicate: usize,
    loss: LossKind,
    curriculum: &Curriculum,
    stratum: Option<u64>,
    perm_index: Option<usize>,
) -> Result<ExperimentRecord> {
    let cfg = ctx.cfg;
    let pool = ctx.pool;
    let split = replicate_split(pool, cfg.base_seed, size, replicate)?;
    let train_ds = pool.select_rows(&split.train_indices);
    let test_ds = pool.select_rows(&split.test_indices);
    let seed = train_seed(cfg.base_seed, size, replicate, loss, stratum, perm_index);
    let lahc = LahcConfig {
        history_length: cfg.history_length,
        iteration_limit: cfg.iteration_limit,
        restart_limit: cfg.restart_limit,
        loss,
        curriculum: curriculum.clone(),
        return_best: false,
    };
    let result = lahc_train(&train_ds, &lahc, cfg.gates.resolve(pool.n_targets()), seed)?;
    let train_acc = per_target_accuracy(&result.network, &train_ds)?;
    let (test_acc, mean_test_acc) = if test_ds.n_examples() > 0 {
        let acc = per_target_accuracy(&result.network, &test_ds)?;
        let mean_acc = mean(&acc);
        (Some(acc), Some(mean_acc))
    } else {
        (None, None)
    };
    let curriculum_vec = curriculum.as_slice().to_vec();
    let tau_vs_known = match &ctx.known_order {
        Some(known) if pool.n_targets() >= 2 => {
            Some(kendall_tau(&curriculum_vec, known)?.value())
        }
        _ => None,
    };
    Ok(ExperimentRecord {
        problem: ctx.problem_id.clone(),
        pool_size: pool.n_examples(),
        train_size: size,
        replicate,
        loss,
        seed,
        curriculum: curriculum_vec,
        tau_vs_known,
        eta: None,
        mfs_sizes: None,
        inversions: stratum,
        perm_index,
        infeasible: false,
        reached_zero: result.reached_zero,
        final_training_loss: result.final_training_loss,
        iterations: result.iterations_used,
        restarts: result.restarts_used,
        train_acc,
        test_acc,
        mean_test_acc,
    })
}

fn run_job(ctx: &RunContext, job: &Job) -> Result<Vec<ExperimentRecord>> {
    match *job {
        Job::Paired { size, replicate } => run_paired_job(ctx, size, replicate),
        Job::TauBaseline { size, replicate } => {
            let known = ctx.known_order.clone().expect("τ sweep has a known order");
            let curriculum = Curriculum::new(known)?;
            Ok(vec![run_one_training(
                ctx,
                size,
                replicate,
                LossKind::L1,
                &curriculum,
                None,
                None,
            )?])
        }
        Job::TauStratum {
            size,
            inversions,
            perm_index,
        } => {
            let known = ctx.known_order.as_deref().expect("τ sweep has a known order");
            let m = ctx.pool.n_targets();
            let perm_seed = derive_seed(
                ctx.cfg.base_seed,
                &[role::PERM, size as u64, inversions, perm_index as u64],
            );
            let positions = sample_permutation_with_inversions(
                m,
                inversions,
                &mut ChaCha8Rng::seed_from_u64(perm_seed),
            )?;
            let curriculum = Curriculum::new(known.to_vec())?.compose(&positions)?;
            (0..ctx.cfg.replicates)
                .map(|replicate| {
                    run_one_training(
                        ctx,
                        size,
                        replicate,
                        LossKind::Lgh,
                        &curriculum,
                        Some(inversions),
                        Some(perm_index),
                    )
                })
                .collect()
        }
    }
}

/// Match the existing output file against the planned record keys job by
/// job; truncate anything after the last fully matched job. Returns the
/// number of jobs already complete.
fn resume_scan(path: &Path, planned: &[Vec<RecordKey>]) -> Result<usize> {
    if !path.exists() {
        return Ok(0);
    }
    let text = std::fs::read_to_string(path)?;
    let mut offset = 0usize;
    let mut jobs_done = 0usize;
    'jobs: for job_keys in planned {
        let mut pos = offset;
        for key in job_keys {
            let rest = &text[pos..];
            let Some(nl) = rest.find('\n') else { break 'jobs };
            let line = &rest[..nl];
            let Ok(record) = serde_json::from_str::<ExperimentRecord>(line) else {
                break 'jobs;
            };
            // Key and canonical serialisation must both match, so a resumed
            // file stays byte-identical to a fresh run.
            if record.key() != *key || record.to_json_line()? != format!("{line}\n") {
                break 'jobs;
            }
            pos += nl + 1;
        }
        offset = pos;
        jobs_done += 1;
    }
    let file = std::fs::OpenOptions::new().write(true).open(path)?;
    file.set_len(offset as u64)?;
    Ok(jobs_done)
}

fn execute(ctx: &RunContext, jobs: Vec<Job>, workers: usize) -> Result<RunStats> {
    let planned: Vec<Vec<RecordKey>> = jobs.iter().map(|j| j.expected_keys(ctx)).collect();
    if let Some(parent) = ctx.cfg.output.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let jobs_done = resume_scan(&ctx.cfg.output, &planned)?;
    if jobs_done > 0 {
        eprintln!(
            "[harness] resuming {}: {jobs_done}/{} jobs already complete",
            ctx.cfg.output.display(),
            jobs.len()
        );
    }
    let mut out = std::io::BufWriter::new(
        std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&ctx.cfg.output)?,
    );

    let total = jobs.len();
    let workers = workers.clamp(1, total.max(1));
    let next = AtomicUsize::new(jobs_done);
    let (tx, rx) = mpsc::channel::<(usize, Result<Vec<ExperimentRecord>>, f64)>();
    let mut records_written = 0usize;
    let mut run_error: Option<Error> = None;

    std::thread::scope(|scope| {
        for _ in 0..workers {
            let tx = tx.clone();
            let next = &next;
            let jobs = &jobs;
            scope.spawn(move || loop {
                let idx = next.fetch_add(1, Ordering::Relaxed);
                if idx >= jobs.len() {
                    break;
                }
                let started = Instant::now();
                let result = run_job(ctx, &jobs[idx]);
                let elapsed = started.elapsed().as_secs_f64();
                if tx.send((idx, result, elapsed)).is_err() {
                    break;
                }
            });
        }
        drop(tx);

        let mut pending: BTreeMap<usize, Vec<ExperimentRecord>> = BTreeMap::new();
        let mut next_write = jobs_done;
        for (idx, result, elapsed) in rx {
            match result {
                Ok(records) => {
                    eprintln!(
                        "[harness] {}/{total} {} ({elapsed:.1}s)",
                        idx + 1,
                        jobs[idx].label()
                    );
                    pending.insert(idx, records);
                }
                Err(e) => {
                    if run_error.is_none() {
                        run_error = Some(e);
                        // Stop handing out new jobs; drain what is running.
                        next.store(jobs.len(), Ordering::Relaxed);
                    }
                }
            }
            while let Some(records) = pending.remove(&next_write) {
                for record in &records {
                    let line = match record.to_json_line() {
                        Ok(line) => line,
                        Err(e) => {
                            run_error.get_or_insert(e);
                            break;
                        }
                    };
                    if let Err(e) = out.write_all(line.as_bytes()) {
                        run_error.get_or_insert(e.into());
                        break;
                    }
                    records_written += 1;
                }
                if let Err(e) = out.flush() {
                    run_error.get_or_insert(e.into());
                }
                next_write += 1;
            }
        }
    });

    match run_error {
        Some(e) => Err(e),
        None => Ok(RunStats {
            jobs_total: total,
            jobs_skipped: jobs_done,
            records_written,
        }),
    }
}

fn validate_common(cfg: &ResolvedConfig, pool: &Dataset) -> Result<Option<Vec<usize>>> {
    let m = pool.n_targets();
    if pool.n_examples() == 0 || m == 0 {
        return Err(Error::EmptyProblem("example pool is empty".into()));
    }
    for &size in &cfg.train_sizes {
        if size == 0 || size > pool.n_examples() {
            return Err(Error::InvalidArgument(format!(
                "train_size {size} out of range 1..={}",
                pool.n_examples()
            )));
        }
    }
    let n_g = cfg.gates.resolve(m);
    if n_g < m {
        return Err(Error::InvalidArgument(format!(
            "gate budget {n_g} is smaller than the target count {m}"
        )));
    }
    if let CurriculumMode::Given(order) = &cfg.curriculum_mode {
        validate_order(order, m, "curriculum")?;
    }
    let known = match &cfg.known_order {
        Some(order) => {
            validate_order(order, m, "known_order")?;
            Some(order.clone())
        }
        None => Some((0..m).collect()),
    };
    Ok(known)
}

/// Training-fraction sweep with paired losses on shared samples: for every
/// (train size, replicate) one split is drawn and one network is trained per
/// loss on that identical split, tested on the exhaustive complement.
pub fn run_experiment(cfg: &ResolvedConfig, workers: usize) -> Result<RunStats> {
    let pool = cfg.problem.build()?;
    let known_order = validate_common(cfg, &pool)?;
    let ctx = RunContext {
        cfg,
        pool: &pool,
        problem_id: cfg.problem.id(),
        known_order,
    };
    let jobs: Vec<Job> = cfg
        .train_sizes
        .iter()
        .flat_map(|&size| {
            (0..cfg.replicates).map(move |replicate| Job::Paired { size, replicate })
        })
        .collect();
    execute(&ctx, jobs, workers)
}

/// τ-stratified order sweep: per training size, L1 baselines on each
/// replicate's split, then Lgh runs under orders sampled uniformly within
/// each Kendall-τ stratum relative to the known order, sharing the baseline
/// splits.
pub fn run_tau_sweep(cfg: &ResolvedConfig, workers: usize) -> Result<RunStats> {
    let pool = cfg.problem.build()?;
    let known_order = validate_common(cfg, &pool)?;
    let m = pool.n_targets();
    if m < 2 {
        return Err(Error::InvalidArgument(
            "a τ sweep needs at least two targets".into(),
        ));
    }
    let strata: Vec<u64> = match &cfg.taus {
        None => (0..=pair_count(m)).collect(),
        Some(taus) => {
            let mut qs = Vec::new();
            for &tau in taus {
                let q = crate::stats::inversions_for_tau(m, tau)?;
                if !qs.contains(&q) {
                    qs.push(q);
                }
            }
            qs
        }
    };
    let ctx = RunContext {
        cfg,
        pool: &pool,
        problem_id: cfg.problem.id(),
        known_order,
    };
    let mut jobs = Vec::new();
    for &size in &cfg.train_sizes {
        for replicate in 0..cfg.replicates {
            jobs.push(Job::TauBaseline { size, replicate });
        }
        for &inversions in &strata {
            for perm_index in 0..cfg.tau_permutations {
                jobs.push(Job::TauStratum {
                    size,
                    inversions,
                    perm_index,
                });
            }
        }
    }
    execute(&ctx, jobs, workers)
}

/// τ of the stratum a sampled order came from; exposed for reporting.
pub fn stratum_tau(m: usize, inversions: u64) -> f64 {
    tau_for_inversions(m, inversions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_seeds_are_stable_and_distinct() {
        let a = derive_seed(1, &[role::SPLIT, 48, 0]);
        assert_eq!(a, derive_seed(1, &[role::SPLIT, 48, 0]));
        assert_ne!(a, derive_seed(1, &[role::SPLIT, 48, 1]));
        assert_ne!(a, derive_seed(2, &[role::SPLIT, 48, 0]));
        assert_ne!(a, derive_seed(1, &[role::TRAIN, 48, 0]));
    }

    #[test]
    fn split_seed_ignores_loss() {
        // Adding losses must not perturb splits: the split seed has no loss
        // component at all.
        assert_eq!(split_seed(9, 32, 4), split_seed(9, 32, 4));
    }

    #[test]
    fn unshuffle_scatters_by_original_index() {
        // Shuffled column k holds original target shuffle[k].
        let shuffled_values = [10.0, 20.0, 30.0];
        let shuffle = [2, 0, 1];
        assert_eq!(unshuffle(&shuffled_values, &shuffle), vec![20.0, 30.0, 10.0]);
    }
}
