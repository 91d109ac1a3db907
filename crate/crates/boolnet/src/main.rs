//! Thin CLI over the boolnet library: every subcommand parses arguments and
//! delegates to a library entry point.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::json;

use boolnet::harness::{
    self, default_workers, load_config, read_records, summarize, to_csv, CurriculumMode,
    GateBudget, GroupBy,
};
use boolnet::loss::{Curriculum, LossKind};
use boolnet::minfs::estimate_curriculum;
use boolnet::optimizer::{
    lahc_train, LahcConfig, DEFAULT_ITERATION_LIMIT, DEFAULT_RESTART_LIMIT,
};
use boolnet::problems::{
    load_dataset, parse_timeseries, timeseries_to_pairs, ProblemKind, ProblemSpec,
};
use boolnet::{Error, Result};

#[derive(Parser)]
#[command(name = "boolnet", version, about = "NAND-network training with target-curriculum losses")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark truth table (add|sub|cpar|cmaj|cmux) as a
    /// dataset file.
    Generate {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
        /// Sample this many patterns uniformly instead of the full table.
        #[arg(long)]
        subsample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Convert a state time series into a state-pair dataset, dropping
    /// repeats and constant targets.
    Pairs {
        #[arg(long = "in", value_name = "IN")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate per-target minimum feature sets and the derived curriculum;
    /// prints a JSON report.
    Minfs {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train one network on a dataset file; prints a JSON result.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value = "l1")]
        loss: String,
        /// identity | auto | given:2,0,1
        #[arg(long, default_value = "identity")]
        curriculum: String,
        /// "21m" or a gate count.
        #[arg(long, default_value = "21m")]
        gates: String,
        #[arg(long, default_value_t = 250)]
        history: usize,
        #[arg(long, default_value_t = DEFAULT_ITERATION_LIMIT)]
        iterations: u64,
        #[arg(long, default_value_t = DEFAULT_RESTART_LIMIT)]
        restarts: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the trained network in its text format.
        #[arg(long)]
        network_out: Option<PathBuf>,
    },
    /// Run a paired-loss experiment described by a TOML config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a τ-stratified target-order sweep described by a TOML config.
    TauSweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Aggregate a record stream into a CSV summary.
    Summarize {
        #[arg(long = "in", value_name = "IN")]
        input: PathBuf,
        #[arg(long, default_value = "size,loss")]
        group_by: String,
        /// Write CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            kind,
            n,
            out,
            subsample,
            seed,
        } => {
            let mut spec = ProblemSpec::generator(ProblemKind::parse(&kind)?, n);
            spec.pool_size = subsample;
            spec.pool_seed = seed;
            let ds = spec.build()?;
            ds.write_file(&out)?;
            eprintln!(
                "wrote {} ({} inputs, {} targets, {} examples)",
                out.display(),
                ds.n_features(),
                ds.n_targets(),
                ds.n_examples()
            );
            Ok(())
        }
        Command::Pairs { input, out } => {
            let states = parse_timeseries(&std::fs::read_to_string(&input)?)?;
            let pairs = timeseries_to_pairs(&states)?;
            pairs.dataset.write_file(&out)?;
            println!(
                "{}",
                json!({
                    "examples": pairs.dataset.n_examples(),
                    "inputs": pairs.dataset.n_features(),
                    "targets": pairs.dataset.n_targets(),
                    "removed_constant_targets": pairs.removed_targets,
                })
            );
            Ok(())
        }
        Command::Minfs { data, seed } => {
            let ds = load_dataset(&data)?;
            let est = estimate_curriculum(&ds, seed)?;
            let m = ds.n_targets();
            let sigma: Vec<Vec<f64>> = (0..m)
                .map(|i| {
                    (0..m)
                        .map(|j| {
                            boolnet::minfs::overlap_coefficient(
                                &est.per_target[i].features,
                                &est.per_target[j].features,
                            )
                        })
                        .collect()
                })
                .collect();
            let report = json!({
                "targets": (0..m)
                    .map(|j| json!({
                        "target": j,
                        "features": est.per_target[j].features,
                        "size": est.sizes[j],
                        "proven_optimal": est.per_target[j].proven_optimal,
                    }))
                    .collect::<Vec<_>>(),
                "order": est.order.as_slice(),
                "tie_groups": est.tie_groups,
                "sigma": sigma,
                "nestedness": est.nestedness,
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
            Ok(())
        }
        Command::Train {
            data,
            loss,
            curriculum,
            gates,
            history,
            iterations,
            restarts,
            seed,
            network_out,
        } => {
            let ds = load_dataset(&data)?;
            let m = ds.n_targets();
            let order = match CurriculumMode::parse(&curriculum)? {
                CurriculumMode::Identity => Curriculum::identity(m),
                CurriculumMode::Given(order) => Curriculum::new(order)?,
                CurriculumMode::Auto => {
                    let est = estimate_curriculum(&ds, seed)?;
                    est.order
                }
            };
            let loss: LossKind = loss.parse()?;
            let config = LahcConfig {
                history_length: history,
                iteration_limit: iterations,
                restart_limit: restarts,
                loss,
                curriculum: order.clone(),
                return_best: false,
            };
            let n_g = GateBudget::parse(&gates)?.resolve(m);
            let result = lahc_train(&ds, &config, n_g, seed)?;
            if let Some(path) = &network_out {
                result.network.write_file(path)?;
            }
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "loss": loss.to_string(),
                    "curriculum": order.as_slice(),
                    "gates": n_g,
                    "final_training_loss": result.final_training_loss,
                    "best_training_loss": result.best_training_loss,
                    "iterations_used": result.iterations_used,
                    "restarts_used": result.restarts_used,
                    "reached_zero": result.reached_zero,
                    "network_out": network_out.as_ref().map(|p| p.display().to_string()),
                }))?
            );
            Ok(())
        }
        Command::Experiment { config, workers } => {
            let cfg = load_config(&config)?;
            let stats =
                harness::run_experiment(&cfg, workers.unwrap_or_else(default_workers))?;
            eprintln!(
                "experiment complete: {} jobs ({} resumed), {} records appended to {}",
                stats.jobs_total,
                stats.jobs_skipped,
                stats.records_written,
                cfg.output.display()
            );
            Ok(())
        }
        Command::TauSweep { config, workers } => {
            let cfg = load_config(&config)?;
            let stats = harness::run_tau_sweep(&cfg, workers.unwrap_or_else(default_workers))?;
            eprintln!(
                "tau sweep complete: {} jobs ({} resumed), {} records appended to {}",
                stats.jobs_total,
                stats.jobs_skipped,
                stats.records_written,
                cfg.output.display()
            );
            Ok(())
        }
        Command::Summarize {
            input,
            group_by,
            out,
        } => {
            let records = read_records(&input)?;
            if records.is_empty() {
                return Err(Error::InvalidArgument(format!(
                    "no records in {}",
                    input.display()
                )));
            }
            let rows = summarize(&records, GroupBy::parse(&group_by)?)?;
            let csv = to_csv(&rows);
            match out {
                Some(path) => std::fs::write(path, csv)?,
                None => print!("{csv}"),
            }
            Ok(())
        }
    }
}
