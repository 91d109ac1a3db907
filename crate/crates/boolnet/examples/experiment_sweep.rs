//! Run a small training-fraction sweep through the harness and summarize it.
//!
//! The same flow as `boolnet experiment` + `boolnet summarize`, driven as a
//! library: a config is resolved, records stream to a JSONL file in
//! canonical order (re-running reproduces it byte for byte), and a second
//! pass aggregates paired differences against the L1 baseline.
//!
//! Run with: cargo run --example experiment_sweep

use boolnet::harness::{parse_config, read_records, run_experiment, summarize, to_csv, GroupBy};
use boolnet::Result;

fn main() -> Result<()> {
    let out = std::env::temp_dir().join("boolnet_example_sweep.jsonl");
    let _ = std::fs::remove_file(&out);
    let config = format!(
        r#"
schema_version = 1

[problem]
kind = "cpar"
n = 5

[experiment]
train_sizes = [12, 18, 24]
replicates = 10
losses = ["l1", "lgh"]
curriculum = "identity"
base_seed = 99
output = "{}"

[lahc]
max_iterations = 100000
restarts = 4
"#,
        out.display()
    );
    let cfg = parse_config(&config)?;
    let stats = run_experiment(&cfg, 2)?;
    println!(
        "ran {} jobs, wrote {} records to {}",
        stats.jobs_total,
        stats.records_written,
        out.display()
    );

    let records = read_records(&out)?;
    let rows = summarize(&records, GroupBy::parse("size,loss")?)?;
    println!("\n{}", to_csv(&rows));
    Ok(())
}
