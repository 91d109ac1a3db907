//! Build the five circuit-inference benchmark truth tables and write one to
//! disk in the dataset text format.
//!
//! Run with: cargo run --example generate_datasets

use boolnet::problems::{gen_add, gen_cmaj, gen_cmux, gen_cpar, gen_sub};
use boolnet::{Dataset, Result};

fn main() -> Result<()> {
    let problems: Vec<(&str, Dataset)> = vec![
        ("cascaded parity (n=7)", gen_cpar(7)?),
        ("cascaded majority (n=9)", gen_cmaj(9)?),
        ("binary subtraction (n=5)", gen_sub(5)?),
        ("binary addition (n=6)", gen_add(6)?),
        ("cascaded multiplexer (n=8)", gen_cmux(8)?),
    ];
    println!("{:<28} {:>6} {:>7} {:>9}", "problem", "inputs", "targets", "examples");
    for (name, ds) in &problems {
        println!(
            "{:<28} {:>6} {:>7} {:>9}",
            name,
            ds.n_features(),
            ds.n_targets(),
            ds.n_examples()
        );
    }

    let path = std::env::temp_dir().join("cpar7.txt");
    problems[0].1.write_file(&path)?;
    println!("\nwrote {} — reload it with Dataset::read_file or any CLI subcommand", path.display());

    // A pool too big to materialise can be sampled instead.
    let mut big = boolnet::ProblemSpec::generator(boolnet::ProblemKind::Cmux, 8);
    big.pool_size = Some(1024);
    big.pool_seed = 7;
    let sampled = big.build()?;
    println!(
        "cmux-8 sampled pool: {} of {} patterns",
        sampled.n_examples(),
        1u64 << 15
    );
    Ok(())
}
