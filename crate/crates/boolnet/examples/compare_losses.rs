//! Paired comparison of the four guiding losses on 5-bit cascaded parity.
//!
//! For each replicate one training split is drawn and one network is trained
//! per loss on that identical split, so the printed differences are paired.
//!
//! Run with: cargo run --example compare_losses

use boolnet::bitdata::sample_split;
use boolnet::loss::{Curriculum, LossKind};
use boolnet::network::evaluate;
use boolnet::optimizer::{lahc_train, LahcConfig};
use boolnet::problems::gen_cpar;
use boolnet::Result;

fn main() -> Result<()> {
    let pool = gen_cpar(5)?; // 32 patterns, 5 targets
    let train_size = 20;
    let replicates = 8;
    let curriculum = Curriculum::identity(pool.n_targets());

    let mut mean_acc = vec![0.0f64; LossKind::ALL.len()];
    for rep in 0..replicates {
        let split = sample_split(&pool, train_size, 1000 + rep)?;
        let train = pool.select_rows(&split.train_indices);
        let test = pool.select_rows(&split.test_indices);
        for (i, &loss) in LossKind::ALL.iter().enumerate() {
            let mut config = LahcConfig::new(loss, curriculum.clone());
            config.history_length = 1000; // parity wants the long history
            let result = lahc_train(&train, &config, 21 * 5, 7 * rep + i as u64)?;
            let preds = evaluate(&result.network, test.inputs())?;
            let mut correct = 0usize;
            for r in 0..test.n_examples() {
                for c in 0..test.n_targets() {
                    correct += (preds.get(r, c) == test.targets().get(r, c)) as usize;
                }
            }
            mean_acc[i] += correct as f64 / (test.n_examples() * test.n_targets()) as f64;
        }
    }

    println!(
        "mean test accuracy over {replicates} shared splits (train {train_size}/{}):",
        pool.n_examples()
    );
    for (i, loss) in LossKind::ALL.iter().enumerate() {
        let acc = mean_acc[i] / replicates as f64;
        println!("  {loss:>4}: {acc:.3}");
    }
    println!("\nthe hierarchical losses usually sit above l1 near the transition;");
    println!("run the full sweep via the `experiment` subcommand for tight intervals");
    Ok(())
}
