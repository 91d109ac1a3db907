//! Train a NAND network that implements a 2-bit adder, then check it on
//! every input pattern.
//!
//! Run with: cargo run --example train_adder

use boolnet::loss::{Curriculum, LossKind};
use boolnet::optimizer::{lahc_train, LahcConfig};
use boolnet::problems::gen_add;
use boolnet::{evaluate, Result};

fn main() -> Result<()> {
    let data = gen_add(2)?; // 4 inputs, 2 targets, all 16 patterns
    let curriculum = Curriculum::identity(data.n_targets());
    let mut config = LahcConfig::new(LossKind::Lgh, curriculum);
    config.history_length = 250;

    let n_g = 21 * data.n_targets();
    let result = lahc_train(&data, &config, n_g, 2024)?;
    println!(
        "trained {} gates in {} iterations ({} restarts), training loss {}",
        n_g, result.iterations_used, result.restarts_used, result.final_training_loss
    );
    assert!(result.reached_zero, "the full 2-bit adder is learnable in the default budget");

    // Verify every pattern against the truth table.
    let outputs = evaluate(&result.network, data.inputs())?;
    assert_eq!(&outputs, data.targets());
    println!("all {} patterns correct", data.n_examples());

    // The structure round-trips through its text form.
    let text = result.network.to_text();
    println!("\nnetwork ({} gates):\n{}", result.network.n_gates(), text);
    Ok(())
}
