//! Turn a synchronous state time series into a state-transition dataset and
//! learn an update network from it.
//!
//! Mirrors the regulatory-network workflow: consecutive duplicate states are
//! collapsed, constant targets are removed and reported, and the remaining
//! transitions train one network predicting the next state.
//!
//! Run with: cargo run --example timeseries_pairs

use boolnet::loss::{Curriculum, LossKind};
use boolnet::optimizer::{lahc_train, LahcConfig};
use boolnet::problems::{parse_timeseries, timeseries_to_pairs};
use boolnet::Result;

fn main() -> Result<()> {
    // Five nodes; node 4 never changes, and one state repeats in place.
    let series = "\
10010
01010
01010
00110
10110
11010
01010
";
    let states = parse_timeseries(series)?;
    let pairs = timeseries_to_pairs(&states)?;
    println!(
        "{} states -> {} transitions; removed constant targets {:?}",
        states.len(),
        pairs.dataset.n_examples(),
        pairs.removed_targets
    );

    let ds = &pairs.dataset;
    let config = LahcConfig::new(LossKind::Lgh, Curriculum::identity(ds.n_targets()));
    let result = lahc_train(ds, &config, 21 * ds.n_targets(), 3)?;
    println!(
        "update network: training loss {} after {} iterations (zero: {})",
        result.final_training_loss, result.iterations_used, result.reached_zero
    );
    Ok(())
}
