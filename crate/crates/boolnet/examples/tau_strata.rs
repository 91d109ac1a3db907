//! Sample target orders uniformly within Kendall-τ strata.
//!
//! Permutations are heavily skewed toward τ = 0, so uniform sampling over
//! permutations would almost never see the extremes. Sampling by inversion
//! count instead gives every stratum on demand.
//!
//! Run with: cargo run --example tau_strata

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use boolnet::stats::{
    kendall_tau, mahonian_table, pair_count, sample_permutation_with_inversions,
    tau_for_inversions,
};
use boolnet::Result;

fn main() -> Result<()> {
    let m = 6;
    let table = mahonian_table(m)?;
    let identity: Vec<usize> = (0..m).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);

    println!("m = {m}: {} strata (q = 0..{})", pair_count(m) + 1, pair_count(m));
    println!("{:>3} {:>7} {:>10}  example permutation", "q", "tau", "stratum size");
    for q in 0..=pair_count(m) {
        let perm = sample_permutation_with_inversions(m, q, &mut rng)?;
        let tau = kendall_tau(&identity, &perm)?;
        assert_eq!(tau.value(), tau_for_inversions(m, q));
        println!(
            "{:>3} {:>7.3} {:>10}  {:?}",
            q,
            tau.value(),
            table[m][q as usize],
            perm
        );
    }
    let total: u128 = table[m].iter().sum();
    println!("\nstratum sizes sum to m! = {total}");
    Ok(())
}
