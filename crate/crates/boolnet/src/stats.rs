//! Rank correlation, τ-stratified permutation sampling and summary
//! statistics.

use rand::Rng;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Kendall's τ as exact integers: `P - Q` over `P + Q` concordant/discordant
/// pair counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TauValue {
    /// P - Q.
    pub numerator: i64,
    /// P + Q = m(m-1)/2 for tie-free m-element permutations.
    pub denominator: u64,
}

impl TauValue {
    pub fn value(self) -> f64 {
        self.numerator as f64 / self.denominator as f64
    }
}

fn validate_permutation(p: &[usize]) -> Result<()> {
    let m = p.len();
    let mut seen = vec![false; m];
    for &x in p {
        if x >= m || seen[x] {
            return Err(Error::InvalidArgument(format!(
                "{p:?} is not a permutation of 0..{m}"
            )));
        }
        seen[x] = true;
    }
    Ok(())
}

/// Rank correlation between two orderings of the same `m >= 2` elements.
///
/// A pair of elements is concordant when both orderings place them in the
/// same relative order. τ = (P - Q)/(P + Q) over all element pairs.
pub fn kendall_tau(a: &[usize], b: &[usize]) -> Result<TauValue> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "orderings have different lengths {} and {}",
            a.len(),
            b.len()
        )));
    }
    let m = a.len();
    if m < 2 {
        return Err(Error::InvalidArgument(
            "kendall_tau needs at least two elements".into(),
        ));
    }
    validate_permutation(a)?;
    validate_permutation(b)?;
    let mut pos_a = vec![0usize; m];
    let mut pos_b = vec![0usize; m];
    for i in 0..m {
        pos_a[a[i]] = i;
        pos_b[b[i]] = i;
    }
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    for x in 0..m {
        for y in (x + 1)..m {
            let same = (pos_a[x] < pos_a[y]) == (pos_b[x] < pos_b[y]);
            if same {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    Ok(TauValue {
        numerator: concordant - discordant,
        denominator: (concordant + discordant) as u64,
    })
}

/// τ of a permutation with `q` inversions against the identity:
/// (C - 2q) / C with C = m(m-1)/2.
pub fn tau_for_inversions(m: usize, q: u64) -> f64 {
    let c = pair_count(m);
    (c as i64 - 2 * q as i64) as f64 / c as f64
}

pub fn pair_count(m: usize) -> u64 {
    (m as u64) * (m as u64 - 1) / 2
}

/// Map a τ value to its inversion count, erroring (with the achievable
/// values) when no stratum matches.
pub fn inversions_for_tau(m: usize, tau: f64) -> Result<u64> {
    if m < 2 {
        return Err(Error::InvalidArgument(
            "τ strata need at least two elements".into(),
        ));
    }
    let c = pair_count(m);
    let q = (c as f64 * (1.0 - tau) / 2.0).round();
    if !(0.0..=c as f64).contains(&q) || (tau_for_inversions(m, q as u64) - tau).abs() > 1e-9 {
        let achievable: Vec<String> = (0..=c)
            .map(|q| format!("{:.4}", tau_for_inversions(m, q)))
            .collect();
        return Err(Error::InvalidArgument(format!(
            "τ = {tau} is not achievable for m = {m}; achievable values: {}",
            achievable.join(", ")
        )));
    }
    Ok(q as u64)
}

/// Number of permutations of `0..m` by inversion count (the Mahonian
/// distribution). Row `j` covers permutations of `j` elements. Exact u128
/// counts bound `m` at 33.
pub fn mahonian_table(m: usize) -> Result<Vec<Vec<u128>>> {
    if m > 33 {
        return Err(Error::InvalidArgument(
            "inversion-count table exceeds u128 above m = 33".into(),
        ));
    }
    let mut table: Vec<Vec<u128>> = Vec::with_capacity(m + 1);
    table.push(vec![1]); // zero elements: the empty permutation
    for j in 1..=m {
        let prev = &table[j - 1];
        let max_inv = j * (j - 1) / 2;
        let mut row = vec![0u128; max_inv + 1];
        // Element j-1 inserted into a (j-1)-permutation contributes 0..j-1
        // inversions.
        for (q, slot) in row.iter_mut().enumerate() {
            let mut sum = 0u128;
            for c in 0..j.min(q + 1) {
                if let Some(&v) = prev.get(q - c) {
                    sum += v;
                }
            }
            *slot = sum;
        }
        table.push(row);
    }
    Ok(table)
}

/// A uniformly random permutation of `0..m` with exactly `q` inversions
/// relative to the identity, via the insertion construction over exact
/// Mahonian suffix counts — no rejection, exact uniformity within the
/// stratum.
pub fn sample_permutation_with_inversions(
    m: usize,
    q: u64,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    if m < 2 {
        return Err(Error::InvalidArgument(
            "permutation sampling needs at least two elements".into(),
        ));
    }
    if q > pair_count(m) {
        return Err(Error::InvalidArgument(format!(
            "{q} inversions exceed the maximum {} for m = {m}",
            pair_count(m)
        )));
    }
    let table = mahonian_table(m)?;
    // Decide, from the largest element down, how many inversions each
    // element contributes: element k placed with c smaller elements to its
    // right adds exactly c, and table[k][remaining - c] counts the ways the
    // rest can absorb what is left. Walking downward keeps `remaining`
    // within table[k + 1]'s index range.
    let mut remaining = q as usize;
    let mut contributions = vec![0usize; m];
    for k in (1..m).rev() {
        let total = table[k + 1][remaining];
        let mut draw = rng.gen_range(0..total);
        let mut c = 0usize;
        loop {
            let weight = if c > remaining {
                0
            } else {
                table[k].get(remaining - c).copied().unwrap_or(0)
            };
            if draw < weight {
                break;
            }
            draw -= weight;
            c += 1;
            debug_assert!(c <= k);
        }
        contributions[k] = c;
        remaining -= c;
    }
    debug_assert_eq!(remaining, 0);
    let mut perm: Vec<usize> = vec![0];
    for (k, &c) in contributions.iter().enumerate().skip(1) {
        perm.insert(k - c, k);
    }
    Ok(perm)
}

/// A uniformly random permutation from the stratum of the given `target_tau`
/// (relative to the identity ordering).
pub fn sample_permutation_with_tau(
    m: usize,
    target_tau: f64,
    rng: &mut impl Rng,
) -> Result<Vec<usize>> {
    let q = inversions_for_tau(m, target_tau)?;
    sample_permutation_with_inversions(m, q, rng)
}

/// Sample mean and t-distribution confidence half-width at `level`
/// (e.g. 0.95). Needs at least two values.
pub fn mean_ci(values: &[f64], level: f64) -> Result<(f64, f64)> {
    let n = values.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "a confidence interval needs at least two values".into(),
        ));
    }
    if !(0.0..1.0).contains(&level) {
        return Err(Error::InvalidArgument(format!(
            "confidence level {level} outside (0, 1)"
        )));
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    let t = StudentsT::new(0.0, 1.0, (n - 1) as f64)
        .expect("valid dof")
        .inverse_cdf(1.0 - (1.0 - level) / 2.0);
    Ok((mean, t * (var / n as f64).sqrt()))
}

/// One-sided paired t-test for mean(differences) > 0. Returns (t statistic,
/// p-value). A zero-variance sample degenerates to p = 0 or 1 by sign.
pub fn paired_t_greater(differences: &[f64]) -> Result<(f64, f64)> {
    let n = differences.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "a paired t-test needs at least two differences".into(),
        ));
    }
    let mean = differences.iter().sum::<f64>() / n as f64;
    let var =
        differences.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    if var == 0.0 {
        let p = if mean > 0.0 { 0.0 } else { 1.0 };
        return Ok((if mean > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY }, p));
    }
    let t = mean / (var / n as f64).sqrt();
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("valid dof");
    Ok((t, 1.0 - dist.cdf(t)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashMap;

    #[test]
    fn tau_of_identical_and_reversed_orderings() {
        let p = vec![3, 0, 2, 1];
        let rev: Vec<usize> = p.iter().rev().copied().collect();
        assert_eq!(kendall_tau(&p, &p).unwrap().value(), 1.0);
        assert_eq!(kendall_tau(&p, &rev).unwrap().value(), -1.0);
    }

    #[test]
    fn tau_single_swap() {
        let tau = kendall_tau(&[0, 1, 2, 3], &[0, 1, 3, 2]).unwrap();
        assert_eq!(tau.numerator, 4);
        assert_eq!(tau.denominator, 6);
        assert!((tau.value() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn tau_is_symmetric_and_relabel_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let m = 6;
            let mut a: Vec<usize> = (0..m).collect();
            let mut b: Vec<usize> = (0..m).collect();
            let mut relabel: Vec<usize> = (0..m).collect();
            use rand::seq::SliceRandom;
            a.shuffle(&mut rng);
            b.shuffle(&mut rng);
            relabel.shuffle(&mut rng);
            let t1 = kendall_tau(&a, &b).unwrap();
            let t2 = kendall_tau(&b, &a).unwrap();
            assert_eq!(t1, t2);
            let ra: Vec<usize> = a.iter().map(|&x| relabel[x]).collect();
            let rb: Vec<usize> = b.iter().map(|&x| relabel[x]).collect();
            assert_eq!(kendall_tau(&ra, &rb).unwrap(), t1);
        }
    }

    #[test]
    fn tau_rejects_bad_input() {
        assert!(kendall_tau(&[0, 1], &[0, 1, 2]).is_err());
        assert!(kendall_tau(&[0, 0], &[0, 1]).is_err());
        assert!(kendall_tau(&[0], &[0]).is_err());
    }

    #[test]
    fn mahonian_rows_sum_to_factorials() {
        let table = mahonian_table(8).unwrap();
        let mut factorial = 1u128;
        for (j, row) in table.iter().enumerate().skip(1) {
            factorial *= j as u128;
            assert_eq!(row.iter().sum::<u128>(), factorial, "m = {j}");
        }
    }

    #[test]
    fn extreme_strata_are_unique() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = sample_permutation_with_tau(5, 1.0, &mut rng).unwrap();
        assert_eq!(p, vec![0, 1, 2, 3, 4]);
        let p = sample_permutation_with_tau(5, -1.0, &mut rng).unwrap();
        assert_eq!(p, vec![4, 3, 2, 1, 0]);
    }

    #[test]
    fn sampled_permutations_hit_their_stratum() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let identity: Vec<usize> = (0..5).collect();
        for q in 0..=pair_count(5) {
            let tau = tau_for_inversions(5, q);
            for _ in 0..20 {
                let p = sample_permutation_with_tau(5, tau, &mut rng).unwrap();
                let got = kendall_tau(&identity, &p).unwrap();
                assert!((got.value() - tau).abs() < 1e-12, "q={q} perm={p:?}");
            }
        }
        // τ = 0.6 on m = 5 is the 2-inversion stratum.
        assert_eq!(inversions_for_tau(5, 0.6).unwrap(), 2);
        let p = sample_permutation_with_tau(5, 0.6, &mut rng).unwrap();
        let inv = (0..5)
            .flat_map(|i| (i + 1..5).map(move |j| (i, j)))
            .filter(|&(i, j)| p[i] > p[j])
            .count();
        assert_eq!(inv, 2);
    }

    #[test]
    fn unachievable_tau_is_rejected_with_alternatives() {
        let err = sample_permutation_with_tau(4, 0.5, &mut ChaCha8Rng::seed_from_u64(0));
        let msg = format!("{}", err.unwrap_err());
        assert!(msg.contains("achievable"));
    }

    #[test]
    fn stratum_sampling_is_uniform() {
        // All 5 permutations of m=4 with q=2 inversions, 10k draws,
        // chi-square test at the 0.01 level (4 dof, critical 13.28).
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut counts: HashMap<Vec<usize>, u64> = HashMap::new();
        let draws = 10_000;
        for _ in 0..draws {
            let p = sample_permutation_with_inversions(4, 2, &mut rng).unwrap();
            *counts.entry(p).or_default() += 1;
        }
        assert_eq!(counts.len() as u128, mahonian_table(4).unwrap()[4][2]);
        let expected = draws as f64 / counts.len() as f64;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 13.28, "chi-square {chi2} too large for uniformity");
    }

    #[test]
    fn mean_ci_basics() {
        let (mean, half) = mean_ci(&[0.25, 0.25, 0.25], 0.95).unwrap();
        assert_eq!(mean, 0.25);
        assert_eq!(half, 0.0);
        let (mean, half) = mean_ci(&[0.0, 1.0], 0.95).unwrap();
        assert_eq!(mean, 0.5);
        assert!(half > 0.0);
        assert!(mean_ci(&[1.0], 0.95).is_err());
    }

    #[test]
    fn mean_ci_coverage_on_bernoulli() {
        // 400 trials of n=60 Bernoulli(0.5) samples: the 95% CI should cover
        // 0.5 in roughly 95% of trials; demand at least 88%.
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut covered = 0;
        let trials = 400;
        for _ in 0..trials {
            let xs: Vec<f64> = (0..60)
                .map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 })
                .collect();
            let (mean, half) = mean_ci(&xs, 0.95).unwrap();
            if (mean - 0.5).abs() <= half {
                covered += 1;
            }
        }
        assert!(covered as f64 / trials as f64 > 0.88, "covered {covered}/{trials}");
    }

    #[test]
    fn paired_t_detects_a_clear_shift() {
        let shifted: Vec<f64> = (0..30).map(|i| 0.1 + 0.01 * (i % 3) as f64).collect();
        let (_, p) = paired_t_greater(&shifted).unwrap();
        assert!(p < 1e-6);
        let balanced: Vec<f64> = (0..30).map(|i| if i % 2 == 0 { 0.1 } else { -0.1 }).collect();
        let (_, p) = paired_t_greater(&balanced).unwrap();
        assert!(p > 0.4);
    }
}
