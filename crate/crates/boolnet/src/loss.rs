//! Error-matrix construction and the four guiding functions.
//!
//! All four losses consume an [`ErrorSummary`] whose columns are already
//! permuted into difficulty order (easiest target first), so one summary per
//! candidate network serves every loss. Per-target error ratios are stored as
//! exact integer counts over `n`, which keeps the strict-zero tests in the
//! hierarchical recurrences free of floating-point thresholds.
//!
//! The plain mean `L1` treats all cells equally. `Lw` weights easier targets
//! more highly, `Llh` enforces the target order per example, and `Lgh`
//! enforces it across all examples at once, a soft form of learning the
//! targets rigidly in sequence. All four are zero exactly when the error
//! matrix is all-zero, so they share their set of global optima.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitdata::BitMatrix;
use crate::error::{Error, Result};

/// A difficulty ordering of targets: `order[0]` is the easiest target's
/// index, `order[m-1]` the hardest's.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Curriculum {
    order: Vec<usize>,
}

impl Curriculum {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let m = order.len();
        let mut seen = vec![false; m];
        for &t in &order {
            if t >= m || seen[t] {
                return Err(Error::InvalidArgument(format!(
                    "curriculum {order:?} is not a permutation of 0..{m}"
                )));
            }
            seen[t] = true;
        }
        Ok(Curriculum { order })
    }

    pub fn identity(m: usize) -> Self {
        Curriculum {
            order: (0..m).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.order
    }

    /// Target index at difficulty position `pos`.
    pub fn target_at(&self, pos: usize) -> usize {
        self.order[pos]
    }

    /// Composition: entry `k` of the result is `self[positions[k]]`.
    /// Used to turn a permutation-of-positions into a concrete curriculum.
    pub fn compose(&self, positions: &[usize]) -> Result<Curriculum> {
        if positions.len() != self.len() {
            return Err(Error::InvalidArgument(
                "composition length mismatch".into(),
            ));
        }
        Curriculum::new(positions.iter().map(|&p| self.order[p]).collect())
    }
}

/// Error matrix plus exact per-target error counts, in difficulty order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ErrorSummary {
    error_matrix: BitMatrix,
    per_target_count: Vec<u64>,
    n_examples: usize,
    n_targets: usize,
}

impl ErrorSummary {
    /// Column `k` (difficulty position `k`) of the stored error matrix.
    pub fn error_matrix(&self) -> &BitMatrix {
        &self.error_matrix
    }

    pub fn n_examples(&self) -> usize {
        self.n_examples
    }

    pub fn n_targets(&self) -> usize {
        self.n_targets
    }

    /// Exact error counts per difficulty position.
    pub fn per_target_counts(&self) -> &[u64] {
        &self.per_target_count
    }

    /// Mean per-target error for difficulty position `k`.
    pub fn delta(&self, k: usize) -> f64 {
        self.per_target_count[k] as f64 / self.n_examples as f64
    }

    pub fn total_errors(&self) -> u64 {
        self.per_target_count.iter().sum()
    }
}

/// Element-wise |Y - Y'| with the target columns permuted by `curriculum`
/// before storage, so downstream losses index targets in difficulty order.
pub fn error_summary(
    targets: &BitMatrix,
    predictions: &BitMatrix,
    curriculum: &Curriculum,
) -> Result<ErrorSummary> {
    if targets.rows() != predictions.rows() || targets.cols() != predictions.cols() {
        return Err(Error::ShapeMismatch(format!(
            "targets are {}x{}, predictions {}x{}",
            targets.rows(),
            targets.cols(),
            predictions.rows(),
            predictions.cols()
        )));
    }
    if curriculum.len() != targets.cols() {
        return Err(Error::ShapeMismatch(format!(
            "curriculum has {} entries for {} targets",
            curriculum.len(),
            targets.cols()
        )));
    }
    let n = targets.rows();
    let m = targets.cols();
    let mut per_target_count = vec![0u64; m];
    let error_matrix = BitMatrix::from_fn(n, m, |i, k| {
        let j = curriculum.target_at(k);
        let e = targets.get(i, j) != predictions.get(i, j);
        if e {
            per_target_count[k] += 1;
        }
        e
    });
    Ok(ErrorSummary {
        error_matrix,
        per_target_count,
        n_examples: n,
        n_targets: m,
    })
}

fn check_nonempty(es: &ErrorSummary) -> Result<()> {
    if es.n_examples == 0 {
        return Err(Error::InvalidArgument(
            "loss undefined on an empty example set".into(),
        ));
    }
    if es.n_targets == 0 {
        return Err(Error::InvalidArgument(
            "loss undefined with zero targets".into(),
        ));
    }
    Ok(())
}

/// Plain mean of the error matrix; invariant under any target permutation.
pub fn loss_l1(es: &ErrorSummary) -> Result<f64> {
    check_nonempty(es)?;
    Ok(es.total_errors() as f64 / (es.n_targets * es.n_examples) as f64)
}

/// Linearly weighted mean with weight `m - j + 1` on the `j`-th easiest
/// target (1-indexed), normalised by the full weight sum `n * m(m+1)/2` so
/// the all-one matrix maps to exactly 1.
pub fn loss_lw(es: &ErrorSummary) -> Result<f64> {
    check_nonempty(es)?;
    let m = es.n_targets as u64;
    let weighted: u64 = es
        .per_target_count
        .iter()
        .enumerate()
        .map(|(pos, &c)| (m - pos as u64) * c)
        .sum();
    let weight_sum = m * (m + 1) / 2;
    Ok(weighted as f64 / (weight_sum * es.n_examples as u64) as f64)
}

/// Locally hierarchical mean: within each example, an error on one target
/// forfeits credit for every later target of that example.
pub fn loss_llh(es: &ErrorSummary) -> Result<f64> {
    check_nonempty(es)?;
    let (n, m) = (es.n_examples, es.n_targets);
    let mut total = 0u64;
    for i in 0..n {
        let mut saturated = false;
        for k in 0..m {
            let a = saturated || es.error_matrix.get(i, k);
            total += a as u64;
            saturated = a;
        }
    }
    Ok(total as f64 / (m * n) as f64)
}

/// Globally hierarchical mean: any error on one target forfeits credit for
/// every later target across all examples. The strict-zero test runs on the
/// exact integer error count, not a float threshold.
pub fn loss_lgh(es: &ErrorSummary) -> Result<f64> {
    check_nonempty(es)?;
    let n = es.n_examples as u64;
    let m = es.n_targets as u64;
    let mut saturated = false;
    // Accumulates sum_k b_k scaled by n, keeping the arithmetic exact.
    let mut scaled_sum = 0u64;
    for &count in &es.per_target_count {
        if saturated {
            scaled_sum += n;
        } else {
            scaled_sum += count;
            saturated = count > 0;
        }
    }
    Ok(scaled_sum as f64 / (m * n) as f64)
}

/// Selector for the guiding function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    L1,
    Lw,
    Llh,
    Lgh,
}

impl LossKind {
    pub const ALL: [LossKind; 4] = [LossKind::L1, LossKind::Lw, LossKind::Llh, LossKind::Lgh];

    pub fn compute(self, es: &ErrorSummary) -> Result<f64> {
        match self {
            LossKind::L1 => loss_l1(es),
            LossKind::Lw => loss_lw(es),
            LossKind::Llh => loss_llh(es),
            LossKind::Lgh => loss_lgh(es),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::L1 => "l1",
            LossKind::Lw => "lw",
            LossKind::Llh => "llh",
            LossKind::Lgh => "lgh",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "l1" => Ok(LossKind::L1),
            "lw" => Ok(LossKind::Lw),
            "llh" => Ok(LossKind::Llh),
            "lgh" => Ok(LossKind::Lgh),
            other => Err(Error::InvalidArgument(format!(
                "unknown loss {other:?}, expected one of l1|lw|llh|lgh"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn matrix(rows: &[&str]) -> BitMatrix {
        let rows: Vec<Vec<bool>> = rows
            .iter()
            .map(|r| r.chars().map(|c| c == '1').collect())
            .collect();
        BitMatrix::from_rows(&rows).unwrap()
    }

    fn summary_of(e_rows: &[&str]) -> ErrorSummary {
        // Build a summary whose stored error matrix equals `e_rows` by
        // predicting all-zero against the given matrix as targets.
        let e = matrix(e_rows);
        let zero = BitMatrix::zeros(e.rows(), e.cols());
        error_summary(&e, &zero, &Curriculum::identity(e.cols())).unwrap()
    }

    #[test]
    fn curriculum_validation() {
        assert!(Curriculum::new(vec![2, 0, 1]).is_ok());
        assert!(Curriculum::new(vec![0, 0, 1]).is_err());
        assert!(Curriculum::new(vec![0, 3]).is_err());
        assert_eq!(Curriculum::identity(3).as_slice(), &[0, 1, 2]);
    }

    #[test]
    fn error_summary_is_elementwise_xor() {
        let y = matrix(&["01", "10"]);
        let yp = matrix(&["00", "11"]);
        let es = error_summary(&y, &yp, &Curriculum::identity(2)).unwrap();
        assert_eq!(es.error_matrix(), &matrix(&["01", "01"]));
        assert_eq!(es.per_target_counts(), &[0, 2]);
        assert_eq!(es.delta(0), 0.0);
        assert_eq!(es.delta(1), 1.0);
    }

    #[test]
    fn error_summary_permutes_columns() {
        let y = matrix(&["01"]);
        let yp = matrix(&["00"]);
        let cur = Curriculum::new(vec![1, 0]).unwrap();
        let es = error_summary(&y, &yp, &cur).unwrap();
        // Target 1 (the errored one) now sits at difficulty position 0.
        assert_eq!(es.per_target_counts(), &[1, 0]);
    }

    #[test]
    fn perfect_and_worst_cases() {
        let y = matrix(&["01", "10"]);
        let es = error_summary(&y, &y, &Curriculum::identity(2)).unwrap();
        assert_eq!(es.total_errors(), 0);
        for loss in LossKind::ALL {
            assert_eq!(loss.compute(&es).unwrap(), 0.0);
        }
        let comp = matrix(&["10", "01"]);
        let es = error_summary(&y, &comp, &Curriculum::identity(2)).unwrap();
        assert_eq!(es.per_target_counts(), &[2, 2]);
        for loss in LossKind::ALL {
            assert_eq!(loss.compute(&es).unwrap(), 1.0);
        }
    }

    #[test]
    fn l1_values() {
        assert_eq!(loss_l1(&summary_of(&["01", "10"])).unwrap(), 0.5);
        assert!((loss_l1(&summary_of(&["110"])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lw_values() {
        // m = 2: weights (2, 1), weight sum 3.
        assert_eq!(loss_lw(&summary_of(&["11"])).unwrap(), 1.0);
        assert!((loss_lw(&summary_of(&["10"])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!((loss_lw(&summary_of(&["01"])).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn llh_values() {
        // Row 010 -> a = (0,1,1).
        assert!((loss_llh(&summary_of(&["010"])).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        // A first-target error saturates the whole example.
        assert_eq!(loss_llh(&summary_of(&["100"])).unwrap(), 1.0);
        assert_eq!(loss_llh(&summary_of(&["000"])).unwrap(), 0.0);
    }

    #[test]
    fn lgh_values() {
        // delta = (0, 0.5) -> b = (0, 0.5) -> 0.25.
        assert_eq!(loss_lgh(&summary_of(&["01", "00"])).unwrap(), 0.25);
        // delta = (0.5, 0) -> b = (0.5, 1) -> 0.75.
        assert_eq!(loss_lgh(&summary_of(&["10", "00"])).unwrap(), 0.75);
        assert_eq!(loss_lgh(&summary_of(&["00", "00"])).unwrap(), 0.0);
    }

    #[test]
    fn empty_example_set_is_an_error() {
        let es = error_summary(
            &BitMatrix::zeros(0, 2),
            &BitMatrix::zeros(0, 2),
            &Curriculum::identity(2),
        )
        .unwrap();
        for loss in LossKind::ALL {
            assert!(loss.compute(&es).is_err());
        }
    }

    #[test]
    fn loss_kind_round_trips_through_str() {
        for loss in LossKind::ALL {
            assert_eq!(loss.to_string().parse::<LossKind>().unwrap(), loss);
        }
        assert!("l2".parse::<LossKind>().is_err());
    }

    fn arb_error_matrix() -> impl Strategy<Value = Vec<Vec<bool>>> {
        (1usize..=10, 1usize..=6).prop_flat_map(|(n, m)| {
            proptest::collection::vec(proptest::collection::vec(any::<bool>(), m), n)
        })
    }

    proptest! {
        #[test]
        fn dominance_chain_and_range(rows in arb_error_matrix()) {
            let e = BitMatrix::from_rows(&rows).unwrap();
            let zero = BitMatrix::zeros(e.rows(), e.cols());
            let es = error_summary(&e, &zero, &Curriculum::identity(e.cols())).unwrap();
            let l1 = loss_l1(&es).unwrap();
            let lw = loss_lw(&es).unwrap();
            let llh = loss_llh(&es).unwrap();
            let lgh = loss_lgh(&es).unwrap();
            prop_assert!(lgh >= llh - 1e-12);
            prop_assert!(llh >= l1 - 1e-12);
            for v in [l1, lw, llh, lgh] {
                prop_assert!((0.0..=1.0).contains(&v));
                // Zero equivalence: exactly zero iff the matrix is all-zero.
                prop_assert_eq!(v == 0.0, es.total_errors() == 0);
            }
        }

        #[test]
        fn l1_is_permutation_invariant(rows in arb_error_matrix(), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let e = BitMatrix::from_rows(&rows).unwrap();
            let zero = BitMatrix::zeros(e.rows(), e.cols());
            let mut order: Vec<usize> = (0..e.cols()).collect();
            order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let id = error_summary(&e, &zero, &Curriculum::identity(e.cols())).unwrap();
            let perm = error_summary(&e, &zero, &Curriculum::new(order).unwrap()).unwrap();
            prop_assert_eq!(loss_l1(&id).unwrap(), loss_l1(&perm).unwrap());
        }

        #[test]
        fn clearing_an_error_never_increases_any_loss(
            rows in arb_error_matrix(),
            pick in any::<u64>(),
        ) {
            let e = BitMatrix::from_rows(&rows).unwrap();
            let set_cells: Vec<(usize, usize)> = (0..e.rows())
                .flat_map(|r| (0..e.cols()).map(move |c| (r, c)))
                .filter(|&(r, c)| e.get(r, c))
                .collect();
            prop_assume!(!set_cells.is_empty());
            let (r, c) = set_cells[(pick % set_cells.len() as u64) as usize];
            let mut cleared = e.clone();
            cleared.set(r, c, false);
            let zero = BitMatrix::zeros(e.rows(), e.cols());
            let cur = Curriculum::identity(e.cols());
            let before = error_summary(&e, &zero, &cur).unwrap();
            let after = error_summary(&cleared, &zero, &cur).unwrap();
            for loss in LossKind::ALL {
                prop_assert!(loss.compute(&after).unwrap() <= loss.compute(&before).unwrap() + 1e-12);
            }
        }
    }
}
