//! Late-Acceptance Hill Climbing over feedforward structures.
//!
//! One training run is a sequence of up to `R + 1` restart passes. Each pass
//! starts from a fresh uniform-random network, fills a cost history of
//! length `L` with the initial cost, then repeatedly proposes
//! single-connection moves. A candidate is accepted iff its cost beats the
//! history entry from `L` iterations ago or is no worse than the current
//! cost; the current cost is written into the history slot after every
//! accept decision, accepted or not. A pass stops on zero cost or after `I`
//! iterations; the run stops on zero cost or after the last restart.
//!
//! Candidate evaluation is one full bit-parallel network evaluation against
//! a packed, curriculum-permuted copy of the training targets; buffers are
//! reused across the whole run so the inner loop allocates nothing.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitdata::Dataset;
use crate::error::{Error, Result};
use crate::loss::{error_summary, Curriculum, LossKind};
use crate::network::{
    check_feedforward, evaluate, propose_move, random_network, NetworkStructure, PackedEvaluator,
};

pub const DEFAULT_HISTORY_LENGTH: usize = 250;
pub const DEFAULT_ITERATION_LIMIT: u64 = 200_000;
pub const DEFAULT_RESTART_LIMIT: u64 = 9;

/// LAHC meta-parameters plus the guiding loss and target order.
#[derive(Clone, Debug)]
pub struct LahcConfig {
    /// Cost-history length `L`.
    pub history_length: usize,
    /// Iteration limit `I` per restart pass.
    pub iteration_limit: u64,
    /// Restart limit `R`; a run makes at most `R + 1` passes.
    pub restart_limit: u64,
    pub loss: LossKind,
    pub curriculum: Curriculum,
    /// Return the best network seen across restarts instead of the last
    /// pass's final network.
    pub return_best: bool,
}

impl LahcConfig {
    pub fn new(loss: LossKind, curriculum: Curriculum) -> Self {
        LahcConfig {
            history_length: DEFAULT_HISTORY_LENGTH,
            iteration_limit: DEFAULT_ITERATION_LIMIT,
            restart_limit: DEFAULT_RESTART_LIMIT,
            loss,
            curriculum,
            return_best: false,
        }
    }
}

/// Outcome of one training run.
#[derive(Clone, Debug)]
pub struct TrainResult {
    pub network: NetworkStructure,
    /// Training loss of `network`.
    pub final_training_loss: f64,
    /// Lowest training loss seen across all restart passes.
    pub best_training_loss: f64,
    /// Total move evaluations across all passes.
    pub iterations_used: u64,
    /// Restarts performed beyond the first pass.
    pub restarts_used: u64,
    pub reached_zero: bool,
}

/// The LAHC acceptance rule: accept iff the candidate cost beats the history
/// entry or is no worse than the current cost.
#[inline]
pub fn lahc_accept(candidate: f64, history_entry: f64, current: f64) -> bool {
    candidate < history_entry || candidate <= current
}

/// Selected loss of the curriculum-permuted error summary of the network's
/// predictions against the training targets. Reference composition; the
/// training loop computes the same value through reused packed buffers.
pub fn guiding_cost(
    net: &NetworkStructure,
    train: &Dataset,
    loss: LossKind,
    curriculum: &Curriculum,
) -> Result<f64> {
    let predictions = evaluate(net, train.inputs())?;
    let es = error_summary(train.targets(), &predictions, curriculum)?;
    loss.compute(&es)
}

/// Packed cost evaluation reused across every iteration of a run.
struct CostEvaluator {
    eval: PackedEvaluator,
    /// Difficulty position -> target index.
    order: Vec<usize>,
    /// Target columns packed over examples, one slot per difficulty
    /// position.
    target_cols: Vec<u64>,
    /// Scratch for the running column OR used by Llh.
    acc: Vec<u64>,
    counts: Vec<u64>,
    n_examples: usize,
    words: usize,
    tail: u64,
}

impl CostEvaluator {
    fn new(train: &Dataset, curriculum: &Curriculum, n_gates: usize) -> Result<Self> {
        let n = train.n_examples();
        let m = train.n_targets();
        if n == 0 {
            return Err(Error::InvalidArgument("training set is empty".into()));
        }
        if m == 0 {
            return Err(Error::InvalidArgument("training set has no targets".into()));
        }
        if curriculum.len() != m {
            return Err(Error::ShapeMismatch(format!(
                "curriculum has {} entries for {} targets",
                curriculum.len(),
                m
            )));
        }
        let transposed_inputs = train.inputs().transposed();
        let transposed_targets = train.targets().transposed();
        let eval = PackedEvaluator::new(&transposed_inputs, n_gates);
        let words = eval.words();
        let mut target_cols = vec![0u64; m * words];
        for pos in 0..m {
            let j = curriculum.target_at(pos);
            target_cols[pos * words..(pos + 1) * words]
                .copy_from_slice(transposed_targets.row_words(j));
        }
        let tail = eval.tail_mask();
        Ok(CostEvaluator {
            eval,
            order: curriculum.as_slice().to_vec(),
            target_cols,
            acc: vec![0u64; words],
            counts: vec![0u64; m],
            n_examples: n,
            words,
            tail,
        })
    }

    /// Evaluate `net` and return the selected loss.
    fn cost(&mut self, net: &NetworkStructure, loss: LossKind) -> f64 {
        self.eval.run(net);
        let m = self.order.len();
        let n = self.n_examples as u64;
        let w = self.words;
        let mut llh_scaled = 0u64;
        if loss == LossKind::Llh {
            self.acc.fill(0);
        }
        for pos in 0..m {
            let out = self.eval.output_words(net, self.order[pos]);
            let tgt = &self.target_cols[pos * w..(pos + 1) * w];
            let mut count = 0u64;
            for k in 0..w {
                let mut err = out[k] ^ tgt[k];
                if k == w - 1 {
                    err &= self.tail;
                }
                count += err.count_ones() as u64;
                if loss == LossKind::Llh {
                    self.acc[k] |= err;
                }
            }
            self.counts[pos] = count;
            if loss == LossKind::Llh {
                llh_scaled += self.acc.iter().map(|a| a.count_ones() as u64).sum::<u64>();
            }
        }
        match loss {
            LossKind::L1 => {
                self.counts.iter().sum::<u64>() as f64 / (m as u64 * n) as f64
            }
            LossKind::Lw => {
                let weighted: u64 = self
                    .counts
                    .iter()
                    .enumerate()
                    .map(|(pos, &c)| (m - pos) as u64 * c)
                    .sum();
                let weight_sum = (m * (m + 1) / 2) as u64;
                weighted as f64 / (weight_sum * n) as f64
            }
            LossKind::Llh => llh_scaled as f64 / (m as u64 * n) as f64,
            LossKind::Lgh => {
                let mut saturated = false;
                let mut scaled = 0u64;
                for &c in &self.counts {
                    if saturated {
                        scaled += n;
                    } else {
                        scaled += c;
                        saturated = c > 0;
                    }
                }
                scaled as f64 / (m as u64 * n) as f64
            }
        }
    }
}

/// Train one network with LAHC plus random restarts.
///
/// Deterministic: one seeded stream drives every initialisation and move
/// proposal, so identical `(train, config, n_g, seed)` yield identical
/// results.
pub fn lahc_train(
    train: &Dataset,
    config: &LahcConfig,
    n_g: usize,
    seed: u64,
) -> Result<TrainResult> {
    if config.history_length == 0 {
        return Err(Error::InvalidArgument("history_length must be positive".into()));
    }
    if config.iteration_limit == 0 {
        return Err(Error::InvalidArgument("iteration_limit must be positive".into()));
    }
    let l = train.n_features();
    let m = train.n_targets();
    let mut evaluator = CostEvaluator::new(train, &config.curriculum, n_g)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let history_len = config.history_length as u64;

    let mut history = vec![0.0f64; config.history_length];
    let mut total_iterations = 0u64;
    let mut restarts_used = 0u64;
    let mut best: Option<(NetworkStructure, f64)> = None;

    let (final_net, final_cost) = loop {
        let mut net = random_network(l, m, n_g, &mut rng)?;
        let mut current = evaluator.cost(&net, config.loss);
        history.fill(current);

        let mut i = 0u64;
        while current != 0.0 && i < config.iteration_limit {
            let mv = propose_move(&net, &mut rng);
            net.apply_move(&mv);
            let candidate = evaluator.cost(&net, config.loss);
            let slot = (i % history_len) as usize;
            if lahc_accept(candidate, history[slot], current) {
                current = candidate;
            } else {
                net.revert_move(&mv);
            }
            history[slot] = current;
            i += 1;
        }
        total_iterations += i;
        debug_assert!(check_feedforward(&net));

        if best.as_ref().is_none_or(|(_, b)| current < *b) {
            best = Some((net.clone(), current));
        }
        if current == 0.0 || restarts_used == config.restart_limit {
            break (net, current);
        }
        restarts_used += 1;
    };

    let (best_net, best_cost) = best.expect("at least one pass ran");
    let (network, final_training_loss) = if config.return_best {
        (best_net, best_cost)
    } else {
        (final_net, final_cost)
    };
    Ok(TrainResult {
        reached_zero: final_training_loss == 0.0,
        network,
        final_training_loss,
        best_training_loss: best_cost,
        iterations_used: total_iterations,
        restarts_used,
    })
}
