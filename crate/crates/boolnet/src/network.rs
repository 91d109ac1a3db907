//! Feedforward NAND-network structures, structural moves and bit-parallel
//! evaluation.
//!
//! A network is a DAG over `l + n_g` nodes: nodes `0..l` are inputs, node
//! `l + g` is gate `g`, and every gate computes NAND of its two sources.
//! The feedforward constraint is purely index-based: gate `g` may only source
//! nodes `< l + g`. Outputs are read from the last `m` gates.
//!
//! Evaluation is bit-parallel across examples: each node's value over all `n`
//! examples is a packed bit vector, so one gate costs `ceil(n/64)` word NANDs.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::bitdata::{tail_mask, BitMatrix, WORD_BITS};
use crate::error::{Error, Result};

/// An ordered list of 2-input NAND gates with source node indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NetworkStructure {
    n_inputs: usize,
    n_outputs: usize,
    sources: Vec<[usize; 2]>,
}

impl NetworkStructure {
    /// Assemble a network from explicit gate sources, validating the
    /// feedforward constraint.
    pub fn new(n_inputs: usize, n_outputs: usize, sources: Vec<[usize; 2]>) -> Result<Self> {
        if n_inputs == 0 {
            return Err(Error::InvalidArgument("network needs at least one input".into()));
        }
        if n_outputs > sources.len() {
            return Err(Error::InvalidArgument(format!(
                "n_outputs {} exceeds gate count {}",
                n_outputs,
                sources.len()
            )));
        }
        let net = NetworkStructure {
            n_inputs,
            n_outputs,
            sources,
        };
        if !check_feedforward(&net) {
            return Err(Error::InvalidArgument(
                "gate sources violate the feedforward constraint".into(),
            ));
        }
        Ok(net)
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn n_outputs(&self) -> usize {
        self.n_outputs
    }

    pub fn n_gates(&self) -> usize {
        self.sources.len()
    }

    pub fn sources(&self) -> &[[usize; 2]] {
        &self.sources
    }

    /// Gate index that output `j` is read from: the last `m` gates are the
    /// output nodes, in order.
    pub fn output_gate(&self, j: usize) -> usize {
        assert!(j < self.n_outputs, "output index out of bounds");
        self.n_gates() - self.n_outputs + j
    }

    pub fn apply_move(&mut self, mv: &Move) {
        self.sources[mv.gate][mv.slot] = mv.new_source;
    }

    pub fn revert_move(&mut self, mv: &Move) {
        self.sources[mv.gate][mv.slot] = mv.old_source;
    }

    /// Text form: line 1 `l m n_g`, then one `src_a src_b` line per gate.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {} {}", self.n_inputs, self.n_outputs, self.n_gates());
        for g in &self.sources {
            let _ = writeln!(s, "{} {}", g[0], g[1]);
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            msg: "missing header line `l m n_g`".into(),
        })?;
        let dims: Vec<usize> = header
            .split(' ')
            .map(|t| t.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Parse {
                line: 1,
                msg: format!("header must be `l m n_g`, got {header:?}"),
            })?;
        let [l, m, n_g] = dims[..] else {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header must be `l m n_g`, got {header:?}"),
            });
        };
        let mut sources = Vec::with_capacity(n_g);
        for (i, line) in lines.enumerate() {
            let line_no = i + 2;
            let pair: Vec<usize> = line
                .split(' ')
                .map(|t| t.parse::<usize>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::Parse {
                    line: line_no,
                    msg: format!("expected `src_a src_b`, got {line:?}"),
                })?;
            let [a, b] = pair[..] else {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected `src_a src_b`, got {line:?}"),
                });
            };
            sources.push([a, b]);
        }
        if sources.len() != n_g {
            return Err(Error::Parse {
                line: sources.len() + 2,
                msg: format!("expected {} gate lines, got {}", n_g, sources.len()),
            });
        }
        NetworkStructure::new(l, m, sources)
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}

/// A single-connection rewiring: one (gate, slot) pair gets a new source.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Move {
    pub gate: usize,
    pub slot: usize,
    pub old_source: usize,
    pub new_source: usize,
}

/// True iff every gate `g` sources only nodes `< l + g`.
pub fn check_feedforward(net: &NetworkStructure) -> bool {
    net.sources
        .iter()
        .enumerate()
        .all(|(g, s)| s[0] < net.n_inputs + g && s[1] < net.n_inputs + g)
}

/// Uniform-random valid structure: each gate's two sources are drawn
/// independently and uniformly from all of its topologically legal
/// predecessors.
pub fn random_network(
    l: usize,
    m: usize,
    n_g: usize,
    rng: &mut impl Rng,
) -> Result<NetworkStructure> {
    if l == 0 {
        return Err(Error::InvalidArgument("network needs at least one input".into()));
    }
    if n_g < m {
        return Err(Error::InvalidArgument(format!(
            "n_g {n_g} is smaller than the output count {m}"
        )));
    }
    let sources = (0..n_g)
        .map(|g| [rng.gen_range(0..l + g), rng.gen_range(0..l + g)])
        .collect();
    NetworkStructure::new(l, m, sources)
}

/// Propose a random change to the source of one connection: a (gate, slot)
/// pair chosen uniformly and a new source chosen uniformly from the gate's
/// legal range excluding the current source, so the move always changes the
/// structure and always preserves the feedforward constraint. A gate whose
/// only legal source is the current one is resampled, never an error.
pub fn propose_move(net: &NetworkStructure, rng: &mut impl Rng) -> Move {
    assert!(
        net.n_inputs > 1 || net.n_gates() > 1,
        "no legal move exists for a 1-input, 1-gate network"
    );
    loop {
        let gate = rng.gen_range(0..net.n_gates());
        let range = net.n_inputs + gate;
        if range < 2 {
            continue;
        }
        let slot = rng.gen_range(0..2usize);
        let old_source = net.sources[gate][slot];
        let mut new_source = rng.gen_range(0..range - 1);
        if new_source >= old_source {
            new_source += 1;
        }
        return Move {
            gate,
            slot,
            old_source,
            new_source,
        };
    }
}

/// Evaluate the network on every row of `inputs` at once.
///
/// Returns an `n x m` matrix where cell (i, j) is the value of output `j`
/// when the input nodes take row `i`'s values.
pub fn evaluate(net: &NetworkStructure, inputs: &BitMatrix) -> Result<BitMatrix> {
    if inputs.cols() != net.n_inputs() {
        return Err(Error::ShapeMismatch(format!(
            "network expects {} inputs, matrix has {} columns",
            net.n_inputs(),
            inputs.cols()
        )));
    }
    let mut eval = PackedEvaluator::new(&inputs.transposed(), net.n_gates());
    eval.run(net);
    let n = inputs.rows();
    let m = net.n_outputs();
    let mut out = BitMatrix::zeros(n, m);
    for j in 0..m {
        let col = eval.node_words(net.n_inputs() + net.output_gate(j));
        for i in 0..n {
            if (col[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1 {
                out.set(i, j, true);
            }
        }
    }
    Ok(out)
}

/// Reusable bit-parallel evaluation buffer.
///
/// Holds one packed value vector per node (example index -> bit). The input
/// region is filled once from the transposed input matrix; [`Self::run`]
/// recomputes only the gate region, so repeated evaluations of candidate
/// structures on a fixed training set allocate nothing.
///
/// NAND sets padding bits beyond `n` examples to one; consumers must apply
/// [`Self::tail_mask`] before popcounting the final word.
pub struct PackedEvaluator {
    n_inputs: usize,
    n_gates: usize,
    n_examples: usize,
    words: usize,
    values: Vec<u64>,
}

impl PackedEvaluator {
    /// `transposed_inputs` is the training input matrix transposed, i.e. one
    /// row per feature, packed over example indices.
    pub fn new(transposed_inputs: &BitMatrix, n_gates: usize) -> Self {
        let n_inputs = transposed_inputs.rows();
        let n_examples = transposed_inputs.cols();
        let src_words = transposed_inputs.words_per_row();
        let words = src_words.max(1);
        let mut values = vec![0u64; (n_inputs + n_gates) * words];
        for c in 0..n_inputs {
            values[c * words..c * words + src_words]
                .copy_from_slice(transposed_inputs.row_words(c));
        }
        PackedEvaluator {
            n_inputs,
            n_gates,
            n_examples,
            words,
            values,
        }
    }

    pub fn n_examples(&self) -> usize {
        self.n_examples
    }

    pub fn words(&self) -> usize {
        self.words
    }

    pub fn tail_mask(&self) -> u64 {
        tail_mask(self.n_examples)
    }

    /// Recompute all gate value vectors for `net`.
    pub fn run(&mut self, net: &NetworkStructure) {
        assert_eq!(net.n_inputs(), self.n_inputs, "input count mismatch");
        assert_eq!(net.n_gates(), self.n_gates, "gate count mismatch");
        let w = self.words;
        for (g, s) in net.sources().iter().enumerate() {
            let dst = (self.n_inputs + g) * w;
            let a = s[0] * w;
            let b = s[1] * w;
            for k in 0..w {
                self.values[dst + k] = !(self.values[a + k] & self.values[b + k]);
            }
        }
    }

    /// Packed value vector of one node (input or gate).
    pub fn node_words(&self, node: usize) -> &[u64] {
        assert!(node < self.n_inputs + self.n_gates, "node out of bounds");
        &self.values[node * self.words..(node + 1) * self.words]
    }

    /// Packed value vector of output `j` of `net`.
    pub fn output_words(&self, net: &NetworkStructure, j: usize) -> &[u64] {
        self.node_words(net.n_inputs() + net.output_gate(j))
    }
}
