//! Benchmark problem generators, generic dataset ingestion and time-series
//! preprocessing.
//!
//! The five circuit-inference generators emit exhaustive truth tables with a
//! known easy-to-hard target order (target 0 is easiest). Input columns are
//! LSB-first; for `add`/`sub` the x block precedes the y block, for `cmux`
//! the data block precedes the select block. Pools too large to materialise
//! can be sampled uniformly without building the full table.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bitdata::{BitMatrix, Dataset};
use crate::error::{Error, Result};

/// Largest exponent for which a full truth table is materialised.
const MAX_FULL_TABLE_BITS: usize = 24;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProblemKind {
    Add,
    Sub,
    Cpar,
    Cmaj,
    Cmux,
    File,
}

impl ProblemKind {
    pub fn name(self) -> &'static str {
        match self {
            ProblemKind::Add => "add",
            ProblemKind::Sub => "sub",
            ProblemKind::Cpar => "cpar",
            ProblemKind::Cmaj => "cmaj",
            ProblemKind::Cmux => "cmux",
            ProblemKind::File => "file",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "add" => Ok(ProblemKind::Add),
            "sub" => Ok(ProblemKind::Sub),
            "cpar" => Ok(ProblemKind::Cpar),
            "cmaj" => Ok(ProblemKind::Cmaj),
            "cmux" => Ok(ProblemKind::Cmux),
            "file" => Ok(ProblemKind::File),
            other => Err(Error::InvalidArgument(format!(
                "unknown problem kind {other:?}, expected add|sub|cpar|cmaj|cmux|file"
            ))),
        }
    }

    /// (inputs, targets) for a generator of size `n`.
    pub fn dimensions(self, n: usize) -> Result<(usize, usize)> {
        match self {
            ProblemKind::Add | ProblemKind::Sub => {
                check(n >= 1, "bit-width must be at least 1")?;
                Ok((2 * n, n))
            }
            ProblemKind::Cpar => {
                check(n >= 1, "width must be at least 1")?;
                Ok((n, n))
            }
            ProblemKind::Cmaj => {
                check(n >= 1 && n % 2 == 1, "majority width must be odd")?;
                Ok((n, n.div_ceil(2)))
            }
            ProblemKind::Cmux => {
                check(n >= 2, "multiplexer needs at least 2 data lines")?;
                Ok((2 * n - 1, n - 1))
            }
            ProblemKind::File => Err(Error::InvalidArgument(
                "file problems take their dimensions from the file".into(),
            )),
        }
    }
}

fn check(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidArgument(msg.into()))
    }
}

/// A benchmark instance: a generator (with optional uniform pool
/// subsampling) or an external dataset file.
#[derive(Clone, Debug)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    /// Size parameter for generator kinds; ignored for files.
    pub n: usize,
    /// Dataset path for `ProblemKind::File`.
    pub path: Option<PathBuf>,
    /// When set, the example pool is a uniform sample of this many patterns
    /// instead of the full table (or file).
    pub pool_size: Option<usize>,
    pub pool_seed: u64,
}

impl ProblemSpec {
    pub fn generator(kind: ProblemKind, n: usize) -> Self {
        ProblemSpec {
            kind,
            n,
            path: None,
            pool_size: None,
            pool_seed: 0,
        }
    }

    pub fn from_file(path: impl Into<PathBuf>) -> Self {
        ProblemSpec {
            kind: ProblemKind::File,
            n: 0,
            path: Some(path.into()),
            pool_size: None,
            pool_seed: 0,
        }
    }

    /// Short identifier used in records, e.g. `cpar7` or a file stem.
    pub fn id(&self) -> String {
        match self.kind {
            ProblemKind::File => self
                .path
                .as_ref()
                .and_then(|p| p.file_stem())
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "file".into()),
            kind => format!("{}{}", kind.name(), self.n),
        }
    }

    /// Materialise the example pool.
    pub fn build(&self) -> Result<Dataset> {
        match self.kind {
            ProblemKind::File => {
                let path = self.path.as_ref().ok_or_else(|| {
                    Error::InvalidArgument("file problem needs a path".into())
                })?;
                let ds = load_dataset(path)?;
                match self.pool_size {
                    None => Ok(ds),
                    Some(k) => {
                        check(k >= 1 && k <= ds.n_examples(), "pool_size out of range")?;
                        let split = crate::bitdata::sample_split(&ds, k, self.pool_seed)?;
                        Ok(ds.select_rows(&split.train_indices))
                    }
                }
            }
            kind => {
                let (l, m) = kind.dimensions(self.n)?;
                match self.pool_size {
                    Some(k) if (k as u128) < (1u128 << l) => {
                        let patterns = sample_patterns(l, k, self.pool_seed)?;
                        build_rows(kind, self.n, l, m, &patterns)
                    }
                    _ => {
                        check(
                            l <= MAX_FULL_TABLE_BITS,
                            "full truth table too large; set pool_size to sample it",
                        )?;
                        let patterns: Vec<u64> = (0..1u64 << l).collect();
                        build_rows(kind, self.n, l, m, &patterns)
                    }
                }
            }
        }
    }
}

/// `k` distinct pattern indices drawn uniformly from `0..2^l`, ascending.
fn sample_patterns(l: usize, k: usize, seed: u64) -> Result<Vec<u64>> {
    check(l < 64, "pattern space too large")?;
    let space = 1u128 << l;
    check((k as u128) <= space, "pool_size exceeds the pattern space")?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = std::collections::HashSet::with_capacity(k);
    let mut patterns = Vec::with_capacity(k);
    while patterns.len() < k {
        let p = rng.gen_range(0..space) as u64;
        if seen.insert(p) {
            patterns.push(p);
        }
    }
    patterns.sort_unstable();
    Ok(patterns)
}

fn build_rows(
    kind: ProblemKind,
    n: usize,
    l: usize,
    m: usize,
    patterns: &[u64],
) -> Result<Dataset> {
    let inputs = BitMatrix::from_fn(patterns.len(), l, |r, c| patterns[r] >> c & 1 == 1);
    let mut targets = BitMatrix::zeros(patterns.len(), m);
    let mut row = vec![false; m];
    for (r, &p) in patterns.iter().enumerate() {
        target_row(kind, n, p, &mut row);
        for (c, &bit) in row.iter().enumerate() {
            if bit {
                targets.set(r, c, true);
            }
        }
    }
    Dataset::new(inputs, targets, false)
}

/// Target bits for one input pattern. Bit `c` of `pattern` is input column
/// `c`, LSB first.
#[allow(clippy::needless_range_loop)] // the recurrences read best with indices
fn target_row(kind: ProblemKind, n: usize, pattern: u64, out: &mut [bool]) {
    let bit = |c: usize| pattern >> c & 1 == 1;
    match kind {
        // z_i = x_i ^ y_i ^ c_{i-1}; carry = (x&y) | (c & (x^y)); no carry
        // in, carry out dropped.
        ProblemKind::Add => {
            let mut carry = false;
            for i in 0..n {
                let (x, y) = (bit(i), bit(n + i));
                out[i] = x ^ y ^ carry;
                carry = (x && y) || (carry && (x ^ y));
            }
        }
        // As addition with a borrow chain: b = (!x & y) | (b & !(x^y)).
        ProblemKind::Sub => {
            let mut borrow = false;
            for i in 0..n {
                let (x, y) = (bit(i), bit(n + i));
                out[i] = x ^ y ^ borrow;
                borrow = (!x && y) || (borrow && !(x ^ y));
            }
        }
        // Prefix parities.
        ProblemKind::Cpar => {
            let mut acc = false;
            for i in 0..n {
                acc ^= bit(i);
                out[i] = acc;
            }
        }
        // z_i = strict majority of the first 2i+1 inputs.
        ProblemKind::Cmaj => {
            let mut ones = 0usize;
            for (i, o) in out.iter_mut().enumerate() {
                ones += bit(2 * i) as usize;
                if i > 0 {
                    ones += bit(2 * i - 1) as usize;
                }
                *o = ones > i;
            }
        }
        // d lines are columns 0..n, select lines n..2n-1; each stage feeds
        // the previous output and one fresh data line through a 2:1 mux.
        ProblemKind::Cmux => {
            let d = |i: usize| bit(i);
            let s = |i: usize| bit(n + i);
            let mut z = (d(0) && !s(0)) || (d(1) && s(0));
            out[0] = z;
            for i in 1..n - 1 {
                z = (z && !s(i)) || (d(i + 1) && s(i));
                out[i] = z;
            }
        }
        ProblemKind::File => unreachable!("file problems are not generated"),
    }
}

pub fn gen_add(n: usize) -> Result<Dataset> {
    ProblemSpec::generator(ProblemKind::Add, n).build()
}

pub fn gen_sub(n: usize) -> Result<Dataset> {
    ProblemSpec::generator(ProblemKind::Sub, n).build()
}

pub fn gen_cpar(n: usize) -> Result<Dataset> {
    ProblemSpec::generator(ProblemKind::Cpar, n).build()
}

pub fn gen_cmaj(n: usize) -> Result<Dataset> {
    ProblemSpec::generator(ProblemKind::Cmaj, n).build()
}

pub fn gen_cmux(n: usize) -> Result<Dataset> {
    ProblemSpec::generator(ProblemKind::Cmux, n).build()
}

/// Read a dataset file in the text format, consistency-checked.
pub fn load_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    Dataset::read_file(path)
}

/// Output of [`timeseries_to_pairs`]: the state-transition dataset plus the
/// node columns dropped because they were constant across all pair outputs.
#[derive(Clone, Debug)]
pub struct StatePairs {
    pub dataset: Dataset,
    pub removed_targets: Vec<usize>,
}

/// Turn a state time series into (state_t -> state_{t+1}) training pairs.
///
/// Consecutive duplicate states are collapsed before pairing (they reflect
/// time disparities, not dynamics), duplicate pairs are then dropped, and
/// target columns constant across all remaining pairs are removed and
/// reported. Inputs keep every node column.
pub fn timeseries_to_pairs(states: &[Vec<bool>]) -> Result<StatePairs> {
    if states.len() < 2 {
        return Err(Error::InvalidArgument(
            "a time series needs at least two states".into(),
        ));
    }
    let width = states[0].len();
    for (i, s) in states.iter().enumerate() {
        if s.len() != width {
            return Err(Error::RaggedRows {
                row: i,
                expected: width,
                got: s.len(),
            });
        }
    }
    if width == 0 {
        return Err(Error::InvalidArgument("states are empty".into()));
    }

    let mut collapsed: Vec<&Vec<bool>> = vec![&states[0]];
    for s in &states[1..] {
        if s != *collapsed.last().unwrap() {
            collapsed.push(s);
        }
    }
    if collapsed.len() < 2 {
        return Err(Error::EmptyProblem(
            "all states are identical; no transitions remain".into(),
        ));
    }

    let mut seen = std::collections::HashSet::new();
    let mut pairs: Vec<(&Vec<bool>, &Vec<bool>)> = Vec::new();
    for w in collapsed.windows(2) {
        if seen.insert((w[0], w[1])) {
            pairs.push((w[0], w[1]));
        }
    }

    let removed_targets: Vec<usize> = (0..width)
        .filter(|&c| pairs.iter().all(|(_, out)| out[c] == pairs[0].1[c]))
        .collect();
    if removed_targets.len() == width {
        return Err(Error::EmptyProblem(
            "every target column is constant across the transitions".into(),
        ));
    }

    let kept: Vec<usize> = (0..width)
        .filter(|c| !removed_targets.contains(c))
        .collect();
    let inputs = BitMatrix::from_fn(pairs.len(), width, |r, c| pairs[r].0[c]);
    let targets = BitMatrix::from_fn(pairs.len(), kept.len(), |r, k| pairs[r].1[kept[k]]);
    let dataset = Dataset::new(inputs, targets, false).map_err(|e| match e {
        Error::InconsistentData { first, second } => Error::Infeasible {
            target: None,
            first,
            second,
        },
        other => other,
    })?;
    Ok(StatePairs {
        dataset,
        removed_targets,
    })
}

/// Parse a time-series file: one state per line, equal-length strings over
/// {0,1}, no header.
pub fn parse_timeseries(text: &str) -> Result<Vec<Vec<bool>>> {
    let mut states = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let mut bits = Vec::with_capacity(line.len());
        for ch in line.chars() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                c => {
                    return Err(Error::Parse {
                        line: i + 1,
                        msg: format!("invalid character {c:?}, expected 0 or 1"),
                    })
                }
            }
        }
        states.push(bits);
    }
    Ok(states)
}
