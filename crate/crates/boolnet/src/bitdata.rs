//! Packed binary matrices, labelled datasets and train/test splitting.
//!
//! [`BitMatrix`] stores one bit per cell in row-major `u64` words with the
//! padding bits of each row's final word forced to zero, so word-level
//! popcounts are exact. It backs dataset inputs/targets, network outputs and
//! error matrices alike.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const WORD_BITS: usize = 64;

/// Packed row-major binary matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    /// All-zero `rows x cols` matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(WORD_BITS);
        BitMatrix {
            rows,
            cols,
            words_per_row,
            data: vec![0u64; rows * words_per_row],
        }
    }

    /// Build a matrix by evaluating `f(row, col)` for every cell.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if f(r, c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    /// Build from explicit bit rows. All rows must have equal length.
    pub fn from_rows<R: AsRef<[bool]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        for (i, row) in rows.iter().enumerate() {
            if row.as_ref().len() != cols {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: cols,
                    got: row.as_ref().len(),
                });
            }
        }
        Ok(Self::from_fn(rows.len(), cols, |r, c| rows[r].as_ref()[c]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn words_per_row(&self) -> usize {
        self.words_per_row
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        assert!(row < self.rows, "row out of bounds");
        assert!(col < self.cols, "col out of bounds");
        let word = self.data[row * self.words_per_row + col / WORD_BITS];
        (word >> (col % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, val: bool) {
        assert!(row < self.rows, "row out of bounds");
        assert!(col < self.cols, "col out of bounds");
        let idx = row * self.words_per_row + col / WORD_BITS;
        let mask = 1u64 << (col % WORD_BITS);
        if val {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    /// The packed words of one row. Padding bits beyond `cols` are zero.
    pub fn row_words(&self, row: usize) -> &[u64] {
        assert!(row < self.rows, "row out of bounds");
        let start = row * self.words_per_row;
        &self.data[start..start + self.words_per_row]
    }

    /// Mask selecting the valid bits of the final word in each row.
    pub fn tail_mask(&self) -> u64 {
        tail_mask(self.cols)
    }

    pub fn count_ones(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// One row as a bool vector.
    pub fn row_bits(&self, row: usize) -> Vec<bool> {
        (0..self.cols).map(|c| self.get(row, c)).collect()
    }

    /// Transposed copy: cell (r, c) of the result equals cell (c, r) of self.
    /// Row `c` of the result is column `c` of self packed over row indices,
    /// which is the layout bit-parallel evaluation wants.
    pub fn transposed(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// New matrix keeping `indices` rows in the given order.
    pub fn select_rows(&self, indices: &[usize]) -> BitMatrix {
        let mut out = BitMatrix::zeros(indices.len(), self.cols);
        for (i, &r) in indices.iter().enumerate() {
            assert!(r < self.rows, "row index out of bounds");
            let src = r * self.words_per_row;
            let dst = i * out.words_per_row;
            out.data[dst..dst + self.words_per_row]
                .copy_from_slice(&self.data[src..src + self.words_per_row]);
        }
        out
    }

    /// New matrix with columns reordered: column `k` of the result is column
    /// `perm[k]` of self.
    pub fn permute_cols(&self, perm: &[usize]) -> BitMatrix {
        assert_eq!(perm.len(), self.cols, "permutation length mismatch");
        BitMatrix::from_fn(self.rows, self.cols, |r, c| self.get(r, perm[c]))
    }
}

/// Mask selecting the low `cols % 64` bits, or all bits when `cols` is a
/// multiple of the word size (and for cols == 0, where no word exists).
pub fn tail_mask(cols: usize) -> u64 {
    match cols % WORD_BITS {
        0 => !0u64,
        rem => (1u64 << rem) - 1,
    }
}

/// A Boolean multi-label dataset: `n` examples of `l` input features and `m`
/// binary targets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dataset {
    inputs: BitMatrix,
    targets: BitMatrix,
}

impl Dataset {
    /// Pair input and target matrices, rejecting contradictory data: two
    /// examples with identical inputs must have identical targets unless
    /// `allow_inconsistent` is set.
    pub fn new(inputs: BitMatrix, targets: BitMatrix, allow_inconsistent: bool) -> Result<Self> {
        if inputs.rows() != targets.rows() {
            return Err(Error::ShapeMismatch(format!(
                "inputs have {} rows, targets {}",
                inputs.rows(),
                targets.rows()
            )));
        }
        if !allow_inconsistent {
            let mut seen: HashMap<&[u64], (usize, &[u64])> = HashMap::new();
            for r in 0..inputs.rows() {
                let key = inputs.row_words(r);
                match seen.get(key) {
                    Some(&(first, tgt)) if tgt != targets.row_words(r) => {
                        return Err(Error::InconsistentData { first, second: r });
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(key, (r, targets.row_words(r)));
                    }
                }
            }
        }
        Ok(Dataset { inputs, targets })
    }

    pub fn inputs(&self) -> &BitMatrix {
        &self.inputs
    }

    pub fn targets(&self) -> &BitMatrix {
        &self.targets
    }

    pub fn n_examples(&self) -> usize {
        self.inputs.rows()
    }

    pub fn n_features(&self) -> usize {
        self.inputs.cols()
    }

    pub fn n_targets(&self) -> usize {
        self.targets.cols()
    }

    /// Sub-dataset over the given example rows, in order. Consistency is
    /// inherited from the source, so no re-check is performed.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        Dataset {
            inputs: self.inputs.select_rows(indices),
            targets: self.targets.select_rows(indices),
        }
    }

    /// Same examples with target columns reordered: target `k` of the result
    /// is target `perm[k]` of self.
    pub fn permute_targets(&self, perm: &[usize]) -> Dataset {
        Dataset {
            inputs: self.inputs.clone(),
            targets: self.targets.permute_cols(perm),
        }
    }

    /// One target as a bool column.
    pub fn target_column(&self, j: usize) -> Vec<bool> {
        (0..self.targets.rows())
            .map(|r| self.targets.get(r, j))
            .collect()
    }

    /// Serialize in the dataset text format (see [`Dataset::read_file`]).
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.n_features(), self.n_targets());
        for r in 0..self.n_examples() {
            for c in 0..self.n_features() {
                s.push(if self.inputs.get(r, c) { '1' } else { '0' });
            }
            for c in 0..self.n_targets() {
                s.push(if self.targets.get(r, c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Parse the dataset text format: first line `l m`, then one line per
    /// example of exactly `l + m` characters from {0,1} (inputs first), each
    /// LF-terminated with no separators or trailing whitespace.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.split_inclusive('\n');
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: "missing header line `l m`".into(),
            })?
            .strip_suffix('\n')
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: "header line must be LF-terminated".into(),
            })?;
        let mut parts = header.split(' ');
        let parse_dim = |tok: Option<&str>| -> Result<usize> {
            tok.and_then(|t| t.parse::<usize>().ok())
                .ok_or_else(|| Error::Parse {
                    line: 1,
                    msg: format!("header must be `l m`, got {header:?}"),
                })
        };
        let l = parse_dim(parts.next())?;
        let m = parse_dim(parts.next())?;
        if parts.next().is_some() {
            return Err(Error::Parse {
                line: 1,
                msg: format!("header must be `l m`, got {header:?}"),
            });
        }

        let mut input_rows: Vec<Vec<bool>> = Vec::new();
        let mut target_rows: Vec<Vec<bool>> = Vec::new();
        for (i, raw) in lines.enumerate() {
            let line_no = i + 2;
            let line = raw.strip_suffix('\n').unwrap_or(raw);
            if line.len() != l + m {
                return Err(Error::Parse {
                    line: line_no,
                    msg: format!("expected {} characters, got {}", l + m, line.len()),
                });
            }
            let mut bits = Vec::with_capacity(l + m);
            for ch in line.chars() {
                match ch {
                    '0' => bits.push(false),
                    '1' => bits.push(true),
                    c if c.is_whitespace() => {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: "trailing or embedded whitespace".into(),
                        })
                    }
                    c => {
                        return Err(Error::Parse {
                            line: line_no,
                            msg: format!("invalid character {c:?}, expected 0 or 1"),
                        })
                    }
                }
            }
            input_rows.push(bits[..l].to_vec());
            target_rows.push(bits[l..].to_vec());
        }
        let inputs = if input_rows.is_empty() {
            BitMatrix::zeros(0, l)
        } else {
            BitMatrix::from_rows(&input_rows)?
        };
        let targets = if target_rows.is_empty() {
            BitMatrix::zeros(0, m)
        } else {
            BitMatrix::from_rows(&target_rows)?
        };
        Dataset::new(inputs, targets, false)
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

/// A disjoint train/test partition of a dataset's example rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleSplit {
    pub train_indices: Vec<usize>,
    pub test_indices: Vec<usize>,
}

impl SampleSplit {
    /// |train| / (|train| + |test|).
    pub fn fraction(&self) -> f64 {
        let total = self.train_indices.len() + self.test_indices.len();
        self.train_indices.len() as f64 / total as f64
    }
}

/// Draw `train_size` example rows uniformly without replacement; the test set
/// is the exact complement, so every pattern not trained on is tested.
/// Deterministic under a fixed seed. Both index lists are sorted ascending.
pub fn sample_split(dataset: &Dataset, train_size: usize, seed: u64) -> Result<SampleSplit> {
    let n = dataset.n_examples();
    if train_size == 0 || train_size > n {
        return Err(Error::InvalidArgument(format!(
            "train_size {train_size} out of range 1..={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut indices: Vec<usize> = (0..n).collect();
    indices.partial_shuffle(&mut rng, train_size);
    let mut train: Vec<usize> = indices[..train_size].to_vec();
    let mut test: Vec<usize> = indices[train_size..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(SampleSplit {
        train_indices: train,
        test_indices: test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn from_rows_round_trip() {
        let m = BitMatrix::from_rows(&[bits("10"), bits("01")]).unwrap();
        assert_eq!(m.rows(), 2);
        assert_eq!(m.cols(), 2);
        assert!(m.get(0, 0));
        assert!(!m.get(1, 0));
        assert_eq!(m.row_bits(0), bits("10"));
        assert_eq!(m.row_bits(1), bits("01"));
    }

    #[test]
    fn from_rows_empty() {
        let m = BitMatrix::from_rows::<Vec<bool>>(&[]).unwrap();
        assert_eq!((m.rows(), m.cols()), (0, 0));
    }

    #[test]
    fn from_rows_ragged() {
        let err = BitMatrix::from_rows(&[bits("10"), bits("0")]).unwrap_err();
        assert!(matches!(err, Error::RaggedRows { row: 1, .. }));
    }

    #[test]
    fn word_boundary_popcount() {
        // 65 columns spill into a second word; popcount must still be exact.
        let m = BitMatrix::from_rows(&[vec![true; 65]]).unwrap();
        assert_eq!(m.words_per_row(), 2);
        assert_eq!(m.count_ones(), 65);
        assert_eq!(m.row_words(0).iter().map(|w| w.count_ones()).sum::<u32>(), 65);
    }

    #[test]
    fn padding_bits_stay_zero() {
        let m = BitMatrix::from_rows(&[vec![true; 7]]).unwrap();
        assert_eq!(m.row_words(0)[0], 0b111_1111);
        let mut m2 = m.clone();
        m2.set(0, 6, false);
        m2.set(0, 6, true);
        assert_eq!(m, m2);
    }

    #[test]
    fn transpose_involution() {
        let m = BitMatrix::from_rows(&[bits("101"), bits("010")]).unwrap();
        let t = m.transposed();
        assert_eq!(t.rows(), 3);
        assert!(t.get(0, 0) && t.get(2, 0) && t.get(1, 1));
        assert_eq!(t.transposed(), m);
    }

    fn toy_dataset(n: usize) -> Dataset {
        // 7 input bits counting upward, target = parity of inputs.
        let inputs = BitMatrix::from_fn(n, 7, |r, c| (r >> c) & 1 == 1);
        let targets = BitMatrix::from_fn(n, 1, |r, _| (r as u32).count_ones() % 2 == 1);
        Dataset::new(inputs, targets, false).unwrap()
    }

    #[test]
    fn dataset_rejects_contradictions() {
        let inputs = BitMatrix::from_rows(&[bits("00"), bits("00")]).unwrap();
        let targets = BitMatrix::from_rows(&[bits("0"), bits("1")]).unwrap();
        let err = Dataset::new(inputs.clone(), targets.clone(), false).unwrap_err();
        assert!(matches!(err, Error::InconsistentData { first: 0, second: 1 }));
        assert!(Dataset::new(inputs, targets, true).is_ok());
    }

    #[test]
    fn split_full_train_leaves_empty_test() {
        let ds = toy_dataset(128);
        let split = sample_split(&ds, 128, 3).unwrap();
        assert!(split.test_indices.is_empty());
        assert_eq!(split.train_indices, (0..128).collect::<Vec<_>>());
    }

    #[test]
    fn split_deterministic_and_partitioning() {
        let ds = toy_dataset(128);
        let a = sample_split(&ds, 48, 7).unwrap();
        let b = sample_split(&ds, 48, 7).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.test_indices.len(), 80);
        let mut all: Vec<usize> = a
            .train_indices
            .iter()
            .chain(a.test_indices.iter())
            .copied()
            .collect();
        all.sort_unstable();
        assert_eq!(all, (0..128).collect::<Vec<_>>());
        assert!((a.fraction() - 48.0 / 128.0).abs() < 1e-12);
    }

    #[test]
    fn split_rejects_out_of_range() {
        let ds = toy_dataset(8);
        assert!(sample_split(&ds, 0, 1).is_err());
        assert!(sample_split(&ds, 9, 1).is_err());
    }

    #[test]
    fn text_format_round_trip() {
        let ds = toy_dataset(16);
        let text = ds.to_text();
        assert!(text.starts_with("7 1\n"));
        let back = Dataset::from_text(&text).unwrap();
        assert_eq!(back, ds);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn text_format_errors_carry_line_numbers() {
        let err = Dataset::from_text("2 1\n01\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));

        let err = Dataset::from_text("2 1\n011 \n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));

        let err = Dataset::from_text("2 1\n0x1\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));

        let err = Dataset::from_text("2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }

    #[test]
    fn select_rows_preserves_bits() {
        let ds = toy_dataset(16);
        let sub = ds.select_rows(&[3, 9, 12]);
        assert_eq!(sub.n_examples(), 3);
        assert_eq!(sub.inputs().row_bits(1), ds.inputs().row_bits(9));
        assert_eq!(sub.targets().row_bits(2), ds.targets().row_bits(12));
    }
}
