//! Dense GF(2) vectors and matrices.
//!
//! Matrices use the row-selection orientation throughout the crate: a parity
//! check matrix `H` has `n` rows (one per word position) and `r` columns (one
//! per syndrome coordinate), and the syndrome of a word `y` is the sum of the
//! rows selected by `y`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const WORD_BITS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("row index {index} out of range for matrix with {n} rows")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("nullspace dimension {dim} exceeds limit {max_dim}")]
    DimensionTooLarge { dim: usize, max_dim: usize },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

/// A packed binary vector. Bits past `len` in the last word are always zero.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        BitVector {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = BitVector {
            len,
            words: vec![!0; words_for(len)],
        };
        v.mask_tail();
        v
    }

    /// Indicator vector of `support`. Indices must be `< len`; repeated
    /// indices cancel.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.flip(i);
        }
        v
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.into_iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    fn mask_tail(&mut self) {
        let rem = self.len % WORD_BITS;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// In-place GF(2) addition. Panics on length mismatch.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn is_all_ones(&self) -> bool {
        self.weight() == self.len
    }

    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD_BITS + w.trailing_zeros() as usize)
    }

    /// Indices of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    None
                } else {
                    let tz = word.trailing_zeros() as usize;
                    word &= word - 1;
                    Some(wi * WORD_BITS + tz)
                }
            })
        })
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    /// Copy of the bits in `range`.
    pub fn slice(&self, range: std::ops::Range<usize>) -> BitVector {
        let mut out = BitVector::zeros(range.len());
        for i in self.iter_ones() {
            if range.contains(&i) {
                out.set(i - range.start, true);
            }
        }
        out
    }

    /// Concatenation `[self | other]`.
    pub fn concat(&self, other: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.len + other.len);
        out.words[..self.words.len()].copy_from_slice(&self.words);
        for i in other.iter_ones() {
            out.set(self.len + i, true);
        }
        out
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.len)
            .map(|i| if self.get(i) { '1' } else { '0' })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl FromStr for BitVector {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_bits(s.trim(), 1)
    }
}

fn parse_bits(s: &str, line: usize) -> Result<BitVector, Gf2Error> {
    let mut bits = Vec::with_capacity(s.len());
    for (col, ch) in s.chars().enumerate() {
        match ch {
            '0' => bits.push(false),
            '1' => bits.push(true),
            other => {
                return Err(Gf2Error::Parse {
                    line,
                    msg: format!("unexpected character {other:?} at column {}", col + 1),
                })
            }
        }
    }
    Ok(BitVector::from_bits(bits))
}

/// Dense `n × r` matrix over GF(2), stored as `n` packed rows.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn zeros(n: usize, r: usize) -> Self {
        BitMatrix {
            cols: r,
            rows: vec![BitVector::zeros(r); n],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = Self::zeros(k, k);
        for i in 0..k {
            m.rows[i].set(i, true);
        }
        m
    }

    /// The `1 × r` all-ones matrix.
    pub fn ones_row(r: usize) -> Self {
        BitMatrix {
            cols: r,
            rows: vec![BitVector::ones(r)],
        }
    }

    pub fn from_rows(r: usize, rows: Vec<BitVector>) -> Result<Self, Gf2Error> {
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, row)| row.len() != r) {
            return Err(Gf2Error::DimensionMismatch(format!(
                "row {i} has length {} but matrix has {r} columns",
                row.len()
            )));
        }
        Ok(BitMatrix { cols: r, rows })
    }

    /// Row count (word length).
    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// Column count (syndrome length).
    pub fn r(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &BitVector {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.rows[i].get(j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        self.rows[i].set(j, value);
    }

    pub fn push_row(&mut self, row: BitVector) -> Result<(), Gf2Error> {
        if row.len() != self.cols {
            return Err(Gf2Error::DimensionMismatch(format!(
                "pushed row has length {} but matrix has {} columns",
                row.len(),
                self.cols
            )));
        }
        self.rows.push(row);
        Ok(())
    }

    /// `[self | other]`; both operands need the same row count.
    pub fn hstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.n() != other.n() {
            return Err(Gf2Error::DimensionMismatch(format!(
                "hstack of {} rows with {} rows",
                self.n(),
                other.n()
            )));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| a.concat(b))
            .collect();
        Ok(BitMatrix {
            cols: self.cols + other.cols,
            rows,
        })
    }

    /// `self` stacked on top of `other`. An operand with no rows is treated
    /// as having any column count.
    pub fn vstack(&self, other: &BitMatrix) -> Result<BitMatrix, Gf2Error> {
        if self.n() == 0 {
            return Ok(other.clone());
        }
        if other.n() == 0 {
            return Ok(self.clone());
        }
        if self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch(format!(
                "vstack of {} columns with {} columns",
                self.cols, other.cols
            )));
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(BitMatrix {
            cols: self.cols,
            rows,
        })
    }

    /// Rows `range` as a new matrix.
    pub fn select_rows(&self, range: std::ops::Range<usize>) -> BitMatrix {
        BitMatrix {
            cols: self.cols,
            rows: self.rows[range].to_vec(),
        }
    }

    /// GF(2) sum of the rows listed in `support`, i.e. `yH` for the word `y`
    /// with that support.
    pub fn syndrome(&self, support: &[usize]) -> Result<BitVector, Gf2Error> {
        let mut s = BitVector::zeros(self.cols);
        for &i in support {
            if i >= self.n() {
                return Err(Gf2Error::IndexOutOfRange {
                    index: i,
                    n: self.n(),
                });
            }
            s.xor_assign(&self.rows[i]);
        }
        Ok(s)
    }

    /// `yH` for a full-length word `y`.
    pub fn syndrome_of(&self, word: &BitVector) -> Result<BitVector, Gf2Error> {
        if word.len() != self.n() {
            return Err(Gf2Error::DimensionMismatch(format!(
                "word of length {} for matrix with {} rows",
                word.len(),
                self.n()
            )));
        }
        let mut s = BitVector::zeros(self.cols);
        for i in word.iter_ones() {
            s.xor_assign(&self.rows[i]);
        }
        Ok(s)
    }

    pub fn rank(&self) -> usize {
        let mut basis = EchelonBasis::new(self.cols, 0);
        for row in &self.rows {
            basis.insert(row.clone(), BitVector::zeros(0));
        }
        basis.rank()
    }

    /// Basis of the left nullspace `{y : yH = 0}`, one vector per dependent
    /// row. Rows are inserted in index order, so the vector for row `i` is
    /// `e_i` plus a combination of lower-indexed rows.
    pub fn left_nullspace_basis(&self) -> Vec<BitVector> {
        let n = self.n();
        let mut basis = EchelonBasis::new(self.cols, n);
        let mut kernel = Vec::new();
        for (i, row) in self.rows.iter().enumerate() {
            if let Some(dep) = basis.insert(row.clone(), BitVector::from_support(n, &[i])) {
                kernel.push(dep);
            }
        }
        kernel
    }

    pub fn nullspace_dim(&self) -> usize {
        self.n() - self.rank()
    }

    /// Calls `visit` for each of the `2^d` left-nullspace words, including the
    /// zero word, in binary-counter order over [`Self::left_nullspace_basis`].
    /// Word `k` is the sum of the basis vectors at the set bit positions of
    /// `k`. Stops early when `visit` returns `false`.
    pub fn for_each_nullspace_word<F>(&self, max_dim: usize, mut visit: F) -> Result<(), Gf2Error>
    where
        F: FnMut(&BitVector) -> bool,
    {
        let basis = self.left_nullspace_basis();
        let dim = basis.len();
        if dim > max_dim || dim >= 63 {
            return Err(Gf2Error::DimensionTooLarge { dim, max_dim });
        }
        let mut word = BitVector::zeros(self.n());
        if !visit(&word) {
            return Ok(());
        }
        let total: u64 = 1 << dim;
        for k in 1..total {
            // k-1 -> k flips the trailing ones of k-1 and the next zero.
            let flipped = (k ^ (k - 1)).count_ones() as usize;
            for b in basis.iter().take(flipped) {
                word.xor_assign(b);
            }
            if !visit(&word) {
                break;
            }
        }
        Ok(())
    }

    /// All left-nullspace words as sorted supports.
    pub fn nullspace_enumerate(&self, max_dim: usize) -> Result<Vec<Vec<usize>>, Gf2Error> {
        let mut out = Vec::new();
        self.for_each_nullspace_word(max_dim, |w| {
            out.push(w.support());
            true
        })?;
        Ok(out)
    }

    /// Some `y` with `yH = target`, if one exists.
    pub fn solve_left(&self, target: &BitVector) -> Option<BitVector> {
        assert_eq!(
            target.len(),
            self.cols,
            "target length must equal column count"
        );
        let n = self.n();
        let mut basis = EchelonBasis::new(self.cols, n);
        for (i, row) in self.rows.iter().enumerate() {
            basis.insert(row.clone(), BitVector::from_support(n, &[i]));
            if basis.rank() == self.cols {
                break;
            }
        }
        basis.express(target)
    }
}

impl fmt::Display for BitMatrix {
    /// Text format: a header line `n r`, then one line of `r` bits per row.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.n(), self.cols)?;
        for row in &self.rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{}", self.n(), self.cols)?;
        for row in &self.rows {
            write!(f, "\n  {row}")?;
        }
        Ok(())
    }
}

impl BitMatrix {
    /// Parses the matrix text format from the front of `lines`, consuming the
    /// header and exactly `n` row lines. `first_line` is the 1-based line
    /// number of the header, used in error messages.
    pub fn parse_lines<'a, I>(lines: &mut I, first_line: usize) -> Result<BitMatrix, Gf2Error>
    where
        I: Iterator<Item = &'a str>,
    {
        let header = lines.next().ok_or(Gf2Error::Parse {
            line: first_line,
            msg: "missing 'n r' header".into(),
        })?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        let parse_dim = |s: &str| {
            s.parse::<usize>().map_err(|_| Gf2Error::Parse {
                line: first_line,
                msg: format!("bad dimension {s:?}"),
            })
        };
        if dims.len() != 2 {
            return Err(Gf2Error::Parse {
                line: first_line,
                msg: "header must be 'n r'".into(),
            });
        }
        let (n, r) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            let line_no = first_line + 1 + i;
            let line = lines.next().ok_or(Gf2Error::Parse {
                line: line_no,
                msg: format!("expected {n} rows, found {i}"),
            })?;
            let row = parse_bits(line.trim_end_matches('\r'), line_no)?;
            if row.len() != r {
                return Err(Gf2Error::Parse {
                    line: line_no,
                    msg: format!("row has {} characters, expected {r}", row.len()),
                });
            }
            rows.push(row);
        }
        Ok(BitMatrix { cols: r, rows })
    }
}

impl FromStr for BitMatrix {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines();
        let m = Self::parse_lines(&mut lines, 1)?;
        if let Some(extra) = lines.find(|l| !l.trim().is_empty()) {
            return Err(Gf2Error::Parse {
                line: m.n() + 2,
                msg: format!("trailing content {extra:?}"),
            });
        }
        Ok(m)
    }
}

/// Row-echelon basis built by incremental insertion. Each basis row carries a
/// tag recording which original rows it is the sum of.
///
/// Every inserted row is reduced against the existing pivots before it is
/// stored, so a basis row is zero at the pivot columns of all earlier basis
/// rows.
#[derive(Clone, Debug)]
pub struct EchelonBasis {
    cols: usize,
    tag_len: usize,
    rows: Vec<BitVector>,
    tags: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl EchelonBasis {
    pub fn new(cols: usize, tag_len: usize) -> Self {
        EchelonBasis {
            cols,
            tag_len,
            rows: Vec::new(),
            tags: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn is_full(&self) -> bool {
        self.rows.len() == self.cols
    }

    fn reduce_in_place(&self, row: &mut BitVector, tag: &mut BitVector) {
        for ((b, bt), &p) in self.rows.iter().zip(&self.tags).zip(&self.pivots) {
            if row.get(p) {
                row.xor_assign(b);
                tag.xor_assign(bt);
            }
        }
    }

    /// Inserts `row`. Returns `None` if it extended the basis, or the reduced
    /// tag (a nullspace relation) if the row was dependent.
    pub fn insert(&mut self, mut row: BitVector, mut tag: BitVector) -> Option<BitVector> {
        debug_assert_eq!(row.len(), self.cols);
        debug_assert_eq!(tag.len(), self.tag_len);
        self.reduce_in_place(&mut row, &mut tag);
        match row.first_one() {
            Some(p) => {
                self.rows.push(row);
                self.tags.push(tag);
                self.pivots.push(p);
                None
            }
            None => Some(tag),
        }
    }

    /// Tag combination summing to `target`, if `target` lies in the span.
    pub fn express(&self, target: &BitVector) -> Option<BitVector> {
        let mut row = target.clone();
        let mut tag = BitVector::zeros(self.tag_len);
        self.reduce_in_place(&mut row, &mut tag);
        row.is_zero().then_some(tag)
    }
}
