//! Dense bit-packed vectors and matrices over GF(2).
//!
//! Bits are packed into `u64` words, column index = bit index within the
//! word block, so XOR-heavy workloads (syndrome accumulation, lookup-table
//! construction) run on whole words. Values are immutable in spirit: every
//! operation that the decoding pipeline shares across threads works on
//! `&self`.
//!
//! Shape mismatches are programming errors and panic; the only recoverable
//! failure in this module is asking for a right inverse of a rank-deficient
//! matrix.

use std::fmt;

use thiserror::Error;

const WORD_BITS: usize = 64;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    /// The matrix does not have full row rank over GF(2), so no right
    /// inverse exists.
    #[error("matrix has rank {rank} < {rows} rows; no right inverse over GF(2)")]
    RankDeficient { rows: usize, rank: usize },
}

fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    /// Build from an iterator of bits, least index first.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let bits: Vec<bool> = bits.into_iter().collect();
        let mut v = Self::zeros(bits.len());
        for (i, b) in bits.iter().enumerate() {
            if *b {
                v.set(i, true);
            }
        }
        v
    }

    /// Build a vector of length `len` with ones exactly at `support`.
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.set(i, true);
        }
        v
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self::zeros(len);
        for w in 0..v.words.len() {
            v.words[w] = !0;
        }
        v.mask_tail();
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range (len {})", self.len);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    /// XOR another vector of the same length into this one.
    #[inline]
    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len, "length mismatch in xor");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVec) -> BitVec {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Parity of the number of set bits.
    pub fn parity(&self) -> bool {
        self.words.iter().fold(0u64, |acc, w| acc ^ w).count_ones() % 2 == 1
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Indices of set bits in increasing order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    fn mask_tail(&mut self) {
        let tail = self.len % WORD_BITS;
        if tail != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec(")?;
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            write!(f, "{}", u8::from(self.get(i)))?;
        }
        Ok(())
    }
}

/// A dense row-major matrix over GF(2).
#[derive(Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words_per_row = words_for(cols);
        Self {
            rows,
            cols,
            words_per_row,
            data: vec![0; rows * words_per_row],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Build from row supports: `supports[i]` lists the column indices that
    /// are 1 in row `i`.
    pub fn from_row_supports(rows: usize, cols: usize, supports: &[Vec<usize>]) -> Self {
        assert_eq!(supports.len(), rows, "row count mismatch");
        let mut m = Self::zeros(rows, cols);
        for (i, sup) in supports.iter().enumerate() {
            for &j in sup {
                m.set(i, j, true);
            }
        }
        m
    }

    /// Build from string rows of '0'/'1' characters; handy for fixed test
    /// matrices.
    pub fn from_binary_rows(rows: &[&str]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |s| s.len());
        let mut m = Self::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, ch) in row.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => m.set(i, j, true),
                    _ => panic!("invalid bit character {ch:?}"),
                }
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        (self.data[r * self.words_per_row + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of range");
        let idx = r * self.words_per_row + c / WORD_BITS;
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    #[inline]
    fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    /// Copy of row `r` as a vector of length `cols`.
    pub fn row(&self, r: usize) -> BitVec {
        BitVec {
            len: self.cols,
            words: self.row_words(r).to_vec(),
        }
    }

    pub fn set_row(&mut self, r: usize, v: &BitVec) {
        assert_eq!(v.len(), self.cols, "row length mismatch");
        self.data[r * self.words_per_row..(r + 1) * self.words_per_row]
            .copy_from_slice(v.words());
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        self.row(r).iter_ones().collect()
    }

    fn xor_row_from(&mut self, dst: usize, src_words: &[u64]) {
        let base = dst * self.words_per_row;
        for (i, w) in src_words.iter().enumerate() {
            self.data[base + i] ^= w;
        }
    }

    /// Matrix product over GF(2). Panics on a dimension mismatch.
    pub fn mul(&self, rhs: &BitMatrix) -> BitMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "dimension mismatch: {}x{} times {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in self.row(i).iter_ones() {
                let src = rhs.row_words(k).to_vec();
                out.xor_row_from(i, &src);
            }
        }
        out
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(self.cols, v.len(), "dimension mismatch in mat-vec product");
        let mut out = BitVec::zeros(self.rows);
        for i in 0..self.rows {
            let parity = self
                .row_words(i)
                .iter()
                .zip(v.words())
                .fold(0u64, |acc, (a, b)| acc ^ (a & b))
                .count_ones()
                % 2
                == 1;
            if parity {
                out.set(i, true);
            }
        }
        out
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                out.set(c, r, true);
            }
        }
        out
    }

    /// Right inverse `R` with `self * R = I`, computed by Gauss-Jordan
    /// elimination choosing the lowest-index pivot column for each row.
    /// The result is deterministic for a fixed input; a right inverse is not
    /// unique in general.
    pub fn right_inverse(&self) -> Result<BitMatrix, Gf2Error> {
        let mut m = self.clone();
        let mut e = BitMatrix::identity(self.rows);
        let mut pivots = Vec::with_capacity(self.rows);
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let Some(pivot_row) = (rank..self.rows).find(|&r| m.get(r, col)) else {
                continue;
            };
            if pivot_row != rank {
                for w in 0..m.words_per_row {
                    m.data.swap(rank * m.words_per_row + w, pivot_row * m.words_per_row + w);
                }
                for w in 0..e.words_per_row {
                    e.data.swap(rank * e.words_per_row + w, pivot_row * e.words_per_row + w);
                }
            }
            let m_row = m.row_words(rank).to_vec();
            let e_row = e.row_words(rank).to_vec();
            for r in 0..self.rows {
                if r != rank && m.get(r, col) {
                    m.xor_row_from(r, &m_row);
                    e.xor_row_from(r, &e_row);
                }
            }
            pivots.push(col);
            rank += 1;
        }
        if rank < self.rows {
            return Err(Gf2Error::RankDeficient {
                rows: self.rows,
                rank,
            });
        }
        let mut inv = BitMatrix::zeros(self.cols, self.rows);
        for (j, &p) in pivots.iter().enumerate() {
            inv.set_row(p, &e.row(j));
        }
        Ok(inv)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {}", self.row(r))?;
        }
        write!(f, "]")
    }
}
