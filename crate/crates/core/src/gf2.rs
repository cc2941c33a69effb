//! Dense, bit-packed linear algebra over GF(2).
//!
//! Rows are packed into `u64` words. Elimination scans columns left to right
//! and takes the lowest-index candidate row as pivot.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Gf2Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("selected columns are linearly dependent")]
    SingularSubset,
    #[error("syndrome is not in the column space of the matrix")]
    Inconsistent,
    #[error("entry {value} at ({row}, {col}) is not a bit")]
    InvalidEntry { row: usize, col: usize, value: u8 },
    #[error("malformed alist: {0}")]
    Alist(String),
}

/// A fixed-length vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b & 1 == 1 {
                v.set(i, true);
            }
        }
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds a vector with ones exactly at `support` (indices may repeat; repeats cancel).
    pub fn from_support(len: usize, support: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &i in support {
            v.flip(i);
        }
        v
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        Self { len, words }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD] >> (i % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let mask = 1u64 << (i % WORD);
        if value {
            self.words[i / WORD] |= mask;
        } else {
            self.words[i / WORD] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.len, other.len, "bit vector length mismatch");
        let ones: u32 = self
            .words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones())
            .sum();
        ones & 1 == 1
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD + tz)
                }
            })
        })
    }

    pub fn support(&self) -> Vec<usize> {
        self.iter_ones().collect()
    }

    pub fn to_bits(&self) -> Vec<u8> {
        (0..self.len).map(|i| self.get(i) as u8).collect()
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector[")?;
        for i in 0..self.len {
            write!(f, "{}", self.get(i) as u8)?;
        }
        write!(f, "]")
    }
}

/// Dense binary matrix, row-major and bit-packed.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BinaryMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(size: usize) -> Self {
        let mut m = Self::zeros(size, size);
        for i in 0..size {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from dense 0/1 rows. All rows must have length `cols`.
    pub fn from_dense(rows: &[Vec<u8>], cols: usize) -> Result<Self, Gf2Error> {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Gf2Error::DimensionMismatch(format!(
                    "row {r} has {} entries, expected {cols}",
                    row.len()
                )));
            }
            for (c, &v) in row.iter().enumerate() {
                match v {
                    0 => {}
                    1 => m.set(r, c, true),
                    value => return Err(Gf2Error::InvalidEntry { row: r, col: c, value }),
                }
            }
        }
        Ok(m)
    }

    /// Panics on ragged input.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let dense: Vec<Vec<u8>> = rows.iter().map(|r| r.as_ref().to_vec()).collect();
        Self::from_dense(&dense, cols).expect("well-formed literal matrix")
    }

    /// Builds a matrix from per-row column supports. Repeated indices cancel.
    pub fn from_supports(cols: usize, supports: &[Vec<usize>]) -> Self {
        let mut m = Self::zeros(supports.len(), cols);
        for (r, sup) in supports.iter().enumerate() {
            for &c in sup {
                m.flip(r, c);
            }
        }
        m
    }

    pub fn from_row_vectors(cols: usize, rows: &[BitVector]) -> Self {
        let mut m = Self::zeros(rows.len(), cols);
        for (r, v) in rows.iter().enumerate() {
            assert_eq!(v.len(), cols);
            m.row_words_mut(r).copy_from_slice(v.words());
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let idx = r * self.stride + c / WORD;
        let mask = 1u64 << (c % WORD);
        if value {
            self.data[idx] |= mask;
        } else {
            self.data[idx] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, r: usize, c: usize) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.stride + c / WORD] ^= 1u64 << (c % WORD);
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVector {
        BitVector::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn row_support(&self, r: usize) -> Vec<usize> {
        self.row(r).support()
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        (0..self.rows).map(|r| self.row_weight(r)).collect()
    }

    pub fn col_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.cols];
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                w[c] += 1;
            }
        }
        w
    }

    pub fn column(&self, c: usize) -> BitVector {
        let mut v = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            if self.get(r, c) {
                v.set(r, true);
            }
        }
        v
    }

    /// Column supports, i.e. the rows touched by each column.
    pub fn column_supports(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                out[c].push(r);
            }
        }
        out
    }

    pub fn row_supports(&self) -> Vec<Vec<usize>> {
        (0..self.rows).map(|r| self.row_support(r)).collect()
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    /// XORs row `src` into row `dst`.
    #[inline]
    pub fn add_row(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..(src + 1) * s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s] as &[u64], &mut lo[dst * s..(dst + 1) * s])
        };
        for (d, w) in b.iter_mut().zip(a) {
            *d ^= w;
        }
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in self.row(r).iter_ones() {
                t.set(c, r, true);
            }
        }
        t
    }

    /// Matrix product `self · other` over GF(2).
    pub fn mul(&self, other: &BinaryMatrix) -> Result<BinaryMatrix, Gf2Error> {
        if self.cols != other.rows {
            return Err(Gf2Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BinaryMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in self.row(r).iter_ones() {
                let (dst, src) = (r, k);
                let s = out.stride;
                let src_words = other.row_words(src);
                for (d, w) in out.data[dst * s..(dst + 1) * s].iter_mut().zip(src_words) {
                    *d ^= w;
                }
            }
        }
        Ok(out)
    }

    /// `self · otherᵀ`, i.e. pairwise row inner products. This is the CSS commutation test.
    pub fn mul_transpose(&self, other: &BinaryMatrix) -> Result<BinaryMatrix, Gf2Error> {
        if self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch(format!(
                "row lengths differ: {} vs {}",
                self.cols, other.cols
            )));
        }
        let mut out = BinaryMatrix::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row_words(i);
            for j in 0..other.rows {
                let b = other.row_words(j);
                let ones: u32 = a.iter().zip(b).map(|(x, y)| (x & y).count_ones()).sum();
                if ones & 1 == 1 {
                    out.set(i, j, true);
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `self · v`.
    pub fn mul_vec(&self, v: &BitVector) -> BitVector {
        assert_eq!(self.cols, v.len(), "matrix-vector dimension mismatch");
        let mut out = BitVector::zeros(self.rows);
        for r in 0..self.rows {
            let ones: u32 = self
                .row_words(r)
                .iter()
                .zip(v.words())
                .map(|(a, b)| (a & b).count_ones())
                .sum();
            if ones & 1 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &BinaryMatrix) -> Result<BinaryMatrix, Gf2Error> {
        if self.cols != other.cols {
            return Err(Gf2Error::DimensionMismatch(format!(
                "cannot stack {} columns on {} columns",
                self.cols, other.cols
            )));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Ok(BinaryMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            stride: self.stride,
            data,
        })
    }

    pub fn select_rows(&self, rows: &[usize]) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(rows.len(), self.cols);
        for (i, &r) in rows.iter().enumerate() {
            out.row_words_mut(i).copy_from_slice(self.row_words(r));
        }
        out
    }

    pub fn select_columns(&self, cols: &[usize]) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(self.rows, cols.len());
        for r in 0..self.rows {
            for (j, &c) in cols.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// Kronecker product; row `(i, k)` maps to `i·b.rows + k` and column `(j, l)` to `j·b.cols + l`.
    pub fn kron(&self, b: &BinaryMatrix) -> BinaryMatrix {
        let mut out = BinaryMatrix::zeros(self.rows * b.rows, self.cols * b.cols);
        for i in 0..self.rows {
            for j in self.row(i).iter_ones() {
                for k in 0..b.rows {
                    for l in b.row(k).iter_ones() {
                        out.set(i * b.rows + k, j * b.cols + l, true);
                    }
                }
            }
        }
        out
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        (0..self.rows).map(|r| self.row(r).to_bits()).collect()
    }

    /// Rank by Gaussian elimination on a private copy.
    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.eliminate(false).len()
    }

    /// Reduced row echelon form and the pivot columns in increasing order.
    pub fn rref(&self) -> (BinaryMatrix, Vec<usize>) {
        let mut m = self.clone();
        let pivots = m.eliminate(true);
        (m, pivots)
    }

    /// In-place elimination. Pivot rows end up at the top in pivot order.
    /// With `full`, entries above pivots are cleared as well.
    fn eliminate(&mut self, full: bool) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..self.cols {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(p, next);
            let start = if full { 0 } else { next + 1 };
            for r in start..self.rows {
                if r != next && self.get(r, c) {
                    self.add_row(next, r);
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    /// Basis of the right null space `{v : self·v = 0}`, one vector per row.
    pub fn kernel_basis(&self) -> BinaryMatrix {
        let (reduced, pivots) = self.rref();
        let mut is_pivot = vec![false; self.cols];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..self.cols).filter(|&c| !is_pivot[c]).collect();
        let mut basis = BinaryMatrix::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            basis.set(i, f, true);
            for (r, &p) in pivots.iter().enumerate() {
                if reduced.get(r, f) {
                    basis.set(i, p, true);
                }
            }
        }
        basis
    }

    /// Whether `v` lies in the row space of `self`.
    pub fn row_space_contains(&self, v: &BitVector) -> bool {
        assert_eq!(v.len(), self.cols);
        let (reduced, pivots) = self.rref();
        let mut residual = v.clone();
        for (r, &p) in pivots.iter().enumerate() {
            if residual.get(p) {
                for (d, w) in residual.words.iter_mut().zip(reduced.row_words(r)) {
                    *d ^= w;
                }
            }
        }
        residual.is_zero()
    }

    /// Solves `self · e = s` with `e` supported on `columns`.
    ///
    /// The selected columns must be linearly independent. Rows that reduce to zero
    /// on the selected columns must carry a zero syndrome bit.
    pub fn solve_submatrix(&self, columns: &[usize], s: &BitVector) -> Result<BitVector, Gf2Error> {
        if s.len() != self.rows {
            return Err(Gf2Error::DimensionMismatch(format!(
                "syndrome has length {}, matrix has {} rows",
                s.len(),
                self.rows
            )));
        }
        let k = columns.len();
        // Augmented [H_I | s].
        let mut aug = BinaryMatrix::zeros(self.rows, k + 1);
        for r in 0..self.rows {
            for (j, &c) in columns.iter().enumerate() {
                if self.get(r, c) {
                    aug.set(r, j, true);
                }
            }
            if s.get(r) {
                aug.set(r, k, true);
            }
        }
        let pivots = aug.eliminate(true);
        if pivots.iter().filter(|&&p| p < k).count() < k {
            return Err(Gf2Error::SingularSubset);
        }
        if pivots.contains(&k) {
            return Err(Gf2Error::Inconsistent);
        }
        let mut e = BitVector::zeros(self.cols);
        for (r, &p) in pivots.iter().enumerate() {
            if aug.get(r, k) {
                e.set(columns[p], true);
            }
        }
        Ok(e)
    }

    /// Inverse of a square, nonsingular matrix.
    pub fn inverse(&self) -> Result<BinaryMatrix, Gf2Error> {
        if self.rows != self.cols {
            return Err(Gf2Error::DimensionMismatch("inverse of a non-square matrix".into()));
        }
        let n = self.rows;
        let mut aug = BinaryMatrix::zeros(n, 2 * n);
        for r in 0..n {
            for c in self.row(r).iter_ones() {
                aug.set(r, c, true);
            }
            aug.set(r, n + r, true);
        }
        let pivots = aug.eliminate(true);
        if pivots.len() < n || pivots.last().is_some_and(|&p| p >= n) {
            return Err(Gf2Error::SingularSubset);
        }
        let cols: Vec<usize> = (n..2 * n).collect();
        Ok(aug.select_columns(&cols))
    }

    /// Writes the matrix in MacKay's alist format.
    ///
    /// ```text
    /// <cols> <rows>
    /// <max column weight> <max row weight>
    /// <column weights, one per column>
    /// <row weights, one per row>
    /// <1-based row indices for each column, zero padded to the max column weight>
    /// <1-based column indices for each row, zero padded to the max row weight>
    /// ```
    pub fn write_alist<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let col_sup = self.column_supports();
        let row_sup = self.row_supports();
        let max_col = col_sup.iter().map(Vec::len).max().unwrap_or(0);
        let max_row = row_sup.iter().map(Vec::len).max().unwrap_or(0);
        writeln!(out, "{} {}", self.cols, self.rows)?;
        writeln!(out, "{max_col} {max_row}")?;
        writeln!(out, "{}", join(col_sup.iter().map(Vec::len)))?;
        writeln!(out, "{}", join(row_sup.iter().map(Vec::len)))?;
        for sup in &col_sup {
            writeln!(out, "{}", join(padded(sup, max_col)))?;
        }
        for sup in &row_sup {
            writeln!(out, "{}", join(padded(sup, max_row)))?;
        }
        Ok(())
    }

    pub fn to_alist_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_alist(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("alist is ASCII")
    }

    /// Parses the alist format written by [`BinaryMatrix::write_alist`].
    /// Zero padding is optional; the column lists are cross-checked against the row lists.
    pub fn read_alist<R: BufRead>(input: R) -> Result<BinaryMatrix, Gf2Error> {
        let mut lines = Vec::new();
        for line in input.lines() {
            let line = line.map_err(|e| Gf2Error::Alist(e.to_string()))?;
            lines.push(line);
        }
        let mut it = lines.into_iter();
        let mut numbers = |what: &str| -> Result<Vec<usize>, Gf2Error> {
            let line = it
                .next()
                .ok_or_else(|| Gf2Error::Alist(format!("missing {what} line")))?;
            line.split_whitespace()
                .map(|t| t.parse::<usize>().map_err(|e| Gf2Error::Alist(format!("{what}: {e}"))))
                .collect()
        };
        let dims = numbers("dimension")?;
        let [cols, rows] = dims[..] else {
            return Err(Gf2Error::Alist("expected `<cols> <rows>`".into()));
        };
        let _max = numbers("max weight")?;
        let col_w = numbers("column weight")?;
        let row_w = numbers("row weight")?;
        if col_w.len() != cols || row_w.len() != rows {
            return Err(Gf2Error::Alist("weight list length mismatch".into()));
        }
        let mut by_cols = BinaryMatrix::zeros(rows, cols);
        for (c, &w) in col_w.iter().enumerate() {
            let idx: Vec<usize> = numbers("column list")?.into_iter().filter(|&i| i != 0).collect();
            if idx.len() != w {
                return Err(Gf2Error::Alist(format!("column {c} lists {} entries, weight {w}", idx.len())));
            }
            for i in idx {
                if i > rows {
                    return Err(Gf2Error::Alist(format!("row index {i} out of range")));
                }
                by_cols.set(i - 1, c, true);
            }
        }
        let mut m = BinaryMatrix::zeros(rows, cols);
        for (r, &w) in row_w.iter().enumerate() {
            let idx: Vec<usize> = numbers("row list")?.into_iter().filter(|&i| i != 0).collect();
            if idx.len() != w {
                return Err(Gf2Error::Alist(format!("row {r} lists {} entries, weight {w}", idx.len())));
            }
            for i in idx {
                if i > cols {
                    return Err(Gf2Error::Alist(format!("column index {i} out of range")));
                }
                m.set(r, i - 1, true);
            }
        }
        if m != by_cols {
            return Err(Gf2Error::Alist("row and column lists disagree".into()));
        }
        Ok(m)
    }

    pub fn from_alist_str(s: &str) -> Result<BinaryMatrix, Gf2Error> {
        Self::read_alist(s.as_bytes())
    }
}

/// Echelon basis grown one vector at a time.
#[derive(Clone, Debug)]
pub struct IncrementalBasis {
    len: usize,
    rows: Vec<(usize, BitVector)>,
}

impl IncrementalBasis {
    pub fn new(len: usize) -> Self {
        Self { len, rows: Vec::new() }
    }

    pub fn from_rows(m: &BinaryMatrix) -> Self {
        let mut b = Self::new(m.cols());
        for r in 0..m.rows() {
            b.insert(&m.row(r));
        }
        b
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Residual of `v` after elimination against the basis; zero iff `v` is in the span.
    pub fn reduce(&self, v: &BitVector) -> BitVector {
        assert_eq!(v.len(), self.len);
        let mut r = v.clone();
        for (pivot, row) in &self.rows {
            if r.get(*pivot) {
                r.xor_assign(row);
            }
        }
        r
    }

    pub fn contains(&self, v: &BitVector) -> bool {
        self.reduce(v).is_zero()
    }

    /// Adds `v` if it is independent of the basis. Returns whether the rank grew.
    pub fn insert(&mut self, v: &BitVector) -> bool {
        let r = self.reduce(v);
        let Some(pivot) = r.iter_ones().next() else {
            return false;
        };
        for (_, row) in self.rows.iter_mut() {
            if row.get(pivot) {
                row.xor_assign(&r);
            }
        }
        self.rows.push((pivot, r));
        true
    }
}

fn padded(sup: &[usize], width: usize) -> impl Iterator<Item = usize> + '_ {
    sup.iter().map(|&i| i + 1).chain(std::iter::repeat_n(0, width - sup.len()))
}

fn join<I: Iterator<Item = usize>>(it: I) -> String {
    it.map(|v| v.to_string()).collect::<Vec<_>>().join(" ")
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                write!(f, "{}", self.get(r, c) as u8)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Dense JSON form: `{"rows": R, "cols": C, "data": [[0,1,...], ...]}`.
#[derive(Serialize, Deserialize)]
struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<u8>>,
}

impl Serialize for BinaryMatrix {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.to_dense(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for BinaryMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let dense = DenseMatrix::deserialize(deserializer)?;
        if dense.data.len() != dense.rows {
            return Err(serde::de::Error::custom(format!(
                "declared {} rows but found {}",
                dense.rows,
                dense.data.len()
            )));
        }
        BinaryMatrix::from_dense(&dense.data, dense.cols).map_err(serde::de::Error::custom)
    }
}
