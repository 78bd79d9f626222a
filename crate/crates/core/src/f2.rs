//! Dense linear algebra over the two-element field.
//!
//! Rows are packed into `u64` words so that adding two rows is a word-wise
//! XOR. Bit `j` of a row lives in word `j / 64` at position `j % 64`; padding
//! bits past `cols` are always zero.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

const WORD: usize = 64;

#[inline]
fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum F2Error {
    #[error("linear system has no solution")]
    NoSolution,
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("matrix is not in reduced row echelon form: {0}")]
    NotEchelon(String),
    #[error("invalid bit string: {0}")]
    Parse(String),
}

/// A row vector over GF(2).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
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

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            v.set(i, b);
        }
        v
    }

    /// Builds a vector with ones at the given positions.
    pub fn from_support(len: usize, support: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in support {
            assert!(i < len, "support index {i} out of range for length {len}");
            v.set(i, true);
        }
        v
    }

    /// Little-endian: bit `i` of `value` becomes entry `i`.
    pub fn from_u64(len: usize, value: u64) -> Self {
        let mut v = Self::zeros(len);
        if len > 0 {
            let mask = if len >= 64 { u64::MAX } else { (1u64 << len) - 1 };
            v.words[0] = value & mask;
        }
        v
    }

    /// The first (up to) 64 entries packed little-endian.
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub(crate) fn from_words(len: usize, words: Vec<u64>) -> Self {
        debug_assert_eq!(words.len(), words_for(len));
        Self { len, words }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

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

    pub fn flip(&mut self, i: usize) {
        self.words[i / WORD] ^= 1u64 << (i % WORD);
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Inner product over GF(2).
    pub fn dot(&self, other: &BitVec) -> bool {
        assert_eq!(self.len, other.len, "dot product of vectors with different lengths");
        dot_words(&self.words, &other.words)
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        assert_eq!(self.len, other.len);
        xor_words(&mut self.words, &other.words);
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

impl fmt::Display for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVec({self})")
    }
}

impl FromStr for BitVec {
    type Err = F2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut v = BitVec::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => {
                    return Err(F2Error::Parse(format!(
                        "unexpected character {other:?} at position {i}"
                    )))
                }
            }
        }
        Ok(v)
    }
}

#[inline]
fn dot_words(a: &[u64], b: &[u64]) -> bool {
    let mut acc = 0u64;
    for (x, y) in a.iter().zip(b) {
        acc ^= x & y;
    }
    acc.count_ones() & 1 == 1
}

#[inline]
fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= s;
    }
}

/// Dense GF(2) matrix with bit-packed, row-major storage.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Echelon {
    pub matrix: BitMatrix,
    pub pivots: Vec<usize>,
}

impl Echelon {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    /// An empty matrix with `cols` columns, ready for `push_row`.
    pub fn empty(cols: usize) -> Self {
        Self::zeros(0, cols)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[BitVec]) -> Result<Self, F2Error> {
        let mut m = Self::empty(cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(F2Error::Shape(format!(
                    "row {i} has length {} but matrix has {cols} columns",
                    r.len()
                )));
            }
            m.push_row(r);
        }
        Ok(m)
    }

    /// Parses rows written as '0'/'1' strings. All rows must have the same length.
    pub fn from_strs(cols: usize, rows: &[&str]) -> Result<Self, F2Error> {
        let parsed: Vec<BitVec> = rows.iter().map(|r| r.parse()).collect::<Result<_, _>>()?;
        Self::from_rows(cols, &parsed)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        debug_assert!(r < self.rows && c < self.cols);
        (self.data[r * self.stride + c / WORD] >> (c % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        debug_assert!(r < self.rows && c < self.cols);
        let w = &mut self.data[r * self.stride + c / WORD];
        let mask = 1u64 << (c % WORD);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row(&self, r: usize) -> BitVec {
        BitVec::from_words(self.cols, self.row_words(r).to_vec())
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = BitVec> + '_ {
        (0..self.rows).map(move |r| self.row(r))
    }

    pub fn push_row(&mut self, row: &BitVec) {
        assert_eq!(row.len(), self.cols, "pushed row has wrong length");
        self.data.extend_from_slice(row.words());
        self.rows += 1;
    }

    pub fn row_is_zero(&self, r: usize) -> bool {
        self.row_words(r).iter().all(|&w| w == 0)
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row_words(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// `rows[dst] ^= rows[src]`.
    pub fn xor_rows(&mut self, dst: usize, src: usize) {
        if dst == src {
            self.row_words_mut(dst).fill(0);
            return;
        }
        let s = self.stride;
        let (a, b) = if dst < src {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&mut lo[dst * s..(dst + 1) * s], &hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&mut hi[..s], &lo[src * s..(src + 1) * s])
        };
        xor_words(a, b);
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let mut m = Self::empty(self.cols);
        for &r in rows {
            m.data.extend_from_slice(self.row_words(r));
            m.rows += 1;
        }
        m
    }

    /// Stacks matrices vertically. All parts must share a column count.
    pub fn vstack(parts: &[&BitMatrix]) -> Result<Self, F2Error> {
        let cols = parts.first().map_or(0, |p| p.cols);
        let mut m = Self::empty(cols);
        for p in parts {
            if p.cols != cols {
                return Err(F2Error::Shape(format!(
                    "vstack of matrices with {} and {} columns",
                    cols, p.cols
                )));
            }
            m.data.extend_from_slice(&p.data);
            m.rows += p.rows;
        }
        Ok(m)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// `self · other` (an `rows × other.cols` matrix).
    pub fn mul(&self, other: &BitMatrix) -> Result<Self, F2Error> {
        if self.cols != other.rows {
            return Err(F2Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    let src = other.row_words(k);
                    let dst = &mut out.data[r * out.stride..(r + 1) * out.stride];
                    xor_words(dst, src);
                }
            }
        }
        Ok(out)
    }

    /// `self · otherᵀ`: entry (i, j) is the inner product of row i of `self`
    /// with row j of `other`.
    pub fn mul_transpose(&self, other: &BitMatrix) -> Result<Self, F2Error> {
        if self.cols != other.cols {
            return Err(F2Error::Shape(format!(
                "inner products of rows with {} and {} columns",
                self.cols, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a = self.row_words(i);
            for j in 0..other.rows {
                if dot_words(a, other.row_words(j)) {
                    out.set(i, j, true);
                }
            }
        }
        Ok(out)
    }

    /// `v · self` for a row vector `v` of length `rows`.
    pub fn left_mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.rows);
        let mut out = BitVec::zeros(self.cols);
        for r in v.support() {
            xor_words(&mut out.words, self.row_words(r));
        }
        out
    }

    /// `self · vᵀ`, returned as a row vector of length `rows`.
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            if dot_words(self.row_words(r), v.words()) {
                out.set(r, true);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        self.row_reduce().rank()
    }

    /// Reduced row echelon form with zero rows removed.
    ///
    /// Pivots are chosen leftmost-column first, and within a column the
    /// topmost remaining row wins, so the output is canonical for a given
    /// row space.
    pub fn row_reduce(&self) -> Echelon {
        let mut m = self.clone();
        let pivots = m.reduce_in_place(self.cols);
        m.truncate_rows(pivots.len());
        Echelon { matrix: m, pivots }
    }

    /// Gauss–Jordan elimination on the leading `limit` columns. Returns the
    /// pivot columns; the first `pivots.len()` rows hold the pivot rows.
    fn reduce_in_place(&mut self, limit: usize) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut next = 0;
        for c in 0..limit {
            if next == self.rows {
                break;
            }
            let Some(p) = (next..self.rows).find(|&r| self.get(r, c)) else {
                continue;
            };
            self.swap_rows(next, p);
            for r in 0..self.rows {
                if r != next && self.get(r, c) {
                    self.xor_rows(r, next);
                }
            }
            pivots.push(c);
            next += 1;
        }
        pivots
    }

    fn truncate_rows(&mut self, rows: usize) {
        self.rows = rows;
        self.data.truncate(rows * self.stride);
    }

    /// Basis (as rows) of `{x : self · xᵀ = 0}`, one row per free column.
    pub fn kernel(&self) -> BitMatrix {
        let ech = self.row_reduce();
        let mut is_pivot = vec![false; self.cols];
        for &p in &ech.pivots {
            is_pivot[p] = true;
        }
        let mut out = Self::empty(self.cols);
        for f in (0..self.cols).filter(|&c| !is_pivot[c]) {
            let mut x = BitVec::zeros(self.cols);
            x.set(f, true);
            for (i, &p) in ech.pivots.iter().enumerate() {
                if ech.matrix.get(i, f) {
                    x.set(p, true);
                }
            }
            out.push_row(&x);
        }
        out
    }

    /// Checks that `self` is in reduced row echelon form without zero rows
    /// and returns its pivot columns.
    pub fn echelon_pivots(&self) -> Result<Vec<usize>, F2Error> {
        let mut pivots = Vec::with_capacity(self.rows);
        for r in 0..self.rows {
            let lead = (0..self.cols)
                .find(|&c| self.get(r, c))
                .ok_or_else(|| F2Error::NotEchelon(format!("row {r} is zero")))?;
            if let Some(&prev) = pivots.last() {
                if lead <= prev {
                    return Err(F2Error::NotEchelon(format!(
                        "leading column of row {r} does not increase"
                    )));
                }
            }
            pivots.push(lead);
        }
        for (i, &p) in pivots.iter().enumerate() {
            for r in 0..self.rows {
                if r != i && self.get(r, p) {
                    return Err(F2Error::NotEchelon(format!(
                        "pivot column {p} has a second one in row {r}"
                    )));
                }
            }
        }
        Ok(pivots)
    }
}

/// Solves `a · xᵀ = rhs` for all right-hand sides at once.
///
/// `rhs` has one row per row of `a`; column `j` of `rhs` is the target for
/// unknown vector `j`. The result has one row per column of `rhs`, each of
/// length `a.cols()`. Free variables are set to zero.
pub fn solve(a: &BitMatrix, rhs: &BitMatrix) -> Result<BitMatrix, F2Error> {
    if a.rows() != rhs.rows() {
        return Err(F2Error::Shape(format!(
            "system has {} equations but right-hand side has {} rows",
            a.rows(),
            rhs.rows()
        )));
    }
    let n = a.cols();
    let k = rhs.cols();
    let mut aug = BitMatrix::zeros(a.rows(), n + k);
    for r in 0..a.rows() {
        for c in 0..n {
            if a.get(r, c) {
                aug.set(r, c, true);
            }
        }
        for c in 0..k {
            if rhs.get(r, c) {
                aug.set(r, n + c, true);
            }
        }
    }
    let pivots = aug.reduce_in_place(n);
    for r in pivots.len()..aug.rows() {
        if (n..n + k).any(|c| aug.get(r, c)) {
            return Err(F2Error::NoSolution);
        }
    }
    let mut x = BitMatrix::zeros(k, n);
    for (i, &p) in pivots.iter().enumerate() {
        for j in 0..k {
            if aug.get(i, n + j) {
                x.set(j, p, true);
            }
        }
    }
    Ok(x)
}

/// Projector onto a complement of `rowspan(s)`, acting on row vectors from
/// the right: `P = I + Aᵀ S` with `A` the pivot indicator of `s`.
///
/// `s` must be in reduced row echelon form.
pub fn mod_span_projector(s: &BitMatrix, n: usize) -> Result<BitMatrix, F2Error> {
    if s.cols() != n {
        return Err(F2Error::Shape(format!(
            "projector of size {n} from a matrix with {} columns",
            s.cols()
        )));
    }
    let pivots = s.echelon_pivots()?;
    let mut p = BitMatrix::identity(n);
    for (i, &c) in pivots.iter().enumerate() {
        xor_words(p.row_words_mut(c), s.row_words(i));
    }
    Ok(p)
}

impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            if r > 0 {
                writeln!(f)?;
            }
            write!(f, "{}", self.row(r))?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            if r > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}", self.row(r))?;
        }
        f.write_str("]")
    }
}
