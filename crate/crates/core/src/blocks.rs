//! Sector Hamiltonian blocks as matrix-free operators.
//!
//! A block acts on `2^bits` basis states. Index bit `i` is the coefficient
//! of row `i` of `R_X`, so every X-type gauge term is an XOR on indices and
//! every Z-type term is diagonal.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::code::CssCode;
use crate::decompose::LstrDecomposition;
use crate::eigen::{SymMatrix, SymmetricOperator, CHUNK};
use crate::f2::{BitMatrix, BitVec};
use crate::scalar::Real;

/// Largest `bits` accepted by [`BlockOperator::dense`].
pub const DENSE_BITS_CAP: usize = 14;
/// Largest qubit count accepted by [`full_hamiltonian_dense`].
pub const FULL_DENSE_QUBITS_CAP: usize = 14;
/// Blocks wider than this cannot be indexed on 64-bit hosts in practice.
pub const MAX_BITS: usize = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BlockError {
    #[error("sector {which} has {got} coefficients, expected {expected}")]
    SectorLength { which: &'static str, got: usize, expected: usize },
    #[error("{what} needs {bits} bits, cap is {cap}")]
    TooLarge { what: &'static str, bits: usize, cap: usize },
    #[error("input vector has length {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("cannot parse sector label `{0}`: expected `<tx bits>,<tz bits>`")]
    Parse(String),
    #[error("dense eigensolver: {0}")]
    Eigen(String),
}

/// A symmetry sector, given as coefficient vectors over the rows of `T_X`
/// (`t_x`, length `m_z`) and of `T_Z` (`t_z`, length `m_x`).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SectorLabel {
    pub t_x: BitVec,
    pub t_z: BitVec,
}

impl SectorLabel {
    pub fn new(t_x: BitVec, t_z: BitVec) -> Self {
        Self { t_x, t_z }
    }

    /// The all-zero sector for a decomposition with the given `m_x`, `m_z`.
    pub fn zero(m_x: usize, m_z: usize) -> Self {
        Self::new(BitVec::zeros(m_z), BitVec::zeros(m_x))
    }

    pub fn zero_for(dec: &LstrDecomposition) -> Self {
        Self::zero(dec.m_x(), dec.m_z())
    }

    pub fn is_zero(&self) -> bool {
        self.t_x.is_zero() && self.t_z.is_zero()
    }

    /// Every sector, ordered by `t_x` then `t_z` as little-endian integers.
    pub fn all(m_x: usize, m_z: usize) -> impl Iterator<Item = SectorLabel> {
        assert!(m_x + m_z < 64, "too many sectors to enumerate");
        (0u64..1 << m_z).flat_map(move |a| {
            (0u64..1 << m_x).map(move |b| SectorLabel::new(BitVec::from_u64(m_z, a), BitVec::from_u64(m_x, b)))
        })
    }

    /// Checks lengths against `dec`.
    pub fn check(&self, dec: &LstrDecomposition) -> Result<(), BlockError> {
        if self.t_x.len() != dec.m_z() {
            return Err(BlockError::SectorLength { which: "t_x", got: self.t_x.len(), expected: dec.m_z() });
        }
        if self.t_z.len() != dec.m_x() {
            return Err(BlockError::SectorLength { which: "t_z", got: self.t_z.len(), expected: dec.m_x() });
        }
        Ok(())
    }

    /// The sector's X-type representative `t_x · T_X` as an `n`-bit vector.
    pub fn x_vector(&self, dec: &LstrDecomposition) -> BitVec {
        dec.t_x.left_mul_vec(&self.t_x)
    }

    /// The sector's Z-type representative `t_z · T_Z` as an `n`-bit vector.
    pub fn z_vector(&self, dec: &LstrDecomposition) -> BitVec {
        dec.t_z.left_mul_vec(&self.t_z)
    }
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.t_x, self.t_z)
    }
}

impl FromStr for SectorLabel {
    type Err = BlockError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(',').ok_or_else(|| BlockError::Parse(s.into()))?;
        let parse = |p: &str| p.trim().parse::<BitVec>().map_err(|_| BlockError::Parse(s.into()));
        Ok(Self::new(parse(a)?, parse(b)?))
    }
}

impl serde::Serialize for SectorLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for SectorLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One off-diagonal term `coeff · sign · |u ⊕ shift⟩⟨u|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Translation<T> {
    pub shift: u64,
    pub sign: i8,
    pub coeff: T,
}

/// Build options for [`BlockOperator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockOptions {
    /// Bytes allowed for a precomputed diagonal table; above this the
    /// diagonal is evaluated on the fly.
    pub diag_table_budget: usize,
}

impl Default for BlockOptions {
    fn default() -> Self {
        Self { diag_table_budget: 512 << 20 }
    }
}

/// The Hamiltonian restricted to one sector (or one Γ component).
#[derive(Debug, Clone)]
pub struct BlockOperator<T> {
    bits: usize,
    translations: Vec<Translation<T>>,
    diag_matrix: BitMatrix,
    diag_offset: BitVec,
    diag_weights: Vec<T>,
    /// `(mask, signed weight)` after folding in the offsets and merging rows.
    diag_terms: Vec<(u64, T)>,
    diag_const: T,
    diag_table: Option<Vec<T>>,
}

impl<T: Real> BlockOperator<T> {
    /// Assembles a block from raw parts. `diag_matrix` has one row per Z
    /// term and `bits` columns.
    pub fn from_parts(
        bits: usize,
        translations: impl IntoIterator<Item = Translation<T>>,
        diag_matrix: BitMatrix,
        diag_offset: BitVec,
        diag_weights: Vec<T>,
        options: BlockOptions,
    ) -> Result<Self, BlockError> {
        if bits > MAX_BITS {
            return Err(BlockError::TooLarge { what: "block", bits, cap: MAX_BITS });
        }
        assert_eq!(diag_matrix.cols(), bits, "diagonal matrix width");
        assert_eq!(diag_matrix.rows(), diag_offset.len(), "diagonal offset length");
        assert_eq!(diag_matrix.rows(), diag_weights.len(), "diagonal weight count");

        let mut merged: Vec<Translation<T>> = Vec::new();
        for t in translations {
            assert!(t.shift >> bits == 0 || bits == 64, "shift out of range");
            match merged.iter_mut().find(|m| m.shift == t.shift && m.sign == t.sign) {
                Some(m) => m.coeff = m.coeff + t.coeff,
                None => merged.push(t),
            }
        }
        merged.sort_by_key(|t| (t.shift, t.sign));

        let mut diag_const = T::zero();
        let mut terms: Vec<(u64, T)> = Vec::new();
        for (i, &dw) in diag_weights.iter().enumerate().take(diag_matrix.rows()) {
            let mask = diag_matrix.row(i).to_u64();
            let w = if diag_offset.get(i) { -dw } else { dw };
            if mask == 0 {
                diag_const = diag_const + w;
            } else {
                match terms.iter_mut().find(|(m, _)| *m == mask) {
                    Some(t) => t.1 = t.1 + w,
                    None => terms.push((mask, w)),
                }
            }
        }
        terms.sort_by_key(|t| t.0);

        let mut op = Self {
            bits,
            translations: merged,
            diag_matrix,
            diag_offset,
            diag_weights,
            diag_terms: terms,
            diag_const,
            diag_table: None,
        };
        let table_bytes = (1usize << bits).saturating_mul(std::mem::size_of::<T>());
        if !op.diag_terms.is_empty() && table_bytes <= options.diag_table_budget {
            let mut table = vec![T::zero(); 1 << bits];
            table.par_chunks_mut(CHUNK).enumerate().for_each(|(c, chunk)| {
                let base = (c * CHUNK) as u64;
                for (i, d) in chunk.iter_mut().enumerate() {
                    *d = op.diag_eval(base + i as u64);
                }
            });
            op.diag_table = Some(table);
        }
        Ok(op)
    }

    /// `log2` of the dimension.
    pub fn bits(&self) -> usize {
        self.bits
    }

    pub fn dimension(&self) -> usize {
        1 << self.bits
    }

    pub fn translations(&self) -> &[Translation<T>] {
        &self.translations
    }

    pub fn diag_matrix(&self) -> &BitMatrix {
        &self.diag_matrix
    }

    pub fn diag_offset(&self) -> &BitVec {
        &self.diag_offset
    }

    pub fn diag_weights(&self) -> &[T] {
        &self.diag_weights
    }

    pub fn has_diag_table(&self) -> bool {
        self.diag_table.is_some()
    }

    #[inline]
    fn diag_eval(&self, u: u64) -> T {
        let mut acc = self.diag_const;
        for &(mask, w) in &self.diag_terms {
            if (mask & u).count_ones() & 1 == 1 {
                acc = acc - w;
            } else {
                acc = acc + w;
            }
        }
        acc
    }

    /// Diagonal entry at basis index `u`.
    pub fn diagonal(&self, u: usize) -> T {
        match &self.diag_table {
            Some(t) => t[u],
            None => self.diag_eval(u as u64),
        }
    }

    /// `out = H · input`, checking lengths.
    pub fn apply(&self, input: &[T], out: &mut [T]) -> Result<(), BlockError> {
        let dim = self.dimension();
        for len in [input.len(), out.len()] {
            if len != dim {
                return Err(BlockError::Length { got: len, expected: dim });
            }
        }
        self.apply_unchecked(input, out);
        Ok(())
    }

    fn apply_unchecked(&self, input: &[T], out: &mut [T]) {
        let chunk = CHUNK.min(self.dimension());
        let low_mask = (chunk - 1) as u64;
        let coeffs: Vec<(u64, T)> = self
            .translations
            .iter()
            .map(|t| (t.shift, if t.sign < 0 { -t.coeff } else { t.coeff }))
            .collect();
        out.par_chunks_mut(chunk).enumerate().for_each(|(c, dst)| {
            let base = (c * chunk) as u64;
            match &self.diag_table {
                Some(table) => {
                    let b = base as usize;
                    for (i, o) in dst.iter_mut().enumerate() {
                        *o = table[b + i] * input[b + i];
                    }
                }
                None => {
                    for (i, o) in dst.iter_mut().enumerate() {
                        let u = base + i as u64;
                        *o = self.diag_eval(u) * input[u as usize];
                    }
                }
            }
            for &(shift, coeff) in &coeffs {
                let src_base = ((base ^ shift) & !low_mask) as usize;
                let low = (shift & low_mask) as usize;
                let src = &input[src_base..src_base + chunk];
                if low == 0 {
                    for (o, &x) in dst.iter_mut().zip(src) {
                        *o = *o + coeff * x;
                    }
                } else {
                    for (i, o) in dst.iter_mut().enumerate() {
                        *o = *o + coeff * src[i ^ low];
                    }
                }
            }
        });
    }

    /// Explicit matrix, for small blocks.
    pub fn dense(&self) -> Result<SymMatrix<T>, BlockError> {
        if self.bits > DENSE_BITS_CAP {
            return Err(BlockError::TooLarge { what: "dense block", bits: self.bits, cap: DENSE_BITS_CAP });
        }
        let dim = self.dimension();
        let mut m = SymMatrix::zeros(dim);
        for u in 0..dim {
            m.add(u, u, self.diagonal(u));
            for t in &self.translations {
                let c = if t.sign < 0 { -t.coeff } else { t.coeff };
                m.add(u ^ t.shift as usize, u, c);
            }
        }
        Ok(m)
    }

    /// True when every off-diagonal entry is non-negative.
    pub fn is_stoquastic(&self) -> bool {
        self.translations
            .iter()
            .all(|t| t.shift == 0 || (if t.sign < 0 { -t.coeff } else { t.coeff }) >= T::zero())
    }
}


impl<T: Real> SymmetricOperator<T> for BlockOperator<T> {
    fn dim(&self) -> usize {
        self.dimension()
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        self.apply_unchecked(x, y)
    }
}

fn weights<T: Real>(w: &[f64]) -> Vec<T> {
    w.iter().map(|&x| T::lit(x)).collect()
}

/// The block `H_{t_X, t_Z}` of `code` for the given sector.
pub fn build_block<T: Real>(
    code: &CssCode,
    dec: &LstrDecomposition,
    sector: &SectorLabel,
) -> Result<BlockOperator<T>, BlockError> {
    build_block_with(code, dec, sector, BlockOptions::default())
}

pub fn build_block_with<T: Real>(
    code: &CssCode,
    dec: &LstrDecomposition,
    sector: &SectorLabel,
    options: BlockOptions,
) -> Result<BlockOperator<T>, BlockError> {
    sector.check(dec)?;
    let r = dec.r();
    if r > MAX_BITS {
        return Err(BlockError::TooLarge { what: "block", bits: r, cap: MAX_BITS });
    }
    let tx = sector.x_vector(dec);
    let tz = sector.z_vector(dec);
    let wx: Vec<T> = weights(&code.weights_x);
    let translations: Vec<Translation<T>> = code
        .g_x
        .iter_rows()
        .zip(wx)
        .map(|(g, w)| Translation {
            shift: dec.r_z.mul_vec(&g).to_u64(),
            sign: if tz.dot(&g) { -1 } else { 1 },
            coeff: w,
        })
        .collect();
    let diag_matrix = code.g_z.mul_transpose(&dec.r_x).expect("matching widths");
    let diag_offset = code.g_z.mul_vec(&tx);
    BlockOperator::from_parts(r, translations, diag_matrix, diag_offset, weights(&code.weights_z), options)
}

/// The computational-basis component of the X-coset `t_x`, spanned by
/// `|v S_X + u R_X + t_X⟩`. Index layout: `v` in the low `m_x` bits, `u`
/// above it.
pub fn gamma_component<T: Real>(
    code: &CssCode,
    dec: &LstrDecomposition,
    t_x: &BitVec,
) -> Result<BlockOperator<T>, BlockError> {
    let (m_x, r) = (dec.m_x(), dec.r());
    if t_x.len() != dec.m_z() {
        return Err(BlockError::SectorLength { which: "t_x", got: t_x.len(), expected: dec.m_z() });
    }
    let bits = m_x + r;
    if bits > MAX_BITS {
        return Err(BlockError::TooLarge { what: "gamma component", bits, cap: MAX_BITS });
    }
    let tx = dec.t_x.left_mul_vec(t_x);
    let translations: Vec<Translation<T>> = code
        .g_x
        .iter_rows()
        .zip(weights::<T>(&code.weights_x))
        .map(|(g, w)| {
            let v = dec.t_z.mul_vec(&g).to_u64();
            let u = dec.r_z.mul_vec(&g).to_u64();
            Translation { shift: v | (u << m_x), sign: 1, coeff: w }
        })
        .collect();
    let inner = code.g_z.mul_transpose(&dec.r_x).expect("matching widths");
    let mut diag_matrix = BitMatrix::zeros(inner.rows(), bits);
    for i in 0..inner.rows() {
        for j in 0..r {
            if inner.get(i, j) {
                diag_matrix.set(i, m_x + j, true);
            }
        }
    }
    let diag_offset = code.g_z.mul_vec(&tx);
    BlockOperator::from_parts(
        bits,
        translations,
        diag_matrix,
        diag_offset,
        weights(&code.weights_z),
        BlockOptions::default(),
    )
}

/// `Σ J_g g` on all `2^n` computational basis states.
pub fn full_hamiltonian_dense<T: Real>(code: &CssCode) -> Result<SymMatrix<T>, BlockError> {
    let n = code.n;
    if n > FULL_DENSE_QUBITS_CAP {
        return Err(BlockError::TooLarge { what: "full Hamiltonian", bits: n, cap: FULL_DENSE_QUBITS_CAP });
    }
    let dim = 1usize << n;
    let xs: Vec<(usize, T)> = code
        .g_x
        .iter_rows()
        .zip(weights::<T>(&code.weights_x))
        .map(|(g, w)| (g.to_u64() as usize, w))
        .collect();
    let zs: Vec<(usize, T)> = code
        .g_z
        .iter_rows()
        .zip(weights::<T>(&code.weights_z))
        .map(|(g, w)| (g.to_u64() as usize, w))
        .collect();
    let mut m = SymMatrix::zeros(dim);
    for b in 0..dim {
        let d: T = zs
            .iter()
            .map(|&(g, w)| if (g & b).count_ones() & 1 == 1 { -w } else { w })
            .sum();
        m.add(b, b, d);
        for &(g, w) in &xs {
            m.add(b ^ g, b, w);
        }
    }
    Ok(m)
}

/// Dense full spectrum against the union of all sector spectra, each
/// repeated `2^k` times. Both spectra ascending.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OracleComparison {
    pub code: String,
    pub dimension: usize,
    pub sectors: usize,
    pub max_abs_diff: f64,
    pub full: Vec<f64>,
    pub union: Vec<f64>,
}

impl OracleComparison {
    pub fn agrees(&self, tol: f64) -> bool {
        self.full.len() == self.union.len() && self.max_abs_diff <= tol
    }
}

/// Runs the dense oracle comparison. Needs `n <= FULL_DENSE_QUBITS_CAP`.
pub fn oracle_comparison(code: &CssCode, dec: &LstrDecomposition) -> Result<OracleComparison, BlockError> {
    let full_h = full_hamiltonian_dense::<f64>(code)?;
    let full = crate::eigen::dense_spectrum(&full_h).map_err(|e| BlockError::Eigen(e.to_string()))?;
    let labels: Vec<SectorLabel> = SectorLabel::all(dec.m_x(), dec.m_z()).collect();
    let spectra: Vec<Vec<f64>> = labels
        .par_iter()
        .map(|s| {
            let b = build_block::<f64>(code, dec, s)?;
            crate::eigen::dense_spectrum(&b.dense()?).map_err(|e| BlockError::Eigen(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    let copies = 1usize << dec.k();
    let mut union: Vec<f64> = spectra.iter().flat_map(|s| s.iter().copied().cycle().take(s.len() * copies)).collect();
    union.sort_by(f64::total_cmp);
    let max_abs_diff = if union.len() == full.len() {
        full.iter().zip(&union).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    Ok(OracleComparison {
        code: code.name.clone(),
        dimension: full.len(),
        sectors: labels.len(),
        max_abs_diff,
        full,
        union,
    })
}


#[cfg(test)]
mod solver_tests {
    use super::*;
    use crate::code::compass_2d;
    use crate::decompose::decompose;
    use crate::eigen::{topk_symmetric, EigenConfig};

    #[test]
    fn compass4_ground_sector_top_two() {
        let code = compass_2d(4).unwrap();
        let dec = decompose(&code).unwrap();
        let b: BlockOperator<f64> = build_block(&code, &dec, &SectorLabel::zero_for(&dec)).unwrap();
        let r = topk_symmetric(&b, &EigenConfig::default()).unwrap();
        assert!((r.values[0] - 19.012903).abs() < 1e-5, "{:?}", r.values);
        assert!((r.values[1] - 16.335705).abs() < 1e-5, "{:?}", r.values);
    }
}
