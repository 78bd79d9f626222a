//! Cut-based bounds on the second eigenvalue of stoquastic matrices.
//!
//! A sign cut of the second eigenvector splits the basis into two sides.
//! Flipping the ground vector on one side and projecting out the ground
//! vector gives a variational lower bound on λ2. The bi-partition quantity
//! `ν(H) = max over cuts of min(λ1(H_A), λ1(H_B))` sits between λ2 and λ1.

use rayon::prelude::*;
use thiserror::Error;

use crate::blocks::{gamma_component, BlockError};
use crate::code::CssCode;
use crate::decompose::LstrDecomposition;
use crate::eigen::{dense_eigh, dense_spectrum, densify, vecops, SymMatrix, SymmetricOperator};
use crate::f2::{solve, BitMatrix, BitVec};
use crate::scalar::Real;

/// Largest dimension accepted by the exhaustive ν search.
pub const EXHAUSTIVE_NU_CAP: usize = 16;
/// Entries smaller than this in magnitude count as zero in [`sign_cut`].
pub const ZERO_TOL: f64 = 1e-12;
/// Single-element moves per basis index in the ν local search.
pub const LOCAL_SEARCH_MOVES_PER_DIM: usize = 50;
/// Largest Γ component (in index bits) accepted by [`stabilizer_crossings`].
pub const CROSSING_BITS_CAP: usize = 12;

#[derive(Debug, Error)]
pub enum CheegerError {
    #[error("double well needs d >= 3, got {0}")]
    TooSmall(usize),
    #[error("dimension {dim} exceeds the cap {cap} for {what}")]
    DimensionCap { what: &'static str, dim: usize, cap: usize },
    #[error("length mismatch: got {got}, expected {expected}")]
    Length { got: usize, expected: usize },
    #[error("eigensolver: {0}")]
    Eigen(String),
    #[error(transparent)]
    Block(#[from] BlockError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Variational,
    NuSandwich,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NuStrategy {
    Exhaustive,
    SignCutLocalSearch,
}

/// A two-sided partition of basis indices; `mask[i]` is true on side A.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SignCut {
    pub mask: Vec<bool>,
    /// Entries within [`ZERO_TOL`] of zero, placed on side A.
    pub zeros: usize,
}

impl SignCut {
    pub fn side_sizes(&self) -> (usize, usize) {
        let a = self.mask.iter().filter(|&&b| b).count();
        (a, self.mask.len() - a)
    }

    pub fn is_proper(&self) -> bool {
        let (a, b) = self.side_sizes();
        a > 0 && b > 0
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct CutBound<T> {
    pub partition: Vec<bool>,
    pub bound_kind: BoundKind,
    /// Rayleigh quotient of the projected cut vector; a lower bound on λ2.
    /// `None` when the cut vector vanishes after projection.
    pub rayleigh_value: Option<T>,
    pub nu_value: Option<T>,
    /// λ1 of the operator, when it was computed alongside the bound.
    pub lambda1: Option<T>,
    /// `λ1 − rayleigh_value`, an upper estimate of the gap.
    pub gap_upper_estimate: Option<T>,
    pub degenerate: bool,
    /// False for the local-search ν, which is only a lower estimate of ν.
    pub exact: bool,
}

/// Path graph with unit hopping and potential 2 on both end sites.
pub fn double_well<T: Real>(d: usize) -> Result<SymMatrix<T>, CheegerError> {
    if d < 3 {
        return Err(CheegerError::TooSmall(d));
    }
    let mut m = SymMatrix::zeros(d);
    for i in 0..d - 1 {
        m.set_sym(i, i + 1, T::one());
    }
    m.set(0, 0, T::lit(2.0));
    m.set(d - 1, d - 1, T::lit(2.0));
    Ok(m)
}

pub fn sign_cut<T: Real>(v2: &[T]) -> SignCut {
    let mut zeros = 0;
    let mask = v2
        .iter()
        .map(|&x| {
            let x = x.f64();
            if x.abs() < ZERO_TOL {
                zeros += 1;
            }
            x >= 0.0 || x.abs() < ZERO_TOL
        })
        .collect();
    SignCut { mask, zeros }
}

/// Variational bound from `u = v_A ⊕ (−v_B)` projected orthogonally to `v1`.
pub fn variational_gap_bound<T: Real, Op: SymmetricOperator<T> + ?Sized>(
    op: &Op,
    v1: &[T],
    partition: &[bool],
) -> Result<CutBound<T>, CheegerError> {
    let n = op.dim();
    for len in [v1.len(), partition.len()] {
        if len != n {
            return Err(CheegerError::Length { got: len, expected: n });
        }
    }
    let norm1 = vecops::norm(v1);
    let mut u: Vec<T> = v1.iter().zip(partition).map(|(&x, &a)| if a { x } else { -x }).collect();
    let overlap = vecops::dot(&u, v1) / (norm1 * norm1);
    vecops::subtract_combination(&mut u, std::slice::from_ref(&v1.to_vec()), &[overlap]);
    let nu = vecops::norm(&u);
    let mut hv = vec![T::zero(); n];
    op.apply_into(v1, &mut hv);
    let lambda1 = T::lit(vecops::dot(v1, &hv) / (norm1 * norm1));
    if nu <= 1e-10 * norm1.max(1.0) {
        return Ok(CutBound {
            partition: partition.to_vec(),
            bound_kind: BoundKind::Variational,
            rayleigh_value: None,
            nu_value: None,
            lambda1: Some(lambda1),
            gap_upper_estimate: None,
            degenerate: true,
            exact: true,
        });
    }
    vecops::scale(&mut u, 1.0 / nu);
    op.apply_into(&u, &mut hv);
    let rayleigh = T::lit(vecops::dot(&u, &hv));
    Ok(CutBound {
        partition: partition.to_vec(),
        bound_kind: BoundKind::Variational,
        rayleigh_value: Some(rayleigh),
        nu_value: None,
        lambda1: Some(lambda1),
        gap_upper_estimate: Some(lambda1 - rayleigh),
        degenerate: false,
        exact: true,
    })
}

fn top_of<T: Real>(m: &SymMatrix<T>, side: &[usize]) -> Result<f64, CheegerError> {
    let eigs = dense_spectrum(&m.principal(side)).map_err(|e| CheegerError::Eigen(e.to_string()))?;
    Ok(eigs.last().map_or(f64::NEG_INFINITY, |x| x.f64()))
}

/// `min(λ1(H_A), λ1(H_B))` for a proper cut.
fn cut_value<T: Real>(m: &SymMatrix<T>, mask: &[bool]) -> Result<f64, CheegerError> {
    let a: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let b: Vec<usize> = (0..mask.len()).filter(|&i| !mask[i]).collect();
    Ok(top_of(m, &a)?.min(top_of(m, &b)?))
}

fn exhaustive_nu<T: Real>(m: &SymMatrix<T>) -> Result<(f64, Vec<bool>), CheegerError> {
    let d = m.dim();
    if d > EXHAUSTIVE_NU_CAP {
        return Err(CheegerError::DimensionCap { what: "exhaustive nu", dim: d, cap: EXHAUSTIVE_NU_CAP });
    }
    // the last index stays on side B, so each unordered cut appears once
    let to_mask = |bits: u64| (0..d).map(|i| i + 1 < d && bits >> i & 1 == 1).collect::<Vec<bool>>();
    let best = (1u64..1 << (d - 1))
        .into_par_iter()
        .map(|bits| cut_value(m, &to_mask(bits)).map(|v| (v, bits)))
        .try_reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |x, y| Ok(if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x }),
        )?;
    Ok((best.0, to_mask(best.1)))
}

fn local_search_nu<T: Real>(m: &SymMatrix<T>, v2: &[T]) -> Result<(f64, Vec<bool>), CheegerError> {
    let d = m.dim();
    let mut mask = sign_cut(v2).mask;
    if mask.iter().all(|&b| b) {
        mask[d - 1] = false;
    } else if mask.iter().all(|&b| !b) {
        mask[0] = true;
    }
    let mut best = cut_value(m, &mask)?;
    let mut budget = d * LOCAL_SEARCH_MOVES_PER_DIM;
    'outer: loop {
        let mut improved = false;
        for i in 0..d {
            if budget == 0 {
                break 'outer;
            }
            budget -= 1;
            mask[i] = !mask[i];
            let proper = mask.iter().any(|&b| b) && mask.iter().any(|&b| !b);
            if proper {
                let v = cut_value(m, &mask)?;
                if v > best {
                    best = v;
                    improved = true;
                    continue;
                }
            }
            mask[i] = !mask[i];
        }
        if !improved {
            break;
        }
    }
    Ok((best, mask))
}

/// ν(H) over bi-partitions of the basis of a dense matrix of dimension ≥ 2.
pub fn nu_bound<T: Real>(m: &SymMatrix<T>, strategy: NuStrategy) -> Result<CutBound<T>, CheegerError> {
    let d = m.dim();
    if d < 2 {
        return Err(CheegerError::Length { got: d, expected: 2 });
    }
    let (values, vectors) = dense_eigh(m).map_err(|e| CheegerError::Eigen(e.to_string()))?;
    let lambda1 = values[d - 1];
    let ((nu, mask), exact) = match strategy {
        NuStrategy::Exhaustive => (exhaustive_nu(m)?, true),
        NuStrategy::SignCutLocalSearch => (local_search_nu(m, &vectors[d - 2])?, false),
    };
    Ok(CutBound {
        partition: mask,
        bound_kind: BoundKind::NuSandwich,
        rayleigh_value: None,
        nu_value: Some(T::lit(nu)),
        lambda1: Some(lambda1),
        gap_upper_estimate: None,
        degenerate: false,
        exact,
    })
}

/// Variational bound for a dense matrix, using the sign cut of its second
/// eigenvector.
pub fn sign_cut_bound<T: Real>(m: &SymMatrix<T>) -> Result<(SignCut, CutBound<T>), CheegerError> {
    let d = m.dim();
    if d < 2 {
        return Err(CheegerError::Length { got: d, expected: 2 });
    }
    let (_, vectors) = dense_eigh(m).map_err(|e| CheegerError::Eigen(e.to_string()))?;
    let cut = sign_cut(&vectors[d - 2]);
    let bound = variational_gap_bound(m, &vectors[d - 1], &cut.mask)?;
    Ok((cut, bound))
}

/// Sign changes of a vector along gauge-generator paths from `|v⟩` to
/// `s|v⟩`, tallied per X stabilizer row.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct StabilizerCrossings {
    pub stabilizer: usize,
    /// Start states whose path changes sign an odd number of times.
    pub odd: usize,
    pub even: usize,
}

/// Follows each X stabilizer row through the Γ component of `t_x` and counts
/// sign changes of the component's second eigenvector along the path. Zero
/// entries are skipped when comparing signs.
pub fn stabilizer_crossings(
    code: &CssCode,
    dec: &LstrDecomposition,
    t_x: &BitVec,
) -> Result<Vec<StabilizerCrossings>, CheegerError> {
    let gamma = gamma_component::<f64>(code, dec, t_x)?;
    let bits = gamma.bits();
    if bits > CROSSING_BITS_CAP {
        return Err(CheegerError::DimensionCap { what: "stabilizer crossings", dim: bits, cap: CROSSING_BITS_CAP });
    }
    let dim = 1usize << bits;
    if dim < 2 {
        return Ok(Vec::new());
    }
    let (_, vectors) = dense_eigh(&densify(&gamma)).map_err(|e| CheegerError::Eigen(e.to_string()))?;
    let v = &vectors[dim - 2];

    let shifts: Vec<BitVec> = gamma.translations().iter().map(|t| BitVec::from_u64(bits, t.shift)).collect();
    let shift_matrix = BitMatrix::from_rows(bits, &shifts).expect("uniform width");
    let mut out = Vec::with_capacity(dec.m_x());
    for i in 0..dec.m_x() {
        let target = BitMatrix::from_rows(bits, &[BitVec::from_u64(bits, 1 << i)]).expect("width");
        let Ok(path) = solve(&shift_matrix.transpose(), &target.transpose()) else {
            continue;
        };
        let steps: Vec<u64> = path.row(0).support().map(|g| gamma.translations()[g].shift).collect();
        let (mut odd, mut even) = (0, 0);
        for start in 0..dim {
            let mut state = start;
            let mut last = v[state];
            let mut changes = 0;
            for &s in &steps {
                state ^= s as usize;
                let x = v[state];
                if x.abs() < ZERO_TOL {
                    continue;
                }
                if last.abs() >= ZERO_TOL && (x > 0.0) != (last > 0.0) {
                    changes += 1;
                }
                last = x;
            }
            if changes % 2 == 1 {
                odd += 1;
            } else {
                even += 1;
            }
        }
        out.push(StabilizerCrossings { stabilizer: i, odd, even });
    }
    Ok(out)
}
