//! Symmetric eigensolvers.
//!
//! [`topk_symmetric`] is a matrix-free thick-restart Lanczos solver for the
//! largest eigenvalues; [`dense_spectrum`] and [`dense_eigh`] are the dense
//! reference used for small operators and tests.

mod dense;
mod lanczos;

use thiserror::Error;

use crate::scalar::Real;

pub use dense::{dense_eigh, dense_spectrum, densify, Eigh, SymMatrix, DENSE_CAP};
pub use lanczos::{topk_symmetric, EigenConfig};

/// A real symmetric linear operator, applied matrix-free.
pub trait SymmetricOperator<T: Real>: Sync {
    fn dim(&self) -> usize;

    /// `y = A x`. `x` and `y` both have length `dim()`.
    fn apply_into(&self, x: &[T], y: &mut [T]);
}

impl<T: Real, Op: SymmetricOperator<T> + ?Sized> SymmetricOperator<T> for &Op {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        (**self).apply_into(x, y)
    }
}

/// Leading eigenpairs in descending order of eigenvalue.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EigenResult<T> {
    pub values: Vec<T>,
    #[serde(skip)]
    pub vectors: Option<Vec<Vec<T>>>,
    /// Operator applications used.
    pub iterations: usize,
    /// `‖A v − λ v‖` per returned pair.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Error)]
pub enum EigenError<T: std::fmt::Debug> {
    #[error("no convergence after {iterations} operator applications (best values {values:?}, residuals {residuals:?})")]
    NoConvergence {
        values: Vec<T>,
        residuals: Vec<f64>,
        iterations: usize,
    },
    #[error("operator dimension {dim} is smaller than the {k} requested eigenvalues")]
    DimensionTooSmall { dim: usize, k: usize },
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("{0}")]
    Shape(String),
}

/// Sign structure of a (normalized) vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Positivity {
    Positive,
    /// Kept for completeness; the sign fix makes it unreachable.
    Negative,
    Mixed,
    /// No entry below `-tol`, but some entries within `tol` of zero.
    NonNegative,
}

/// Classifies `v` after flipping its global sign so that the entry of
/// largest magnitude is positive.
pub fn positivity_check<T: Real>(v: &[T], tol: f64) -> Positivity {
    let Some(lead) = v.iter().copied().max_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap()) else {
        return Positivity::NonNegative;
    };
    let sign = if lead < T::zero() { -1.0 } else { 1.0 };
    let mut any_neg = false;
    let mut all_pos = true;
    for &x in v {
        let x = sign * x.f64();
        if x < -tol {
            any_neg = true;
        }
        if x <= tol {
            all_pos = false;
        }
    }
    if all_pos {
        Positivity::Positive
    } else if any_neg {
        Positivity::Mixed
    } else {
        Positivity::NonNegative
    }
}

/// Work is split into chunks of this many entries; partial sums are combined
/// in chunk order so reductions do not depend on the thread count.
pub(crate) const CHUNK: usize = 1 << 13;

pub(crate) mod vecops {
    use super::CHUNK;
    use crate::scalar::Real;
    use rayon::prelude::*;

    pub fn dot<T: Real>(a: &[T], b: &[T]) -> f64 {
        let partials: Vec<f64> = a
            .par_chunks(CHUNK)
            .zip(b.par_chunks(CHUNK))
            .map(|(x, y)| x.iter().zip(y).map(|(&p, &q)| p.f64() * q.f64()).sum::<f64>())
            .collect();
        partials.into_iter().sum()
    }

    pub fn norm<T: Real>(a: &[T]) -> f64 {
        dot(a, a).sqrt()
    }

    pub fn scale<T: Real>(a: &mut [T], c: f64) {
        let c = T::lit(c);
        a.par_chunks_mut(CHUNK).for_each(|x| x.iter_mut().for_each(|v| *v = *v * c));
    }

    /// `y -= Σ coeffs[i] * basis[i]`.
    pub fn subtract_combination<T: Real>(y: &mut [T], basis: &[Vec<T>], coeffs: &[f64]) {
        let coeffs: Vec<T> = coeffs.iter().map(|&c| T::lit(c)).collect();
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(ci, chunk)| {
            let start = ci * CHUNK;
            for (b, &c) in basis.iter().zip(&coeffs) {
                let src = &b[start..start + chunk.len()];
                for (o, &s) in chunk.iter_mut().zip(src) {
                    *o = *o - c * s;
                }
            }
        });
    }

    /// `Σ coeffs[i] * basis[i]`.
    pub fn combination<T: Real>(basis: &[Vec<T>], coeffs: &[f64], n: usize) -> Vec<T> {
        let mut out = vec![T::zero(); n];
        let neg: Vec<f64> = coeffs.iter().map(|c| -c).collect();
        subtract_combination(&mut out, basis, &neg);
        out
    }
}
