//! Spectra and spectral gaps of CSS gauge code Hamiltonians.

pub mod blocks;
pub mod cheeger;
pub mod code;
pub mod decompose;
pub mod eigen;
pub mod f2;
pub mod gapsearch;
pub mod ideals;
pub mod scalar;

pub use code::{CssCode, Model, Permutation};
pub use decompose::{decompose, verify, LstrDecomposition};
pub use f2::{BitMatrix, BitVec};
pub use scalar::Real;

pub type BlockOperatorF64 = blocks::BlockOperator<f64>;
pub type BlockOperatorF32 = blocks::BlockOperator<f32>;
pub type EigenResultF64 = eigen::EigenResult<f64>;
pub type SymMatrixF64 = eigen::SymMatrix<f64>;
pub type GapReportF64 = gapsearch::GapReport<f64>;
pub type CandidateF64 = gapsearch::Candidate<f64>;
pub type IdealSpectrumF64 = ideals::IdealSpectrum<f64>;
pub type CutBoundF64 = cheeger::CutBound<f64>;
