//! Spectral gap search over symmetry sectors.
//!
//! The ground energy comes from sector `(0, 0)`. Candidates for the second
//! eigenvalue are the second eigenvalue of `(0, 0)` and the ground energies
//! of frustrated sectors `(t_x, 0)` (and `(0, t_z)` unless the code is known
//! to be weakly self-dual). Mixed sectors are never needed because their
//! ground energy is below that of `(t_x, 0)`.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use thiserror::Error;

use crate::blocks::{build_block, full_hamiltonian_dense, gamma_component, BlockError, SectorLabel};
use crate::code::{check_weak_self_duality, is_code_symmetry, CodeError, CssCode, Permutation};
use crate::decompose::{decompose, DecompositionError, Dims, LstrDecomposition};
use crate::eigen::{dense_eigh, positivity_check, topk_symmetric, EigenConfig, EigenError, Positivity};
use crate::f2::{solve, BitMatrix, BitVec};
use crate::ideals::{partition_ideals_with, sector_spectrum_via_ideals, IdealError, IdealPartition};
use crate::scalar::Real;

/// Spans with at most this many generators are enumerated exactly when
/// choosing a minimum-weight basis.
pub const EXACT_BASIS_LIMIT: usize = 20;
/// Full sweeps enumerate at most `2^FULL_SWEEP_LIMIT` sectors per side.
pub const FULL_SWEEP_LIMIT: usize = 24;
/// Blocks at least this large are solved one at a time to bound memory.
const SEQUENTIAL_BITS: usize = 16;

pub const FORMULA_NOTE: &str = "frustrated sectors contribute their largest eigenvalue; the second \
eigenvalue is taken only from sector (0,0)";

#[derive(Debug, Error)]
pub enum GapError {
    #[error(transparent)]
    Decomposition(#[from] DecompositionError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Code(#[from] CodeError),
    #[error("ground sector: {0}")]
    Ground(SectorFailure),
    #[error("permutation {index} is not a symmetry of the code")]
    NotSymmetry { index: usize },
    #[error("{side} side has {m} stabilizer generators; full sweep is limited to {limit}")]
    SweepTooLarge { side: char, m: usize, limit: usize },
    #[error("{0}")]
    Unsupported(String),
}

/// Why a single sector solve failed.
#[derive(Debug, Clone, PartialEq, Eq, Error, serde::Serialize)]
#[serde(tag = "kind", content = "message", rename_all = "kebab-case")]
pub enum SectorFailure {
    #[error("{0}")]
    NoConvergence(String),
    #[error("{0}")]
    Invalid(String),
}

impl SectorFailure {
    pub fn is_convergence(&self) -> bool {
        matches!(self, SectorFailure::NoConvergence(_))
    }
}

impl<T: Real> From<EigenError<T>> for SectorFailure {
    fn from(e: EigenError<T>) -> Self {
        match e {
            EigenError::NoConvergence { .. } => SectorFailure::NoConvergence(e.to_string()),
            _ => SectorFailure::Invalid(e.to_string()),
        }
    }
}

impl<T: Real> From<IdealError<T>> for SectorFailure {
    fn from(e: IdealError<T>) -> Self {
        match e {
            IdealError::Eigen { source: EigenError::NoConvergence { .. }, .. } => SectorFailure::NoConvergence(e.to_string()),
            _ => SectorFailure::Invalid(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepMode {
    #[default]
    SingleFrustration,
    FullSweep,
}

/// Which stabilizer generators define "single frustration".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StabilizerBasis {
    /// The code's stabilizer hints, completed by minimum-weight elements.
    /// Equivalent to `MinWeight` when the code carries no hints.
    #[default]
    Natural,
    /// Greedy minimum-weight basis of the stabilizer span.
    MinWeight,
    /// The reduced row echelon rows produced by the decomposition.
    Echelon,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CandidateKind {
    SecondOfGroundSector,
    FrustratedSectorGround,
}

#[derive(Debug, Clone, Default)]
pub struct GapOptions {
    pub mode: SweepMode,
    pub basis: StabilizerBasis,
    /// Qubit permutations preserving the code, used to skip equivalent sectors.
    pub symmetries: Vec<Permutation>,
    /// A permutation exchanging X and Z generators. When it verifies, the
    /// `(0, t_z)` sectors are skipped.
    pub duality: Option<Permutation>,
    pub eigen: EigenConfig,
    /// Use the commuting-ideal sumset when the code splits into several ideals.
    pub use_ideals: bool,
}

impl GapOptions {
    pub fn new() -> Self {
        Self { use_ideals: true, ..Self::default() }
    }
}

/// A chosen set of stabilizer generators `B = C·S`, with `S` the echelon
/// rows of the decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorBasis {
    pub rows: BitMatrix,
    pub coeffs: BitMatrix,
    /// False when the span was too large to enumerate and a local
    /// improvement of the echelon rows was used instead.
    pub exact: bool,
}

impl GeneratorBasis {
    /// Sector coefficient vectors (over the echelon rows) in which exactly
    /// generator `i` is frustrated, one per row.
    pub fn single_frustration_sectors(&self) -> BitMatrix {
        let m = self.coeffs.rows();
        solve(&self.coeffs, &BitMatrix::identity(m)).expect("basis change is invertible")
    }

    /// Indices of the generators frustrated by sector coefficients `c`.
    pub fn frustrated(&self, c: &BitVec) -> Vec<usize> {
        self.coeffs.mul_vec(c).support().collect()
    }

    /// Weight of the product of the frustrated generators.
    pub fn frustrated_weight(&self, c: &BitVec) -> usize {
        let mut acc = BitVec::zeros(self.rows.cols());
        for i in self.frustrated(c) {
            acc.xor_assign(&self.rows.row(i));
        }
        acc.weight()
    }
}

/// Span elements of `s` as `(row, coefficients)`, lightest first (ties by
/// bit pattern). Only called for `s.rows() <= EXACT_BASIS_LIMIT`.
fn span_by_weight(s: &BitMatrix) -> Vec<(BitVec, u64)> {
    let m = s.rows();
    let mut elems: Vec<(usize, BitVec, u64)> = Vec::with_capacity((1usize << m).saturating_sub(1));
    let mut cur = BitVec::zeros(s.cols());
    let mut code = 0u64;
    for step in 1u64..1 << m {
        // Gray code: flip the generator at the lowest set bit of `step`
        let i = step.trailing_zeros() as usize;
        code ^= 1 << i;
        cur.xor_assign(&s.row(i));
        elems.push((cur.weight(), cur.clone(), code));
    }
    elems.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
    elems.into_iter().map(|(_, v, c)| (v, c)).collect()
}

/// Greedily keeps independent candidates until `m` rows are chosen.
fn greedy_basis(s: &BitMatrix, candidates: impl IntoIterator<Item = (BitVec, BitVec)>) -> GeneratorBasis {
    let m = s.rows();
    let mut rows = BitMatrix::empty(s.cols());
    let mut coeffs = BitMatrix::empty(m);
    let mut reduced: Vec<BitVec> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for (v, c) in candidates {
        if rows.rows() == m {
            break;
        }
        let mut r = c.clone();
        for (b, &p) in reduced.iter().zip(&pivots) {
            if r.get(p) {
                r.xor_assign(b);
            }
        }
        let Some(p) = r.support().next() else { continue };
        reduced.push(r);
        pivots.push(p);
        rows.push_row(&v);
        coeffs.push_row(&c);
    }
    GeneratorBasis { rows, coeffs, exact: true }
}

fn local_improvement(s: &BitMatrix) -> GeneratorBasis {
    let m = s.rows();
    let mut b = GeneratorBasis { rows: s.clone(), coeffs: BitMatrix::identity(m), exact: false };
    let mut improved = true;
    while improved {
        improved = false;
        for i in 0..m {
            for j in 0..m {
                if i == j {
                    continue;
                }
                let mut cand = b.rows.row(i);
                cand.xor_assign(&b.rows.row(j));
                if cand.weight() < b.rows.row_weight(i) {
                    b.rows.xor_rows(i, j);
                    b.coeffs.xor_rows(i, j);
                    improved = true;
                }
            }
        }
    }
    b
}

/// A basis of `rowspan(s)` chosen according to `kind`. `hints` is only read
/// by [`StabilizerBasis::Natural`].
pub fn stabilizer_basis(s: &BitMatrix, hints: &BitMatrix, kind: StabilizerBasis) -> GeneratorBasis {
    let m = s.rows();
    let completion = |exact: &mut bool| -> Vec<(BitVec, BitVec)> {
        if m <= EXACT_BASIS_LIMIT {
            span_by_weight(s).into_iter().map(|(v, c)| (v, BitVec::from_u64(m, c))).collect()
        } else {
            *exact = false;
            let b = local_improvement(s);
            b.rows.iter_rows().zip(b.coeffs.iter_rows()).collect()
        }
    };
    match kind {
        StabilizerBasis::Echelon => GeneratorBasis { rows: s.clone(), coeffs: BitMatrix::identity(m), exact: true },
        StabilizerBasis::MinWeight if m > EXACT_BASIS_LIMIT => local_improvement(s),
        StabilizerBasis::MinWeight => {
            let mut exact = true;
            greedy_basis(s, completion(&mut exact))
        }
        StabilizerBasis::Natural => {
            let mut seeds = Vec::new();
            if hints.rows() > 0 && hints.cols() == s.cols() && m > 0 {
                if let Ok(c) = solve(&s.transpose(), &hints.transpose()) {
                    seeds = hints.iter_rows().zip(c.iter_rows()).collect();
                } else {
                    // keep the hints that do lie in the span
                    for h in hints.iter_rows() {
                        let rhs = BitMatrix::from_rows(s.cols(), std::slice::from_ref(&h))
                            .expect("hint length matches")
                            .transpose();
                        if let Ok(c) = solve(&s.transpose(), &rhs) {
                            seeds.push((h, c.row(0)));
                        }
                    }
                }
            }
            let mut exact = true;
            let mut b = greedy_basis(s, seeds.into_iter().chain(completion(&mut exact)));
            b.exact = exact;
            b
        }
    }
}

/// Hamming weight of the frustrated stabilizer of an X-side sector, relative
/// to the echelon stabilizer rows. Several frustrated generators count as
/// their product.
pub fn frustrated_weight(sector: &SectorLabel, dec: &LstrDecomposition) -> usize {
    stabilizer_basis(&dec.s_z, &BitMatrix::empty(dec.n), StabilizerBasis::Echelon).frustrated_weight(&sector.t_x)
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Candidate<T> {
    pub sector: SectorLabel,
    pub kind: CandidateKind,
    /// Indices into the report's generator basis for the frustrated side.
    pub frustrated: Vec<usize>,
    /// Support of the product of the frustrated generators, as a bit string.
    pub frustrated_stabilizer: String,
    pub w_frustrated: usize,
    pub value: Option<T>,
    /// Number of sectors this one stands for after symmetry reduction.
    pub multiplicity: usize,
    pub iterations: usize,
    pub residual: f64,
    pub error: Option<SectorFailure>,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SolverMeta {
    pub tol: f64,
    pub seed: u64,
    pub max_matvecs: usize,
    pub total_matvecs: usize,
    pub ideals: usize,
    pub formula_note: &'static str,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct GapReport<T> {
    pub code: String,
    pub dims: Dims,
    pub mode: SweepMode,
    pub basis: StabilizerBasis,
    pub basis_exact: bool,
    pub weakly_self_dual: bool,
    /// Generator rows used for the Z and X sides, as bit strings.
    pub z_generators: Vec<String>,
    pub x_generators: Vec<String>,
    pub lambda1: T,
    pub candidates: Vec<Candidate<T>>,
    pub gap: Option<T>,
    /// Index into `candidates`.
    pub argmin: Option<usize>,
    /// Candidates whose value is not strictly below `lambda1`.
    pub strictness_violations: Vec<usize>,
    pub meta: SolverMeta,
}

impl<T: Real> GapReport<T> {
    pub fn argmin_candidate(&self) -> Option<&Candidate<T>> {
        self.argmin.map(|i| &self.candidates[i])
    }

    pub fn failed(&self) -> impl Iterator<Item = &Candidate<T>> {
        self.candidates.iter().filter(|c| c.error.is_some())
    }
}

/// Shared solving context for one code.
pub struct SectorSolver<'a> {
    pub code: &'a CssCode,
    pub dec: LstrDecomposition,
    pub partition: Option<IdealPartition>,
    pub eigen: EigenConfig,
}

#[derive(Debug, Clone)]
pub struct SectorValues<T> {
    pub values: Vec<T>,
    pub iterations: usize,
    pub residual: f64,
}

impl<'a> SectorSolver<'a> {
    pub fn new(code: &'a CssCode, eigen: EigenConfig, use_ideals: bool) -> Result<Self, GapError> {
        let dec = decompose(code)?;
        let partition = if use_ideals {
            let p = partition_ideals_with::<f64>(code, &dec).map_err(|e| GapError::Unsupported(e.to_string()))?;
            (p.len() > 1).then_some(p)
        } else {
            None
        };
        Ok(Self { code, dec, partition, eigen })
    }

    pub fn ideals(&self) -> usize {
        self.partition.as_ref().map_or(1, |p| p.len())
    }

    /// Top `k` eigenvalues of a sector (fewer if the block is smaller).
    pub fn solve<T: Real>(&self, sector: &SectorLabel, k: usize) -> Result<SectorValues<T>, SectorFailure> {
        let dim_bits = self.dec.r();
        let k = if dim_bits < 63 { k.min(1 << dim_bits) } else { k };
        if let Some(p) = &self.partition {
            let r = sector_spectrum_via_ideals::<T>(p, &self.dec, sector, k, &self.eigen)?;
            return Ok(SectorValues { values: r.values, iterations: r.matvecs, residual: r.max_residual });
        }
        let block =
            build_block::<T>(self.code, &self.dec, sector).map_err(|e| SectorFailure::Invalid(e.to_string()))?;
        let cfg = EigenConfig { k, ..self.eigen.clone() };
        let r = topk_symmetric(&block, &cfg)?;
        Ok(SectorValues {
            residual: r.residuals.iter().copied().fold(0.0, f64::max),
            values: r.values,
            iterations: r.iterations,
        })
    }

    /// Diagonal entry at basis index 0, used to order sector solves.
    fn predicted_top(&self, sector: &SectorLabel) -> f64 {
        let tx = sector.x_vector(&self.dec);
        self.code
            .g_z
            .iter_rows()
            .zip(&self.code.weights_z)
            .map(|(g, &w)| if g.dot(&tx) { -w } else { w })
            .sum()
    }
}

/// λ1 of the whole Hamiltonian, from sector `(0, 0)`.
pub fn ground_energy<T: Real>(code: &CssCode, eigen: &EigenConfig) -> Result<T, GapError> {
    let solver = SectorSolver::new(code, eigen.clone(), true)?;
    let zero = SectorLabel::zero_for(&solver.dec);
    let r = solver.solve::<T>(&zero, 1).map_err(GapError::Ground)?;
    Ok(r.values[0])
}

/// Maps an X-side sector coefficient vector through a qubit permutation.
fn permute_x_sector(dec: &LstrDecomposition, perm: &Permutation, c: &BitVec) -> BitVec {
    let t = dec.t_x.left_mul_vec(c);
    dec.s_z.mul_vec(&perm.apply(&t))
}

fn permute_z_sector(dec: &LstrDecomposition, perm: &Permutation, c: &BitVec) -> BitVec {
    let t = dec.t_z.left_mul_vec(c);
    dec.s_x.mul_vec(&perm.apply(&t))
}

/// Groups `items` into orbits under `perms`. Returns (representative,
/// multiplicity) pairs in order of first appearance; orbit members outside
/// `items` are ignored.
fn reduce_by_symmetry(
    items: &[BitVec],
    perms: &[Permutation],
    act: impl Fn(&Permutation, &BitVec) -> BitVec,
) -> Vec<(BitVec, usize)> {
    let index: HashMap<&BitVec, usize> = items.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut orbit_of = vec![usize::MAX; items.len()];
    let mut out: Vec<(BitVec, usize)> = Vec::new();
    for (i, item) in items.iter().enumerate() {
        if orbit_of[i] != usize::MAX {
            continue;
        }
        let id = out.len();
        let mut seen = std::collections::HashSet::new();
        seen.insert(item.clone());
        let mut stack = vec![item.clone()];
        while let Some(v) = stack.pop() {
            for p in perms {
                let w = act(p, &v);
                if seen.insert(w.clone()) {
                    stack.push(w);
                }
            }
        }
        let mut count = 0;
        for v in &seen {
            if let Some(&j) = index.get(v) {
                if orbit_of[j] == usize::MAX {
                    orbit_of[j] = id;
                    count += 1;
                }
            }
        }
        out.push((item.clone(), count));
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    X,
    Z,
}

struct Job {
    side: Side,
    coeffs: BitVec,
    multiplicity: usize,
}

/// Computes the spectral gap as the smallest distance from λ1 to any
/// candidate second eigenvalue.
pub fn spectral_gap<T: Real>(code: &CssCode, options: &GapOptions) -> Result<GapReport<T>, GapError> {
    let solver = SectorSolver::new(code, options.eigen.clone(), options.use_ideals)?;
    let dec = &solver.dec;
    for (index, p) in options.symmetries.iter().enumerate() {
        if !is_code_symmetry(code, p) {
            return Err(GapError::NotSymmetry { index });
        }
    }
    let self_dual = match &options.duality {
        Some(p) => check_weak_self_duality(code, p)?,
        None => false,
    };

    let zbasis = stabilizer_basis(&dec.s_z, &code.stabilizer_hints_z, options.basis);
    let xbasis = stabilizer_basis(&dec.s_x, &code.stabilizer_hints_x, options.basis);

    let side_items = |basis: &GeneratorBasis, m: usize, side: char| -> Result<Vec<BitVec>, GapError> {
        match options.mode {
            SweepMode::SingleFrustration => Ok(basis.single_frustration_sectors().iter_rows().collect()),
            SweepMode::FullSweep => {
                if m > FULL_SWEEP_LIMIT {
                    return Err(GapError::SweepTooLarge { side, m, limit: FULL_SWEEP_LIMIT });
                }
                Ok((1u64..1 << m).map(|c| BitVec::from_u64(m, c)).collect())
            }
        }
    };

    let mut jobs: Vec<Job> = Vec::new();
    let x_items = side_items(&zbasis, dec.m_z(), 'X')?;
    for (c, mult) in reduce_by_symmetry(&x_items, &options.symmetries, |p, c| permute_x_sector(dec, p, c)) {
        jobs.push(Job { side: Side::X, coeffs: c, multiplicity: mult });
    }
    if !self_dual {
        let z_items = side_items(&xbasis, dec.m_x(), 'Z')?;
        for (c, mult) in reduce_by_symmetry(&z_items, &options.symmetries, |p, c| permute_z_sector(dec, p, c)) {
            jobs.push(Job { side: Side::Z, coeffs: c, multiplicity: mult });
        }
    }

    let zero = SectorLabel::zero_for(dec);
    let ground = solver.solve::<T>(&zero, 2).map_err(GapError::Ground)?;
    let lambda1 = ground.values[0];
    let mut total_matvecs = ground.iterations;

    let sector_of = |job: &Job| match job.side {
        Side::X => SectorLabel::new(job.coeffs.clone(), BitVec::zeros(dec.m_x())),
        Side::Z => SectorLabel::new(BitVec::zeros(dec.m_z()), job.coeffs.clone()),
    };
    // Solve the most promising sectors first; results are keyed by job index
    // so the report does not depend on completion order.
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    let predicted: Vec<f64> = jobs.iter().map(|j| solver.predicted_top(&sector_of(j))).collect();
    order.sort_by(|&a, &b| predicted[b].total_cmp(&predicted[a]).then(a.cmp(&b)));
    let run = |i: &usize| (*i, solver.solve::<T>(&sector_of(&jobs[*i]), 1));
    let results: BTreeMap<usize, Result<SectorValues<T>, SectorFailure>> = if dec.r() >= SEQUENTIAL_BITS {
        order.iter().map(run).collect()
    } else {
        order.par_iter().map(run).collect()
    };

    let mut candidates: Vec<Candidate<T>> = Vec::with_capacity(jobs.len() + 1);
    if let Some(&second) = ground.values.get(1) {
        candidates.push(Candidate {
            sector: zero.clone(),
            kind: CandidateKind::SecondOfGroundSector,
            frustrated: vec![],
            frustrated_stabilizer: BitVec::zeros(code.n).to_string(),
            w_frustrated: 0,
            value: Some(second),
            multiplicity: 1,
            iterations: ground.iterations,
            residual: ground.residual,
            error: None,
        });
    }
    for (i, job) in jobs.iter().enumerate() {
        let basis = if job.side == Side::X { &zbasis } else { &xbasis };
        let frustrated = basis.frustrated(&job.coeffs);
        let mut product = BitVec::zeros(code.n);
        for &f in &frustrated {
            product.xor_assign(&basis.rows.row(f));
        }
        let (value, iterations, residual, error) = match &results[&i] {
            Ok(v) => (Some(v.values[0]), v.iterations, v.residual, None),
            Err(e) => (None, 0, f64::NAN, Some(e.clone())),
        };
        total_matvecs += iterations;
        candidates.push(Candidate {
            sector: sector_of(job),
            kind: CandidateKind::FrustratedSectorGround,
            frustrated,
            w_frustrated: product.weight(),
            frustrated_stabilizer: product.to_string(),
            value,
            multiplicity: job.multiplicity,
            iterations,
            residual,
            error,
        });
    }

    let mut argmin: Option<usize> = None;
    for (i, c) in candidates.iter().enumerate() {
        if let Some(v) = c.value {
            if argmin.is_none_or(|a| v > candidates[a].value.expect("argmin has a value")) {
                argmin = Some(i);
            }
        }
    }
    let gap = argmin.map(|a| lambda1 - candidates[a].value.expect("argmin has a value"));
    let strictness_violations = candidates
        .iter()
        .enumerate()
        .filter(|(_, c)| c.kind == CandidateKind::FrustratedSectorGround && c.value.is_some_and(|v| v >= lambda1))
        .map(|(i, _)| i)
        .collect();

    let rows = |m: &BitMatrix| m.iter_rows().map(|r| r.to_string()).collect::<Vec<_>>();
    Ok(GapReport {
        code: code.name.clone(),
        dims: dec.dims(),
        mode: options.mode,
        basis: options.basis,
        basis_exact: zbasis.exact && xbasis.exact,
        weakly_self_dual: self_dual,
        z_generators: rows(&zbasis.rows),
        x_generators: rows(&xbasis.rows),
        lambda1,
        candidates,
        gap,
        argmin,
        strictness_violations,
        meta: SolverMeta {
            tol: options.eigen.tol,
            seed: options.eigen.seed,
            max_matvecs: options.eigen.max_matvecs,
            total_matvecs,
            ideals: solver.ideals(),
            formula_note: FORMULA_NOTE,
        },
    })
}

/// One named diagnostic outcome.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct DiagnosticCheck {
    pub name: &'static str,
    /// `None` when the check was skipped because the instance exceeds a cap.
    pub passed: Option<bool>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PerronReport {
    pub checks: Vec<DiagnosticCheck>,
}

impl PerronReport {
    /// True when no executed check failed.
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }
}

/// Ordering and positivity checks on a small instance. `bits_cap` bounds
/// `m_x + r` for the Γ components and `r` for the sector sweep.
pub fn perron_diagnostics(code: &CssCode, bits_cap: usize) -> Result<PerronReport, GapError> {
    let dec = decompose(code)?;
    let (m_x, m_z, r) = (dec.m_x(), dec.m_z(), dec.r());
    let mut checks = Vec::new();
    let cfg = EigenConfig { k: 1, want_vectors: true, ..EigenConfig::default() };

    // (a) Γ components have a sign-uniform ground vector
    if m_x + r <= bits_cap && m_z <= 8 {
        let mut bad = Vec::new();
        for c in 0u64..1 << m_z {
            let tx = BitVec::from_u64(m_z, c);
            let g = gamma_component::<f64>(code, &dec, &tx)?;
            let res = topk_symmetric(&g, &cfg).map_err(|e| GapError::Ground(e.into()))?;
            let v = &res.vectors.as_ref().expect("vectors requested")[0];
            let p = positivity_check(v, 1e-12);
            if p != Positivity::Positive {
                bad.push(format!("{tx}: {p:?}"));
            }
        }
        checks.push(DiagnosticCheck {
            name: "gamma-ground-positive",
            passed: Some(bad.is_empty()),
            detail: if bad.is_empty() { format!("{} components", 1u64 << m_z) } else { bad.join("; ") },
        });
    } else {
        checks.push(skipped("gamma-ground-positive", "m_x + r above cap"));
    }

    // (b) and (d): sector ordering
    if r <= bits_cap && m_x + m_z <= 10 {
        let mut tops: BTreeMap<SectorLabel, f64> = BTreeMap::new();
        for s in SectorLabel::all(m_x, m_z) {
            let b = build_block::<f64>(code, &dec, &s)?;
            let res = topk_symmetric(&b, &EigenConfig::default().with_k(1))
                .map_err(|e| GapError::Ground(e.into()))?;
            tops.insert(s, res.values[0]);
        }
        let zero = SectorLabel::zero(m_x, m_z);
        let l1 = tops[&zero];
        let tol = 1e-9 * l1.abs().max(1.0);
        let not_below: Vec<String> =
            tops.iter().filter(|(s, &v)| **s != zero && v >= l1 - tol).map(|(s, v)| format!("{s}: {v}")).collect();
        checks.push(DiagnosticCheck {
            name: "ground-sector-strictly-largest",
            passed: Some(not_below.is_empty()),
            detail: if not_below.is_empty() { format!("lambda1 = {l1}") } else { not_below.join("; ") },
        });
        let mut mixed_bad = Vec::new();
        for (s, &v) in &tops {
            if !s.t_z.is_zero() {
                let pure = SectorLabel::new(s.t_x.clone(), BitVec::zeros(m_x));
                if v > tops[&pure] + tol {
                    mixed_bad.push(format!("{s}: {v} > {}", tops[&pure]));
                }
            }
        }
        checks.push(DiagnosticCheck {
            name: "pure-x-sector-dominates-mixed",
            passed: Some(mixed_bad.is_empty()),
            detail: mixed_bad.join("; "),
        });
    } else {
        checks.push(skipped("ground-sector-strictly-largest", "r or sector count above cap"));
        checks.push(skipped("pure-x-sector-dominates-mixed", "r or sector count above cap"));
    }

    // (c) the ground space of the full Hamiltonian is stabilized
    if code.n <= 12 {
        let h = full_hamiltonian_dense::<f64>(code)?;
        let (vals, vecs) = dense_eigh(&h).map_err(|e| GapError::Ground(e.into()))?;
        let top = *vals.last().expect("non-empty");
        let ground: Vec<&Vec<f64>> =
            vals.iter().zip(&vecs).filter(|(v, _)| (top - **v).abs() < 1e-8).map(|(_, x)| x).collect();
        let mut worst = 0.0f64;
        for s in dec.s_x.iter_rows() {
            let mask = s.to_u64() as usize;
            for v in &ground {
                let d: f64 = (0..v.len()).map(|b| (v[b ^ mask] - v[b]).powi(2)).sum();
                worst = worst.max(d.sqrt());
            }
        }
        for s in dec.s_z.iter_rows() {
            let mask = s.to_u64() as usize;
            for v in &ground {
                let d: f64 = (0..v.len())
                    .map(|b| if (b & mask).count_ones() % 2 == 1 { (2.0 * v[b]).powi(2) } else { 0.0 })
                    .sum();
                worst = worst.max(d.sqrt());
            }
        }
        checks.push(DiagnosticCheck {
            name: "ground-space-stabilized",
            passed: Some(worst < 1e-6),
            detail: format!("{} ground vectors, max deviation {worst:.3e}", ground.len()),
        });
    } else {
        checks.push(skipped("ground-space-stabilized", "more than 12 qubits"));
    }
    Ok(PerronReport { checks })
}

fn skipped(name: &'static str, why: &str) -> DiagnosticCheck {
    DiagnosticCheck { name, passed: None, detail: format!("skipped: {why}") }
}

/// Comparison of λ2 of the full Hamiltonian with the smallest and largest
/// frustrated-sector ground energies. Reported, never asserted.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ProtofactReport {
    pub lambda2: f64,
    pub min_frustrated: f64,
    pub max_frustrated: f64,
    pub agrees_with_min: bool,
    pub agrees_with_max: bool,
}

pub fn protofact_check(code: &CssCode, tol: f64) -> Result<ProtofactReport, GapError> {
    let dec = decompose(code)?;
    if dec.m_z() == 0 || dec.m_z() > FULL_SWEEP_LIMIT {
        return Err(GapError::Unsupported("needs between 1 and 24 Z stabilizer generators".into()));
    }
    let solver = SectorSolver::new(code, EigenConfig::default().with_tol(tol), true)?;
    let zero = SectorLabel::zero_for(&dec);
    let ground = solver.solve::<f64>(&zero, 2).map_err(GapError::Ground)?;
    let mut tops = Vec::new();
    for c in 1u64..1 << dec.m_z() {
        let s = SectorLabel::new(BitVec::from_u64(dec.m_z(), c), BitVec::zeros(dec.m_x()));
        tops.push(solver.solve::<f64>(&s, 1).map_err(GapError::Ground)?.values[0]);
    }
    let min = tops.iter().copied().fold(f64::INFINITY, f64::min);
    let max = tops.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // λ2 over distinct sector levels: mixed sectors never beat pure ones
    let mut lambda2 = max.max(ground.values.get(1).copied().unwrap_or(f64::NEG_INFINITY));
    if dec.m_x() <= FULL_SWEEP_LIMIT {
        for c in 1u64..1 << dec.m_x() {
            let s = SectorLabel::new(BitVec::zeros(dec.m_z()), BitVec::from_u64(dec.m_x(), c));
            lambda2 = lambda2.max(solver.solve::<f64>(&s, 1).map_err(GapError::Ground)?.values[0]);
        }
    }
    let slack = 10.0 * tol * lambda2.abs().max(1.0);
    Ok(ProtofactReport {
        lambda2,
        min_frustrated: min,
        max_frustrated: max,
        agrees_with_min: (lambda2 - min).abs() <= slack,
        agrees_with_max: (lambda2 - max).abs() <= slack,
    })
}
