//! Commuting ideals: connected components of the anticommutation graph of
//! the gauge generators, and sector spectra assembled from them.

use rayon::prelude::*;
use thiserror::Error;

use crate::blocks::{build_block, BlockError, SectorLabel};
use crate::code::CssCode;
use crate::decompose::{decompose, DecompositionError, LstrDecomposition};
use crate::eigen::{topk_symmetric, EigenConfig, EigenError};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum IdealError<T: std::fmt::Debug> {
    #[error("ideal {part}: {source}")]
    Decomposition {
        part: usize,
        #[source]
        source: DecompositionError,
    },
    #[error("ideal {part}: {source}")]
    Block {
        part: usize,
        #[source]
        source: BlockError,
    },
    #[error("ideal {part}: {source}")]
    Eigen {
        part: usize,
        #[source]
        source: EigenError<T>,
    },
    #[error("reduced gauge dimensions of the ideals sum to {sum}, full code has r = {r}")]
    TensorFactor { sum: usize, r: usize },
    #[error("generators {a} and {b} lie in different ideals but anticommute")]
    CrossCommutation { a: usize, b: usize },
    #[error("{0}")]
    Shape(String),
}

/// Generators split into mutually commuting parts, each with its own
/// restricted code and decomposition.
#[derive(Debug, Clone)]
pub struct IdealPartition {
    /// Generator indices in the combined X-then-Z ordering, ascending.
    pub parts: Vec<Vec<usize>>,
    pub codes: Vec<CssCode>,
    pub decs: Vec<LstrDecomposition>,
}

impl IdealPartition {
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Index of the part containing generator `g`.
    pub fn part_of(&self, g: usize) -> Option<usize> {
        self.parts.iter().position(|p| p.binary_search(&g).is_ok())
    }
}

fn anticommute(code: &CssCode, a: usize, b: usize) -> bool {
    let nx = code.g_x.rows();
    match (a < nx, b < nx) {
        (true, false) => code.g_x.row(a).dot(&code.g_z.row(b - nx)),
        (false, true) => code.g_z.row(a - nx).dot(&code.g_x.row(b)),
        _ => false,
    }
}

/// Connected components of the anticommutation graph, ordered by smallest
/// member. Also decomposes each part and checks that the reduced gauge
/// dimensions add up to the full code's.
pub fn partition_ideals<T: Real>(code: &CssCode) -> Result<IdealPartition, IdealError<T>> {
    let full = decompose(code).map_err(|source| IdealError::Decomposition { part: usize::MAX, source })?;
    partition_ideals_with(code, &full)
}

/// As [`partition_ideals`], reusing an existing decomposition of `code`.
pub fn partition_ideals_with<T: Real>(
    code: &CssCode,
    full: &LstrDecomposition,
) -> Result<IdealPartition, IdealError<T>> {
    let nx = code.g_x.rows();
    let ng = code.num_generators();
    // adjacency: X row i touches Z row j when their supports overlap oddly
    let cross = code.g_x.mul_transpose(&code.g_z).expect("equal widths");
    let neighbours = |g: usize| -> Vec<usize> {
        if g < nx {
            (0..code.g_z.rows()).filter(|&j| cross.get(g, j)).map(|j| nx + j).collect()
        } else {
            (0..nx).filter(|&i| cross.get(i, g - nx)).collect()
        }
    };

    let mut label = vec![usize::MAX; ng];
    let mut parts: Vec<Vec<usize>> = Vec::new();
    for start in 0..ng {
        if label[start] != usize::MAX {
            continue;
        }
        let id = parts.len();
        let mut stack = vec![start];
        let mut members = Vec::new();
        label[start] = id;
        while let Some(g) = stack.pop() {
            members.push(g);
            for h in neighbours(g) {
                if label[h] == usize::MAX {
                    label[h] = id;
                    stack.push(h);
                }
            }
        }
        members.sort_unstable();
        parts.push(members);
    }

    for a in 0..ng {
        for b in a + 1..ng {
            if label[a] != label[b] && anticommute(code, a, b) {
                return Err(IdealError::CrossCommutation { a, b });
            }
        }
    }

    let codes: Vec<CssCode> = parts
        .iter()
        .enumerate()
        .map(|(i, p)| code.subcode(format!("{}#ideal{i}", code.name), p))
        .collect();
    let decs = codes
        .iter()
        .enumerate()
        .map(|(part, c)| decompose(c).map_err(|source| IdealError::Decomposition { part, source }))
        .collect::<Result<Vec<_>, _>>()?;

    let sum: usize = decs.iter().map(|d| d.r()).sum();
    if sum != full.r() {
        return Err(IdealError::TensorFactor { sum, r: full.r() });
    }
    Ok(IdealPartition { parts, codes, decs })
}

/// The sector of ideal `part` that a full-code sector maps to: the syndrome
/// of the full sector's representatives against the ideal's stabilizers.
pub fn sector_for_ideal<T: Real>(
    sector: &SectorLabel,
    dec: &LstrDecomposition,
    part: usize,
    partition: &IdealPartition,
) -> Result<SectorLabel, IdealError<T>> {
    sector.check(dec).map_err(|source| IdealError::Block { part, source })?;
    let sub = partition
        .decs
        .get(part)
        .ok_or_else(|| IdealError::Shape(format!("no ideal with index {part}")))?;
    let tx = sector.x_vector(dec);
    let tz = sector.z_vector(dec);
    // T_X rows of the ideal pair with its S_Z rows, so the syndrome is the
    // coefficient vector directly.
    Ok(SectorLabel::new(sub.s_z.mul_vec(&tx), sub.s_x.mul_vec(&tz)))
}

/// Top eigenvalues of a sector obtained by combining per-ideal spectra.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IdealSpectrum<T> {
    /// Descending.
    pub values: Vec<T>,
    /// How many eigenvalues were computed for each ideal.
    pub depths: Vec<usize>,
    /// Per-ideal sector labels.
    pub sectors: Vec<SectorLabel>,
    /// Total operator applications across all ideals.
    pub matvecs: usize,
    /// Largest residual reported by any per-ideal solve.
    pub max_residual: f64,
}

struct IdealList<T> {
    values: Vec<T>,
    dim: usize,
}

impl<T: Real> IdealList<T> {
    fn complete(&self) -> bool {
        self.values.len() >= self.dim
    }
}

/// Top `k` of the sumset `{Σ_a x_a : x_a ∈ lists[a]}`, descending.
fn sumset_top<T: Real>(lists: &[&[T]], k: usize) -> Vec<T> {
    let mut acc = vec![T::zero()];
    for list in lists {
        let mut next: Vec<T> = Vec::with_capacity(acc.len() * list.len());
        for &a in &acc {
            for &b in *list {
                next.push(a + b);
            }
        }
        next.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
        next.truncate(k);
        acc = next;
    }
    acc
}

/// Top `k` eigenvalues of the full code's `sector` from per-ideal blocks.
///
/// Each ideal starts with `k + 2` eigenvalues. An ideal is deepened (its list
/// doubled) while some combination using one of its not-yet-computed
/// eigenvalues could still reach the current `k`-th best sum.
pub fn sector_spectrum_via_ideals<T: Real>(
    partition: &IdealPartition,
    dec: &LstrDecomposition,
    sector: &SectorLabel,
    k: usize,
    cfg: &EigenConfig,
) -> Result<IdealSpectrum<T>, IdealError<T>> {
    let sectors = (0..partition.len())
        .map(|a| sector_for_ideal::<T>(sector, dec, a, partition))
        .collect::<Result<Vec<_>, _>>()?;
    let blocks = (0..partition.len())
        .map(|a| {
            build_block::<T>(&partition.codes[a], &partition.decs[a], &sectors[a])
                .map_err(|source| IdealError::Block { part: a, source })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let total: usize = blocks.iter().map(|b| b.dimension()).fold(1usize, |p, d| p.saturating_mul(d));
    if k > total {
        return Err(IdealError::Eigen {
            part: usize::MAX,
            source: EigenError::DimensionTooSmall { dim: total, k },
        });
    }

    let mut matvecs = 0;
    let mut max_residual = 0.0f64;
    let solve = |a: usize, depth: usize| -> Result<(Vec<T>, usize, f64), IdealError<T>> {
        let depth = depth.min(blocks[a].dimension());
        let c = EigenConfig { k: depth, want_vectors: false, ..cfg.clone() };
        let r = topk_symmetric(&blocks[a], &c).map_err(|source| IdealError::Eigen { part: a, source })?;
        let worst = r.residuals.iter().copied().fold(0.0, f64::max);
        Ok((r.values, r.iterations, worst))
    };

    let initial: Vec<_> = (0..blocks.len()).into_par_iter().map(|a| solve(a, k + 2)).collect();
    let mut lists = Vec::with_capacity(blocks.len());
    for (a, res) in initial.into_iter().enumerate() {
        let (values, it, res) = res?;
        matvecs += it;
        max_residual = max_residual.max(res);
        lists.push(IdealList { values, dim: blocks[a].dimension() });
    }

    loop {
        let views: Vec<&[T]> = lists.iter().map(|l| l.values.as_slice()).collect();
        let top = sumset_top(&views, k);
        let best_total: T = lists.iter().map(|l| l.values[0]).sum();
        let mut deepen = Vec::new();
        for (a, l) in lists.iter().enumerate() {
            if l.complete() {
                continue;
            }
            let reachable = best_total - l.values[0] + *l.values.last().expect("non-empty");
            if top.len() < k || reachable > top[k - 1] {
                deepen.push(a);
            }
        }
        if deepen.is_empty() {
            return Ok(IdealSpectrum {
                values: top,
                depths: lists.iter().map(|l| l.values.len()).collect(),
                sectors,
                matvecs,
                max_residual,
            });
        }
        for a in deepen {
            let (values, it, res) = solve(a, 2 * lists[a].values.len())?;
            matvecs += it;
            max_residual = max_residual.max(res);
            lists[a].values = values;
        }
    }
}
