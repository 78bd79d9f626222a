//! The (L,S,T,R) symplectic decomposition of a CSS gauge group.
//!
//! The construction runs in a fixed order: stabilizers first, then logical
//! operators, then the reduced gauge generators and the error operators
//! paired with the stabilizers. Each linear system is solved with the
//! zero-free-variable policy of [`crate::f2::solve`], so repeated runs give
//! bit-identical matrices.

use std::fmt;

use thiserror::Error;

use crate::code::CssCode;
use crate::f2::{mod_span_projector, solve, BitMatrix, F2Error};

#[derive(Debug, Error)]
pub enum DecompositionError {
    #[error("step `{step}` failed: {source}")]
    Step {
        step: &'static str,
        #[source]
        source: F2Error,
    },
    #[error("inconsistent gauge group: {0}")]
    Inconsistent(String),
}

fn step(step: &'static str) -> impl FnOnce(F2Error) -> DecompositionError {
    move |source| DecompositionError::Step { step, source }
}

/// Logical, stabilizer, error and reduced gauge generators.
///
/// Stacking `(L_X; S_X; T_X; R_X)` against `(L_Z; T_Z; S_Z; R_Z)` gives the
/// `n×n` identity under the GF(2) inner product: `S_X` pairs with `T_Z`,
/// `T_X` pairs with `S_Z`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LstrDecomposition {
    pub n: usize,
    pub l_x: BitMatrix,
    pub l_z: BitMatrix,
    pub s_x: BitMatrix,
    pub s_z: BitMatrix,
    /// One row per row of `s_z`.
    pub t_x: BitMatrix,
    /// One row per row of `s_x`.
    pub t_z: BitMatrix,
    pub r_x: BitMatrix,
    pub r_z: BitMatrix,
}

impl LstrDecomposition {
    pub fn k(&self) -> usize {
        self.l_x.rows()
    }

    pub fn m_x(&self) -> usize {
        self.s_x.rows()
    }

    pub fn m_z(&self) -> usize {
        self.s_z.rows()
    }

    pub fn r(&self) -> usize {
        self.r_x.rows()
    }

    /// `(L_X; S_X; T_X; R_X)`.
    pub fn left_stack(&self) -> BitMatrix {
        BitMatrix::vstack(&[&self.l_x, &self.s_x, &self.t_x, &self.r_x]).expect("shared width")
    }

    /// `(L_Z; T_Z; S_Z; R_Z)`.
    pub fn right_stack(&self) -> BitMatrix {
        BitMatrix::vstack(&[&self.l_z, &self.t_z, &self.s_z, &self.r_z]).expect("shared width")
    }

    pub fn dims(&self) -> Dims {
        Dims {
            n: self.n,
            k: self.k(),
            m_x: self.m_x(),
            m_z: self.m_z(),
            r: self.r(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct Dims {
    pub n: usize,
    pub k: usize,
    pub m_x: usize,
    pub m_z: usize,
    pub r: usize,
}

/// Stabilizer generators `(S_X, S_Z)` in reduced row echelon form.
///
/// `span(S_Z) = { v·G_Z : v·G_Z·G_Xᵀ = 0 }` and symmetrically for `S_X`.
pub fn find_stabilizers(g_x: &BitMatrix, g_z: &BitMatrix) -> Result<(BitMatrix, BitMatrix), F2Error> {
    let central = |own: &BitMatrix, other: &BitMatrix| -> Result<BitMatrix, F2Error> {
        // v ∈ ker((own·otherᵀ)ᵀ) as a row vector means v·own·otherᵀ = 0
        let comm = own.mul_transpose(other)?;
        let coeffs = comm.transpose().kernel();
        Ok(coeffs.mul(own)?.row_reduce().matrix)
    };
    Ok((central(g_x, g_z)?, central(g_z, g_x)?))
}

/// Computes the decomposition of `code`'s gauge group.
pub fn decompose(code: &CssCode) -> Result<LstrDecomposition, DecompositionError> {
    let n = code.n;
    let (g_x, g_z) = (&code.g_x, &code.g_z);

    let (s_x, s_z) = find_stabilizers(g_x, g_z).map_err(step("stabilizers"))?;

    let p_x = mod_span_projector(&s_x, n).map_err(step("projector P_X"))?;
    let p_z = mod_span_projector(&s_z, n).map_err(step("projector P_Z"))?;

    // logical Z: ker(G_X) modulo span(S_Z)
    let l_z = g_x
        .kernel()
        .mul(&p_z)
        .map_err(step("logical L_Z"))?
        .row_reduce()
        .matrix;
    let k = l_z.rows();

    let lz_gz = BitMatrix::vstack(&[&l_z, g_z]).map_err(step("logical L_X"))?;
    let rhs = BitMatrix::vstack(&[&BitMatrix::identity(k), &BitMatrix::zeros(g_z.rows(), k)])
        .map_err(step("logical L_X"))?;
    let l_x = solve(&lz_gz, &rhs).map_err(step("logical L_X"))?;

    let r_x = g_x.mul(&p_x).map_err(step("reduced R_X"))?.row_reduce().matrix;
    let r_z_aux = g_z.mul(&p_z).map_err(step("reduced R_Z (auxiliary)"))?.row_reduce().matrix;
    let r = r_x.rows();
    if r_z_aux.rows() != r {
        return Err(DecompositionError::Inconsistent(format!(
            "reduced gauge ranks differ: {} X-type vs {} Z-type",
            r,
            r_z_aux.rows()
        )));
    }
    let (m_x, m_z) = (s_x.rows(), s_z.rows());
    if k + m_x + m_z + r != n {
        return Err(DecompositionError::Inconsistent(format!(
            "k + m_x + m_z + r = {k} + {m_x} + {m_z} + {r} != n = {n}"
        )));
    }

    let a = BitMatrix::vstack(&[&l_z, &s_z, &r_z_aux]).map_err(step("errors T_X"))?;
    let rhs = BitMatrix::vstack(&[
        &BitMatrix::zeros(k, m_z),
        &BitMatrix::identity(m_z),
        &BitMatrix::zeros(r, m_z),
    ])
    .map_err(step("errors T_X"))?;
    let t_x = solve(&a, &rhs).map_err(step("errors T_X"))?;

    let left = BitMatrix::vstack(&[&l_x, &s_x, &t_x, &r_x]).map_err(step("errors T_Z"))?;
    let rhs = BitMatrix::vstack(&[
        &BitMatrix::zeros(k, m_x),
        &BitMatrix::identity(m_x),
        &BitMatrix::zeros(m_z + r, m_x),
    ])
    .map_err(step("errors T_Z"))?;
    let t_z = solve(&left, &rhs).map_err(step("errors T_Z"))?;

    let rhs = BitMatrix::vstack(&[&BitMatrix::zeros(k + m_x + m_z, r), &BitMatrix::identity(r)])
        .map_err(step("reduced R_Z"))?;
    let r_z = solve(&left, &rhs).map_err(step("reduced R_Z"))?;

    Ok(LstrDecomposition {
        n,
        l_x,
        l_z,
        s_x,
        s_z,
        t_x,
        t_z,
        r_x,
        r_z,
    })
}

/// Outcome of one named check in a [`VerifyReport`].
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    /// First offending `(row, row)` pair, when the check compares two stacks.
    pub offending: Option<(usize, usize)>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{} {}", if c.passed { "ok  " } else { "FAIL" }, c.name)?;
            if let Some((i, j)) = c.offending {
                write!(f, " (rows {i}, {j})")?;
            }
            if !c.detail.is_empty() {
                write!(f, ": {}", c.detail)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

fn first_mismatch(actual: &BitMatrix, expected: &BitMatrix) -> Option<(usize, usize)> {
    for i in 0..actual.rows() {
        for j in 0..actual.cols() {
            if actual.get(i, j) != expected.get(i, j) {
                return Some((i, j));
            }
        }
    }
    None
}

fn first_one(m: &BitMatrix) -> Option<(usize, usize)> {
    first_mismatch(m, &BitMatrix::zeros(m.rows(), m.cols()))
}

/// `span(a) ⊆ span(b)`.
fn span_contained(a: &BitMatrix, b: &BitMatrix) -> bool {
    let rb = b.rank();
    BitMatrix::vstack(&[b, a]).map(|m| m.rank() == rb).unwrap_or(false)
}

/// Checks every structural invariant of `dec` against `code`.
pub fn verify(dec: &LstrDecomposition, code: &CssCode) -> VerifyReport {
    let mut checks = Vec::new();
    let n = code.n;
    let shapes_ok = [&dec.l_x, &dec.l_z, &dec.s_x, &dec.s_z, &dec.t_x, &dec.t_z, &dec.r_x, &dec.r_z]
        .iter()
        .all(|m| m.cols() == n)
        && dec.l_x.rows() == dec.l_z.rows()
        && dec.t_x.rows() == dec.s_z.rows()
        && dec.t_z.rows() == dec.s_x.rows()
        && dec.r_x.rows() == dec.r_z.rows();
    checks.push(CheckResult {
        name: "shapes",
        passed: shapes_ok,
        offending: None,
        detail: if shapes_ok { String::new() } else { "row/column counts do not pair up".into() },
    });
    if !shapes_ok {
        return VerifyReport { checks };
    }

    let d = dec.dims();
    let count_ok = d.k + d.m_x + d.m_z + d.r == n;
    checks.push(CheckResult {
        name: "n = k + m_x + m_z + r",
        passed: count_ok,
        offending: None,
        detail: format!("{} + {} + {} + {} vs n = {n}", d.k, d.m_x, d.m_z, d.r),
    });

    let product = dec.left_stack().mul_transpose(&dec.right_stack()).expect("shared width");
    let off = if product.rows() == n { first_mismatch(&product, &BitMatrix::identity(n)) } else { Some((0, 0)) };
    checks.push(CheckResult {
        name: "block identity",
        passed: off.is_none(),
        offending: off,
        detail: String::new(),
    });

    for (name, parts, g) in [
        ("span(S_X) + span(R_X) = span(G_X)", [&dec.s_x, &dec.r_x], &code.g_x),
        ("span(S_Z) + span(R_Z) = span(G_Z)", [&dec.s_z, &dec.r_z], &code.g_z),
    ] {
        let sum = BitMatrix::vstack(&parts).expect("shared width");
        let ok = span_contained(&sum, g) && span_contained(g, &sum);
        checks.push(CheckResult { name, passed: ok, offending: None, detail: String::new() });
    }

    for (name, a, b) in [
        ("S_Z commutes with G_X", &dec.s_z, &code.g_x),
        ("S_X commutes with G_Z", &dec.s_x, &code.g_z),
        ("R_Z T_X^T = 0", &dec.r_z, &dec.t_x),
    ] {
        let off = first_one(&a.mul_transpose(b).expect("shared width"));
        checks.push(CheckResult { name, passed: off.is_none(), offending: off, detail: String::new() });
    }

    VerifyReport { checks }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::code::{compass_2d, ising_1d, xy_1d, xy_plaquette_2d, CssCode};

    fn ex3() -> CssCode {
        CssCode::from_strs("ex3", &["1100", "0011"], &["1010", "0101"]).unwrap()
    }

    fn same_span(a: &BitMatrix, b: &BitMatrix) -> bool {
        span_contained(a, b) && span_contained(b, a)
    }

    #[test]
    fn ex3_stabilizers() {
        let c = ex3();
        let (s_x, s_z) = find_stabilizers(&c.g_x, &c.g_z).unwrap();
        assert_eq!(s_x.to_string(), "1111");
        assert_eq!(s_z.to_string(), "1111");
    }

    #[test]
    fn ising_stabilizers() {
        let c = ising_1d(4).unwrap();
        let (s_x, s_z) = find_stabilizers(&c.g_x, &c.g_z).unwrap();
        assert_eq!(s_x.to_string(), "1111");
        assert_eq!(s_z.rows(), 0);
    }

    #[test]
    fn all_central_generators_are_stabilizers() {
        let c = CssCode::from_strs("toric-ish", &["1111"], &["1100", "0011"]).unwrap();
        let (s_x, s_z) = find_stabilizers(&c.g_x, &c.g_z).unwrap();
        assert!(same_span(&s_x, &c.g_x));
        assert!(same_span(&s_z, &c.g_z));
        let dec = decompose(&c).unwrap();
        assert_eq!(dec.r(), 0);
        assert!(verify(&dec, &c).passed());
    }

    #[test]
    fn ex3_decomposition_matches_worked_example() {
        let c = ex3();
        let dec = decompose(&c).unwrap();
        assert_eq!(dec.dims(), Dims { n: 4, k: 1, m_x: 1, m_z: 1, r: 1 });
        assert!(verify(&dec, &c).passed(), "{}", verify(&dec, &c));
        // logical span {XIXI} and {ZZII}, modulo stabilizers and gauge
        let lx = BitMatrix::from_strs(4, &["1010"]).unwrap();
        let lz = BitMatrix::from_strs(4, &["1100"]).unwrap();
        let gx_plus = BitMatrix::vstack(&[&c.g_x, &dec.l_x]).unwrap();
        let gz_plus = BitMatrix::vstack(&[&c.g_z, &dec.l_z]).unwrap();
        assert!(span_contained(&lx, &gx_plus) && !span_contained(&lx, &c.g_x));
        assert!(span_contained(&lz, &gz_plus) && !span_contained(&lz, &c.g_z));
    }

    #[test]
    fn ex3_alternative_table_also_verifies() {
        // the hand-built table: L {XIXI, ZZII}, S {XXXX, ZZZZ}, T {ZZZI, IIIX}, R {XXII, ZIZI}
        let m = |s: &str| BitMatrix::from_strs(4, &[s]).unwrap();
        let dec = LstrDecomposition {
            n: 4,
            l_x: m("1010"),
            l_z: m("1100"),
            s_x: m("1111"),
            s_z: m("1111"),
            t_x: m("0001"),
            t_z: m("1110"),
            r_x: m("1100"),
            r_z: m("1010"),
        };
        let report = verify(&dec, &ex3());
        assert!(report.passed(), "{report}");
    }

    #[test]
    fn perturbed_decomposition_names_offending_rows() {
        let c = ex3();
        let mut dec = decompose(&c).unwrap();
        let col = (0..4).find(|&j| dec.t_x.get(0, j)).unwrap();
        dec.t_x.set(0, col, false);
        let report = verify(&dec, &c);
        assert!(!report.passed());
        let fail = report.checks.iter().find(|c| c.name == "block identity").unwrap();
        assert!(!fail.passed);
        // T_X is row k + m_x = 2 of the left stack
        assert_eq!(fail.offending.map(|(i, _)| i), Some(2));
    }

    #[test]
    fn model_dimensions() {
        for n in [3, 4, 5, 8] {
            let c = ising_1d(n).unwrap();
            let d = decompose(&c).unwrap();
            assert_eq!((d.k(), d.m_x(), d.m_z(), d.r()), (0, 1, 0, n - 1));
            assert!(verify(&d, &c).passed());
        }
        let d = decompose(&xy_1d(4).unwrap()).unwrap();
        assert_eq!((d.k(), d.m_x(), d.m_z(), d.r()), (0, 1, 1, 2));
        let d = decompose(&xy_plaquette_2d(4).unwrap()).unwrap();
        assert_eq!((d.k(), d.m_x(), d.m_z(), d.r()), (2, 5, 5, 4));
        let d = decompose(&compass_2d(4).unwrap()).unwrap();
        assert_eq!((d.k(), d.m_x(), d.m_z(), d.r()), (1, 3, 3, 9));
    }

    #[test]
    fn xy_plaquette_logical_column_operator() {
        let c = xy_plaquette_2d(4).unwrap();
        let dec = decompose(&c).unwrap();
        // Π_i X_{i,0}: the first column, qubits 0, 4, 8, 12
        let col = BitMatrix::from_strs(16, &["1000100010001000"]).unwrap();
        assert_eq!(col.row_weight(0), 4);
        assert!(c.g_z.mul_transpose(&col).unwrap().iter_rows().all(|r| r.is_zero()));
        let with_logicals = BitMatrix::vstack(&[&c.g_x, &dec.l_x]).unwrap();
        assert!(span_contained(&col, &with_logicals));
        assert!(!span_contained(&col, &c.g_x));
    }

    #[test]
    fn decomposition_is_deterministic() {
        let c = compass_2d(3).unwrap();
        assert_eq!(decompose(&c).unwrap(), decompose(&c).unwrap());
    }
}
