//! CSS gauge codes: data model, lattice model builders, and the text file format.
//!
//! Lattice qubits are indexed row-major: `i*l + j` in 2D and `i*l*l + j*l + k`
//! in 3D, all with periodic boundary conditions.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::f2::{BitMatrix, BitVec};

#[derive(Debug, Error)]
pub enum CodeError {
    #[error("invalid model parameter: {0}")]
    InvalidParameter(String),
    #[error("invalid code: {0}")]
    Invalid(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid permutation: {0}")]
    Permutation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum PauliType {
    X,
    Z,
}

/// A Pauli operator without phase, in symplectic form.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliWord {
    pub x_part: BitVec,
    pub z_part: BitVec,
}

impl PauliWord {
    pub fn x_type(x: BitVec) -> Self {
        let n = x.len();
        Self {
            x_part: x,
            z_part: BitVec::zeros(n),
        }
    }

    pub fn z_type(z: BitVec) -> Self {
        let n = z.len();
        Self {
            x_part: BitVec::zeros(n),
            z_part: z,
        }
    }

    /// True when the two words anticommute.
    pub fn anticommutes(&self, other: &PauliWord) -> bool {
        self.x_part.dot(&other.z_part) ^ self.z_part.dot(&other.x_part)
    }
}

/// Number of ones in a bit vector.
pub fn weight(v: &BitVec) -> usize {
    v.weight()
}

/// A CSS gauge code on `n` qubits, together with per-generator coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CssCode {
    pub name: String,
    pub n: usize,
    pub g_x: BitMatrix,
    pub g_z: BitMatrix,
    pub weights_x: Vec<f64>,
    pub weights_z: Vec<f64>,
    /// Preferred stabilizer generators of X type, used to choose the
    /// generator basis for single-frustration searches. May be empty.
    pub stabilizer_hints_x: BitMatrix,
    pub stabilizer_hints_z: BitMatrix,
}

/// Non-fatal findings from [`CssCode::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CodeWarning {
    DuplicateRow { kind: PauliType, first: usize, duplicate: usize },
}

impl std::fmt::Display for CodeWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CodeWarning::DuplicateRow { kind, first, duplicate } => write!(
                f,
                "{kind:?} generator {duplicate} duplicates generator {first}"
            ),
        }
    }
}

impl CssCode {
    /// Builds a code with unit coefficients and validates it.
    pub fn new(name: impl Into<String>, n: usize, g_x: BitMatrix, g_z: BitMatrix) -> Result<Self, CodeError> {
        let code = Self {
            name: name.into(),
            n,
            weights_x: vec![1.0; g_x.rows()],
            weights_z: vec![1.0; g_z.rows()],
            stabilizer_hints_x: BitMatrix::empty(n),
            stabilizer_hints_z: BitMatrix::empty(n),
            g_x,
            g_z,
        };
        code.validate()?;
        Ok(code)
    }

    pub fn with_weights(mut self, weights_x: Vec<f64>, weights_z: Vec<f64>) -> Result<Self, CodeError> {
        self.weights_x = weights_x;
        self.weights_z = weights_z;
        self.validate()?;
        Ok(self)
    }

    /// Attaches preferred stabilizer generators. Each X hint must commute
    /// with every Z generator and vice versa.
    pub fn with_stabilizer_hints(mut self, x: BitMatrix, z: BitMatrix) -> Result<Self, CodeError> {
        self.stabilizer_hints_x = x;
        self.stabilizer_hints_z = z;
        self.validate()?;
        Ok(self)
    }

    /// Convenience constructor from bit strings, used by fixtures.
    pub fn from_strs(name: &str, x_rows: &[&str], z_rows: &[&str]) -> Result<Self, CodeError> {
        let n = x_rows
            .first()
            .or(z_rows.first())
            .map(|r| r.len())
            .ok_or_else(|| CodeError::Invalid("code has no generators".into()))?;
        let parse = |rows: &[&str]| {
            BitMatrix::from_strs(n, rows).map_err(|e| CodeError::Invalid(e.to_string()))
        };
        Self::new(name, n, parse(x_rows)?, parse(z_rows)?)
    }

    /// Checks structural invariants; returns warnings for legal but suspicious input.
    pub fn validate(&self) -> Result<Vec<CodeWarning>, CodeError> {
        if self.g_x.cols() != self.n || self.g_z.cols() != self.n {
            return Err(CodeError::Invalid(format!(
                "generator matrices have {} and {} columns, expected n = {}",
                self.g_x.cols(),
                self.g_z.cols(),
                self.n
            )));
        }
        if self.weights_x.len() != self.g_x.rows() || self.weights_z.len() != self.g_z.rows() {
            return Err(CodeError::Invalid("one coefficient per generator is required".into()));
        }
        if self.weights_x.iter().chain(&self.weights_z).any(|w| !w.is_finite()) {
            return Err(CodeError::Invalid("generator coefficients must be finite".into()));
        }
        for (kind, hints, other) in [
            (PauliType::X, &self.stabilizer_hints_x, &self.g_z),
            (PauliType::Z, &self.stabilizer_hints_z, &self.g_x),
        ] {
            if hints.cols() != self.n {
                return Err(CodeError::Invalid(format!("{kind:?} stabilizer hints must have n = {} columns", self.n)));
            }
            for r in 0..hints.rows() {
                let h = hints.row(r);
                if h.is_zero() || other.mul_vec(&h).weight() != 0 {
                    return Err(CodeError::Invalid(format!(
                        "{kind:?} stabilizer hint {r} is trivial or fails to commute with the gauge group"
                    )));
                }
            }
        }
        let mut warnings = Vec::new();
        for (kind, m) in [(PauliType::X, &self.g_x), (PauliType::Z, &self.g_z)] {
            let mut seen: HashMap<&[u64], usize> = HashMap::new();
            for r in 0..m.rows() {
                if m.row_is_zero(r) {
                    return Err(CodeError::Invalid(format!("{kind:?} generator {r} is the identity")));
                }
                if let Some(&first) = seen.get(m.row_words(r)) {
                    warnings.push(CodeWarning::DuplicateRow { kind, first, duplicate: r });
                } else {
                    seen.insert(m.row_words(r), r);
                }
            }
        }
        Ok(warnings)
    }

    pub fn num_generators(&self) -> usize {
        self.g_x.rows() + self.g_z.rows()
    }

    /// Generator `i` in the combined ordering: X rows first, then Z rows.
    pub fn generator(&self, i: usize) -> (PauliType, BitVec, f64) {
        if i < self.g_x.rows() {
            (PauliType::X, self.g_x.row(i), self.weights_x[i])
        } else {
            let j = i - self.g_x.rows();
            (PauliType::Z, self.g_z.row(j), self.weights_z[j])
        }
    }

    /// Restricts the code to a subset of generators (indices in the combined
    /// X-then-Z ordering) on the same qubits.
    pub fn subcode(&self, name: impl Into<String>, generators: &[usize]) -> CssCode {
        let nx = self.g_x.rows();
        let xs: Vec<usize> = generators.iter().copied().filter(|&i| i < nx).collect();
        let zs: Vec<usize> = generators.iter().filter(|&&i| i >= nx).map(|&i| i - nx).collect();
        CssCode {
            name: name.into(),
            n: self.n,
            g_x: self.g_x.select_rows(&xs),
            g_z: self.g_z.select_rows(&zs),
            weights_x: xs.iter().map(|&i| self.weights_x[i]).collect(),
            weights_z: zs.iter().map(|&i| self.weights_z[i]).collect(),
            stabilizer_hints_x: BitMatrix::empty(self.n),
            stabilizer_hints_z: BitMatrix::empty(self.n),
        }
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> CssCode {
        let mut out = self.clone();
        out.weights_x.iter_mut().for_each(|w| *w *= c);
        out.weights_z.iter_mut().for_each(|w| *w *= c);
        out
    }

    pub fn is_self_dual(&self) -> bool {
        self.g_x == self.g_z
    }

    /// Serializes to the line-oriented `gaugecode v1` format.
    pub fn to_text(&self) -> String {
        let mut out = format!("gaugecode v1 n={} name={}\n", self.n, self.name);
        for (tag, m, w) in [("X", &self.g_x, &self.weights_x), ("Z", &self.g_z, &self.weights_z)] {
            for (row, &weight) in m.iter_rows().zip(w) {
                let _ = write!(out, "{tag} {row}");
                if weight != 1.0 {
                    let _ = write!(out, " weight={weight}");
                }
                out.push('\n');
            }
        }
        for (tag, m) in [("SX", &self.stabilizer_hints_x), ("SZ", &self.stabilizer_hints_z)] {
            for r in m.iter_rows() {
                let _ = writeln!(out, "{tag} {r}");
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, CodeError> {
        let perr = |line: usize, message: String| CodeError::Parse { line, message };
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or_else(|| perr(1, "missing header".into()))?;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("gaugecode") || tokens.next() != Some("v1") {
            return Err(perr(hline, "header must start with `gaugecode v1`".into()));
        }
        let mut n = None;
        let mut name = String::new();
        for tok in tokens {
            if let Some(v) = tok.strip_prefix("n=") {
                n = Some(v.parse::<usize>().map_err(|e| perr(hline, format!("bad qubit count: {e}")))?);
            } else if let Some(v) = tok.strip_prefix("name=") {
                name = v.to_string();
            } else {
                return Err(perr(hline, format!("unknown header field `{tok}`")));
            }
        }
        let n = n.ok_or_else(|| perr(hline, "header is missing n=<N>".into()))?;

        let mut g_x = BitMatrix::empty(n);
        let mut g_z = BitMatrix::empty(n);
        let mut weights_x = Vec::new();
        let mut weights_z = Vec::new();
        let mut hints_x = BitMatrix::empty(n);
        let mut hints_z = BitMatrix::empty(n);
        for (lineno, line) in lines {
            let mut tokens = line.split_whitespace();
            let tag = tokens.next().unwrap_or_default();
            let bits = tokens
                .next()
                .ok_or_else(|| perr(lineno, "missing bit string".into()))?;
            let row: BitVec = bits.parse().map_err(|e| perr(lineno, format!("{e}")))?;
            if row.len() != n {
                return Err(perr(lineno, format!("row has length {} but n = {n}", row.len())));
            }
            if tag == "SX" || tag == "SZ" {
                if let Some(tok) = tokens.next() {
                    return Err(perr(lineno, format!("unexpected token `{tok}` after a stabilizer hint")));
                }
                if tag == "SX" { hints_x.push_row(&row) } else { hints_z.push_row(&row) }
                continue;
            }
            let mut weight = 1.0;
            for tok in tokens {
                let v = tok
                    .strip_prefix("weight=")
                    .ok_or_else(|| perr(lineno, format!("unexpected token `{tok}`")))?;
                weight = v.parse().map_err(|e| perr(lineno, format!("bad weight: {e}")))?;
            }
            match tag {
                "X" => {
                    g_x.push_row(&row);
                    weights_x.push(weight);
                }
                "Z" => {
                    g_z.push_row(&row);
                    weights_z.push(weight);
                }
                other => return Err(perr(lineno, format!("unknown generator type `{other}`"))),
            }
        }
        let code = CssCode {
            name,
            n,
            g_x,
            g_z,
            weights_x,
            weights_z,
            stabilizer_hints_x: hints_x,
            stabilizer_hints_z: hints_z,
        };
        code.validate()?;
        Ok(code)
    }
}

pub fn load_code(path: impl AsRef<Path>) -> Result<CssCode, CodeError> {
    CssCode::parse(&std::fs::read_to_string(path)?)
}

pub fn save_code(code: &CssCode, path: impl AsRef<Path>) -> Result<(), CodeError> {
    std::fs::write(path, code.to_text())?;
    Ok(())
}

/// A permutation of qubits: `image[q]` is where qubit `q` is sent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, CodeError> {
        let mut seen = vec![false; image.len()];
        for &i in &image {
            if i >= image.len() || seen[i] {
                return Err(CodeError::Permutation(format!(
                    "{image:?} is not a bijection on 0..{}",
                    image.len()
                )));
            }
            seen[i] = true;
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self { image: (0..n).collect() }
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn apply(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.image.len());
        BitVec::from_support(v.len(), v.support().map(|q| self.image[q]))
    }

    pub fn apply_rows(&self, m: &BitMatrix) -> BitMatrix {
        let rows: Vec<BitVec> = m.iter_rows().map(|r| self.apply(&r)).collect();
        BitMatrix::from_rows(m.cols(), &rows).expect("permutation preserves length")
    }

    /// Parses whitespace-separated images, one permutation per line.
    pub fn parse_list(text: &str, n: usize) -> Result<Vec<Permutation>, CodeError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let image: Vec<usize> = line
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<_, _>>()
                .map_err(|e| CodeError::Parse { line: i + 1, message: e.to_string() })?;
            if image.len() != n {
                return Err(CodeError::Parse {
                    line: i + 1,
                    message: format!("permutation has {} entries, expected {n}", image.len()),
                });
            }
            out.push(Permutation::new(image)?);
        }
        Ok(out)
    }
}

fn rows_as_multiset(m: &BitMatrix) -> HashMap<Vec<u64>, usize> {
    let mut out = HashMap::new();
    for r in 0..m.rows() {
        *out.entry(m.row_words(r).to_vec()).or_insert(0) += 1;
    }
    out
}

/// True iff permuting the columns of `g_x` by `perm` gives `g_z` as a
/// multiset of rows.
pub fn check_weak_self_duality(code: &CssCode, perm: &Permutation) -> Result<bool, CodeError> {
    if perm.len() != code.n {
        return Err(CodeError::Permutation(format!(
            "permutation on {} points for a code on {} qubits",
            perm.len(),
            code.n
        )));
    }
    if code.g_x.rows() != code.g_z.rows() {
        return Ok(false);
    }
    Ok(rows_as_multiset(&perm.apply_rows(&code.g_x)) == rows_as_multiset(&code.g_z))
}

/// True iff `perm` maps the X generators onto themselves and the Z
/// generators onto themselves (as multisets).
pub fn is_code_symmetry(code: &CssCode, perm: &Permutation) -> bool {
    perm.len() == code.n
        && rows_as_multiset(&perm.apply_rows(&code.g_x)) == rows_as_multiset(&code.g_x)
        && rows_as_multiset(&perm.apply_rows(&code.g_z)) == rows_as_multiset(&code.g_z)
}

fn matrix_from_supports(n: usize, supports: impl IntoIterator<Item = Vec<usize>>) -> BitMatrix {
    let mut m = BitMatrix::empty(n);
    for s in supports {
        m.push_row(&BitVec::from_support(n, s));
    }
    m
}

fn build(name: String, n: usize, xs: BitMatrix, zs: BitMatrix) -> CssCode {
    CssCode::new(name, n, xs, zs).expect("model builders emit valid codes")
}

fn with_hints(code: CssCode, hx: BitMatrix, hz: BitMatrix) -> CssCode {
    code.with_stabilizer_hints(hx, hz).expect("model hints commute with the gauge group")
}

/// Sites of two adjacent rows (`rows == true`) or columns of the `l×l` torus.
fn line_pair_2d(l: usize, a: usize, rows: bool) -> Vec<usize> {
    (0..l)
        .flat_map(|t| if rows { [idx2(l, a, t), idx2(l, a + 1, t)] } else { [idx2(l, t, a), idx2(l, t, a + 1)] })
        .collect()
}

/// Transverse field Ising chain: `X_i` and `Z_i Z_{i+1}`.
pub fn ising_1d(n: usize) -> Result<CssCode, CodeError> {
    if n < 3 {
        return Err(CodeError::InvalidParameter(format!("ising1d needs n >= 3, got {n}")));
    }
    let xs = matrix_from_supports(n, (0..n).map(|i| vec![i]));
    let zs = matrix_from_supports(n, (0..n).map(|i| vec![i, (i + 1) % n]));
    let all = matrix_from_supports(n, [(0..n).collect()]);
    Ok(with_hints(build(format!("ising1d-{n}"), n, xs, zs), all, BitMatrix::empty(n)))
}

/// XY chain: `X_i X_{i+1}` and `Z_i Z_{i+1}`.
pub fn xy_1d(n: usize) -> Result<CssCode, CodeError> {
    if n < 4 || n % 2 == 1 {
        return Err(CodeError::InvalidParameter(format!(
            "xy1d is defined for even n >= 4 (the even-n chain), got {n}"
        )));
    }
    let pairs = || (0..n).map(|i| vec![i, (i + 1) % n]);
    let all = || matrix_from_supports(n, [(0..n).collect()]);
    let code = build(format!("xy1d-{n}"), n, matrix_from_supports(n, pairs()), matrix_from_supports(n, pairs()));
    Ok(with_hints(code, all(), all()))
}

fn idx2(l: usize, i: usize, j: usize) -> usize {
    (i % l) * l + (j % l)
}

fn idx3(l: usize, i: usize, j: usize, k: usize) -> usize {
    (i % l) * l * l + (j % l) * l + (k % l)
}

/// 2D XY-plaquette model: weight-four X and Z plaquettes on the `l×l` torus.
pub fn xy_plaquette_2d(l: usize) -> Result<CssCode, CodeError> {
    if l < 2 || l % 2 == 1 {
        return Err(CodeError::InvalidParameter(format!(
            "xy-plaquette needs even l >= 2, got {l}"
        )));
    }
    let n = l * l;
    let plaquettes = || {
        (0..l).flat_map(move |i| {
            (0..l).map(move |j| {
                vec![idx2(l, i, j), idx2(l, i + 1, j), idx2(l, i, j + 1), idx2(l, i + 1, j + 1)]
            })
        })
    };
    // l-1 adjacent column pairs and l-2 adjacent row pairs per type
    let hints = || {
        matrix_from_supports(
            n,
            (0..l - 1)
                .map(|j| line_pair_2d(l, j, false))
                .chain((0..l.saturating_sub(2)).map(|i| line_pair_2d(l, i, true))),
        )
    };
    let code = build(
        format!("xy-plaquette-{l}"),
        n,
        matrix_from_supports(n, plaquettes()),
        matrix_from_supports(n, plaquettes()),
    );
    Ok(with_hints(code, hints(), hints()))
}

/// 2D compass model: `X_{ij} X_{i,j+1}` and `Z_{ij} Z_{i+1,j}`.
pub fn compass_2d(l: usize) -> Result<CssCode, CodeError> {
    if l < 2 {
        return Err(CodeError::InvalidParameter(format!("compass2d needs l >= 2, got {l}")));
    }
    let n = l * l;
    let cells = || (0..l).flat_map(move |i| (0..l).map(move |j| (i, j)));
    let xs = matrix_from_supports(n, cells().map(|(i, j)| vec![idx2(l, i, j), idx2(l, i, j + 1)]));
    let zs = matrix_from_supports(n, cells().map(|(i, j)| vec![idx2(l, i, j), idx2(l, i + 1, j)]));
    let hx = matrix_from_supports(n, (0..l - 1).map(|j| line_pair_2d(l, j, false)));
    let hz = matrix_from_supports(n, (0..l - 1).map(|i| line_pair_2d(l, i, true)));
    Ok(with_hints(build(format!("compass2d-{l}"), n, xs, zs), hx, hz))
}

/// 3D compass model: X pairs along the first two axes, Z pairs along the last two.
pub fn compass_3d(l: usize) -> Result<CssCode, CodeError> {
    if l < 2 {
        return Err(CodeError::InvalidParameter(format!("compass3d needs l >= 2, got {l}")));
    }
    let n = l * l * l;
    let sites: Vec<(usize, usize, usize)> = (0..l)
        .flat_map(|i| (0..l).flat_map(move |j| (0..l).map(move |k| (i, j, k))))
        .collect();
    let pair = |a: (usize, usize, usize), b: (usize, usize, usize)| {
        vec![idx3(l, a.0, a.1, a.2), idx3(l, b.0, b.1, b.2)]
    };
    let xs = matrix_from_supports(
        n,
        sites
            .iter()
            .map(|&(i, j, k)| pair((i, j, k), (i + 1, j, k)))
            .chain(sites.iter().map(|&(i, j, k)| pair((i, j, k), (i, j + 1, k)))),
    );
    let zs = matrix_from_supports(
        n,
        sites
            .iter()
            .map(|&(i, j, k)| pair((i, j, k), (i, j + 1, k)))
            .chain(sites.iter().map(|&(i, j, k)| pair((i, j, k), (i, j, k + 1)))),
    );
    // adjacent planes normal to the first axis (X) and to the last axis (Z)
    let plane_pair = |a: usize, axis: usize| -> Vec<usize> {
        sites
            .iter()
            .filter(|s| [s.0, s.1, s.2][axis] == a || [s.0, s.1, s.2][axis] == a + 1)
            .map(|&(i, j, k)| idx3(l, i, j, k))
            .collect()
    };
    let hx = matrix_from_supports(n, (0..l - 1).map(|a| plane_pair(a, 0)));
    let hz = matrix_from_supports(n, (0..l - 1).map(|a| plane_pair(a, 2)));
    Ok(with_hints(build(format!("compass3d-{l}"), n, xs, zs), hx, hz))
}

/// Transpose of the `l×l` lattice, `(i, j) -> (j, i)`.
pub fn transpose_2d(l: usize) -> Permutation {
    Permutation {
        image: (0..l * l).map(|q| idx2(l, q % l, q / l)).collect(),
    }
}

/// Swap of the first and last lattice axes, `(i, j, k) -> (k, j, i)`.
pub fn swap_axes_3d(l: usize) -> Permutation {
    Permutation {
        image: (0..l * l * l)
            .map(|q| {
                let (i, j, k) = (q / (l * l), (q / l) % l, q % l);
                idx3(l, k, j, i)
            })
            .collect(),
    }
}

/// Lattice translations of the `l×l` torus by one site along each axis.
pub fn translations_2d(l: usize) -> Vec<Permutation> {
    let n = l * l;
    vec![
        Permutation { image: (0..n).map(|q| idx2(l, q / l + 1, q % l)).collect() },
        Permutation { image: (0..n).map(|q| idx2(l, q / l, q % l + 1)).collect() },
    ]
}

/// Lattice translations of the `l×l×l` torus by one site along each axis.
pub fn translations_3d(l: usize) -> Vec<Permutation> {
    let n = l * l * l;
    let split = |q: usize| (q / (l * l), (q / l) % l, q % l);
    vec![
        Permutation { image: (0..n).map(|q| { let (i, j, k) = split(q); idx3(l, i + 1, j, k) }).collect() },
        Permutation { image: (0..n).map(|q| { let (i, j, k) = split(q); idx3(l, i, j + 1, k) }).collect() },
        Permutation { image: (0..n).map(|q| { let (i, j, k) = split(q); idx3(l, i, j, k + 1) }).collect() },
    ]
}

/// The bundled 15-qubit gauge color code.
pub const GCC15_TEXT: &str = include_str!("../data/gcc15.code");

pub fn gauge_color_code_15() -> CssCode {
    CssCode::parse(GCC15_TEXT).expect("bundled gcc15.code is valid")
}

/// Built-in model families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Model {
    Ising1d,
    Xy1d,
    XyPlaquette,
    Compass2d,
    Compass3d,
    Gcc,
}

impl Model {
    pub const ALL: [Model; 6] = [
        Model::Ising1d,
        Model::Xy1d,
        Model::XyPlaquette,
        Model::Compass2d,
        Model::Compass3d,
        Model::Gcc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Model::Ising1d => "ising1d",
            Model::Xy1d => "xy1d",
            Model::XyPlaquette => "xy-plaquette",
            Model::Compass2d => "compass2d",
            Model::Compass3d => "compass3d",
            Model::Gcc => "gcc",
        }
    }

    pub fn size_meaning(self) -> &'static str {
        match self {
            Model::Ising1d | Model::Xy1d => "chain length n",
            Model::XyPlaquette | Model::Compass2d | Model::Compass3d => "lattice side l",
            Model::Gcc => "qubit count (15 bundled; others via --file)",
        }
    }

    pub fn build(self, size: usize) -> Result<CssCode, CodeError> {
        match self {
            Model::Ising1d => ising_1d(size),
            Model::Xy1d => xy_1d(size),
            Model::XyPlaquette => xy_plaquette_2d(size),
            Model::Compass2d => compass_2d(size),
            Model::Compass3d => compass_3d(size),
            Model::Gcc if size == 15 => Ok(gauge_color_code_15()),
            Model::Gcc => Err(CodeError::InvalidParameter(format!(
                "only the n=15 gauge color code is bundled; load n={size} with a code file"
            ))),
        }
    }

    /// The permutation witnessing weak self-duality, when the family has one.
    pub fn duality(self, size: usize) -> Option<Permutation> {
        match self {
            Model::Ising1d => None,
            Model::Xy1d | Model::XyPlaquette => Some(Permutation::identity(size.pow(match self {
                Model::Xy1d => 1,
                _ => 2,
            }))),
            Model::Compass2d => Some(transpose_2d(size)),
            Model::Compass3d => Some(swap_axes_3d(size)),
            Model::Gcc => Some(Permutation::identity(15)),
        }
    }
}

impl std::str::FromStr for Model {
    type Err = CodeError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| CodeError::InvalidParameter(format!("unknown model `{s}`")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(m: &BitMatrix) -> Vec<String> {
        m.iter_rows().map(|r| r.to_string()).collect()
    }

    #[test]
    fn ising_rows() {
        let c = ising_1d(4).unwrap();
        assert_eq!(rows(&c.g_x), ["1000", "0100", "0010", "0001"]);
        assert_eq!(rows(&c.g_z), ["1100", "0110", "0011", "1001"]);
        assert!(ising_1d(2).is_err());
    }

    #[test]
    fn xy_rows_and_parity_restriction() {
        let c = xy_1d(4).unwrap();
        assert_eq!(rows(&c.g_x), ["1100", "0110", "0011", "1001"]);
        assert_eq!(c.g_x, c.g_z);
        let err = xy_1d(5).unwrap_err().to_string();
        assert!(err.contains("even"), "{err}");
    }

    #[test]
    fn plaquettes_have_weight_four() {
        let c = xy_plaquette_2d(4).unwrap();
        assert_eq!(c.g_x.rows(), 16);
        assert!((0..16).all(|r| c.g_x.row_weight(r) == 4 && c.g_z.row_weight(r) == 4));
        assert!(c.is_self_dual());
        // plaquette at (1,2) covers (1,2),(2,2),(1,3),(2,3)
        let p = c.g_x.row(4 + 2);
        assert_eq!(p.support().collect::<Vec<_>>(), vec![6, 7, 10, 11]);
        assert!(xy_plaquette_2d(3).is_err());
    }

    #[test]
    fn compass_supports() {
        let c = compass_2d(3).unwrap();
        // X along a row, Z along a column
        assert_eq!(c.g_x.row(2).support().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(c.g_z.row(7).support().collect::<Vec<_>>(), vec![1, 7]);
        assert!(compass_2d(1).is_err());
        let c3 = compass_3d(2).unwrap();
        assert_eq!(c3.g_x.rows(), 16);
        assert_eq!(c3.g_z.rows(), 16);
    }

    #[test]
    fn builders_are_deterministic() {
        for m in [Model::Ising1d, Model::Xy1d, Model::XyPlaquette, Model::Compass2d, Model::Compass3d] {
            let size = if m == Model::Compass3d { 2 } else { 4 };
            assert_eq!(m.build(size).unwrap().to_text(), m.build(size).unwrap().to_text());
        }
    }

    #[test]
    fn weak_self_duality() {
        let xy = xy_1d(4).unwrap();
        assert!(check_weak_self_duality(&xy, &Permutation::identity(4)).unwrap());
        let c = compass_2d(3).unwrap();
        assert!(check_weak_self_duality(&c, &transpose_2d(3)).unwrap());
        assert!(!check_weak_self_duality(&c, &Permutation::identity(9)).unwrap());
        let c3 = compass_3d(3).unwrap();
        assert!(check_weak_self_duality(&c3, &swap_axes_3d(3)).unwrap());
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(check_weak_self_duality(&c, &Permutation::identity(4)).is_err());
    }

    #[test]
    fn lattice_translations_are_symmetries() {
        let c = compass_2d(4).unwrap();
        assert!(translations_2d(4).iter().all(|p| is_code_symmetry(&c, p)));
        assert!(!is_code_symmetry(&c, &transpose_2d(4)));
        let c3 = compass_3d(3).unwrap();
        assert!(translations_3d(3).iter().all(|p| is_code_symmetry(&c3, p)));
    }

    #[test]
    fn text_round_trip() {
        let c = ising_1d(4).unwrap();
        assert_eq!(CssCode::parse(&c.to_text()).unwrap(), c);
        let w = c.clone().with_weights(vec![0.5, 1.0, 2.25, 1.0], vec![1.0, 1.0, -0.125, 1.0]).unwrap();
        assert_eq!(CssCode::parse(&w.to_text()).unwrap(), w);
    }

    #[test]
    fn parse_errors_name_the_line() {
        let text = "gaugecode v1 n=4 name=t\nX 1100\n# comment\nZ 110\n";
        match CssCode::parse(text) {
            Err(CodeError::Parse { line, message }) => {
                assert_eq!(line, 4);
                assert!(message.contains("length"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(matches!(
            CssCode::parse("gaugecode v1 n=2 name=t\nY 11\n"),
            Err(CodeError::Parse { line: 2, .. })
        ));
        assert!(matches!(CssCode::parse("gaugecode v2 n=2\n"), Err(CodeError::Parse { line: 1, .. })));
        assert!(matches!(
            CssCode::parse("gaugecode v1 n=2 name=t\nX 00\n"),
            Err(CodeError::Invalid(_))
        ));
    }

    #[test]
    fn duplicates_are_kept_and_flagged() {
        let c = compass_2d(2).unwrap();
        assert_eq!(c.g_x.rows(), 4);
        let warnings = c.validate().unwrap();
        assert!(!warnings.is_empty());
    }

    #[test]
    fn gcc15_file() {
        let c = gauge_color_code_15();
        assert_eq!(c.n, 15);
        assert_eq!(c.g_x.rows(), 18);
        assert!(c.is_self_dual());
        assert!((0..18).all(|r| c.g_x.row_weight(r) == 4));
        assert!(c.validate().unwrap().is_empty());
    }

    #[test]
    fn pauli_commutation() {
        let a = PauliWord::x_type("1100".parse().unwrap());
        let b = PauliWord::z_type("0110".parse().unwrap());
        let c = PauliWord::z_type("1100".parse().unwrap());
        assert!(a.anticommutes(&b));
        assert!(!a.anticommutes(&c));
        assert_eq!(weight(&"1011".parse().unwrap()), 3);
    }
}
