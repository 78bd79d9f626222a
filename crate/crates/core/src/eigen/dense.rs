use nalgebra::DMatrix;

use super::{EigenError, SymmetricOperator};
use crate::scalar::Real;

/// Largest dimension accepted by the dense routines.
pub const DENSE_CAP: usize = 4096;

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Real> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds from row-major entries; fails unless the matrix is exactly symmetric.
    pub fn from_rows(rows: &[Vec<T>]) -> Result<Self, EigenError<T>> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != n {
                return Err(EigenError::Shape(format!("row {i} has {} entries, expected {n}", r.len())));
            }
            m.data[i * n..(i + 1) * n].copy_from_slice(r);
        }
        if !m.is_symmetric() {
            return Err(EigenError::Shape("matrix is not symmetric".into()));
        }
        Ok(m)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    /// Sets entry (i, j) only; callers keep the matrix symmetric.
    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = self.data[i * self.n + j] + v;
    }

    /// Sets (i, j) and (j, i).
    pub fn set_sym(&mut self, i: usize, j: usize, v: T) {
        self.set(i, j, v);
        self.set(j, i, v);
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn trace(&self) -> T {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// Principal submatrix on the given index set.
    pub fn principal(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(idx.len());
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m.set(a, b, self.get(i, j));
            }
        }
        m
    }

    pub fn scaled(&self, c: T) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|&x| x * c).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).abs().f64())
            .fold(0.0, f64::max)
    }

    fn to_nalgebra(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).f64())
    }
}

impl<T: Real> SymmetricOperator<T> for SymMatrix<T> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[T], y: &mut [T]) {
        for (i, out) in y.iter_mut().enumerate() {
            *out = self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum();
        }
    }
}

/// Eigenvalues with their eigenvectors.
pub type Eigh<T> = (Vec<T>, Vec<Vec<T>>);

/// Full eigendecomposition: eigenvalues ascending, eigenvectors as the
/// matching columns (returned one vector per entry).
pub fn dense_eigh<T: Real>(m: &SymMatrix<T>) -> Result<Eigh<T>, EigenError<T>> {
    if m.dim() > DENSE_CAP {
        return Err(EigenError::DimensionCap { dim: m.dim(), cap: DENSE_CAP });
    }
    let eig = m.to_nalgebra().symmetric_eigen();
    let mut order: Vec<usize> = (0..m.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| T::lit(eig.eigenvalues[i])).collect();
    let vectors = order
        .iter()
        .map(|&i| eig.eigenvectors.column(i).iter().map(|&x| T::lit(x)).collect())
        .collect();
    Ok((values, vectors))
}

/// All eigenvalues in ascending order.
pub fn dense_spectrum<T: Real>(m: &SymMatrix<T>) -> Result<Vec<T>, EigenError<T>> {
    if m.dim() > DENSE_CAP {
        return Err(EigenError::DimensionCap { dim: m.dim(), cap: DENSE_CAP });
    }
    let mut values: Vec<f64> = m.to_nalgebra().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values.into_iter().map(T::lit).collect())
}

/// Materializes any operator as a dense matrix by applying it to basis vectors.
pub fn densify<T: Real, Op: SymmetricOperator<T> + ?Sized>(op: &Op) -> SymMatrix<T> {
    let n = op.dim();
    let mut m = SymMatrix::zeros(n);
    let mut e = vec![T::zero(); n];
    let mut col = vec![T::zero(); n];
    for j in 0..n {
        e[j] = T::one();
        op.apply_into(&e, &mut col);
        e[j] = T::zero();
        for (i, &v) in col.iter().enumerate() {
            m.set(i, j, v);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identity_spectrum() {
        let s = dense_spectrum(&SymMatrix::<f64>::identity(5)).unwrap();
        assert!(s.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn trace_equals_eigenvalue_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 50;
        let mut m = SymMatrix::<f64>::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                m.set_sym(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let s = dense_spectrum(&m).unwrap();
        assert!((s.iter().sum::<f64>() - m.trace()).abs() < 1e-9);
        assert!(s.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenvectors_satisfy_definition() {
        let m = SymMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 2.0]]).unwrap();
        let (vals, vecs): (Vec<f64>, _) = dense_eigh(&m).unwrap();
        for (l, v) in vals.iter().zip(&vecs) {
            let mut mv = vec![0.0; 3];
            m.apply_into(v, &mut mv);
            for i in 0..3 {
                assert!((mv[i] - l * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rejects_asymmetric_and_oversized() {
        assert!(SymMatrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).is_err());
        let big = SymMatrix::<f32>::zeros(DENSE_CAP + 1);
        assert!(matches!(dense_spectrum(&big), Err(EigenError::DimensionCap { .. })));
    }
}
