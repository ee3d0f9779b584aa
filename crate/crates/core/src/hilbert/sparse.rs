use nalgebra::{Complex, DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use super::{cplx, re, HilbertError, Real};

/// Square complex CSR matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOperator<T: Real> {
    mat: CsrMatrix<Complex<T>>,
    /// Set when the operator stands for an observable; Hermiticity is
    /// checked on construction through [`SparseOperator::observable`].
    pub observable: bool,
}

impl<T: Real> SparseOperator<T> {
    pub fn zeros(dim: usize) -> Self {
        Self { mat: CsrMatrix::zeros(dim, dim), observable: false }
    }

    pub fn identity(dim: usize) -> Self {
        Self { mat: CsrMatrix::identity(dim), observable: false }
    }

    pub fn from_triplets(dim: usize, entries: impl IntoIterator<Item = (usize, usize, Complex<T>)>) -> Self {
        let mut coo = CooMatrix::new(dim, dim);
        for (r, c, v) in entries {
            if v != Complex::new(T::zero(), T::zero()) {
                coo.push(r, c, v);
            }
        }
        Self { mat: CsrMatrix::from(&coo), observable: false }.pruned()
    }

    pub fn diagonal(values: impl IntoIterator<Item = Complex<T>>) -> Self {
        let v: Vec<_> = values.into_iter().collect();
        let n = v.len();
        Self::from_triplets(n, v.into_iter().enumerate().map(|(i, x)| (i, i, x)))
    }

    pub fn from_dense(m: &DMatrix<Complex<T>>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "square matrix expected");
        let n = m.nrows();
        let mut t = Vec::new();
        for r in 0..n {
            for c in 0..n {
                t.push((r, c, m[(r, c)]));
            }
        }
        Self::from_triplets(n, t)
    }

    /// Marks the operator as an observable after checking Hermiticity.
    pub fn observable(mut self, tol: T) -> Result<Self, HilbertError> {
        let d = self.hermiticity_defect();
        if d > tol {
            return Err(HilbertError::NotHermitian { what: "observable".into(), defect: d.to_f64().unwrap_or(f64::NAN) });
        }
        self.observable = true;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.mat.nnz()
    }

    pub fn csr(&self) -> &CsrMatrix<Complex<T>> {
        &self.mat
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, &Complex<T>)> {
        self.mat.triplet_iter()
    }

    fn pruned(self) -> Self {
        let zero = Complex::new(T::zero(), T::zero());
        if self.mat.values().iter().all(|v| *v != zero) {
            return self;
        }
        let n = self.dim();
        let mut coo = CooMatrix::new(n, n);
        for (r, c, v) in self.mat.triplet_iter() {
            if *v != zero {
                coo.push(r, c, *v);
            }
        }
        Self { mat: CsrMatrix::from(&coo), observable: self.observable }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { mat: &self.mat + &o.mat, observable: false }.pruned()
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { mat: &self.mat - &o.mat, observable: false }.pruned()
    }

    pub fn scale(&self, k: Complex<T>) -> Self {
        let mut mat = self.mat.clone();
        for v in mat.values_mut() {
            *v *= k;
        }
        Self { mat, observable: false }.pruned()
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self { mat: &self.mat * &o.mat, observable: false }.pruned()
    }

    pub fn commutator(&self, o: &Self) -> Self {
        self.mul(o).sub(&o.mul(self))
    }

    pub fn adjoint(&self) -> Self {
        let mut mat = self.mat.transpose();
        for v in mat.values_mut() {
            *v = v.conj();
        }
        Self { mat, observable: self.observable }
    }

    pub fn frobenius_norm(&self) -> T {
        self.mat.values().iter().fold(T::zero(), |acc, v| acc + v.norm_sqr()).sqrt()
    }

    /// `‖A − A†‖_F / max(‖A‖_F, 1)`.
    pub fn hermiticity_defect(&self) -> T {
        let d = self.sub(&self.adjoint()).frobenius_norm();
        d / self.frobenius_norm().max(T::one())
    }

    pub fn is_zero(&self) -> bool {
        self.mat.nnz() == 0
    }

    pub fn matvec(&self, x: &DVector<Complex<T>>) -> DVector<Complex<T>> {
        let mut y = DVector::from_element(self.dim(), cplx(T::zero(), T::zero()));
        let (offsets, cols, vals) = (self.mat.row_offsets(), self.mat.col_indices(), self.mat.values());
        for r in 0..self.dim() {
            let mut acc = cplx(T::zero(), T::zero());
            for k in offsets[r]..offsets[r + 1] {
                acc += vals[k] * x[cols[k]];
            }
            y[r] = acc;
        }
        y
    }

    /// `⟨ψ|A|ψ⟩` for a normalized `ψ`.
    pub fn expectation(&self, psi: &DVector<Complex<T>>) -> Complex<T> {
        psi.dotc(&self.matvec(psi))
    }

    pub fn to_dense(&self) -> DMatrix<Complex<T>> {
        let n = self.dim();
        let mut m = DMatrix::from_element(n, n, cplx(T::zero(), T::zero()));
        for (r, c, v) in self.mat.triplet_iter() {
            m[(r, c)] = *v;
        }
        m
    }

    /// Principal submatrix on `idx`.
    pub fn restrict(&self, idx: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim()];
        for (k, &i) in idx.iter().enumerate() {
            pos[i] = k;
        }
        let t: Vec<_> = self
            .mat
            .triplet_iter()
            .filter(|(r, c, _)| pos[*r] != usize::MAX && pos[*c] != usize::MAX)
            .map(|(r, c, v)| (pos[r], pos[c], *v))
            .collect();
        Self::from_triplets(idx.len(), t)
    }

    /// Sum of `|a_rc|²` over entries connecting `idx` to its complement.
    pub fn leakage(&self, idx: &[usize]) -> T {
        let mut inside = vec![false; self.dim()];
        for &i in idx {
            inside[i] = true;
        }
        self.mat
            .triplet_iter()
            .filter(|(r, c, _)| inside[*r] != inside[*c])
            .fold(T::zero(), |acc, (_, _, v)| acc + v.norm_sqr())
    }

    /// `A ⊗ 1_d`.
    pub fn kron_identity(&self, d: usize) -> Self {
        let t = self.mat.triplet_iter().flat_map(|(r, c, v)| (0..d).map(move |k| (r * d + k, c * d + k, *v)));
        Self::from_triplets(self.dim() * d, t.collect::<Vec<_>>())
    }

    /// `1_d ⊗ A`.
    pub fn identity_kron(&self, d: usize) -> Self {
        let n = self.dim();
        let t = (0..d).flat_map(|k| self.mat.triplet_iter().map(move |(r, c, v)| (k * n + r, k * n + c, *v)));
        Self::from_triplets(n * d, t.collect::<Vec<_>>())
    }

    /// Largest eigenvalue magnitude bound (max absolute row sum).
    pub fn norm_bound(&self) -> T {
        let (offsets, vals) = (self.mat.row_offsets(), self.mat.values());
        (0..self.dim())
            .map(|r| vals[offsets[r]..offsets[r + 1]].iter().fold(T::zero(), |a, v| a + v.norm_sqr().sqrt()))
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// `‖a − b‖_F / max(‖b‖_F, floor)`.
pub fn relative_frobenius<T: Real>(a: &SparseOperator<T>, b: &SparseOperator<T>) -> T {
    let floor: T = re(1e-300);
    a.sub(b).frobenius_norm() / b.frobenius_norm().max(floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(r: f64, i: f64) -> Complex<f64> {
        Complex::new(r, i)
    }

    #[test]
    fn algebra_and_adjoint() {
        let a = SparseOperator::from_triplets(2, [(0, 1, c(1.0, 2.0))]);
        let ad = a.adjoint();
        assert_eq!(ad.to_dense()[(1, 0)], c(1.0, -2.0));
        let h = a.add(&ad);
        assert!(h.hermiticity_defect() < 1e-15);
        assert!(a.hermiticity_defect() > 0.5);
        assert!(a.clone().observable(1e-12).is_err());
        let n = a.mul(&ad);
        assert_eq!(n.to_dense()[(0, 0)], c(5.0, 0.0));
        assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn kron_layout() {
        let a = SparseOperator::from_triplets(2, [(0, 1, c(1.0, 0.0))]);
        let k = a.kron_identity(3);
        assert_eq!(k.dim(), 6);
        assert_eq!(k.to_dense()[(2, 5)], c(1.0, 0.0));
        let k2 = a.identity_kron(3);
        assert_eq!(k2.to_dense()[(4, 5)], c(1.0, 0.0));
    }

    #[test]
    fn restrict_and_leakage() {
        let a = SparseOperator::from_triplets(3, [(0, 0, c(1.0, 0.0)), (0, 2, c(3.0, 0.0)), (1, 1, c(2.0, 0.0))]);
        let r = a.restrict(&[0, 1]);
        assert_eq!(r.nnz(), 2);
        assert_eq!(a.leakage(&[0, 1]), 9.0);
        let v = DVector::from_vec(vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(a.expectation(&v), c(1.0, 0.0));
    }
}
