//! Small dense Hermitian helpers on top of nalgebra.

use nalgebra::{DVector, SymmetricEigen};

use super::{CMatrix, C64};

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: DVector<f64>,
    /// Column `k` is the eigenvector of `values[k]`.
    pub vectors: CMatrix,
}

impl Eigh {
    /// `sum_k f(mu_k) |v_k><v_k|`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for k in 0..n {
            let w = f(self.values[k]);
            scaled.column_mut(k).scale_mut(w);
        }
        &scaled * self.vectors.adjoint()
    }
}

/// Hermitian eigendecomposition. Only the lower triangle is trusted, so
/// callers should pass (numerically) Hermitian input.
pub fn eigh(m: &CMatrix) -> Eigh {
    let n = m.nrows();
    if n == 1 {
        return Eigh {
            values: DVector::from_element(1, m[(0, 0)].re),
            vectors: CMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
        };
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Eigh { values, vectors }
}

/// Eigenvalues only, ascending. Closed form for 2x2.
pub fn eigvalsh(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 2 {
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(1, 0)];
        let mean = 0.5 * (a + d);
        let half = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![mean - half, mean + half];
    }
    eigh(m).values.iter().copied().collect()
}

/// `||A^dagger A - I||_F`, the isometry residual of a column-orthonormal matrix.
pub fn isometry_residual(v: &CMatrix) -> f64 {
    let gram = v.adjoint() * v;
    (gram - CMatrix::identity(v.ncols(), v.ncols())).norm()
}

/// `x ln x` with `0 ln 0 = 0`.
pub(crate) fn xlogx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}
