//! Reference computations written directly from the definitions, sharing no
//! code with the library beyond the matrix types.

#![allow(dead_code)]

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C;

pub type M = DMatrix<C>;

pub fn eigvals(m: &M) -> Vec<f64> {
    let h = (m + m.adjoint()).unscale(2.0);
    let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn apply_fn(m: &M, f: impl Fn(f64) -> f64) -> M {
    let h = (m + m.adjoint()).unscale(2.0);
    let e = SymmetricEigen::new(h);
    let d = M::from_diagonal(&e.eigenvalues.map(|x| C::new(f(x), 0.0)));
    &e.eigenvectors * d * e.eigenvectors.adjoint()
}

/// `rho^{T_A}` by explicit index swap: `<i j|.|k l> -> <k j|.|i l>`.
pub fn partial_transpose_a(rho: &M, da: usize, db: usize) -> M {
    M::from_fn(da * db, da * db, |r, c| {
        let (i, j) = (r / db, r % db);
        let (k, l) = (c / db, c % db);
        rho[(k * db + j, i * db + l)]
    })
}

pub fn negativity(rho: &M, da: usize, db: usize) -> f64 {
    eigvals(&partial_transpose_a(rho, da, db))
        .into_iter()
        .filter(|&x| x < 0.0)
        .map(|x| -x)
        .sum()
}

pub fn log_negativity(rho: &M, da: usize, db: usize) -> f64 {
    (1.0 + 2.0 * negativity(rho, da, db)).log2()
}

pub fn entropy_of(spectrum: &[f64]) -> f64 {
    spectrum.iter().filter(|&&x| x > 1e-15).map(|&x| -x * x.ln()).sum()
}

/// `Tr_B |psi><psi|` by reshaping the amplitudes into a `da x db` matrix.
pub fn reduced_a(psi: &[C], da: usize, db: usize) -> M {
    let m = M::from_fn(da, db, |i, j| psi[i * db + j]);
    &m * m.adjoint()
}

/// Two-qubit concurrence from the eigenvalues of
/// `R = sqrt(sqrt(rho) rho~ sqrt(rho))`, `rho~ = (Y x Y) rho* (Y x Y)`.
pub fn wootters_concurrence(rho: &M) -> f64 {
    let y = M::from_row_slice(
        2,
        2,
        &[C::new(0.0, 0.0), C::new(0.0, -1.0), C::new(0.0, 1.0), C::new(0.0, 0.0)],
    );
    let yy = y.kronecker(&y);
    let tilde = &yy * rho.map(|z| z.conj()) * &yy;
    let s = apply_fn(rho, |x| x.max(0.0).sqrt());
    let inner = &s * tilde * &s;
    let mut l: Vec<f64> = eigvals(&inner).into_iter().map(|x| x.max(0.0).sqrt()).collect();
    l.sort_by(|a, b| b.partial_cmp(a).unwrap());
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

pub fn wootters_eof(rho: &M) -> f64 {
    let c = wootters_concurrence(rho);
    let x = (1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0;
    entropy_of(&[x, 1.0 - x])
}

/// `Tr rho (ln rho - ln sigma)` for full-rank `sigma`.
pub fn relative_entropy(rho: &M, sigma: &M) -> f64 {
    let lr = apply_fn(rho, |x| if x > 1e-15 { x.ln() } else { 0.0 });
    let ls = apply_fn(sigma, |x| x.ln());
    (rho * (lr - ls)).trace().re
}
