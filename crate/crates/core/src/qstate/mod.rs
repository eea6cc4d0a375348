//! States on finite-dimensional bipartite and tripartite systems.
//!
//! The types here carry their dimension tags with them; every operation that
//! splits a Hilbert space into factors reads them from [`Dims`].

mod io;
pub mod linalg;
pub(crate) mod ops;
mod sample;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use io::{load_state, save_state, StateFile};
pub use linalg::{eigh, Eigh};
pub use ops::{
    partial_trace, partial_trace_factors, partial_transpose, relative_entropy,
    relative_entropy_psd, schmidt_decompose, trace_norm, von_neumann_entropy,
};
pub use sample::{
    random_isometry, random_mixed, random_product_pure, random_pure, random_separable,
    random_unitary, Rng,
};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Unit-norm tolerance for pure states and Schmidt coefficients.
pub const TOL_NORM: f64 = 1e-10;
/// Trace tolerance for density matrices.
pub const TOL_TRACE: f64 = 1e-10;
/// Largest entrywise deviation from Hermiticity accepted.
pub const TOL_HERM: f64 = 1e-10;
/// Eigenvalues in `[-TOL_PSD, 0)` are clipped to zero; anything lower is rejected.
pub const TOL_PSD: f64 = 1e-9;

/// Labels of the tensor factors.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
    C,
}

impl Subsystem {
    fn index(self) -> usize {
        match self {
            Subsystem::A => 0,
            Subsystem::B => 1,
            Subsystem::C => 2,
        }
    }
}

/// Dimension tags `d_A x d_B (x d_C)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dims {
    pub a: usize,
    pub b: usize,
    pub c: Option<usize>,
}

impl Dims {
    pub fn bipartite(a: usize, b: usize) -> Result<Self> {
        Self::from_slice(&[a, b])
    }

    pub fn tripartite(a: usize, b: usize, c: usize) -> Result<Self> {
        Self::from_slice(&[a, b, c])
    }

    /// A single factor, tagged as `d x 1`.
    pub fn single(d: usize) -> Result<Self> {
        Self::from_slice(&[d, 1])
    }

    pub fn from_slice(dims: &[usize]) -> Result<Self> {
        if !(2..=3).contains(&dims.len()) {
            return Err(Error::DimensionMismatch(format!(
                "expected 2 or 3 subsystem dimensions, got {}",
                dims.len()
            )));
        }
        if dims.contains(&0) {
            return Err(Error::DimensionMismatch(format!(
                "subsystem dimensions must be positive, got {dims:?}"
            )));
        }
        Ok(Dims {
            a: dims[0],
            b: dims[1],
            c: dims.get(2).copied(),
        })
    }

    pub fn factors(&self) -> Vec<usize> {
        let mut f = vec![self.a, self.b];
        if let Some(c) = self.c {
            f.push(c);
        }
        f
    }

    pub fn total(&self) -> usize {
        self.a * self.b * self.c.unwrap_or(1)
    }

    pub fn is_tripartite(&self) -> bool {
        self.c.is_some()
    }

    pub fn factor(&self, s: Subsystem) -> Option<usize> {
        self.factors().get(s.index()).copied()
    }
}

impl std::fmt::Display for Dims {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.c {
            Some(c) => write!(f, "{}x{}x{}", self.a, self.b, c),
            None => write!(f, "{}x{}", self.a, self.b),
        }
    }
}

/// A normalized state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: CVector,
    dims: Dims,
}

impl PureState {
    pub fn new(amplitudes: CVector, dims: Dims) -> Result<Self> {
        if amplitudes.len() != dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "vector of length {} does not match dims {dims}",
                amplitudes.len()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > TOL_NORM {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(PureState { amplitudes, dims })
    }

    /// Normalizes `amplitudes` before wrapping them.
    pub fn normalized(amplitudes: CVector, dims: Dims) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.unscale(norm), dims)
    }

    /// Computational basis vector `|index>`.
    pub fn basis(index: usize, dims: Dims) -> Result<Self> {
        if index >= dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "basis index {index} out of range for {dims}"
            )));
        }
        let mut v = CVector::zeros(dims.total());
        v[index] = C64::new(1.0, 0.0);
        Self::new(v, dims)
    }

    /// `sum_i |i>|i> / sqrt(d)` on a `d x d` system.
    pub fn maximally_entangled(d: usize) -> Result<Self> {
        let dims = Dims::bipartite(d, d)?;
        let mut v = CVector::zeros(d * d);
        let amp = 1.0 / (d as f64).sqrt();
        for i in 0..d {
            v[i * d + i] = C64::new(amp, 0.0);
        }
        Self::normalized(v, dims)
    }

    /// `(|00> + |11>) / sqrt(2)`.
    pub fn bell() -> Self {
        Self::maximally_entangled(2).expect("2x2 is a valid shape")
    }

    /// `|a> (x) |b>`, with the first factor as subsystem A.
    pub fn product(a: &CVector, b: &CVector) -> Result<Self> {
        let dims = Dims::bipartite(a.len(), b.len())?;
        Self::normalized(a.kronecker(b), dims)
    }

    /// `self (x) other`, grouping the factors as described by `dims`.
    pub fn tensor(&self, other: &PureState, dims: Dims) -> Result<Self> {
        Self::normalized(self.amplitudes.kronecker(&other.amplitudes), dims)
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn projector(&self) -> DensityMatrix {
        let m = &self.amplitudes * self.amplitudes.adjoint();
        DensityMatrix::from_hermitian_unchecked(m, self.dims)
    }

    /// Applies `op` to the full vector and renormalizes.
    pub fn evolve(&self, op: &CMatrix) -> Result<Self> {
        if op.nrows() != self.dims.total() || op.ncols() != self.dims.total() {
            return Err(Error::DimensionMismatch("operator does not match state".into()));
        }
        Self::normalized(op * &self.amplitudes, self.dims)
    }
}

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
    dims: Dims,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace and positivity.
    pub fn new(matrix: CMatrix, dims: Dims) -> Result<Self> {
        let n = dims.total();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix does not match dims {dims}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        let herm = max_abs_diff(&matrix, &matrix.adjoint());
        if herm > TOL_HERM {
            return Err(Error::InvalidState(format!(
                "matrix is not Hermitian (deviation {herm:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TOL_TRACE || tr.im.abs() > TOL_TRACE {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let eig = eigh(&matrix);
        let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
        if min < -TOL_PSD {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:e} below -{TOL_PSD:e}"
            )));
        }
        Ok(DensityMatrix { matrix, dims })
    }

    /// Symmetrizes `matrix` and scales it to unit trace. The caller vouches
    /// for positivity.
    pub(crate) fn from_hermitian_unchecked(matrix: CMatrix, dims: Dims) -> Self {
        let mut m = hermitize(&matrix);
        let tr = m.trace().re;
        if tr != 0.0 && tr != 1.0 {
            m.unscale_mut(tr);
        }
        DensityMatrix { matrix: m, dims }
    }

    /// `I / d` on the given dims.
    pub fn maximally_mixed(dims: Dims) -> Self {
        let n = dims.total();
        let m = CMatrix::identity(n, n).unscale(n as f64);
        DensityMatrix { matrix: m, dims }
    }

    /// Real diagonal state.
    pub fn diagonal(probs: &[f64], dims: Dims) -> Result<Self> {
        let d = DVector::from_iterator(probs.len(), probs.iter().map(|&p| C64::new(p, 0.0)));
        Self::new(CMatrix::from_diagonal(&d), dims)
    }

    /// `p |Phi+><Phi+| + (1 - p) I/4`.
    pub fn werner(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("Werner weight {p} outside [0, 1]")));
        }
        let bell = PureState::bell().projector();
        let mixed = DensityMatrix::maximally_mixed(bell.dims);
        Self::new(
            bell.matrix.scale(p) + mixed.matrix.scale(1.0 - p),
            bell.dims,
        )
    }

    /// Convex combination `sum_k w_k rho_k` of states with equal dims.
    pub fn mixture(weights: &[f64], states: &[&DensityMatrix]) -> Result<Self> {
        let first = states
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty mixture".into()))?;
        if weights.len() != states.len() {
            return Err(Error::InvalidParameter("weights and states differ in length".into()));
        }
        let n = first.dims.total();
        let mut m = CMatrix::zeros(n, n);
        for (w, s) in weights.iter().zip(states) {
            if s.dims != first.dims {
                return Err(Error::DimensionMismatch("mixture of different dims".into()));
            }
            if *w < 0.0 {
                return Err(Error::InvalidParameter(format!("negative weight {w}")));
            }
            m += s.matrix.scale(*w);
        }
        Self::new(m, first.dims)
    }

    /// `self (x) other` with the given grouping.
    pub fn tensor(&self, other: &DensityMatrix, dims: Dims) -> Result<Self> {
        let m = self.matrix.kronecker(&other.matrix);
        if m.nrows() != dims.total() {
            return Err(Error::DimensionMismatch("tensor product does not match dims".into()));
        }
        Ok(Self::from_hermitian_unchecked(m, dims))
    }

    /// Conjugates by a unitary acting on the full space.
    pub fn conjugate_by(&self, u: &CMatrix) -> Result<Self> {
        if u.nrows() != self.dims.total() || u.ncols() != self.dims.total() {
            return Err(Error::DimensionMismatch("unitary does not match state".into()));
        }
        Ok(Self::from_hermitian_unchecked(
            u * &self.matrix * u.adjoint(),
            self.dims,
        ))
    }

    /// Reinterprets the same matrix under other dimension tags.
    pub fn with_dims(&self, dims: Dims) -> Result<Self> {
        if dims.total() != self.dims.total() {
            return Err(Error::DimensionMismatch(format!(
                "cannot retag {} as {dims}",
                self.dims
            )));
        }
        Ok(DensityMatrix {
            matrix: self.matrix.clone(),
            dims,
        })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Eigenvalues in ascending order. Values below the eigensolver's
    /// roundoff floor (`n * eps`) are set to exactly zero.
    pub fn spectrum(&self) -> Vec<f64> {
        let floor = self.matrix.nrows() as f64 * f64::EPSILON;
        eigh(&self.matrix)
            .values
            .iter()
            .map(|&v| if v < floor { 0.0 } else { v })
            .collect()
    }

    pub fn purity(&self) -> f64 {
        // Tr rho^2 = ||rho||_F^2 for Hermitian rho
        self.matrix.norm_squared()
    }

    /// Whether the largest eigenvalue is 1 up to `tol`.
    pub fn is_pure(&self, tol: f64) -> bool {
        let spec = self.spectrum();
        spec.last().is_some_and(|&top| top >= 1.0 - tol)
    }

    /// The dominant eigenvector as a pure state.
    pub fn principal_state(&self) -> PureState {
        let eig = eigh(&self.matrix);
        let top = eig.vectors.column(eig.values.len() - 1).into_owned();
        PureState::normalized(top, self.dims).expect("eigenvectors have unit norm")
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        (&self.matrix - &other.matrix).norm()
    }
}

pub(crate) fn hermitize(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub(crate) fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Embeds `op` on subsystem `side` of a bipartite space: `op (x) I` or `I (x) op`.
pub fn local_operator(op: &CMatrix, side: Subsystem, dims: Dims) -> Result<CMatrix> {
    let (da, db) = (dims.a, dims.b);
    match side {
        Subsystem::A if op.nrows() == da && op.ncols() == da => {
            Ok(op.kronecker(&CMatrix::identity(db, db)))
        }
        Subsystem::B if op.nrows() == db && op.ncols() == db => {
            Ok(CMatrix::identity(da, da).kronecker(op))
        }
        _ => Err(Error::DimensionMismatch(format!(
            "{}x{} operator cannot act on side {side:?} of {dims}",
            op.nrows(),
            op.ncols()
        ))),
    }
}
