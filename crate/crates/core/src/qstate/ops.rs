use nalgebra::{DMatrix, DVector};

use super::linalg::{eigh, xlogx};
use super::{CMatrix, CVector, DensityMatrix, Dims, PureState, Subsystem};
use crate::{Error, Result};

/// Traces out every factor not listed in `keep`.
///
/// The kept factors retain their relative order. A single kept factor is
/// tagged `d x 1`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[Subsystem]) -> Result<DensityMatrix> {
    let dims = rho.dims();
    let factors = dims.factors();
    let mut mask = vec![false; factors.len()];
    for s in keep {
        let idx = *s as usize;
        if idx >= factors.len() {
            return Err(Error::DimensionMismatch(format!(
                "subsystem {s:?} is not present in {dims}"
            )));
        }
        mask[idx] = true;
    }
    if !mask.iter().any(|&k| k) {
        return Err(Error::InvalidParameter("nothing to keep".into()));
    }
    let kept: Vec<usize> = factors
        .iter()
        .zip(&mask)
        .filter(|(_, &k)| k)
        .map(|(&d, _)| d)
        .collect();
    let out_dims = match kept.as_slice() {
        [d] => Dims::single(*d)?,
        other => Dims::from_slice(other)?,
    };
    let m = partial_trace_factors(rho.matrix(), &factors, &mask)?;
    Ok(DensityMatrix::from_hermitian_unchecked(m, out_dims))
}

/// Partial trace of an arbitrary square matrix over the factors whose
/// `keep` flag is false. Linear in `m`.
pub fn partial_trace_factors(m: &CMatrix, factors: &[usize], keep: &[bool]) -> Result<CMatrix> {
    let total: usize = factors.iter().product();
    if m.nrows() != total || m.ncols() != total || factors.len() != keep.len() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix does not split as {factors:?}",
            m.nrows(),
            m.ncols()
        )));
    }
    // split each full index into (kept index, traced index)
    let mut split = Vec::with_capacity(total);
    for full in 0..total {
        let mut rem = full;
        let (mut kept_idx, mut kept_stride) = (0, 1);
        let (mut traced_idx, mut traced_stride) = (0, 1);
        for (&d, &k) in factors.iter().zip(keep).rev() {
            let digit = rem % d;
            rem /= d;
            if k {
                kept_idx += digit * kept_stride;
                kept_stride *= d;
            } else {
                traced_idx += digit * traced_stride;
                traced_stride *= d;
            }
        }
        split.push((kept_idx, traced_idx));
    }
    let kept_dim: usize = factors
        .iter()
        .zip(keep)
        .filter(|(_, &k)| k)
        .map(|(&d, _)| d)
        .product();
    let mut out = CMatrix::zeros(kept_dim, kept_dim);
    for i in 0..total {
        let (ki, ti) = split[i];
        for j in 0..total {
            let (kj, tj) = split[j];
            if ti == tj {
                out[(ki, kj)] += m[(i, j)];
            }
        }
    }
    Ok(out)
}

/// Transposes the block indices of one bipartite factor.
///
/// This is a pure permutation of entries, so applying it twice returns the
/// input bit for bit.
pub fn partial_transpose(rho: &DensityMatrix, side: Subsystem) -> Result<CMatrix> {
    let dims = rho.dims();
    if dims.is_tripartite() {
        return Err(Error::DimensionMismatch(
            "partial transpose is defined here for bipartite states only".into(),
        ));
    }
    partial_transpose_matrix(rho.matrix(), dims.a, dims.b, side)
}

pub(crate) fn partial_transpose_matrix(
    m: &CMatrix,
    da: usize,
    db: usize,
    side: Subsystem,
) -> Result<CMatrix> {
    if m.nrows() != da * db || m.ncols() != da * db {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix does not split as {da}x{db}",
            m.nrows(),
            m.ncols()
        )));
    }
    let n = da * db;
    let mut out = CMatrix::zeros(n, n);
    for a1 in 0..da {
        for b1 in 0..db {
            for a2 in 0..da {
                for b2 in 0..db {
                    let v = m[(a1 * db + b1, a2 * db + b2)];
                    let (r, c) = match side {
                        Subsystem::A => (a2 * db + b1, a1 * db + b2),
                        Subsystem::B => (a1 * db + b2, a2 * db + b1),
                        Subsystem::C => {
                            return Err(Error::DimensionMismatch(
                                "no subsystem C in a bipartite state".into(),
                            ))
                        }
                    };
                    out[(r, c)] = v;
                }
            }
        }
    }
    Ok(out)
}

/// Schmidt form `|psi> = sum_i lambda_i |i_a>|i_b>`.
#[derive(Clone, Debug)]
pub struct SchmidtForm {
    /// Nonincreasing, nonnegative.
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<CVector>,
    pub right_vectors: Vec<CVector>,
    pub dims: Dims,
}

impl SchmidtForm {
    pub fn schmidt_rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&c| c > tol).count()
    }

    /// `sum_i lambda_i |i_a> (x) |i_b>`.
    pub fn reconstruct(&self) -> CVector {
        let n = self.dims.a * self.dims.b;
        let mut v = CVector::zeros(n);
        for ((&l, a), b) in self
            .coefficients
            .iter()
            .zip(&self.left_vectors)
            .zip(&self.right_vectors)
        {
            v += a.kronecker(b).scale(l);
        }
        v
    }
}

/// Schmidt decomposition via the SVD of the `d_A x d_B` coefficient matrix.
pub fn schmidt_decompose(psi: &PureState) -> Result<SchmidtForm> {
    let dims = psi.dims();
    if dims.is_tripartite() {
        return Err(Error::DimensionMismatch(
            "Schmidt decomposition needs a bipartite state".into(),
        ));
    }
    let (da, db) = (dims.a, dims.b);
    let coeff = DMatrix::from_fn(da, db, |i, j| psi.amplitudes()[i * db + j]);
    let svd = coeff.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left_vectors = order.iter().map(|&k| u.column(k).into_owned()).collect();
    // coeff = sum_k s_k u_k v_k^dagger, so the B vector is row k of V^dagger
    let right_vectors = order
        .iter()
        .map(|&k| DVector::from_iterator(db, v_t.row(k).iter().copied()))
        .collect();
    Ok(SchmidtForm {
        coefficients,
        left_vectors,
        right_vectors,
        dims,
    })
}

/// `Tr sqrt(M^dagger M)` of a Hermitian matrix: the sum of absolute eigenvalues.
pub fn trace_norm(m: &CMatrix) -> f64 {
    eigh(m).values.iter().map(|v| v.abs()).sum()
}

/// `-sum mu ln mu` in nats.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    -rho.spectrum().into_iter().map(xlogx).sum::<f64>()
}

/// `Tr[rho (ln rho - ln sigma)]` in nats, or `f64::INFINITY` when the support
/// of `rho` is not contained in that of `sigma`.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "relative entropy between {} and {}",
            rho.dims(),
            sigma.dims()
        )));
    }
    Ok(relative_entropy_psd(rho.matrix(), sigma.matrix()).max(0.0))
}

/// Relative entropy `Tr[a (ln a - ln b)]` of unnormalized positive
/// semidefinite matrices. May be negative when the traces differ.
pub fn relative_entropy_psd(a: &CMatrix, b: &CMatrix) -> f64 {
    let self_term: f64 = eigh(a).values.iter().map(|&x| xlogx(x.max(0.0))).sum();
    self_term + cross_entropy_psd(a, b)
}

/// Eigenvalues of `b` at or below this fraction of its largest eigenvalue
/// count as its kernel.
pub(crate) const KERNEL_REL_TOL: f64 = 1e-14;
/// Weight of `a` on the kernel of `b` tolerated before `-Tr[a ln b]` is infinite.
pub(crate) const LEAK_TOL: f64 = 1e-10;

/// `-Tr[a ln b]`, or `f64::INFINITY` when `a` has weight on the kernel of `b`.
pub(crate) fn cross_entropy_psd(a: &CMatrix, b: &CMatrix) -> f64 {
    let eb = eigh(b);
    let scale = eb.values.iter().copied().fold(0.0, f64::max).max(1.0);
    let kernel_tol = KERNEL_REL_TOL * scale;
    let mut cross = 0.0;
    let mut leak = 0.0;
    for k in 0..eb.values.len() {
        let v = eb.vectors.column(k);
        let weight = (v.adjoint() * a * v)[(0, 0)].re;
        let mu = eb.values[k];
        if mu > kernel_tol {
            cross -= weight * mu.ln();
        } else {
            leak += weight;
        }
    }
    if leak > LEAK_TOL {
        return f64::INFINITY;
    }
    cross
}

/// `||a b||_F`; zero iff the supports of PSD `a` and `b` are orthogonal.
pub(crate) fn product_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    (a * b).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_mixed, random_pure, Rng, C64};
    use approx::assert_abs_diff_eq;

    #[test]
    fn partial_trace_of_bell_is_maximally_mixed() {
        let rho = PureState::bell().projector();
        let ra = partial_trace(&rho, &[Subsystem::A]).unwrap();
        let expected = CMatrix::identity(2, 2).scale(0.5);
        assert!((ra.matrix() - expected).norm() < 1e-15);
        assert_eq!(ra.dims(), Dims::single(2).unwrap());
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let mut rng = Rng::new(3);
        let a = random_mixed(Dims::single(2).unwrap(), 2, &mut rng).unwrap();
        let b = random_mixed(Dims::single(3).unwrap(), 3, &mut rng).unwrap();
        let ab = a.tensor(&b, Dims::bipartite(2, 3).unwrap()).unwrap();
        let ra = partial_trace(&ab, &[Subsystem::A]).unwrap();
        let rb = partial_trace(&ab, &[Subsystem::B]).unwrap();
        assert!((ra.matrix() - a.matrix()).norm() < 1e-14);
        assert!((rb.matrix() - b.matrix()).norm() < 1e-14);
    }

    #[test]
    fn partial_trace_rejects_missing_subsystem() {
        let rho = PureState::bell().projector();
        assert!(matches!(
            partial_trace(&rho, &[Subsystem::C]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn tripartite_trace_keeps_order() {
        let mut rng = Rng::new(8);
        let a = random_mixed(Dims::single(2).unwrap(), 2, &mut rng).unwrap();
        let b = random_mixed(Dims::single(3).unwrap(), 2, &mut rng).unwrap();
        let c = random_mixed(Dims::single(2).unwrap(), 1, &mut rng).unwrap();
        let ab = a.tensor(&b, Dims::bipartite(2, 3).unwrap()).unwrap();
        let abc = ab.tensor(&c, Dims::tripartite(2, 3, 2).unwrap()).unwrap();
        let ac = partial_trace(&abc, &[Subsystem::A, Subsystem::C]).unwrap();
        let expected = a.tensor(&c, Dims::bipartite(2, 2).unwrap()).unwrap();
        assert!(ac.frobenius_distance(&expected) < 1e-14);
    }

    #[test]
    fn partial_transpose_of_bell_has_one_negative_eigenvalue() {
        let pt = partial_transpose(&PureState::bell().projector(), Subsystem::A).unwrap();
        let vals = eigh(&pt).values;
        let expected = [-0.5, 0.5, 0.5, 0.5];
        for (v, e) in vals.iter().zip(expected) {
            assert_abs_diff_eq!(*v, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn partial_transpose_is_an_exact_involution() {
        let mut rng = Rng::new(11);
        let rho = random_mixed(Dims::bipartite(2, 3).unwrap(), 4, &mut rng).unwrap();
        for side in [Subsystem::A, Subsystem::B] {
            let once = partial_transpose(&rho, side).unwrap();
            let twice = partial_transpose_matrix(&once, 2, 3, side).unwrap();
            assert_eq!(&twice, rho.matrix());
        }
    }

    #[test]
    fn schmidt_of_product_and_bell() {
        let s = schmidt_decompose(&PureState::basis(0, Dims::bipartite(2, 2).unwrap()).unwrap())
            .unwrap();
        assert_abs_diff_eq!(s.coefficients[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coefficients[1], 0.0, epsilon = 1e-15);
        let s = schmidt_decompose(&PureState::bell()).unwrap();
        for c in &s.coefficients {
            assert_abs_diff_eq!(*c, std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
        }
    }

    #[test]
    fn schmidt_reconstructs_random_state() {
        let mut rng = Rng::new(5);
        let psi = random_pure(Dims::bipartite(3, 2).unwrap(), &mut rng).unwrap();
        let s = schmidt_decompose(&psi).unwrap();
        assert!((s.reconstruct() - psi.amplitudes()).norm() < 1e-12);
        let sum: f64 = s.coefficients.iter().map(|c| c * c).sum();
        assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn trace_norm_examples() {
        assert_abs_diff_eq!(trace_norm(&CMatrix::identity(5, 5)), 5.0, epsilon = 1e-14);
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![
            C64::new(0.7, 0.0),
            C64::new(-0.3, 0.0),
        ]));
        assert_abs_diff_eq!(trace_norm(&d), 1.0, epsilon = 1e-15);
        let mut rng = Rng::new(9);
        let rho = random_mixed(Dims::bipartite(2, 2).unwrap(), 3, &mut rng).unwrap();
        assert_abs_diff_eq!(trace_norm(rho.matrix()), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn entropy_examples() {
        let d1 = Dims::single(2).unwrap();
        let pure = PureState::basis(1, d1).unwrap().projector();
        assert_abs_diff_eq!(von_neumann_entropy(&pure), 0.0, epsilon = 1e-15);
        let mixed = DensityMatrix::maximally_mixed(d1);
        assert_abs_diff_eq!(von_neumann_entropy(&mixed), 2f64.ln(), epsilon = 1e-15);
        let diag = DensityMatrix::diagonal(&[0.75, 0.25], d1).unwrap();
        let oracle = -0.75 * 0.75f64.ln() - 0.25 * 0.25f64.ln();
        assert_abs_diff_eq!(von_neumann_entropy(&diag), oracle, epsilon = 1e-14);
    }

    #[test]
    fn relative_entropy_examples() {
        let d1 = Dims::single(2).unwrap();
        let zero = PureState::basis(0, d1).unwrap().projector();
        let one = PureState::basis(1, d1).unwrap().projector();
        let mixed = DensityMatrix::maximally_mixed(d1);
        assert_abs_diff_eq!(relative_entropy(&zero, &zero).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(
            relative_entropy(&zero, &mixed).unwrap(),
            2f64.ln(),
            epsilon = 1e-14
        );
        assert!(relative_entropy(&zero, &one).unwrap().is_infinite());
    }

    #[test]
    fn relative_entropy_rejects_mismatched_dims() {
        let a = DensityMatrix::maximally_mixed(Dims::bipartite(2, 2).unwrap());
        let b = DensityMatrix::maximally_mixed(Dims::bipartite(1, 4).unwrap());
        assert!(relative_entropy(&a, &b).is_err());
    }

    #[test]
    fn product_norm_detects_orthogonal_supports() {
        let d1 = Dims::single(2).unwrap();
        let zero = PureState::basis(0, d1).unwrap().projector();
        let one = PureState::basis(1, d1).unwrap().projector();
        assert_eq!(product_norm(zero.matrix(), one.matrix()), 0.0);
    }
}
