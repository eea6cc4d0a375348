use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use super::{CMatrix, CVector, DensityMatrix, Dims, PureState, C64};
use crate::{Error, Result};

/// Seeded random source. Equal seeds produce identical sample streams.
#[derive(Clone, Debug)]
pub struct Rng {
    seed: u64,
    inner: ChaCha20Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng {
            seed,
            inner: ChaCha20Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent stream keyed by `(seed, stream)`. Depends only on the
    /// original seed, never on how much of this stream was consumed.
    pub fn derive(&self, stream: u64) -> Rng {
        Rng::new(mix_seed(self.seed, stream))
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(self)
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer on `[lo, hi]`.
    pub fn int_in(&mut self, lo: usize, hi: usize) -> usize {
        debug_assert!(lo <= hi);
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }

    /// Standard complex Gaussian with `E|z|^2 = 1`.
    pub fn complex_normal(&mut self) -> C64 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        C64::new(s * self.normal(), s * self.normal())
    }

    /// Flat Dirichlet sample on the `n`-simplex.
    pub fn dirichlet(&mut self, n: usize) -> Vec<f64> {
        let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(self)).collect();
        let sum: f64 = draws.iter().sum();
        draws.into_iter().map(|x| x / sum).collect()
    }

    pub(crate) fn ginibre(&mut self, rows: usize, cols: usize) -> CMatrix {
        CMatrix::from_fn(rows, cols, |_, _| self.complex_normal())
    }
}

impl RngCore for Rng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer over the pair.
fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Haar-random pure state: a normalized standard complex Gaussian vector.
pub fn random_pure(dims: Dims, rng: &mut Rng) -> Result<PureState> {
    let v = CVector::from_fn(dims.total(), |_, _| rng.complex_normal());
    PureState::normalized(v, dims)
}

/// `|a> (x) |b>` with independent Haar factors.
pub fn random_product_pure(dims: Dims, rng: &mut Rng) -> Result<PureState> {
    if dims.is_tripartite() {
        return Err(Error::DimensionMismatch("product sampler is bipartite".into()));
    }
    let a = CVector::from_fn(dims.a, |_, _| rng.complex_normal());
    let b = CVector::from_fn(dims.b, |_, _| rng.complex_normal());
    PureState::normalized(a.kronecker(&b), dims)
}

/// Induced-measure mixed state `G G^dagger / Tr(G G^dagger)` with `G` a
/// `d x rank` Ginibre matrix.
pub fn random_mixed(dims: Dims, rank: usize, rng: &mut Rng) -> Result<DensityMatrix> {
    let d = dims.total();
    if rank == 0 || rank > d {
        return Err(Error::InvalidParameter(format!(
            "rank {rank} must lie in 1..={d}"
        )));
    }
    let g = rng.ginibre(d, rank);
    Ok(DensityMatrix::from_hermitian_unchecked(&g * g.adjoint(), dims))
}

/// Dirichlet-weighted mixture of `n_terms` random product projectors.
pub fn random_separable(dims: Dims, n_terms: usize, rng: &mut Rng) -> Result<DensityMatrix> {
    if n_terms == 0 {
        return Err(Error::InvalidParameter("n_terms must be at least 1".into()));
    }
    let weights = rng.dirichlet(n_terms);
    let d = dims.total();
    let mut m = CMatrix::zeros(d, d);
    for w in weights {
        let v = random_product_pure(dims, rng)?;
        m += (v.amplitudes() * v.amplitudes().adjoint()).scale(w);
    }
    Ok(DensityMatrix::from_hermitian_unchecked(m, dims))
}

/// Haar unitary from the QR factorization of a Ginibre matrix with the
/// phases of `R`'s diagonal absorbed into `Q`.
pub fn random_unitary(d: usize, rng: &mut Rng) -> CMatrix {
    random_isometry(d, d, rng)
}

/// The first `cols` columns of a Haar unitary of size `rows`.
pub fn random_isometry(rows: usize, cols: usize, rng: &mut Rng) -> CMatrix {
    assert!(cols <= rows, "isometry needs cols <= rows");
    let g = rng.ginibre(rows, cols);
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for k in 0..cols {
        let diag = r[(k, k)];
        let n = diag.norm();
        if n > 0.0 {
            let phase = diag / n;
            let scaled = q.column(k) * phase;
            q.set_column(k, &scaled);
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{linalg::isometry_residual, partial_transpose, Subsystem, TOL_PSD};
    use crate::qstate::eigh;

    #[test]
    fn same_seed_same_stream() {
        let dims = Dims::bipartite(2, 3).unwrap();
        let a = random_mixed(dims, 3, &mut Rng::new(42)).unwrap();
        let b = random_mixed(dims, 3, &mut Rng::new(42)).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = random_pure(dims, &mut Rng::new(42)).unwrap();
        let d = random_pure(dims, &mut Rng::new(42)).unwrap();
        assert_eq!(c.amplitudes(), d.amplitudes());
    }

    #[test]
    fn derived_streams_ignore_consumption() {
        let mut r = Rng::new(7);
        let before = r.derive(3).next_u64();
        r.next_u64();
        assert_eq!(before, r.derive(3).next_u64());
        assert_ne!(r.derive(3).next_u64(), r.derive(4).next_u64());
    }

    #[test]
    fn random_pure_is_normalized() {
        let mut rng = Rng::new(1);
        let psi = random_pure(Dims::bipartite(3, 3).unwrap(), &mut rng).unwrap();
        assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn random_separable_is_ppt() {
        let mut rng = Rng::new(2);
        for _ in 0..50 {
            let rho = random_separable(Dims::bipartite(2, 3).unwrap(), 4, &mut rng).unwrap();
            let pt = partial_transpose(&rho, Subsystem::A).unwrap();
            assert!(eigh(&pt).values[0] > -TOL_PSD);
        }
    }

    #[test]
    fn invalid_sampler_arguments() {
        let mut rng = Rng::new(0);
        let dims = Dims::bipartite(2, 2).unwrap();
        assert!(random_mixed(dims, 0, &mut rng).is_err());
        assert!(random_mixed(dims, 5, &mut rng).is_err());
        assert!(random_separable(dims, 0, &mut rng).is_err());
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = Rng::new(4);
        let u = random_unitary(6, &mut rng);
        assert!(isometry_residual(&u) < 1e-12);
        let v = random_isometry(8, 2, &mut rng);
        assert!(isometry_residual(&v) < 1e-12);
    }

    #[test]
    fn samplers_hold_invariants_over_many_draws() {
        let mut rng = Rng::new(10_000);
        let dims = Dims::bipartite(2, 3).unwrap();
        for k in 0..10_000 {
            match k % 3 {
                0 => {
                    let psi = random_pure(dims, &mut rng).unwrap();
                    assert!((psi.amplitudes().norm() - 1.0).abs() < 1e-12);
                }
                1 => {
                    let rank = 1 + k % 6;
                    let rho = random_mixed(dims, rank, &mut rng).unwrap();
                    DensityMatrix::new(rho.matrix().clone(), dims).unwrap();
                }
                _ => {
                    let rho = random_separable(dims, 1 + k % 5, &mut rng).unwrap();
                    DensityMatrix::new(rho.matrix().clone(), dims).unwrap();
                }
            }
        }
    }
}
