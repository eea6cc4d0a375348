//! Convex-roof extension `E_F(rho) = min sum_j p_j E(psi_j)` over pure-state
//! decompositions of `rho`.
//!
//! Every decomposition into `n` terms has the form
//! `|phi_j> = sum_i V_ji sqrt(lambda_i) |e_i>` for an `n x r` isometry `V`,
//! where `(lambda_i, e_i)` are the `r` nonzero eigenpairs of `rho`. The search
//! runs over unconstrained complex `n x r` matrices mapped to isometries by
//! QR, using a derivative-free (1+1) Gaussian perturbation scheme with an
//! adaptive step, so kinks in `h` (concurrence, G-concurrence) are harmless.

use rayon::prelude::*;

use crate::measures::{pure_measure, reduced_spectrum, HFunction};
use crate::qstate::linalg::isometry_residual;
use crate::qstate::{eigh, CMatrix, DensityMatrix, Dims, PureState, Rng, TOL_PSD};
use crate::{Error, Result};

/// Reconstruction tolerance for decompositions.
pub const TOL_RECON: f64 = 1e-8;

/// A pure-state decomposition `rho = sum_j p_j |psi_j><psi_j|`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub weights: Vec<f64>,
    pub states: Vec<PureState>,
}

impl Decomposition {
    /// `sum_j p_j |psi_j><psi_j|`.
    pub fn reconstruct(&self) -> CMatrix {
        let n = self.states[0].dims().total();
        let mut m = CMatrix::zeros(n, n);
        for (w, s) in self.weights.iter().zip(&self.states) {
            m += (s.amplitudes() * s.amplitudes().adjoint()).scale(*w);
        }
        m
    }

    /// `sum_j p_j h(Tr_B |psi_j><psi_j|)`.
    pub fn average(&self, h: HFunction) -> Result<f64> {
        let mut total = 0.0;
        for (w, s) in self.weights.iter().zip(&self.states) {
            total += w * pure_measure(h, s)?.value;
        }
        Ok(total)
    }
}

#[derive(Clone, Debug)]
pub struct RoofResult {
    /// Upper bound on `E_F`; equals `best.average(h)`.
    pub value: f64,
    pub best: Decomposition,
    pub restarts_used: usize,
    pub converged: bool,
    /// Objective evaluations summed over restarts.
    pub iterations: usize,
}

/// Search budget for [`roof_minimize`].
#[derive(Clone, Debug, PartialEq)]
pub struct RoofOptions {
    pub restarts: usize,
    /// Perturbation steps per restart.
    pub max_iters: usize,
    pub initial_step: f64,
    /// Restart declared converged when the relative improvement over this
    /// many consecutive steps falls below `convergence_tol`.
    pub convergence_window: usize,
    pub convergence_tol: f64,
}

impl Default for RoofOptions {
    fn default() -> Self {
        RoofOptions {
            restarts: 20,
            max_iters: 500,
            initial_step: 0.3,
            convergence_window: 50,
            convergence_tol: 1e-9,
        }
    }
}

/// Spectral data of `rho` restricted to its support.
struct Support {
    /// Columns `sqrt(lambda_i) e_i`, eigenvalues descending.
    scaled: CMatrix,
    dims: Dims,
}

impl Support {
    fn new(rho: &DensityMatrix) -> Self {
        let eig = eigh(rho.matrix());
        let n = eig.values.len();
        let kept: Vec<usize> = (0..n).rev().filter(|&k| eig.values[k] > TOL_PSD).collect();
        let scaled = CMatrix::from_fn(n, kept.len(), |row, col| {
            let k = kept[col];
            eig.vectors[(row, k)] * eig.values[k].sqrt()
        });
        Support {
            scaled,
            dims: rho.dims(),
        }
    }

    fn rank(&self) -> usize {
        self.scaled.ncols()
    }

    /// Unnormalized decomposition vectors as columns: `W V^T`.
    fn vectors(&self, v: &CMatrix) -> CMatrix {
        &self.scaled * v.transpose()
    }

    fn objective(&self, h: HFunction, v: &CMatrix) -> f64 {
        let phi = self.vectors(v);
        let (da, db) = (self.dims.a, self.dims.b);
        let mut total = 0.0;
        for col in phi.column_iter() {
            let spec = reduced_spectrum(col.as_slice(), da, db);
            let p: f64 = spec.iter().sum();
            if p <= 0.0 {
                continue;
            }
            let normalized: Vec<f64> = spec.iter().map(|m| m / p).collect();
            total += p * h.eval_spectrum(&normalized);
        }
        total
    }

    fn decomposition(&self, v: &CMatrix) -> Decomposition {
        let phi = self.vectors(v);
        let mut weights = Vec::new();
        let mut states = Vec::new();
        for col in phi.column_iter() {
            let p = col.norm_squared();
            if p <= 0.0 {
                continue;
            }
            let psi = PureState::normalized(col.into_owned(), self.dims)
                .expect("nonzero column normalizes");
            weights.push(p);
            states.push(psi);
        }
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        Decomposition { weights, states }
    }
}

/// Number of eigenvalues above the positivity tolerance.
pub fn rank(rho: &DensityMatrix) -> usize {
    eigh(rho.matrix())
        .values
        .iter()
        .filter(|&&v| v > TOL_PSD)
        .count()
}

/// `min(r^2, 2r)` capped at 8 (but never below `r`); 4 for two qubits.
pub fn default_n_terms(rho: &DensityMatrix) -> usize {
    let d = rho.dims();
    if d.a == 2 && d.b == 2 && !d.is_tripartite() {
        return 4;
    }
    let r = rank(rho);
    (r * r).min(2 * r).min(8).max(r)
}

/// The decomposition `|phi_j> = sum_i V_ji sqrt(lambda_i) |e_i>` defined by an
/// `n x r` isometry, `r = rank(rho)`. Zero-weight terms are dropped.
pub fn decomposition_from_isometry(rho: &DensityMatrix, v: &CMatrix) -> Result<Decomposition> {
    let support = Support::new(rho);
    if v.ncols() != support.rank() {
        return Err(Error::DimensionMismatch(format!(
            "isometry has {} columns but rank(rho) = {}",
            v.ncols(),
            support.rank()
        )));
    }
    if v.nrows() < v.ncols() {
        return Err(Error::DimensionMismatch("isometry needs n >= r".into()));
    }
    let residual = isometry_residual(v);
    if residual > 1e-8 {
        return Err(Error::NotIsometry(residual));
    }
    Ok(support.decomposition(v))
}

fn orthonormalize(p: &CMatrix) -> CMatrix {
    p.clone().qr().q()
}

struct RestartOutcome {
    value: f64,
    v: CMatrix,
    converged: bool,
    iterations: usize,
}

fn descend(
    h: HFunction,
    support: &Support,
    start: CMatrix,
    opts: &RoofOptions,
    rng: &mut Rng,
) -> RestartOutcome {
    let (n, r) = (start.nrows(), start.ncols());
    let mut v = orthonormalize(&start);
    let mut f = support.objective(h, &v);
    let mut step = opts.initial_step;
    let window = opts.convergence_window.max(1);
    let mut history = std::collections::VecDeque::with_capacity(window + 1);
    history.push_back(f);
    let mut converged = false;
    let mut iterations = 0;
    for _ in 0..opts.max_iters {
        iterations += 1;
        let candidate = orthonormalize(&(&v + rng.ginibre(n, r).scale(step)));
        let fc = support.objective(h, &candidate);
        if fc < f {
            v = candidate;
            f = fc;
            step = (step * 2.0).min(1.0);
        } else {
            // one success in five keeps the step stationary
            step = (step * 0.5f64.powf(0.25)).max(1e-12);
        }
        history.push_back(f);
        if history.len() > window + 1 {
            history.pop_front();
        }
        if history.len() == window + 1 {
            let old = history[0];
            if old - f <= opts.convergence_tol * old.abs().max(f64::MIN_POSITIVE) {
                converged = true;
                break;
            }
        }
    }
    RestartOutcome {
        value: f,
        v,
        converged,
        iterations,
    }
}

/// Minimizes `sum_j p_j h(rho_A^j)` over decompositions with at most
/// `n_terms` members. The result is an upper bound on the convex roof.
///
/// Each term count from `rank(rho)` to `n_terms` is searched with
/// `opts.restarts` restarts; restart `k` at size `m` draws from
/// `rng.derive((m << 32) | k)` and restart 0 starts from the
/// eigendecomposition. The minimum wins, with ties going to the earliest
/// `(m, k)`, so raising `n_terms` or `restarts` never raises the value.
pub fn roof_minimize(
    h: HFunction,
    rho: &DensityMatrix,
    n_terms: usize,
    opts: &RoofOptions,
    rng: &mut Rng,
) -> Result<RoofResult> {
    h.validate()?;
    if rho.dims().is_tripartite() {
        return Err(Error::DimensionMismatch("convex roof needs a bipartite state".into()));
    }
    if opts.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let support = Support::new(rho);
    let r = support.rank();
    if n_terms < r {
        return Err(Error::InvalidParameter(format!(
            "n_terms = {n_terms} is below rank(rho) = {r}"
        )));
    }
    if r == 1 {
        let v = CMatrix::identity(1, 1);
        let best = support.decomposition(&v);
        let value = best.average(h)?;
        return Ok(RoofResult {
            value,
            best,
            restarts_used: 0,
            converged: true,
            iterations: 0,
        });
    }

    let jobs: Vec<(usize, usize)> = (r..=n_terms)
        .flat_map(|m| (0..opts.restarts).map(move |k| (m, k)))
        .collect();
    let outcomes: Vec<RestartOutcome> = jobs
        .par_iter()
        .map(|&(m, k)| {
            let mut local = rng.derive(((m as u64) << 32) | k as u64);
            let start = if k == 0 {
                CMatrix::identity(m, r)
            } else {
                local.ginibre(m, r)
            };
            descend(h, &support, start, opts, &mut local)
        })
        .collect();

    let mut best_idx = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.value < outcomes[best_idx].value {
            best_idx = i;
        }
    }
    let winner = &outcomes[best_idx];
    let best = support.decomposition(&winner.v);
    let value = best.average(h)?;
    Ok(RoofResult {
        value,
        best,
        restarts_used: opts.restarts,
        converged: winner.converged,
        iterations: outcomes.iter().map(|o| o.iterations).sum(),
    })
}

/// Average of `h` over the spectral decomposition of `rho`, the starting
/// point of restart 0.
pub fn eigen_average(h: HFunction, rho: &DensityMatrix) -> Result<f64> {
    let support = Support::new(rho);
    let r = support.rank();
    support.decomposition(&CMatrix::identity(r, r)).average(h)
}
