//! Relative entropy of entanglement `E_r(rho) = min_sigma S(rho || sigma)`
//! over separable `sigma`, by away-step Frank–Wolfe on the convex hull of
//! product projectors.
//!
//! Every iterate is stored as an explicit convex combination of product
//! vectors, so feasibility holds by construction and the returned value is an
//! upper bound. The Frank–Wolfe gap bounds the distance to the optimum when
//! the linear subproblem is solved exactly.

use std::collections::VecDeque;

use crate::locc::{apply, LocalKrausChannel};
use crate::qstate::linalg::xlogx;
use crate::qstate::ops::cross_entropy_psd;
use crate::qstate::{
    eigh, relative_entropy, CMatrix, CVector, DensityMatrix, Dims, Rng, C64,
};
use crate::{Error, Result};

/// Eigenvalues of the iterate are clipped here when forming the gradient.
const EIG_CLIP: f64 = 1e-14;
/// Largest supported `d_A d_B`.
pub const MAX_DIM: usize = 16;
/// Above this total dimension PPT no longer certifies separability.
const EXACT_DIM: usize = 6;
const LINE_SEARCH_ITERS: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct ReeOptions {
    pub max_iters: usize,
    /// Random starts of the bilinear subproblem per iteration.
    pub lmo_restarts: usize,
    /// Alternating rounds per start.
    pub lmo_rounds: usize,
    pub gap_tol: f64,
    /// L-BFGS steps on the atoms between vertex steps.
    pub local_iters: usize,
}

impl Default for ReeOptions {
    fn default() -> Self {
        ReeOptions {
            max_iters: 2000,
            lmo_restarts: 8,
            lmo_rounds: 50,
            gap_tol: 1e-4,
            local_iters: 100,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReeResult {
    /// `S(rho || closest_separable)` in nats.
    pub value: f64,
    pub closest_separable: DensityMatrix,
    pub iterations: usize,
    /// Last Frank–Wolfe gap `Tr(G sigma) - min <a b|G|a b>`.
    pub duality_gap_estimate: f64,
    pub converged: bool,
    /// Set for `d_A d_B > 6`, where the value is only an upper bound.
    pub upper_bound_only: bool,
    /// Objective after every iteration, starting with the initial point.
    pub trace: Vec<f64>,
}

/// `-Tr[rho ln sigma]`, infinite when `rho` leaks into the kernel of `sigma`.
fn cross_entropy(rho: &CMatrix, sigma: &CMatrix) -> f64 {
    cross_entropy_psd(rho, sigma)
}

/// Gradient of `sigma -> -Tr[rho ln sigma]` through the divided differences of
/// `ln` in the eigenbasis of `sigma`.
fn gradient(rho: &CMatrix, sigma: &CMatrix) -> CMatrix {
    let e = eigh(sigma);
    let n = sigma.nrows();
    let mu: Vec<f64> = e.values.iter().map(|&m| m.max(EIG_CLIP)).collect();
    let u = &e.vectors;
    let rt = u.adjoint() * rho * u;
    let g = CMatrix::from_fn(n, n, |i, j| {
        let l = if (mu[i] - mu[j]).abs() <= 1e-12 * mu[i].max(mu[j]) {
            2.0 / (mu[i] + mu[j])
        } else {
            (mu[i].ln() - mu[j].ln()) / (mu[i] - mu[j])
        };
        -rt[(i, j)] * l
    });
    u * g * u.adjoint()
}

/// `(<a| (x) I) G (|a> (x) I)`.
fn contract_a(g: &CMatrix, a: &CVector, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(db, db, |j, jp| {
        let mut s = C64::new(0.0, 0.0);
        for i in 0..da {
            for ip in 0..da {
                s += a[i].conj() * a[ip] * g[(i * db + j, ip * db + jp)];
            }
        }
        s
    })
}

/// `(I (x) <b|) G (I (x) |b>)`.
fn contract_b(g: &CMatrix, b: &CVector, da: usize, db: usize) -> CMatrix {
    CMatrix::from_fn(da, da, |i, ip| {
        let mut s = C64::new(0.0, 0.0);
        for j in 0..db {
            for jp in 0..db {
                s += b[j].conj() * b[jp] * g[(i * db + j, ip * db + jp)];
            }
        }
        s
    })
}

fn lowest(m: &CMatrix) -> (f64, CVector) {
    let e = eigh(m);
    (e.values[0], e.vectors.column(0).into_owned())
}

fn kron(a: &CVector, b: &CVector) -> CVector {
    let db = b.len();
    CVector::from_fn(a.len() * db, |k, _| a[k / db] * b[k % db])
}

fn random_unit(d: usize, rng: &mut Rng) -> CVector {
    let v = CVector::from_fn(d, |_, _| rng.complex_normal());
    let n = v.norm();
    v.unscale(n)
}

/// Approximately minimizes `<a b|G|a b>` over unit product vectors by
/// alternating exact minimization of each factor.
fn product_lmo(
    g: &CMatrix,
    dims: Dims,
    warm: Option<&CVector>,
    opts: &ReeOptions,
    rng: &mut Rng,
) -> (f64, CVector, CVector) {
    let (da, db) = (dims.a, dims.b);
    let mut starts: Vec<CVector> = (0..opts.lmo_restarts).map(|_| random_unit(da, rng)).collect();
    if let Some(a) = warm {
        starts.push(a.clone());
    }
    let mut best = (f64::INFINITY, CVector::zeros(da), CVector::zeros(db));
    for mut a in starts {
        let mut value = f64::INFINITY;
        let mut b;
        let mut rounds = 0;
        loop {
            let (_, nb) = lowest(&contract_a(g, &a, da, db));
            b = nb;
            let (v, na) = lowest(&contract_b(g, &b, da, db));
            a = na;
            rounds += 1;
            let improved = value - v > 1e-14 * v.abs().max(1.0);
            value = v;
            if !improved || rounds >= opts.lmo_rounds {
                break;
            }
        }
        if value < best.0 {
            best = (value, a, b);
        }
    }
    best
}

/// Minimizes a convex function on `[0, hi]` by golden-section search and
/// returns `(gamma, value)`, never worse than `gamma = 0`.
fn line_search(f: impl Fn(f64) -> f64, hi: f64, f0: f64) -> (f64, f64) {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut up) = (0.0, hi);
    let mut x1 = up - ratio * (up - lo);
    let mut x2 = lo + ratio * (up - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..LINE_SEARCH_ITERS {
        if f1 <= f2 {
            up = x2;
            x2 = x1;
            f2 = f1;
            x1 = up - ratio * (up - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (up - lo);
            f2 = f(x2);
        }
    }
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    let f_hi = f(hi);
    if f_hi <= best.1 {
        best = (hi, f_hi);
    }
    if f0 <= best.1 {
        best = (0.0, f0);
    }
    best
}

/// Unnormalized product vectors `a_k (x) b_k`; the iterate is
/// `sum_k |a_k b_k><a_k b_k| / sum_k ||a_k||^2 ||b_k||^2`.
///
/// Packed as interleaved real and imaginary parts, `a_k` then `b_k`.
struct Atoms {
    da: usize,
    db: usize,
}

impl Atoms {
    fn width(&self) -> usize {
        2 * (self.da + self.db)
    }

    fn count(&self, x: &[f64]) -> usize {
        x.len() / self.width()
    }

    fn factors(&self, x: &[f64], k: usize) -> (CVector, CVector) {
        let base = k * self.width();
        let a = CVector::from_fn(self.da, |i, _| C64::new(x[base + 2 * i], x[base + 2 * i + 1]));
        let off = base + 2 * self.da;
        let b = CVector::from_fn(self.db, |j, _| C64::new(x[off + 2 * j], x[off + 2 * j + 1]));
        (a, b)
    }

    fn push(&self, x: &mut Vec<f64>, a: &CVector, b: &CVector) {
        for z in a.iter().chain(b.iter()) {
            x.push(z.re);
            x.push(z.im);
        }
    }

    /// Normalized iterate and the total weight `T`.
    fn state(&self, x: &[f64]) -> (CMatrix, f64) {
        let n = self.da * self.db;
        let mut m = CMatrix::zeros(n, n);
        for k in 0..self.count(x) {
            let (a, b) = self.factors(x, k);
            let v = kron(&a, &b);
            m += &v * v.adjoint();
        }
        let t = m.trace().re;
        (m.unscale(t), t)
    }

    fn weights(&self, x: &[f64]) -> Vec<f64> {
        (0..self.count(x))
            .map(|k| {
                let (a, b) = self.factors(x, k);
                a.norm_squared() * b.norm_squared()
            })
            .collect()
    }

    /// Objective and its gradient with respect to the packed parameters.
    fn value_grad(&self, rho: &CMatrix, x: &[f64]) -> (f64, Vec<f64>) {
        let (sigma, t) = self.state(x);
        let f = cross_entropy(rho, &sigma);
        if !f.is_finite() {
            return (f, vec![0.0; x.len()]);
        }
        let g = gradient(rho, &sigma);
        let c = (&g * &sigma).trace().re;
        let mut grad = Vec::with_capacity(x.len());
        for k in 0..self.count(x) {
            let (a, b) = self.factors(x, k);
            let v = kron(&a, &b);
            let gv = (&g * &v - v.scale(c)).scale(2.0 / t);
            for i in 0..self.da {
                let mut s = C64::new(0.0, 0.0);
                for j in 0..self.db {
                    s += b[j].conj() * gv[i * self.db + j];
                }
                grad.push(s.re);
                grad.push(s.im);
            }
            for j in 0..self.db {
                let mut s = C64::new(0.0, 0.0);
                for i in 0..self.da {
                    s += a[i].conj() * gv[i * self.db + j];
                }
                grad.push(s.re);
                grad.push(s.im);
            }
        }
        (f, grad)
    }
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Limited-memory BFGS with Armijo backtracking. Only decreasing steps are
/// taken; every accepted value is appended to `trace`. Returns the number of
/// accepted steps.
fn lbfgs(
    eval: impl Fn(&[f64]) -> (f64, Vec<f64>),
    x: &mut Vec<f64>,
    fx: &mut f64,
    max_iters: usize,
    trace: &mut Vec<f64>,
) -> usize {
    const MEMORY: usize = 10;
    let (_, mut g) = eval(x);
    let mut hist: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    for it in 0..max_iters {
        let gnorm = dot(&g, &g).sqrt();
        if gnorm < 1e-13 {
            return it;
        }
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(hist.len());
        for (s, y, r) in hist.iter().rev() {
            let a = r * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = match hist.back() {
            Some((s, y, _)) => dot(s, y) / dot(y, y),
            None => 1.0 / gnorm.max(1.0),
        };
        q.iter_mut().for_each(|qi| *qi *= gamma);
        for ((s, y, r), a) in hist.iter().zip(alphas.iter().rev()) {
            let b = r * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            d = g.iter().map(|v| -v).collect();
            slope = -gnorm * gnorm;
            hist.clear();
        }
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            let (fnew, gnew) = eval(&xn);
            if fnew.is_finite() && fnew <= *fx + 1e-4 * step * slope {
                accepted = Some((xn, fnew, gnew));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, fnew, gnew)) = accepted else {
            return it;
        };
        let s: Vec<f64> = xn.iter().zip(x.iter()).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gnew.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-18 {
            hist.push_back((s, y, 1.0 / sy));
            if hist.len() > MEMORY {
                hist.pop_front();
            }
        }
        let improvement = *fx - fnew;
        *x = xn;
        g = gnew;
        *fx = fnew;
        trace.push(fnew);
        if improvement <= 1e-15 * fnew.abs().max(1.0) {
            return it + 1;
        }
    }
    max_iters
}

/// Frank–Wolfe over product projectors, started from the maximally mixed
/// state. Between vertex steps the atoms of the current decomposition are
/// moved locally by L-BFGS; the vertex step's gap certifies the result.
pub fn ree_minimize(rho: &DensityMatrix, opts: &ReeOptions, rng: &mut Rng) -> Result<ReeResult> {
    let dims = rho.dims();
    if dims.is_tripartite() {
        return Err(Error::DimensionMismatch(
            "relative entropy of entanglement needs a bipartite state".into(),
        ));
    }
    let n = dims.total();
    if n > MAX_DIM {
        return Err(Error::InvalidParameter(format!(
            "relative entropy of entanglement is limited to d_A d_B <= {MAX_DIM}, got {dims}"
        )));
    }
    if opts.lmo_restarts == 0 || opts.lmo_rounds == 0 {
        return Err(Error::InvalidParameter(
            "need at least one subproblem start and round".into(),
        ));
    }
    let r = rho.matrix();
    let entropy: f64 = -rho.spectrum().iter().map(|&v| xlogx(v)).sum::<f64>();
    let atoms = Atoms { da: dims.a, db: dims.b };
    let max_atoms = 2 * n * n;

    // maximally mixed state as the uniform mixture of the product basis
    let mut x = Vec::new();
    let unit = |d: usize, k: usize| CVector::from_fn(d, |i, _| C64::new(if i == k { 1.0 } else { 0.0 }, 0.0));
    for i in 0..dims.a {
        for j in 0..dims.b {
            atoms.push(&mut x, &unit(dims.a, i), &unit(dims.b, j));
        }
    }
    let mut fx = cross_entropy(r, &atoms.state(&x).0);
    let mut values = vec![fx];
    let mut gap;
    let mut converged = false;
    let mut iterations = 0;
    let mut warm: Option<CVector> = None;

    loop {
        let budget = opts.local_iters.min(opts.max_iters - iterations);
        iterations += lbfgs(|p| atoms.value_grad(r, p), &mut x, &mut fx, budget, &mut values);

        let (sigma, _) = atoms.state(&x);
        let g = gradient(r, &sigma);
        let at_sigma = (&g * &sigma).trace().re;
        let (v_min, a, b) = product_lmo(&g, dims, warm.as_ref(), opts, rng);
        gap = at_sigma - v_min;
        if gap < opts.gap_tol {
            converged = true;
            break;
        }
        if iterations >= opts.max_iters {
            break;
        }
        iterations += 1;

        let s = kron(&a, &b);
        let direction = &s * s.adjoint() - &sigma;
        let (gamma, next) =
            line_search(|t| cross_entropy(r, &(&sigma + direction.scale(t))), 1.0, fx);
        if gamma > 0.0 {
            let mut candidate: Vec<f64> = x.iter().map(|v| v * (1.0 - gamma).sqrt()).collect();
            let t = atoms.weights(&x).iter().sum::<f64>();
            atoms.push(&mut candidate, &a.scale((gamma * t).sqrt()), &b);
            if atoms.count(&candidate) > max_atoms {
                let w = atoms.weights(&candidate);
                let drop = (0..w.len()).min_by(|&i, &j| w[i].total_cmp(&w[j])).unwrap_or(0);
                candidate.drain(drop * atoms.width()..(drop + 1) * atoms.width());
            }
            let t_new: f64 = atoms.weights(&candidate).iter().sum();
            candidate.iter_mut().for_each(|v| *v /= t_new.sqrt());
            let f_new = cross_entropy(r, &atoms.state(&candidate).0);
            if f_new <= fx {
                x = candidate;
                fx = f_new;
            } else {
                fx = fx.min(next);
            }
        }
        values.push(fx);
        warm = Some(a);
    }

    let closest = DensityMatrix::from_hermitian_unchecked(atoms.state(&x).0, dims);
    let value = relative_entropy(rho, &closest)?;
    Ok(ReeResult {
        value,
        closest_separable: closest,
        iterations,
        duality_gap_estimate: gap,
        converged,
        upper_bound_only: n > EXACT_DIM,
        trace: values.into_iter().map(|v| v - entropy).collect(),
    })
}

/// Both sides of `sum_i S(p_i rho_i || q_i sigma_i) <= S(rho || sigma)` for
/// one local channel applied to both states.
#[derive(Clone, Debug)]
pub struct DataProcessingReport {
    /// `sum_i S(p_i rho_i || q_i sigma_i)`.
    pub lhs: f64,
    /// `S(rho || sigma)`.
    pub rhs: f64,
    /// `rhs - lhs`; nonnegative up to rounding.
    pub gap: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// `max_i |p_i - q_i|`.
    pub max_prob_diff: f64,
    pub holds: bool,
    /// Whether `p = q` within the equality tolerance, reported when the gap
    /// itself is below it.
    pub probabilities_match: Option<bool>,
    pub skipped: Option<String>,
}

pub const DATA_PROCESSING_TOL: f64 = 1e-9;

pub fn ree_data_processing_check(
    rho: &DensityMatrix,
    sigma: &DensityMatrix,
    channel: &LocalKrausChannel,
) -> Result<DataProcessingReport> {
    if rho.dims() != sigma.dims() {
        return Err(Error::DimensionMismatch(format!(
            "states on {} and {}",
            rho.dims(),
            sigma.dims()
        )));
    }
    let rhs = relative_entropy(rho, sigma)?;
    let er = apply(channel, rho)?;
    let es = apply(channel, sigma)?;
    let k = channel.kraus().len();
    let mut p = vec![0.0; k];
    let mut q = vec![0.0; k];
    let mut rho_k: Vec<Option<&DensityMatrix>> = vec![None; k];
    let mut sigma_k: Vec<Option<&DensityMatrix>> = vec![None; k];
    for (idx, (prob, state)) in er.kraus_indices.iter().zip(&er.outcomes) {
        p[*idx] = *prob;
        rho_k[*idx] = Some(state);
    }
    for (idx, (prob, state)) in es.kraus_indices.iter().zip(&es.outcomes) {
        q[*idx] = *prob;
        sigma_k[*idx] = Some(state);
    }
    let max_prob_diff = p
        .iter()
        .zip(&q)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);

    let mut lhs = 0.0;
    for i in 0..k {
        let Some(ri) = rho_k[i] else { continue };
        let term = match sigma_k[i] {
            Some(si) => p[i] * relative_entropy(ri, si)? + p[i] * (p[i] / q[i]).ln(),
            None => f64::INFINITY,
        };
        lhs += term;
    }
    if !rhs.is_finite() || !lhs.is_finite() {
        return Ok(DataProcessingReport {
            lhs,
            rhs,
            gap: f64::NAN,
            p,
            q,
            max_prob_diff,
            holds: true,
            probabilities_match: None,
            skipped: Some("support of rho not contained in support of sigma".into()),
        });
    }
    let gap = rhs - lhs;
    let probabilities_match = (gap < DATA_PROCESSING_TOL).then_some(max_prob_diff < DATA_PROCESSING_TOL);
    Ok(DataProcessingReport {
        lhs,
        rhs,
        gap,
        p,
        q,
        max_prob_diff,
        holds: gap >= -DATA_PROCESSING_TOL,
        probabilities_match,
        skipped: None,
    })
}
