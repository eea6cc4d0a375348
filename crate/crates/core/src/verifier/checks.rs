use std::collections::BTreeMap;

use super::{Rule, VerificationReport, UNINFORMATIVE};
use crate::locc::{apply, classify, LocalKrausChannel, Side, P_FLOOR};
use crate::measures::{
    h_eval, log_negativity, negativity, pure_measure, reduced_spectrum, EvalOptions, HFunction,
    Measure, Route,
};
use crate::qstate::ops::product_norm;
use crate::qstate::{
    eigh, local_operator, partial_trace, partial_transpose, random_mixed, random_product_pure,
    random_pure, CMatrix, CVector, DensityMatrix, Dims, PureState, Rng, StateFile, Subsystem,
};
use crate::roof::{roof_minimize, RoofOptions};
use crate::{Error, Result};

/// Smallest gap counted as a strict decrease.
pub const STRICT_FLOOR: f64 = 1e-6;
/// Equality tolerance for closed-form values.
const EQUALITY_TOL: f64 = 1e-9;
/// Smallest concavity gap accepted as strict.
const CONCAVITY_FLOOR: f64 = 1e-12;
/// Random pairs searched for a non-convexity witness.
pub const LOGNEG_TRIALS: usize = 10_000;
/// Largest `d_A d_B d_C` accepted by the monogamy check.
const MONOGAMY_MAX_DIM: usize = 64;

fn meta(pairs: &[(&str, String)]) -> BTreeMap<String, String> {
    pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
}

fn pass_fail(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

/// `E(rho)` against `sum_k p_k E(sigma_k)`; passes when the average does not
/// increase beyond the tolerance of the slowest route used.
pub fn check_monotone(
    measure: &Measure,
    rho: &DensityMatrix,
    channel: &LocalKrausChannel,
    opts: &EvalOptions,
) -> Result<VerificationReport> {
    let class = classify(channel);
    let ens = apply(channel, rho)?;
    let lhs = measure.evaluate(rho, opts)?.value;
    let mut route = measure.route(rho);
    let mut tol = route.tolerance();
    let mut rhs = 0.0;
    for (k, (p, sigma)) in ens.outcomes.iter().enumerate() {
        let o = EvalOptions {
            seed: opts.seed.wrapping_add(k as u64 + 1),
            ..opts.clone()
        };
        rhs += p * measure.evaluate(sigma, &o)?.value;
        let r = measure.route(sigma);
        if r.tolerance() > tol {
            tol = r.tolerance();
            route = r;
        }
    }
    let metadata = meta(&[
        ("outcomes", ens.outcomes.len().to_string()),
        ("kraus", channel.kraus().len().to_string()),
        ("side", format!("{:?}", channel.side())),
        ("dims", rho.dims().to_string()),
        ("route", format!("{route:?}")),
    ]);
    Ok(VerificationReport::decide(
        "monotone",
        measure.to_string(),
        Some(class.tag),
        lhs,
        rhs,
        tol,
        Rule::AtLeast,
        opts.seed,
        metadata,
    ))
}

/// Input distributions for the strictness sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StateSampler {
    HaarPure,
    /// Haar pure states whose smallest Schmidt weight is at least `1e-3`.
    EntangledPure,
    /// Full-rank random mixed states.
    Mixed,
    ProductPure,
}

impl StateSampler {
    pub fn sample(self, dims: Dims, rng: &mut Rng) -> Result<DensityMatrix> {
        match self {
            StateSampler::HaarPure => Ok(random_pure(dims, rng)?.projector()),
            StateSampler::EntangledPure => {
                let k = dims.a.min(dims.b);
                loop {
                    let psi = random_pure(dims, rng)?;
                    let spec = reduced_spectrum(psi.amplitudes().as_slice(), dims.a, dims.b);
                    if spec[dims.a - k] >= 1e-3 {
                        return Ok(psi.projector());
                    }
                }
            }
            StateSampler::Mixed => random_mixed(dims, dims.total(), rng),
            StateSampler::ProductPure => Ok(random_product_pure(dims, rng)?.projector()),
        }
    }
}

/// Strictness of a measure under one channel, over `n_states` sampled inputs.
///
/// For a general channel the largest gap must exceed [`STRICT_FLOOR`]: some
/// state loses entanglement on average. For a local unitary or a mixture of
/// local unitaries every gap must vanish. Values that need an optimizer are
/// too noisy for either direction and the check is skipped.
pub fn check_strict(
    measure: &Measure,
    sampler: StateSampler,
    dims: Dims,
    channel: &LocalKrausChannel,
    n_states: usize,
    rng: &mut Rng,
) -> Result<VerificationReport> {
    let class = classify(channel);
    let seed = rng.seed();
    let opts = EvalOptions::default();
    let mut best: Option<(f64, f64)> = None;
    let mut best_key = f64::NEG_INFINITY;
    let mut informative = 0;
    let mut strict = 0;
    let mut min_gap = f64::INFINITY;
    for _ in 0..n_states {
        let rho = sampler.sample(dims, rng)?;
        let ens = apply(channel, &rho)?;
        let closed = measure.route(&rho) == Route::ClosedForm
            && ens.outcomes.iter().all(|(_, s)| measure.route(s) == Route::ClosedForm);
        if !closed {
            return Ok(VerificationReport::skipped(
                "strict",
                measure.to_string(),
                Some(class.tag),
                seed,
                "optimizer noise exceeds the strictness floor",
            ));
        }
        let lhs = measure.evaluate(&rho, &opts)?.value;
        let mut rhs = 0.0;
        for (p, s) in &ens.outcomes {
            rhs += p * measure.evaluate(s, &opts)?.value;
        }
        let gap = lhs - rhs;
        if lhs > UNINFORMATIVE {
            informative += 1;
        }
        if gap > STRICT_FLOOR {
            strict += 1;
        }
        min_gap = min_gap.min(gap);
        let key = if class.is_unitary_like() { gap.abs() } else { gap };
        if key > best_key {
            best_key = key;
            best = Some((lhs, rhs));
        }
    }
    let Some((lhs, rhs)) = best else {
        return Ok(VerificationReport::skipped(
            "strict",
            measure.to_string(),
            Some(class.tag),
            seed,
            "no states sampled",
        ));
    };
    let mut metadata = meta(&[
        ("n_states", n_states.to_string()),
        ("informative_states", informative.to_string()),
        ("strict_fraction", (strict as f64 / n_states as f64).to_string()),
        ("min_gap", min_gap.to_string()),
        ("dims", dims.to_string()),
        ("sampler", format!("{sampler:?}")),
    ]);
    let (tol, rule) = if informative == 0 {
        metadata.insert("note".into(), "unentangled inputs are uninformative".into());
        (EQUALITY_TOL, Rule::Within)
    } else if class.is_unitary_like() {
        // finite samples can falsify the converse, never prove it
        metadata.insert("converse".into(), "supported".into());
        (EQUALITY_TOL, Rule::Within)
    } else {
        (STRICT_FLOOR, Rule::Exceeds)
    };
    Ok(VerificationReport::decide(
        "strict",
        measure.to_string(),
        Some(class.tag),
        lhs,
        rhs,
        tol,
        rule,
        seed,
        metadata,
    ))
}

/// `h(lambda rho1 + (1 - lambda) rho2)` against `lambda h(rho1) + (1 - lambda) h(rho2)`.
pub fn check_strict_concavity(
    h: HFunction,
    rho1: &DensityMatrix,
    rho2: &DensityMatrix,
    lambda: f64,
) -> Result<VerificationReport> {
    h.validate()?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::InvalidParameter(format!("lambda = {lambda} outside (0, 1)")));
    }
    let mix = DensityMatrix::mixture(&[lambda, 1.0 - lambda], &[rho1, rho2])?;
    let lhs = h_eval(h, &mix)?;
    let rhs = lambda * h_eval(h, rho1)? + (1.0 - lambda) * h_eval(h, rho2)?;
    let dist = rho1.frobenius_distance(rho2);
    let mut metadata = meta(&[
        ("distance", dist.to_string()),
        ("lambda", lambda.to_string()),
        ("dim", rho1.dims().total().to_string()),
    ]);
    if h == HFunction::Tangle {
        let identity = 2.0 * lambda * (1.0 - lambda) * dist * dist;
        metadata.insert("tangle_identity".into(), identity.to_string());
        metadata.insert("tangle_identity_residual".into(), ((lhs - rhs) - identity).abs().to_string());
    }
    let skip = |reason: &str| {
        let mut r = VerificationReport::skipped("strict-concavity", h.to_string(), None, 0, reason);
        r.lhs = lhs;
        r.rhs = rhs;
        r.gap = lhs - rhs;
        r
    };
    let (tol, rule) = if dist <= 1e-12 {
        (1e-10, Rule::Within)
    } else if dist <= 1e-3 {
        return Ok(skip("pair closer than 1e-3 in Frobenius norm"));
    } else if h == HFunction::GConcurrence
        && rho1.spectrum()[0].min(rho2.spectrum()[0]) <= 1e-12
    {
        return Ok(skip("g-concurrence is strictly concave only on full-rank pairs"));
    } else {
        (CONCAVITY_FLOOR, Rule::Exceeds)
    };
    Ok(VerificationReport::decide(
        "strict-concavity",
        h.to_string(),
        None,
        lhs,
        rhs,
        tol,
        rule,
        0,
        metadata,
    ))
}

/// A side-B channel on a pure state: the average `h` strictly decreases
/// whenever some outcome changes the reduced state of A, and is preserved
/// when none does.
pub fn check_reduced_state_condition(
    h: HFunction,
    psi: &PureState,
    channel: &LocalKrausChannel,
) -> Result<VerificationReport> {
    h.validate()?;
    if channel.side() != Side::B {
        return Err(Error::InvalidParameter("the reduced-state check needs a side-B channel".into()));
    }
    let dims = psi.dims();
    if dims.is_tripartite() {
        return Err(Error::DimensionMismatch("the reduced-state check needs a bipartite state".into()));
    }
    let class = classify(channel);
    let rho_a = partial_trace(&psi.projector(), &[Subsystem::A])?;
    let lhs = pure_measure(h, psi)?.value;
    let mut rhs = 0.0;
    let mut deviation: f64 = 0.0;
    let mut outcomes = 0;
    for m in channel.kraus() {
        let op = local_operator(m, Subsystem::B, dims)?;
        let v = op * psi.amplitudes();
        let p = v.norm_squared();
        if p < P_FLOOR {
            continue;
        }
        outcomes += 1;
        let sigma = PureState::normalized(v, dims)?;
        rhs += p * pure_measure(h, &sigma)?.value;
        let sigma_a = partial_trace(&sigma.projector(), &[Subsystem::A])?;
        deviation = deviation.max(sigma_a.frobenius_distance(&rho_a));
    }
    let mut metadata = meta(&[
        ("max_reduced_deviation", deviation.to_string()),
        ("outcomes", outcomes.to_string()),
        ("dims", dims.to_string()),
    ]);
    let (tol, rule) = if lhs <= UNINFORMATIVE && rhs <= UNINFORMATIVE {
        metadata.insert("note".into(), "unentangled inputs are uninformative".into());
        (1e-8, Rule::Within)
    } else if h == HFunction::GConcurrence && dims.a > dims.b {
        return Ok(VerificationReport::skipped(
            "reduced-state",
            h.to_string(),
            Some(class.tag),
            0,
            "g-concurrence vanishes identically when d_A > d_B",
        ));
    } else if deviation > 1e-6 {
        (EQUALITY_TOL, Rule::Exceeds)
    } else if deviation <= 1e-8 {
        (1e-8, Rule::Within)
    } else {
        return Ok(VerificationReport::skipped(
            "reduced-state",
            h.to_string(),
            Some(class.tag),
            0,
            "reduced states differ by between 1e-8 and 1e-6",
        ));
    };
    Ok(VerificationReport::decide(
        "reduced-state",
        h.to_string(),
        Some(class.tag),
        lhs,
        rhs,
        tol,
        rule,
        0,
        metadata,
    ))
}

/// Builds `|psi> = |phi>_{A B1} |eta>_{B2 C}` with `B = B1 B2`, optionally
/// rotated by a unitary on `B`, and checks that
///
/// 1. `E(A|BC) = E(rho_AB)` (the report's gap),
/// 2. `rho_AC = rho_A (x) rho_C`, so `rho_AC` has no negativity,
/// 3. projecting `C` onto any basis vector leaves `rho_A` unchanged.
pub fn check_monogamy_product(
    phi: &PureState,
    eta: &PureState,
    h: HFunction,
    b_rotation: Option<&CMatrix>,
    rng: &mut Rng,
) -> Result<VerificationReport> {
    h.validate()?;
    let (pd, ed) = (phi.dims(), eta.dims());
    if pd.is_tripartite() || ed.is_tripartite() {
        return Err(Error::DimensionMismatch("both factors must be bipartite".into()));
    }
    let (da, db, dc) = (pd.a, pd.b * ed.a, ed.b);
    let total = da * db * dc;
    if total > MONOGAMY_MAX_DIM {
        return Err(Error::DimensionMismatch(format!(
            "total dimension {total} exceeds {MONOGAMY_MAX_DIM}"
        )));
    }
    // A B1 (x) B2 C is already A B C in row-major order
    let mut amps: CVector = phi.amplitudes().kronecker(eta.amplitudes());
    if let Some(u) = b_rotation {
        if u.nrows() != db || u.ncols() != db {
            return Err(Error::DimensionMismatch(format!("rotation on B must be {db}x{db}")));
        }
        let op = CMatrix::identity(da, da)
            .kronecker(u)
            .kronecker(&CMatrix::identity(dc, dc));
        amps = op * amps;
    }
    let tri = Dims::tripartite(da, db, dc)?;
    let psi = PureState::normalized(amps.clone(), tri)?;
    let rho = psi.projector();

    let cut = PureState::new(amps.clone(), Dims::bipartite(da, db * dc)?)?;
    let lhs = pure_measure(h, &cut)?.value;
    let rho_ab = partial_trace(&rho, &[Subsystem::A, Subsystem::B])?;
    let rhs = if rho_ab.is_pure(1e-12) {
        pure_measure(h, &rho_ab.principal_state())?.value
    } else {
        let rank = crate::roof::rank(&rho_ab);
        let opts = RoofOptions {
            restarts: 1,
            max_iters: 100,
            ..RoofOptions::default()
        };
        roof_minimize(h, &rho_ab, rank, &opts, rng)?.value
    };

    let rho_ac = partial_trace(&rho, &[Subsystem::A, Subsystem::C])?;
    let rho_a = partial_trace(&rho, &[Subsystem::A])?;
    let rho_c = partial_trace(&rho, &[Subsystem::C])?;
    let product = rho_a.matrix().kronecker(rho_c.matrix());
    let ac_residual = (rho_ac.matrix() - product).norm();
    let ac_negativity = negativity(&rho_ac)?.value;

    let mut conditional: f64 = 0.0;
    for s in 0..dc {
        let v = CVector::from_fn(da * db, |k, _| amps[k * dc + s]);
        if v.norm_squared() < P_FLOOR {
            continue;
        }
        let branch = PureState::normalized(v, Dims::bipartite(da, db)?)?;
        let branch_a = partial_trace(&branch.projector(), &[Subsystem::A])?;
        conditional = conditional.max(branch_a.frobenius_distance(&rho_a));
    }

    let ok = ac_residual < EQUALITY_TOL && ac_negativity < EQUALITY_TOL && conditional < 1e-8;
    let metadata = meta(&[
        ("ac_product_residual", ac_residual.to_string()),
        ("ac_negativity", ac_negativity.to_string()),
        ("max_conditional_deviation", conditional.to_string()),
        ("rotated", b_rotation.is_some().to_string()),
        ("dims", tri.to_string()),
        ("subchecks", pass_fail(ok)),
    ]);
    Ok(VerificationReport::decide(
        "monogamy",
        h.to_string(),
        None,
        lhs,
        rhs,
        EQUALITY_TOL,
        Rule::Within,
        rng.seed(),
        metadata,
    ))
}

/// Splits `rho^{T_A} = (1 + a) rho_plus - a rho_minus` and compares `a` with
/// the negativity. The two parts must be orthogonal density matrices.
pub fn check_negativity_decomposition(rho: &DensityMatrix) -> Result<VerificationReport> {
    let n = negativity(rho)?.value;
    if n <= 1e-9 {
        return Ok(VerificationReport::skipped(
            "negativity-decomposition",
            "negativity".into(),
            None,
            0,
            "PPT input",
        ));
    }
    let dims = rho.dims();
    let pt = partial_transpose(rho, Subsystem::A)?;
    let e = eigh(&pt);
    let size = pt.nrows();
    let mut pos = CMatrix::zeros(size, size);
    let mut neg = CMatrix::zeros(size, size);
    for k in 0..size {
        let v = e.vectors.column(k);
        let proj = v * v.adjoint();
        let mu = e.values[k];
        if mu > 0.0 {
            pos += proj.scale(mu);
        } else if mu < 0.0 {
            neg += proj.scale(-mu);
        }
    }
    let a = neg.trace().re;
    let rho_plus = pos.unscale(1.0 + a);
    let rho_minus = neg.unscale(a);
    let orthogonality = product_norm(&rho_plus, &rho_minus).max(product_norm(&rho_minus, &rho_plus));
    let reconstruction = (rho_plus.scale(1.0 + a) - rho_minus.scale(a) - &pt).norm();
    let valid = DensityMatrix::new(rho_plus, dims).is_ok() && DensityMatrix::new(rho_minus, dims).is_ok();
    let ok = orthogonality < 1e-9 && valid;
    let metadata = meta(&[
        ("orthogonality_residual", orthogonality.to_string()),
        ("reconstruction_residual", reconstruction.to_string()),
        ("parts_are_states", valid.to_string()),
        ("subchecks", pass_fail(ok)),
    ]);
    Ok(VerificationReport::decide(
        "negativity-decomposition",
        "negativity".into(),
        None,
        a,
        n,
        1e-10,
        Rule::Within,
        0,
        metadata,
    ))
}

/// Random search for `E_N(mix) > lambda E_N(rho1) + (1 - lambda) E_N(rho2)`.
///
/// Passes when a witness exceeding `1e-6` appears and the negativity itself
/// stays convex on every trial. The first witness is stored in the metadata.
pub fn check_logneg_nonconvexity(rng: &mut Rng, trials: usize) -> Result<VerificationReport> {
    let dims = Dims::bipartite(2, 2)?;
    let seed = rng.seed();
    let mut witness: Option<(usize, f64, DensityMatrix, DensityMatrix, f64, f64)> = None;
    let mut witnesses = 0;
    let mut control_violations = 0;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for t in 0..trials {
        let r1 = random_mixed(dims, rng.int_in(1, 4), rng)?;
        let r2 = random_mixed(dims, rng.int_in(1, 4), rng)?;
        let lambda = rng.uniform();
        let mix = DensityMatrix::mixture(&[lambda, 1.0 - lambda], &[&r1, &r2])?;
        let lhs = log_negativity(&mix)?.value;
        let rhs = lambda * log_negativity(&r1)?.value + (1.0 - lambda) * log_negativity(&r2)?.value;
        let n_mix = negativity(&mix)?.value;
        let n_avg = lambda * negativity(&r1)?.value + (1.0 - lambda) * negativity(&r2)?.value;
        if n_mix > n_avg + EQUALITY_TOL {
            control_violations += 1;
        }
        let gap = lhs - rhs;
        if gap > best.0 {
            best = (gap, lhs, rhs);
        }
        if gap > STRICT_FLOOR {
            witnesses += 1;
            if witness.is_none() {
                witness = Some((t, lambda, r1, r2, lhs, rhs));
            }
        }
    }
    let mut metadata = meta(&[
        ("trials", trials.to_string()),
        ("witnesses", witnesses.to_string()),
        ("control_measure", "negativity".into()),
        ("control_violations", control_violations.to_string()),
        ("subchecks", pass_fail(control_violations == 0)),
    ]);
    let (lhs, rhs) = match &witness {
        Some((t, lambda, r1, r2, lhs, rhs)) => {
            metadata.insert("witness_trial".into(), t.to_string());
            metadata.insert("witness_lambda".into(), lambda.to_string());
            metadata.insert("witness_rho1".into(), serde_json::to_string(&StateFile::from_density(r1))?);
            metadata.insert("witness_rho2".into(), serde_json::to_string(&StateFile::from_density(r2))?);
            (*lhs, *rhs)
        }
        None => (best.1, best.2),
    };
    Ok(VerificationReport::decide(
        "logneg-nonconvexity",
        "log-negativity".into(),
        None,
        lhs,
        rhs,
        STRICT_FLOOR,
        Rule::Exceeds,
        seed,
        metadata,
    ))
}
