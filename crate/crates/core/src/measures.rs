//! Entanglement measures.
//!
//! Pure-state measures are all of the form `E(|psi><psi|) = h(rho_A)` for a
//! unitarily invariant function `h` of the reduced state; see [`HFunction`].
//! Mixed states are handled either by a closed form (negativity, logarithmic
//! negativity, and the two-qubit concurrence / entanglement of formation) or
//! by the numerical convex roof and relative-entropy solvers.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::qstate::linalg::xlogx;
use crate::qstate::{
    eigh, partial_transpose, trace_norm, CMatrix, DensityMatrix, PureState, Rng,
    Subsystem, C64,
};
use crate::ree::{ree_minimize, ReeOptions};
use crate::roof::{default_n_terms, roof_minimize, RoofOptions};
use crate::{Error, Result};

/// Measure values in `[-NEGATIVE_CLIP, 0)` are reported as exactly zero.
pub const NEGATIVE_CLIP: f64 = 1e-12;

/// The reduced-state functions `h` defining pure-state measures.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum HFunction {
    /// `-sum mu ln mu`
    Entropy,
    /// `sqrt(2 (1 - Tr rho^2))`
    Concurrence,
    /// `d (det rho)^(1/d)`
    GConcurrence,
    /// `2 (1 - Tr rho^2)`
    Tangle,
    /// `((sum sqrt(mu))^2 - 1) / 2`
    NegativityH,
    /// `ln(Tr rho^alpha) / (1 - alpha)`, `alpha` in `(0, 1]`
    Renyi(f64),
    /// `(1 - Tr rho^q) / (q - 1)`, `q > 0`, `q != 1`
    Tsallis(f64),
}

impl HFunction {
    pub fn renyi(alpha: f64) -> Result<Self> {
        let h = HFunction::Renyi(alpha);
        h.validate()?;
        Ok(h)
    }

    pub fn tsallis(q: f64) -> Result<Self> {
        let h = HFunction::Tsallis(q);
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            HFunction::Renyi(a) if !(a > 0.0 && a <= 1.0) => Err(Error::InvalidParameter(
                format!("Renyi order {a} outside (0, 1]"),
            )),
            HFunction::Tsallis(q) if !(q > 0.0 && q != 1.0 && q.is_finite()) => Err(
                Error::InvalidParameter(format!("Tsallis order {q} must be positive and != 1")),
            ),
            _ => Ok(()),
        }
    }

    /// One representative of every kind, with Renyi order 1/2 and Tsallis order 2.
    pub fn representatives() -> Vec<HFunction> {
        vec![
            HFunction::Entropy,
            HFunction::Concurrence,
            HFunction::GConcurrence,
            HFunction::Tangle,
            HFunction::NegativityH,
            HFunction::Renyi(0.5),
            HFunction::Tsallis(2.0),
        ]
    }

    /// The id of the convex-roof measure built from this function.
    pub fn measure(&self) -> Measure {
        match *self {
            HFunction::Entropy => Measure::Eof,
            HFunction::Concurrence => Measure::Concurrence,
            HFunction::GConcurrence => Measure::GConcurrence,
            HFunction::Tangle => Measure::Tangle,
            HFunction::NegativityH => Measure::NegativityRoof,
            HFunction::Renyi(a) => Measure::Renyi(a),
            HFunction::Tsallis(q) => Measure::Tsallis(q),
        }
    }

    /// Evaluates `h` on a spectrum. Entries are clipped at zero; the caller
    /// supplies a unit-sum spectrum.
    pub fn eval_spectrum(&self, spectrum: &[f64]) -> f64 {
        let mu = spectrum.iter().map(|&m| m.max(0.0));
        let value = match *self {
            HFunction::Entropy => -mu.map(xlogx).sum::<f64>(),
            HFunction::Concurrence => (2.0 * (1.0 - mu.map(|m| m * m).sum::<f64>())).max(0.0).sqrt(),
            HFunction::Tangle => 2.0 * (1.0 - mu.map(|m| m * m).sum::<f64>()),
            HFunction::GConcurrence => {
                let d = spectrum.len() as f64;
                let mut log_det = 0.0;
                for m in mu {
                    if m <= 0.0 {
                        return 0.0;
                    }
                    log_det += m.ln();
                }
                d * (log_det / d).exp()
            }
            HFunction::NegativityH => {
                let s: f64 = mu.map(f64::sqrt).sum();
                (s * s - 1.0) / 2.0
            }
            HFunction::Renyi(1.0) => -mu.map(xlogx).sum::<f64>(),
            HFunction::Renyi(a) => {
                let tr: f64 = mu.filter(|&m| m > 0.0).map(|m| m.powf(a)).sum();
                tr.ln() / (1.0 - a)
            }
            HFunction::Tsallis(q) => {
                let tr: f64 = mu.filter(|&m| m > 0.0).map(|m| m.powf(q)).sum();
                (1.0 - tr) / (q - 1.0)
            }
        };
        clip(value)
    }
}

impl fmt::Display for HFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HFunction::Entropy => write!(f, "entropy"),
            HFunction::Concurrence => write!(f, "concurrence"),
            HFunction::GConcurrence => write!(f, "g-concurrence"),
            HFunction::Tangle => write!(f, "tangle"),
            HFunction::NegativityH => write!(f, "negativity"),
            HFunction::Renyi(a) => write!(f, "renyi:{a}"),
            HFunction::Tsallis(q) => write!(f, "tsallis:{q}"),
        }
    }
}

fn clip(v: f64) -> f64 {
    if (-NEGATIVE_CLIP..0.0).contains(&v) {
        0.0
    } else {
        v
    }
}

/// `h(rho_A)`. Any single-factor density matrix is accepted.
pub fn h_eval(h: HFunction, rho_a: &DensityMatrix) -> Result<f64> {
    h.validate()?;
    Ok(h.eval_spectrum(&rho_a.spectrum()))
}

/// Optional metadata from the numerical solvers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverDiagnostics {
    pub iterations: usize,
    pub restarts: usize,
    pub converged: bool,
    pub gap_estimate: Option<f64>,
}

/// A computed measure value. Nats, except for the logarithmic negativity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureValue {
    pub value: f64,
    pub measure_id: String,
    pub diagnostics: Option<SolverDiagnostics>,
}

impl MeasureValue {
    fn closed(measure: Measure, value: f64) -> Self {
        MeasureValue {
            value: clip(value),
            measure_id: measure.to_string(),
            diagnostics: None,
        }
    }
}

/// `E(|psi><psi|) = h(Tr_B |psi><psi|)`.
pub fn pure_measure(h: HFunction, psi: &PureState) -> Result<MeasureValue> {
    h.validate()?;
    if psi.dims().is_tripartite() {
        return Err(Error::DimensionMismatch("pure_measure needs a bipartite state".into()));
    }
    let dims = psi.dims();
    let spectrum = reduced_spectrum(psi.amplitudes().as_slice(), dims.a, dims.b);
    Ok(MeasureValue::closed(h.measure(), h.eval_spectrum(&spectrum)))
}

/// `N(rho) = (||rho^{T_A}||_1 - 1) / 2`.
pub fn negativity(rho: &DensityMatrix) -> Result<MeasureValue> {
    let pt = partial_transpose(rho, Subsystem::A)?;
    Ok(MeasureValue::closed(
        Measure::Negativity,
        (trace_norm(&pt) - 1.0) / 2.0,
    ))
}

/// `log2 ||rho^{T_A}||_1`, in bits.
pub fn log_negativity(rho: &DensityMatrix) -> Result<MeasureValue> {
    let pt = partial_transpose(rho, Subsystem::A)?;
    Ok(MeasureValue::closed(
        Measure::LogNegativity,
        trace_norm(&pt).log2(),
    ))
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    let d = rho.dims();
    if d.a != 2 || d.b != 2 || d.is_tripartite() {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit formula called on {d}"
        )));
    }
    Ok(())
}

/// Eigenvalues of `rho` at or below this are treated as exact zeros by the
/// two-qubit formulas.
const WOOTTERS_RANK_TOL: f64 = 1e-13;

/// Two-qubit concurrence `max(0, s1 - s2 - s3 - s4)` where `s_i` are the
/// decreasing square roots of the spectrum of `rho (Y(x)Y) rho* (Y(x)Y)`.
///
/// The `s_i` are computed as singular values of `W^T (Y(x)Y) W` with
/// `rho = W W^dagger`, which avoids square roots of roundoff-level
/// eigenvalues on rank-deficient states.
pub fn wootters_concurrence(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let i = C64::new(0.0, 1.0);
    let o = C64::new(0.0, 0.0);
    let sy = DMatrix::from_row_slice(2, 2, &[o, -i, i, o]);
    let flip = sy.kronecker(&sy);
    let eig = eigh(rho.matrix());
    let kept: Vec<usize> = (0..4).filter(|&k| eig.values[k] > WOOTTERS_RANK_TOL).collect();
    let w = CMatrix::from_fn(4, kept.len(), |row, col| {
        let k = kept[col];
        eig.vectors[(row, k)] * eig.values[k].sqrt()
    });
    let tau = w.transpose() * flip * &w;
    let mut s: Vec<f64> = tau.singular_values().iter().copied().collect();
    s.resize(4, 0.0);
    s.sort_by(|a, b| b.total_cmp(a));
    Ok((s[0] - s[1] - s[2] - s[3]).clamp(0.0, 1.0))
}

/// Binary entropy in nats.
pub(crate) fn binary_entropy(x: f64) -> f64 {
    -(xlogx(x) + xlogx(1.0 - x))
}

/// `H((1 + sqrt(1 - C^2)) / 2)` in nats.
pub fn wootters_eof(rho: &DensityMatrix) -> Result<f64> {
    let c = wootters_concurrence(rho)?;
    Ok(clip(binary_entropy((1.0 + (1.0 - c * c).max(0.0).sqrt()) / 2.0)))
}

/// Measures addressable by id from the CLI and the verifier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Measure {
    Eof,
    Concurrence,
    GConcurrence,
    Tangle,
    Negativity,
    NegativityRoof,
    LogNegativity,
    Renyi(f64),
    Tsallis(f64),
    Ree,
}

/// How a measure is computed on a particular state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    ClosedForm,
    ConvexRoof,
    RelativeEntropy,
}

impl Route {
    /// Tolerance for inequality checks on values computed along this route.
    pub fn tolerance(self) -> f64 {
        match self {
            Route::ClosedForm => 1e-9,
            Route::ConvexRoof => 2e-3,
            Route::RelativeEntropy => 2e-2,
        }
    }
}

/// Solver budgets used when a measure has no closed form on a state.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvalOptions {
    pub roof: RoofOptions,
    /// `None` picks [`default_n_terms`].
    pub roof_n_terms: Option<usize>,
    pub ree: ReeOptions,
    pub seed: u64,
}

/// Second-largest eigenvalue bound under which a state counts as pure.
pub const PURE_TOL: f64 = 1e-9;

impl Measure {
    pub fn all_ids() -> &'static [&'static str] {
        &[
            "eof",
            "concurrence",
            "g-concurrence",
            "tangle",
            "negativity",
            "negativity-roof",
            "log-negativity",
            "renyi:<alpha>",
            "tsallis:<q>",
            "ree",
        ]
    }

    /// The `h` defining the measure on pure states, if it has one.
    pub fn h_function(&self) -> Option<HFunction> {
        match *self {
            Measure::Eof | Measure::Ree => Some(HFunction::Entropy),
            Measure::Concurrence => Some(HFunction::Concurrence),
            Measure::GConcurrence => Some(HFunction::GConcurrence),
            Measure::Tangle => Some(HFunction::Tangle),
            Measure::NegativityRoof => Some(HFunction::NegativityH),
            Measure::Renyi(a) => Some(HFunction::Renyi(a)),
            Measure::Tsallis(q) => Some(HFunction::Tsallis(q)),
            Measure::Negativity | Measure::LogNegativity => None,
        }
    }

    /// True for the one measure reported in bits regardless of `--base`.
    pub fn is_log2(&self) -> bool {
        matches!(self, Measure::LogNegativity)
    }

    /// True for the entropy-valued measures, which carry a logarithm base.
    /// The remaining measures other than the log-negativity are dimensionless.
    pub fn is_entropic(&self) -> bool {
        matches!(self, Measure::Eof | Measure::Renyi(_) | Measure::Ree)
    }

    pub fn route(&self, rho: &DensityMatrix) -> Route {
        let dims = rho.dims();
        let two_qubits = dims.a == 2 && dims.b == 2 && !dims.is_tripartite();
        match self {
            Measure::Negativity | Measure::LogNegativity => Route::ClosedForm,
            Measure::Eof | Measure::Concurrence if two_qubits => Route::ClosedForm,
            _ if rho.is_pure(PURE_TOL) => Route::ClosedForm,
            Measure::Ree => Route::RelativeEntropy,
            _ => Route::ConvexRoof,
        }
    }

    /// Evaluates the measure on `rho`, choosing the cheapest exact route.
    pub fn evaluate(&self, rho: &DensityMatrix, opts: &EvalOptions) -> Result<MeasureValue> {
        if let Some(h) = self.h_function() {
            h.validate()?;
        }
        if rho.dims().is_tripartite() {
            return Err(Error::DimensionMismatch(format!(
                "measure {self} needs a bipartite state, got {}",
                rho.dims()
            )));
        }
        let dims = rho.dims();
        let two_qubits = dims.a == 2 && dims.b == 2;
        match self {
            Measure::Negativity => return negativity(rho),
            Measure::LogNegativity => return log_negativity(rho),
            Measure::Eof if two_qubits => {
                return Ok(MeasureValue::closed(*self, wootters_eof(rho)?))
            }
            Measure::Concurrence if two_qubits => {
                return Ok(MeasureValue::closed(*self, wootters_concurrence(rho)?))
            }
            _ => {}
        }
        let h = self.h_function().expect("remaining measures have an h");
        if rho.is_pure(PURE_TOL) {
            let mut v = pure_measure(h, &rho.principal_state())?;
            v.measure_id = self.to_string();
            return Ok(v);
        }
        let mut rng = Rng::new(opts.seed);
        if *self == Measure::Ree {
            let res = ree_minimize(rho, &opts.ree, &mut rng)?;
            return Ok(MeasureValue {
                value: clip(res.value),
                measure_id: self.to_string(),
                diagnostics: Some(SolverDiagnostics {
                    iterations: res.iterations,
                    restarts: opts.ree.lmo_restarts,
                    converged: res.converged,
                    gap_estimate: Some(res.duality_gap_estimate),
                }),
            });
        }
        let n_terms = opts
            .roof_n_terms
            .unwrap_or_else(|| default_n_terms(rho));
        let res = roof_minimize(h, rho, n_terms, &opts.roof, &mut rng)?;
        Ok(MeasureValue {
            value: clip(res.value),
            measure_id: self.to_string(),
            diagnostics: Some(SolverDiagnostics {
                iterations: res.iterations,
                restarts: res.restarts_used,
                converged: res.converged,
                gap_estimate: None,
            }),
        })
    }

    /// Evaluates on a pure state without forming the density matrix twice.
    pub fn evaluate_pure(&self, psi: &PureState) -> Result<MeasureValue> {
        match self.h_function() {
            Some(h) => {
                let mut v = pure_measure(h, psi)?;
                v.measure_id = self.to_string();
                Ok(v)
            }
            None => self.evaluate(&psi.projector(), &EvalOptions::default()),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Eof => write!(f, "eof"),
            Measure::Concurrence => write!(f, "concurrence"),
            Measure::GConcurrence => write!(f, "g-concurrence"),
            Measure::Tangle => write!(f, "tangle"),
            Measure::Negativity => write!(f, "negativity"),
            Measure::NegativityRoof => write!(f, "negativity-roof"),
            Measure::LogNegativity => write!(f, "log-negativity"),
            Measure::Renyi(a) => write!(f, "renyi:{a}"),
            Measure::Tsallis(q) => write!(f, "tsallis:{q}"),
            Measure::Ree => write!(f, "ree"),
        }
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let param = |rest: &str| -> Result<f64> {
            rest.parse::<f64>()
                .map_err(|_| Error::UnknownMeasure(s.to_string()))
        };
        let m = match s {
            "eof" => Measure::Eof,
            "concurrence" => Measure::Concurrence,
            "g-concurrence" => Measure::GConcurrence,
            "tangle" => Measure::Tangle,
            "negativity" => Measure::Negativity,
            "negativity-roof" => Measure::NegativityRoof,
            "log-negativity" => Measure::LogNegativity,
            "ree" => Measure::Ree,
            _ => {
                if let Some(rest) = s.strip_prefix("renyi:") {
                    Measure::Renyi(HFunction::renyi(param(rest)?)?.parameter())
                } else if let Some(rest) = s.strip_prefix("tsallis:") {
                    Measure::Tsallis(HFunction::tsallis(param(rest)?)?.parameter())
                } else {
                    return Err(Error::UnknownMeasure(s.to_string()));
                }
            }
        };
        Ok(m)
    }
}

impl HFunction {
    fn parameter(&self) -> f64 {
        match *self {
            HFunction::Renyi(a) => a,
            HFunction::Tsallis(q) => q,
            _ => f64::NAN,
        }
    }
}

/// Converts an entropy-valued measure from nats to bits. Other measures are
/// returned unchanged.
pub fn to_base(value: f64, measure: &Measure, bits: bool) -> f64 {
    if bits && measure.is_entropic() {
        value / LN_2
    } else {
        value
    }
}

/// Spectrum of `Tr_B |v><v|` for an unnormalized `v` reshaped as `d_A x d_B`,
/// padded with zeros to length `d_A`.
///
/// When either factor is a qubit the small eigenvalue comes from the
/// Cauchy-Binet expansion of the 2x2 Gram determinant, which has no
/// cancellation; otherwise singular values of the coefficient matrix are used.
pub(crate) fn reduced_spectrum(v: &[C64], da: usize, db: usize) -> Vec<f64> {
    let at = |i: usize, j: usize| v[i * db + j];
    let qubit_gram = |rows: usize, cols: usize, get: &dyn Fn(usize, usize) -> C64| {
        // rows == 2: Gram matrix of the two rows
        debug_assert_eq!(rows, 2);
        let mut tr = 0.0;
        for k in 0..cols {
            tr += get(0, k).norm_sqr() + get(1, k).norm_sqr();
        }
        let mut det = 0.0;
        for k in 0..cols {
            for l in (k + 1)..cols {
                det += (get(0, k) * get(1, l) - get(0, l) * get(1, k)).norm_sqr();
            }
        }
        let top = 0.5 * tr + (0.25 * tr * tr - det).max(0.0).sqrt();
        let low = if top > 0.0 { det / top } else { 0.0 };
        [low, top]
    };
    let mut spec = if da == 2 {
        qubit_gram(2, db, &|i, j| at(i, j)).to_vec()
    } else if db == 2 {
        let mut s = qubit_gram(2, da, &|i, j| at(j, i)).to_vec();
        s.resize(da, 0.0);
        s
    } else {
        let c = CMatrix::from_fn(da, db, at);
        let mut s: Vec<f64> = c.singular_values().iter().map(|x| x * x).collect();
        s.resize(da, 0.0);
        s
    };
    spec.sort_by(f64::total_cmp);
    spec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_mixed, random_pure, random_separable, random_unitary, Dims};
    use approx::assert_abs_diff_eq;

    fn single(d: usize) -> Dims {
        Dims::single(d).unwrap()
    }

    #[test]
    fn h_on_maximally_mixed_states() {
        let half = DensityMatrix::maximally_mixed(single(2));
        assert_abs_diff_eq!(h_eval(HFunction::Entropy, &half).unwrap(), LN_2, epsilon = 1e-15);
        assert_abs_diff_eq!(h_eval(HFunction::Concurrence, &half).unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(h_eval(HFunction::Tangle, &half).unwrap(), 1.0, epsilon = 1e-15);
        for d in 2..=4 {
            let mm = DensityMatrix::maximally_mixed(single(d));
            assert_abs_diff_eq!(
                h_eval(HFunction::GConcurrence, &mm).unwrap(),
                1.0,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn renyi_half_matches_direct_formula() {
        let rho = DensityMatrix::diagonal(&[0.9, 0.1], single(2)).unwrap();
        let oracle = 2.0 * (0.9f64.sqrt() + 0.1f64.sqrt()).ln();
        assert_abs_diff_eq!(
            h_eval(HFunction::renyi(0.5).unwrap(), &rho).unwrap(),
            oracle,
            epsilon = 1e-14
        );
    }

    #[test]
    fn h_parameter_ranges() {
        assert!(HFunction::renyi(0.0).is_err());
        assert!(HFunction::renyi(1.5).is_err());
        assert!(HFunction::renyi(1.0).is_ok());
        assert!(HFunction::tsallis(1.0).is_err());
        assert!(HFunction::tsallis(-0.5).is_err());
        assert!(HFunction::tsallis(0.5).is_ok());
        let rho = DensityMatrix::maximally_mixed(single(2));
        assert!(h_eval(HFunction::Renyi(0.0), &rho).is_err());
    }

    #[test]
    fn h_vanishes_exactly_on_pure_states() {
        let mut rng = Rng::new(21);
        let psi = random_pure(single(3), &mut rng).unwrap().projector();
        for h in HFunction::representatives() {
            assert!(h_eval(h, &psi).unwrap().abs() < 1e-10, "{h}");
        }
    }

    #[test]
    fn h_is_unitarily_invariant() {
        let mut rng = Rng::new(22);
        let rho = random_mixed(single(3), 3, &mut rng).unwrap();
        let u = random_unitary(3, &mut rng);
        let rotated = rho.conjugate_by(&u).unwrap();
        for h in HFunction::representatives() {
            let a = h_eval(h, &rho).unwrap();
            let b = h_eval(h, &rotated).unwrap();
            assert!((a - b).abs() < 1e-12, "{h}: {a} vs {b}");
        }
    }

    #[test]
    fn bell_and_product_pure_measures() {
        let bell = PureState::bell();
        assert_abs_diff_eq!(
            pure_measure(HFunction::Entropy, &bell).unwrap().value,
            LN_2,
            epsilon = 1e-14
        );
        // Schmidt-coefficient oracle: ((sqrt(1/2) + sqrt(1/2))^2 - 1) / 2
        let oracle = ((0.5f64.sqrt() + 0.5f64.sqrt()).powi(2) - 1.0) / 2.0;
        assert_abs_diff_eq!(
            pure_measure(HFunction::NegativityH, &bell).unwrap().value,
            oracle,
            epsilon = 1e-14
        );
        let product = PureState::basis(3, Dims::bipartite(2, 2).unwrap()).unwrap();
        for h in HFunction::representatives() {
            assert_eq!(pure_measure(h, &product).unwrap().value, 0.0);
        }
    }

    #[test]
    fn negativity_examples() {
        let bell = PureState::bell().projector();
        assert_abs_diff_eq!(negativity(&bell).unwrap().value, 0.5, epsilon = 1e-12);
        let max3 = PureState::maximally_entangled(3).unwrap().projector();
        // ((3 / sqrt(3))^2 - 1) / 2
        let oracle = ((3.0 / 3f64.sqrt()).powi(2) - 1.0) / 2.0;
        assert_abs_diff_eq!(negativity(&max3).unwrap().value, oracle, epsilon = 1e-12);
        let mut rng = Rng::new(23);
        let sep = random_separable(Dims::bipartite(2, 3).unwrap(), 5, &mut rng).unwrap();
        assert!(negativity(&sep).unwrap().value < 1e-10);
    }

    #[test]
    fn negativity_matches_pure_formula() {
        let mut rng = Rng::new(24);
        for (a, b) in [(2, 2), (2, 3), (3, 3)] {
            for _ in 0..20 {
                let psi = random_pure(Dims::bipartite(a, b).unwrap(), &mut rng).unwrap();
                let n = negativity(&psi.projector()).unwrap().value;
                let p = pure_measure(HFunction::NegativityH, &psi).unwrap().value;
                assert!((n - p).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn log_negativity_examples() {
        let bell = PureState::bell().projector();
        assert_abs_diff_eq!(log_negativity(&bell).unwrap().value, 1.0, epsilon = 1e-12);
        let mut rng = Rng::new(25);
        let sep = random_separable(Dims::bipartite(2, 2).unwrap(), 3, &mut rng).unwrap();
        assert!(log_negativity(&sep).unwrap().value.abs() < 1e-10);
        // trace norm = 1 + 2N
        for _ in 0..20 {
            let rho = random_mixed(Dims::bipartite(2, 2).unwrap(), 2, &mut rng).unwrap();
            let n = negativity(&rho).unwrap().value;
            let en = log_negativity(&rho).unwrap().value;
            assert!((en - (1.0 + 2.0 * n).log2()).abs() < 1e-12);
        }
    }

    #[test]
    fn wootters_examples() {
        let bell = PureState::bell().projector();
        assert_abs_diff_eq!(wootters_concurrence(&bell).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(wootters_eof(&bell).unwrap(), LN_2, epsilon = 1e-10);
        let werner = DensityMatrix::werner(0.9).unwrap();
        assert_abs_diff_eq!(wootters_concurrence(&werner).unwrap(), 0.85, epsilon = 1e-10);
        let diag = DensityMatrix::diagonal(&[0.4, 0.3, 0.2, 0.1], Dims::bipartite(2, 2).unwrap())
            .unwrap();
        assert_eq!(wootters_concurrence(&diag).unwrap(), 0.0);
        assert_eq!(wootters_eof(&diag).unwrap(), 0.0);
        let wrong = DensityMatrix::maximally_mixed(Dims::bipartite(2, 3).unwrap());
        assert!(matches!(
            wootters_concurrence(&wrong),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn wootters_matches_entropy_on_pure_states() {
        let mut rng = Rng::new(26);
        for _ in 0..50 {
            let psi = random_pure(Dims::bipartite(2, 2).unwrap(), &mut rng).unwrap();
            let ef = wootters_eof(&psi.projector()).unwrap();
            let s = pure_measure(HFunction::Entropy, &psi).unwrap().value;
            assert!((ef - s).abs() < 1e-10, "{ef} vs {s}");
        }
    }

    #[test]
    fn measure_ids_round_trip() {
        for id in [
            "eof",
            "concurrence",
            "g-concurrence",
            "tangle",
            "negativity",
            "negativity-roof",
            "log-negativity",
            "renyi:0.5",
            "tsallis:2",
            "ree",
        ] {
            let m: Measure = id.parse().unwrap();
            assert_eq!(m.to_string(), id);
        }
        assert!("renyi:0".parse::<Measure>().is_err());
        assert!("tsallis:1".parse::<Measure>().is_err());
        assert!("entanglement".parse::<Measure>().is_err());
    }

    #[test]
    fn base_conversion() {
        assert_abs_diff_eq!(to_base(LN_2, &Measure::Eof, true), 1.0, epsilon = 1e-15);
        assert_eq!(to_base(0.7, &Measure::LogNegativity, true), 0.7);
        assert_eq!(to_base(0.7, &Measure::Eof, false), 0.7);
        assert_eq!(to_base(0.5, &Measure::Negativity, true), 0.5);
        assert_eq!(to_base(0.5, &Measure::Tangle, true), 0.5);
        assert_abs_diff_eq!(to_base(LN_2, &Measure::Renyi(0.5), true), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn reduced_spectrum_matches_eigensolver() {
        let mut rng = Rng::new(27);
        for (a, b) in [(2, 2), (2, 3), (3, 2), (3, 3), (2, 1)] {
            let dims = Dims::bipartite(a, b).unwrap();
            let psi = random_pure(dims, &mut rng).unwrap();
            let v: Vec<C64> = psi.amplitudes().iter().map(|z| z * 1.5).collect();
            let fast = reduced_spectrum(&v, a, b);
            let rho_a = crate::qstate::partial_trace(&psi.projector(), &[Subsystem::A]).unwrap();
            let slow = eigh(rho_a.matrix()).values;
            assert_eq!(fast.len(), a);
            for (f, s) in fast.iter().zip(slow.iter()) {
                assert!((f / 2.25 - s).abs() < 1e-12, "{a}x{b}: {f} vs {s}");
            }
        }
    }

    #[test]
    fn reduced_spectrum_is_exact_on_products() {
        let psi = PureState::product(
            &crate::qstate::CVector::from_vec(vec![C64::new(0.6, 0.0), C64::new(0.0, 0.8)]),
            &crate::qstate::CVector::from_vec(vec![C64::new(0.28, 0.96), C64::new(0.0, 0.0)]),
        )
        .unwrap();
        let s = reduced_spectrum(psi.amplitudes().as_slice(), 2, 2);
        assert_eq!(s[0], 0.0);
    }
}
