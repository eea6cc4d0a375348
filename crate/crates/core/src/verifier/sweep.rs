use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::checks::{
    check_logneg_nonconvexity, check_monogamy_product, check_monotone,
    check_negativity_decomposition, check_reduced_state_condition, check_strict,
    check_strict_concavity, StateSampler, LOGNEG_TRIALS,
};
use super::{Rule, VerificationReport};
use crate::locc::{classify, random_channel, unitary_mixture_channel, LocalKrausChannel, Side};
use crate::measures::{to_base, EvalOptions, HFunction, Measure};
use crate::qstate::{random_mixed, random_pure, random_unitary, Dims, PureState, Rng};
use crate::ree::{ree_data_processing_check, DATA_PROCESSING_TOL};
use crate::{Error, Result};

/// Every check a sweep can run, in execution order.
pub const CHECK_IDS: &[&str] = &[
    "monotone",
    "strict",
    "strict-equality",
    "strict-concavity",
    "reduced-state",
    "monogamy",
    "negativity-decomposition",
    "logneg-nonconvexity",
    "ree-data-processing",
];

/// Sampled states per strictness trial.
const STRICT_STATES: usize = 100;
const EQUALITY_STATES: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    #[default]
    Nats,
    Bits,
}

impl FromStr for Base {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nats" => Ok(Base::Nats),
            "bits" => Ok(Base::Bits),
            other => Err(Error::InvalidParameter(format!("unknown base {other:?}"))),
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Base::Nats => "nats",
            Base::Bits => "bits",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub checks: Vec<String>,
    pub measures: Vec<String>,
    pub dims: Vec<(usize, usize)>,
    pub trials: usize,
    /// Kraus operators per random channel; `None` draws 2 to 4.
    pub n_kraus: Option<usize>,
    pub seed: u64,
    pub output_path: Option<String>,
    pub base: Base,
    /// Replaces the route-dependent tolerance of the monotonicity check.
    pub tolerance: Option<f64>,
    /// Run measure/dims pairs that need the convex-roof or relative-entropy
    /// optimizer. Otherwise they produce one skipped report each.
    pub allow_optimizers: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            checks: CHECK_IDS.iter().map(|s| s.to_string()).collect(),
            measures: ["negativity", "log-negativity", "eof", "concurrence"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            dims: vec![(2, 2), (2, 3)],
            trials: 200,
            n_kraus: None,
            seed: 0,
            output_path: None,
            base: Base::Nats,
            tolerance: None,
            allow_optimizers: false,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        for c in &self.checks {
            if !CHECK_IDS.contains(&c.as_str()) {
                return Err(Error::UnknownCheck(c.clone()));
            }
        }
        self.parsed_measures()?;
        for &(a, b) in &self.dims {
            if a < 2 || b < 2 || a * b > 16 {
                return Err(Error::InvalidParameter(format!(
                    "dims {a}x{b} outside 2 <= d and d_A d_B <= 16"
                )));
            }
        }
        if self.n_kraus == Some(0) {
            return Err(Error::InvalidParameter("n_kraus must be at least 1".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance {t} must be positive")));
            }
        }
        Ok(())
    }

    fn parsed_measures(&self) -> Result<Vec<Measure>> {
        self.measures.iter().map(|m| m.parse()).collect()
    }
}

/// Whether `measure` has a closed form on every state of these dims.
fn closed_form_on(measure: &Measure, dims: Dims) -> bool {
    match measure {
        Measure::Negativity | Measure::LogNegativity => true,
        Measure::Eof | Measure::Concurrence => dims.a == 2 && dims.b == 2,
        _ => false,
    }
}

fn stream(check: usize, dims: usize, item: usize, trial: usize) -> u64 {
    ((check as u64) << 56) | ((dims as u64) << 48) | ((item as u64) << 40) | trial as u64
}

fn random_side(rng: &mut Rng) -> Side {
    if rng.uniform() < 0.5 {
        Side::A
    } else {
        Side::B
    }
}

fn side_dim(dims: Dims, side: Side) -> usize {
    match side {
        Side::A => dims.a,
        Side::B => dims.b,
    }
}

fn unitary_mixture(d: usize, side: Side, rng: &mut Rng) -> Result<LocalKrausChannel> {
    let k = rng.int_in(1, 3);
    let weights = rng.dirichlet(k);
    let us: Vec<_> = (0..k).map(|_| random_unitary(d, rng)).collect();
    unitary_mixture_channel(&weights, &us, side)
}

/// Rescales entropy-valued sides to bits and recomputes gap and verdict.
fn convert(mut r: VerificationReport, measure: &Measure, base: Base) -> VerificationReport {
    if base == Base::Bits && measure.is_entropic() && r.metadata.contains_key("rule") {
        r.lhs = to_base(r.lhs, measure, true);
        r.rhs = to_base(r.rhs, measure, true);
        r.gap = r.lhs - r.rhs;
        r.verdict = r.recompute_verdict();
    }
    r
}

struct Sweep<'a> {
    config: &'a SweepConfig,
    root: Rng,
    dims: Vec<Dims>,
    measures: Vec<Measure>,
}

impl Sweep<'_> {
    fn kraus_count(&self, rng: &mut Rng) -> usize {
        self.config.n_kraus.unwrap_or_else(|| rng.int_in(2, 4))
    }

    /// Runs `trial` for every trial index in parallel, keeping index order.
    fn trials(
        &self,
        check: usize,
        di: usize,
        item: usize,
        trial: impl Fn(&mut Rng) -> Result<VerificationReport> + Sync,
    ) -> Result<Vec<VerificationReport>> {
        (0..self.config.trials)
            .into_par_iter()
            .map(|t| {
                let mut rng = self.root.derive(stream(check, di, item, t));
                let mut r = trial(&mut rng)?;
                r.seed = rng.seed();
                r.note("trial", t);
                Ok(r)
            })
            .collect()
    }

    fn skip_unless_closed(&self, check: &str, m: &Measure, dims: Dims) -> Option<VerificationReport> {
        if self.config.allow_optimizers || closed_form_on(m, dims) {
            return None;
        }
        let mut r = VerificationReport::skipped(
            check,
            m.to_string(),
            None,
            self.config.seed,
            format!("{m} needs an optimizer on {dims}; enable optimizers to run it"),
        );
        r.note("dims", dims);
        Some(r)
    }

    fn run_check(&self, ci: usize, id: &str) -> Result<Vec<VerificationReport>> {
        let mut out = Vec::new();
        let base = self.config.base;
        match id {
            "monotone" => {
                for (di, &dims) in self.dims.iter().enumerate() {
                    for (mi, m) in self.measures.iter().enumerate() {
                        if let Some(r) = self.skip_unless_closed(id, m, dims) {
                            out.push(r);
                            continue;
                        }
                        out.extend(self.trials(ci, di, mi, |rng| {
                            let rho = random_mixed(dims, rng.int_in(1, dims.total()), rng)?;
                            let side = random_side(rng);
                            let k = self.kraus_count(rng);
                            let ch = random_channel(side, side_dim(dims, side), k, rng)?;
                            let opts = EvalOptions {
                                seed: rng.next_u64(),
                                ..EvalOptions::default()
                            };
                            let mut r = check_monotone(m, &rho, &ch, &opts)?;
                            if let Some(t) = self.config.tolerance {
                                r.tolerance = t;
                                r.verdict = r.recompute_verdict();
                            }
                            Ok(convert(r, m, base))
                        })?);
                    }
                }
            }
            "strict" | "strict-equality" => {
                let equality = id == "strict-equality";
                for (di, &dims) in self.dims.iter().enumerate() {
                    for (mi, m) in self.measures.iter().enumerate() {
                        if equality {
                            if let Some(r) = self.skip_unless_closed(id, m, dims) {
                                out.push(r);
                                continue;
                            }
                        }
                        out.extend(self.trials(ci, di, mi, |rng| {
                            let mut r = if equality {
                                let side = random_side(rng);
                                let ch = unitary_mixture(side_dim(dims, side), side, rng)?;
                                check_strict(m, StateSampler::Mixed, dims, &ch, EQUALITY_STATES, rng)?
                            } else {
                                let k = self.kraus_count(rng);
                                let ch = random_channel(Side::B, dims.b, k, rng)?;
                                check_strict(m, StateSampler::EntangledPure, dims, &ch, STRICT_STATES, rng)?
                            };
                            r.check_id = id.to_string();
                            Ok(convert(r, m, base))
                        })?);
                    }
                }
            }
            "strict-concavity" => {
                for (di, &dims) in self.dims.iter().enumerate() {
                    let single = Dims::single(dims.b)?;
                    for (hi, h) in HFunction::representatives().into_iter().enumerate() {
                        out.extend(self.trials(ci, di, hi, |rng| {
                            let rank = |rng: &mut Rng| {
                                if h == HFunction::GConcurrence {
                                    dims.b
                                } else {
                                    rng.int_in(1, dims.b)
                                }
                            };
                            let r1 = rank(rng);
                            let rho1 = random_mixed(single, r1, rng)?;
                            let r2 = rank(rng);
                            let rho2 = random_mixed(single, r2, rng)?;
                            let lambda = if rng.uniform() < 0.5 { 0.5 } else { 0.01 + 0.98 * rng.uniform() };
                            Ok(convert(check_strict_concavity(h, &rho1, &rho2, lambda)?, &h.measure(), base))
                        })?);
                    }
                }
            }
            "reduced-state" => {
                for (di, &dims) in self.dims.iter().enumerate() {
                    for (hi, h) in HFunction::representatives().into_iter().enumerate() {
                        out.extend(self.trials(ci, di, hi, |rng| {
                            let psi = random_pure(dims, rng)?;
                            let ch = if rng.uniform() < 0.25 {
                                unitary_mixture(dims.b, Side::B, rng)?
                            } else {
                                let k = self.kraus_count(rng);
                                random_channel(Side::B, dims.b, k, rng)?
                            };
                            let mut r = check_reduced_state_condition(h, &psi, &ch)?;
                            r.note("dims", dims);
                            Ok(convert(r, &h.measure(), base))
                        })?);
                    }
                }
            }
            "monogamy" => {
                for (di, &dims) in self.dims.iter().enumerate() {
                    let phi_dims = Dims::bipartite(dims.a, 2)?;
                    let eta_dims = Dims::bipartite(2, dims.b)?;
                    for (hi, h) in HFunction::representatives().into_iter().enumerate() {
                        out.extend(self.trials(ci, di, hi, |rng| {
                            let (phi, eta) = if rng.uniform() < 0.1 && dims.a == 2 && dims.b == 2 {
                                (PureState::bell(), PureState::bell())
                            } else {
                                (random_pure(phi_dims, rng)?, random_pure(eta_dims, rng)?)
                            };
                            let rotation = (rng.uniform() < 0.5).then(|| random_unitary(4, rng));
                            let r = check_monogamy_product(&phi, &eta, h, rotation.as_ref(), rng)?;
                            Ok(convert(r, &h.measure(), base))
                        })?);
                    }
                }
            }
            "negativity-decomposition" => {
                for (di, &dims) in self.dims.iter().enumerate() {
                    out.extend(self.trials(ci, di, 0, |rng| {
                        let rho = random_mixed(dims, rng.int_in(1, 2), rng)?;
                        let mut r = check_negativity_decomposition(&rho)?;
                        r.note("dims", dims);
                        Ok(r)
                    })?);
                }
            }
            "logneg-nonconvexity" => {
                let mut rng = self.root.derive(stream(ci, 0, 0, 0));
                out.push(check_logneg_nonconvexity(&mut rng, LOGNEG_TRIALS)?);
            }
            "ree-data-processing" => {
                for (di, &dims) in self.dims.iter().enumerate() {
                    out.extend(self.trials(ci, di, 0, |rng| {
                        let rho = random_mixed(dims, dims.total(), rng)?;
                        let sigma = random_mixed(dims, dims.total(), rng)?;
                        let side = random_side(rng);
                        let k = self.kraus_count(rng);
                        let ch = random_channel(side, side_dim(dims, side), k, rng)?;
                        Ok(convert(data_processing_report(&rho, &sigma, &ch)?, &Measure::Ree, base))
                    })?);
                }
            }
            other => return Err(Error::UnknownCheck(other.to_string())),
        }
        Ok(out)
    }
}

/// `S(rho || sigma)` against `sum_i S(p_i rho_i || q_i sigma_i)` as a report.
fn data_processing_report(
    rho: &crate::qstate::DensityMatrix,
    sigma: &crate::qstate::DensityMatrix,
    ch: &LocalKrausChannel,
) -> Result<VerificationReport> {
    let dp = ree_data_processing_check(rho, sigma, ch)?;
    let class = classify(ch).tag;
    if let Some(reason) = dp.skipped {
        return Ok(VerificationReport::skipped("ree-data-processing", "relative-entropy".into(), Some(class), 0, reason));
    }
    let equality = dp.gap < DATA_PROCESSING_TOL;
    let subchecks = !equality || dp.max_prob_diff < 1e-6;
    let mut metadata = std::collections::BTreeMap::new();
    metadata.insert("max_prob_diff".to_string(), dp.max_prob_diff.to_string());
    metadata.insert("equality_case".to_string(), equality.to_string());
    metadata.insert("dims".to_string(), rho.dims().to_string());
    metadata.insert("subchecks".to_string(), if subchecks { "pass" } else { "fail" }.to_string());
    Ok(VerificationReport::decide(
        "ree-data-processing",
        "relative-entropy".into(),
        Some(class),
        dp.rhs,
        dp.lhs,
        DATA_PROCESSING_TOL,
        Rule::AtLeast,
        0,
        metadata,
    ))
}

/// Runs the configured checks. Reports are ordered by check, dims, measure
/// and trial, and depend only on the configuration.
pub fn run_sweep(config: &SweepConfig) -> Result<Vec<VerificationReport>> {
    config.validate()?;
    if config.trials == 0 {
        return Ok(Vec::new());
    }
    let sweep = Sweep {
        config,
        root: Rng::new(config.seed),
        dims: config
            .dims
            .iter()
            .map(|&(a, b)| Dims::bipartite(a, b))
            .collect::<Result<_>>()?,
        measures: config.parsed_measures()?,
    };
    let mut reports = Vec::new();
    for id in &config.checks {
        let ci = CHECK_IDS.iter().position(|c| c == id).expect("validated");
        reports.extend(sweep.run_check(ci, id)?);
    }
    Ok(reports)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verifier::{write_jsonl, Verdict};

    fn small(checks: &[&str], trials: usize) -> SweepConfig {
        SweepConfig {
            checks: checks.iter().map(|s| s.to_string()).collect(),
            trials,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn zero_trials_give_no_reports() {
        assert!(run_sweep(&small(CHECK_IDS, 0)).unwrap().is_empty());
    }

    #[test]
    fn identical_configs_give_identical_reports() {
        let cfg = small(&["monotone", "strict-concavity", "ree-data-processing"], 5);
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_jsonl(&run_sweep(&cfg).unwrap(), &mut a).unwrap();
        write_jsonl(&run_sweep(&cfg).unwrap(), &mut b).unwrap();
        assert_eq!(a, b);
        let other = SweepConfig { seed: 1, ..cfg };
        let mut c = Vec::new();
        write_jsonl(&run_sweep(&other).unwrap(), &mut c).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn non_closed_pairs_are_skipped_once() {
        let reports = run_sweep(&small(&["monotone"], 3)).unwrap();
        let skipped: Vec<_> = reports.iter().filter(|r| r.verdict == Verdict::Skipped).collect();
        // eof and concurrence on 2x3
        assert_eq!(skipped.len(), 2);
        assert!(reports.iter().all(|r| r.verdict != Verdict::Fail));
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_tol = SweepConfig { tolerance: Some(-1.0), ..SweepConfig::default() };
        assert!(run_sweep(&bad_tol).is_err());
        let bad_check = small(&["nope"], 1);
        assert!(matches!(run_sweep(&bad_check), Err(Error::UnknownCheck(_))));
        let bad_measure = SweepConfig { measures: vec!["foo".into()], ..SweepConfig::default() };
        assert!(matches!(run_sweep(&bad_measure), Err(Error::UnknownMeasure(_))));
        let bad_dims = SweepConfig { dims: vec![(1, 2)], ..SweepConfig::default() };
        assert!(run_sweep(&bad_dims).is_err());
    }

    #[test]
    fn bits_rescale_entropic_measures_only() {
        let nats = SweepConfig {
            measures: vec!["eof".into(), "negativity".into()],
            dims: vec![(2, 2)],
            ..small(&["monotone"], 3)
        };
        let bits = SweepConfig { base: Base::Bits, ..nats.clone() };
        let a = run_sweep(&nats).unwrap();
        let b = run_sweep(&bits).unwrap();
        for (x, y) in a.iter().zip(&b) {
            let factor = if x.measure_id == "eof" { std::f64::consts::LN_2 } else { 1.0 };
            assert!((x.lhs / factor - y.lhs).abs() < 1e-12);
        }
    }

    #[test]
    fn config_json_round_trip() {
        let cfg = SweepConfig::default();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: SweepConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        let partial: SweepConfig = serde_json::from_str(r#"{"trials": 3, "base": "bits"}"#).unwrap();
        assert_eq!(partial.trials, 3);
        assert_eq!(partial.base, Base::Bits);
        assert!(serde_json::from_str::<SweepConfig>(r#"{"bogus": 1}"#).is_err());
    }
}
