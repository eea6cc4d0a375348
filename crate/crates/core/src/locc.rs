//! One-sided stochastic LOCC: Kraus families `{M_k}` acting on a single
//! subsystem, `Phi_k(X) = (I (x) M_k) X (I (x) M_k)^dagger` for side B and the
//! mirror image for side A.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::qstate::linalg::isometry_residual;
use crate::qstate::{
    local_operator, random_isometry, CMatrix, DensityMatrix, Rng, Subsystem, C64,
};
use crate::{Error, Result};

/// `||sum M_k^dagger M_k - I||_F` accepted for a channel.
pub const TOL_COMPLETENESS: f64 = 1e-8;
/// Outcomes less likely than this are dropped.
pub const P_FLOOR: f64 = 1e-12;
/// `||M^dagger M - c I||_F` accepted for "proportional to a unitary".
pub const TOL_PROPORTIONAL: f64 = 1e-8;

/// Which side a local channel acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    A,
    B,
}

impl From<Side> for Subsystem {
    fn from(s: Side) -> Self {
        match s {
            Side::A => Subsystem::A,
            Side::B => Subsystem::B,
        }
    }
}

/// A complete Kraus family on one side.
#[derive(Clone, Debug)]
pub struct LocalKrausChannel {
    side: Side,
    kraus: Vec<CMatrix>,
}

impl LocalKrausChannel {
    pub fn new(side: Side, kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidParameter("empty Kraus family".into()))?;
        let d = first.nrows();
        if kraus.iter().any(|m| m.nrows() != d || m.ncols() != d) {
            return Err(Error::DimensionMismatch(
                "Kraus operators must all be square of equal size".into(),
            ));
        }
        let residual = completeness_residual(&kraus);
        if residual > TOL_COMPLETENESS {
            return Err(Error::Completeness(residual));
        }
        Ok(LocalKrausChannel { side, kraus })
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    /// Dimension of the subsystem acted on.
    pub fn dim(&self) -> usize {
        self.kraus[0].nrows()
    }

    /// `Phi_k(rho)` for every `k`, unnormalized, without dropping outcomes.
    pub fn branches(&self, rho: &CMatrix, dims: crate::qstate::Dims) -> Result<Vec<CMatrix>> {
        self.kraus
            .iter()
            .map(|m| {
                let op = local_operator(m, self.side.into(), dims)?;
                Ok(&op * rho * op.adjoint())
            })
            .collect()
    }
}

/// `||sum_k M_k^dagger M_k - I||_F`.
pub fn completeness_residual(kraus: &[CMatrix]) -> f64 {
    let d = kraus[0].ncols();
    let mut sum = CMatrix::zeros(d, d);
    for m in kraus {
        sum += m.adjoint() * m;
    }
    (sum - CMatrix::identity(d, d)).norm()
}

/// Outcome probabilities and post-measurement states.
#[derive(Clone, Debug)]
pub struct OutcomeEnsemble {
    pub outcomes: Vec<(f64, DensityMatrix)>,
    /// Kraus index of each retained outcome.
    pub kraus_indices: Vec<usize>,
}

impl OutcomeEnsemble {
    pub fn probabilities(&self) -> Vec<f64> {
        self.outcomes.iter().map(|(p, _)| *p).collect()
    }

    /// `sum_k p_k sigma_k`.
    pub fn average(&self) -> CMatrix {
        let n = self.outcomes[0].1.dims().total();
        let mut m = CMatrix::zeros(n, n);
        for (p, s) in &self.outcomes {
            m += s.matrix().scale(*p);
        }
        m
    }
}

/// Applies every branch and normalizes:
/// `p_k = Tr Phi_k(rho)`, `sigma_k = Phi_k(rho) / p_k`.
pub fn apply(channel: &LocalKrausChannel, rho: &DensityMatrix) -> Result<OutcomeEnsemble> {
    let dims = rho.dims();
    if dims.is_tripartite() {
        return Err(Error::DimensionMismatch("local channels act on bipartite states".into()));
    }
    let side_dim = match channel.side {
        Side::A => dims.a,
        Side::B => dims.b,
    };
    if side_dim != channel.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}-dimensional channel on side {:?} of {dims}",
            channel.dim(),
            channel.side
        )));
    }
    let branches = channel.branches(rho.matrix(), dims)?;
    let mut probs = Vec::with_capacity(branches.len());
    for b in &branches {
        probs.push(b.trace().re.max(0.0));
    }
    let kept: Vec<usize> = (0..branches.len()).filter(|&k| probs[k] >= P_FLOOR).collect();
    let total: f64 = kept.iter().map(|&k| probs[k]).sum();
    let mut outcomes = Vec::with_capacity(kept.len());
    for &k in &kept {
        let sigma = DensityMatrix::from_hermitian_unchecked(branches[k].clone(), dims);
        outcomes.push((probs[k] / total, sigma));
    }
    Ok(OutcomeEnsemble {
        outcomes,
        kraus_indices: kept,
    })
}

/// The equality-case taxonomy for stochastic LOCC.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelTag {
    LocalUnitary,
    MixtureOfLocalUnitaries,
    General,
}

impl fmt::Display for ChannelTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ChannelTag::LocalUnitary => "local_unitary",
            ChannelTag::MixtureOfLocalUnitaries => "mixture_of_local_unitaries",
            ChannelTag::General => "general",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelClass {
    pub tag: ChannelTag,
    /// `c_k` with `M_k^dagger M_k = c_k I`, when every operator has that form.
    pub weights: Option<Vec<f64>>,
}

impl ChannelClass {
    pub fn is_unitary_like(&self) -> bool {
        self.tag != ChannelTag::General
    }
}

/// Classifies a channel by testing `M_k^dagger M_k = c_k I` with
/// `c_k = Tr(M_k^dagger M_k) / d`.
///
/// Operators with `c_k` below the outcome floor are ignored. If every
/// remaining operator passes, the channel is a mixture of local unitaries, and
/// a single local unitary when the remaining operators are pairwise
/// proportional.
pub fn classify(channel: &LocalKrausChannel) -> ChannelClass {
    let d = channel.dim();
    let id = CMatrix::identity(d, d);
    let mut weights = Vec::new();
    let mut effective = Vec::new();
    for m in &channel.kraus {
        let gram = m.adjoint() * m;
        let c = gram.trace().re / d as f64;
        if c < P_FLOOR {
            weights.push(0.0);
            continue;
        }
        if (&gram - id.scale(c)).norm() > TOL_PROPORTIONAL {
            return ChannelClass {
                tag: ChannelTag::General,
                weights: None,
            };
        }
        weights.push(c);
        effective.push(m.unscale(c.sqrt()));
    }
    // unitaries U, W are proportional iff |Tr(U^dagger W)| = d
    let single = effective.windows(2).all(|w| {
        let overlap = (w[0].adjoint() * &w[1]).trace().norm();
        (overlap - d as f64).abs() <= TOL_PROPORTIONAL
    });
    ChannelClass {
        tag: if single {
            ChannelTag::LocalUnitary
        } else {
            ChannelTag::MixtureOfLocalUnitaries
        },
        weights: Some(weights),
    }
}

/// Kraus operators are the `d x d` blocks of an `(n d) x d` Haar isometry.
pub fn random_channel(side: Side, d: usize, n_kraus: usize, rng: &mut Rng) -> Result<LocalKrausChannel> {
    if n_kraus == 0 || d == 0 {
        return Err(Error::InvalidParameter("need d >= 1 and n_kraus >= 1".into()));
    }
    let v = random_isometry(n_kraus * d, d, rng);
    let kraus = (0..n_kraus)
        .map(|k| v.rows(k * d, d).into_owned())
        .collect();
    LocalKrausChannel::new(side, kraus)
}

/// `M_k = sqrt(w_k) U_k`.
pub fn unitary_mixture_channel(
    weights: &[f64],
    unitaries: &[CMatrix],
    side: Side,
) -> Result<LocalKrausChannel> {
    if weights.len() != unitaries.len() || weights.is_empty() {
        return Err(Error::InvalidParameter(
            "need one weight per unitary and at least one unitary".into(),
        ));
    }
    if weights.iter().any(|&w| w < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter("weights must form a probability vector".into()));
    }
    for u in unitaries {
        let residual = isometry_residual(u);
        if u.nrows() != u.ncols() || residual > 1e-10 {
            return Err(Error::NotUnitary(residual));
        }
    }
    let kraus = weights
        .iter()
        .zip(unitaries)
        .map(|(w, u)| u.scale(w.sqrt()))
        .collect();
    LocalKrausChannel::new(side, kraus)
}

/// Channel file: `{ "side": "A"|"B", "kraus": [ [[re, im], ...], ... ] }`,
/// each operator row-major.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ChannelFile {
    pub side: Side,
    pub kraus: Vec<Vec<[f64; 2]>>,
}

impl ChannelFile {
    pub fn from_channel(channel: &LocalKrausChannel) -> Self {
        let kraus = channel
            .kraus
            .iter()
            .map(|m| {
                let d = m.nrows();
                (0..d * d)
                    .map(|idx| {
                        let z = m[(idx / d, idx % d)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect();
        ChannelFile {
            side: channel.side,
            kraus,
        }
    }

    pub fn to_channel(&self) -> Result<LocalKrausChannel> {
        let mut ops = Vec::with_capacity(self.kraus.len());
        for entries in &self.kraus {
            let d = (entries.len() as f64).sqrt().round() as usize;
            if d * d != entries.len() {
                return Err(Error::Parse(format!(
                    "Kraus operator with {} entries is not square",
                    entries.len()
                )));
            }
            ops.push(CMatrix::from_fn(d, d, |i, j| {
                let [re, im] = entries[i * d + j];
                C64::new(re, im)
            }));
        }
        LocalKrausChannel::new(self.side, ops)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, serde_json::to_string(self)?)?;
        Ok(())
    }
}
