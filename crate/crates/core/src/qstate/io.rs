//! JSON state files.
//!
//! ```json
//! { "dims": [2, 2], "matrix": [[re, im], ...] }   // row-major density matrix
//! { "dims": [2, 2], "vector": [[re, im], ...] }   // pure state
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CMatrix, CVector, DensityMatrix, Dims, PureState, C64};
use crate::{Error, Result};

/// On-disk representation. Exactly one of `matrix` and `vector` is present.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct StateFile {
    pub dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vector: Option<Vec<[f64; 2]>>,
}

impl StateFile {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let m = rho.matrix();
        let n = m.nrows();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        StateFile {
            dims: rho.dims().factors(),
            matrix: Some(entries),
            vector: None,
        }
    }

    pub fn from_pure(psi: &PureState) -> Self {
        StateFile {
            dims: psi.dims().factors(),
            matrix: None,
            vector: Some(psi.amplitudes().iter().map(|z| [z.re, z.im]).collect()),
        }
    }

    /// Parses into a density matrix; pure states become projectors.
    pub fn to_density(&self) -> Result<DensityMatrix> {
        match self.to_pure()? {
            Some(psi) => Ok(psi.projector()),
            None => {
                let dims = Dims::from_slice(&self.dims)?;
                let entries = self.matrix.as_ref().expect("checked in to_pure");
                let n = dims.total();
                if entries.len() != n * n {
                    return Err(Error::Parse(format!(
                        "matrix has {} entries, dims {dims} need {}",
                        entries.len(),
                        n * n
                    )));
                }
                let m = CMatrix::from_fn(n, n, |i, j| {
                    let [re, im] = entries[i * n + j];
                    C64::new(re, im)
                });
                DensityMatrix::new(m, dims)
            }
        }
    }

    /// `Some` for vector files, `None` for matrix files.
    pub fn to_pure(&self) -> Result<Option<PureState>> {
        match (&self.matrix, &self.vector) {
            (Some(_), None) => Ok(None),
            (None, Some(v)) => {
                let dims = Dims::from_slice(&self.dims)?;
                let amps = CVector::from_iterator(v.len(), v.iter().map(|&[re, im]| C64::new(re, im)));
                PureState::new(amps, dims).map(Some)
            }
            _ => Err(Error::Parse(
                "state file needs exactly one of \"matrix\" or \"vector\"".into(),
            )),
        }
    }
}

pub fn load_state(path: impl AsRef<Path>) -> Result<StateFile> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

pub fn save_state(path: impl AsRef<Path>, state: &StateFile) -> Result<()> {
    let text = serde_json::to_string(state)?;
    std::fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{random_mixed, random_pure, Rng};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn density_round_trip_is_bit_exact(seed in any::<u64>(), rank in 1usize..=6) {
            let dims = Dims::bipartite(2, 3).unwrap();
            let rho = random_mixed(dims, rank, &mut Rng::new(seed)).unwrap();
            let text = serde_json::to_string(&StateFile::from_density(&rho)).unwrap();
            let back: StateFile = serde_json::from_str(&text).unwrap();
            let parsed = back.to_density().unwrap();
            prop_assert_eq!(parsed.matrix(), rho.matrix());
        }

        #[test]
        fn pure_round_trip_is_bit_exact(seed in any::<u64>()) {
            let dims = Dims::bipartite(3, 3).unwrap();
            let psi = random_pure(dims, &mut Rng::new(seed)).unwrap();
            let text = serde_json::to_string(&StateFile::from_pure(&psi)).unwrap();
            let back: StateFile = serde_json::from_str(&text).unwrap();
            let parsed = back.to_pure().unwrap().unwrap();
            prop_assert_eq!(parsed.amplitudes(), psi.amplitudes());
        }
    }

    #[test]
    fn rejects_ambiguous_files() {
        let f = StateFile {
            dims: vec![2, 2],
            matrix: None,
            vector: None,
        };
        assert!(matches!(f.to_density(), Err(Error::Parse(_))));
    }

    #[test]
    fn rejects_wrong_entry_count() {
        let text = r#"{"dims":[2,2],"matrix":[[1,0],[0,0]]}"#;
        let f: StateFile = serde_json::from_str(text).unwrap();
        assert!(f.to_density().is_err());
    }
}
