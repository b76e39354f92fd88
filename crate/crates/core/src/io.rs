//! JSON file formats.
//!
//! Pure state: `{"n": 2, "amplitudes": [[re, im], ...]}` with `2^n` entries in
//! lexicographic basis order, qubit 0 most significant.
//!
//! Density state: `{"n": 1, "matrix": [[[re, im], ...], ...]}`, row-major.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::{DensityState, PureState};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateFile {
    pub n: usize,
    pub amplitudes: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityFile {
    pub n: usize,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

/// Either file kind, distinguished by its fields.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum AnyStateFile {
    Pure(StateFile),
    Density(DensityFile),
}

impl From<&PureState> for StateFile {
    fn from(s: &PureState) -> Self {
        Self {
            n: s.num_qubits(),
            amplitudes: s.amplitudes().iter().map(|a| [a.re, a.im]).collect(),
        }
    }
}

impl StateFile {
    pub fn into_state(self) -> Result<PureState> {
        let expected = 1usize.checked_shl(self.n as u32).unwrap_or(0);
        if self.amplitudes.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                actual: self.amplitudes.len(),
            });
        }
        PureState::new(
            self.amplitudes
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<&DensityState> for DensityFile {
    fn from(rho: &DensityState) -> Self {
        let m = rho.matrix();
        Self {
            n: rho.num_qubits(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                .collect(),
        }
    }
}

impl DensityFile {
    pub fn into_state(self) -> Result<DensityState> {
        let dim = 1usize.checked_shl(self.n as u32).unwrap_or(0);
        if self.matrix.len() != dim || self.matrix.iter().any(|row| row.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: self.matrix.len(),
            });
        }
        let entries: Vec<Complex64> = self
            .matrix
            .into_iter()
            .flatten()
            .map(|[re, im]| Complex64::new(re, im))
            .collect();
        DensityState::new(DMatrix::from_row_slice(dim, dim, &entries))
    }
}

pub fn state_to_json(state: &PureState) -> Result<String> {
    Ok(serde_json::to_string(&StateFile::from(state))?)
}

pub fn state_from_json(text: &str) -> Result<PureState> {
    serde_json::from_str::<StateFile>(text)?.into_state()
}
