//! JSON instance files. Complex numbers are `[re, im]` pairs and matrices are
//! row-major nested arrays.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{PureState, UnitaryMatrix};
use crate::state_set::StateSet;

/// `{"dimension": d, "states": [[[re, im], ...], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSetFile {
    pub dimension: usize,
    pub states: Vec<Vec<Complex64>>,
}

impl StateSetFile {
    pub fn from_set(set: &StateSet) -> Self {
        Self {
            dimension: set.dim(),
            states: set.states().iter().map(|s| s.amplitudes().to_vec()).collect(),
        }
    }

    pub fn into_set(self) -> Result<StateSet> {
        let states = self
            .states
            .into_iter()
            .map(|amps| {
                if amps.len() != self.dimension {
                    return Err(Error::DimensionMismatch(self.dimension, amps.len()));
                }
                PureState::new(amps)
            })
            .collect::<Result<Vec<_>>>()?;
        StateSet::new(states)
    }
}

/// `{"dimension": d, "state": [[re, im], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateFile {
    pub dimension: usize,
    pub state: Vec<Complex64>,
}

impl StateFile {
    pub fn from_state(psi: &PureState) -> Self {
        Self {
            dimension: psi.dim(),
            state: psi.amplitudes().to_vec(),
        }
    }

    pub fn into_state(self) -> Result<PureState> {
        if self.state.len() != self.dimension {
            return Err(Error::DimensionMismatch(self.dimension, self.state.len()));
        }
        PureState::new(self.state)
    }
}

/// `{"dimension": d, "matrix": [[[re, im], ...], ...]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitaryFile {
    pub dimension: usize,
    pub matrix: Vec<Vec<Complex64>>,
}

impl UnitaryFile {
    pub fn from_unitary(u: &UnitaryMatrix) -> Self {
        let m = u.matrix();
        Self {
            dimension: u.dim(),
            matrix: (0..m.nrows())
                .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                .collect(),
        }
    }

    pub fn into_unitary(self) -> Result<UnitaryMatrix> {
        let d = self.dimension;
        if self.matrix.len() != d {
            return Err(Error::DimensionMismatch(d, self.matrix.len()));
        }
        if let Some(row) = self.matrix.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch(d, row.len()));
        }
        UnitaryMatrix::new(DMatrix::from_fn(d, d, |i, j| self.matrix[i][j]))
    }
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn read_state_set(path: impl AsRef<Path>) -> Result<StateSet> {
    read_json::<StateSetFile>(path)?.into_set()
}

pub fn read_state(path: impl AsRef<Path>) -> Result<PureState> {
    read_json::<StateFile>(path)?.into_state()
}

pub fn read_unitary(path: impl AsRef<Path>) -> Result<UnitaryMatrix> {
    read_json::<UnitaryFile>(path)?.into_unitary()
}
