//! JSON encoding of complex matrices: `{"rows": r, "cols": c, "data": [[[re, im], ...], ...]}`
//! with `data` listed row by row.

use serde::{Deserialize, Serialize};

use super::{C64, CMat};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<[f64; 2]>>,
}

impl MatrixJson {
    pub fn from_matrix(m: &CMat) -> Self {
        let data = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        Self { rows: m.nrows(), cols: m.ncols(), data }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        if self.data.len() != self.rows {
            return Err(Error::Parse(format!(
                "matrix declares {} rows but lists {}",
                self.rows,
                self.data.len()
            )));
        }
        let mut m = CMat::zeros(self.rows, self.cols);
        for (i, row) in self.data.iter().enumerate() {
            if row.len() != self.cols {
                return Err(Error::Parse(format!(
                    "row {i} has {} entries, expected {}",
                    row.len(),
                    self.cols
                )));
            }
            for (j, z) in row.iter().enumerate() {
                m[(i, j)] = C64::new(z[0], z[1]);
            }
        }
        Ok(m)
    }
}
