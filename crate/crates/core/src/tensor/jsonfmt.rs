//! JSON wire format for labeled matrices and vectors.
//!
//! ```json
//! {
//!   "row_layout": [["A_I", 2], ["A_O", 2]],
//!   "col_layout": [["A_I", 2], ["A_O", 2]],
//!   "entries": [[1.0, 0.0], ...]
//! }
//! ```
//!
//! Entries are row-major `[re, im]` pairs. Vectors use an empty `col_layout`.
//! Serialization must round-trip bit-exactly, which `serde_json`'s shortest
//! float representation guarantees for finite values.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CVector;

use super::layout::SpaceLayout;
use super::operator::LabeledOperator;
use super::vector::LabeledVector;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub row_layout: Vec<(String, usize)>,
    pub col_layout: Vec<(String, usize)>,
    pub entries: Vec<(f64, f64)>,
}

impl From<&LabeledOperator> for MatrixJson {
    fn from(op: &LabeledOperator) -> Self {
        let m = op.matrix();
        let mut entries = Vec::with_capacity(m.nrows() * m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                let z = m[(i, j)];
                entries.push((z.re, z.im));
            }
        }
        MatrixJson {
            row_layout: op.row_layout().as_pairs(),
            col_layout: op.col_layout().as_pairs(),
            entries,
        }
    }
}

impl From<&LabeledVector> for MatrixJson {
    fn from(v: &LabeledVector) -> Self {
        MatrixJson {
            row_layout: v.layout().as_pairs(),
            col_layout: Vec::new(),
            entries: v.vector().iter().map(|z| (z.re, z.im)).collect(),
        }
    }
}

impl MatrixJson {
    pub fn to_operator(&self) -> Result<LabeledOperator> {
        let row = SpaceLayout::new(self.row_layout.clone())?;
        let col = SpaceLayout::new(self.col_layout.clone())?;
        let entries: Vec<C64> = self.entries.iter().map(|&(re, im)| C64::new(re, im)).collect();
        LabeledOperator::from_entries(row, col, entries)
    }

    pub fn to_vector(&self) -> Result<LabeledVector> {
        if !self.col_layout.is_empty() {
            return Err(Error::LayoutMismatch(
                "a vector payload must have an empty col_layout".into(),
            ));
        }
        let layout = SpaceLayout::new(self.row_layout.clone())?;
        let expected = layout.total_dim();
        if self.entries.len() != expected {
            return Err(Error::EntryCountMismatch { expected, got: self.entries.len() });
        }
        let v = CVector::from_iterator(
            expected,
            self.entries.iter().map(|&(re, im)| C64::new(re, im)),
        );
        LabeledVector::new(layout, v)
    }
}

/// Serde adapter rendering a complex number as an `[re, im]` pair, matching
/// the matrix entry format.
pub mod complex_pair {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        (z.re, z.im).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let (re, im) = <(f64, f64)>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

impl Serialize for LabeledOperator {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabeledOperator {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        MatrixJson::deserialize(deserializer)?
            .to_operator()
            .map_err(serde::de::Error::custom)
    }
}

impl Serialize for LabeledVector {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for LabeledVector {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        MatrixJson::deserialize(deserializer)?
            .to_vector()
            .map_err(serde::de::Error::custom)
    }
}
