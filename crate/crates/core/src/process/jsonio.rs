//! Process file format: party dimension table plus a labeled payload.
//!
//! ```json
//! {
//!   "parties": [
//!     {"name": "P", "d_in": 1, "d_out": 4},
//!     {"name": "A", "d_in": 2, "d_out": 2}
//!   ],
//!   "kind": "vector",
//!   "data": { "row_layout": [["P_c", 2], ["P_t", 2], ...], ... }
//! }
//! ```
//!
//! Party subsystems are recovered by walking the payload layout left to
//! right: each party consumes labels until their dimensions multiply up to
//! its `d_in`, then to its `d_out`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{MatrixJson, SpaceLayout};

use super::party::{Party, PartySpace};
use super::structure::{ProcessMatrix, ProcessVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Vector,
    Matrix,
}

/// Serializable envelope for process vectors and matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProcessJson {
    pub parties: Vec<Party>,
    pub kind: ProcessKind,
    pub data: MatrixJson,
}

/// A process of either kind, as loaded from a file.
#[derive(Debug, Clone)]
pub enum Process {
    Vector(ProcessVector),
    Matrix(ProcessMatrix),
}

impl Process {
    pub fn parties(&self) -> &[PartySpace] {
        match self {
            Process::Vector(w) => w.parties(),
            Process::Matrix(w) => w.parties(),
        }
    }

    /// The process matrix (the outer product, for a vector).
    pub fn to_matrix(&self) -> ProcessMatrix {
        match self {
            Process::Vector(w) => w.to_matrix(),
            Process::Matrix(w) => w.clone(),
        }
    }
}

impl From<&ProcessVector> for ProcessJson {
    fn from(w: &ProcessVector) -> Self {
        ProcessJson {
            parties: w.parties().iter().map(PartySpace::dims).collect(),
            kind: ProcessKind::Vector,
            data: MatrixJson::from(w.vector()),
        }
    }
}

impl From<&ProcessMatrix> for ProcessJson {
    fn from(w: &ProcessMatrix) -> Self {
        ProcessJson {
            parties: w.parties().iter().map(PartySpace::dims).collect(),
            kind: ProcessKind::Matrix,
            data: MatrixJson::from(w.operator()),
        }
    }
}

/// Assigns the layout's subsystems to the parties by the greedy dimension
/// walk described in the module docs.
fn assign_subsystems(parties: &[Party], layout: &SpaceLayout) -> Result<Vec<PartySpace>> {
    let subs = layout.subsystems();
    let mut pos = 0usize;
    let mut spaces = Vec::with_capacity(parties.len());
    let walk = |target: usize, pos: &mut usize| -> Result<Vec<(String, usize)>> {
        let mut acc = 1usize;
        let mut taken = Vec::new();
        while acc < target {
            let sub = subs.get(*pos).ok_or_else(|| {
                Error::LayoutMismatch(
                    "payload layout ends before covering the party dimensions".into(),
                )
            })?;
            acc *= sub.dim;
            taken.push((sub.label.clone(), sub.dim));
            *pos += 1;
        }
        if acc != target {
            return Err(Error::DimMismatch {
                context: "party dimension vs consumed subsystem dimensions",
                expected: target,
                got: acc,
            });
        }
        Ok(taken)
    };
    for party in parties {
        let inputs = walk(party.d_in, &mut pos)?;
        let outputs = walk(party.d_out, &mut pos)?;
        spaces.push(PartySpace::custom(&party.name, inputs, outputs)?);
    }
    if pos != subs.len() {
        return Err(Error::LayoutMismatch(format!(
            "payload layout has {} subsystems beyond the party table",
            subs.len() - pos
        )));
    }
    Ok(spaces)
}

impl ProcessJson {
    pub fn into_process(self) -> Result<Process> {
        match self.kind {
            ProcessKind::Vector => {
                let v = self.data.to_vector()?;
                let parties = assign_subsystems(&self.parties, v.layout())?;
                Ok(Process::Vector(ProcessVector::new(parties, v)?))
            }
            ProcessKind::Matrix => {
                let m = self.data.to_operator()?;
                let parties = assign_subsystems(&self.parties, m.row_layout())?;
                Ok(Process::Matrix(ProcessMatrix::new(parties, m)?))
            }
        }
    }
}

impl Serialize for ProcessVector {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ProcessJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProcessVector {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        match ProcessJson::deserialize(deserializer)?.into_process() {
            Ok(Process::Vector(w)) => Ok(w),
            Ok(Process::Matrix(_)) => {
                Err(serde::de::Error::custom("expected kind `vector`, found `matrix`"))
            }
            Err(e) => Err(serde::de::Error::custom(e)),
        }
    }
}

impl Serialize for ProcessMatrix {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        ProcessJson::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProcessMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(
        deserializer: D,
    ) -> std::result::Result<Self, D::Error> {
        match ProcessJson::deserialize(deserializer)?.into_process() {
            Ok(Process::Matrix(w)) => Ok(w),
            Ok(Process::Vector(_)) => {
                Err(serde::de::Error::custom("expected kind `matrix`, found `vector`"))
            }
            Err(e) => Err(serde::de::Error::custom(e)),
        }
    }
}
