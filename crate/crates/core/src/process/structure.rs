//! Process vectors and process matrices over a fixed party list.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::tensor::{LabeledOperator, LabeledVector};

use super::party::{canonical_layout, PartySpace};

/// Pure higher-order process: a vector over the canonical party layout whose
/// outer product with itself is the process matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessVector {
    parties: Vec<PartySpace>,
    vector: LabeledVector,
}

impl ProcessVector {
    pub fn new(parties: Vec<PartySpace>, vector: LabeledVector) -> Result<Self> {
        let canonical = canonical_layout(&parties)?;
        if vector.layout() != &canonical {
            return Err(Error::LayoutMismatch(format!(
                "vector layout {:?} does not match the canonical party layout {:?}",
                vector.layout().labels().collect::<Vec<_>>(),
                canonical.labels().collect::<Vec<_>>()
            )));
        }
        Ok(Self { parties, vector })
    }

    pub fn parties(&self) -> &[PartySpace] {
        &self.parties
    }

    pub fn party(&self, name: &str) -> Option<&PartySpace> {
        self.parties.iter().find(|p| p.name() == name)
    }

    pub fn vector(&self) -> &LabeledVector {
        &self.vector
    }

    pub fn norm(&self) -> f64 {
        self.vector.norm()
    }

    /// Rank-1 process matrix `|w><w|`.
    pub fn to_matrix(&self) -> ProcessMatrix {
        ProcessMatrix {
            parties: self.parties.clone(),
            matrix: self.vector.outer(&self.vector),
        }
    }
}

/// Process matrix: a square operator over the canonical party layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    parties: Vec<PartySpace>,
    matrix: LabeledOperator,
}

impl ProcessMatrix {
    pub fn new(parties: Vec<PartySpace>, matrix: LabeledOperator) -> Result<Self> {
        let canonical = canonical_layout(&parties)?;
        if matrix.row_layout() != &canonical || matrix.col_layout() != &canonical {
            return Err(Error::LayoutMismatch(
                "matrix must be square over the canonical party layout".into(),
            ));
        }
        Ok(Self { parties, matrix })
    }

    pub fn parties(&self) -> &[PartySpace] {
        &self.parties
    }

    pub fn party(&self, name: &str) -> Option<&PartySpace> {
        self.parties.iter().find(|p| p.name() == name)
    }

    pub fn operator(&self) -> &LabeledOperator {
        &self.matrix
    }

    /// Required trace of a valid process: the product of output dimensions.
    pub fn expected_trace(&self) -> f64 {
        self.parties.iter().map(|p| p.d_out() as f64).product()
    }

    /// Weighted sum `a W1 + b W2` over one party list (e.g. a classical
    /// mixture of fixed-order processes when `a + b = 1`).
    pub fn mix(a: f64, w1: &Self, b: f64, w2: &Self) -> Result<Self> {
        if w1.parties != w2.parties {
            return Err(Error::LayoutMismatch("mixed processes must share parties".into()));
        }
        let matrix = w1
            .matrix
            .scale(C64::new(a, 0.0))
            .add(&w2.matrix.scale(C64::new(b, 0.0)))?;
        Ok(Self { parties: w1.parties.clone(), matrix })
    }
}

/// Coherent superposition `alpha w1 + beta w2` of two process vectors over
/// one party list. Both amplitudes must be nonzero; no normalization is
/// applied.
pub fn superpose(
    alpha: C64,
    w1: &ProcessVector,
    beta: C64,
    w2: &ProcessVector,
) -> Result<ProcessVector> {
    if alpha.norm() == 0.0 || beta.norm() == 0.0 {
        return Err(Error::ZeroAmplitude);
    }
    if w1.parties != w2.parties {
        return Err(Error::LayoutMismatch("superposed processes must share parties".into()));
    }
    let vector = w1.vector.scale(alpha).add(&w2.vector.scale(beta))?;
    Ok(ProcessVector { parties: w1.parties.clone(), vector })
}
