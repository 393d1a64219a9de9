use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One labeled tensor factor. Dimension 1 encodes a trivial space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labeled tensor factors.
///
/// The leftmost subsystem is the slowest-varying index of the flattened
/// (row-major) space, i.e. `index = i_0 * d_1 * d_2 * ... + i_1 * d_2 * ... + ...`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SpaceLayout {
    subsystems: Vec<Subsystem>,
}

impl SpaceLayout {
    pub fn new<L: Into<String>>(pairs: Vec<(L, usize)>) -> Result<Self> {
        let subsystems: Vec<Subsystem> = pairs
            .into_iter()
            .map(|(label, dim)| Subsystem { label: label.into(), dim })
            .collect();
        for s in &subsystems {
            if s.dim == 0 {
                return Err(Error::DimMismatch {
                    context: "subsystem dimension must be at least 1",
                    expected: 1,
                    got: 0,
                });
            }
        }
        for (i, s) in subsystems.iter().enumerate() {
            if subsystems[..i].iter().any(|t| t.label == s.label) {
                return Err(Error::LabelCollision(s.label.clone()));
            }
        }
        Ok(Self { subsystems })
    }

    /// Single-subsystem layout.
    pub fn single<L: Into<String>>(label: L, dim: usize) -> Result<Self> {
        Self::new(vec![(label, dim)])
    }

    /// Layout of a trivial (one-dimensional, unlabeled) space.
    pub fn scalar() -> Self {
        Self::default()
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|s| s.dim).product()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|s| s.label.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|s| s.dim).collect()
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.subsystems.iter().position(|s| s.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|p| self.subsystems[p].dim)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    /// Concatenation; labels must stay unique.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut pairs: Vec<(String, usize)> =
            self.subsystems.iter().map(|s| (s.label.clone(), s.dim)).collect();
        pairs.extend(other.subsystems.iter().map(|s| (s.label.clone(), s.dim)));
        Self::new(pairs)
    }

    /// Row-major strides, one per subsystem.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1usize; self.subsystems.len()];
        for i in (0..self.subsystems.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * self.subsystems[i + 1].dim;
        }
        strides
    }

    /// Sublayout of the subsystems selected by `keep`, order preserved.
    pub fn filtered(&self, keep: impl Fn(&str) -> bool) -> Self {
        Self {
            subsystems: self
                .subsystems
                .iter()
                .filter(|s| keep(&s.label))
                .cloned()
                .collect(),
        }
    }

    /// Reordered layout; `order` must be a permutation of the labels.
    pub fn reordered(&self, order: &[&str]) -> Result<Self> {
        if order.len() != self.subsystems.len() {
            return Err(Error::NotAPermutation);
        }
        let mut seen = vec![false; self.subsystems.len()];
        let mut subsystems = Vec::with_capacity(order.len());
        for label in order {
            let p = self
                .position(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            if seen[p] {
                return Err(Error::NotAPermutation);
            }
            seen[p] = true;
            subsystems.push(self.subsystems[p].clone());
        }
        Ok(Self { subsystems })
    }

    pub(crate) fn as_pairs(&self) -> Vec<(String, usize)> {
        self.subsystems.iter().map(|s| (s.label.clone(), s.dim)).collect()
    }
}

/// Precomputed index arithmetic for splitting a layout into two groups of
/// subsystems: for every flat index, the flat indices of the selected and of
/// the remaining subsystems.
pub(crate) struct SplitIndex {
    pub picked: Vec<u32>,
    pub rest: Vec<u32>,
    pub picked_dim: usize,
    pub rest_dim: usize,
}

pub(crate) fn split_index(layout: &SpaceLayout, selected: &[usize]) -> SplitIndex {
    let dims = layout.dims();
    let n = dims.len();
    let is_sel: Vec<bool> = (0..n).map(|i| selected.contains(&i)).collect();

    // Strides of the flattened picked/rest groups, each in original order.
    let mut picked_stride = vec![0usize; n];
    let mut rest_stride = vec![0usize; n];
    let mut picked_dim = 1usize;
    let mut rest_dim = 1usize;
    for i in (0..n).rev() {
        if is_sel[i] {
            picked_stride[i] = picked_dim;
            picked_dim *= dims[i];
        } else {
            rest_stride[i] = rest_dim;
            rest_dim *= dims[i];
        }
    }

    let total = layout.total_dim();
    let full_stride = layout.strides();
    let mut picked = vec![0u32; total];
    let mut rest = vec![0u32; total];
    for flat in 0..total {
        let mut p = 0usize;
        let mut r = 0usize;
        let mut remainder = flat;
        for i in 0..n {
            let idx = remainder / full_stride[i];
            remainder %= full_stride[i];
            if is_sel[i] {
                p += idx * picked_stride[i];
            } else {
                r += idx * rest_stride[i];
            }
        }
        picked[flat] = p as u32;
        rest[flat] = r as u32;
    }
    SplitIndex { picked, rest, picked_dim, rest_dim }
}
