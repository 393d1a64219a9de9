use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CVector;

use super::layout::{split_index, SpaceLayout};
use super::operator::{permutation_map, LabeledOperator};

/// Dense complex ket over a labeled tensor-product space.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledVector {
    layout: SpaceLayout,
    v: CVector,
}

impl LabeledVector {
    pub fn new(layout: SpaceLayout, v: CVector) -> Result<Self> {
        if v.len() != layout.total_dim() {
            return Err(Error::DimMismatch {
                context: "vector length vs layout",
                expected: layout.total_dim(),
                got: v.len(),
            });
        }
        Ok(Self { layout, v })
    }

    pub fn from_entries(layout: SpaceLayout, entries: Vec<C64>) -> Result<Self> {
        let expected = layout.total_dim();
        if entries.len() != expected {
            return Err(Error::EntryCountMismatch { expected, got: entries.len() });
        }
        Ok(Self { layout, v: CVector::from_vec(entries) })
    }

    /// Ket on a single labeled subsystem.
    pub fn ket<L: Into<String>>(label: L, amplitudes: Vec<C64>) -> Result<Self> {
        let layout = SpaceLayout::single(label, amplitudes.len())?;
        Ok(Self { layout, v: CVector::from_vec(amplitudes) })
    }

    /// Computational basis state `|j>` of a `dim`-dimensional subsystem.
    pub fn basis<L: Into<String>>(label: L, dim: usize, j: usize) -> Result<Self> {
        if j >= dim {
            return Err(Error::DimMismatch { context: "basis index", expected: dim, got: j });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[j] = C64::new(1.0, 0.0);
        Self::ket(label, amplitudes)
    }

    /// Qubit `|+>` state.
    pub fn plus<L: Into<String>>(label: L) -> Result<Self> {
        let a = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::ket(label, vec![a, a])
    }

    pub fn layout(&self) -> &SpaceLayout {
        &self.layout
    }

    pub fn vector(&self) -> &CVector {
        &self.v
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.len() == 0
    }

    pub fn norm(&self) -> f64 {
        self.v.norm()
    }

    /// `<self|other>`, conjugating `self`. Layouts must match exactly.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("inner product needs equal layouts".into()));
        }
        Ok(self.v.dotc(&other.v))
    }

    /// Kronecker product, labels of `self` first.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let layout = self.layout.concat(&other.layout)?;
        let mut v = CVector::zeros(self.v.len() * other.v.len());
        for (i, a) in self.v.iter().enumerate() {
            for (j, b) in other.v.iter().enumerate() {
                v[i * other.v.len() + j] = a * b;
            }
        }
        Ok(Self { layout, v })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.layout != other.layout {
            return Err(Error::LayoutMismatch("sum needs equal layouts".into()));
        }
        Ok(Self { layout: self.layout.clone(), v: &self.v + &other.v })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { layout: self.layout.clone(), v: &self.v * factor }
    }

    pub fn conjugate(&self) -> Self {
        Self { layout: self.layout.clone(), v: self.v.conjugate() }
    }

    /// Reorders subsystems; `new_order` must be a permutation of the labels.
    pub fn permute_subsystems(&self, new_order: &[&str]) -> Result<Self> {
        let new_layout = self.layout.reordered(new_order)?;
        let map = permutation_map(&self.layout, &new_layout);
        let mut v = CVector::zeros(self.v.len());
        for (i, z) in self.v.iter().enumerate() {
            v[map[i]] = *z;
        }
        Ok(Self { layout: new_layout, v })
    }

    /// Outer product `|self><other|`.
    pub fn outer(&self, other: &Self) -> LabeledOperator {
        let m = &self.v * other.v.adjoint();
        LabeledOperator::new(self.layout.clone(), other.layout.clone(), m)
            .expect("outer product dims always match")
    }

    /// Projects subsystem `label` onto basis state `j` and drops the label.
    pub fn project_basis(&self, label: &str, j: usize) -> Result<Self> {
        let pos = self
            .layout
            .position(label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
        let dim = self.layout.subsystems()[pos].dim;
        if j >= dim {
            return Err(Error::DimMismatch { context: "projection index", expected: dim, got: j });
        }
        let split = split_index(&self.layout, &[pos]);
        let new_layout = self.layout.filtered(|l| l != label);
        let mut v = CVector::zeros(split.rest_dim);
        for (flat, z) in self.v.iter().enumerate() {
            if split.picked[flat] as usize == j {
                v[split.rest[flat] as usize] = *z;
            }
        }
        Ok(Self { layout: new_layout, v })
    }

    /// Contracts `sum_j <j|_a <j|_b` into the vector, dropping both labels.
    /// This is the (unnormalized) maximally entangled bra pairing of the two
    /// subsystems, which must have equal dimensions.
    pub fn contract_pair(&self, label_a: &str, label_b: &str) -> Result<Self> {
        let (pa, pb) = self.pair_positions(label_a, label_b)?;
        let split = split_index(&self.layout, &[pa, pb]);
        let d = self.layout.subsystems()[pa].dim;
        let new_layout = self.layout.filtered(|l| l != label_a && l != label_b);
        let mut v = CVector::zeros(split.rest_dim);
        for (flat, z) in self.v.iter().enumerate() {
            let picked = split.picked[flat] as usize;
            // The picked index runs over (a, b) in layout order.
            let (ja, jb) = if pa < pb { (picked / d, picked % d) } else { (picked % d, picked / d) };
            if ja == jb {
                v[split.rest[flat] as usize] += *z;
            }
        }
        Ok(Self { layout: new_layout, v })
    }

    /// Contracts the bra double-ket `<<u|` over `(label_a, label_b)`, i.e.
    /// `sum_{j,k} conj(u[k,j]) <j|_a <k|_b`, dropping both labels.
    pub fn contract_bra_double_ket(
        &self,
        u: &LabeledOperator,
        label_a: &str,
        label_b: &str,
    ) -> Result<Self> {
        let (pa, pb) = self.pair_positions(label_a, label_b)?;
        let d = self.layout.subsystems()[pa].dim;
        if u.matrix().nrows() != d || u.matrix().ncols() != d {
            return Err(Error::DimMismatch {
                context: "double-ket contraction matrix size",
                expected: d,
                got: u.matrix().nrows(),
            });
        }
        let split = split_index(&self.layout, &[pa, pb]);
        let new_layout = self.layout.filtered(|l| l != label_a && l != label_b);
        let mut v = CVector::zeros(split.rest_dim);
        for (flat, z) in self.v.iter().enumerate() {
            let picked = split.picked[flat] as usize;
            let (ja, jb) = if pa < pb { (picked / d, picked % d) } else { (picked % d, picked / d) };
            v[split.rest[flat] as usize] += u.matrix()[(jb, ja)].conj() * z;
        }
        Ok(Self { layout: new_layout, v })
    }

    fn pair_positions(&self, label_a: &str, label_b: &str) -> Result<(usize, usize)> {
        if label_a == label_b {
            return Err(Error::LabelCollision(label_a.to_string()));
        }
        let pa = self
            .layout
            .position(label_a)
            .ok_or_else(|| Error::UnknownLabel(label_a.to_string()))?;
        let pb = self
            .layout
            .position(label_b)
            .ok_or_else(|| Error::UnknownLabel(label_b.to_string()))?;
        let (da, db) = (self.layout.subsystems()[pa].dim, self.layout.subsystems()[pb].dim);
        if da != db {
            return Err(Error::DimMismatch {
                context: "paired subsystems must have equal dims",
                expected: da,
                got: db,
            });
        }
        Ok((pa, pb))
    }
}
