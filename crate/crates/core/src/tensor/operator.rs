use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix};

use super::layout::{split_index, SpaceLayout};
use super::vector::LabeledVector;

/// Dense complex operator between two labeled tensor-product spaces.
///
/// Rows live in `row_layout`, columns in `col_layout`; the layouts may differ,
/// so kets, bras and rectangular maps are all representable. Entries follow
/// row-major semantics with the leftmost subsystem slowest-varying.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    row: SpaceLayout,
    col: SpaceLayout,
    m: CMatrix,
}

impl LabeledOperator {
    pub fn new(row: SpaceLayout, col: SpaceLayout, m: CMatrix) -> Result<Self> {
        if m.nrows() != row.total_dim() {
            return Err(Error::DimMismatch {
                context: "row count vs row layout",
                expected: row.total_dim(),
                got: m.nrows(),
            });
        }
        if m.ncols() != col.total_dim() {
            return Err(Error::DimMismatch {
                context: "column count vs column layout",
                expected: col.total_dim(),
                got: m.ncols(),
            });
        }
        Ok(Self { row, col, m })
    }

    /// Operator with identical row and column layouts.
    pub fn square(layout: SpaceLayout, m: CMatrix) -> Result<Self> {
        Self::new(layout.clone(), layout, m)
    }

    /// Row-major entry list over `row x col`.
    pub fn from_entries(row: SpaceLayout, col: SpaceLayout, entries: Vec<C64>) -> Result<Self> {
        let expected = row.total_dim() * col.total_dim();
        if entries.len() != expected {
            return Err(Error::EntryCountMismatch { expected, got: entries.len() });
        }
        let m = CMatrix::from_row_slice(row.total_dim(), col.total_dim(), &entries);
        Self::new(row, col, m)
    }

    /// A bare `d x d` gate on an anonymous subsystem labeled `q`.
    pub fn gate(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare);
        }
        let layout = SpaceLayout::single("q", m.nrows())?;
        Self::square(layout, m)
    }

    pub fn identity(layout: SpaceLayout) -> Self {
        let d = layout.total_dim();
        Self { row: layout.clone(), col: layout, m: CMatrix::identity(d, d) }
    }

    pub fn row_layout(&self) -> &SpaceLayout {
        &self.row
    }

    pub fn col_layout(&self) -> &SpaceLayout {
        &self.col
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> CMatrix {
        self.m
    }

    /// Reinterprets the same entries over new layouts of equal total
    /// dimensions (e.g. splitting one dim-4 factor into two dim-2 factors).
    pub fn reshaped(&self, row: SpaceLayout, col: SpaceLayout) -> Result<Self> {
        if row.total_dim() != self.row.total_dim() {
            return Err(Error::DimMismatch {
                context: "reshape row total",
                expected: self.row.total_dim(),
                got: row.total_dim(),
            });
        }
        if col.total_dim() != self.col.total_dim() {
            return Err(Error::DimMismatch {
                context: "reshape column total",
                expected: self.col.total_dim(),
                got: col.total_dim(),
            });
        }
        Ok(Self { row, col, m: self.m.clone() })
    }

    /// Kronecker product; the labels of `self` come first and must be
    /// disjoint from the labels of `other` on both sides.
    pub fn tensor(&self, other: &Self) -> Result<Self> {
        let row = self.row.concat(&other.row)?;
        let col = self.col.concat(&other.col)?;
        Ok(Self { row, col, m: self.m.kronecker(&other.m) })
    }

    /// Matrix product; requires `self.col == other.row` exactly.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.col != other.row {
            return Err(Error::LayoutMismatch(
                "product requires matching column/row layouts".into(),
            ));
        }
        Ok(Self { row: self.row.clone(), col: other.col.clone(), m: &self.m * &other.m })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.require_same_layouts(other)?;
        Ok(Self { row: self.row.clone(), col: self.col.clone(), m: &self.m + &other.m })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.require_same_layouts(other)?;
        Ok(Self { row: self.row.clone(), col: self.col.clone(), m: &self.m - &other.m })
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self { row: self.row.clone(), col: self.col.clone(), m: &self.m * factor }
    }

    pub fn adjoint(&self) -> Self {
        Self { row: self.col.clone(), col: self.row.clone(), m: self.m.adjoint() }
    }

    pub fn transpose(&self) -> Self {
        Self { row: self.col.clone(), col: self.row.clone(), m: self.m.transpose() }
    }

    pub fn conjugate(&self) -> Self {
        Self { row: self.row.clone(), col: self.col.clone(), m: self.m.conjugate() }
    }

    pub fn trace(&self) -> Result<C64> {
        if self.row.total_dim() != self.col.total_dim() {
            return Err(Error::NotSquare);
        }
        Ok(self.m.trace())
    }

    /// Applies `self` to a ket; requires `self.col == v.layout` exactly.
    pub fn apply(&self, v: &LabeledVector) -> Result<LabeledVector> {
        if &self.col != v.layout() {
            return Err(Error::LayoutMismatch("apply requires matching layouts".into()));
        }
        LabeledVector::new(self.row.clone(), &self.m * v.vector())
    }

    /// Partial trace over the given labels, which must appear in both the row
    /// and the column layout with equal dimensions. Remaining subsystems keep
    /// their order.
    pub fn partial_trace(&self, labels: &[&str]) -> Result<Self> {
        let mut row_sel = Vec::with_capacity(labels.len());
        let mut col_sel = Vec::with_capacity(labels.len());
        for label in labels {
            let rp = self
                .row
                .position(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            let cp = self
                .col
                .position(label)
                .ok_or_else(|| Error::UnknownLabel(label.to_string()))?;
            let (rd, cd) = (self.row.subsystems()[rp].dim, self.col.subsystems()[cp].dim);
            if rd != cd {
                return Err(Error::DimMismatch {
                    context: "partial trace needs equal row/column dims of the traced label",
                    expected: rd,
                    got: cd,
                });
            }
            if row_sel.contains(&rp) {
                return Err(Error::LabelCollision(label.to_string()));
            }
            row_sel.push(rp);
            col_sel.push(cp);
        }

        // The traced flat index must be built in the same label order on both
        // sides so diagonal pairs line up even when positions differ.
        let row_split = split_ordered(&self.row, &row_sel);
        let col_split = split_ordered(&self.col, &col_sel);
        if row_split.picked_dim != col_split.picked_dim {
            return Err(Error::NotSquare);
        }

        let keep_row = self.row.filtered(|l| !labels.contains(&l));
        let keep_col = self.col.filtered(|l| !labels.contains(&l));
        let mut out = CMatrix::zeros(row_split.rest_dim, col_split.rest_dim);
        for i in 0..self.m.nrows() {
            let (ti, ri) = (row_split.picked[i] as usize, row_split.rest[i] as usize);
            for j in 0..self.m.ncols() {
                if col_split.picked[j] as usize == ti {
                    out[(ri, col_split.rest[j] as usize)] += self.m[(i, j)];
                }
            }
        }
        Self::new(keep_row, keep_col, out)
    }

    /// Reorders subsystems. `new_order` must list the union of row and column
    /// labels exactly once each; each side is reordered to follow it.
    pub fn permute_subsystems(&self, new_order: &[&str]) -> Result<Self> {
        let mut seen: Vec<&str> = Vec::with_capacity(new_order.len());
        for label in new_order {
            if seen.contains(label) {
                return Err(Error::NotAPermutation);
            }
            if !self.row.contains(label) && !self.col.contains(label) {
                return Err(Error::UnknownLabel(label.to_string()));
            }
            seen.push(label);
        }
        let row_order: Vec<&str> =
            new_order.iter().copied().filter(|l| self.row.contains(l)).collect();
        let col_order: Vec<&str> =
            new_order.iter().copied().filter(|l| self.col.contains(l)).collect();
        if row_order.len() != self.row.len() || col_order.len() != self.col.len() {
            return Err(Error::NotAPermutation);
        }
        let new_row = self.row.reordered(&row_order)?;
        let new_col = self.col.reordered(&col_order)?;

        let row_map = permutation_map(&self.row, &new_row);
        let col_map = permutation_map(&self.col, &new_col);
        let mut out = CMatrix::zeros(self.m.nrows(), self.m.ncols());
        for i in 0..self.m.nrows() {
            for j in 0..self.m.ncols() {
                out[(row_map[i], col_map[j])] = self.m[(i, j)];
            }
        }
        Self::new(new_row, new_col, out)
    }

    pub fn max_norm(&self) -> f64 {
        linalg::max_norm(&self.m)
    }

    pub fn hermiticity_residual(&self) -> Result<f64> {
        if self.row != self.col {
            return Err(Error::NotSquare);
        }
        Ok(linalg::hermiticity_residual(&self.m))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.row == self.col && linalg::hermiticity_residual(&self.m) <= tol
    }

    pub fn unitarity_residual(&self) -> Result<f64> {
        if self.row.total_dim() != self.col.total_dim() {
            return Err(Error::NotSquare);
        }
        Ok(linalg::unitarity_residual(&self.m))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.row.total_dim() == self.col.total_dim()
            && linalg::unitarity_residual(&self.m) <= tol
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        if self.row.total_dim() != self.col.total_dim() {
            return Err(Error::NotSquare);
        }
        Ok(linalg::min_eigenvalue(&self.m))
    }

    pub fn is_psd(&self, floor: f64) -> Result<bool> {
        Ok(self.min_eigenvalue()? >= floor)
    }

    fn require_same_layouts(&self, other: &Self) -> Result<()> {
        if self.row != other.row || self.col != other.col {
            return Err(Error::LayoutMismatch("operands must share layouts".into()));
        }
        Ok(())
    }
}

/// Like `split_index`, but the picked flat index runs over the labels in the
/// given selection order rather than in layout order.
fn split_ordered(layout: &SpaceLayout, selection: &[usize]) -> super::layout::SplitIndex {
    let base = split_index(layout, selection);
    if selection.windows(2).all(|w| w[0] < w[1]) {
        return base;
    }
    // Recompute the picked index with selection-order strides.
    let dims = layout.dims();
    let mut sel_stride = vec![0usize; layout.len()];
    let mut picked_dim = 1usize;
    for &pos in selection.iter().rev() {
        sel_stride[pos] = picked_dim;
        picked_dim *= dims[pos];
    }
    let full_stride = layout.strides();
    let mut picked = vec![0u32; layout.total_dim()];
    for flat in 0..layout.total_dim() {
        let mut p = 0usize;
        let mut remainder = flat;
        for i in 0..layout.len() {
            let idx = remainder / full_stride[i];
            remainder %= full_stride[i];
            p += idx * sel_stride[i];
        }
        picked[flat] = p as u32;
    }
    super::layout::SplitIndex { picked, rest: base.rest, picked_dim, rest_dim: base.rest_dim }
}

/// Maps old flat indices to new flat indices for a reordered layout.
pub(crate) fn permutation_map(old: &SpaceLayout, new: &SpaceLayout) -> Vec<usize> {
    let old_strides = old.strides();
    let new_strides = new.strides();
    let positions: Vec<usize> = old
        .labels()
        .map(|l| new.position(l).expect("reordered layout keeps labels"))
        .collect();
    let total = old.total_dim();
    let mut map = vec![0usize; total];
    for (flat, slot) in map.iter_mut().enumerate() {
        let mut remainder = flat;
        let mut target = 0usize;
        for (i, &stride) in old_strides.iter().enumerate() {
            let idx = remainder / stride;
            remainder %= stride;
            target += idx * new_strides[positions[i]];
        }
        *slot = target;
    }
    map
}
