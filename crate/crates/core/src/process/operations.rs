//! Local operation tuples and the generalized probability rule
//! `P = Tr[W (M_1 (x) ... (x) M_n)]`.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::channels::ChoiOperator;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::tensor::{choi_of_kraus, LabeledOperator, LabeledVector};

use super::party::PartySpace;
use super::structure::{ProcessMatrix, ProcessVector};

/// Relative imaginary part above which a probability is rejected as
/// numerically inconsistent.
const IMAG_TOL: f64 = 1e-12;

/// One operator per party, each over that party's canonical `(inputs,
/// outputs)` block, in party order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalOperationTuple {
    ops: Vec<(String, LabeledOperator)>,
}

impl LocalOperationTuple {
    pub fn builder(parties: &[PartySpace]) -> TupleBuilder {
        TupleBuilder { parties: parties.to_vec(), slots: vec![None; parties.len()] }
    }

    pub fn ops(&self) -> &[(String, LabeledOperator)] {
        &self.ops
    }

    pub fn op_for(&self, party: &str) -> Option<&LabeledOperator> {
        self.ops.iter().find(|(name, _)| name == party).map(|(_, op)| op)
    }

    /// Full tensor product over the canonical layout, mainly for
    /// cross-checking the blockwise contraction against a direct trace.
    pub fn tensor_product(&self) -> Result<LabeledOperator> {
        let refs: Vec<&LabeledOperator> = self.ops.iter().map(|(_, op)| op).collect();
        crate::tensor::tensor_all(&refs)
    }
}

/// Builds a [`LocalOperationTuple`], relabeling each operator onto its
/// party's subsystems.
#[derive(Debug, Clone)]
pub struct TupleBuilder {
    parties: Vec<PartySpace>,
    slots: Vec<Option<LabeledOperator>>,
}

impl TupleBuilder {
    fn party_index(&self, name: &str) -> Result<usize> {
        self.parties
            .iter()
            .position(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownLabel(name.to_string()))
    }

    fn set(mut self, idx: usize, op: LabeledOperator) -> Result<Self> {
        let party = &self.parties[idx];
        let layout = party.layout()?;
        let op = op.reshaped(layout.clone(), layout)?;
        self.slots[idx] = Some(op);
        Ok(self)
    }

    /// Any square operator of the party's block dimension, reinterpreted
    /// over the party's subsystems (inputs major, outputs minor).
    pub fn with_operator(self, party: &str, op: LabeledOperator) -> Result<Self> {
        let idx = self.party_index(party)?;
        let dim = self.parties[idx].block_dim();
        if op.matrix().nrows() != dim || op.matrix().ncols() != dim {
            return Err(Error::DimMismatch {
                context: "party operator vs party block",
                expected: dim,
                got: op.matrix().nrows(),
            });
        }
        self.set(idx, op)
    }

    /// A channel in the Choi representation; input dimension must match the
    /// party's input, output the output.
    pub fn with_choi(self, party: &str, choi: &ChoiOperator) -> Result<Self> {
        let idx = self.party_index(party)?;
        let p = &self.parties[idx];
        if choi.in_dim() != p.d_in() || choi.out_dim() != p.d_out() {
            return Err(Error::DimMismatch {
                context: "channel dimensions vs party dimensions",
                expected: p.d_in() * p.d_out(),
                got: choi.in_dim() * choi.out_dim(),
            });
        }
        self.set(idx, choi.op().clone())
    }

    /// The unitary applied as a channel.
    pub fn with_unitary(self, party: &str, u: &LabeledOperator) -> Result<Self> {
        if !u.is_unitary(1e-10) {
            return Err(Error::NotUnitary(format!(
                "residual {:.3e}",
                u.unitarity_residual().unwrap_or(f64::INFINITY)
            )));
        }
        let idx = self.party_index(party)?;
        let p = &self.parties[idx];
        if p.d_in() != p.d_out() || u.matrix().nrows() != p.d_in() {
            return Err(Error::DimMismatch {
                context: "unitary dimension vs party input/output",
                expected: p.d_in(),
                got: u.matrix().nrows(),
            });
        }
        let choi = choi_of_kraus(std::slice::from_ref(u), "in", "out")?;
        self.set(idx, choi)
    }

    /// Pure-state preparation at an output-only party.
    pub fn prepare(self, party: &str, psi: &LabeledVector) -> Result<Self> {
        let idx = self.party_index(party)?;
        let p = &self.parties[idx];
        if p.d_in() != 1 {
            return Err(Error::LayoutMismatch(format!(
                "party `{party}` has a nontrivial input; preparation needs an output-only party"
            )));
        }
        if (psi.norm() - 1.0).abs() > 1e-10 {
            return Err(Error::UnnormalizedState((psi.norm() - 1.0).abs()));
        }
        if psi.len() != p.d_out() {
            return Err(Error::DimMismatch {
                context: "prepared state vs party output",
                expected: p.d_out(),
                got: psi.len(),
            });
        }
        let conj = psi.conjugate();
        self.set(idx, conj.outer(&conj))
    }

    /// Density-operator preparation at an output-only party; the Choi of a
    /// preparation map is the transposed state.
    pub fn prepare_density(self, party: &str, rho: &LabeledOperator) -> Result<Self> {
        let idx = self.party_index(party)?;
        let p = &self.parties[idx];
        if p.d_in() != 1 {
            return Err(Error::LayoutMismatch(format!(
                "party `{party}` has a nontrivial input; preparation needs an output-only party"
            )));
        }
        if rho.matrix().nrows() != p.d_out() || rho.matrix().ncols() != p.d_out() {
            return Err(Error::DimMismatch {
                context: "prepared density vs party output",
                expected: p.d_out(),
                got: rho.matrix().nrows(),
            });
        }
        self.set(idx, rho.transpose())
    }

    /// POVM effect at an input-only party. Unlike preparations, the Choi of
    /// `rho -> Tr[E rho]` is the effect itself: the bra Kraus operators
    /// conjugate twice, so no transpose survives.
    pub fn measure_effect(self, party: &str, effect: &LabeledOperator) -> Result<Self> {
        let idx = self.party_index(party)?;
        let p = &self.parties[idx];
        if p.d_out() != 1 {
            return Err(Error::LayoutMismatch(format!(
                "party `{party}` has a nontrivial output; effects need an input-only party"
            )));
        }
        if effect.matrix().nrows() != p.d_in() || effect.matrix().ncols() != p.d_in() {
            return Err(Error::DimMismatch {
                context: "effect vs party input",
                expected: p.d_in(),
                got: effect.matrix().nrows(),
            });
        }
        self.set(idx, effect.clone())
    }

    /// Trace out the party's input (the unique deterministic operation at an
    /// input-only party).
    pub fn discard(self, party: &str) -> Result<Self> {
        let idx = self.party_index(party)?;
        let p = &self.parties[idx];
        if p.d_out() != 1 {
            return Err(Error::LayoutMismatch(format!(
                "party `{party}` has a nontrivial output; discard needs an input-only party"
            )));
        }
        let d = p.d_in();
        self.set(idx, LabeledOperator::gate(CMatrix::identity(d, d))?)
    }

    /// A do-nothing deterministic channel: the identity when input and
    /// output dimensions agree, otherwise discard-and-repreparate the
    /// maximally mixed state (Choi `1_in (x) 1_out / d_out`).
    pub fn neutral(self, party: &str) -> Result<Self> {
        let idx = self.party_index(party)?;
        let p = &self.parties[idx];
        let (din, dout) = (p.d_in(), p.d_out());
        let op = if din == dout {
            ChoiOperator::identity_channel(din).op().clone()
        } else {
            let m = CMatrix::identity(din, din)
                .kronecker(&CMatrix::identity(dout, dout))
                .unscale(dout as f64);
            LabeledOperator::gate(m)?
        };
        self.set(idx, op)
    }

    pub fn build(self) -> Result<LocalOperationTuple> {
        let mut ops = Vec::with_capacity(self.parties.len());
        for (party, slot) in self.parties.iter().zip(self.slots) {
            let op = slot.ok_or_else(|| {
                Error::InvalidArgument(format!("no operation assigned to party `{}`", party.name()))
            })?;
            ops.push((party.name().to_string(), op));
        }
        Ok(LocalOperationTuple { ops })
    }
}

/// Contracts the leading tensor factor of `w` (of dimension `m.nrows()`)
/// against `m`, returning `Tr_lead[w (m (x) 1_rest)]` on the remaining
/// `rest x rest` space.
pub(crate) fn contract_leading(w: &CMatrix, m: &CMatrix, rest: usize) -> CMatrix {
    let d = m.nrows();
    debug_assert_eq!(w.nrows(), d * rest);
    let mut out = CMatrix::zeros(rest, rest);
    for i in 0..d {
        for j in 0..d {
            let f = m[(j, i)];
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for c in 0..rest {
                for r in 0..rest {
                    out[(r, c)] += f * w[(i * rest + r, j * rest + c)];
                }
            }
        }
    }
    out
}

fn check_tuple(parties: &[PartySpace], ops: &LocalOperationTuple) -> Result<()> {
    if parties.len() != ops.ops.len() {
        return Err(Error::LayoutMismatch("tuple does not cover all parties".into()));
    }
    for (party, (name, op)) in parties.iter().zip(&ops.ops) {
        if party.name() != name {
            return Err(Error::UnknownLabel(name.clone()));
        }
        if op.row_layout() != &party.layout()? || op.col_layout() != &party.layout()? {
            return Err(Error::LayoutMismatch(format!(
                "operator for party `{name}` is not over the party's subsystems"
            )));
        }
    }
    Ok(())
}

/// `Tr[W (M_1 (x) ... (x) M_n)]`, contracted party block by party block.
pub fn expectation(w: &ProcessMatrix, ops: &LocalOperationTuple) -> Result<C64> {
    check_tuple(w.parties(), ops)?;
    let mut rest: usize = w.parties().iter().map(|p| p.block_dim()).product();
    let mut cur = w.operator().matrix().clone();
    for (_, op) in &ops.ops {
        rest /= op.matrix().nrows();
        cur = contract_leading(&cur, op.matrix(), rest);
    }
    Ok(cur[(0, 0)])
}

/// `<w| (M_1 (x) ... (x) M_n) |w>` without forming the outer product.
pub fn expectation_on_vector(w: &ProcessVector, ops: &LocalOperationTuple) -> Result<C64> {
    check_tuple(w.parties(), ops)?;
    let mut applied = w.vector().clone();
    for (_, op) in &ops.ops {
        if op.row_layout().is_empty() {
            // Scalar party block (all sides trivial).
            applied = applied.scale(op.matrix()[(0, 0)]);
        } else {
            applied = apply_on_labels(&applied, op)?;
        }
    }
    w.vector().inner(&applied)
}

/// Probability of the outcome tuple `ops` in process `w`; fails when the
/// contraction picks up a non-negligible imaginary part.
pub fn probability(w: &ProcessMatrix, ops: &LocalOperationTuple) -> Result<f64> {
    real_part("probability", expectation(w, ops)?)
}

/// Probability against a pure process `|w><w|`.
pub fn probability_on_vector(w: &ProcessVector, ops: &LocalOperationTuple) -> Result<f64> {
    real_part("probability", expectation_on_vector(w, ops)?)
}

fn real_part(what: &str, z: C64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL * z.re.abs().max(1.0) {
        return Err(Error::NumericalInconsistency(format!(
            "{what} has imaginary part {:.3e}",
            z.im
        )));
    }
    Ok(z.re)
}

/// Applies an operator over a subset of the vector's subsystems (all of the
/// operator's column labels), leaving the rest untouched.
pub(crate) fn apply_on_labels(v: &LabeledVector, op: &LabeledOperator) -> Result<LabeledVector> {
    let op_labels: Vec<&str> = op.col_layout().labels().collect();
    let original: Vec<String> = v.layout().labels().map(str::to_string).collect();
    let mut front: Vec<&str> = op_labels.clone();
    for label in &original {
        if !op_labels.contains(&label.as_str()) {
            front.push(label);
        }
    }
    let permuted = v.permute_subsystems(&front)?;
    let block = op.col_layout().total_dim();
    let rest = permuted.len() / block;
    // Row-major flattening: flat = l * rest + r, i.e. column l of an
    // (rest x block) column-major matrix.
    let mat = CMatrix::from_column_slice(rest, block, permuted.vector().as_slice());
    let out = mat * op.matrix().transpose();
    let flat = CVector::from_column_slice(out.as_slice());
    let layout = permuted.layout().clone();
    let applied = LabeledVector::new(layout, flat)?;
    let back: Vec<&str> = original.iter().map(String::as_str).collect();
    applied.permute_subsystems(&back)
}
