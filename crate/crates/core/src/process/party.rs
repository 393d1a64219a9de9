//! Parties and causal orders.
//!
//! A party owns a block of adjacent subsystems in the canonical process
//! layout: its inputs first, then its outputs. Trivial (dimension-1) sides
//! own no subsystem at all, so a process over parties `P, A, B, F` with an
//! output-only `P` and an input-only `F` lives on
//! `[P_O, A_I, A_O, B_I, B_O, F_I]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{SpaceLayout, Subsystem};

/// Party name with input and output dimensions; the wire-format descriptor.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub name: String,
    pub d_in: usize,
    pub d_out: usize,
}

/// A party together with its labeled subsystems.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartySpace {
    name: String,
    inputs: Vec<Subsystem>,
    outputs: Vec<Subsystem>,
}

impl PartySpace {
    /// Party with one input and one output subsystem, labeled `{name}_I` and
    /// `{name}_O`. A dimension-1 side is left without a subsystem.
    pub fn node(name: &str, d_in: usize, d_out: usize) -> Result<Self> {
        if name.is_empty() {
            return Err(Error::InvalidArgument("party name must be nonempty".into()));
        }
        if d_in == 0 || d_out == 0 {
            return Err(Error::InvalidArgument(format!(
                "party `{name}` needs positive dimensions"
            )));
        }
        let mut inputs = Vec::new();
        let mut outputs = Vec::new();
        if d_in > 1 {
            inputs.push(Subsystem { label: format!("{name}_I"), dim: d_in });
        }
        if d_out > 1 {
            outputs.push(Subsystem { label: format!("{name}_O"), dim: d_out });
        }
        Ok(Self { name: name.to_string(), inputs, outputs })
    }

    /// Output-only party (trivial input).
    pub fn source(name: &str, d_out: usize) -> Result<Self> {
        Self::node(name, 1, d_out)
    }

    /// Input-only party (trivial output).
    pub fn sink(name: &str, d_in: usize) -> Result<Self> {
        Self::node(name, d_in, 1)
    }

    /// Party over explicitly labeled input and output subsystems, for
    /// parties holding several wires (a control and a target, say).
    pub fn custom<L: Into<String>>(
        name: &str,
        inputs: Vec<(L, usize)>,
        outputs: Vec<(L, usize)>,
    ) -> Result<Self> {
        if name.is_empty() {
            return Err(Error::InvalidArgument("party name must be nonempty".into()));
        }
        let make = |pairs: Vec<(L, usize)>| -> Result<Vec<Subsystem>> {
            pairs
                .into_iter()
                .map(|(label, dim)| {
                    let label = label.into();
                    if dim < 2 {
                        return Err(Error::InvalidArgument(format!(
                            "labeled subsystem `{label}` needs dimension >= 2; \
                             trivial sides carry no label"
                        )));
                    }
                    Ok(Subsystem { label, dim })
                })
                .collect()
        };
        let party = Self { name: name.to_string(), inputs: make(inputs)?, outputs: make(outputs)? };
        party.layout()?; // rejects duplicate labels
        Ok(party)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn inputs(&self) -> &[Subsystem] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[Subsystem] {
        &self.outputs
    }

    pub fn d_in(&self) -> usize {
        self.inputs.iter().map(|s| s.dim).product()
    }

    pub fn d_out(&self) -> usize {
        self.outputs.iter().map(|s| s.dim).product()
    }

    /// Dimension of the party's block in the process layout.
    pub fn block_dim(&self) -> usize {
        self.d_in() * self.d_out()
    }

    pub fn dims(&self) -> Party {
        Party { name: self.name.clone(), d_in: self.d_in(), d_out: self.d_out() }
    }

    /// The party's slice of the canonical layout: inputs, then outputs.
    pub fn layout(&self) -> Result<SpaceLayout> {
        SpaceLayout::new(
            self.inputs
                .iter()
                .chain(self.outputs.iter())
                .map(|s| (s.label.clone(), s.dim))
                .collect(),
        )
    }

    /// Layout of the inputs alone.
    pub fn input_layout(&self) -> Result<SpaceLayout> {
        SpaceLayout::new(self.inputs.iter().map(|s| (s.label.clone(), s.dim)).collect())
    }

    /// Layout of the outputs alone.
    pub fn output_layout(&self) -> Result<SpaceLayout> {
        SpaceLayout::new(self.outputs.iter().map(|s| (s.label.clone(), s.dim)).collect())
    }

    /// The unique input label, for chain wiring.
    pub fn input_label(&self) -> Result<&str> {
        match self.inputs.as_slice() {
            [one] => Ok(&one.label),
            _ => Err(Error::LayoutMismatch(format!(
                "party `{}` does not have exactly one input subsystem",
                self.name
            ))),
        }
    }

    /// The unique output label, for chain wiring.
    pub fn output_label(&self) -> Result<&str> {
        match self.outputs.as_slice() {
            [one] => Ok(&one.label),
            _ => Err(Error::LayoutMismatch(format!(
                "party `{}` does not have exactly one output subsystem",
                self.name
            ))),
        }
    }
}

/// Concatenation of the party blocks, in the given party order. Party names
/// must be unique; label uniqueness is enforced by the layout itself.
pub fn canonical_layout(parties: &[PartySpace]) -> Result<SpaceLayout> {
    for (i, p) in parties.iter().enumerate() {
        if parties[..i].iter().any(|q| q.name == p.name) {
            return Err(Error::LabelCollision(p.name.clone()));
        }
    }
    let mut layout = SpaceLayout::scalar();
    for party in parties {
        layout = layout.concat(&party.layout()?)?;
    }
    Ok(layout)
}

/// Total order in which the intermediate parties act: `slots()[k]` is the
/// index (into the intermediate-party list) of the k-th party to act.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CausalOrder(Vec<usize>);

impl CausalOrder {
    pub fn new(slots: Vec<usize>) -> Result<Self> {
        let n = slots.len();
        let mut seen = vec![false; n];
        for &s in &slots {
            if s >= n || seen[s] {
                return Err(Error::NotAPermutation);
            }
            seen[s] = true;
        }
        Ok(Self(slots))
    }

    /// Parties act in listed order.
    pub fn sequential(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Parties act in reverse listed order.
    pub fn reversed(n: usize) -> Self {
        Self((0..n).rev().collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn slots(&self) -> &[usize] {
        &self.0
    }

    /// When the given party acts (0 = first), if it is covered by the order.
    pub fn rank_of(&self, party_idx: usize) -> Option<usize> {
        self.0.iter().position(|&s| s == party_idx)
    }
}
