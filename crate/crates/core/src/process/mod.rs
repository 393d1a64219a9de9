//! Higher-order quantum processes.
//!
//! A process assigns each party a block of labeled input and output
//! subsystems and acts as the environment connecting the parties' local
//! operations: outcome probabilities follow from contracting the process
//! matrix against one Choi operator per party. The module provides the
//! party/layout bookkeeping, probability evaluation, validity checking
//! against all deterministic operation tuples, constructors for unitary
//! chains and coherent order switches, the inverse chain decomposition, and
//! a signaling probe.

mod constructors;
mod jsonio;
mod operations;
mod party;
mod signaling;
mod structure;
mod validity;

pub use constructors::{
    chain_parties, default_chain_parties, markovian_factors, markovian_unitary_process,
    reduce_with_identity, switch3, switch4,
};
pub use jsonio::{Process, ProcessJson, ProcessKind};
pub use operations::{
    expectation, expectation_on_vector, probability, probability_on_vector, LocalOperationTuple,
    TupleBuilder,
};
pub use party::{canonical_layout, CausalOrder, Party, PartySpace};
pub use signaling::{can_signal, SignalingReport};
pub use structure::{superpose, ProcessMatrix, ProcessVector};
pub use validity::{is_valid_process, is_valid_process_vector, ValidityOptions, ValidityReport};
