//! Process-matrix toolkit.
//!
//! Dense complex linear algebra over labeled tensor factors, Choi-matrix
//! channel machinery, higher-order quantum processes (process matrices and
//! process vectors), and a numerical witness search showing that coherent
//! superpositions of differently ordered unitary circuits are not valid
//! processes.

pub mod channels;
pub mod error;
pub mod linalg;
pub mod nogo;
pub mod process;
pub mod tensor;

pub use channels::{ChoiOperator, CptpCheck, Instrument};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use tensor::{LabeledOperator, LabeledVector, SpaceLayout};

/// Library version, embedded in CLI reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
