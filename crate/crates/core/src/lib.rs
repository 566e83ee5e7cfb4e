//! Statistics of the gate fidelity of a quantum channel over Haar-random pure inputs.
//!
//! The crate computes the average fidelity, the second moment and variance in
//! closed form, higher moments through symmetric-group sums over Kraus
//! operators, and provides a Monte Carlo estimator to check all of them.

pub mod bases;
pub mod channels;
pub mod error;
pub mod io;
pub mod moments;
pub mod oracle;
pub mod tensor;

pub use bases::{chi0, hermitian_basis, max_entangled, OperatorBasis};
pub use channels::{ChiMatrix, CptpReport, KrausChannel};
pub use error::{Error, Result};
pub use moments::{analyze, AnalysisOptions, MomentReport};
pub use oracle::{EmpiricalMoments, SampleConfig};
pub use tensor::{BipartiteOperator, ComplexMatrix, Subsystem, C64};
