//! Moments of the gate fidelity over Haar-random pure states.

pub mod bounds;
pub mod closed_form;
pub mod invariants;
pub mod kraus_sum;
pub mod permutation;
pub mod report;
pub mod sweep;

pub use bounds::{bound_report, BoundCheck, BoundReport, VarianceCoefficients};
pub use closed_form::{
    average_fidelity, gate_fidelity, second_moment, second_moment_direct, variance, variance_qubit,
    SecondMomentCoefficients, VarianceEstimate,
};
pub use invariants::{hermitian_transpose, ChiInvariants};
pub use kraus_sum::{
    central_moment, central_moment_with_budget, moment, moment_complex, moment_with_budget,
    sym_dim, DEFAULT_MOMENT_BUDGET,
};
pub use permutation::{permutations, trace_product, Permutation, MAX_PERMUTATION_ARITY};
pub use report::{analyze, AnalysisOptions, MomentEntry, MomentReport, VarianceMethod};
pub use sweep::{scaling_sweep, sweep, SweepFamily, SweepRow, SweepTable};
