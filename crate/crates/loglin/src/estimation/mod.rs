//! Likelihood fits, local composite estimators and their consensus.

pub mod consensus;
pub mod diagnostics;
pub mod fit;
pub mod newton;
pub mod objective;

pub use consensus::{consensus, frobenius_error, relative_mse, ConsensusEstimate};
pub use diagnostics::{assumption_diagnostics, AssumptionDiagnostics};
pub use fit::{
    check_equality, compare_estimates, fit_all_local, fit_global, fit_global_counts, fit_local, fit_local_conditional,
    fit_local_marginal, EqualityCheck, LocalEstimate,
};
pub use newton::{newton_maximize, FitResult, NewtonOptions, SolveMode};
