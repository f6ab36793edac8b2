//! Truncated two-mode Fock space: floating ladders and metrics for the
//! distinct-frequency schemes, exact monomial algebra for the degenerate one.

pub mod basis;
pub mod exact;
pub mod float;
pub mod jordan;

pub use basis::FockBasis;
pub use exact::{degenerate_algebra, DegenerateAlgebra, DegenerateAlgebraReport, ExactOperator, Ladder};
pub use float::{
    adjoint_blowup_scan, build_mode_operators, indefinite_energy_check, ladder_operators, positive_hamiltonian_check,
    star_conjugate, BlowupReport, BlowupRow, FockOperator, MetricKind, MetricOperator, ModeOperators,
    PositiveSchemeReport, Scheme,
};
pub use jordan::{
    chain_eigenvector, jordan_analysis, jordan_analysis_all, normality_defect, shell_identities, zero_norm,
    ChainEigenvector, JordanReport, ShellIdentities, SurdCoefficient,
};
