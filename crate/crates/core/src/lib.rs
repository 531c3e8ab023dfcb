//! Least-squares identification of linear time-invariant systems,
//! `A_k = Y_k X_k^+`, with deterministic error certificates.
//!
//! ```
//! use regcert_core::{simulate, synthesize_symmetric, RegressionState, Tolerance, Vector};
//!
//! let system = synthesize_symmetric(&[2.0, 2.0, 3.0, 5.0], 7).unwrap();
//! let x0 = Vector::from_vec(vec![0.4, -0.1, 0.7, 0.5]);
//! let log = simulate(&system, &x0, 4).unwrap();
//! let state = RegressionState::from_log(&log, Tolerance::default()).unwrap();
//! // the repeated eigenvalue caps the data rank at the number of distinct values
//! assert_eq!(state.rank(), 3);
//! ```

pub mod bounds;
pub mod error;
pub mod graph;
pub mod linalg;
pub mod random;
pub mod regression;
pub mod snapshots;
pub mod system;

pub use bounds::{
    bound_report, frobenius_bound, lemma3_residual, multiplicity_partition, predicted_rank, repeated_eigenvalue_floor,
    BoundReport, ErrorFloor, FrobeniusBound, Inapplicable, MultiplicityPartition, Outcome, PartitionBlock,
};
pub use error::{Error, Result};
pub use graph::{laplacian, weighted_petersen_laplacian, Edge};
pub use linalg::{
    frobenius_norm, numeric_rank, pseudo_inverse, spectral_norm, svd, symmetric_eigendecomposition, DenseMatrix,
    SvdFactors, SymmetricDecomposition, Tolerance, Vector, DEFAULT_RANK_TOLERANCE,
};
pub use regression::{
    error_certificate, fit_batch, lemma1_difference, ErrorCertificate, ModalDifference, RegressionState,
    DEGENERACY_TOLERANCE,
};
pub use snapshots::{simulate, SnapshotLog};
pub use system::{
    decompose_initial_condition, discretize, structural_factorization, synthesize_symmetric, vandermonde,
    InitialCondition, LtiSystem, SpectralProfile, StructuralFactors,
};
