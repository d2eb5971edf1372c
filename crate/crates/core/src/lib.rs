//! Orthogonal matching pursuit with the quantities needed to check its
//! instance-optimality guarantees on concrete matrices.
//!
//! - [`linalg`]: dense kernels, support-restricted least squares, Gram spectra.
//! - [`signal`]: ℓp norms, best k-term approximation `β_k` and its error `σ_k`.
//! - [`omp`]: the decoder with a per-iteration trace.
//! - [`sensing`]: Gaussian / Bernoulli / orthogonal ensembles, RIP constants
//!   (exact enumeration and sampled lower bounds), boundedness probability.
//! - [`bounds`]: error-bound constants and verifiers that return [`BoundReport`]s.
//! - [`harness`]: seeded experiment batches, verification suites, CSV I/O.

// Negated comparisons reject NaN; index loops mirror the textbook algorithms.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bounds;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod omp;
pub mod report;
pub mod rng;
pub mod sensing;
pub mod signal;

pub use bounds::{
    alpha_of, constants, oracle_ls_decoder, theorem1_rhs, verify_lemma1, verify_theorem1,
    verify_theorem2, verify_zhang, TheoremConstants,
};
pub use error::{Error, Result};
pub use harness::experiment::{
    run_experiment, Decoder, ExperimentConfig, ExperimentReport, Magnitude, Metric, SignalModel,
};
pub use harness::suites::{run_suite, Suite, SuiteReport, VerifyConfig};
pub use linalg::{DenseMatrix, IndexSet};
pub use omp::{omp_decode, OmpOptions, RecoveryResult};
pub use report::{BoundReport, PremiseStatus};
pub use sensing::{
    check_rip_premise, generate, rip_delta_exact, rip_delta_lower_bound, Ensemble, MatrixShape,
    MatrixSpec, PremiseOptions, RipEstimate, RipMethod,
};
pub use signal::{best_k_term, lp_norm, sigma_k, support, KTermApprox};

/// Version tag written into every JSON report as `"v"`.
pub const SCHEMA_VERSION: u32 = 1;
