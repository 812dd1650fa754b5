//! Sparse online learning via truncated gradient descent for logistic
//! regression, SVM (hinge), and least squares — with three companions to
//! the exact classical learner:
//!
//! * a **lazy weight oracle** that recomputes any single weight entry from
//!   O(T) round history instead of storing dense weights ([`lazy`]);
//! * **contract-level emulators** of the amplitude-estimation subroutines
//!   (inner product, ℓ1 norm, state preparation, maximum finding) whose
//!   error/failure behavior matches the stated guarantees, with modeled
//!   query costs tracked by a ledger ([`estimators`], [`ledger`],
//!   [`engine`]);
//! * a **bit-exact reversible circuit simulator** for the fixed-point
//!   truncation unitary with Toffoli accounting ([`circuit`]);
//! * a **regret harness** that evaluates the regret bounds empirically at
//!   desk scale ([`regret`]).
//!
//! Everything numeric is generic over [`scalar::Scalar`] (`f32` or `f64`);
//! the concrete aliases below fix `f64`, which is what the CLI and the
//! acceptance suite use.
//!
//! The estimator emulation computes exact quantities internally and
//! perturbs them to match the contracts; the `√d` costs are *modeled*
//! (charged to the query ledger), never incurred. Nothing here
//! demonstrates a speedup — the artifact checks contracts, regret
//! behavior, and cost formulas.

pub mod circuit;
pub mod config;
pub mod data;
pub mod engine;
pub mod error;
pub mod estimators;
pub mod lazy;
pub mod ledger;
pub mod losses;
pub mod regret;
pub mod scalar;
pub mod trace;
pub mod truncation;

pub mod acceptance;

pub use error::{Error, Result};
pub use losses::ProblemKind;
pub use scalar::Scalar;

/// Default scalar type for the CLI and acceptance suite.
pub type Real = f64;

pub type Example64 = data::Example<Real>;
pub type Dataset64 = data::Dataset<Real>;
pub type WeightVector64 = truncation::WeightVector<Real>;
pub type TruncationParams64 = truncation::TruncationParams<Real>;
pub type EstimatorSpec64 = estimators::EstimatorSpec<Real>;
pub type QueryLedger64 = ledger::QueryLedger<Real>;
pub type RunTrace64 = trace::RunTrace<Real>;
pub type EngineParams64 = engine::EngineParams<Real>;
pub type RunConfig64 = config::RunConfig<Real>;
