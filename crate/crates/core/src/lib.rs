//! SIR coverage of two-user uplink NOMA when the BS ranks users by
//! instantaneous received power (ISP) rather than by distance (MSP).
//!
//! The crate has two independent engines:
//!
//! * [`coverage`]: closed-form conditional coverages integrated against the
//!   ordered near/far distance law, with the interference entering through
//!   its Laplace transform ([`laplace`]).
//! * [`sim`]: a Monte Carlo network simulator that evaluates the raw SIC
//!   events, plus a fading-only oracle for the conditional expressions.
//!
//! [`experiment`] and [`validate`] drive sweeps, CSV output and the
//! self-check suite used by the `noma-cov` binary.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coverage;
pub mod error;
pub mod estimate;
pub mod experiment;
pub mod laplace;
pub mod quadrature;
pub mod sim;
pub mod spatial;
pub mod validate;

pub use coverage::{
    conditional_coverage, coverage, ConditionalCoverageInputs, RankingScheme, UserRole,
};
pub use error::{Error, Result};
pub use estimate::{CoverageEstimate, Method};
pub use laplace::{ConstantInterference, Laplace, LaplaceEvaluator, LaplaceModel, LaplaceVariant};
pub use sim::{fading_oracle, SimConfig};
pub use spatial::{ModelConfig, ModelKind, OrderedDistancePair, SirThreshold, UserLayout};
pub use experiment::{run_sweep, to_csv, Engine, ExperimentSpec, SpecBuilder, SweepRow};
pub use validate::{run_validate, Level, ValidateOptions, ValidationReport};
