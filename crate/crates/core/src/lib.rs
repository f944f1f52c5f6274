//! Real-coded genetic algorithm toolkit built around a PSO-inspired crossover
//! (PSOX), five classical real-coded crossovers, a 15-function benchmark suite
//! and the nonparametric/post-hoc statistics used to compare operators.

pub mod benchmarks;
pub mod engine;
pub mod error;
pub mod operators;
pub mod rng;
pub mod space;
pub mod stats;

pub use benchmarks::{Benchmark, ObjectiveSpec};
pub use engine::{
    run_ga, run_ga_audited, run_ga_observed, GaConfig, GaState, InvariantAudit, Observer, RunTrace,
    SwarmMemory,
};
pub use error::{Error, Result};
pub use operators::{CrossoverConfig, CrossoverKind, MutationConfig, MutationKind, MutationScope};
pub use rng::RngStream;
pub use space::{Bounds, Individual, RealVector};
