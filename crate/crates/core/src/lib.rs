//! Simulation and verification toolkit for populations that change one
//! event at a time under a soft carrying capacity `K`: above `K` the expected
//! change is non-positive, and every event carries a uniformly positive
//! chance of a single death. Such populations die out almost surely; this
//! crate simulates them, extracts their excursions around `K`, and checks the
//! quantitative consequences against Monte Carlo ensembles and exact
//! first-step oracles.

pub mod engine;
pub mod excursions;
pub mod models;
pub mod oracle;
pub mod process;
pub mod report;
pub mod rng;
pub mod verify;

pub use engine::{run_ensemble, run_ensemble_with_traces, EnsembleConfig, EnsembleSummary};
pub use excursions::{decompose, excursion_stats, ExcursionDecomposition, ExcursionStats};
pub use models::{build_model, ChangeLaw, ChangePmf, Model, ModelSpec};
pub use oracle::{exact_absorption, exact_absorption_bounded, ExactSolution};
pub use process::{apply_change, simulate, step, Change, ProcessState, Trace, TraceStatus};
pub use report::{BoundReport, Relation, Verdict};
pub use rng::{derive_stream, RngState};
