//! Sequential decomposition of multiqubit unitaries and isometries into a
//! one-way chain of ancilla–qubit unitaries, optimized by variational MPO
//! sweeps, and the fidelity gaps that remain.

pub mod error;
pub mod gatelib;
pub mod metrics;
pub mod numerics;
pub mod optimizer;
pub mod runner;
pub mod seqmpo;
mod serde_matrix;

pub use error::{Error, Result};
pub use gatelib::{GateKind, GateSpec, InitialStates, SystemShape};
pub use metrics::{GapReport, RestartStats};
pub use numerics::{ComplexMatrix, GeneratorBasis};
pub use optimizer::{ConvergenceTrace, InitMode, Metric, Optimized, OptimizerConfig};
pub use runner::{ExperimentSpec, RunReport};
pub use seqmpo::{BipartiteUnitary, BlockTarget, SequentialMPO};
