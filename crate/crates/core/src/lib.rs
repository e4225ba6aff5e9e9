//! Simulation and limit theory for clique weights in the N-interactions
//! preferential-attachment random graph.
//!
//! * [`sampling`]: exact weighted draws and uniform subsets.
//! * [`registry`]: vertex and clique storage with integer weights.
//! * [`evolution`]: the step rule, checkpointed runs and snapshots.
//! * [`theory`]: limit constants, recurrences, closed forms and one-step
//!   expectations.
//! * [`oracle`]: exhaustive and Monte Carlo checks of the one-step formulas.
//! * [`analysis`]: empirical-versus-theoretical comparison.

pub mod analysis;
pub mod evolution;
pub mod oracle;
pub mod registry;
pub mod sampling;
pub mod theory;

pub use evolution::{run, GraphState, ModelParams, Snapshot, StepKind, StepOutcome, Trajectory};
pub use sampling::{RandomSource, WeightTree};
