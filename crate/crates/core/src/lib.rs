//! uvlab-core: voltage/frequency undervolting characterization library.
//!
//! The crate is organized around the lifecycle of a characterization
//! campaign:
//!
//! - [`model`]: chip/domain/grid domain types, effect sets, severity
//!   and power-gain math;
//! - [`sim`]: a deterministic simulated device with a per-core
//!   probabilistic fault model, usable as a drop-in device backend;
//! - [`watchdog`]: the external watchdog as a pure state machine plus
//!   its line-oriented wire protocol;
//! - [`orchestrator`]: campaign planning, the crash-safe journal,
//!   watchdog-protected run execution and log collection;
//! - [`analysis`]: log-tree parsing, per-level aggregation,
//!   Safe/Unsafe/Crash region classification and CSV/SVG reports;
//! - [`clock`] / [`rng`]: virtual/wall time and counter-based
//!   deterministic randomness shared by the above.

pub mod analysis;
pub mod clock;
pub mod model;
pub mod orchestrator;
pub mod rng;
pub mod sim;
pub mod watchdog;

pub use clock::Clock;
pub use model::{
    power_gain, severity, ChipSpec, CoreSelection, DomainKind, Effect, EffectCounts, EffectSet,
    ModelError, SelectionMode, SeverityWeights, VFPoint,
};
pub use sim::{DeviceInterface, FaultModel, FaultModelConfig, SimulatedDevice};
