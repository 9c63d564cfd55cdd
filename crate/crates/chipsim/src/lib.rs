//! Event-driven simulator for key-switching workloads on a ring of chiplets,
//! together with the closed-form models it is validated against.

pub mod analytic;
mod build;
pub mod config;
pub mod digits;
pub mod engine;
pub mod report;
pub mod ring;
pub mod strawman;
pub mod sweep;
pub mod workload;

pub use build::Simulation;
pub use config::{ChipletConfig, CommRule, ConfigError};
pub use engine::{Dag, MicroKind, MicroOp, OpSpec, Phase, SimError, Trace, Unit};
pub use report::{CycleReport, SimCensus};
pub use ring::{schedule_keyswitch_rescale_ring, schedule_keyswitch_ring, schedule_moddown_ring, schedule_rescale_ring};
pub use digits::{schedule_keyswitch_digits, DigitError, DigitStrategy};
pub use strawman::{schedule_strawman, Strawman};
pub use workload::{run_workload, AssignmentMode, LimbAssignment, MacroOp, WorkloadError};
pub use sweep::{sweep_chiplets, Sweep};
