//! The reduced one-dimensional equation as a semiflow.

mod checks;
mod evolve;
mod front;
mod random;
mod system;

pub use checks::{
    comparison_check, continuity_surrogate, monotonicity_violation, necessity_counterexample,
    stability_probe, strict_separation_check, translation_equivariance_check, truncation_bound_check,
    tube_violation, CheckOptions, ComparisonReport, ContinuityReport, CounterexampleReport,
    SeparationReport, StabilityReport, TruncationReport,
};
pub use evolve::{evolve_picard, evolve_rk4, PicardOptions, PicardRun, Rk4Options, Rk4Stepper, RunMeta, Trajectory};
pub use front::{front_position, measure_speed, SpeedFit};
pub use random::{random_monotone_field, random_ordered_pair, random_tube_field};
pub use system::{rhs, Field, ReactionSystem};

pub(crate) use system::sup_diff;
