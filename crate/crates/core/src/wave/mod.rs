//! Minimal speeds, super-solutions and traveling-wave profiles.

mod diagnostics;
mod profile;
mod speed;
mod supersolution;

pub use diagnostics::{
    derivative, exp_moment, profile_diagnostics, profile_residual, tail_rate, ProfileDiagnostics,
    ResidualReport,
};
pub use profile::{
    solve_profile, stationary_profile, subcritical_drift, ConvergenceReport, DriftReport,
    ProfileOptions, WaveProfile,
};
pub use speed::{minimal_speed, slow_root, speed_at, speed_curve, MinimalSpeed, SpeedCurve};
pub use supersolution::{super_solution, verify_supersolution, SuperSolutionCheck};
