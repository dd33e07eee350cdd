//! Dispersal and competition kernels.

mod analysis;
mod kernel1d;
mod spec;

pub use analysis::{common_grid, j_theta, truncate, JTheta, PositivityWindow, TruncationResult, NONNEG_TOL};
pub use kernel1d::{
    auto_half_width, marginal_1d, marginal_1d_with, marginal_pair, transverse_basis, Kernel1D,
    MASS_TOL, MGF_GUARD,
};
pub use spec::{Axis, Family, KernelSpec};
