//! Numerical laboratory for the nonlocal Fisher-KPP equation with mixed
//! local and nonlocal competition,
//!
//! `u_t = kappa_plus (a+ * u) - m u - u (kappa_local u + kappa_nonlocal (a- * u))`.
//!
//! The crate reduces planar problems to one space dimension through marginal
//! kernels, evolves the reduced equation, computes minimal wave speeds from
//! moment generating functions and builds monotone traveling-wave profiles.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod conv;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod model;
pub mod reduction;
pub mod semiflow;
pub mod suite;
pub mod wave;

pub use error::{Error, Result};
pub use grid::Grid1D;
pub use kernels::{Kernel1D, KernelSpec};
pub use model::ModelParams;

use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the solvers and checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub mass_tol: f64,
    pub nonneg_tol: f64,
    pub clip_tol: f64,
    pub picard_tol: f64,
    pub profile_tol: f64,
    pub drift_tol: f64,
    pub residual_tol: f64,
    pub comparison_tol: f64,
    pub strict_tol: f64,
    pub boundary_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            mass_tol: 1e-8,
            nonneg_tol: 1e-12,
            clip_tol: 1e-8,
            picard_tol: 1e-10,
            profile_tol: 1e-8,
            drift_tol: 1e-6,
            residual_tol: 1e-6,
            comparison_tol: 1e-8,
            strict_tol: 1e-10,
            boundary_tol: 1e-6,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("mass_tol", self.mass_tol),
            ("nonneg_tol", self.nonneg_tol),
            ("clip_tol", self.clip_tol),
            ("picard_tol", self.picard_tol),
            ("profile_tol", self.profile_tol),
            ("drift_tol", self.drift_tol),
            ("residual_tol", self.residual_tol),
            ("comparison_tol", self.comparison_tol),
            ("strict_tol", self.strict_tol),
            ("boundary_tol", self.boundary_tol),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Input(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
