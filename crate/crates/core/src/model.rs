//! Reaction coefficients and the space-homogeneous (logistic) solution.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Constants of the birth / mortality / competition balance.
///
/// The right-hand side being modelled is
/// `kappa_plus * (a+ * u) - mortality * u - u * (kappa_local * u + kappa_nonlocal * (a- * u))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub kappa_plus: f64,
    pub mortality: f64,
    pub kappa_local: f64,
    pub kappa_nonlocal: f64,
}

/// A named model assumption that failed to hold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// `kappa_plus > mortality` fails, so there is no positive equilibrium.
    A1,
    /// `kappa_local + kappa_nonlocal > 0` fails.
    KappaMinusPositive,
    /// A coefficient is negative or not finite.
    BadCoefficient(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::A1 => write!(f, "(A1) requires kappa_plus > mortality"),
            Violation::KappaMinusPositive => {
                write!(f, "kappa_minus = kappa_local + kappa_nonlocal must be > 0")
            }
            Violation::BadCoefficient(name) => {
                write!(f, "coefficient {name} must be finite and nonnegative")
            }
        }
    }
}

/// Verdict of [`ModelParams::validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Validation {
    pub violations: Vec<Violation>,
    pub warnings: Vec<String>,
    pub theta: Option<f64>,
    pub beta: Option<f64>,
}

impl Validation {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl ModelParams {
    pub fn new(kappa_plus: f64, mortality: f64, kappa_local: f64, kappa_nonlocal: f64) -> Self {
        Self {
            kappa_plus,
            mortality,
            kappa_local,
            kappa_nonlocal,
        }
    }

    #[inline]
    pub fn kappa_minus(&self) -> f64 {
        self.kappa_local + self.kappa_nonlocal
    }

    /// Net growth rate at low density.
    #[inline]
    pub fn beta(&self) -> f64 {
        self.kappa_plus - self.mortality
    }

    /// Positive constant equilibrium `(kappa_plus - mortality) / kappa_minus`.
    #[inline]
    pub fn theta(&self) -> f64 {
        self.beta() / self.kappa_minus()
    }

    pub fn validate(&self) -> Validation {
        let mut violations = Vec::new();
        let mut warnings = Vec::new();
        let coeffs = [
            ("kappa_plus", self.kappa_plus),
            ("mortality", self.mortality),
            ("kappa_local", self.kappa_local),
            ("kappa_nonlocal", self.kappa_nonlocal),
        ];
        for (name, v) in coeffs {
            if !(v.is_finite() && v >= 0.0) {
                violations.push(Violation::BadCoefficient(name.to_string()));
            }
        }
        if self.kappa_plus <= 0.0 && self.kappa_plus.is_finite() {
            violations.push(Violation::BadCoefficient("kappa_plus".into()));
        }
        if !(self.kappa_minus() > 0.0) {
            violations.push(Violation::KappaMinusPositive);
        }
        if !(self.kappa_plus > self.mortality) {
            violations.push(Violation::A1);
        }
        if self.mortality == 0.0 {
            warnings.push("mortality = 0 lies outside the positive-mortality setting".into());
        }
        let ok = violations.is_empty();
        Validation {
            violations,
            warnings,
            theta: ok.then(|| self.theta()),
            beta: ok.then(|| self.beta()),
        }
    }

    /// Error form of [`validate`](Self::validate).
    pub fn check(&self) -> Result<()> {
        let v = self.validate();
        if v.is_ok() {
            Ok(())
        } else {
            let msg: Vec<String> = v.violations.iter().map(|x| x.to_string()).collect();
            Err(Error::Assumption(msg.join("; ")))
        }
    }

    /// Exact solution of the space-homogeneous problem after elapsed time `tau`.
    pub fn logistic_solution(&self, u0: f64, tau: f64) -> Result<f64> {
        if !(u0.is_finite() && u0 >= 0.0) {
            return Err(Error::Input(format!("initial value must be >= 0, got {u0}")));
        }
        if !(tau.is_finite() && tau >= 0.0) {
            return Err(Error::Input(format!("elapsed time must be >= 0, got {tau}")));
        }
        let theta = self.theta();
        let decay = (-self.beta() * tau).exp();
        Ok(theta * u0 / (u0 * (1.0 - decay) + theta * decay))
    }
}
