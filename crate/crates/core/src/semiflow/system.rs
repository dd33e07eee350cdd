//! Fields and the reduced right-hand side.

use serde::{Deserialize, Serialize};

use crate::conv::{Boundary, ConvPlan, Method};
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::kernels::{common_grid, Kernel1D, TruncationResult, NONNEG_TOL};
use crate::model::ModelParams;

/// Grid function with its continuation rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub boundary: Boundary,
}

impl Field {
    pub fn new(grid: Grid1D, values: Vec<f64>, boundary: Boundary) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("field values must be finite".into()));
        }
        Ok(Self {
            grid,
            values,
            boundary,
        })
    }

    pub fn constant(grid: Grid1D, value: f64, boundary: Boundary) -> Self {
        Self {
            grid,
            values: vec![value; grid.len()],
            boundary,
        }
    }

    pub fn from_fn(grid: Grid1D, boundary: Boundary, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.points().map(f).collect(),
            boundary,
        }
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Trapezoid integral over the grid.
    pub fn mass(&self) -> f64 {
        self.grid.trapezoid(&self.values)
    }

    /// Largest increase between neighbouring nodes (zero for nonincreasing data).
    pub fn max_rise(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    pub fn sup_distance(&self, other: &Field) -> f64 {
        sup_diff(&self.values, &other.values)
    }
}

pub(crate) fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Right-hand side `kappa_plus (a+ * u) - m u - u (kappa_local u + kappa_nonlocal (a- * u))`
/// on a fixed field grid.
#[derive(Debug)]
pub struct ReactionSystem {
    params: ModelParams,
    theta: f64,
    grid: Grid1D,
    kernel_grid: Grid1D,
    aplus: Vec<f64>,
    aminus: Vec<f64>,
    plan: ConvPlan,
    nonlocal: bool,
    j_min: f64,
}

impl ReactionSystem {
    pub fn new(aplus: &Kernel1D, aminus: &Kernel1D, params: ModelParams, grid: Grid1D) -> Result<Self> {
        Self::with_method(aplus, aminus, params, grid, Method::Auto)
    }

    pub fn with_method(
        aplus: &Kernel1D,
        aminus: &Kernel1D,
        params: ModelParams,
        grid: Grid1D,
        method: Method,
    ) -> Result<Self> {
        params.check()?;
        let (p, q) = common_grid(aplus, aminus)?;
        Self::build(
            params,
            params.theta(),
            grid,
            *p.grid(),
            p.values().to_vec(),
            q.values().to_vec(),
            method,
        )
    }

    /// System driven by truncated kernels; its equilibrium is `theta_r`.
    pub fn truncated(tr: &TruncationResult, params: ModelParams, grid: Grid1D) -> Result<Self> {
        if !tr.valid {
            return Err(Error::Input(format!(
                "truncation at R = {} is invalid: truncated dispersal mass {} does not exceed mortality / kappa_plus",
                tr.radius, tr.mass_plus
            )));
        }
        params.check()?;
        Self::build(
            params,
            tr.theta_r,
            grid,
            tr.grid,
            tr.aplus.clone(),
            tr.aminus.clone(),
            Method::Auto,
        )
    }

    fn build(
        params: ModelParams,
        theta: f64,
        grid: Grid1D,
        kernel_grid: Grid1D,
        aplus: Vec<f64>,
        aminus: Vec<f64>,
        method: Method,
    ) -> Result<Self> {
        if !grid.same_step(&kernel_grid) {
            return Err(Error::GridMismatch(format!(
                "field step {} differs from kernel step {}",
                grid.step(),
                kernel_grid.step()
            )));
        }
        let nonlocal = params.kappa_nonlocal != 0.0;
        let plan = if nonlocal {
            ConvPlan::new(grid.len(), &kernel_grid, &[&aplus, &aminus], method)?
        } else {
            ConvPlan::new(grid.len(), &kernel_grid, &[&aplus], method)?
        };
        let j_min = aplus
            .iter()
            .zip(&aminus)
            .map(|(a, b)| params.kappa_plus * a - params.kappa_nonlocal * theta * b)
            .fold(f64::INFINITY, f64::min);
        Ok(Self {
            params,
            theta,
            grid,
            kernel_grid,
            aplus,
            aminus,
            plan,
            nonlocal,
            j_min,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Equilibrium used for padding and clipping.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn kernel_grid(&self) -> &Grid1D {
        &self.kernel_grid
    }

    pub fn aplus(&self) -> &[f64] {
        &self.aplus
    }

    pub fn aminus(&self) -> &[f64] {
        &self.aminus
    }

    pub fn uses_fft(&self) -> bool {
        self.plan.uses_fft()
    }

    /// Whether `kappa_plus a+ - kappa_nonlocal theta a- >= 0` on the kernel grid.
    pub fn tube_invariant(&self) -> bool {
        self.j_min >= -NONNEG_TOL
    }

    /// `0.5 / (kappa_plus + m + 2 kappa_minus theta)`.
    pub fn dt_stability(&self) -> f64 {
        let p = &self.params;
        0.5 / (p.kappa_plus + p.mortality + 2.0 * p.kappa_minus() * self.theta)
    }

    fn check_len(&self, values: &[f64]) -> Result<()> {
        if values.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} nodes, system grid has {}",
                values.len(),
                self.grid.len()
            )));
        }
        Ok(())
    }

    /// `(a+ * u, a- * u)`; the second is empty when `kappa_nonlocal = 0`.
    pub fn convolutions(&self, values: &[f64], boundary: Boundary) -> (Vec<f64>, Vec<f64>) {
        let padded = boundary.pad(values, self.plan.pad(), self.theta, self.grid.step());
        let mut out = self.plan.apply(&padded).into_iter();
        let plus = out.next().unwrap_or_default();
        let minus = out.next().unwrap_or_default();
        (plus, minus)
    }

    pub(crate) fn rhs_values(&self, values: &[f64], boundary: Boundary) -> Vec<f64> {
        let p = &self.params;
        let (plus, minus) = self.convolutions(values, boundary);
        values
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                let g = p.kappa_local * u + if self.nonlocal { p.kappa_nonlocal * minus[i] } else { 0.0 };
                p.kappa_plus * plus[i] - p.mortality * u - u * g
            })
            .collect()
    }

    pub fn rhs(&self, u: &Field) -> Result<Field> {
        self.check_len(&u.values)?;
        if !u.grid.same_step(&self.grid) {
            return Err(Error::GridMismatch("field step differs from system step".into()));
        }
        Ok(Field {
            grid: u.grid,
            values: self.rhs_values(&u.values, u.boundary),
            boundary: u.boundary,
        })
    }

    /// `(kappa_plus (a+ * u), m + kappa_local u + kappa_nonlocal (a- * u))`.
    pub(crate) fn split(&self, values: &[f64], boundary: Boundary) -> (Vec<f64>, Vec<f64>) {
        let p = &self.params;
        let (plus, minus) = self.convolutions(values, boundary);
        let birth = plus.iter().map(|v| p.kappa_plus * v).collect();
        let loss = values
            .iter()
            .enumerate()
            .map(|(i, &u)| {
                p.mortality
                    + p.kappa_local * u
                    + if self.nonlocal { p.kappa_nonlocal * minus[i] } else { 0.0 }
            })
            .collect();
        (birth, loss)
    }
}

/// One-off evaluation of the right-hand side on the field's own grid.
pub fn rhs(u: &Field, aplus: &Kernel1D, aminus: &Kernel1D, params: &ModelParams) -> Result<Field> {
    ReactionSystem::new(aplus, aminus, *params, u.grid)?.rhs(u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::{marginal_pair, KernelSpec};

    fn setup() -> (Kernel1D, Kernel1D, ModelParams) {
        let (a, b) = marginal_pair(
            &KernelSpec::gaussian_isotropic(1, 1.0).unwrap(),
            &KernelSpec::gaussian_isotropic(1, 0.5).unwrap(),
            &[1.0],
            0.05,
        )
        .unwrap();
        (a, b, ModelParams::new(2.0, 1.0, 0.5, 0.5))
    }

    #[test]
    fn theta_is_stationary() {
        let (a, b, p) = setup();
        let grid = Grid1D::from_extent(0.05, 20.0).unwrap();
        for bc in [Boundary::Periodic, Boundary::ConstantExtend] {
            let r = rhs(&Field::constant(grid, 1.0, bc), &a, &b, &p).unwrap();
            assert!(r.values.iter().all(|v| v.abs() < 1e-13), "{bc:?}");
        }
    }

    #[test]
    fn zero_is_exactly_stationary() {
        let (a, b, p) = setup();
        let grid = Grid1D::from_extent(0.05, 20.0).unwrap();
        let r = rhs(&Field::constant(grid, 0.0, Boundary::Periodic), &a, &b, &p).unwrap();
        assert!(r.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_gives_logistic_rate() {
        let (a, b, p) = setup();
        let grid = Grid1D::from_extent(0.05, 20.0).unwrap();
        for r in [0.1, 0.5, 0.9] {
            let out = rhs(&Field::constant(grid, r, Boundary::Periodic), &a, &b, &p).unwrap();
            let expect = p.kappa_minus() * r * (1.0 - r);
            assert!(out.values.iter().all(|v| (v - expect).abs() < 1e-13));
        }
    }

    #[test]
    fn mismatched_field_step_rejected() {
        let (a, b, p) = setup();
        let grid = Grid1D::from_extent(0.1, 20.0).unwrap();
        assert!(matches!(
            rhs(&Field::constant(grid, 0.5, Boundary::Periodic), &a, &b, &p),
            Err(Error::GridMismatch(_))
        ));
    }

    #[test]
    fn direct_and_fft_rhs_agree() {
        let (a, b, p) = setup();
        let grid = Grid1D::from_extent(0.05, 20.0).unwrap();
        let u = Field::from_fn(grid, Boundary::Wave, |s| 0.5 * (1.0 - (s / 3.0).tanh()));
        let d = ReactionSystem::with_method(&a, &b, p, grid, Method::Direct).unwrap();
        let f = ReactionSystem::with_method(&a, &b, p, grid, Method::Fft).unwrap();
        assert!(sup_diff(&d.rhs(&u).unwrap().values, &f.rhs(&u).unwrap().values) < 1e-10);
    }
}
