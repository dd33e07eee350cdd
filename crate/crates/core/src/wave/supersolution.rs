//! The exponential super-solution `phi(s) = theta min(exp(-mu s), 1)`.

use serde::Serialize;

use crate::conv::Boundary;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::kernels::Kernel1D;
use crate::model::ModelParams;
use crate::semiflow::{Field, ReactionSystem};

/// `theta min(exp(-mu s), 1)` on `grid` with wave continuation.
pub fn super_solution(grid: Grid1D, mu: f64, theta: f64) -> Field {
    Field::from_fn(grid, Boundary::Wave, |s| theta * (-mu * s).exp().min(1.0))
}

/// Values of `J_c(s) = c phi' + kappa_plus (a+ * phi) - m phi - kappa_nonlocal phi (a- * phi) - kappa_local phi^2`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuperSolutionCheck {
    pub values: Vec<f64>,
    pub max: f64,
    pub argmax: f64,
}

/// Evaluates `J_c` on `phi`; central differences except a forward difference at the kink.
pub fn verify_supersolution(
    phi: &Field,
    mu: f64,
    c: f64,
    aplus: &Kernel1D,
    aminus: &Kernel1D,
    params: &ModelParams,
) -> Result<SuperSolutionCheck> {
    if !(mu > 0.0 && aplus.mgf(mu).is_finite()) {
        return Err(Error::Input(format!(
            "mu = {mu} lies outside the region where the dispersal moment is finite"
        )));
    }
    let system = ReactionSystem::new(aplus, aminus, *params, phi.grid)?;
    let h = phi.grid.step();
    let v = &phi.values;
    let n = v.len();
    let kink = phi.grid.locate(0.0).round() as usize;
    let rhs = system.rhs(phi)?.values;
    let values: Vec<f64> = (0..n)
        .map(|i| {
            let d = if i == 0 {
                (v[1] - v[0]) / h
            } else if i == n - 1 || i == kink {
                if i == n - 1 {
                    (v[i] - v[i - 1]) / h
                } else {
                    (v[i + 1] - v[i]) / h
                }
            } else {
                (v[i + 1] - v[i - 1]) / (2.0 * h)
            };
            c * d + rhs[i]
        })
        .collect();
    let (k, max) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &x)| if x > acc.1 { (i, x) } else { acc });
    Ok(SuperSolutionCheck {
        values,
        max,
        argmax: phi.grid.point(k),
    })
}
