//! Residual and shape diagnostics of wave profiles.

use serde::Serialize;

use super::profile::WaveProfile;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::kernels::Kernel1D;
use crate::model::ModelParams;
use crate::semiflow::ReactionSystem;

/// Sup-norm residual of `c psi' + H(psi) = 0` on the interior window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualReport {
    pub sup: f64,
    pub argmax: f64,
    pub window: (f64, f64),
}

/// Fourth-order central differences, second-order one-sided near the ends.
pub fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (values[i - 2] - 8.0 * values[i - 1] + 8.0 * values[i + 1] - values[i + 2]) / (12.0 * h)
            } else if i == 0 {
                (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h)
            } else {
                (values[i + 1] - values[i - 1]) / (2.0 * h)
            }
        })
        .collect()
}

/// Residual of the traveling-wave equation, excluding a kernel-width margin at each end.
pub fn profile_residual(
    profile: &WaveProfile,
    aplus: &Kernel1D,
    aminus: &Kernel1D,
    params: &ModelParams,
    boundary_tol: f64,
) -> Result<ResidualReport> {
    let v = &profile.values;
    let n = v.len();
    let theta = profile.theta;
    if (v[0] - theta).abs() > boundary_tol * theta || v[n - 1] > boundary_tol * theta {
        return Err(Error::Window(format!(
            "profile ends at ({:.3e}, {:.3e}), not within {boundary_tol:.1e} of (theta, 0)",
            v[0],
            v[n - 1]
        )));
    }
    let system = ReactionSystem::new(aplus, aminus, *params, profile.grid)?;
    let rhs = system.rhs(&profile.field())?.values;
    let d = derivative(v, profile.grid.step());
    let margin = system.kernel_grid().half() + 2;
    if 2 * margin >= n {
        return Err(Error::Window("grid narrower than two kernel widths".into()));
    }
    let (mut sup, mut k) = (0.0f64, margin);
    for i in margin..n - margin {
        let r = (profile.speed * d[i] + rhs[i]).abs();
        if r > sup {
            sup = r;
            k = i;
        }
    }
    Ok(ResidualReport {
        sup,
        argmax: profile.grid.point(k),
        window: (profile.grid.point(margin), profile.grid.point(n - margin - 1)),
    })
}

/// Shape diagnostics of a profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileDiagnostics {
    pub strictly_decreasing: bool,
    /// Largest `psi_{i+1} - psi_i` over the transition window (negative when strict).
    pub max_step: f64,
    /// Fitted exponential decay rate of the right tail.
    pub tail_rate: Option<f64>,
    /// Weight used for the exponential moment (half the tail rate).
    pub moment_weight: Option<f64>,
    /// `int psi e^{mu s} ds`, `None` when the integrand does not decay.
    pub exp_moment: Option<f64>,
    /// Smallest `nu` on a 0.01 grid with `psi e^{nu s}` nondecreasing.
    pub nu_witness: Option<f64>,
}

/// Trapezoid `int psi(s) e^{mu s} ds` plus an exponential estimate of the part
/// beyond the grid, or `None` if the integrand does not decay at the right end
/// or the estimated remainder exceeds `1e-3` of the total.
pub fn exp_moment(grid: &Grid1D, values: &[f64], mu: f64) -> Option<f64> {
    let f: Vec<f64> = values
        .iter()
        .zip(grid.points())
        .map(|(v, s)| v * (mu * s).exp())
        .collect();
    let n = f.len();
    if n < 12 || f.iter().any(|v| !v.is_finite()) {
        return None;
    }
    let tail = &f[n - 11..];
    if !tail.windows(2).all(|w| w[1] <= w[0]) {
        return None;
    }
    let body = grid.trapezoid(&f);
    let remainder = if f[n - 1] == 0.0 {
        0.0
    } else {
        let rate = (tail[0] / tail[10]).ln() / (10.0 * grid.step());
        if !(rate > 0.0) {
            return None;
        }
        f[n - 1] / rate
    };
    (remainder <= 1e-3 * body).then_some(body + remainder)
}

/// Least-squares decay rate of `ln psi` where `psi` lies in `[lo, hi] * theta`.
pub fn tail_rate(grid: &Grid1D, values: &[f64], theta: f64, lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = values
        .iter()
        .zip(grid.points())
        .filter(|(v, _)| **v >= lo * theta && **v <= hi * theta)
        .map(|(v, s)| (s, v.ln()))
        .collect();
    if pts.len() < 5 {
        return None;
    }
    let n = pts.len() as f64;
    let sm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let lm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - sm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - sm) * (p.1 - lm)).sum();
    let slope = sxy / sxx;
    (slope < 0.0).then_some(-slope)
}

/// Monotonicity, tail and exponential-weight diagnostics.
pub fn profile_diagnostics(grid: &Grid1D, values: &[f64], theta: f64, strict_tol: f64) -> ProfileDiagnostics {
    let h = grid.step();
    let lo = 1e-4 * theta;
    let hi = (1.0 - 1e-4) * theta;
    let mut max_step = f64::NEG_INFINITY;
    let mut nonincreasing = true;
    for w in values.windows(2) {
        let d = w[1] - w[0];
        if d > 0.0 {
            nonincreasing = false;
        }
        if w[0] >= lo && w[0] <= hi {
            max_step = max_step.max(d);
        }
    }
    let strictly_decreasing = nonincreasing && max_step.is_finite() && max_step < -strict_tol * h;
    let rate = tail_rate(grid, values, theta, 1e-10, 1e-3);
    let weight = rate.map(|r| 0.5 * r);
    let moment = weight.and_then(|mu| exp_moment(grid, values, mu));
    let mut need = 0.0f64;
    let mut any = false;
    for w in values.windows(2) {
        if w[1] >= 1e-10 * theta && w[0] <= theta {
            any = true;
            need = need.max((w[0] / w[1]).ln() / h);
        }
    }
    let nu_witness = if any && need.is_finite() {
        let nu = (need / 0.01 - 1e-9).ceil().max(0.0) * 0.01;
        (nu <= 100.0).then_some(nu)
    } else {
        None
    };
    ProfileDiagnostics {
        strictly_decreasing,
        max_step,
        tail_rate: rate,
        moment_weight: weight,
        exp_moment: moment,
        nu_witness,
    }
}
