//! Runtime checks of the order, translation and stability properties of the flow.

use serde::Serialize;

use super::evolve::Rk4Stepper;
use super::system::{sup_diff, Field, ReactionSystem};
use crate::conv::Boundary;
use crate::error::{Error, Result};
use crate::kernels::{common_grid, j_theta, Kernel1D, NONNEG_TOL};
use crate::model::ModelParams;

/// Horizon and step shared by the checks (RK4, no clipping).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CheckOptions {
    pub horizon: f64,
    pub dt: f64,
}

impl CheckOptions {
    pub fn new(horizon: f64, dt: f64) -> Self {
        Self { horizon, dt }
    }

    fn steps(&self) -> Result<(usize, f64)> {
        if !(self.horizon > 0.0 && self.dt > 0.0) {
            return Err(Error::Input("horizon and dt must be positive".into()));
        }
        let n = super::evolve::step_count(self.horizon, self.dt);
        Ok((n, self.horizon / n as f64))
    }
}

/// Runs `u0` unclipped and calls `visit(step, values)` after every step.
fn run(
    system: &ReactionSystem,
    u0: &Field,
    opts: CheckOptions,
    mut visit: impl FnMut(usize, &[f64]),
) -> Result<Vec<f64>> {
    let (n, dt) = opts.steps()?;
    let mut s = Rk4Stepper::new(system, u0, dt, None)?;
    for k in 1..=n {
        s.step()?;
        visit(k, s.values());
    }
    Ok(s.values().to_vec())
}

fn run_pair(
    system_a: &ReactionSystem,
    a0: &Field,
    system_b: &ReactionSystem,
    b0: &Field,
    opts: CheckOptions,
    mut visit: impl FnMut(usize, f64, &[f64], &[f64]),
) -> Result<()> {
    let (n, dt) = opts.steps()?;
    let mut a = Rk4Stepper::new(system_a, a0, dt, None)?;
    let mut b = Rk4Stepper::new(system_b, b0, dt, None)?;
    for k in 1..=n {
        a.step()?;
        b.step()?;
        visit(k, k as f64 * dt, a.values(), b.values());
    }
    Ok(())
}

/// Largest excursion of a run outside `[0, theta]`.
pub fn tube_violation(system: &ReactionSystem, u0: &Field, opts: CheckOptions) -> Result<f64> {
    let theta = system.theta();
    let mut worst = 0.0f64;
    run(system, u0, opts, |_, v| {
        for &x in v {
            worst = worst.max(-x).max(x - theta);
        }
    })?;
    Ok(worst)
}

/// Largest increase between neighbouring nodes over a run.
pub fn monotonicity_violation(system: &ReactionSystem, u0: &Field, opts: CheckOptions) -> Result<f64> {
    let mut worst = 0.0f64;
    run(system, u0, opts, |_, v| {
        for w in v.windows(2) {
            worst = worst.max(w[1] - w[0]);
        }
    })?;
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonReport {
    /// `max (u_low - u_high)_+` over all steps and nodes.
    pub max_violation: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Evolves an ordered pair and measures how far the order is broken.
pub fn comparison_check(
    system: &ReactionSystem,
    low: &Field,
    high: &Field,
    opts: CheckOptions,
    tol: f64,
) -> Result<ComparisonReport> {
    if low.values.iter().zip(&high.values).any(|(a, b)| a > b) {
        return Err(Error::Input("comparison requires low <= high pointwise".into()));
    }
    if !system.tube_invariant() {
        return Err(Error::Input(
            "comparison requires kappa_plus a+ - kappa_nonlocal theta a- >= 0".into(),
        ));
    }
    let mut worst = 0.0f64;
    run_pair(system, low, system, high, opts, |_, _, a, b| {
        for (x, y) in a.iter().zip(b) {
            worst = worst.max(x - y);
        }
    })?;
    Ok(ComparisonReport {
        max_violation: worst,
        tol,
        pass: worst < tol,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeparationReport {
    pub identical: bool,
    /// Smallest `u_high - u_low` over samples with `t >= t_min`.
    pub min_gap: f64,
    pub pass: bool,
}

/// Checks that distinct ordered data become strictly ordered for `t >= t_min`.
pub fn strict_separation_check(
    system: &ReactionSystem,
    low: &Field,
    high: &Field,
    opts: CheckOptions,
    t_min: f64,
) -> Result<SeparationReport> {
    if low.values.iter().zip(&high.values).any(|(a, b)| a > b) {
        return Err(Error::Input("separation requires low <= high pointwise".into()));
    }
    if low.values == high.values {
        return Ok(SeparationReport {
            identical: true,
            min_gap: 0.0,
            pass: true,
        });
    }
    let mut gap = f64::INFINITY;
    run_pair(system, low, system, high, opts, |_, t, a, b| {
        if t >= t_min - 1e-12 {
            for (x, y) in a.iter().zip(b) {
                gap = gap.min(y - x);
            }
        }
    })?;
    Ok(SeparationReport {
        identical: false,
        min_gap: gap,
        pass: gap > 0.0,
    })
}

fn shift_cells(values: &[f64], k: isize) -> Vec<f64> {
    let n = values.len() as isize;
    (0..n).map(|i| values[(i - k).rem_euclid(n) as usize]).collect()
}

/// `sup |Q(T_y u0) - T_y Q(u0)|` for a shift `y` that is a whole number of cells.
pub fn translation_equivariance_check(
    system: &ReactionSystem,
    u0: &Field,
    shift: f64,
    opts: CheckOptions,
) -> Result<f64> {
    if u0.boundary != Boundary::Periodic {
        return Err(Error::Input("translation check needs a periodic field".into()));
    }
    let cells = shift / u0.grid.step();
    let k = cells.round();
    if (cells - k).abs() > 1e-9 {
        return Err(Error::Input(format!(
            "shift {shift} is not a whole number of cells of size {}",
            u0.grid.step()
        )));
    }
    let k = k as isize;
    let shifted = Field {
        values: shift_cells(&u0.values, k),
        ..u0.clone()
    };
    let a = run(system, &shifted, opts, |_, _| {})?;
    let b = shift_cells(&run(system, u0, opts, |_, _| {})?, k);
    Ok(sup_diff(&a, &b))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TruncationReport {
    pub theta_r: f64,
    /// `max (w - u)_+`.
    pub max_violation: f64,
    /// `max (w - theta_r)_+`.
    pub max_above_theta_r: f64,
    pub pass: bool,
}

/// Compares the truncated flow `w` (started at `min(u0, theta_r)`) with the full flow `u`.
pub fn truncation_bound_check(
    full: &ReactionSystem,
    truncated: &ReactionSystem,
    u0: &Field,
    opts: CheckOptions,
) -> Result<TruncationReport> {
    let theta_r = truncated.theta();
    let w0 = Field {
        values: u0.values.iter().map(|&v| v.min(theta_r)).collect(),
        ..u0.clone()
    };
    let mut viol = 0.0f64;
    let mut above = 0.0f64;
    for (w, u) in w0.values.iter().zip(&u0.values) {
        viol = viol.max(w - u);
        above = above.max(w - theta_r);
    }
    run_pair(truncated, &w0, full, u0, opts, |_, _, w, u| {
        for (a, b) in w.iter().zip(u) {
            viol = viol.max(a - b);
            above = above.max(a - theta_r);
        }
    })?;
    Ok(TruncationReport {
        theta_r,
        max_violation: viol,
        max_above_theta_r: above,
        pass: viol <= 1e-8 && above <= 1e-10,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StabilityReport {
    pub return_initial: f64,
    pub return_final: f64,
    pub escape_initial: f64,
    pub escape_final: f64,
    /// `sup |u - theta|` at least halves.
    pub returns: bool,
    /// `sup u` at least doubles.
    pub escapes: bool,
}

/// Perturbs `theta` downward and `0` upward by `eps * exp(-s^2 / 2)` on a periodic grid.
pub fn stability_probe(system: &ReactionSystem, eps: f64, opts: CheckOptions) -> Result<StabilityReport> {
    let theta = system.theta();
    if !(0.0..theta / 2.0).contains(&eps) {
        return Err(Error::Input(format!("perturbation must lie in [0, theta/2), got {eps}")));
    }
    let bump = |s: f64| eps * (-0.5 * s * s).exp();
    let grid = *system.grid();
    let near = Field::from_fn(grid, Boundary::Periodic, |s| theta - bump(s));
    let low = Field::from_fn(grid, Boundary::Periodic, bump);
    let dev = |v: &[f64]| v.iter().map(|x| (x - theta).abs()).fold(0.0, f64::max);
    let top = |v: &[f64]| v.iter().cloned().fold(0.0, f64::max);
    let a = run(system, &near, opts, |_, _| {})?;
    let b = run(system, &low, opts, |_, _| {})?;
    let (ri, rf) = (dev(&near.values), dev(&a));
    let (ei, ef) = (top(&low.values), top(&b));
    Ok(StabilityReport {
        return_initial: ri,
        return_final: rf,
        escape_initial: ei,
        escape_final: ef,
        returns: rf <= 0.5 * ri,
        escapes: ef >= 2.0 * ei,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub applicable: bool,
    /// Interval where `J_theta < 0` that was used.
    pub interval: Option<(f64, f64)>,
    /// Evaluation point.
    pub y0: f64,
    /// Centre and radius of the dip `u0 < theta`.
    pub dip_center: f64,
    pub dip_radius: f64,
    /// Right-hand side at `y0` from the full operator.
    pub rhs_at_y0: f64,
    /// `(J_theta * (u0 - theta))(y0)` evaluated directly.
    pub j_convolution: f64,
    pub pass: bool,
}

/// Builds data `u0 <= theta` whose right-hand side is positive at the origin
/// whenever `J_theta` is negative somewhere, so the flow leaves `[0, theta]`.
///
/// The dip sits at `-offset`; by default `offset` is the point where `J_theta`
/// is most negative.
pub fn necessity_counterexample(
    aplus: &Kernel1D,
    aminus: &Kernel1D,
    params: &ModelParams,
    offset: Option<f64>,
) -> Result<CounterexampleReport> {
    let j = j_theta(aplus, aminus, params, 0.5)?;
    let theta = params.theta();
    let grid = j.grid;
    let h = grid.step();
    if j.nonnegative && offset.is_none() {
        return Ok(CounterexampleReport {
            applicable: false,
            interval: None,
            y0: 0.0,
            dip_center: 0.0,
            dip_radius: 0.0,
            rhs_at_y0: 0.0,
            j_convolution: 0.0,
            pass: false,
        });
    }
    // prefer the right half line, where the data are mirrored for symmetric kernels
    let argmin = |range: std::ops::Range<usize>| {
        range.fold((0, f64::INFINITY), |acc, i| if j.values[i] < acc.1 { (i, j.values[i]) } else { acc })
    };
    let right = argmin(grid.center()..grid.len());
    let (imin, _) = if right.1 < -NONNEG_TOL { right } else { argmin(0..grid.len()) };
    let zmin = grid.point(imin);
    let interval = j
        .negative_intervals
        .iter()
        .copied()
        .find(|(lo, hi)| *lo <= zmin && zmin <= *hi);
    let (y, radius) = match (offset, interval) {
        (Some(y), _) => (y, 2.0 * h),
        (None, Some((lo, hi))) => (zmin, (zmin - lo).min(hi - zmin).max(2.0 * h)),
        (None, None) => {
            return Err(Error::Input("cannot locate a region where J_theta < 0".into()));
        }
    };
    let dip_radius = (radius / 4.0).max(2.0 * h);
    if y.abs() <= dip_radius {
        return Err(Error::Input("dip would cover the evaluation point".into()));
    }
    let dip_center = -y;
    let dip = |s: f64| {
        let r = (s - dip_center) / dip_radius;
        0.5 * theta * (1.0 - r * r).max(0.0)
    };
    let (p, q) = common_grid(aplus, aminus)?;
    let u0 = Field::from_fn(grid, Boundary::ConstantExtend, |s| theta - dip(s));
    let system = ReactionSystem::new(&p, &q, *params, grid)?;
    let rhs = system.rhs(&u0)?.values[grid.center()];
    // (J * (u0 - theta))(0) = sum_j h w_j J(s_j) (u0 - theta)(-s_j)
    let jc: f64 = (0..grid.len())
        .map(|i| h * grid.trapezoid_weight(i) * j.values[i] * (-dip(-grid.point(i))))
        .sum();
    Ok(CounterexampleReport {
        applicable: !j.nonnegative,
        interval,
        y0: 0.0,
        dip_center,
        dip_radius,
        rhs_at_y0: rhs,
        j_convolution: jc,
        pass: rhs > NONNEG_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuityReport {
    pub deltas: Vec<f64>,
    pub differences: Vec<f64>,
    /// `max difference / delta`.
    pub constant: f64,
}

/// Output difference on `window` between runs from `u0` and `u0 + delta * bump`.
pub fn continuity_surrogate(
    system: &ReactionSystem,
    u0: &Field,
    deltas: &[f64],
    opts: CheckOptions,
    window: (f64, f64),
) -> Result<ContinuityReport> {
    let base = run(system, u0, opts, |_, _| {})?;
    let grid = u0.grid;
    let inside: Vec<usize> = (0..grid.len())
        .filter(|&i| (window.0..=window.1).contains(&grid.point(i)))
        .collect();
    let mut differences = Vec::with_capacity(deltas.len());
    for &d in deltas {
        let pert = Field {
            values: u0
                .values
                .iter()
                .zip(grid.points())
                .map(|(v, s)| v + d * (-0.5 * s * s).exp())
                .collect(),
            ..u0.clone()
        };
        let out = run(system, &pert, opts, |_, _| {})?;
        differences.push(inside.iter().map(|&i| (out[i] - base[i]).abs()).fold(0.0, f64::max));
    }
    let constant = deltas
        .iter()
        .zip(&differences)
        .filter(|(d, _)| **d > 0.0)
        .map(|(d, x)| x / d)
        .fold(0.0, f64::max);
    Ok(ContinuityReport {
        deltas: deltas.to_vec(),
        differences,
        constant,
    })
}
