//! Difference kernel `J_theta` and truncated kernels.

use serde::Serialize;

use super::kernel1d::Kernel1D;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::ModelParams;

/// Pointwise nonnegativity tolerance.
pub const NONNEG_TOL: f64 = 1e-12;

/// A window `[center - delta, center + delta]` and the minimum `rho` of `J` on it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PositivityWindow {
    pub center: f64,
    pub delta: f64,
    pub rho: f64,
    pub holds: bool,
}

/// `J_theta = kappa_plus a+ - kappa_nonlocal theta a-` with its verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JTheta {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub min: f64,
    /// `J_theta >= 0` everywhere (up to [`NONNEG_TOL`]).
    pub nonnegative: bool,
    /// Positivity near the origin.
    pub near_origin: PositivityWindow,
    /// Best positivity window of half-width `delta` anywhere.
    pub somewhere: PositivityWindow,
    /// Maximal intervals where `J_theta < -NONNEG_TOL`.
    pub negative_intervals: Vec<(f64, f64)>,
}

impl JTheta {
    pub fn at(&self, s: f64) -> f64 {
        let x = self.grid.locate(s);
        if x < 0.0 || x > (self.values.len() - 1) as f64 {
            return 0.0;
        }
        crate::grid::linear_sample(&self.values, x, |_| 0.0)
    }
}

/// Brings two kernels onto a common grid by zero extension.
pub fn common_grid(a: &Kernel1D, b: &Kernel1D) -> Result<(Kernel1D, Kernel1D)> {
    if !a.grid().same_step(b.grid()) {
        return Err(Error::GridMismatch(format!(
            "kernel steps differ: {} vs {}",
            a.grid().step(),
            b.grid().step()
        )));
    }
    let half = a.grid().half().max(b.grid().half());
    Ok((a.widened(half)?, b.widened(half)?))
}

fn window_min(values: &[f64], center: usize, k: usize) -> f64 {
    let lo = center.saturating_sub(k);
    let hi = (center + k).min(values.len() - 1);
    values[lo..=hi].iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Tabulates `J_theta` and evaluates the sign assumptions with window half-width `delta`.
pub fn j_theta(
    aplus: &Kernel1D,
    aminus: &Kernel1D,
    params: &ModelParams,
    delta: f64,
) -> Result<JTheta> {
    params.check()?;
    let theta = params.theta();
    let (p, q) = common_grid(aplus, aminus)?;
    let grid = *p.grid();
    let values: Vec<f64> = p
        .values()
        .iter()
        .zip(q.values())
        .map(|(a, b)| params.kappa_plus * a - params.kappa_nonlocal * theta * b)
        .collect();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let k = ((delta / grid.step()).round() as usize).max(1);
    let delta = k as f64 * grid.step();
    let rho0 = window_min(&values, grid.center(), k);
    let near_origin = PositivityWindow {
        center: 0.0,
        delta,
        rho: rho0,
        holds: rho0 > NONNEG_TOL,
    };
    let mut best = near_origin;
    for c in k..values.len().saturating_sub(k) {
        let rho = window_min(&values, c, k);
        if rho > best.rho {
            best = PositivityWindow {
                center: grid.point(c),
                delta,
                rho,
                holds: rho > NONNEG_TOL,
            };
        }
    }
    let mut negative_intervals = Vec::new();
    let mut start: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        let neg = v < -NONNEG_TOL;
        match (neg, start) {
            (true, None) => start = Some(i),
            (false, Some(a)) => {
                negative_intervals.push((grid.point(a), grid.point(i - 1)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(a) = start {
        negative_intervals.push((grid.point(a), grid.point(values.len() - 1)));
    }
    Ok(JTheta {
        grid,
        nonnegative: min >= -NONNEG_TOL,
        min,
        values,
        near_origin,
        somewhere: best,
        negative_intervals,
    })
}

/// Kernels restricted to `[-R, R]` without renormalization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncationResult {
    pub radius: f64,
    pub grid: Grid1D,
    pub aplus: Vec<f64>,
    pub aminus: Vec<f64>,
    pub mass_plus: f64,
    pub mass_minus: f64,
    pub theta_r: f64,
    /// Whether the truncated dispersal mass exceeds `mortality / kappa_plus`.
    pub valid: bool,
}

/// Restricts both kernels to `[-radius, radius]`.
///
/// Masses use the trapezoid weights of the full grid, so that the truncated
/// constant state `theta_r` is an equilibrium of the discrete operator to
/// round-off.
pub fn truncate(
    aplus: &Kernel1D,
    aminus: &Kernel1D,
    params: &ModelParams,
    radius: f64,
) -> Result<TruncationResult> {
    if !(radius > 0.0) {
        return Err(Error::Input(format!("truncation radius must be positive, got {radius}")));
    }
    params.check()?;
    let (p, q) = common_grid(aplus, aminus)?;
    let grid = *p.grid();
    let keep = |vals: &[f64]| -> Vec<f64> {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| if grid.point(i).abs() <= radius + 1e-12 { v } else { 0.0 })
            .collect()
    };
    // unit mass minus the excluded part, so that A_R <= 1 survives rounding
    let mass = |vals: &[f64]| -> f64 {
        let excluded: f64 = vals
            .iter()
            .enumerate()
            .filter(|(i, _)| grid.point(*i).abs() > radius + 1e-12)
            .map(|(i, &v)| grid.step() * grid.trapezoid_weight(i) * v)
            .sum();
        1.0 - excluded
    };
    let mass_plus = mass(p.values());
    let mass_minus = mass(q.values());
    let aplus = keep(p.values());
    let aminus = keep(q.values());
    let valid = mass_plus > params.mortality / params.kappa_plus;
    let theta_r = (params.kappa_plus * mass_plus - params.mortality)
        / (params.kappa_nonlocal * mass_minus + params.kappa_local);
    Ok(TruncationResult {
        radius,
        grid,
        aplus,
        aminus,
        mass_plus,
        mass_minus,
        theta_r,
        valid,
    })
}
