//! Traveling and stationary wave profiles.

use serde::Serialize;

use super::speed::{minimal_speed, slow_root, speed_at};
use super::supersolution::{super_solution, verify_supersolution};
use crate::conv::{Boundary, Method};
use crate::error::{Error, Result};
use crate::grid::{cubic_sample, Grid1D};
use crate::kernels::{j_theta, Kernel1D};
use crate::model::ModelParams;
use crate::semiflow::{front_position, sup_diff, Field, ReactionSystem, Rk4Stepper};

/// Settings for [`solve_profile`] and [`stationary_profile`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfileOptions {
    pub half_width: f64,
    /// Time step of the inner RK4 flow.
    pub dt: f64,
    pub max_iter: usize,
    /// Bound on the sup-norm change between iterates.
    pub profile_tol: f64,
    /// Bound on `|front shift - c|` per iteration.
    pub drift_tol: f64,
    /// Relaxation factor of the stationary iteration.
    pub omega: f64,
    /// Tolerance of the seed's super-solution check.
    pub supersolution_tol: f64,
    /// Convolution evaluation strategy.
    pub method: Method,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            half_width: 60.0,
            dt: 0.02,
            max_iter: 3000,
            profile_tol: 1e-8,
            drift_tol: 1e-6,
            omega: 1.0,
            supersolution_tol: 1e-9,
            method: Method::Direct,
        }
    }
}

/// Iteration summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub iterations: usize,
    pub residual: f64,
    pub drift: f64,
    pub history: Vec<f64>,
    pub drifts: Vec<f64>,
}

/// Nonincreasing profile `psi` with `psi(0) = theta / 2`, travelling at `speed`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WaveProfile {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub speed: f64,
    pub direction: Vec<f64>,
    pub theta: f64,
    /// Exponential rate used to continue the profile to the right.
    pub tail_rate: f64,
    pub report: ConvergenceReport,
}

impl WaveProfile {
    pub fn boundary(&self) -> Boundary {
        if self.tail_rate > 0.0 {
            Boundary::WaveTail {
                rate: self.tail_rate,
            }
        } else {
            Boundary::Wave
        }
    }

    pub fn field(&self) -> Field {
        Field {
            grid: self.grid,
            values: self.values.clone(),
            boundary: self.boundary(),
        }
    }

    /// `psi(s)` by cubic interpolation, continued by the boundary rule.
    pub fn at(&self, s: f64) -> f64 {
        sample(&self.values, &self.grid, self.boundary(), self.theta, s)
    }
}

fn sample(values: &[f64], grid: &Grid1D, boundary: Boundary, theta: f64, s: f64) -> f64 {
    let x = grid.locate(s);
    let h = grid.step();
    cubic_sample(values, x, |k| boundary.value(values, k, theta, h))
}

/// `v(s + p)` on the same grid, clamped, made nonincreasing.
fn shift_project(v: &[f64], grid: &Grid1D, boundary: Boundary, theta: f64, p: f64) -> Vec<f64> {
    let mut out: Vec<f64> = grid
        .points()
        .map(|s| sample(v, grid, boundary, theta, s + p).clamp(0.0, theta))
        .collect();
    for i in 1..out.len() {
        if out[i] > out[i - 1] {
            out[i] = out[i - 1];
        }
    }
    out
}

fn flow_one(system: &ReactionSystem, u: &Field, dt: f64) -> Result<Vec<f64>> {
    let steps = (1.0 / dt).round().max(1.0) as usize;
    let mut s = Rk4Stepper::new(system, u, 1.0 / steps as f64, Some(1e-8))?;
    for _ in 0..steps {
        s.step()?;
    }
    Ok(s.values().to_vec())
}

struct Setup {
    system: ReactionSystem,
    grid: Grid1D,
    theta: f64,
}

fn setup(aplus: &Kernel1D, aminus: &Kernel1D, params: &ModelParams, opts: &ProfileOptions) -> Result<Setup> {
    params.check()?;
    let j = j_theta(aplus, aminus, params, 0.5)?;
    if !j.nonnegative {
        return Err(Error::Assumption(format!(
            "kappa_plus a+ - kappa_nonlocal theta a- takes the value {:.3e} < 0",
            j.min
        )));
    }
    let grid = Grid1D::from_extent(aplus.grid().step(), opts.half_width)?;
    let system = ReactionSystem::with_method(aplus, aminus, *params, grid, opts.method)?;
    Ok(Setup {
        system,
        grid,
        theta: params.theta(),
    })
}

/// Monotone iteration `psi <- pin(Q_1 psi)` seeded with the super-solution.
///
/// Each step evolves for unit time, translates by the observed front position
/// so that `psi(0) = theta / 2`, and projects onto nonincreasing data in
/// `[0, theta]`. Translating by the front position equals a shift by `c`
/// followed by re-pinning; the difference `p - c` is the drift of the iterate.
pub fn solve_profile(
    aplus: &Kernel1D,
    aminus: &Kernel1D,
    params: &ModelParams,
    c: f64,
    opts: &ProfileOptions,
) -> Result<WaveProfile> {
    let st = setup(aplus, aminus, params, opts)?;
    let ms = minimal_speed(aplus, params)?;
    if c < ms.c_star - 1e-9 {
        return Err(Error::Input(format!(
            "speed {c} is below the minimal speed {:.10}; no monotone wave exists",
            ms.c_star
        )));
    }
    let mu = if c <= ms.c_star {
        ms.lambda_star
    } else {
        slow_root(aplus, params, c)?
    };
    let theta = st.theta;
    let phi = super_solution(st.grid, mu, theta);
    let check = verify_supersolution(&phi, mu, speed_at(aplus, params, mu), aplus, aminus, params)?;
    if check.max > opts.supersolution_tol {
        return Err(Error::Assumption(format!(
            "seed is not a super-solution: max J_c = {:.3e} at s = {}",
            check.max, check.argmax
        )));
    }
    let boundary = Boundary::WaveTail { rate: mu };
    let mut psi = shift_project(&phi.values, &st.grid, boundary, theta, 2f64.ln() / mu);
    let mut history = Vec::new();
    let mut drifts = Vec::new();
    let limit = 0.5 * st.grid.half_width();
    for it in 1..=opts.max_iter {
        let u = Field {
            grid: st.grid,
            values: psi,
            boundary,
        };
        let v = flow_one(&st.system, &u, opts.dt)?;
        let p = front_position(&st.grid, &v, 0.5 * theta)
            .map_err(|_| Error::Window("front left the computational window".into()))?;
        if (p - c).abs() > limit {
            return Err(Error::Window(format!("front moved by {p} in one unit of time")));
        }
        let next = shift_project(&v, &st.grid, boundary, theta, p);
        let change = sup_diff(&next, &u.values);
        history.push(change);
        drifts.push(p - c);
        psi = next;
        if change < opts.profile_tol && (p - c).abs() < opts.drift_tol {
            return Ok(WaveProfile {
                grid: st.grid,
                values: psi,
                speed: c,
                direction: aplus.direction().to_vec(),
                theta,
                tail_rate: mu,
                report: ConvergenceReport {
                    iterations: it,
                    residual: change,
                    drift: p - c,
                    history,
                    drifts,
                },
            });
        }
    }
    Err(Error::Convergence {
        iterations: opts.max_iter,
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
        drift: drifts,
    })
}

/// Front displacement of the iteration run at a speed without a wave.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftReport {
    pub speed: f64,
    /// Per-iteration front displacement relative to the frame moving at `speed`.
    pub drifts: Vec<f64>,
    /// Cumulative front position in that frame.
    pub positions: Vec<f64>,
    pub total: f64,
    pub monotone: bool,
}

/// Runs `warmup + iterations` steps of `psi <- Q_1 psi (. + c)` and records
/// how far the front escapes the frame moving at `c` during the last
/// `iterations` steps. The warm-up lets the front form from the kinked seed.
pub fn subcritical_drift(
    aplus: &Kernel1D,
    aminus: &Kernel1D,
    params: &ModelParams,
    c: f64,
    iterations: usize,
    warmup: usize,
    opts: &ProfileOptions,
) -> Result<DriftReport> {
    let st = setup(aplus, aminus, params, opts)?;
    let ms = minimal_speed(aplus, params)?;
    let theta = st.theta;
    let mu = ms.lambda_star;
    let boundary = Boundary::WaveTail { rate: mu };
    let phi = super_solution(st.grid, mu, theta);
    let mut psi = shift_project(&phi.values, &st.grid, boundary, theta, 2f64.ln() / mu);
    let mut x = 0.0;
    let mut drifts = Vec::with_capacity(iterations);
    let mut positions = Vec::with_capacity(iterations);
    for it in 0..warmup + iterations {
        let u = Field {
            grid: st.grid,
            values: psi,
            boundary,
        };
        let v = flow_one(&st.system, &u, opts.dt)?;
        let p = front_position(&st.grid, &v, 0.5 * theta)
            .map_err(|_| Error::Window("front left the computational window".into()))?;
        // keep the front at the origin of the grid; bookkeeping tracks the frame moving at c
        psi = shift_project(&v, &st.grid, boundary, theta, p);
        if it < warmup {
            continue;
        }
        drifts.push(p - c);
        x += p - c;
        positions.push(x);
    }
    let monotone = drifts.iter().all(|&d| d > 0.0) || drifts.iter().all(|&d| d < 0.0);
    Ok(DriftReport {
        speed: c,
        drifts,
        positions,
        total: x,
        monotone,
    })
}

/// Stationary (`c = 0`) profile by the relaxed fixed-point iteration
/// `psi <- 2B / (A + sqrt(A^2 + 4 kappa_local B))`, `A = m + kappa_nonlocal a- * psi`,
/// `B = kappa_plus a+ * psi`, the positive root of `kappa_local psi^2 + A psi - B = 0`.
pub fn stationary_profile(
    aplus: &Kernel1D,
    aminus: &Kernel1D,
    params: &ModelParams,
    initial: Option<&[f64]>,
    opts: &ProfileOptions,
) -> Result<(WaveProfile, f64)> {
    params.check()?;
    let grid = Grid1D::from_extent(aplus.grid().step(), opts.half_width)?;
    let system = ReactionSystem::new(aplus, aminus, *params, grid)?;
    let theta = params.theta();
    let mut psi: Vec<f64> = match initial {
        Some(v) if v.len() == grid.len() => v.to_vec(),
        Some(_) => return Err(Error::GridMismatch("initial profile has the wrong length".into())),
        None => grid.points().map(|s| if s < 0.0 { theta } else if s == 0.0 { 0.5 * theta } else { 0.0 }).collect(),
    };
    if !(opts.omega > 0.0 && opts.omega <= 1.0) {
        return Err(Error::Input("relaxation factor must lie in (0, 1]".into()));
    }
    let mut history = Vec::new();
    for it in 1..=opts.max_iter {
        let (b, loss) = system.split(&psi, Boundary::Wave);
        let next: Vec<f64> = psi
            .iter()
            .zip(loss.iter().zip(&b))
            .map(|(&old, (&l, &b))| {
                let a = l - params.kappa_local * old;
                let root = stationary_root(a, b, params.kappa_local);
                (1.0 - opts.omega) * old + opts.omega * root
            })
            .collect();
        let change = sup_diff(&next, &psi);
        history.push(change);
        psi = next;
        if !change.is_finite() {
            break;
        }
        if change < opts.profile_tol {
            let residual = stationary_residual(&system, &psi, params);
            let profile = WaveProfile {
                grid,
                values: psi,
                speed: 0.0,
                direction: aplus.direction().to_vec(),
                theta,
                tail_rate: 0.0,
                report: ConvergenceReport {
                    iterations: it,
                    residual: change,
                    drift: 0.0,
                    history,
                    drifts: Vec::new(),
                },
            };
            return Ok((profile, residual));
        }
    }
    Err(Error::Convergence {
        iterations: history.len(),
        residual: history.last().copied().unwrap_or(f64::NAN),
        history,
        drift: Vec::new(),
    })
}

/// Positive root of `kl x^2 + a x - b = 0`, written without cancellation.
pub(crate) fn stationary_root(a: f64, b: f64, kl: f64) -> f64 {
    if b <= 0.0 {
        return 0.0;
    }
    2.0 * b / (a + (a * a + 4.0 * kl * b).sqrt())
}

/// `sup |kappa_local psi^2 + A psi - B|`.
pub(crate) fn stationary_residual(system: &ReactionSystem, psi: &[f64], params: &ModelParams) -> f64 {
    let (b, loss) = system.split(psi, Boundary::Wave);
    psi.iter()
        .zip(loss.iter().zip(&b))
        .map(|(&x, (&l, &b))| {
            let a = l - params.kappa_local * x;
            (params.kappa_local * x * x + a * x - b).abs()
        })
        .fold(0.0, f64::max)
}
