//! Time integration: classical RK4 and the integrating-factor Picard scheme.

use serde::Serialize;

use super::front::front_position;
use super::system::{sup_diff, Field, ReactionSystem};
use crate::conv::Boundary;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::model::ModelParams;

/// Settings for [`evolve_rk4`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rk4Options {
    pub horizon: f64,
    pub dt: f64,
    /// Time between stored samples (rounded to a multiple of the step).
    pub sample_every: f64,
    /// Level used for the recorded front positions (default `theta / 2`).
    pub level: Option<f64>,
    /// Largest overshoot of `[0, theta]` that is clipped silently; `None`
    /// disables clipping and the check.
    pub clip_tol: Option<f64>,
}

impl Rk4Options {
    pub fn new(horizon: f64, dt: f64) -> Self {
        Self {
            horizon,
            dt,
            sample_every: horizon,
            level: None,
            clip_tol: Some(1e-8),
        }
    }

    pub fn sample_every(mut self, every: f64) -> Self {
        self.sample_every = every;
        self
    }

    pub fn level(mut self, level: f64) -> Self {
        self.level = Some(level);
        self
    }

    pub fn clip_tol(mut self, tol: Option<f64>) -> Self {
        self.clip_tol = tol;
        self
    }
}

/// Description of how a trajectory was produced.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMeta {
    pub scheme: String,
    pub dt: f64,
    pub step: f64,
    pub params: ModelParams,
    pub theta: f64,
    pub max_overshoot: f64,
}

/// Sampled solution of the reduced equation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub grid: Grid1D,
    pub boundary: Boundary,
    pub times: Vec<f64>,
    pub fields: Vec<Vec<f64>>,
    pub level: f64,
    pub fronts: Vec<Option<f64>>,
    pub meta: RunMeta,
}

impl Trajectory {
    pub fn field(&self, k: usize) -> Field {
        Field {
            grid: self.grid,
            values: self.fields[k].clone(),
            boundary: self.boundary,
        }
    }

    pub fn last(&self) -> Field {
        self.field(self.fields.len() - 1)
    }
}

/// Explicit RK4 integrator owning the state.
pub struct Rk4Stepper<'a> {
    system: &'a ReactionSystem,
    boundary: Boundary,
    values: Vec<f64>,
    t: f64,
    dt: f64,
    clip_tol: Option<f64>,
    max_overshoot: f64,
}

impl<'a> Rk4Stepper<'a> {
    pub fn new(system: &'a ReactionSystem, u0: &Field, dt: f64, clip_tol: Option<f64>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Input(format!("time step must be positive, got {dt}")));
        }
        let limit = system.dt_stability();
        if dt > limit * (1.0 + 1e-12) {
            return Err(Error::Input(format!(
                "time step {dt} exceeds the stability bound {limit:.6}"
            )));
        }
        system.rhs(u0)?;
        Ok(Self {
            system,
            boundary: u0.boundary,
            values: u0.values.clone(),
            t: 0.0,
            dt,
            clip_tol,
            max_overshoot: 0.0,
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_overshoot(&self) -> f64 {
        self.max_overshoot
    }

    /// Advances by `dt` (or by the given shorter step).
    pub fn step_by(&mut self, dt: f64) -> Result<()> {
        let f = |v: &[f64]| self.system.rhs_values(v, self.boundary);
        let u = &self.values;
        let axpy = |a: f64, k: &[f64]| -> Vec<f64> { u.iter().zip(k).map(|(x, y)| x + a * y).collect() };
        let k1 = f(u);
        let k2 = f(&axpy(0.5 * dt, &k1));
        let k3 = f(&axpy(0.5 * dt, &k2));
        let k4 = f(&axpy(dt, &k3));
        let mut next: Vec<f64> = (0..u.len())
            .map(|i| u[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        self.t += dt;
        if let Some(tol) = self.clip_tol {
            let theta = self.system.theta();
            let over = next
                .iter()
                .map(|&v| (-v).max(v - theta))
                .fold(0.0, f64::max);
            if over > tol {
                return Err(Error::Stability {
                    t: self.t,
                    overshoot: over,
                    tol,
                });
            }
            self.max_overshoot = self.max_overshoot.max(over);
            for v in &mut next {
                *v = v.clamp(0.0, theta);
            }
        }
        self.values = next;
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        self.step_by(self.dt)
    }
}

/// Number of equal steps of size at most `dt` covering `horizon`.
pub(crate) fn step_count(horizon: f64, dt: f64) -> usize {
    ((horizon / dt) - 1e-9).ceil().max(1.0) as usize
}

/// Integrates `u0` over `[0, horizon]` with the classical fourth-order Runge-Kutta method.
pub fn evolve_rk4(system: &ReactionSystem, u0: &Field, opts: Rk4Options) -> Result<Trajectory> {
    if !(opts.horizon.is_finite() && opts.horizon > 0.0) {
        return Err(Error::Input(format!("horizon must be positive, got {}", opts.horizon)));
    }
    let steps = step_count(opts.horizon, opts.dt);
    let dt = opts.horizon / steps as f64;
    let every = ((opts.sample_every / dt).round() as usize).clamp(1, steps);
    let level = opts.level.unwrap_or(0.5 * system.theta());
    let mut stepper = Rk4Stepper::new(system, u0, dt, opts.clip_tol)?;
    let mut times = vec![0.0];
    let mut fields = vec![u0.values.clone()];
    for n in 1..=steps {
        stepper.step()?;
        if n % every == 0 || n == steps {
            times.push(n as f64 * dt);
            fields.push(stepper.values().to_vec());
        }
    }
    let fronts = fields
        .iter()
        .map(|v| front_position(&u0.grid, v, level).ok())
        .collect();
    Ok(Trajectory {
        grid: u0.grid,
        boundary: u0.boundary,
        times,
        fields,
        level,
        fronts,
        meta: RunMeta {
            scheme: "rk4".into(),
            dt,
            step: u0.grid.step(),
            params: *system.params(),
            theta: system.theta(),
            max_overshoot: stepper.max_overshoot(),
        },
    })
}

/// Settings for [`evolve_picard`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PicardOptions {
    pub horizon: f64,
    /// Length of the sub-intervals on which the iteration is restarted.
    pub tau_hat: f64,
    /// Internal time nodes per sub-interval.
    pub substeps: usize,
    pub max_iter: usize,
    pub tol: f64,
}

impl PicardOptions {
    pub fn new(horizon: f64) -> Self {
        Self {
            horizon,
            tau_hat: 0.25,
            substeps: 100,
            max_iter: 200,
            tol: 1e-10,
        }
    }
}

/// Result of [`evolve_picard`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PicardRun {
    pub field: Field,
    /// Iterations used on each sub-interval.
    pub iterations: Vec<usize>,
    /// Final sup-norm change on each sub-interval.
    pub residuals: Vec<f64>,
}

/// Weights `(w0, w1)` with `int_0^dt exp(-rho (dt - x)) (f0 (1 - x/dt) + f1 x/dt) dx = w0 f0 + w1 f1`,
/// where `z = rho dt`.
#[inline]
fn exp_trapezoid_weights(z: f64, dt: f64) -> (f64, f64) {
    if z.abs() < 1e-4 {
        let p1 = 1.0 - z / 2.0 + z * z / 6.0;
        let q = 0.5 - z / 6.0 + z * z / 24.0;
        return (dt * (p1 - q), dt * q);
    }
    let e = (-z).exp();
    let one_minus = -(-z).exp_m1();
    let p1 = one_minus / z;
    let q = p1 - (one_minus - z * e) / (z * z);
    (dt * (p1 - q), dt * q)
}

/// Solves the reduced equation as the fixed point of
/// `v(t) = B(0,t) u0 + int_0^t B(r,t) kappa_plus (a+ * v)(r) dr`,
/// `B(r,t) = exp(-int_r^t (m + G v)(p) dp)`, restarting on sub-intervals of length `tau_hat`.
///
/// The exponent is integrated by the trapezoid rule on the internal grid; the
/// outer integral uses piecewise-linear interpolation of the birth term against
/// the exact exponential weight of each internal step.
pub fn evolve_picard(system: &ReactionSystem, u0: &Field, opts: PicardOptions) -> Result<PicardRun> {
    if !(opts.horizon > 0.0 && opts.tau_hat > 0.0 && opts.substeps > 0 && opts.tol > 0.0) {
        return Err(Error::Input("picard horizon, tau_hat, substeps and tol must be positive".into()));
    }
    system.rhs(u0)?;
    let theta = system.theta();
    if u0.values.iter().any(|&v| v < -1e-12 || v > theta + 1e-12) {
        return Err(Error::Input("picard initial data must lie in [0, theta]".into()));
    }
    let intervals = step_count(opts.horizon, opts.tau_hat);
    let tau = opts.horizon / intervals as f64;
    let nt = opts.substeps;
    let dt = tau / nt as f64;
    let n = u0.values.len();
    let boundary = u0.boundary;
    let mut start = u0.values.clone();
    let mut iterations = Vec::with_capacity(intervals);
    let mut residuals = Vec::with_capacity(intervals);
    for _ in 0..intervals {
        let mut v: Vec<Vec<f64>> = vec![start.clone(); nt + 1];
        let mut converged = None;
        let mut last = f64::INFINITY;
        let mut history = Vec::new();
        for it in 1..=opts.max_iter {
            let terms: Vec<(Vec<f64>, Vec<f64>)> =
                v.iter().map(|vk| system.split(vk, boundary)).collect();
            let mut next = vec![start.clone(); nt + 1];
            let mut cum = vec![0.0; n];
            let mut integral = vec![0.0; n];
            for k in 1..=nt {
                let (a0, g0) = &terms[k - 1];
                let (a1, g1) = &terms[k];
                let row = &mut next[k];
                for i in 0..n {
                    let dc = 0.5 * dt * (g0[i] + g1[i]);
                    let (w0, w1) = exp_trapezoid_weights(dc, dt);
                    integral[i] = (-dc).exp() * integral[i] + w0 * a0[i] + w1 * a1[i];
                    cum[i] += dc;
                    row[i] = (-cum[i]).exp() * start[i] + integral[i];
                }
            }
            last = v
                .iter()
                .zip(&next)
                .map(|(a, b)| sup_diff(a, b))
                .fold(0.0, f64::max);
            history.push(last);
            v = next;
            if last < opts.tol {
                converged = Some(it);
                break;
            }
        }
        let it = converged.ok_or_else(|| Error::Convergence {
            iterations: opts.max_iter,
            residual: last,
            history,
            drift: Vec::new(),
        })?;
        iterations.push(it);
        residuals.push(last);
        start = v.pop().unwrap_or_default();
    }
    Ok(PicardRun {
        field: Field {
            grid: u0.grid,
            values: start,
            boundary,
        },
        iterations,
        residuals,
    })
}
