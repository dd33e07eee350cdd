//! Level-crossing front positions and speed estimates.

use serde::Serialize;

use super::evolve::Trajectory;
use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Position of the first downward crossing of `level`, scanning left to right,
/// by linear interpolation between nodes.
pub fn front_position(grid: &Grid1D, values: &[f64], level: f64) -> Result<f64> {
    for i in 0..values.len().saturating_sub(1) {
        let (a, b) = (values[i], values[i + 1]);
        if a >= level && b < level {
            let t = (a - level) / (a - b);
            return Ok(grid.point(i) + t * grid.step());
        }
    }
    Err(Error::NoFront { level })
}

/// Least-squares slope of front position against time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpeedFit {
    pub speed: f64,
    pub stderr: f64,
    pub samples: usize,
    pub window: (f64, f64),
}

/// Fits `front(t) = a + c t` over samples in `window` (default: last half of the run).
pub fn measure_speed(traj: &Trajectory, level: f64, window: Option<(f64, f64)>) -> Result<SpeedFit> {
    let t_end = traj.times.last().copied().unwrap_or(0.0);
    let window = window.unwrap_or((0.5 * t_end, t_end));
    let pts: Vec<(f64, f64)> = traj
        .times
        .iter()
        .zip(&traj.fields)
        .filter(|(t, _)| **t >= window.0 - 1e-12 && **t <= window.1 + 1e-12)
        .filter_map(|(t, f)| front_position(&traj.grid, f, level).ok().map(|x| (*t, x)))
        .collect();
    let n = pts.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!(
            "{n} front positions in window [{}, {}], need at least 5",
            window.0, window.1
        )));
    }
    let nf = n as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let xm = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let stt: f64 = pts.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let stx: f64 = pts.iter().map(|p| (p.0 - tm) * (p.1 - xm)).sum();
    let speed = stx / stt;
    let rss: f64 = pts
        .iter()
        .map(|p| (p.1 - xm - speed * (p.0 - tm)).powi(2))
        .sum();
    let stderr = (rss / (nf - 2.0) / stt).sqrt();
    Ok(SpeedFit {
        speed,
        stderr,
        samples: n,
        window,
    })
}
