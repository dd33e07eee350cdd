//! Reproducible random initial data.

use rand::Rng;
use statrs::function::erf::erfc;

use crate::grid::Grid1D;

/// Smooth random field with values in `(0, theta)`.
pub fn random_tube_field<R: Rng>(grid: &Grid1D, theta: f64, rng: &mut R) -> Vec<f64> {
    let modes: Vec<(f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(-1.5..1.5),
                rng.gen_range(0.1..1.5),
                rng.gen_range(0.0..std::f64::consts::TAU),
            )
        })
        .collect();
    grid.points()
        .map(|s| {
            let f: f64 = modes.iter().map(|(a, w, p)| a * (w * s + p).sin()).sum();
            theta * (0.5 + 0.5 * f.tanh())
        })
        .collect()
}

/// Pair `low <= high` of random fields in the tube.
pub fn random_ordered_pair<R: Rng>(grid: &Grid1D, theta: f64, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let high = random_tube_field(grid, theta, rng);
    let factor = random_tube_field(grid, 1.0, rng);
    let low = high.iter().zip(&factor).map(|(h, f)| h * f).collect();
    (low, high)
}

/// Random nonincreasing field from `theta` (left) to `0` (right).
pub fn random_monotone_field<R: Rng>(grid: &Grid1D, theta: f64, rng: &mut R) -> Vec<f64> {
    let half = 0.5 * grid.half_width();
    let parts: Vec<(f64, f64, f64)> = (0..3)
        .map(|_| {
            (
                rng.gen_range(0.2..1.0),
                rng.gen_range(-half..half),
                rng.gen_range(0.5..4.0),
            )
        })
        .collect();
    let total: f64 = parts.iter().map(|p| p.0).sum();
    grid.points()
        .map(|s| {
            let cdf: f64 = parts
                .iter()
                .map(|(w, m, sd)| w * 0.5 * erfc(-(s - m) / (sd * std::f64::consts::SQRT_2)))
                .sum();
            theta * (1.0 - cdf / total).clamp(0.0, 1.0)
        })
        .collect()
}
