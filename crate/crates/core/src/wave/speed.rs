//! Speed curve `c(lambda) = (kappa_plus A(lambda) - m) / lambda` and its minimum.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::Kernel1D;
use crate::model::ModelParams;

/// `c(lambda)`, or `+inf` where the moment generating function diverges.
pub fn speed_at(aplus: &Kernel1D, params: &ModelParams, lambda: f64) -> f64 {
    let a = aplus.mgf(lambda);
    if a.is_finite() {
        (params.kappa_plus * a - params.mortality) / lambda
    } else {
        f64::INFINITY
    }
}

/// Tabulated speed curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpeedCurve {
    pub lambdas: Vec<f64>,
    /// `+inf` entries mark divergent moments.
    pub speeds: Vec<f64>,
    /// Sampled minimizer and minimum over finite entries.
    pub lambda_star: f64,
    pub c_star: f64,
}

/// Samples `c` at `n` equally spaced points of `[lo, hi]`.
pub fn speed_curve(
    aplus: &Kernel1D,
    params: &ModelParams,
    range: (f64, f64),
    n: usize,
) -> Result<SpeedCurve> {
    params.check()?;
    let (lo, hi) = range;
    if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
        return Err(Error::Input(format!(
            "lambda range must satisfy 0 < lo <= hi, got [{lo}, {hi}]"
        )));
    }
    if n == 0 || (n == 1 && hi > lo) {
        return Err(Error::Input("speed curve needs at least two samples".into()));
    }
    let lambdas: Vec<f64> = (0..n)
        .map(|k| if n == 1 { lo } else { lo + (hi - lo) * k as f64 / (n - 1) as f64 })
        .collect();
    let speeds: Vec<f64> = lambdas.iter().map(|&l| speed_at(aplus, params, l)).collect();
    let (k, c) = speeds
        .iter()
        .enumerate()
        .fold((usize::MAX, f64::INFINITY), |acc, (k, &c)| if c < acc.1 { (k, c) } else { acc });
    if k == usize::MAX {
        return Err(Error::Divergence(format!(
            "moment generating function is infinite on all of [{lo}, {hi}]"
        )));
    }
    Ok(SpeedCurve {
        lambda_star: lambdas[k],
        c_star: c,
        lambdas,
        speeds,
    })
}

/// Minimum of the speed curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MinimalSpeed {
    pub c_star: f64,
    pub lambda_star: f64,
    /// Largest sampled `lambda` with a finite moment.
    pub lambda_max_finite: f64,
    /// The minimum sits at the edge of the finite region and may be an infimum.
    pub boundary_minimum: bool,
}

const LAMBDA_MIN: f64 = 1e-3;
const LAMBDA_CAP: f64 = 1e3;
const RATIO: f64 = 1.05;

/// Brackets on a geometric grid, then refines by golden-section search.
pub fn minimal_speed(aplus: &Kernel1D, params: &ModelParams) -> Result<MinimalSpeed> {
    params.check()?;
    let c = |l: f64| speed_at(aplus, params, l);
    let mut grid = Vec::new();
    let mut l = LAMBDA_MIN;
    while l <= LAMBDA_CAP {
        let v = c(l);
        if !v.is_finite() {
            break;
        }
        grid.push((l, v));
        l *= RATIO;
    }
    if grid.is_empty() {
        return Err(Error::Divergence(
            "moment generating function is infinite for every lambda > 0".into(),
        ));
    }
    let k = (0..grid.len())
        .min_by(|&a, &b| grid[a].1.total_cmp(&grid[b].1))
        .unwrap_or(0);
    let last = grid.len() - 1;
    let lambda_max_finite = grid[last].0;
    let boundary_minimum = k == last && grid.len() > 1;
    let a = grid[k.saturating_sub(1)].0;
    let b = if k < last { grid[k + 1].0 } else { grid[k].0 };
    let (lambda_star, c_star) = golden_section(&c, a, b, 1e-10);
    let (lambda_star, c_star) = if grid[k].1 < c_star { grid[k] } else { (lambda_star, c_star) };
    Ok(MinimalSpeed {
        c_star,
        lambda_star,
        lambda_max_finite,
        boundary_minimum,
    })
}

fn golden_section(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, rel: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > rel * 0.5 * (a + b).abs() {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Smaller root `lambda_1 <= lambda_star` of `c(lambda) = c`, for `c >= c_star`.
pub fn slow_root(aplus: &Kernel1D, params: &ModelParams, c: f64) -> Result<f64> {
    let ms = minimal_speed(aplus, params)?;
    if c < ms.c_star {
        return Err(Error::Input(format!(
            "speed {c} is below the minimal speed {}",
            ms.c_star
        )));
    }
    let f = |l: f64| speed_at(aplus, params, l) - c;
    let mut hi = ms.lambda_star;
    let mut lo = hi;
    while f(lo) <= 0.0 {
        lo *= 0.5;
        if lo < 1e-300 {
            return Err(Error::Input("cannot bracket the slow root".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(hi)
}
