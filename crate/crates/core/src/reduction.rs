//! Planar data in two dimensions against the one-dimensional marginal equation.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{cubic_sample, Grid1D};
use crate::kernels::{auto_half_width, marginal_1d, marginal_pair, KernelSpec};
use crate::model::ModelParams;
use crate::semiflow::{Field, ReactionSystem};
use crate::wave::minimal_speed;

/// `u(x) = psi(x . xi)` on a square tensor grid, continued off the grid by the
/// same planar rule.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarField2D {
    pub step: f64,
    /// Nodes per axis are `2 * half + 1`.
    pub half: usize,
    pub direction: [f64; 2],
    /// Row-major, `values[i * n + j]` at `((i - half) h, (j - half) h)`.
    pub values: Vec<f64>,
    profile: Field,
    theta: f64,
}

impl PlanarField2D {
    pub fn from_profile(profile: &Field, theta: f64, xi: [f64; 2], step: f64, half: usize) -> Result<Self> {
        check_unit(xi)?;
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::Input(format!("grid step must be positive, got {step}")));
        }
        let n = 2 * half + 1;
        let mut field = PlanarField2D {
            step,
            half,
            direction: xi,
            values: Vec::new(),
            profile: profile.clone(),
            theta,
        };
        let values = (0..n * n)
            .map(|q| field.planar(q as isize / n as isize - half as isize, q as isize % n as isize - half as isize))
            .collect();
        field.values = values;
        Ok(field)
    }

    pub fn len_per_axis(&self) -> usize {
        2 * self.half + 1
    }

    fn project(&self, i: isize, j: isize) -> f64 {
        self.step * (i as f64 * self.direction[0] + j as f64 * self.direction[1])
    }

    fn planar(&self, i: isize, j: isize) -> f64 {
        let p = &self.profile;
        let x = p.grid.locate(self.project(i, j));
        cubic_sample(&p.values, x, |k| p.boundary.value(&p.values, k, self.theta, p.grid.step()))
    }

    /// Value at node offset `(i, j)` from the origin, stored or continued.
    pub fn at(&self, i: isize, j: isize) -> f64 {
        let h = self.half as isize;
        if i.abs() <= h && j.abs() <= h {
            let n = self.len_per_axis();
            self.values[(i + h) as usize * n + (j + h) as usize]
        } else {
            self.planar(i, j)
        }
    }

    /// Largest deviation of the stored values from `psi(x . xi)`.
    pub fn transverse_variation(&self) -> f64 {
        let n = self.len_per_axis() as isize;
        let h = self.half as isize;
        (0..n * n)
            .map(|q| {
                let (i, j) = (q / n - h, q % n - h);
                (self.at(i, j) - self.planar(i, j)).abs()
            })
            .fold(0.0, f64::max)
    }
}

fn check_unit(xi: [f64; 2]) -> Result<()> {
    let norm = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
    if (norm - 1.0).abs() > 1e-12 {
        return Err(Error::Input(format!("direction must be a unit vector, |xi| = {norm}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReductionOptions {
    /// Spacing of the two-dimensional grid.
    pub step: f64,
    /// Nodes are compared where `|x . xi| <= window`.
    pub window: f64,
    /// Nodes are compared where the distance to the line `R xi` is at most this.
    pub strip: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub discrepancy: f64,
    /// `(x . xi, rhs in 2D, rhs in 1D)` at each compared node.
    pub samples: Vec<(f64, f64, f64)>,
    pub transverse_variation: f64,
}

/// Offsets and unit-mass trapezoid weights of a 2D kernel on a square grid.
fn kernel_stencil(kernel: &KernelSpec, step: f64) -> Result<Vec<(isize, isize, f64)>> {
    if kernel.dim() != 2 {
        return Err(Error::Input(format!("expected a 2D kernel, got dimension {}", kernel.dim())));
    }
    let rx = (kernel.directional_radius(&[1.0, 0.0], 1e-16) / step).ceil() as isize;
    let ry = (kernel.directional_radius(&[0.0, 1.0], 1e-16) / step).ceil() as isize;
    let mut stencil = Vec::new();
    let mut total = 0.0;
    for i in -rx..=rx {
        for j in -ry..=ry {
            let mut w = kernel.eval(&[i as f64 * step, j as f64 * step])?;
            if i.abs() == rx {
                w *= 0.5;
            }
            if j.abs() == ry {
                w *= 0.5;
            }
            if w > 0.0 {
                total += w;
                stencil.push((i, j, w));
            }
        }
    }
    if !(total > 0.0) {
        return Err(Error::Window("kernel has no mass on the 2D grid".into()));
    }
    for s in stencil.iter_mut() {
        s.2 /= total;
    }
    Ok(stencil)
}

fn convolve_at(u: &PlanarField2D, stencil: &[(isize, isize, f64)], i: isize, j: isize) -> f64 {
    stencil.iter().map(|&(p, q, w)| w * u.at(i - p, j - q)).sum()
}

/// One right-hand-side evaluation of the planar datum `psi(x . xi)` by direct
/// 2D quadrature, compared with the 1D equation under the marginal kernels.
pub fn verify_planar_reduction(
    profile: &Field,
    xi: [f64; 2],
    aplus: &KernelSpec,
    aminus: &KernelSpec,
    params: &ModelParams,
    opts: &ReductionOptions,
) -> Result<ReductionReport> {
    params.check()?;
    check_unit(xi)?;
    let theta = params.theta();
    let h1 = profile.grid.step();
    let (a1, b1) = marginal_pair(aplus, aminus, &xi, h1)?;
    let system = ReactionSystem::new(&a1, &b1, *params, profile.grid)?;
    let rhs1 = system.rhs(profile)?;

    let sp = kernel_stencil(aplus, opts.step)?;
    let sm = kernel_stencil(aminus, opts.step)?;
    let half = ((opts.window + opts.strip) / opts.step).ceil() as usize + 1;
    let u = PlanarField2D::from_profile(profile, theta, xi, opts.step, half)?;

    let h = half as isize;
    let mut nodes = Vec::new();
    for i in -h..=h {
        for j in -h..=h {
            let (x, y) = (i as f64 * opts.step, j as f64 * opts.step);
            let s = x * xi[0] + y * xi[1];
            let off = (-x * xi[1] + y * xi[0]).abs();
            if s.abs() <= opts.window && off <= opts.strip + 1e-12 {
                nodes.push((i, j, s));
            }
        }
    }
    if nodes.is_empty() {
        return Err(Error::Input("no grid nodes in the comparison window".into()));
    }
    let p = *params;
    let pad = |k: isize| rhs1.boundary.value(&rhs1.values, k, 0.0, h1);
    let samples: Vec<(f64, f64, f64)> = nodes
        .par_iter()
        .map(|&(i, j, s)| {
            let v = u.at(i, j);
            let birth = convolve_at(&u, &sp, i, j);
            let comp = convolve_at(&u, &sm, i, j);
            let two = p.kappa_plus * birth - p.mortality * v - v * (p.kappa_local * v + p.kappa_nonlocal * comp);
            let one = cubic_sample(&rhs1.values, profile.grid.locate(s), pad);
            (s, two, one)
        })
        .collect();
    let discrepancy = samples.iter().map(|(_, a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(ReductionReport {
        discrepancy,
        samples,
        transverse_variation: u.transverse_variation(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RefinementStudy {
    pub steps: Vec<f64>,
    pub discrepancies: Vec<f64>,
    /// Least-squares slope of `ln discrepancy` against `ln step`.
    pub order: f64,
}

/// Reduction discrepancy on a sequence of 2D grid spacings.
pub fn refinement_study(
    profile: &Field,
    xi: [f64; 2],
    aplus: &KernelSpec,
    aminus: &KernelSpec,
    params: &ModelParams,
    steps: &[f64],
    window: f64,
) -> Result<RefinementStudy> {
    if steps.len() < 2 {
        return Err(Error::Input("a refinement study needs at least two grids".into()));
    }
    let discrepancies = steps
        .iter()
        .map(|&step| {
            let opts = ReductionOptions { step, window, strip: 0.0 };
            verify_planar_reduction(profile, xi, aplus, aminus, params, &opts).map(|r| r.discrepancy)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = discrepancies.iter().map(|d| d.max(f64::MIN_POSITIVE).ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(RefinementStudy {
        steps: steps.to_vec(),
        discrepancies,
        order: sxy / sxx,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnisotropyRow {
    pub angle: f64,
    pub direction: [f64; 2],
    pub lambda_star: Option<f64>,
    pub c_star: Option<f64>,
    pub error: Option<String>,
}

/// Minimal speed along `n` equally spaced directions of the unit circle.
/// A direction that fails is recorded and the sweep continues.
pub fn anisotropy_sweep(kernel: &KernelSpec, params: &ModelParams, n: usize, step: f64) -> Result<Vec<AnisotropyRow>> {
    params.check()?;
    if kernel.dim() != 2 {
        return Err(Error::Input(format!("expected a 2D kernel, got dimension {}", kernel.dim())));
    }
    if n == 0 {
        return Err(Error::Input("need at least one direction".into()));
    }
    let rows = (0..n)
        .into_par_iter()
        .map(|k| {
            let angle = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let xi = [angle.cos(), angle.sin()];
            let speed = Grid1D::from_extent(step, auto_half_width(kernel, &xi, step))
                .and_then(|grid| marginal_1d(kernel, &xi, grid))
                .and_then(|a| minimal_speed(&a, params));
            match speed {
                Ok(ms) => AnisotropyRow {
                    angle,
                    direction: xi,
                    lambda_star: Some(ms.lambda_star),
                    c_star: Some(ms.c_star),
                    error: None,
                },
                Err(e) => AnisotropyRow {
                    angle,
                    direction: xi,
                    lambda_star: None,
                    c_star: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(rows)
}
