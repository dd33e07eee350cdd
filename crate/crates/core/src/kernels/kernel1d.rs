//! One-dimensional marginal kernels and their moment generating functions.

use rayon::prelude::*;

use super::spec::{dot, KernelSpec};
use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// Default bound on the mass a marginal may lose outside its grid.
pub const MASS_TOL: f64 = 1e-8;

/// Ratio of the outermost integrand sample to the running sum above which
/// the moment generating function is declared infinite.
pub const MGF_GUARD: f64 = 1e-14;

/// Tail mass targeted when a marginal grid is sized automatically.
const AUTO_TAIL: f64 = 1e-35;

/// A density on a symmetric uniform grid together with the direction that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel1D {
    grid: Grid1D,
    values: Vec<f64>,
    direction: Vec<f64>,
}

impl Kernel1D {
    /// Wraps nonnegative samples and rescales them to unit trapezoid mass.
    pub fn from_values(grid: Grid1D, values: Vec<f64>, direction: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Input("kernel values must be finite and nonnegative".into()));
        }
        let mass = grid.trapezoid(&values);
        if !(mass > 0.0) {
            return Err(Error::Input("kernel has no mass on its grid".into()));
        }
        let values = values.into_iter().map(|v| v / mass).collect();
        Ok(Self {
            grid,
            values,
            direction,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn mass(&self) -> f64 {
        self.grid.trapezoid(&self.values)
    }

    /// Value at `s`, zero off the grid, linear between nodes.
    pub fn at(&self, s: f64) -> f64 {
        let x = self.grid.locate(s);
        let n = self.values.len();
        if x < 0.0 || x > (n - 1) as f64 {
            return 0.0;
        }
        crate::grid::linear_sample(&self.values, x, |_| 0.0)
    }

    /// Same density on a grid with `half` nodes on each side (zero fill).
    pub fn widened(&self, half: usize) -> Result<Self> {
        if half < self.grid.half() {
            return Err(Error::Input("cannot shrink a kernel grid".into()));
        }
        let grid = Grid1D::new(self.grid.step(), half)?;
        let off = half - self.grid.half();
        let mut values = vec![0.0; grid.len()];
        values[off..off + self.values.len()].copy_from_slice(&self.values);
        Ok(Self {
            grid,
            values,
            direction: self.direction.clone(),
        })
    }

    /// Trapezoid approximation of `int a(s) exp(lambda s) ds`, or `+inf` when
    /// the tail is not captured by the grid.
    pub fn mgf(&self, lambda: f64) -> f64 {
        if lambda == 0.0 {
            return self.mass();
        }
        let h = self.grid.step();
        let mut sum = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > 0.0 {
                sum += self.grid.trapezoid_weight(i) * v * (lambda * self.grid.point(i)).exp();
            }
        }
        sum *= h;
        if !sum.is_finite() {
            return f64::INFINITY;
        }
        let first = self.values.iter().position(|&v| v > 0.0);
        let last = self.values.iter().rposition(|&v| v > 0.0);
        if let (Some(a), Some(b)) = (first, last) {
            for i in [a, b] {
                let edge = self.values[i].ln() + lambda * self.grid.point(i);
                if edge > (MGF_GUARD * sum).ln() {
                    return f64::INFINITY;
                }
            }
        }
        sum
    }
}

/// Orthonormal basis of the complement of the unit vector `xi`.
pub fn transverse_basis(xi: &[f64]) -> Vec<Vec<f64>> {
    let d = xi.len();
    let mut basis: Vec<Vec<f64>> = vec![xi.to_vec()];
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut v = vec![0.0; d];
        v[k] = 1.0;
        for b in &basis {
            let p = dot(&v, b);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= p * bi;
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-6 {
            basis.push(v.into_iter().map(|x| x / n).collect());
        }
    }
    basis.remove(0);
    basis
}

fn check_direction(kernel: &KernelSpec, xi: &[f64]) -> Result<()> {
    if xi.len() != kernel.dim() {
        return Err(Error::Input(format!(
            "direction has {} components, kernel dimension is {}",
            xi.len(),
            kernel.dim()
        )));
    }
    let norm = dot(xi, xi).sqrt();
    if !((norm - 1.0).abs() <= 1e-12) {
        return Err(Error::Input(format!("direction must be a unit vector, |xi| = {norm}")));
    }
    Ok(())
}

/// Marginal `s -> int_{x.xi = s} a(x) dx` of `kernel` along `xi`, sampled on `grid`.
pub fn marginal_1d(kernel: &KernelSpec, xi: &[f64], grid: Grid1D) -> Result<Kernel1D> {
    marginal_1d_with(kernel, xi, grid, None, MASS_TOL)
}

/// As [`marginal_1d`] with an explicit transverse basis and mass tolerance.
pub fn marginal_1d_with(
    kernel: &KernelSpec,
    xi: &[f64],
    grid: Grid1D,
    basis: Option<Vec<Vec<f64>>>,
    mass_tol: f64,
) -> Result<Kernel1D> {
    check_direction(kernel, xi)?;
    let d = kernel.dim();
    let l = grid.half_width();
    let analytic_tail = kernel.tail_mass_bound(xi, -l, l);
    let values: Vec<f64> = if d == 1 {
        grid.points()
            .map(|s| kernel.density(&[s * xi[0]]))
            .collect()
    } else {
        let basis = basis.unwrap_or_else(|| transverse_basis(xi));
        if basis.len() != d - 1 {
            return Err(Error::Input("transverse basis has the wrong size".into()));
        }
        let dt = grid.step().min(kernel.resolution_scale() / 20.0);
        let radius = basis
            .iter()
            .map(|eta| kernel.directional_radius(eta, 1e-16))
            .fold(0.0, f64::max);
        let m = (radius / dt).ceil() as usize;
        let nodes: Vec<f64> = (0..=2 * m).map(|k| (k as f64 - m as f64) * dt).collect();
        let weight = |k: usize| if k == 0 || k == 2 * m { 0.5 * dt } else { dt };
        let points: Vec<f64> = grid.points().collect();
        points
            .par_iter()
            .map(|&s| {
                let mut idx = vec![0usize; d - 1];
                let mut x = vec![0.0; d];
                let mut total = 0.0;
                loop {
                    let mut w = 1.0;
                    for (c, xc) in x.iter_mut().enumerate() {
                        *xc = s * xi[c];
                    }
                    for (b, &k) in basis.iter().zip(&idx) {
                        w *= weight(k);
                        let t = nodes[k];
                        for (xc, bc) in x.iter_mut().zip(b) {
                            *xc += t * bc;
                        }
                    }
                    total += w * kernel.density(&x);
                    let mut j = 0;
                    loop {
                        if j == idx.len() {
                            return total;
                        }
                        idx[j] += 1;
                        if idx[j] <= 2 * m {
                            break;
                        }
                        idx[j] = 0;
                        j += 1;
                    }
                }
            })
            .collect()
    };
    let raw_mass = grid.trapezoid(&values);
    let captured = if analytic_tail < 1.0 {
        1.0 - analytic_tail
    } else {
        raw_mass
    };
    if captured < 1.0 - mass_tol {
        return Err(Error::DomainTooSmall {
            captured,
            tol: mass_tol,
        });
    }
    Kernel1D::from_values(grid, values, xi.to_vec())
}

/// Half-width (multiple of `step`) that holds essentially all of the marginal
/// mass and keeps the moment generating function resolvable near its minimum.
pub fn auto_half_width(kernel: &KernelSpec, xi: &[f64], step: f64) -> f64 {
    let r = kernel.directional_radius(xi, AUTO_TAIL);
    ((r / step).ceil() + 2.0) * step
}

/// Marginals of a dispersal/competition pair on one shared grid of spacing `step`.
pub fn marginal_pair(
    aplus: &KernelSpec,
    aminus: &KernelSpec,
    xi: &[f64],
    step: f64,
) -> Result<(Kernel1D, Kernel1D)> {
    let half_width = auto_half_width(aplus, xi, step).max(auto_half_width(aminus, xi, step));
    let grid = Grid1D::from_extent(step, half_width)?;
    Ok((marginal_1d(aplus, xi, grid)?, marginal_1d(aminus, xi, grid)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn normal(s: f64, sigma: f64) -> f64 {
        (-0.5 * (s / sigma).powi(2)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
    }

    #[test]
    fn isotropic_gaussian_marginal_is_gaussian() {
        let k = KernelSpec::gaussian_isotropic(2, 1.0).unwrap();
        let grid = Grid1D::from_extent(0.05, 12.0).unwrap();
        for xi in [[1.0, 0.0], [0.6, 0.8], [std::f64::consts::FRAC_1_SQRT_2; 2]] {
            let m = marginal_1d(&k, &xi, grid).unwrap();
            let err = grid
                .points()
                .zip(m.values())
                .map(|(s, v)| (v - normal(s, 1.0)).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "xi={xi:?} err={err}");
        }
    }

    #[test]
    fn anisotropic_gaussian_marginal_along_long_axis() {
        let k = KernelSpec::gaussian_diag(&[1.0, 4.0]).unwrap();
        let grid = Grid1D::from_extent(0.05, 20.0).unwrap();
        let m = marginal_1d(&k, &[0.0, 1.0], grid).unwrap();
        let err = grid
            .points()
            .zip(m.values())
            .map(|(s, v)| (v - normal(s, 2.0)).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-8, "err={err}");
    }

    #[test]
    fn one_dimensional_branch_reproduces_density() {
        let k = KernelSpec::laplace(&[2.0]).unwrap();
        let grid = Grid1D::from_extent(0.01, 20.0).unwrap();
        let m = marginal_1d(&k, &[1.0], grid).unwrap();
        let raw: Vec<f64> = grid.points().map(|s| (-2.0 * s.abs()).exp()).collect();
        let mass = grid.trapezoid(&raw);
        for (v, r) in m.values().iter().zip(&raw) {
            assert!((v - r / mass).abs() < 1e-14);
        }
        // renormalization only corrects the kink quadrature error
        assert!((mass - 1.0).abs() < 1e-4);
    }

    #[test]
    fn reversed_direction_mirrors_shifted_kernel() {
        let k = KernelSpec::gaussian_isotropic(1, 1.0)
            .unwrap()
            .with_shift(vec![1.0])
            .unwrap();
        let grid = Grid1D::from_extent(0.1, 15.0).unwrap();
        let p = marginal_1d(&k, &[1.0], grid).unwrap();
        let q = marginal_1d(&k, &[-1.0], grid).unwrap();
        let n = grid.len();
        for i in 0..n {
            assert!((p.values()[i] - q.values()[n - 1 - i]).abs() < 1e-14);
        }
    }

    #[test]
    fn narrow_grid_is_rejected() {
        let k = KernelSpec::gaussian_isotropic(1, 1.0).unwrap();
        let grid = Grid1D::from_extent(0.05, 3.0).unwrap();
        match marginal_1d(&k, &[1.0], grid) {
            Err(Error::DomainTooSmall { captured, .. }) => assert!(captured < 1.0 - 1e-3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_unit_direction_rejected() {
        let k = KernelSpec::gaussian_isotropic(2, 1.0).unwrap();
        let grid = Grid1D::from_extent(0.05, 12.0).unwrap();
        assert!(marginal_1d(&k, &[1.0, 1.0], grid).is_err());
    }

    #[test]
    fn mgf_laplace_closed_form() {
        let k = KernelSpec::laplace(&[2.0]).unwrap();
        let grid = Grid1D::from_extent(0.001, 40.0).unwrap();
        let m = marginal_1d(&k, &[1.0], grid).unwrap();
        assert!((m.mgf(1.0) - 4.0 / 3.0).abs() < 1e-6);
        assert!((m.mgf(0.0) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn mgf_gaussian_closed_form() {
        let k = KernelSpec::gaussian_isotropic(1, 1.0).unwrap();
        let grid = Grid1D::from_extent(0.05, 15.0).unwrap();
        let m = marginal_1d(&k, &[1.0], grid).unwrap();
        assert!((m.mgf(1.0) - 0.5f64.exp()).abs() < 1e-6);
    }

    #[test]
    fn mgf_reports_divergence_beyond_rate() {
        let k = KernelSpec::laplace(&[2.0]).unwrap();
        let grid = Grid1D::from_extent(0.01, 40.0).unwrap();
        let m = marginal_1d(&k, &[1.0], grid).unwrap();
        assert!(m.mgf(2.5).is_infinite());
        assert!(m.mgf(1.9).is_infinite());
        assert!(m.mgf(1.0).is_finite());
    }

    #[test]
    fn transverse_basis_is_orthonormal() {
        let xi = [0.48, 0.6, 0.64];
        let b = transverse_basis(&xi);
        assert_eq!(b.len(), 2);
        for (i, u) in b.iter().enumerate() {
            assert!(dot(u, &xi).abs() < 1e-14);
            assert!((dot(u, u) - 1.0).abs() < 1e-14);
            for v in &b[i + 1..] {
                assert!(dot(u, v).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn pair_shares_grid() {
        let a = KernelSpec::gaussian_isotropic(1, 1.0).unwrap();
        let b = KernelSpec::gaussian_isotropic(1, 3.0).unwrap();
        let (p, q) = marginal_pair(&a, &b, &[1.0], 0.05).unwrap();
        assert_eq!(p.grid(), q.grid());
        assert!(p.grid().half_width() > 30.0);
    }
}
