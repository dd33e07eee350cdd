//! Probability densities on R^d.

use std::io::Read;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};

/// Axis of a tabulated kernel: `n` nodes starting at `min` with spacing `step`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub step: f64,
    pub n: usize,
}

impl Axis {
    fn max(&self) -> f64 {
        self.min + self.step * (self.n.saturating_sub(1)) as f64
    }
}

/// Shape of a kernel before shifting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Centered normal density with the given covariance matrix (row-major rows).
    Gaussian { covariance: Vec<Vec<f64>> },
    /// Product of one-sided-symmetric exponentials `(a/2) exp(-a |x_i|)`.
    Laplace { rates: Vec<f64> },
    /// Uniform density on the box `|x_i| <= half_widths[i]`.
    Uniform { half_widths: Vec<f64> },
    /// Row-major table on a tensor grid (last axis fastest), multilinear in between.
    Tabulated { axes: Vec<Axis>, values: Vec<f64> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct KernelDef {
    #[serde(flatten)]
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shift: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
enum Cache {
    Gaussian { precision: Vec<f64>, log_norm: f64 },
    Product,
    Tabulated { scale: f64 },
}

/// A probability density `a(x) = base(x - shift)` on R^d.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KernelDef", into = "KernelDef")]
pub struct KernelSpec {
    family: Family,
    shift: Vec<f64>,
    cache: Cache,
}

impl TryFrom<KernelDef> for KernelSpec {
    type Error = Error;

    fn try_from(def: KernelDef) -> Result<Self> {
        KernelSpec::new(def.family, def.shift)
    }
}

impl From<KernelSpec> for KernelDef {
    fn from(k: KernelSpec) -> Self {
        let shift = if k.shift.iter().all(|&v| v == 0.0) {
            None
        } else {
            Some(k.shift)
        };
        KernelDef {
            family: k.family,
            shift,
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Input(format!("{name} must be finite and positive, got {v}")))
    }
}

impl KernelSpec {
    pub fn new(family: Family, shift: Option<Vec<f64>>) -> Result<Self> {
        let dim = match &family {
            Family::Gaussian { covariance } => covariance.len(),
            Family::Laplace { rates } => rates.len(),
            Family::Uniform { half_widths } => half_widths.len(),
            Family::Tabulated { axes, .. } => axes.len(),
        };
        if dim == 0 {
            return Err(Error::Input("kernel dimension must be positive".into()));
        }
        let shift = shift.unwrap_or_else(|| vec![0.0; dim]);
        if shift.len() != dim {
            return Err(Error::Input(format!(
                "shift has {} components, kernel dimension is {dim}",
                shift.len()
            )));
        }
        if shift.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("shift must be finite".into()));
        }
        let (family, cache) = match family {
            Family::Gaussian { covariance } => {
                if covariance.iter().any(|row| row.len() != dim) {
                    return Err(Error::Input("covariance must be square".into()));
                }
                let m = DMatrix::from_fn(dim, dim, |i, j| covariance[i][j]);
                if (0..dim).any(|i| (0..dim).any(|j| (m[(i, j)] - m[(j, i)]).abs() > 1e-12)) {
                    return Err(Error::Input("covariance must be symmetric".into()));
                }
                let chol = m.clone().cholesky().ok_or_else(|| {
                    Error::Input("covariance must be positive definite".into())
                })?;
                let inv = chol.inverse();
                let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
                let log_norm =
                    -0.5 * (dim as f64 * (2.0 * std::f64::consts::PI).ln() + log_det);
                let precision = (0..dim * dim).map(|k| inv[(k / dim, k % dim)]).collect();
                (
                    Family::Gaussian { covariance },
                    Cache::Gaussian {
                        precision,
                        log_norm,
                    },
                )
            }
            Family::Laplace { rates } => {
                for &r in &rates {
                    positive("laplace rate", r)?;
                }
                (Family::Laplace { rates }, Cache::Product)
            }
            Family::Uniform { half_widths } => {
                for &w in &half_widths {
                    positive("uniform half-width", w)?;
                }
                (Family::Uniform { half_widths }, Cache::Product)
            }
            Family::Tabulated { axes, values } => {
                let count: usize = axes.iter().map(|a| a.n).product();
                if count != values.len() {
                    return Err(Error::Input(format!(
                        "table has {} values, axes describe {count}",
                        values.len()
                    )));
                }
                for a in &axes {
                    positive("table step", a.step)?;
                    if a.n < 2 || !a.min.is_finite() {
                        return Err(Error::Input("each table axis needs >= 2 finite nodes".into()));
                    }
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Input("table values must be finite".into()));
                }
                let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
                let mass = tensor_trapezoid(&axes, &values);
                if !(mass > 0.0) {
                    return Err(Error::Input("table has no positive mass".into()));
                }
                (
                    Family::Tabulated { axes, values },
                    Cache::Tabulated { scale: 1.0 / mass },
                )
            }
        };
        Ok(Self {
            family,
            shift,
            cache,
        })
    }

    pub fn gaussian_isotropic(dim: usize, sigma: f64) -> Result<Self> {
        positive("sigma", sigma)?;
        let covariance = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { sigma * sigma } else { 0.0 }).collect())
            .collect();
        Self::new(Family::Gaussian { covariance }, None)
    }

    pub fn gaussian_diag(variances: &[f64]) -> Result<Self> {
        let d = variances.len();
        let covariance = (0..d)
            .map(|i| (0..d).map(|j| if i == j { variances[i] } else { 0.0 }).collect())
            .collect();
        Self::new(Family::Gaussian { covariance }, None)
    }

    pub fn laplace(rates: &[f64]) -> Result<Self> {
        Self::new(
            Family::Laplace {
                rates: rates.to_vec(),
            },
            None,
        )
    }

    pub fn uniform(half_widths: &[f64]) -> Result<Self> {
        Self::new(
            Family::Uniform {
                half_widths: half_widths.to_vec(),
            },
            None,
        )
    }

    /// Same density translated by `shift`.
    pub fn with_shift(self, shift: Vec<f64>) -> Result<Self> {
        Self::new(self.family, Some(shift))
    }

    /// Reads a 1D table from two-column CSV `(s, value)`; a header row is optional.
    pub fn tabulated_from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut rows: Vec<(f64, f64)> = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Input(format!("kernel CSV: {e}")))?;
            if rec.len() < 2 {
                return Err(Error::Input(format!("kernel CSV line {}: need 2 columns", line + 1)));
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(s), Ok(v)) => rows.push((s, v)),
                _ if line == 0 => continue,
                _ => {
                    return Err(Error::Input(format!(
                        "kernel CSV line {}: cannot parse numbers",
                        line + 1
                    )))
                }
            }
        }
        if rows.len() < 2 {
            return Err(Error::Input("kernel CSV needs at least two rows".into()));
        }
        let step = rows[1].0 - rows[0].0;
        for w in rows.windows(2) {
            if ((w[1].0 - w[0].0) - step).abs() > 1e-9 * step.abs().max(1.0) {
                return Err(Error::Input("kernel CSV abscissae must be uniformly spaced".into()));
            }
        }
        let axes = vec![Axis {
            min: rows[0].0,
            step,
            n: rows.len(),
        }];
        let values = rows.into_iter().map(|(_, v)| v).collect();
        Self::new(Family::Tabulated { axes, values }, None)
    }

    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// Density at `x`.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Input(format!(
                "point has {} components, kernel dimension is {}",
                x.len(),
                self.dim()
            )));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("evaluation point must be finite".into()));
        }
        Ok(self.density(x))
    }

    /// Unchecked density evaluation used inside quadrature loops.
    pub(crate) fn density(&self, x: &[f64]) -> f64 {
        let d = self.dim();
        match (&self.family, &self.cache) {
            (Family::Gaussian { .. }, Cache::Gaussian { precision, log_norm }) => {
                let mut q = 0.0;
                for i in 0..d {
                    let yi = x[i] - self.shift[i];
                    for j in 0..d {
                        q += yi * precision[i * d + j] * (x[j] - self.shift[j]);
                    }
                }
                (log_norm - 0.5 * q).exp()
            }
            (Family::Laplace { rates }, _) => {
                let mut log = 0.0;
                for i in 0..d {
                    let a = rates[i];
                    log += (0.5 * a).ln() - a * (x[i] - self.shift[i]).abs();
                }
                log.exp()
            }
            (Family::Uniform { half_widths }, _) => {
                let mut v = 1.0;
                for i in 0..d {
                    let w = half_widths[i];
                    if (x[i] - self.shift[i]).abs() > w {
                        return 0.0;
                    }
                    v /= 2.0 * w;
                }
                v
            }
            (Family::Tabulated { axes, values }, Cache::Tabulated { scale }) => {
                let y: Vec<f64> = (0..d).map(|i| x[i] - self.shift[i]).collect();
                (scale * multilinear(axes, values, &y)).max(0.0)
            }
            _ => unreachable!("cache matches family by construction"),
        }
    }

    /// Mean and spread of the projection `x . xi` used to size quadrature boxes.
    fn projected_center(&self, xi: &[f64]) -> f64 {
        dot(&self.shift, xi)
    }

    /// Upper bound on the mass of `{x : x . xi outside [lo, hi]}`.
    pub fn tail_mass_bound(&self, xi: &[f64], lo: f64, hi: f64) -> f64 {
        let mu = self.projected_center(xi);
        match &self.family {
            Family::Gaussian { covariance } => {
                let var = quad_form(covariance, xi);
                let sd = var.sqrt();
                let sq2 = std::f64::consts::SQRT_2;
                let left = 0.5 * erfc((mu - lo) / (sd * sq2));
                let right = 0.5 * erfc((hi - mu) / (sd * sq2));
                (left + right).min(1.0)
            }
            Family::Laplace { rates } => {
                let t = (hi - mu).min(mu - lo);
                if t <= 0.0 {
                    return 1.0;
                }
                let s: f64 = xi.iter().map(|v| v.abs()).sum();
                rates
                    .iter()
                    .zip(xi)
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(&a, _)| (-a * t / s).exp())
                    .sum::<f64>()
                    .min(1.0)
            }
            Family::Uniform { half_widths } => {
                let r: f64 = half_widths.iter().zip(xi).map(|(w, x)| w * x.abs()).sum();
                if mu - r >= lo && mu + r <= hi {
                    return 0.0;
                }
                let t = (hi - mu).min(mu - lo);
                if t <= 0.0 {
                    return 1.0;
                }
                let s: f64 = xi.iter().map(|v| v.abs()).sum();
                half_widths
                    .iter()
                    .zip(xi)
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(&w, _)| (1.0 - t / (s * w)).max(0.0))
                    .sum::<f64>()
                    .min(1.0)
            }
            Family::Tabulated { axes, .. } => {
                let (plo, phi) = self.table_projection(axes, xi);
                if plo >= lo && phi <= hi {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    fn table_projection(&self, axes: &[Axis], xi: &[f64]) -> (f64, f64) {
        let mu = self.projected_center(xi);
        let mut lo = mu;
        let mut hi = mu;
        for (a, &x) in axes.iter().zip(xi) {
            let (p, q) = (a.min * x, a.max() * x);
            lo += p.min(q);
            hi += p.max(q);
        }
        (lo, hi)
    }

    /// Half-width `r` such that the mass of `{|x . xi| > r}` is below `tol`.
    pub fn directional_radius(&self, xi: &[f64], tol: f64) -> f64 {
        let mu = self.projected_center(xi);
        let spread = match &self.family {
            Family::Gaussian { covariance } => {
                let sd = quad_form(covariance, xi).sqrt();
                let mut z = 1.0;
                while 0.5 * erfc(z / std::f64::consts::SQRT_2) > 0.5 * tol && z < 40.0 {
                    z += 0.25;
                }
                z * sd
            }
            Family::Laplace { rates } => {
                let s: f64 = xi.iter().map(|v| v.abs()).sum();
                let amin = rates
                    .iter()
                    .zip(xi)
                    .filter(|(_, &x)| x != 0.0)
                    .map(|(&a, _)| a)
                    .fold(f64::INFINITY, f64::min);
                if amin.is_infinite() {
                    0.0
                } else {
                    s * (rates.len() as f64 / tol).ln() / amin
                }
            }
            Family::Uniform { half_widths } => {
                half_widths.iter().zip(xi).map(|(w, x)| w * x.abs()).sum()
            }
            Family::Tabulated { axes, .. } => {
                let (lo, hi) = self.table_projection(axes, xi);
                return lo.abs().max(hi.abs());
            }
        };
        mu.abs() + spread
    }

    /// Length scale used to pick transverse quadrature steps.
    pub(crate) fn resolution_scale(&self) -> f64 {
        match &self.family {
            Family::Gaussian { covariance } => (0..covariance.len())
                .map(|i| covariance[i][i].sqrt())
                .fold(f64::INFINITY, f64::min),
            Family::Laplace { rates } => 1.0 / rates.iter().cloned().fold(0.0, f64::max),
            Family::Uniform { half_widths } => half_widths.iter().cloned().fold(f64::INFINITY, f64::min),
            Family::Tabulated { axes, .. } => {
                axes.iter().map(|a| a.step).fold(f64::INFINITY, f64::min)
            }
        }
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn quad_form(m: &[Vec<f64>], v: &[f64]) -> f64 {
    let mut q = 0.0;
    for (i, row) in m.iter().enumerate() {
        for (j, &mij) in row.iter().enumerate() {
            q += v[i] * mij * v[j];
        }
    }
    q
}

fn tensor_trapezoid(axes: &[Axis], values: &[f64]) -> f64 {
    let d = axes.len();
    let mut total = 0.0;
    let mut idx = vec![0usize; d];
    for &v in values {
        let mut w = 1.0;
        for (k, a) in axes.iter().enumerate() {
            let end = idx[k] == 0 || idx[k] == a.n - 1;
            w *= a.step * if end { 0.5 } else { 1.0 };
        }
        total += w * v;
        for k in (0..d).rev() {
            idx[k] += 1;
            if idx[k] < axes[k].n {
                break;
            }
            idx[k] = 0;
        }
    }
    total
}

fn multilinear(axes: &[Axis], values: &[f64], y: &[f64]) -> f64 {
    let d = axes.len();
    let mut base = Vec::with_capacity(d);
    let mut frac = Vec::with_capacity(d);
    for (a, &yk) in axes.iter().zip(y) {
        let t = (yk - a.min) / a.step;
        let last = (a.n - 1) as f64;
        if !(0.0..=last).contains(&t) {
            return 0.0;
        }
        let i = (t.floor() as usize).min(a.n - 2);
        base.push(i);
        frac.push(t - i as f64);
    }
    let mut acc = 0.0;
    for corner in 0..(1usize << d) {
        let mut w = 1.0;
        let mut flat = 0usize;
        for k in 0..d {
            let bit = (corner >> k) & 1;
            w *= if bit == 1 { frac[k] } else { 1.0 - frac[k] };
            flat = flat * axes[k].n + base[k] + bit;
        }
        if w != 0.0 {
            acc += w * values[flat];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_mode_value() {
        let k = KernelSpec::gaussian_isotropic(1, 1.0).unwrap();
        let v = k.eval(&[0.0]).unwrap();
        assert!((v - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn laplace_peak_value() {
        let k = KernelSpec::laplace(&[2.0]).unwrap();
        assert!((k.eval(&[0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn uniform_outside_support() {
        let k = KernelSpec::uniform(&[1.0]).unwrap();
        assert_eq!(k.eval(&[2.0]).unwrap(), 0.0);
        assert_eq!(k.eval(&[0.5]).unwrap(), 0.5);
    }

    #[test]
    fn rejects_non_finite_points() {
        let k = KernelSpec::gaussian_isotropic(2, 1.0).unwrap();
        assert!(k.eval(&[f64::NAN, 0.0]).is_err());
        assert!(k.eval(&[0.0]).is_err());
    }

    #[test]
    fn shift_moves_mass() {
        let k = KernelSpec::gaussian_isotropic(1, 1.0)
            .unwrap()
            .with_shift(vec![3.0])
            .unwrap();
        assert!((k.eval(&[3.0]).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-15);
    }

    #[test]
    fn anisotropic_gaussian_density() {
        let k = KernelSpec::gaussian_diag(&[1.0, 4.0]).unwrap();
        let x = [0.3, -1.1];
        let expect = (-0.5f64 * (0.09 + 1.21 / 4.0)).exp() / (2.0 * std::f64::consts::PI * 2.0);
        assert!((k.eval(&x).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn tabulated_is_normalized_and_clipped() {
        let axes = vec![Axis { min: -1.0, step: 0.5, n: 5 }];
        let k = KernelSpec::new(
            Family::Tabulated { axes, values: vec![0.0, 1.0, 2.0, 1.0, -3.0] },
            None,
        )
        .unwrap();
        // trapezoid mass of clipped table: 0.5*(0.5*0 + 1 + 2 + 1 + 0.5*0) = 2
        assert!((k.eval(&[0.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((k.eval(&[0.25]).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(k.eval(&[1.5]).unwrap(), 0.0);
        assert!(k.eval(&[0.9]).unwrap() >= 0.0);
    }

    #[test]
    fn csv_with_header_and_crlf() {
        let text = "s,value\r\n-1,0\r\n0,1\r\n1,0\r\n";
        let k = KernelSpec::tabulated_from_csv(text.as_bytes()).unwrap();
        assert!((k.eval(&[0.0]).unwrap() - 1.0).abs() < 1e-15);
        let bare = "-1,0\n0,1\n1,0\n";
        let k2 = KernelSpec::tabulated_from_csv(bare.as_bytes()).unwrap();
        assert_eq!(k, k2);
    }

    #[test]
    fn csv_rejects_uneven_spacing() {
        let text = "0,1\n1,1\n3,1\n";
        assert!(KernelSpec::tabulated_from_csv(text.as_bytes()).is_err());
    }

    #[test]
    fn gaussian_tail_bound_matches_normal_cdf() {
        let k = KernelSpec::gaussian_isotropic(2, 1.0).unwrap();
        let xi = [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2];
        // P(|Z| > 1.96) ~ 0.05
        let t = k.tail_mass_bound(&xi, -1.959_963_984_540_054, 1.959_963_984_540_054);
        assert!((t - 0.05).abs() < 1e-10, "t={t}");
    }
}
