//! Trapezoid convolution of grid functions with tabulated kernels.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid1D;

/// How a field is continued beyond its grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Boundary {
    /// `theta` on the left, `0` on the right.
    Wave,
    /// `theta` on the left, `u_last * exp(-rate * (s - s_last))` on the right.
    WaveTail { rate: f64 },
    /// Period `len * step`.
    Periodic,
    /// Nearest end value on each side.
    ConstantExtend,
}

impl Boundary {
    /// Value of the continued field at index `k` (any integer).
    #[inline]
    pub fn value(&self, values: &[f64], k: isize, theta: f64, step: f64) -> f64 {
        let n = values.len() as isize;
        if (0..n).contains(&k) {
            return values[k as usize];
        }
        match *self {
            Boundary::Periodic => values[k.rem_euclid(n) as usize],
            Boundary::ConstantExtend => {
                if k < 0 {
                    values[0]
                } else {
                    values[(n - 1) as usize]
                }
            }
            Boundary::Wave => {
                if k < 0 {
                    theta
                } else {
                    0.0
                }
            }
            Boundary::WaveTail { rate } => {
                if k < 0 {
                    theta
                } else {
                    values[(n - 1) as usize] * (-rate * (k - n + 1) as f64 * step).exp()
                }
            }
        }
    }

    /// `values` with `pad` continued entries on each side.
    pub fn pad(&self, values: &[f64], pad: usize, theta: f64, step: f64) -> Vec<f64> {
        let n = values.len();
        let mut out = Vec::with_capacity(n + 2 * pad);
        for q in 0..n + 2 * pad {
            out.push(self.value(values, q as isize - pad as isize, theta, step));
        }
        out
    }
}

/// Evaluation strategy for [`ConvPlan`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Fft,
    /// FFT when the direct sum would be expensive.
    Auto,
}

struct FftPlan {
    size: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// Spectrum of `w_0 + i w_1`, scaled by `1/size`.
    spectra: Vec<Vec<Complex<f64>>>,
}

/// Precomputed convolution of fields of a fixed length with one or two kernels.
///
/// Kernel `k` contributes `sum_j h w_j a_k(s_j) u(s_i - s_j)`, where `w_j` are
/// the trapezoid weights of the kernel grid.
pub struct ConvPlan {
    len: usize,
    half: usize,
    weights: Vec<Vec<f64>>,
    fft: Option<FftPlan>,
}

impl std::fmt::Debug for ConvPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConvPlan")
            .field("len", &self.len)
            .field("half", &self.half)
            .field("kernels", &self.weights.len())
            .field("fft", &self.fft.as_ref().map(|p| p.size))
            .finish()
    }
}

impl ConvPlan {
    /// `kernels` are sampled on `kernel_grid`; all share its step.
    pub fn new(len: usize, kernel_grid: &Grid1D, kernels: &[&[f64]], method: Method) -> Result<Self> {
        if kernels.is_empty() || kernels.len() > 2 {
            return Err(Error::Input("a plan holds one or two kernels".into()));
        }
        let half = kernel_grid.half();
        let weights: Vec<Vec<f64>> = kernels
            .iter()
            .map(|k| {
                if k.len() != kernel_grid.len() {
                    return Err(Error::GridMismatch("kernel length does not match its grid".into()));
                }
                Ok(k.iter()
                    .enumerate()
                    .map(|(j, &a)| kernel_grid.step() * kernel_grid.trapezoid_weight(j) * a)
                    .collect())
            })
            .collect::<Result<_>>()?;
        let use_fft = match method {
            Method::Direct => false,
            Method::Fft => true,
            Method::Auto => len * (2 * half + 1) > 1 << 15,
        };
        let fft = use_fft.then(|| Self::fft_plan(len, half, &weights));
        Ok(Self {
            len,
            half,
            weights,
            fft,
        })
    }

    fn fft_plan(len: usize, half: usize, weights: &[Vec<f64>]) -> FftPlan {
        let size = (len + 4 * half).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(size);
        let inverse = planner.plan_fft_inverse(size);
        let scale = 1.0 / size as f64;
        let spectra = weights
            .chunks(2)
            .map(|pair| {
                let mut buf = vec![Complex::new(0.0, 0.0); size];
                for (j, b) in buf.iter_mut().enumerate().take(2 * half + 1) {
                    let im = pair.get(1).map_or(0.0, |w| w[j]);
                    *b = Complex::new(pair[0][j] * scale, im * scale);
                }
                forward.process(&mut buf);
                buf
            })
            .collect();
        FftPlan {
            size,
            forward,
            inverse,
            spectra,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Pad width expected by [`ConvPlan::apply`].
    pub fn pad(&self) -> usize {
        self.half
    }

    pub fn uses_fft(&self) -> bool {
        self.fft.is_some()
    }

    /// Convolutions of the field whose padded form is `padded` (length `len + 2 pad`).
    pub fn apply(&self, padded: &[f64]) -> Vec<Vec<f64>> {
        assert_eq!(padded.len(), self.len + 2 * self.half, "padded length");
        match &self.fft {
            Some(plan) => self.apply_fft(plan, padded),
            None => self.apply_direct(padded),
        }
    }

    fn apply_direct(&self, padded: &[f64]) -> Vec<Vec<f64>> {
        let k2 = 2 * self.half;
        self.weights
            .iter()
            .map(|w| {
                (0..self.len)
                    .into_par_iter()
                    .map(|i| {
                        let window = &padded[i..=i + k2];
                        w.iter().zip(window.iter().rev()).map(|(a, b)| a * b).sum()
                    })
                    .collect()
            })
            .collect()
    }

    fn apply_fft(&self, plan: &FftPlan, padded: &[f64]) -> Vec<Vec<f64>> {
        let mut data = vec![Complex::new(0.0, 0.0); plan.size];
        for (d, &p) in data.iter_mut().zip(padded) {
            d.re = p;
        }
        plan.forward.process(&mut data);
        let offset = 2 * self.half;
        let mut out = Vec::with_capacity(self.weights.len());
        for (pair, spectrum) in self.weights.chunks(2).zip(&plan.spectra) {
            let mut buf: Vec<Complex<f64>> =
                data.iter().zip(spectrum).map(|(a, b)| a * b).collect();
            plan.inverse.process(&mut buf);
            out.push(buf[offset..offset + self.len].iter().map(|c| c.re).collect());
            if pair.len() == 2 {
                out.push(buf[offset..offset + self.len].iter().map(|c| c.im).collect());
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gaussian(grid: &Grid1D, sigma: f64) -> Vec<f64> {
        let v: Vec<f64> = grid.points().map(|s| (-0.5 * (s / sigma).powi(2)).exp()).collect();
        let m = grid.trapezoid(&v);
        v.into_iter().map(|x| x / m).collect()
    }

    fn field(n: usize) -> Vec<f64> {
        (0..n).map(|i| 0.5 + 0.4 * (i as f64 * 0.37).sin() * (-(i as f64) / 200.0).exp()).collect()
    }

    #[test]
    fn fft_matches_direct() {
        let kg = Grid1D::from_extent(0.05, 8.0).unwrap();
        let a = gaussian(&kg, 1.0);
        let b = gaussian(&kg, 0.5);
        let u = field(601);
        for boundary in [
            Boundary::Wave,
            Boundary::WaveTail { rate: 0.8 },
            Boundary::Periodic,
            Boundary::ConstantExtend,
        ] {
            let direct = ConvPlan::new(601, &kg, &[&a, &b], Method::Direct).unwrap();
            let fft = ConvPlan::new(601, &kg, &[&a, &b], Method::Fft).unwrap();
            let p = boundary.pad(&u, kg.half(), 1.0, 0.05);
            let x = direct.apply(&p);
            let y = fft.apply(&p);
            for k in 0..2 {
                let err = x[k].iter().zip(&y[k]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
                assert!(err < 1e-10, "{boundary:?} kernel {k}: {err}");
            }
        }
    }

    #[test]
    fn single_kernel_fft() {
        let kg = Grid1D::from_extent(0.1, 5.0).unwrap();
        let a = gaussian(&kg, 1.0);
        let u = field(101);
        let p = Boundary::Periodic.pad(&u, kg.half(), 1.0, 0.1);
        let x = ConvPlan::new(101, &kg, &[&a], Method::Direct).unwrap().apply(&p);
        let y = ConvPlan::new(101, &kg, &[&a], Method::Fft).unwrap().apply(&p);
        assert_eq!(y.len(), 1);
        let err = x[0].iter().zip(&y[0]).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);
    }

    #[test]
    fn constants_reproduce_kernel_mass() {
        let kg = Grid1D::from_extent(0.05, 8.0).unwrap();
        let a = gaussian(&kg, 1.0);
        let u = vec![0.7; 201];
        let p = Boundary::Periodic.pad(&u, kg.half(), 1.0, 0.05);
        let c = ConvPlan::new(201, &kg, &[&a], Method::Direct).unwrap().apply(&p);
        assert!(c[0].iter().all(|v| (v - 0.7).abs() < 1e-14));
    }

    #[test]
    fn periodic_padding_wraps() {
        let u = [1.0, 2.0, 3.0];
        assert_eq!(Boundary::Periodic.pad(&u, 4, 0.0, 1.0), vec![3.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0, 2.0, 3.0, 1.0]);
    }

    #[test]
    fn wave_padding_uses_theta_and_zero() {
        let u = [0.9, 0.5];
        assert_eq!(Boundary::Wave.pad(&u, 2, 1.0, 1.0), vec![1.0, 1.0, 0.9, 0.5, 0.0, 0.0]);
        let t = Boundary::WaveTail { rate: 2f64.ln() }.pad(&u, 2, 1.0, 1.0);
        assert!((t[4] - 0.25).abs() < 1e-15 && (t[5] - 0.125).abs() < 1e-15);
        assert_eq!(Boundary::ConstantExtend.pad(&u, 1, 7.0, 1.0), vec![0.9, 0.9, 0.5, 0.5]);
    }
}
