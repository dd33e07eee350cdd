//! Uniform grids symmetric about the origin.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform 1D grid `s_i = (i - half) * step`, `i = 0..=2*half`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    step: f64,
    half: usize,
}

impl Grid1D {
    pub fn new(step: f64, half: usize) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::Input(format!("grid step must be positive, got {step}")));
        }
        Ok(Self { step, half })
    }

    /// Grid with spacing `step` covering `[-half_width, half_width]`; the
    /// half-width is rounded to the nearest multiple of `step`.
    pub fn from_extent(step: f64, half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width >= 0.0) {
            return Err(Error::Input(format!(
                "grid half-width must be nonnegative, got {half_width}"
            )));
        }
        Self::new(step, (half_width / step).round() as usize)
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step
    }

    #[inline]
    pub fn half(&self) -> usize {
        self.half
    }

    #[inline]
    pub fn len(&self) -> usize {
        2 * self.half + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn half_width(&self) -> f64 {
        self.half as f64 * self.step
    }

    #[inline]
    pub fn point(&self, i: usize) -> f64 {
        (i as f64 - self.half as f64) * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|i| self.point(i))
    }

    /// Index of the node at the origin.
    pub fn center(&self) -> usize {
        self.half
    }

    pub fn same_step(&self, other: &Grid1D) -> bool {
        (self.step - other.step).abs() <= 1e-12 * self.step.max(other.step)
    }

    /// Trapezoid weight (without the factor `step`) of node `i`.
    #[inline]
    pub fn trapezoid_weight(&self, i: usize) -> f64 {
        if self.half == 0 {
            0.0
        } else if i == 0 || i == self.len() - 1 {
            0.5
        } else {
            1.0
        }
    }

    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.len());
        let inner: f64 = values.iter().sum();
        let n = values.len();
        if n < 2 {
            return 0.0;
        }
        (inner - 0.5 * (values[0] + values[n - 1])) * self.step
    }

    /// Fractional index of `s`; may lie outside `[0, len-1]`.
    #[inline]
    pub fn locate(&self, s: f64) -> f64 {
        s / self.step + self.half as f64
    }
}

/// Four-point Lagrange interpolation on a sampled sequence, with `pad`
/// supplying values for indices outside `0..values.len()`.
pub fn cubic_sample(values: &[f64], x: f64, pad: impl Fn(isize) -> f64) -> f64 {
    let i0 = x.floor();
    let t = x - i0;
    let i = i0 as isize;
    let n = values.len() as isize;
    let at = |k: isize| {
        if (0..n).contains(&k) {
            values[k as usize]
        } else {
            pad(k)
        }
    };
    if t == 0.0 {
        return at(i);
    }
    let (fm, f0, f1, f2) = (at(i - 1), at(i), at(i + 1), at(i + 2));
    let wm = -t * (t - 1.0) * (t - 2.0) / 6.0;
    let w0 = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
    let w1 = -(t + 1.0) * t * (t - 2.0) / 2.0;
    let w2 = (t + 1.0) * t * (t - 1.0) / 6.0;
    wm * fm + w0 * f0 + w1 * f1 + w2 * f2
}

/// Linear interpolation counterpart of [`cubic_sample`].
pub fn linear_sample(values: &[f64], x: f64, pad: impl Fn(isize) -> f64) -> f64 {
    let i0 = x.floor();
    let t = x - i0;
    let i = i0 as isize;
    let n = values.len() as isize;
    let at = |k: isize| {
        if (0..n).contains(&k) {
            values[k as usize]
        } else {
            pad(k)
        }
    };
    if t == 0.0 {
        return at(i);
    }
    (1.0 - t) * at(i) + t * at(i + 1)
}
