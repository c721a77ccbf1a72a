//! Periodic complex fields `(p, q)` on `x in [0, 2 pi)` and Fourier-multiplier
//! differentiation.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

type C64 = Complex64;

/// Samples of `(p, q)` at `x_j = 2 pi j / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub p: Vec<C64>,
    pub q: Vec<C64>,
}

impl ComplexField {
    pub const MIN_POINTS: usize = 16;

    pub fn new(p: Vec<C64>, q: Vec<C64>) -> Result<Self> {
        let n = p.len();
        if q.len() != n {
            return Err(Error::InvalidGrid(format!("p has {} samples, q has {}", n, q.len())));
        }
        check_grid_size(n)?;
        Ok(Self { p, q })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(f64) -> (C64, C64)) -> Result<Self> {
        let (p, q) = Self::grid(n).map(&mut f).unzip();
        Self::new(p, q)
    }

    pub fn constant(n: usize, p: C64, q: C64) -> Result<Self> {
        Self::new(vec![p; n], vec![q; n])
    }

    /// Grid abscissae `2 pi j / n`.
    pub fn grid(n: usize) -> impl Iterator<Item = f64> + Clone {
        (0..n).map(move |j| 2.0 * PI * j as f64 / n as f64)
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    pub fn dx(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }

    pub fn is_finite(&self) -> bool {
        self.p
            .iter()
            .chain(&self.q)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.p.iter().chain(&self.q).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_j |p_j - q_j|`, the distance from the diagonal subspace.
    pub fn diagonal_defect(&self) -> f64 {
        self.p
            .iter()
            .zip(&self.q)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Largest deviation of either component from its spatial mean: zero on
    /// `x`-independent fields.
    pub fn x_dependence(&self) -> f64 {
        let n = self.len() as f64;
        let mp: C64 = self.p.iter().sum::<C64>() / n;
        let mq: C64 = self.q.iter().sum::<C64>() / n;
        self.p
            .iter()
            .map(|z| (z - mp).norm())
            .chain(self.q.iter().map(|z| (z - mq).norm()))
            .fold(0.0, f64::max)
    }

    pub fn map(&self, mut f: impl FnMut(C64) -> C64) -> Self {
        Self {
            p: self.p.iter().map(|&z| f(z)).collect(),
            q: self.q.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `self + h * other`.
    pub fn axpy(&self, h: f64, other: &Self) -> Self {
        Self {
            p: self.p.iter().zip(&other.p).map(|(a, b)| a + b * h).collect(),
            q: self.q.iter().zip(&other.q).map(|(a, b)| a + b * h).collect(),
        }
    }
}

pub(crate) fn check_grid_size(n: usize) -> Result<()> {
    if n < ComplexField::MIN_POINTS || !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!(
            "grid size {n} must be a power of two >= {}",
            ComplexField::MIN_POINTS
        )));
    }
    Ok(())
}

/// FFT plans and wave numbers for a fixed grid size.
#[derive(Clone)]
pub struct SpectralGrid {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl std::fmt::Debug for SpectralGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralGrid").field("n", &self.n).finish()
    }
}

impl SpectralGrid {
    pub fn new(n: usize) -> Result<Self> {
        check_grid_size(n)?;
        let mut planner = FftPlanner::new();
        let wavenumbers = (0..n)
            .map(|j| if j <= n / 2 { j as f64 } else { j as f64 - n as f64 })
            .collect();
        Ok(Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
            wavenumbers,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Signed wave numbers in FFT order; the Nyquist entry is `+n/2`.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Unnormalized forward transform in place.
    pub fn forward(&self, buf: &mut [C64]) {
        self.forward.process(buf);
    }

    /// Inverse transform in place, including the `1/n` normalization.
    pub fn inverse(&self, buf: &mut [C64]) {
        self.inverse.process(buf);
        let s = 1.0 / self.n as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    /// Applies a Fourier multiplier `m(k)` to one component.
    pub fn apply_multiplier(&self, data: &[C64], m: impl Fn(usize, f64) -> C64) -> Vec<C64> {
        let mut buf = data.to_vec();
        self.forward(&mut buf);
        for (j, z) in buf.iter_mut().enumerate() {
            *z *= m(j, self.wavenumbers[j]);
        }
        self.inverse(&mut buf);
        buf
    }

    /// `d^order/dx^order` of one component. The Nyquist mode is dropped for odd orders.
    pub fn derivative(&self, data: &[C64], order: u32) -> Result<Vec<C64>> {
        let nyquist = self.n / 2;
        match order {
            1 => Ok(self.apply_multiplier(data, |j, k| {
                if j == nyquist {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(0.0, k)
                }
            })),
            2 => Ok(self.apply_multiplier(data, |_, k| C64::from(-k * k))),
            _ => Err(Error::InvalidOrder(order)),
        }
    }

    pub fn derivative_field(&self, field: &ComplexField, order: u32) -> Result<ComplexField> {
        if field.len() != self.n {
            return Err(Error::InvalidGrid(format!(
                "field has {} points, grid has {}",
                field.len(),
                self.n
            )));
        }
        Ok(ComplexField {
            p: self.derivative(&field.p, order)?,
            q: self.derivative(&field.q, order)?,
        })
    }

    /// Fraction of spectral energy in the upper third of the resolved modes.
    pub fn tail_fraction(&self, data: &[C64]) -> f64 {
        let mut buf = data.to_vec();
        self.forward(&mut buf);
        let cut = self.n as f64 / 3.0;
        let (mut tail, mut total) = (0.0, 0.0);
        for (z, k) in buf.iter().zip(&self.wavenumbers) {
            let e = z.norm_sqr();
            total += e;
            if k.abs() > cut {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}

/// Spectral derivative of both components (`order` in `{1, 2}`).
pub fn spectral_derivative(field: &ComplexField, order: u32) -> Result<ComplexField> {
    if !(1..=2).contains(&order) {
        return Err(Error::InvalidOrder(order));
    }
    SpectralGrid::new(field.len())?.derivative_field(field, order)
}
