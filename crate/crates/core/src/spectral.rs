//! Spectral calculus on uniformly sampled 2π-periodic functions.
//!
//! Every operator here is a Fourier multiplier applied through an FFT of the
//! nodal values. Grid nodes sit at `α_j = -π + 2πj/n`. The L² pairing used
//! throughout the crate is the rectangle rule `(2π/n) Σ f_j g_j`, which is
//! exact for band-limited integrands.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Uniform grid on `[-π, π)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PeriodicGrid {
    n: usize,
}

impl PeriodicGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || n % 2 != 0 {
            return Err(Error::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        -PI + self.spacing() * j as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
}

/// Samples of a real 2π-periodic function on a [`PeriodicGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicField {
    grid: PeriodicGrid,
    values: Vec<f64>,
}

impl PeriodicField {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let grid = PeriodicGrid::new(values.len())?;
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: PeriodicGrid) -> Self {
        Self { grid, values: vec![0.0; grid.n()] }
    }

    pub(crate) fn from_raw(grid: PeriodicGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(grid.n(), values.len());
        Self { grid, values }
    }

    pub fn grid(&self) -> PeriodicGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.values)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    /// `(∫ f² dα)^{1/2}` with the rectangle rule.
    pub fn l2_norm(&self) -> f64 {
        integrate(&self.values.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt()
    }

    pub fn derivative(&self, order: u32) -> Self {
        Self::from_raw(self.grid, derivative(&self.values, order))
    }

    pub fn hilbert(&self) -> Self {
        Self::from_raw(self.grid, hilbert(&self.values))
    }

    pub fn lambda(&self) -> Self {
        Self::from_raw(self.grid, lambda(&self.values))
    }

    pub fn mollify(&self, width: f64) -> Self {
        Self::from_raw(self.grid, mollify(&self.values, width))
    }

    pub fn interpolate(&self, alpha: f64) -> f64 {
        TrigInterpolant::from_real(&self.values).eval(alpha).re
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        sobolev_norm_slice(&self.values, s)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::from_raw(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "field length mismatch");
        Self::from_raw(
            self.grid,
            self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect(),
        )
    }
}

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// `∂_α^m f` through the multiplier `(ik)^m`.
pub fn fourier_derivative(f: &PeriodicField, order: u32) -> Result<PeriodicField> {
    check_finite(f.values())?;
    if order == 0 || order > 4 {
        return Err(Error::InvalidArgument(format!("derivative order {order} outside 1..=4")));
    }
    Ok(f.derivative(order))
}

/// Periodic Hilbert transform, multiplier `-i sgn(k)`.
pub fn hilbert_transform(f: &PeriodicField) -> Result<PeriodicField> {
    check_finite(f.values())?;
    Ok(f.hilbert())
}

/// `Λ = (-Δ)^{1/2}`, multiplier `|k|`.
pub fn lambda_op(f: &PeriodicField) -> Result<PeriodicField> {
    check_finite(f.values())?;
    Ok(f.lambda())
}

/// Convolution with the even, unit-mass Gaussian of width `width`.
pub fn mollify_field(f: &PeriodicField, width: f64) -> Result<PeriodicField> {
    if !(width >= 0.0) {
        return Err(Error::InvalidArgument(format!("mollifier width {width} must be >= 0")));
    }
    check_finite(f.values())?;
    Ok(f.mollify(width))
}

pub fn trig_interpolate(f: &PeriodicField, alpha: f64) -> f64 {
    f.interpolate(alpha)
}

pub fn sobolev_norm(f: &PeriodicField, s: f64) -> Result<f64> {
    if !(0.0..=6.0).contains(&s) {
        return Err(Error::InvalidArgument(format!("Sobolev index {s} outside [0, 6]")));
    }
    Ok(f.sobolev_norm(s))
}

// ---------------------------------------------------------------------------
// slice-level kernels

thread_local! {
    static PLANS: RefCell<(FftPlanner<f64>, HashMap<(usize, bool), Arc<dyn Fft<f64>>>)> =
        RefCell::new((FftPlanner::new(), HashMap::new()));
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut guard = cell.borrow_mut();
        let (planner, cache) = &mut *guard;
        cache
            .entry((n, inverse))
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// Unnormalized forward DFT.
pub fn fft(values: &[C64]) -> Vec<C64> {
    let mut buf = values.to_vec();
    plan(buf.len(), false).process(&mut buf);
    buf
}

/// Inverse DFT including the `1/n` factor.
pub fn ifft(coeffs: &[C64]) -> Vec<C64> {
    let n = coeffs.len();
    let mut buf = coeffs.to_vec();
    plan(n, true).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|v| *v *= scale);
    buf
}

/// Signed wavenumber of FFT bin `i` for an `n`-point transform.
pub fn wavenumber(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Applies a Fourier multiplier `m(k, is_nyquist)` to complex nodal data.
pub fn apply_multiplier_c(values: &[C64], m: impl Fn(i64, bool) -> C64) -> Vec<C64> {
    let n = values.len();
    let mut hat = fft(values);
    for (i, h) in hat.iter_mut().enumerate() {
        let k = wavenumber(i, n);
        *h *= m(k, n % 2 == 0 && i == n / 2);
    }
    ifft(&hat)
}

fn apply_multiplier_r(values: &[f64], m: impl Fn(i64, bool) -> C64) -> Vec<f64> {
    let data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    apply_multiplier_c(&data, m).into_iter().map(|c| c.re).collect()
}

fn derivative_multiplier(order: u32) -> impl Fn(i64, bool) -> C64 {
    move |k, nyquist| {
        if nyquist && order % 2 == 1 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, k as f64).powu(order)
        }
    }
}

pub fn derivative(values: &[f64], order: u32) -> Vec<f64> {
    if order == 0 {
        return values.to_vec();
    }
    apply_multiplier_r(values, derivative_multiplier(order))
}

pub fn derivative_c(values: &[C64], order: u32) -> Vec<C64> {
    if order == 0 {
        return values.to_vec();
    }
    apply_multiplier_c(values, derivative_multiplier(order))
}

/// Damping exponent of [`fourier_filter`] at the highest wavenumber, so
/// that the top mode is scaled by `e^{-36}`, about machine epsilon.
pub const FILTER_STRENGTH: f64 = 36.0;

fn filter_multiplier(n: usize, order: u32) -> impl Fn(i64, bool) -> C64 {
    let top = (n / 2) as f64;
    move |k, _| C64::new((-FILTER_STRENGTH * (k.unsigned_abs() as f64 / top).powi(order as i32)).exp(), 0.0)
}

/// Exponential low-pass filter `exp(-36 (|k|/(n/2))^order)`. Leaves the
/// resolved modes untouched to round-off for large `order`.
pub fn fourier_filter(values: &[f64], order: u32) -> Vec<f64> {
    apply_multiplier_r(values, filter_multiplier(values.len(), order))
}

pub fn fourier_filter_c(values: &[C64], order: u32) -> Vec<C64> {
    apply_multiplier_c(values, filter_multiplier(values.len(), order))
}

pub fn hilbert(values: &[f64]) -> Vec<f64> {
    apply_multiplier_r(values, |k, nyquist| {
        if nyquist || k == 0 {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, -(k.signum() as f64))
        }
    })
}

/// `|k|` with the Nyquist bin dropped, so that `Λ = ∂_α H` holds exactly.
pub fn lambda(values: &[f64]) -> Vec<f64> {
    apply_multiplier_r(values, |k, nyquist| {
        if nyquist {
            C64::new(0.0, 0.0)
        } else {
            C64::new(k.unsigned_abs() as f64, 0.0)
        }
    })
}

fn gaussian(width: f64) -> impl Fn(i64, bool) -> C64 {
    move |k, _| C64::new((-0.5 * width * width * (k * k) as f64).exp(), 0.0)
}

pub fn mollify(values: &[f64], width: f64) -> Vec<f64> {
    if width == 0.0 {
        return values.to_vec();
    }
    apply_multiplier_r(values, gaussian(width))
}

pub fn mollify_c(values: &[C64], width: f64) -> Vec<C64> {
    if width == 0.0 {
        return values.to_vec();
    }
    apply_multiplier_c(values, gaussian(width))
}

/// Mean-zero antiderivative of the mean-zero part of `values`.
pub fn antiderivative(values: &[f64]) -> Vec<f64> {
    apply_multiplier_r(values, |k, nyquist| {
        if k == 0 || nyquist {
            C64::new(0.0, 0.0)
        } else {
            C64::new(0.0, -1.0 / k as f64)
        }
    })
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub fn max_abs(values: &[f64]) -> f64 {
    values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// `∫_{-π}^{π} f dα` by the rectangle rule.
pub fn integrate(values: &[f64]) -> f64 {
    2.0 * PI * mean(values)
}

pub fn sobolev_norm_slice(values: &[f64], s: f64) -> f64 {
    let n = values.len();
    let data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
    let hat = fft(&data);
    let sum: f64 = hat
        .iter()
        .enumerate()
        .map(|(i, h)| {
            let k = wavenumber(i, n) as f64;
            (1.0 + k * k).powf(s) * (h.norm_sqr() / (n * n) as f64)
        })
        .sum();
    (2.0 * PI * sum).sqrt()
}

/// Product of two fields computed on a 3/2-padded grid and truncated back.
pub fn dealiased_product(f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = f.len();
    assert_eq!(n, g.len());
    let mut m = (3 * n).div_ceil(2);
    if m % 2 == 1 {
        m += 1;
    }
    let pad = |v: &[f64]| -> Vec<C64> {
        let data: Vec<C64> = v.iter().map(|&x| C64::new(x, 0.0)).collect();
        let hat = fft(&data);
        let mut big = vec![C64::new(0.0, 0.0); m];
        for (i, h) in hat.iter().enumerate() {
            let k = wavenumber(i, n);
            if i == n / 2 {
                continue;
            }
            let idx = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
            big[idx] = *h * (m as f64 / n as f64);
        }
        ifft(&big)
    };
    let fp = pad(f);
    let gp = pad(g);
    let prod: Vec<C64> = fp.iter().zip(&gp).map(|(a, b)| C64::new(a.re * b.re, 0.0)).collect();
    let hat = fft(&prod);
    let mut small = vec![C64::new(0.0, 0.0); n];
    for (i, s) in small.iter_mut().enumerate() {
        let k = wavenumber(i, n);
        if i == n / 2 {
            continue;
        }
        let idx = if k >= 0 { k as usize } else { (m as i64 + k) as usize };
        *s = hat[idx] * (n as f64 / m as f64);
    }
    ifft(&small).into_iter().map(|c| c.re).collect()
}

/// Band-limited interpolant of nodal samples, evaluable anywhere.
#[derive(Debug, Clone)]
pub struct TrigInterpolant {
    n: usize,
    // (wavenumber, coefficient); the Nyquist bin is stored as a cosine term
    coeffs: Vec<(i64, C64)>,
    nyquist: C64,
}

impl TrigInterpolant {
    pub fn from_complex(values: &[C64]) -> Self {
        let n = values.len();
        let hat = fft(values);
        let scale = 1.0 / n as f64;
        let mut coeffs = Vec::with_capacity(n);
        let mut nyquist = C64::new(0.0, 0.0);
        for (i, h) in hat.iter().enumerate() {
            let k = wavenumber(i, n);
            if n % 2 == 0 && i == n / 2 {
                nyquist = h * scale;
            } else {
                coeffs.push((k, h * scale));
            }
        }
        Self { n, coeffs, nyquist }
    }

    pub fn from_real(values: &[f64]) -> Self {
        let data: Vec<C64> = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::from_complex(&data)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// `order`-th derivative of the interpolant at `alpha`.
    pub fn eval_derivative(&self, alpha: f64, order: u32) -> C64 {
        let x = alpha + PI;
        let mut acc = C64::new(0.0, 0.0);
        for &(k, c) in &self.coeffs {
            let kf = k as f64;
            let phase = C64::from_polar(1.0, kf * x);
            acc += c * phase * C64::new(0.0, kf).powu(order);
        }
        if self.n % 2 == 0 {
            let kn = (self.n / 2) as f64;
            // d^m/dx^m cos(kx) = k^m cos(kx + mπ/2)
            let term = kn.powi(order as i32) * (kn * x + order as f64 * PI / 2.0).cos();
            acc += self.nyquist * term;
        }
        acc
    }

    pub fn eval(&self, alpha: f64) -> C64 {
        self.eval_derivative(alpha, 0)
    }
}
