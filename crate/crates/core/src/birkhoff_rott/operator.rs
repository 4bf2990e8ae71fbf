use nalgebra::DMatrix;

use super::curve::{Domain, InterfaceCurve};
use crate::error::{Error, Result};
use crate::spectral::{self, C64};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Smallest chord (relative to the mean node spacing) accepted before a
/// configuration is declared singular.
const MIN_RELATIVE_CHORD: f64 = 1e-10;

/// Complex kernel `k(w)` with `conj(BR) = (-i/2π) ∫ ω(β) k(z(α) - z(β)) dβ`.
/// In the plain domain the 2π-images are summed exactly: `Σ 1/(w - 2πm) = ½ cot(w/2)`.
#[inline]
pub(crate) fn kernel(domain: Domain, w: C64) -> C64 {
    match domain {
        Domain::Tilde => 1.0 / w,
        Domain::Plain => {
            // cot(w/2) = i (e^{iw} + 1) / (e^{iw} - 1)
            let e = (I * w).exp();
            0.5 * I * (e + 1.0) / (e - 1.0)
        }
    }
}

/// `k'(w)` expressed through `k(w)`.
#[inline]
pub(crate) fn kernel_derivative(domain: Domain, k: C64) -> C64 {
    match domain {
        Domain::Tilde => -k * k,
        Domain::Plain => -k * k - 0.25,
    }
}

/// Chord length, measured modulo the horizontal period in the plain domain.
#[inline]
pub(crate) fn chord(domain: Domain, w: C64) -> f64 {
    match domain {
        Domain::Tilde => w.norm(),
        Domain::Plain => {
            let shifts = [-2.0 * std::f64::consts::PI, 0.0, 2.0 * std::f64::consts::PI];
            shifts.iter().map(|s| (w + s).norm()).fold(f64::INFINITY, f64::min)
        }
    }
}

/// Birkhoff-Rott operator frozen at one curve configuration.
///
/// The principal value is taken with the alternate-point trapezoid rule:
/// node `j` only sees nodes at odd index offsets, with doubled weight, so the
/// singular diagonal is never sampled. Kernel values are cached, which makes
/// repeated applications (as in the implicit `ω_t` solve) a dense mat-vec.
#[derive(Debug, Clone)]
pub struct BrOperator {
    domain: Domain,
    n: usize,
    tangent: Vec<C64>,
    // kernel[j * n + k] = k(z_j - z_k) for odd j - k, zero otherwise
    kernel: Vec<C64>,
}

impl BrOperator {
    pub fn new(curve: &InterfaceCurve) -> Result<Self> {
        let n = curve.n();
        let z = curve.points();
        let domain = curve.domain();
        let scale = curve.arclength_factor() * curve.grid().spacing();
        let mut kernel = vec![C64::new(0.0, 0.0); n * n];
        for j in 0..n {
            for k in 0..n {
                if j == k {
                    continue;
                }
                let w = z[j] - z[k];
                let d = chord(domain, w);
                if d < MIN_RELATIVE_CHORD * scale {
                    return Err(Error::SingularConfiguration { i: j, j: k, chord: d });
                }
                if (j + k) % 2 == 1 {
                    kernel[j * n + k] = kernel_fn(domain, w);
                }
            }
        }
        Ok(Self { domain, n, tangent: curve.tangent().to_vec(), kernel })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    /// `BR(z, ω)` at the nodes, as complex velocities `u + i v`.
    pub fn apply(&self, omega: &[f64]) -> Vec<C64> {
        let n = self.n;
        let weight = 2.0 / n as f64;
        (0..n)
            .map(|j| {
                let row = &self.kernel[j * n..(j + 1) * n];
                let mut acc = C64::new(0.0, 0.0);
                for k in ((j + 1) % 2..n).step_by(2) {
                    acc += row[k] * omega[k];
                }
                (-I * weight * acc).conj()
            })
            .collect()
    }

    /// `BR(z, ω) · d` at every node.
    pub fn apply_dot(&self, omega: &[f64], directions: &[C64]) -> Vec<f64> {
        self.apply(omega).iter().zip(directions).map(|(u, d)| dot(*u, *d)).collect()
    }

    /// `BR(z, ω) · z_α`.
    pub fn apply_tangential(&self, omega: &[f64]) -> Vec<f64> {
        self.apply_dot(omega, &self.tangent)
    }

    /// Dense matrix of `ω ↦ BR(z, ω) · d`.
    pub fn dot_matrix(&self, directions: &[C64]) -> DMatrix<f64> {
        let n = self.n;
        let weight = 2.0 / n as f64;
        DMatrix::from_fn(n, n, |j, k| {
            let w = -I * weight * self.kernel[j * n + k];
            // Re(conj(BR_j) d_j)
            (w * directions[j]).re
        })
    }

    pub fn tangential_matrix(&self) -> DMatrix<f64> {
        self.dot_matrix(&self.tangent)
    }

    /// Kernel-variation part of `BR_t` with `ω` held fixed.
    pub fn kernel_variation(&self, omega: &[f64], z_t: &[C64]) -> Vec<C64> {
        let n = self.n;
        let weight = 2.0 / n as f64;
        (0..n)
            .map(|j| {
                let row = &self.kernel[j * n..(j + 1) * n];
                let mut acc = C64::new(0.0, 0.0);
                for k in ((j + 1) % 2..n).step_by(2) {
                    let kd = kernel_derivative(self.domain, row[k]);
                    acc += kd * (z_t[j] - z_t[k]) * omega[k];
                }
                (-I * weight * acc).conj()
            })
            .collect()
    }
}

#[inline]
fn kernel_fn(domain: Domain, w: C64) -> C64 {
    kernel(domain, w)
}

/// Euclidean dot product of two vectors stored as complex numbers.
#[inline]
pub fn dot(a: C64, b: C64) -> f64 {
    a.re * b.re + a.im * b.im
}

/// `(a, b)^⊥ = (-b, a)`.
#[inline]
pub fn perp(a: C64) -> C64 {
    C64::new(-a.im, a.re)
}

/// Birkhoff-Rott velocity at the nodes.
pub fn br_eval(curve: &InterfaceCurve, omega: &[f64]) -> Result<Vec<C64>> {
    check_len(curve, omega.len())?;
    Ok(BrOperator::new(curve)?.apply(omega))
}

/// Independent evaluation by kernel subtraction: the smooth remainder
/// `C₁(α, β) = k(z(α) - z(α-β)) - 1/(2 z_α(α) tan(β/2))` is integrated with the
/// plain trapezoid rule (diagonal filled with its limit `z_αα / (2 z_α²)`) and
/// the subtracted part is the exact Hilbert term `z_α^⊥ H(ω) / (2|z_α|²)`.
pub fn br_eval_subtracted(curve: &InterfaceCurve, omega: &[f64]) -> Result<Vec<C64>> {
    check_len(curve, omega.len())?;
    let n = curve.n();
    let z = curve.points();
    let za = curve.tangent();
    let zaa = curve.second_derivative();
    let nodes = curve.grid().nodes();
    let domain = curve.domain();
    let h_omega = spectral::hilbert(omega);
    let weight = 1.0 / n as f64;
    Ok((0..n)
        .map(|j| {
            let mut acc = omega[j] * zaa[j] / (2.0 * za[j] * za[j]);
            for k in 0..n {
                if k == j {
                    continue;
                }
                let beta = nodes[j] - nodes[k];
                let sub = 1.0 / (2.0 * za[j] * (beta / 2.0).tan());
                acc += omega[k] * (kernel(domain, z[j] - z[k]) - sub);
            }
            let conj_br = -I * weight * acc - I * h_omega[j] / (2.0 * za[j]);
            conj_br.conj()
        })
        .collect())
}

/// Velocity induced by the sheet at points off the curve (plain trapezoid).
pub fn br_eval_offcurve(curve: &InterfaceCurve, omega: &[f64], targets: &[C64]) -> Result<Vec<C64>> {
    check_len(curve, omega.len())?;
    let n = curve.n();
    let z = curve.points();
    let domain = curve.domain();
    let min_dist = 5.0 * curve.grid().spacing() * curve.arclength_factor();
    let weight = 1.0 / n as f64;
    targets
        .iter()
        .enumerate()
        .map(|(t, &x)| {
            let mut acc = C64::new(0.0, 0.0);
            let mut closest = f64::INFINITY;
            for k in 0..n {
                let w = x - z[k];
                closest = closest.min(chord(domain, w));
                acc += omega[k] * kernel(domain, w);
            }
            if closest <= min_dist {
                return Err(Error::TargetTooClose { index: t, distance: closest });
            }
            Ok((-I * weight * acc).conj())
        })
        .collect()
}

/// Kernel-variation part of `BR_t` for node velocities `z_t`.
pub fn br_t_explicit(curve: &InterfaceCurve, omega: &[f64], z_t: &[C64]) -> Result<Vec<C64>> {
    check_len(curve, omega.len())?;
    check_len(curve, z_t.len())?;
    Ok(BrOperator::new(curve)?.kernel_variation(omega, z_t))
}

fn check_len(curve: &InterfaceCurve, got: usize) -> Result<()> {
    if got != curve.n() {
        return Err(Error::LengthMismatch { expected: curve.n(), got });
    }
    Ok(())
}
