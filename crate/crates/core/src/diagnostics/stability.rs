use crate::birkhoff_rott::{dot, perp, InterfaceCurve};
use crate::conformal::MapJet;
use crate::dynamics::RhsBundle;
use crate::error::{Error, Result};
use std::f64::consts::PI;

use crate::spectral::{self, TrigInterpolant, C64};

/// `φ̃ = Q² ω̃ / (2|z̃_α|) - c̃ |z̃_α|`.
pub fn phi_tilde(curve: &InterfaceCurve, omega: &[f64], c: &[f64], jet: &MapJet) -> Result<Vec<f64>> {
    let n = curve.n();
    for len in [omega.len(), c.len(), jet.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len });
        }
    }
    Ok(curve
        .tangent()
        .iter()
        .enumerate()
        .map(|(j, t)| {
            let s = t.norm();
            jet.q[j] * jet.q[j] * omega[j] / (2.0 * s) - c[j] * s
        })
        .collect())
}

/// Rayleigh-Taylor function from the four groups of its defining formula.
/// `bundle` must have been computed at this state.
pub fn rayleigh_taylor(curve: &InterfaceCurve, omega: &[f64], bundle: &RhsBundle, jet: &MapJet) -> Result<Vec<f64>> {
    let n = curve.n();
    for len in [omega.len(), bundle.br.len(), bundle.phi.len(), jet.len()] {
        if len != n {
            return Err(Error::LengthMismatch { expected: n, got: len });
        }
    }
    let za = curve.tangent();
    let zaa = curve.second_derivative();
    let br_a = spectral::derivative_c(&bundle.br, 1);
    let zat = spectral::derivative_c(&bundle.z_t, 1);
    Ok((0..n)
        .map(|j| {
            let t = za[j];
            let s = t.norm();
            let normal = perp(t);
            let ratio = bundle.phi[j] / s;
            let first = dot(bundle.br_t[j] + br_a[j] * ratio, normal);
            let second = omega[j] / (2.0 * s * s) * dot(zat[j] + zaa[j] * ratio, normal);
            let v: C64 = bundle.br[j] + t * (omega[j] / (2.0 * s * s));
            let gq = jet.grad_q(j);
            let third = jet.q[j] * v.norm_sqr() * (gq[0] * normal.re + gq[1] * normal.im);
            let gp = jet.grad_p2(j);
            let fourth = gp[0] * normal.re + gp[1] * normal.im;
            first + second + third + fourth
        })
        .collect())
}

/// Minimum of a sampled field with its parameter location, refined between
/// nodes on the trigonometric interpolant.
pub fn field_min(curve: &InterfaceCurve, f: &[f64]) -> (f64, f64) {
    let (i, v) = f.iter().copied().enumerate().fold((0, f64::INFINITY), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    if !v.is_finite() || f.len() < 4 {
        return (v, curve.grid().node(i));
    }
    let interp = TrigInterpolant::from_real(f);
    let h = curve.grid().spacing();
    let eval = |x: f64| interp.eval(x).re;
    // golden section over the two cells around the best node
    let (mut a, mut b) = (curve.grid().node(i) - h, curve.grid().node(i) + h);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut x1, mut x2) = (b - g * (b - a), a + g * (b - a));
    let (mut f1, mut f2) = (eval(x1), eval(x2));
    while b - a > 1e-12 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = eval(x2);
        }
    }
    let x = 0.5 * (a + b);
    let fx = eval(x);
    if fx < v {
        (fx, (x + PI).rem_euclid(2.0 * PI) - PI)
    } else {
        (v, curve.grid().node(i))
    }
}
