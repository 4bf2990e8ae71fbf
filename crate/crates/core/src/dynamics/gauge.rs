use crate::birkhoff_rott::InterfaceCurve;
use crate::error::{Error, Result};
use crate::spectral::{self, PeriodicField, TrigInterpolant};

/// Target for `max| |z_α| - A | / A` after reparametrization.
pub const UNIFORM_TOLERANCE: f64 = 1e-8;

const MAX_PASSES: usize = 6;
const MAX_NEWTON: usize = 60;

/// Resamples the curve at equal arclength. The cumulative arclength is
/// inverted by Newton's method on its trigonometric interpolant, and `ω` is
/// carried as a density so that `ω dα` is preserved.
pub fn enforce_uniform_parametrization(curve: &InterfaceCurve, omega: &PeriodicField) -> Result<(InterfaceCurve, PeriodicField)> {
    if omega.len() != curve.n() {
        return Err(Error::LengthMismatch { expected: curve.n(), got: omega.len() });
    }
    let total = spectral::mean(omega.values());
    let mut c = curve.clone();
    let mut w = omega.values().to_vec();
    for _ in 0..MAX_PASSES {
        if c.gauge_spread() < UNIFORM_TOLERANCE * 1e-2 {
            break;
        }
        let (next, next_w) = resample(&c, &w)?;
        c = next;
        w = next_w;
    }
    if c.gauge_spread() >= UNIFORM_TOLERANCE {
        return Err(Error::Reparametrization(format!(
            "arclength spread {:e} after {MAX_PASSES} passes",
            c.gauge_spread()
        )));
    }
    let shift = total - spectral::mean(&w);
    w.iter_mut().for_each(|v| *v += shift);
    let grid = c.grid();
    Ok((c, PeriodicField::from_raw(grid, w)))
}

fn resample(curve: &InterfaceCurve, omega: &[f64]) -> Result<(InterfaceCurve, Vec<f64>)> {
    let n = curve.n();
    let grid = curve.grid();
    let nodes = grid.nodes();
    let speed = curve.speed();
    let a = spectral::mean(&speed);
    let speed_interp = TrigInterpolant::from_real(&speed);
    let anti = TrigInterpolant::from_real(&spectral::antiderivative(&speed));
    let start = nodes[0];
    let s0 = anti.eval(start).re;
    // cumulative arclength from the first node
    let arclength = |x: f64| a * (x - start) + anti.eval(x).re - s0;

    let interp = curve.interpolant();
    let omega_interp = TrigInterpolant::from_real(omega);
    let mut points = Vec::with_capacity(n);
    let mut new_omega = Vec::with_capacity(n);
    let mut x = start;
    for (j, node) in nodes.iter().enumerate() {
        let target = a * (node - start);
        if j > 0 {
            x += a * grid.spacing() / speed_interp.eval(x).re.max(1e-3 * a);
            let mut converged = false;
            for _ in 0..MAX_NEWTON {
                let r = arclength(x) - target;
                let ds = speed_interp.eval(x).re;
                if !(ds > 0.0) {
                    break;
                }
                let step = r / ds;
                x -= step;
                if step.abs() < 1e-15 * (1.0 + x.abs()) {
                    converged = true;
                    break;
                }
            }
            if !converged && (arclength(x) - target).abs() > 1e-13 * a {
                return Err(Error::Reparametrization(format!("arclength inversion failed at node {j}")));
            }
        }
        points.push(interp.eval(x));
        let ds = speed_interp.eval(x).re;
        new_omega.push(omega_interp.eval(x).re * a / ds);
    }
    let c = InterfaceCurve::from_points(curve.domain(), points)?;
    Ok((c, new_omega))
}
