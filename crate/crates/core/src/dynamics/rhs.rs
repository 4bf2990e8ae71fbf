use crate::birkhoff_rott::{dot, BrOperator, Domain, SheetState, SolveMethod};
use crate::birkhoff_rott::{solve_implicit_mollified, InterfaceCurve};
use crate::conformal::{surface_tension_tilde_terms, MapJet};
use crate::diagnostics::{phi_tilde, rayleigh_taylor};
use crate::error::{Error, Result};
use crate::spectral::{self, C64};

use super::config::Regularization;

/// Time derivatives at one state plus the byproducts diagnostics reuse.
#[derive(Debug, Clone)]
pub struct RhsBundle {
    pub z_t: Vec<C64>,
    pub omega_t: Vec<f64>,
    /// Tangential speed used in `z_t`.
    pub c: Vec<f64>,
    /// Unmollified tangential speed used in the `ω` transport terms.
    pub c_bar: Vec<f64>,
    pub br: Vec<C64>,
    pub br_t: Vec<C64>,
    pub phi: Vec<f64>,
    pub sigma: Vec<f64>,
    pub solve_method: SolveMethod,
    pub solve_iterations: usize,
}

/// Tangential speed that keeps the relative arclength profile `|z_α|/L`
/// fixed in time, given the stretching density `g` and the current `|z_α|`:
/// `(c|z_α|)_α = |z_α|(λ - g)` with `λ` the mean stretching rate. On uniform
/// data this is the uniform gauge `c(α) = (α+π)/2π ∫g - ∫_{-π}^{α} g`. Zero at
/// `α = -π`.
pub fn gauge_from_stretching(g: &[f64], speed: &[f64]) -> Vec<f64> {
    let lambda = g.iter().zip(speed).map(|(a, s)| a * s).sum::<f64>() / speed.iter().sum::<f64>();
    let f: Vec<f64> = g.iter().zip(speed).map(|(a, s)| s * (lambda - a)).collect();
    let p = spectral::antiderivative(&f);
    let p0 = p[0];
    p.iter().zip(speed).map(|(v, s)| (v - p0) / s).collect()
}

fn stretching(du: &[C64], tangent: &[C64]) -> Vec<f64> {
    du.iter().zip(tangent).map(|(d, t)| dot(*d, *t) / t.norm_sqr()).collect()
}

fn q2_br(jet: &MapJet, br: &[C64]) -> Vec<C64> {
    br.iter().zip(&jet.q).map(|(b, q)| b * (q * q)).collect()
}

fn check(state: &SheetState, jet: &MapJet) -> Result<()> {
    if jet.len() != state.n() {
        return Err(Error::LengthMismatch { expected: state.n(), got: jet.len() });
    }
    Ok(())
}

/// Tangential speed `c̃` keeping `|z̃_α|` independent of `α`.
pub fn tangential_velocity_tilde(curve: &InterfaceCurve, omega: &[f64], jet: &MapJet) -> Result<Vec<f64>> {
    if omega.len() != curve.n() || jet.len() != curve.n() {
        return Err(Error::LengthMismatch { expected: curve.n(), got: omega.len().min(jet.len()) });
    }
    let br = BrOperator::new(curve)?.apply(omega);
    let du = spectral::derivative_c(&q2_br(jet, &br), 1);
    Ok(gauge_from_stretching(&stretching(&du, curve.tangent()), &curve.speed()))
}

/// Plain-domain system: the tilde assembly with the identity jet.
pub fn rhs_plain(state: &SheetState, tau: f64) -> Result<RhsBundle> {
    if state.domain() != Domain::Plain {
        return Err(Error::InvalidArgument("rhs_plain needs a plain-domain state".into()));
    }
    assemble(state, tau, &MapJet::identity(state.n()), Regularization::NONE, 3)
}

/// Tilde-domain system with the given map jet.
pub fn rhs_tilde(state: &SheetState, tau: f64, jet: &MapJet) -> Result<RhsBundle> {
    assemble(state, tau, jet, Regularization::NONE, 3)
}

/// Mollified system with `ε Λ` dissipation and Sobolev index `k`.
pub fn rhs_regularized(state: &SheetState, tau: f64, reg: Regularization, k: u32, jet: &MapJet) -> Result<RhsBundle> {
    for (name, v) in [("eps", reg.eps), ("delta", reg.delta), ("mu", reg.mu)] {
        if !(v >= 0.0) {
            return Err(Error::InvalidArgument(format!("{name} must be non-negative")));
        }
    }
    assemble(state, tau, jet, reg, k)
}

fn assemble(state: &SheetState, tau: f64, jet: &MapJet, reg: Regularization, k: u32) -> Result<RhsBundle> {
    check(state, jet)?;
    let curve = &state.curve;
    let omega = state.omega.values();
    let n = curve.n();
    let za = curve.tangent();
    let op = BrOperator::new(curve)?;
    let br = op.apply(omega);

    let u = q2_br(jet, &br);
    let du = spectral::derivative_c(&u, 1);
    let speed = curve.speed();
    let c_bar = gauge_from_stretching(&stretching(&du, za), &speed);
    let (c, u_smooth) = if reg.delta > 0.0 {
        let du_s = spectral::mollify_c(&spectral::mollify_c(&du, reg.delta), reg.delta);
        let u_s = spectral::mollify_c(&spectral::mollify_c(&u, reg.delta), reg.delta);
        (gauge_from_stretching(&stretching(&du_s, za), &speed), u_s)
    } else {
        (c_bar.clone(), u)
    };

    let z_t: Vec<C64> = if reg.mu > 0.0 {
        let za_s = spectral::mollify_c(za, reg.mu);
        let transport: Vec<C64> = c.iter().zip(&za_s).map(|(ci, t)| t * *ci).collect();
        let transport = spectral::mollify_c(&transport, reg.mu);
        u_smooth.iter().zip(&transport).map(|(a, b)| a + b).collect()
    } else {
        u_smooth.iter().zip(&c).zip(za).map(|((a, ci), t)| a + t * *ci).collect()
    };

    let kv = op.kernel_variation(omega, &z_t);
    let br_a = spectral::derivative_c(&br, 1);
    let q2 = jet.q_squared();

    let self_term: Vec<f64> = (0..n).map(|j| q2[j] * omega[j] * omega[j] / (4.0 * za[j].norm_sqr())).collect();
    let self_term = spectral::derivative(&self_term, 1);
    let transport: Vec<f64> = (0..n).map(|j| c_bar[j] * omega[j]).collect();
    let transport = spectral::derivative(&transport, 1);
    let st = surface_tension_tilde_terms(curve, jet, tau)?;
    let st = st.values();

    let explicit: Vec<f64> = (0..n)
        .map(|j| {
            let ab = jet.a[j].conj() * jet.b[j];
            // (Q²)_α = 2Q ∇Q·z̃_α = -2Q⁴ Re(ā b z̃_α)
            let dq2 = -2.0 * q2[j] * q2[j] * (ab * za[j]).re;
            let gravity = 2.0 * (jet.a[j] * za[j]).im;
            -2.0 * dot(kv[j], za[j]) - br[j].norm_sqr() * dq2 - self_term[j]
                + 2.0 * c_bar[j] * dot(br_a[j], za[j])
                + transport[j]
                - gravity
                + st[j]
        })
        .collect();

    let mut rhs = if reg.delta > 0.0 {
        spectral::mollify(&spectral::mollify(&explicit, reg.delta), reg.delta)
    } else {
        explicit
    };
    if reg.eps > 0.0 {
        let lam = spectral::lambda(omega);
        let p = 2 * k as i32 + 3;
        let damp: Vec<f64> = lam.iter().zip(&jet.q).map(|(l, q)| l / q.powi(p)).collect();
        let damp = spectral::mollify(&spectral::mollify(&damp, reg.mu), reg.mu);
        rhs.iter_mut().zip(&damp).for_each(|(r, d)| *r -= reg.eps * d);
    }

    let solve = solve_implicit_mollified(&op, &rhs, reg.delta)?;
    let extra = op.apply(&solve.omega_t);
    let br_t: Vec<C64> = kv.iter().zip(&extra).map(|(a, b)| a + b).collect();
    let phi = phi_tilde(curve, omega, &c, jet)?;

    let mut bundle = RhsBundle {
        z_t,
        omega_t: solve.omega_t,
        c,
        c_bar,
        br,
        br_t,
        phi,
        sigma: Vec::new(),
        solve_method: solve.method,
        solve_iterations: solve.iterations,
    };
    bundle.sigma = rayleigh_taylor(curve, omega, &bundle, jet)?;
    Ok(bundle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::{forward_map, map_jet, BranchContext};
    use crate::spectral::PeriodicField;

    fn wave_state(n: usize, amp: f64) -> SheetState {
        let curve = InterfaceCurve::from_fn(Domain::Plain, n, |a| C64::new(a, -0.6 + amp * (2.0 * a).cos())).unwrap();
        let omega = PeriodicField::new((0..n).map(|j| amp * (2.0 * curve.grid().node(j)).sin()).collect()).unwrap();
        SheetState::new(curve, omega, 0.0).unwrap()
    }

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    fn max_diff_c(a: &[C64], b: &[C64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn flat_rest_is_equilibrium() {
        let n = 64;
        let curve = InterfaceCurve::from_fn(Domain::Plain, n, |a| C64::new(a, 0.0)).unwrap();
        let state = SheetState::new(curve, PeriodicField::new(vec![0.0; n]).unwrap(), 0.0).unwrap();
        for tau in [0.0, 0.5, 3.0] {
            let b = rhs_plain(&state, tau).unwrap();
            assert!(b.z_t.iter().all(|v| v.norm() < 1e-14));
            assert!(spectral::max_abs(&b.omega_t) < 1e-14);
        }
    }

    #[test]
    fn gauge_vanishes_at_left_end_and_for_zero_sheet() {
        let n = 64;
        let g: Vec<f64> = (0..n).map(|j| (j as f64 * 0.3).sin() + 0.2).collect();
        assert_eq!(gauge_from_stretching(&g, &vec![1.3; g.len()])[0], 0.0);
        let curve = InterfaceCurve::from_fn(Domain::Tilde, n, |a| C64::from_polar(0.3, -a) + C64::new(0.0, -0.6)).unwrap();
        let jet = map_jet(&curve).unwrap();
        let c = tangential_velocity_tilde(&curve, &vec![0.0; n], &jet).unwrap();
        assert!(spectral::max_abs(&c) < 1e-15);
    }

    #[test]
    fn gauge_keeps_speed_uniform() {
        let state = wave_state(128, 0.1);
        let curve = crate::dynamics::enforce_uniform_parametrization(&state.curve, &state.omega).unwrap();
        let state = SheetState::new(curve.0, curve.1, 0.0).unwrap();
        let b = rhs_plain(&state, 0.3).unwrap();
        let zat = spectral::derivative_c(&b.z_t, 1);
        let rate: Vec<f64> =
            state.curve.tangent().iter().zip(&zat).map(|(t, d)| dot(*t, *d) / t.norm()).collect();
        let m = spectral::mean(&rate);
        assert!(rate.iter().all(|r| (r - m).abs() < 1e-8), "{}", max_diff(&rate, &vec![m; rate.len()]));
    }

    #[test]
    fn gauge_preserves_relative_speed_profile() {
        // non-uniform data: |z_α|_t / |z_α| must be independent of α
        let state = wave_state(128, 0.1);
        assert!(state.curve.gauge_spread() > 1e-3);
        let b = rhs_plain(&state, 0.3).unwrap();
        let zat = spectral::derivative_c(&b.z_t, 1);
        let rate: Vec<f64> =
            state.curve.tangent().iter().zip(&zat).map(|(t, d)| dot(*t, *d) / t.norm_sqr()).collect();
        let m = spectral::mean(&rate);
        assert!(max_diff(&rate, &vec![m; rate.len()]) < 1e-8);
    }

    #[test]
    fn identity_jet_reduces_tilde_to_plain() {
        let state = wave_state(64, 0.1);
        let p = rhs_plain(&state, 0.4).unwrap();
        let t = rhs_tilde(&state, 0.4, &MapJet::identity(64)).unwrap();
        assert!(max_diff_c(&p.z_t, &t.z_t) < 1e-12);
        assert!(max_diff(&p.omega_t, &t.omega_t) < 1e-12);
    }

    #[test]
    fn gravity_only_matches_independent_assembly() {
        // direct transcription of the plain equation with the τ term removed
        let state = wave_state(64, 0.1);
        let b = rhs_plain(&state, 0.0).unwrap();
        let curve = &state.curve;
        let w = state.omega.values();
        let za = curve.tangent();
        let br = crate::birkhoff_rott::br_eval(curve, w).unwrap();
        let bra = spectral::derivative_c(&br, 1);
        let kv = crate::birkhoff_rott::br_t_explicit(curve, w, &b.z_t).unwrap();
        let c = &b.c;
        let w2: Vec<f64> = (0..64).map(|j| w[j] * w[j] / (4.0 * za[j].norm_sqr())).collect();
        let cw: Vec<f64> = (0..64).map(|j| c[j] * w[j]).collect();
        let dw2 = spectral::derivative(&w2, 1);
        let dcw = spectral::derivative(&cw, 1);
        let z2a = spectral::derivative(curve.z2().values(), 1);
        let rhs: Vec<f64> = (0..64)
            .map(|j| -2.0 * dot(kv[j], za[j]) - dw2[j] + dcw[j] + 2.0 * c[j] * dot(bra[j], za[j]) - 2.0 * z2a[j])
            .collect();
        let sol = crate::birkhoff_rott::solve_omega_t(curve, &rhs).unwrap();
        assert!(max_diff(&sol.omega_t, &b.omega_t) < 1e-12);
    }

    #[test]
    fn zero_regularization_matches_tilde() {
        let plain = wave_state(64, 0.1);
        let tilde = forward_map(&plain.curve, &BranchContext::default()).unwrap();
        let state = SheetState::new(tilde, plain.omega.clone(), 0.0).unwrap();
        let jet = map_jet(&state.curve).unwrap();
        let a = rhs_tilde(&state, 0.2, &jet).unwrap();
        let b = rhs_regularized(&state, 0.2, Regularization::NONE, 3, &jet).unwrap();
        assert!(max_diff_c(&a.z_t, &b.z_t) < 1e-12);
        assert!(max_diff(&a.omega_t, &b.omega_t) < 1e-12);
    }

    #[test]
    fn dissipation_damps_single_mode_at_rate_eps_k() {
        // flat curve at rest apart from ω = cos 3α: the ε term alone is -ε Λ ω
        let n = 64;
        let eps = 0.01;
        let curve = InterfaceCurve::from_fn(Domain::Plain, n, |a| C64::new(a, 0.0)).unwrap();
        let nodes = curve.grid().nodes();
        let omega: Vec<f64> = nodes.iter().map(|a| (3.0 * a).cos()).collect();
        let state = SheetState::new(curve, PeriodicField::new(omega.clone()).unwrap(), 0.0).unwrap();
        let jet = MapJet::identity(n);
        let reg = Regularization { eps, delta: 0.0, mu: 0.0 };
        let with = rhs_regularized(&state, 0.0, reg, 3, &jet).unwrap();
        let without = rhs_regularized(&state, 0.0, Regularization::NONE, 3, &jet).unwrap();
        // the dissipation enters the implicit solve through the right-hand side,
        // so compare after re-applying the operator
        let op = BrOperator::new(&state.curve).unwrap();
        let apply = |x: &[f64]| -> Vec<f64> {
            let b = op.apply_tangential(x);
            x.iter().zip(&b).map(|(xi, bi)| xi + 2.0 * bi).collect()
        };
        let diff: Vec<f64> = apply(&with.omega_t).iter().zip(apply(&without.omega_t)).map(|(a, b)| a - b).collect();
        let expected: Vec<f64> = omega.iter().map(|w| -eps * 3.0 * w).collect();
        assert!(max_diff(&diff, &expected) < 1e-12);
    }
}
