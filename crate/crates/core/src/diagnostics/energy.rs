use crate::birkhoff_rott::{dot, perp, BrOperator, Domain, InterfaceCurve, SheetState};
use crate::conformal::{inverse_map, MapJet};
use crate::error::{Error, Result};
use crate::spectral;

use super::geometry::{arc_chord, q_distances};

/// Mean of `Φ_α` above which the potential is reported as multivalued.
pub const POTENTIAL_MEAN_WARNING: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MechanicalEnergy {
    pub kinetic: f64,
    pub potential: f64,
    pub tension: f64,
}

impl MechanicalEnergy {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential + self.tension
    }
}

/// Water-side velocity `BR + ω z_α / (2|z_α|²)` and the boundary potential.
struct BoundaryFlow {
    velocity: Vec<crate::C64>,
    potential: Vec<f64>,
    normal_velocity: Vec<f64>,
}

fn boundary_flow(curve: &InterfaceCurve, omega: &[f64]) -> Result<BoundaryFlow> {
    let br = BrOperator::new(curve)?.apply(omega);
    let za = curve.tangent();
    let velocity: Vec<crate::C64> =
        br.iter().zip(za).zip(omega).map(|((b, t), w)| b + t * (w / (2.0 * t.norm_sqr()))).collect();
    let dphi: Vec<f64> = velocity.iter().zip(za).map(|(v, t)| dot(*v, *t)).collect();
    let m = spectral::mean(&dphi);
    if m.abs() > POTENTIAL_MEAN_WARNING {
        log::warn!("boundary potential has nonzero mean derivative {m:e}");
    }
    let potential = spectral::antiderivative(&dphi);
    let normal_velocity = br.iter().zip(za).map(|(b, t)| dot(*b, perp(*t))).collect();
    Ok(BoundaryFlow { velocity, potential, normal_velocity })
}

/// `½∫|v|²` over the water, reduced to `½∫ Φ (u·z_α^⊥) dα`. The Dirichlet
/// integral is conformally invariant, so this holds on tilde curves too.
pub fn kinetic_energy(curve: &InterfaceCurve, omega: &[f64]) -> Result<f64> {
    if omega.len() != curve.n() {
        return Err(Error::LengthMismatch { expected: curve.n(), got: omega.len() });
    }
    let flow = boundary_flow(curve, omega)?;
    let integrand: Vec<f64> = flow.potential.iter().zip(&flow.normal_velocity).map(|(p, u)| p * u).collect();
    Ok(0.5 * spectral::integrate(&integrand))
}

/// Physical-domain curve of a state.
pub fn physical_curve(state: &SheetState) -> Result<InterfaceCurve> {
    match state.domain() {
        Domain::Plain => Ok(state.curve.clone()),
        Domain::Tilde => inverse_map(&state.curve),
    }
}

/// Kinetic, potential and surface energy. Tilde states are measured through
/// their preimage for the two geometric terms.
pub fn mechanical_energy(state: &SheetState, tau: f64) -> Result<MechanicalEnergy> {
    let kinetic = kinetic_energy(&state.curve, state.omega.values())?;
    let physical = physical_curve(state)?;
    let z2 = physical.z2();
    let pot: Vec<f64> = physical.tangent().iter().zip(z2.values()).map(|(t, y)| y * y * t.re).collect();
    let potential = 0.5 * spectral::integrate(&pot);
    let tension = 0.5 * tau * spectral::integrate(&physical.speed());
    Ok(MechanicalEnergy { kinetic, potential, tension })
}

/// Instantaneous rates of the three energies from their boundary formulas.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyRates {
    pub kinetic: f64,
    pub potential: f64,
    pub tension: f64,
}

impl EnergyRates {
    pub fn total(&self) -> f64 {
        self.kinetic + self.potential + self.tension
    }
}

/// `dE_k/dt = -∫z₂ u·z_α^⊥ + (τ/2)∫ u·z_α^⊥ K`, `dE_p/dt = ∫z₂ u·z_α^⊥`,
/// `dE_τ/dt = -(τ/2)∫ ∂_α(z_α/|z_α|)·u`, for plain states in any parametrization.
pub fn energy_rates(state: &SheetState, tau: f64) -> Result<EnergyRates> {
    if state.domain() != Domain::Plain {
        return Err(Error::InvalidArgument("energy rates need a plain-domain state".into()));
    }
    let curve = &state.curve;
    let flow = boundary_flow(curve, state.omega.values())?;
    let z2 = curve.z2();
    let k = curve.curvature();
    let za = curve.tangent();
    let zaa = curve.second_derivative();
    let speed = curve.speed();
    let n = curve.n();
    let un = &flow.normal_velocity;
    let grav: Vec<f64> = (0..n).map(|j| z2.values()[j] * un[j]).collect();
    let surf: Vec<f64> = (0..n).map(|j| un[j] * k[j]).collect();
    let stretch: Vec<f64> = (0..n)
        .map(|j| {
            let t = za[j] / speed[j];
            let dt = (zaa[j] - t * dot(t, zaa[j])) / speed[j];
            dot(dt, flow.velocity[j])
        })
        .collect();
    let g = spectral::integrate(&grav);
    Ok(EnergyRates {
        kinetic: -g + 0.5 * tau * spectral::integrate(&surf),
        potential: g,
        tension: -0.5 * tau * spectral::integrate(&stretch),
    })
}

fn power(q: &[f64], p: i32) -> Vec<f64> {
    q.iter().map(|v| v.powi(p)).collect()
}

fn weighted(w: &[f64], f: &[f64], g: &[f64]) -> f64 {
    let v: Vec<f64> = w.iter().zip(f).zip(g).map(|((a, b), c)| a * b * c).collect();
    spectral::integrate(&v)
}

/// Lower-order part shared by both energies: `‖z̃‖² + ‖ω̃‖² + ‖F‖²_∞ + Σ 1/m(q^l)`.
/// The `L²` norm of `z̃` is used, as written in the energy's definition.
pub fn lower_order_energy(curve: &InterfaceCurve, omega: &[f64]) -> f64 {
    let p = curve.periodic_part();
    let z1: Vec<f64> = p.iter().map(|v| v.re).collect();
    let z2: Vec<f64> = p.iter().map(|v| v.im).collect();
    let zn = spectral::sobolev_norm_slice(&z1, 0.0).powi(2) + spectral::sobolev_norm_slice(&z2, 0.0).powi(2);
    let wn = spectral::sobolev_norm_slice(omega, 0.0).powi(2);
    let f = arc_chord(curve).f_max;
    let m: f64 = q_distances(curve).iter().map(|d| 1.0 / d).sum();
    zn + wn + f * f + m
}

/// Terms of the surface-tension-weighted energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrtEnergy {
    pub lower: f64,
    pub curvature: f64,
    pub dispersive: f64,
    pub nonlinear: f64,
}

impl WrtEnergy {
    pub fn total(&self) -> f64 {
        self.lower + self.curvature + self.dispersive + self.nonlinear
    }
}

/// Energy without a sign condition on the Rayleigh-Taylor function:
/// `2A³∫Q^{2k+1}(∂^k K̃)² + τ⁻¹∫Q^{2k+2}∂^kω̃ Λ∂^kω̃ + (2Aτ²)⁻¹∫Q^{2k+3}(∂^kω̃)²ω̃²`
/// on top of the lower-order part, `A = |z̃_α|`.
pub fn sobolev_energy_wrt(curve: &InterfaceCurve, omega: &[f64], jet: &MapJet, k: u32, tau: f64) -> Result<WrtEnergy> {
    if !(tau > 0.0) {
        return Err(Error::Undefined("the surface-tension energy needs tau > 0".into()));
    }
    check(curve, omega, jet, k)?;
    let a = curve.arclength_factor();
    let ki = k as i32;
    let dk_curv = spectral::derivative(&curve.curvature(), k);
    let dk_w = spectral::derivative(omega, k);
    let lam = spectral::lambda(&dk_w);
    let w2: Vec<f64> = omega.iter().map(|w| w * w).collect();
    Ok(WrtEnergy {
        lower: lower_order_energy(curve, omega),
        curvature: 2.0 * a.powi(3) * weighted(&power(&jet.q, 2 * ki + 1), &dk_curv, &dk_curv),
        dispersive: weighted(&power(&jet.q, 2 * ki + 2), &dk_w, &lam) / tau,
        nonlinear: weighted(&power(&jet.q, 2 * ki + 3), &dk_w, &dk_w.iter().zip(&w2).map(|(d, w)| d * w).collect::<Vec<_>>())
            / (2.0 * a * tau * tau),
    })
}

/// Terms of the energy that uses the Rayleigh-Taylor sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RtEnergy {
    pub lower: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    /// `|z̃_α|² / min(Q^{2k} σ)`.
    pub stability: f64,
}

impl RtEnergy {
    pub fn total(&self) -> f64 {
        self.lower + self.a + self.b + self.c + self.d + self.e + self.stability
    }
}

/// `2 max(0, -min K̃) / ‖K̃‖_{H¹} + 1`, making `𝒞‖K̃‖_{H¹} + K̃` positive.
pub fn auto_constant(curve: &InterfaceCurve) -> f64 {
    let kc = curve.curvature();
    let norm = spectral::sobolev_norm_slice(&kc, 1.0);
    let min = kc.iter().copied().fold(f64::INFINITY, f64::min);
    if norm == 0.0 {
        return 1.0;
    }
    2.0 * (-min).max(0.0) / norm + 1.0
}

/// Energy uniform in `τ`, finite only while `Q^{2k}σ > 0`.
#[allow(clippy::too_many_arguments)]
pub fn sobolev_energy_rt(
    curve: &InterfaceCurve,
    omega: &[f64],
    phi: &[f64],
    sigma: &[f64],
    jet: &MapJet,
    k: u32,
    tau: f64,
    constant: f64,
) -> Result<RtEnergy> {
    check(curve, omega, jet, k)?;
    for len in [phi.len(), sigma.len()] {
        if len != curve.n() {
            return Err(Error::LengthMismatch { expected: curve.n(), got: len });
        }
    }
    let ki = k as i32;
    let weighted_sigma: Vec<f64> = sigma.iter().zip(power(&jet.q, 2 * ki)).map(|(s, q)| s * q).collect();
    let (min, at) = weighted_sigma
        .iter()
        .copied()
        .enumerate()
        .fold((f64::INFINITY, 0), |acc, (i, v)| if v < acc.0 { (v, i) } else { acc });
    if !(min > 0.0) {
        return Err(Error::RayleighTaylorViolated { min, alpha: curve.grid().node(at) });
    }
    let a = curve.arclength_factor();
    let kc = curve.curvature();
    let kc_norm = spectral::sobolev_norm_slice(&kc, 1.0);
    let dk_curv = spectral::derivative(&kc, k);
    let dk1_curv = spectral::derivative(&kc, k - 1);
    let lam_k1 = spectral::lambda(&dk1_curv);
    let dk_phi = spectral::derivative(phi, k);
    let lam_phi = spectral::lambda(&dk_phi);
    let cw: Vec<f64> = kc.iter().zip(power(&jet.q, 2 * ki + 1)).map(|(kv, q)| (constant * kc_norm + kv) * q).collect();
    let sq: Vec<f64> = weighted_sigma;
    Ok(RtEnergy {
        lower: lower_order_energy(curve, omega),
        a: 0.5 * tau * a * weighted(&power(&jet.q, 2 * ki + 1), &dk_curv, &dk_curv),
        b: weighted(&power(&jet.q, 2 * ki - 2), &dk_phi, &lam_phi),
        c: a * a * tau * weighted(&cw, &dk1_curv, &lam_k1),
        d: 2.0 * a * constant * kc_norm * weighted(&power(&jet.q, 2 * ki - 2), &dk_phi, &dk_phi),
        e: a * a * weighted(&sq, &dk1_curv, &dk1_curv),
        stability: a * a / min,
    })
}

fn check(curve: &InterfaceCurve, omega: &[f64], jet: &MapJet, k: u32) -> Result<()> {
    if omega.len() != curve.n() || jet.len() != curve.n() {
        return Err(Error::LengthMismatch { expected: curve.n(), got: omega.len().min(jet.len()) });
    }
    if k < 3 {
        return Err(Error::InvalidArgument(format!("Sobolev index k = {k} must be at least 3")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicField;
    use crate::C64;
    use std::f64::consts::PI;

    fn flat(n: usize) -> InterfaceCurve {
        InterfaceCurve::from_fn(Domain::Plain, n, |a| C64::new(a, 0.0)).unwrap()
    }

    #[test]
    fn rest_state_energies() {
        let n = 64;
        let state = SheetState::new(flat(n), PeriodicField::new(vec![0.0; n]).unwrap(), 0.0).unwrap();
        let e = mechanical_energy(&state, 0.3).unwrap();
        assert_eq!(e.kinetic, 0.0);
        assert!(e.potential.abs() < 1e-15);
        assert!((e.tension - 0.5 * 0.3 * 2.0 * PI).abs() < 1e-13);
    }

    #[test]
    fn kinetic_energy_of_flat_mode() {
        let n = 64;
        let c = flat(n);
        let w: Vec<f64> = c.grid().nodes().iter().map(|a| a.cos()).collect();
        let e1 = kinetic_energy(&c, &w).unwrap();
        let w2: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
        let e2 = kinetic_energy(&c, &w2).unwrap();
        assert!(e1 > 0.0);
        assert!((e2 - 4.0 * e1).abs() < 1e-13);
        // Φ_α = ω/2 so Φ = ½ sin α; normal velocity ½H(ω) = ½ sin α; E_k = ½∫¼ sin² = π/8
        assert!((e1 - PI / 8.0).abs() < 1e-12, "{e1}");
    }

    #[test]
    fn dispersive_term_single_mode() {
        let n = 64;
        let c = flat(n);
        let w: Vec<f64> = c.grid().nodes().iter().map(|a| a.cos()).collect();
        let tau = 0.7;
        let e = sobolev_energy_wrt(&c, &w, &MapJet::identity(n), 3, tau).unwrap();
        assert!((e.dispersive - PI / tau).abs() < 1e-10);
        assert!(e.curvature.abs() < 1e-20);
        assert!(e.nonlinear >= 0.0);
        assert!(matches!(sobolev_energy_wrt(&c, &w, &MapJet::identity(n), 3, 0.0), Err(Error::Undefined(_))));
    }

    #[test]
    fn auto_constant_makes_weight_positive() {
        let c = InterfaceCurve::from_fn(Domain::Tilde, 128, |a| C64::new(1.5 * a.cos(), -0.6 * a.sin() + 0.1 * (3.0 * a).sin()))
            .unwrap();
        let cst = auto_constant(&c);
        let kc = c.curvature();
        let norm = spectral::sobolev_norm_slice(&kc, 1.0);
        assert!(kc.iter().all(|v| cst * norm + v > 0.0));
    }

    #[test]
    fn rt_violation_is_reported() {
        let n = 32;
        let c = flat(n);
        let w = vec![0.0; n];
        let sigma: Vec<f64> = c.grid().nodes().iter().map(|a| a.cos()).collect();
        let r = sobolev_energy_rt(&c, &w, &w, &sigma, &MapJet::identity(n), 3, 0.1, 1.0);
        match r {
            Err(Error::RayleighTaylorViolated { min, alpha }) => {
                assert!((min + 1.0).abs() < 1e-12);
                assert!((alpha.abs() - PI).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }
}
