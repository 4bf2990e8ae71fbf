use crate::birkhoff_rott::{Domain, InterfaceCurve, SheetState};
use crate::conformal::{map_jet, MapJet};
use crate::diagnostics::{
    self, arc_chord, auto_constant, curve_self_intersection, mechanical_energy, min_nonlocal_chord, q_distances,
    sobolev_energy_rt, sobolev_energy_wrt, DiagnosticsRecord, SelfContact,
};
use crate::error::{Error, Result};
use crate::spectral::{self, PeriodicField, C64};

use super::config::{ConstantPolicy, SimConfig, StepLimits};
use super::gauge::enforce_uniform_parametrization;
use super::rhs::{rhs_regularized, rhs_tilde, RhsBundle};

/// Spread of `|z_α|` that triggers a reparametrization during a run.
pub const GAUGE_REENFORCE_THRESHOLD: f64 = 1e-6;

/// Spread at which a failed re-enforcement ends the run.
pub const GAUGE_GIVE_UP: f64 = 0.1;

fn advance(state: &SheetState, dt: f64, k: &RhsBundle) -> Result<SheetState> {
    let periodic: Vec<C64> = state.curve.periodic_part().iter().zip(&k.z_t).map(|(p, v)| p + v * dt).collect();
    let omega: Vec<f64> = state.omega.values().iter().zip(&k.omega_t).map(|(w, v)| w + v * dt).collect();
    let curve = InterfaceCurve::from_periodic(state.domain(), periodic)?;
    SheetState::new(curve, PeriodicField::from_raw(state.curve.grid(), omega), state.t + dt)
}

fn blow_up(t: f64, err: Error) -> Error {
    match err {
        Error::NonFinite { index } => Error::BlowUp { t, reason: format!("non-finite value at node {index}") },
        Error::DegenerateTangent { index, value } => {
            Error::BlowUp { t, reason: format!("degenerate tangent |z_α| = {value:e} at node {index}") }
        }
        other => other,
    }
}

fn step_from(
    state: &SheetState,
    dt: f64,
    k1: &RhsBundle,
    rhs: &mut dyn FnMut(&SheetState) -> Result<RhsBundle>,
) -> Result<SheetState> {
    let t = state.t;
    let s2 = advance(state, 0.5 * dt, k1).map_err(|e| blow_up(t, e))?;
    let k2 = rhs(&s2)?;
    let s3 = advance(state, 0.5 * dt, &k2).map_err(|e| blow_up(t, e))?;
    let k3 = rhs(&s3)?;
    let s4 = advance(state, dt, &k3).map_err(|e| blow_up(t, e))?;
    let k4 = rhs(&s4)?;
    let n = state.n();
    let z_t: Vec<C64> = (0..n).map(|j| (k1.z_t[j] + 2.0 * k2.z_t[j] + 2.0 * k3.z_t[j] + k4.z_t[j]) / 6.0).collect();
    let w_t: Vec<f64> =
        (0..n).map(|j| (k1.omega_t[j] + 2.0 * k2.omega_t[j] + 2.0 * k3.omega_t[j] + k4.omega_t[j]) / 6.0).collect();
    let periodic: Vec<C64> = state.curve.periodic_part().iter().zip(&z_t).map(|(p, v)| p + v * dt).collect();
    let mut omega: Vec<f64> = state.omega.values().iter().zip(&w_t).map(|(w, v)| w + v * dt).collect();
    if let Some(index) = omega.iter().position(|v| !v.is_finite()) {
        return Err(Error::BlowUp { t: t + dt, reason: format!("non-finite ω at node {index}") });
    }
    let m = spectral::mean(&omega);
    omega.iter_mut().for_each(|v| *v -= m);
    let curve = InterfaceCurve::from_periodic(state.domain(), periodic).map_err(|e| blow_up(t + dt, e))?;
    SheetState::new(curve, PeriodicField::from_raw(state.curve.grid(), omega), t + dt)
}

/// One classical RK4 step of `(z, ω)`, with `mean(ω)` reset to zero. The
/// input state is untouched, so on a blow-up error it is the last good state.
pub fn step_rk4(
    state: &SheetState,
    dt: f64,
    rhs: &mut dyn FnMut(&SheetState) -> Result<RhsBundle>,
) -> Result<SheetState> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    let k1 = rhs(state)?;
    step_from(state, dt, &k1, rhs)
}

/// Jet of the map along the state's curve; the identity in the plain domain.
pub fn state_jet(state: &SheetState) -> Result<MapJet> {
    match state.domain() {
        Domain::Plain => Ok(MapJet::identity(state.n())),
        Domain::Tilde => map_jet(&state.curve),
    }
}

/// Applies the exponential filter of the given order to `z` and `ω`.
pub fn filter_state(state: &SheetState, order: u32) -> Result<SheetState> {
    let periodic = spectral::fourier_filter_c(&state.curve.periodic_part(), order);
    let curve = InterfaceCurve::from_periodic(state.domain(), periodic)?;
    let omega = spectral::fourier_filter(state.omega.values(), order);
    SheetState::new(curve, PeriodicField::from_raw(state.curve.grid(), omega), state.t)
}

/// Right-hand side selected by a configuration.
pub fn config_rhs(config: &SimConfig, state: &SheetState) -> Result<RhsBundle> {
    let jet = state_jet(state)?;
    if config.regularization.is_active() {
        rhs_regularized(state, config.tau, config.regularization, config.k, &jet)
    } else {
        rhs_tilde(state, config.tau, &jet)
    }
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum HaltReason {
    TEnd,
    SelfIntersection,
    ArcChord,
    SingularPoint,
    RayleighTaylor,
    BlowUp(String),
}

impl HaltReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            HaltReason::TEnd => "t_end",
            HaltReason::SelfIntersection => "self-intersection",
            HaltReason::ArcChord => "arc-chord",
            HaltReason::SingularPoint => "q-proximity",
            HaltReason::RayleighTaylor => "rayleigh-taylor",
            HaltReason::BlowUp(_) => "blow-up",
        }
    }
}

impl std::fmt::Display for HaltReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HaltReason::BlowUp(why) => write!(f, "blow-up ({why})"),
            other => f.write_str(other.as_str()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SheetState,
    pub halt: HaltReason,
    pub steps: usize,
    pub reenforcements: usize,
    pub contact: Option<SelfContact>,
}

/// Diagnostics at a state whose right-hand side is `bundle`.
pub fn build_record(state: &SheetState, bundle: &RhsBundle, config: &SimConfig, constant: f64) -> DiagnosticsRecord {
    let mut r = DiagnosticsRecord::empty(state.t);
    let omega = state.omega.values();
    if let Ok(e) = mechanical_energy(state, config.tau) {
        r.e_k = e.kinetic;
        r.e_p = e.potential;
        r.e_tau = e.tension;
        r.e_s = e.total();
    }
    r.f_max = arc_chord(&state.curve).f_max;
    r.f_max_plain = match state.domain() {
        Domain::Plain => r.f_max,
        Domain::Tilde => diagnostics::physical_curve(state).ok().map(|c| arc_chord(&c).f_max).unwrap_or(f64::INFINITY),
    };
    r.sigma_min = diagnostics::field_min(&state.curve, &bundle.sigma).0;
    let k = config.k as f64;
    let p = state.curve.periodic_part();
    let (z1, z2): (Vec<f64>, Vec<f64>) = p.iter().map(|v| (v.re, v.im)).unzip();
    let norm = |s: f64| (spectral::sobolev_norm_slice(&z1, s).powi(2) + spectral::sobolev_norm_slice(&z2, s).powi(2)).sqrt();
    r.z_norm_l2 = norm(0.0);
    r.z_norm_high = norm(k + 2.0);
    r.omega_norm_l2 = spectral::sobolev_norm_slice(omega, 0.0);
    r.omega_norm_high = spectral::sobolev_norm_slice(omega, k + 0.5);
    r.gauge_spread = state.curve.gauge_spread();
    if state.domain() == Domain::Tilde {
        r.m_q = q_distances(&state.curve);
        if let Ok(jet) = map_jet(&state.curve) {
            if let Ok(e) = sobolev_energy_wrt(&state.curve, omega, &jet, config.k, config.tau) {
                r.e_wrt = e.total();
            }
            if let Ok(e) =
                sobolev_energy_rt(&state.curve, omega, &bundle.phi, &bundle.sigma, &jet, config.k, config.tau, constant)
            {
                r.e_rt = e.total();
            }
        }
    }
    r
}

/// Integrates from `initial` until `t_end` or a halting condition. Errors
/// during the run become halt reasons; `observer` sees every accepted state.
pub fn run_observed(
    config: &SimConfig,
    initial: SheetState,
    observer: &mut dyn FnMut(usize, &SheetState),
) -> RunOutcome {
    let constant = match config.c_policy {
        ConstantPolicy::Value(c) => c,
        ConstantPolicy::Auto => auto_constant(&initial.curve),
    };
    let mut rhs = |s: &SheetState| config_rhs(config, s);
    let mut state = initial;
    let mut records = Vec::new();
    let mut steps = 0usize;
    let mut reenforcements = 0usize;
    let mut contact = None;
    let f0 = arc_chord(&state.curve).f_max;
    let h = state.curve.grid().spacing();
    // data that is under-resolved in the uniform gauge starts with a nonzero
    // spectral spread; re-enforce only when it grows well past that level
    let mut gauge_threshold = GAUGE_REENFORCE_THRESHOLD.max(10.0 * state.curve.gauge_spread());
    observer(0, &state);

    let halt = loop {
        let bundle = match rhs(&state) {
            Ok(b) => b,
            Err(e) => break HaltReason::BlowUp(e.to_string()),
        };
        let record_now = steps % config.record_every == 0;
        if record_now {
            records.push(build_record(&state, &bundle, config, constant));
        }

        let f = records.last().filter(|_| record_now).map(|r| r.f_max).unwrap_or_else(|| arc_chord(&state.curve).f_max);
        if f > config.halt.arc_chord_factor * f0 {
            break if f.is_infinite() { HaltReason::SelfIntersection } else { HaltReason::ArcChord };
        }
        if state.domain() == Domain::Tilde {
            let m = q_distances(&state.curve).into_iter().fold(f64::INFINITY, f64::min);
            if m < config.halt.min_q_distance {
                break HaltReason::SingularPoint;
            }
        }
        if let Some(threshold) = config.halt.min_sigma {
            if bundle.sigma.iter().any(|s| *s < threshold) {
                break HaltReason::RayleighTaylor;
            }
        }
        // splash and splat are contacts of the physical curve; a tilde curve
        // stays simple through them
        if config.halt.stop_at_contact {
            let Some(physical) = diagnostics::physical_curve(&state).ok() else {
                break HaltReason::SingularPoint;
            };
            let near = min_nonlocal_chord(&physical, 10) < 5.0 * h * physical.arclength_factor();
            if near || steps % 10 == 0 {
                if let Some(c) = curve_self_intersection(&physical) {
                    contact = Some(c);
                    break HaltReason::SelfIntersection;
                }
            }
        }
        let remaining = config.t_end - state.t;
        if remaining <= 1e-12 * config.t_end.max(1.0) {
            break HaltReason::TEnd;
        }

        let q = state_jet(&state).map(|j| j.q).unwrap_or_else(|_| vec![1.0; state.n()]);
        let limits = StepLimits::measure(state.curve.tangent(), &bundle.z_t, state.omega.values(), &q);
        let dt = config.step_size(&limits).min(remaining);
        let next = match step_from(&state, dt, &bundle, &mut rhs) {
            Ok(s) => s,
            Err(e) => break HaltReason::BlowUp(e.to_string()),
        };
        let next = match config.filter_order {
            Some(order) => match filter_state(&next, order) {
                Ok(s) => s,
                Err(e) => break HaltReason::BlowUp(e.to_string()),
            },
            None => next,
        };
        state = next;
        steps += 1;
        let spread = state.curve.gauge_spread();
        if spread > gauge_threshold {
            match enforce_uniform_parametrization(&state.curve, &state.omega) {
                Ok((c, w)) => {
                    state = SheetState { curve: c, omega: w, t: state.t };
                    reenforcements += 1;
                }
                Err(e) if spread < GAUGE_GIVE_UP => {
                    log::warn!("gauge re-enforcement failed at t = {}: {e}", state.t);
                    gauge_threshold = 10.0 * spread;
                }
                Err(e) => break HaltReason::BlowUp(e.to_string()),
            }
        }
        observer(steps, &state);
    };

    // final record carries the halt reason
    let needs_final = records.last().map(|r| r.t != state.t).unwrap_or(true);
    if needs_final {
        let rec = match rhs(&state) {
            Ok(b) => build_record(&state, &b, config, constant),
            Err(_) => {
                let mut r = DiagnosticsRecord::empty(state.t);
                r.f_max = arc_chord(&state.curve).f_max;
                r.f_max_plain = diagnostics::physical_curve(&state).ok().map(|c| arc_chord(&c).f_max).unwrap_or(f64::INFINITY);
                r.gauge_spread = state.curve.gauge_spread();
                r
            }
        };
        records.push(rec);
    }
    if let Some(last) = records.last_mut() {
        last.halt = halt.as_str().to_string();
    }
    log::info!("run halted: {halt} after {steps} steps at t = {}", state.t);
    RunOutcome { records, final_state: state, halt, steps, reenforcements, contact }
}

pub fn run(config: &SimConfig, initial: SheetState) -> RunOutcome {
    run_observed(config, initial, &mut |_, _| {})
}

/// Kept for callers that only need the diagnostics module's view of a state.
pub fn record_at(state: &SheetState, config: &SimConfig) -> Result<DiagnosticsRecord> {
    let bundle = config_rhs(config, state)?;
    let constant = match config.c_policy {
        ConstantPolicy::Value(c) => c,
        ConstantPolicy::Auto => diagnostics::auto_constant(&state.curve),
    };
    Ok(build_record(state, &bundle, config, constant))
}
