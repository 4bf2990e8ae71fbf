use crate::birkhoff_rott::Domain;
use crate::error::{Error, Result};
use crate::initdata::{PresetName, PresetParams};
use crate::spectral::C64;

/// How the time step is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DtPolicy {
    /// Always `dt`.
    Fixed,
    /// `dt` capped by the capillary and advective limits of [`StepLimits`],
    /// recomputed every step.
    Cfl,
}

/// How the constant in the Rayleigh-Taylor energy is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConstantPolicy {
    /// `2 max(0, -min K̃) / ‖K̃‖_{H¹} + 1` at the initial state, then frozen.
    Auto,
    Value(f64),
}

/// Smoothing and dissipation parameters of the regularized system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularization {
    pub eps: f64,
    pub delta: f64,
    pub mu: f64,
}

impl Regularization {
    pub const NONE: Regularization = Regularization { eps: 0.0, delta: 0.0, mu: 0.0 };

    pub fn is_active(&self) -> bool {
        self.eps > 0.0 || self.delta > 0.0 || self.mu > 0.0
    }
}

/// Conditions that stop a run before `t_end`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HaltThresholds {
    /// Halt when `F_max` exceeds this multiple of its initial value.
    pub arc_chord_factor: f64,
    /// Halt when the tilde curve comes this close to a singular point.
    pub min_q_distance: f64,
    /// Halt when `min σ` falls below this value, if set.
    pub min_sigma: Option<f64>,
    /// Halt when the physical curve touches itself. Tilde runs may turn this
    /// off to continue through the contact.
    pub stop_at_contact: bool,
}

impl Default for HaltThresholds {
    fn default() -> Self {
        Self { arc_chord_factor: 50.0, min_q_distance: 1e-3, min_sigma: None, stop_at_contact: true }
    }
}

/// Everything a run needs besides its initial state.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n: usize,
    pub tau: f64,
    pub dt: f64,
    pub dt_policy: DtPolicy,
    pub cfl: f64,
    pub t_end: f64,
    pub domain: Domain,
    pub regularization: Regularization,
    pub k: u32,
    pub c_policy: ConstantPolicy,
    pub halt: HaltThresholds,
    pub preset: PresetName,
    /// Preset parameters, including the velocity direction.
    pub preset_params: PresetParams,
    /// Order of the exponential Fourier filter applied to `z` and `ω` after
    /// every step; `None` leaves the state unfiltered.
    pub filter_order: Option<u32>,
    /// Steps between diagnostics records.
    pub record_every: usize,
    /// Steps between snapshot files; 0 disables snapshots.
    pub snapshot_every: usize,
    pub out_dir: String,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n: 128,
            tau: 0.0,
            dt: 1e-4,
            dt_policy: DtPolicy::Fixed,
            cfl: 0.5,
            t_end: 0.01,
            domain: Domain::Plain,
            regularization: Regularization::NONE,
            k: 3,
            c_policy: ConstantPolicy::Auto,
            halt: HaltThresholds::default(),
            preset: PresetName::Flat,
            preset_params: PresetParams::default(),
            filter_order: None,
            record_every: 1,
            snapshot_every: 0,
            out_dir: "out".into(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(msg));
        if self.n < 16 || self.n % 2 != 0 {
            return bad(format!("n = {} must be even and at least 16", self.n));
        }
        for (name, v) in [
            ("tau", self.tau),
            ("eps", self.regularization.eps),
            ("delta", self.regularization.delta),
            ("mu", self.regularization.mu),
            ("t_end", self.t_end),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} = {v} must be finite and non-negative"));
            }
        }
        if !(self.dt > 0.0) || !self.dt.is_finite() {
            return bad(format!("dt = {} must be positive", self.dt));
        }
        if !(self.cfl > 0.0) {
            return bad(format!("cfl = {} must be positive", self.cfl));
        }
        if self.k < 3 {
            return bad(format!("k = {} must be at least 3", self.k));
        }
        if let ConstantPolicy::Value(c) = self.c_policy {
            if !c.is_finite() {
                return bad("C_policy value must be finite".into());
            }
        }
        if let Some(o) = self.filter_order {
            if o < 2 {
                return bad(format!("filter order {o} must be at least 2"));
            }
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1".into());
        }
        if !(self.halt.arc_chord_factor > 1.0) {
            return bad("halt_arc_chord_factor must exceed 1".into());
        }
        if !(self.halt.min_q_distance >= 0.0) {
            return bad("halt_min_q must be non-negative".into());
        }
        Ok(())
    }

    /// Step size for the given limits; `dt` caps the adaptive policy.
    pub fn step_size(&self, limits: &StepLimits) -> f64 {
        match self.dt_policy {
            DtPolicy::Fixed => self.dt,
            DtPolicy::Cfl => self.dt.min(limits.step(self.cfl, self.tau)),
        }
    }
}

/// Local resolution of a state: the smallest physical node spacing and the
/// fastest node motion measured in node spacings per unit time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLimits {
    pub min_spacing: f64,
    pub max_rate: f64,
}

impl StepLimits {
    /// `q` is `|P'|` at the nodes (ones for a plain state); physical spacing is
    /// `h|z_α|/q`. Node motion includes the fluid's slip along the sheet,
    /// `q²|ω|/(2|z_α|)`, which sets the transport speed of `ω`.
    pub fn measure(tangent: &[C64], z_t: &[C64], omega: &[f64], q: &[f64]) -> Self {
        let h = 2.0 * std::f64::consts::PI / tangent.len() as f64;
        let mut min_spacing = f64::INFINITY;
        let mut max_rate: f64 = 0.0;
        for (((t, v), w), q) in tangent.iter().zip(z_t).zip(omega).zip(q) {
            let s = t.norm();
            let ds = h * s;
            min_spacing = min_spacing.min(ds / q);
            max_rate = max_rate.max((v.norm() + q * q * w.abs() / (2.0 * s)) / ds);
        }
        Self { min_spacing, max_rate }
    }

    /// Minimum of the capillary and advective limits.
    pub fn step(&self, cfl: f64, tau: f64) -> f64 {
        let advective = if self.max_rate > 0.0 { cfl / self.max_rate } else { f64::INFINITY };
        cfl_step(cfl, tau, self.min_spacing).min(advective)
    }
}

/// Capillary step limit `C ds^{3/2} / sqrt(τπ)` for node spacing `ds`;
/// infinite for `τ = 0`.
pub fn cfl_step(cfl: f64, tau: f64, ds: f64) -> f64 {
    if tau <= 0.0 {
        return f64::INFINITY;
    }
    cfl * ds.powf(1.5) / (tau * std::f64::consts::PI).sqrt()
}
