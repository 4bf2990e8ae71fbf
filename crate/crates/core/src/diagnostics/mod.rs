//! Scalar and field diagnostics of a sheet state.

mod energy;
mod geometry;
mod stability;

pub use energy::{
    auto_constant, energy_rates, kinetic_energy, lower_order_energy, mechanical_energy, physical_curve, sobolev_energy_rt,
    sobolev_energy_wrt, EnergyRates, MechanicalEnergy, RtEnergy, WrtEnergy, POTENTIAL_MEAN_WARNING,
};
pub use geometry::{
    arc_chord, curve_self_intersection, min_nonlocal_chord, q_distances, ArcChord, SelfContact, ARC_TOLERANCE,
    CONTACT_TOLERANCE,
};
pub use stability::{field_min, phi_tilde, rayleigh_taylor};

/// One row of tracked quantities. Fields that do not apply to a run (for
/// example the singular-point distances of a plain run) are `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub e_k: f64,
    pub e_p: f64,
    pub e_tau: f64,
    pub e_s: f64,
    pub f_max: f64,
    /// Arc-chord maximum of the physical curve; equals `f_max` in plain runs.
    pub f_max_plain: f64,
    pub m_q: [f64; 5],
    pub sigma_min: f64,
    pub z_norm_l2: f64,
    pub z_norm_high: f64,
    pub omega_norm_l2: f64,
    pub omega_norm_high: f64,
    pub e_wrt: f64,
    pub e_rt: f64,
    pub gauge_spread: f64,
    /// Empty while running; the halt reason on the final record.
    pub halt: String,
}

impl DiagnosticsRecord {
    pub fn empty(t: f64) -> Self {
        Self {
            t,
            e_k: f64::NAN,
            e_p: f64::NAN,
            e_tau: f64::NAN,
            e_s: f64::NAN,
            f_max: f64::NAN,
            f_max_plain: f64::NAN,
            m_q: [f64::NAN; 5],
            sigma_min: f64::NAN,
            z_norm_l2: f64::NAN,
            z_norm_high: f64::NAN,
            omega_norm_l2: f64::NAN,
            omega_norm_high: f64::NAN,
            e_wrt: f64::NAN,
            e_rt: f64::NAN,
            gauge_spread: f64::NAN,
            halt: String::new(),
        }
    }
}
