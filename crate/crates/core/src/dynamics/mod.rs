//! Right-hand sides of the sheet equations, the uniform-arclength gauge, and
//! time integration with halting conditions.

mod config;
mod gauge;
mod integrate;
mod rhs;

pub use config::{cfl_step, ConstantPolicy, DtPolicy, HaltThresholds, Regularization, SimConfig, StepLimits};
pub use gauge::{enforce_uniform_parametrization, UNIFORM_TOLERANCE};
pub use integrate::{
    build_record, config_rhs, filter_state, record_at, run, run_observed, state_jet, step_rk4, HaltReason, RunOutcome,
    GAUGE_GIVE_UP, GAUGE_REENFORCE_THRESHOLD,
};
pub use rhs::{gauge_from_stretching, rhs_plain, rhs_regularized, rhs_tilde, tangential_velocity_tilde, RhsBundle};
