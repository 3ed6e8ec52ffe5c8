//! Scenario construction: the transmit array, the angle grid and desired
//! beampattern, Rician user channels, PSK symbols and the real-valued form
//! of the received noise-free symbols.

mod array;
mod channel;
mod config;
mod psk;
mod realify;

pub use array::{build_grid, desired_beampattern, steering_vector, AngleGrid, ArrayManifold};
pub use channel::{
    complex_gaussian, draw_scenario, rician_weights, ScenarioDraw, ScenarioSnapshot,
    SNAPSHOT_SCHEMA_VERSION,
};
pub use config::{
    db_to_linear, dbm_to_mw, weight_grid, IterationLimits, SnrThresholds, SystemConfig, Tolerances,
};
pub use psk::PskSymbolSet;
pub use realify::{complexify_vector, realify, realify_vector, rotate, RealifiedUser};
