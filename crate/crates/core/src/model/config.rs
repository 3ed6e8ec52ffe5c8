use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};

/// SNR thresholds for the constructive-interference constraints, in dB.
///
/// A single number is shared by every user; a list gives one value per user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SnrThresholds {
    Shared(f64),
    PerUser(Vec<f64>),
}

impl SnrThresholds {
    pub fn for_user(&self, k: usize) -> f64 {
        match self {
            SnrThresholds::Shared(v) => *v,
            SnrThresholds::PerUser(v) => v[k],
        }
    }
}

/// Stopping tolerances of the three iterative algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Change of the summed rate auxiliaries between sum-rate SCA iterations.
    pub sum_rate: f64,
    /// Change of the beampattern MSE between QSDP iterations (relative).
    pub beampattern: f64,
    /// Largest change of a received noise-free symbol between
    /// multi-objective SCA iterations, in units of sqrt(P_max).
    pub multi_objective: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { sum_rate: 1e-4, beampattern: 1e-4, multi_objective: 1e-4 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IterationLimits {
    pub sum_rate: usize,
    pub beampattern: usize,
    pub multi_objective: usize,
    /// Outer barrier iterations of each convex solve.
    pub solver: usize,
}

impl Default for IterationLimits {
    fn default() -> Self {
        IterationLimits { sum_rate: 100, beampattern: 50, multi_objective: 100, solver: 500 }
    }
}

/// Every scenario and algorithm parameter. Defaults follow the reference
/// simulation table (8 antennas, 25 dBm, -60 dBm noise, 3 users, 3 targets).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub n_tx: usize,
    /// Receive antennas. Carried for completeness; no receive processing.
    pub n_rx: usize,
    pub n_users: usize,
    pub n_targets: usize,
    pub p_max_dbm: f64,
    pub noise_dbm: f64,
    pub psk_order: usize,
    pub gamma_db: SnrThresholds,
    pub rician_factor: f64,
    pub bandwidth_hz: f64,
    /// Large-scale attenuation applied to every user channel.
    pub path_loss_db: f64,
    pub grid_size: usize,
    pub beam_width_deg: f64,
    /// Target directions relative to broadside, degrees.
    pub target_angles_deg: Vec<f64>,
    pub xi: f64,
    pub delta_omega: f64,
    pub tolerances: Tolerances,
    pub max_iters: IterationLimits,
    pub randomization_draws: usize,
    pub rng_seed: u64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            n_tx: 8,
            n_rx: 8,
            n_users: 3,
            n_targets: 3,
            p_max_dbm: 25.0,
            noise_dbm: -60.0,
            psk_order: 4,
            gamma_db: SnrThresholds::Shared(10.0),
            rician_factor: 1.0,
            bandwidth_hz: 1.0,
            path_loss_db: 0.0,
            grid_size: 180,
            beam_width_deg: 3.0,
            target_angles_deg: vec![-60.0, 0.0, 60.0],
            xi: 1e-3,
            delta_omega: 0.01,
            tolerances: Tolerances::default(),
            max_iters: IterationLimits::default(),
            randomization_draws: 100,
            rng_seed: 0x15AC_2024,
        }
    }
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

impl SystemConfig {
    pub fn p_max_mw(&self) -> f64 {
        dbm_to_mw(self.p_max_dbm)
    }

    pub fn noise_mw(&self) -> f64 {
        dbm_to_mw(self.noise_dbm)
    }

    /// Linear SNR threshold of user `k`.
    pub fn gamma_linear(&self, k: usize) -> f64 {
        db_to_linear(self.gamma_db.for_user(k))
    }

    /// Half-width of the constructive-interference sector, pi/M.
    pub fn ci_half_angle(&self) -> f64 {
        std::f64::consts::PI / self.psk_order as f64
    }

    pub fn beam_width_rad(&self) -> f64 {
        self.beam_width_deg.to_radians()
    }

    pub fn target_angles_rad(&self) -> Vec<f64> {
        self.target_angles_deg.iter().map(|d| d.to_radians()).collect()
    }

    /// Interior weights Δω, 2Δω, …, 1-Δω.
    pub fn weight_grid(&self) -> Vec<f64> {
        weight_grid(self.delta_omega)
    }

    /// Checks every invariant and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut issues = Vec::new();
        let mut positive = |name: &str, v: usize| {
            if v == 0 {
                issues.push(format!("{name}: must be at least 1"));
            }
        };
        positive("n_tx", self.n_tx);
        positive("n_rx", self.n_rx);
        positive("n_users", self.n_users);
        positive("n_targets", self.n_targets);
        if self.grid_size < 2 {
            issues.push("grid_size: must be at least 2".into());
        }
        if !self.p_max_dbm.is_finite() {
            issues.push("p_max_dbm: must be finite".into());
        }
        if !self.noise_dbm.is_finite() {
            issues.push("noise_dbm: must be finite".into());
        }
        if self.psk_order < 2 || !self.psk_order.is_power_of_two() {
            issues.push(format!("psk_order: {} is not a power of two >= 2", self.psk_order));
        }
        match &self.gamma_db {
            SnrThresholds::Shared(v) if !v.is_finite() => {
                issues.push("gamma_db: must be finite".into())
            }
            SnrThresholds::PerUser(v) => {
                if v.len() != self.n_users {
                    issues.push(format!(
                        "gamma_db: {} thresholds given for {} users",
                        v.len(),
                        self.n_users
                    ));
                }
                if v.iter().any(|g| !g.is_finite()) {
                    issues.push("gamma_db: thresholds must be finite".into());
                }
            }
            _ => {}
        }
        if !(self.rician_factor >= 0.0) {
            issues.push("rician_factor: must be >= 0".into());
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            issues.push("bandwidth_hz: must be positive".into());
        }
        if !self.path_loss_db.is_finite() {
            issues.push("path_loss_db: must be finite".into());
        }
        if !(self.beam_width_deg >= 0.0) {
            issues.push("beam_width_deg: must be >= 0".into());
        }
        if self.target_angles_deg.len() != self.n_targets {
            issues.push(format!(
                "target_angles_deg: {} angles given for n_targets = {}",
                self.target_angles_deg.len(),
                self.n_targets
            ));
        }
        if self.target_angles_deg.iter().any(|a| !(-90.0..=90.0).contains(a)) {
            issues.push("target_angles_deg: angles must lie in [-90, 90]".into());
        }
        if !(self.xi >= 0.0) {
            issues.push("xi: must be >= 0".into());
        } else if !(1e-3..=1e-2).contains(&self.xi) {
            log::warn!("xi = {} lies outside the recommended range [0.001, 0.01]", self.xi);
        }
        if !(self.delta_omega > 0.0 && self.delta_omega <= 0.5) {
            issues.push("delta_omega: must satisfy 0 < delta_omega <= 0.5".into());
        }
        for (name, v) in [
            ("tolerances.sum_rate", self.tolerances.sum_rate),
            ("tolerances.beampattern", self.tolerances.beampattern),
            ("tolerances.multi_objective", self.tolerances.multi_objective),
        ] {
            if !(v > 0.0) {
                issues.push(format!("{name}: must be positive"));
            }
        }
        for (name, v) in [
            ("max_iters.sum_rate", self.max_iters.sum_rate),
            ("max_iters.beampattern", self.max_iters.beampattern),
            ("max_iters.multi_objective", self.max_iters.multi_objective),
            ("max_iters.solver", self.max_iters.solver),
        ] {
            if v == 0 {
                issues.push(format!("{name}: must be at least 1"));
            }
        }
        if self.randomization_draws == 0 {
            issues.push("randomization_draws: must be at least 1".into());
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(IsacError::InvalidConfig(issues))
        }
    }
}

/// Interior preference weights for step `delta`: delta, 2 delta, …, 1 - delta.
pub fn weight_grid(delta: f64) -> Vec<f64> {
    let steps = (1.0 / delta).round() as usize;
    // Rounded so that grid values print as short decimals.
    (1..steps).map(|i| (i as f64 * delta * 1e12).round() / 1e12).collect()
}
