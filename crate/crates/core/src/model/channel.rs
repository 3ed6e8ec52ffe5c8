use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::array::{build_grid, desired_beampattern, steering_unchecked, AngleGrid};
use super::config::SystemConfig;
use super::psk::PskSymbolSet;
use crate::error::{IsacError, Result};
use crate::{CVector, C64};

/// One Monte-Carlo realization of the downlink.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioDraw {
    pub channels: Vec<CVector>,
    pub symbols: Vec<C64>,
    pub user_angles_rad: Vec<f64>,
    pub target_angles_rad: Vec<f64>,
    pub grid: AngleGrid,
    pub desired_gain: Vec<f64>,
}

impl ScenarioDraw {
    pub fn n_tx(&self) -> usize {
        self.channels.first().map_or(0, |h| h.len())
    }

    pub fn n_users(&self) -> usize {
        self.channels.len()
    }

    /// Symbol-rotated channels h_k s_k.
    pub fn effective_channels(&self) -> Vec<CVector> {
        self.channels.iter().zip(&self.symbols).map(|(h, s)| h * *s).collect()
    }

    /// Assembles a draw from explicit parts, checking dimensions.
    pub fn from_parts(
        channels: Vec<CVector>,
        symbols: Vec<C64>,
        target_angles_rad: Vec<f64>,
        grid: AngleGrid,
        beam_width_rad: f64,
    ) -> Result<Self> {
        if channels.is_empty() {
            return Err(IsacError::DimensionMismatch("no user channels".into()));
        }
        let n = channels[0].len();
        if n == 0 || channels.iter().any(|h| h.len() != n) {
            return Err(IsacError::DimensionMismatch("channels differ in length".into()));
        }
        if symbols.len() != channels.len() {
            return Err(IsacError::DimensionMismatch(format!(
                "{} symbols for {} users",
                symbols.len(),
                channels.len()
            )));
        }
        let desired_gain = desired_beampattern(&grid, &target_angles_rad, beam_width_rad)?;
        let k = channels.len();
        Ok(ScenarioDraw {
            channels,
            symbols,
            user_angles_rad: vec![f64::NAN; k],
            target_angles_rad,
            grid,
            desired_gain,
        })
    }

    pub fn to_snapshot(&self) -> ScenarioSnapshot {
        let pair = |c: &C64| [c.re, c.im];
        ScenarioSnapshot {
            schema_version: SNAPSHOT_SCHEMA_VERSION,
            channels: self.channels.iter().map(|h| h.iter().map(pair).collect()).collect(),
            symbols: self.symbols.iter().map(pair).collect(),
            user_angles_rad: self.user_angles_rad.clone(),
            target_angles_rad: self.target_angles_rad.clone(),
            grid_rad: self.grid.angles().to_vec(),
            desired_gain: self.desired_gain.clone(),
        }
    }

    pub fn from_snapshot(s: &ScenarioSnapshot) -> Result<Self> {
        if s.schema_version != SNAPSHOT_SCHEMA_VERSION {
            return Err(IsacError::MalformedProblem(format!(
                "snapshot schema {} (expected {SNAPSHOT_SCHEMA_VERSION})",
                s.schema_version
            )));
        }
        let cplx = |p: &[f64; 2]| C64::new(p[0], p[1]);
        let grid = AngleGrid::from_angles(s.grid_rad.clone())?;
        if s.desired_gain.len() != grid.len() {
            return Err(IsacError::DimensionMismatch("desired gain vs grid length".into()));
        }
        let channels: Vec<CVector> =
            s.channels.iter().map(|h| CVector::from_iterator(h.len(), h.iter().map(cplx))).collect();
        let n = channels.first().map_or(0, |h| h.len());
        if channels.is_empty() || channels.iter().any(|h| h.len() != n) || s.symbols.len() != channels.len()
        {
            return Err(IsacError::DimensionMismatch("snapshot channel/symbol shapes".into()));
        }
        Ok(ScenarioDraw {
            channels,
            symbols: s.symbols.iter().map(cplx).collect(),
            user_angles_rad: s.user_angles_rad.clone(),
            target_angles_rad: s.target_angles_rad.clone(),
            grid,
            desired_gain: s.desired_gain.clone(),
        })
    }
}

pub const SNAPSHOT_SCHEMA_VERSION: u32 = 1;

/// JSON form of a [`ScenarioDraw`]. Complex numbers are `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSnapshot {
    pub schema_version: u32,
    /// `channels[k][m]`: antenna m of user k.
    pub channels: Vec<Vec<[f64; 2]>>,
    pub symbols: Vec<[f64; 2]>,
    pub user_angles_rad: Vec<f64>,
    pub target_angles_rad: Vec<f64>,
    pub grid_rad: Vec<f64>,
    pub desired_gain: Vec<f64>,
}

/// LoS and NLoS amplitude weights for Rician factor `v`.
pub fn rician_weights(v: f64) -> (f64, f64) {
    if v.is_infinite() {
        (1.0, 0.0)
    } else {
        ((v / (1.0 + v)).sqrt(), (1.0 / (1.0 + v)).sqrt())
    }
}

/// Circularly-symmetric complex Gaussian with unit variance.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws user angles, Rician channels and PSK symbols for one trial.
/// The same seed always reproduces the same draw.
pub fn draw_scenario(cfg: &SystemConfig, seed: u64) -> Result<ScenarioDraw> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let psk = PskSymbolSet::new(cfg.psk_order)?;
    let (w_los, w_nlos) = rician_weights(cfg.rician_factor);
    let attenuation = 10f64.powf(-cfg.path_loss_db / 20.0);
    let half_pi = std::f64::consts::FRAC_PI_2;

    let user_angles_rad: Vec<f64> =
        (0..cfg.n_users).map(|_| rng.random_range(-half_pi..half_pi)).collect();
    let channels = user_angles_rad
        .iter()
        .map(|&theta| {
            let los = steering_unchecked(cfg.n_tx, theta);
            CVector::from_fn(cfg.n_tx, |m, _| {
                let g = complex_gaussian(&mut rng);
                (los[m] * w_los + g * w_nlos) * attenuation
            })
        })
        .collect();
    let symbols = (0..cfg.n_users).map(|_| psk.symbol(rng.random_range(0..psk.order()))).collect();

    let grid = build_grid(cfg.grid_size)?;
    let target_angles_rad = cfg.target_angles_rad();
    let desired_gain = desired_beampattern(&grid, &target_angles_rad, cfg.beam_width_rad())?;
    Ok(ScenarioDraw { channels, symbols, user_angles_rad, target_angles_rad, grid, desired_gain })
}
