use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};
use crate::{CMatrix, CVector, C64};

const ANGLE_SLACK: f64 = 1e-12;

/// Half-wavelength ULA steering vector, unit norm:
/// entry m is exp(-j pi m sin(theta)) / sqrt(n).
pub fn steering_vector(n: usize, theta: f64) -> Result<CVector> {
    if n == 0 {
        return Err(IsacError::DimensionMismatch("steering vector needs n >= 1".into()));
    }
    if !(theta >= -FRAC_PI_2 - ANGLE_SLACK && theta <= FRAC_PI_2 + ANGLE_SLACK) {
        return Err(IsacError::AngleOutOfRange(theta));
    }
    Ok(steering_unchecked(n, theta))
}

pub(crate) fn steering_unchecked(n: usize, theta: f64) -> CVector {
    let scale = 1.0 / (n as f64).sqrt();
    let phase = -PI * theta.sin();
    CVector::from_fn(n, |m, _| C64::from_polar(scale, phase * m as f64))
}

/// Sampled angles, strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleGrid {
    angles_rad: Vec<f64>,
}

impl AngleGrid {
    /// Wraps an arbitrary strictly increasing set of angles in [-pi/2, pi/2].
    pub fn from_angles(angles_rad: Vec<f64>) -> Result<Self> {
        if angles_rad.is_empty() {
            return Err(IsacError::DimensionMismatch("angle grid is empty".into()));
        }
        if let Some(&bad) = angles_rad
            .iter()
            .find(|a| !(**a >= -FRAC_PI_2 - ANGLE_SLACK && **a <= FRAC_PI_2 + ANGLE_SLACK))
        {
            return Err(IsacError::AngleOutOfRange(bad));
        }
        if angles_rad.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(IsacError::DimensionMismatch("grid angles must increase strictly".into()));
        }
        Ok(AngleGrid { angles_rad })
    }

    pub fn from_degrees(degrees: &[f64]) -> Result<Self> {
        Self::from_angles(degrees.iter().map(|d| d.to_radians()).collect())
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles_rad
    }

    pub fn len(&self) -> usize {
        self.angles_rad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles_rad.is_empty()
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.angles_rad.iter().map(|a| a.to_degrees()).collect()
    }
}

/// theta_l = -pi/2 + l pi / L for l = 0..L-1.
pub fn build_grid(size: usize) -> Result<AngleGrid> {
    if size < 2 {
        return Err(IsacError::DimensionMismatch(format!("grid size {size} < 2")));
    }
    let step = PI / size as f64;
    Ok(AngleGrid { angles_rad: (0..size).map(|l| -FRAC_PI_2 + l as f64 * step).collect() })
}

/// Binary desired beampattern: one wherever a grid angle lies strictly within
/// half a beam width of some target.
pub fn desired_beampattern(grid: &AngleGrid, targets_rad: &[f64], width_rad: f64) -> Result<Vec<f64>> {
    if targets_rad.is_empty() {
        return Err(IsacError::NoTargets);
    }
    let half = 0.5 * width_rad;
    Ok(grid
        .angles()
        .iter()
        .map(|&theta| {
            let hit = targets_rad.iter().any(|&t| (theta - t).abs() < half - ANGLE_SLACK);
            if hit {
                1.0
            } else {
                0.0
            }
        })
        .collect())
}

/// Steering vectors of one array over one grid, one column per angle.
#[derive(Debug, Clone)]
pub struct ArrayManifold {
    steering: CMatrix,
}

impl ArrayManifold {
    pub fn new(n_tx: usize, grid: &AngleGrid) -> Self {
        let mut steering = CMatrix::zeros(n_tx, grid.len());
        for (l, &theta) in grid.angles().iter().enumerate() {
            steering.set_column(l, &steering_unchecked(n_tx, theta));
        }
        ArrayManifold { steering }
    }

    pub fn n_tx(&self) -> usize {
        self.steering.nrows()
    }

    pub fn len(&self) -> usize {
        self.steering.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.steering.ncols() == 0
    }

    pub fn steering(&self, l: usize) -> CVector {
        self.steering.column(l).into_owned()
    }

    /// a(theta_l)^H R a(theta_l) for every grid angle.
    pub fn gains(&self, r: &CMatrix) -> Vec<f64> {
        let ra = r * &self.steering;
        (0..self.len())
            .map(|l| self.steering.column(l).dotc(&ra.column(l)).re)
            .collect()
    }

    /// |a(theta_l)^H x|^2 for every grid angle.
    pub fn gains_of_vector(&self, x: &CVector) -> Vec<f64> {
        let proj = self.steering.ad_mul(x);
        proj.iter().map(|v| v.norm_sqr()).collect()
    }
}
