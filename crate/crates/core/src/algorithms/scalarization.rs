use serde::{Deserialize, Serialize};

use crate::error::{IsacError, Result};

/// Preference weights (omega1 for communication, omega2 = 1 - omega1 for
/// sensing) and the augmentation coefficient xi.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarizationWeights {
    pub omega1: f64,
    pub omega2: f64,
    pub xi: f64,
}

impl ScalarizationWeights {
    pub fn new(omega1: f64, xi: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&omega1) {
            return Err(IsacError::InvalidWeights(format!("omega1 = {omega1} is outside [0, 1]")));
        }
        if !(0.0..=0.01).contains(&xi) {
            return Err(IsacError::InvalidWeights(format!("xi = {xi} is outside [0, 0.01]")));
        }
        Ok(ScalarizationWeights { omega1, omega2: 1.0 - omega1, xi })
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.omega1, self.omega2]
    }
}

/// Single-objective optima: f1* = -(max sum rate) and f2* = min MSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Utopia {
    pub f1_star: f64,
    pub f2_star: f64,
}

impl Utopia {
    pub fn new(f1_star: f64, f2_star: f64) -> Result<Self> {
        if !(f1_star < 0.0 && f1_star.is_finite()) {
            return Err(IsacError::InvalidUtopia { name: "f1_star", value: f1_star });
        }
        if !(f2_star > 0.0 && f2_star.is_finite()) {
            return Err(IsacError::InvalidUtopia { name: "f2_star", value: f2_star });
        }
        Ok(Utopia { f1_star, f2_star })
    }

    /// Relative degradations (f_i - f_i*) / |f_i*|.
    pub fn degradations(&self, f1: f64, f2: f64) -> [f64; 2] {
        [(f1 - self.f1_star) / self.f1_star.abs(), (f2 - self.f2_star) / self.f2_star]
    }
}

/// How degradations are normalized by the utopia values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Normalization {
    /// Divide by |f_i*|: both terms measure loss relative to the optimum.
    #[default]
    Magnitude,
    /// Divide by f_i* as written; with f1* < 0 the rate term changes sign.
    Signed,
}

/// Reformulated objectives f1', f2' and their maximum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scalarized {
    pub f1: f64,
    pub f2: f64,
    pub alpha: f64,
}

/// Augmented weighted Tchebycheff scalarization with |f_i*| normalization.
pub fn scalarize_tchebycheff(f1: f64, f2: f64, utopia: &Utopia, weights: &ScalarizationWeights) -> Scalarized {
    scalarize_tchebycheff_with(f1, f2, utopia, weights, Normalization::Magnitude)
}

pub fn scalarize_tchebycheff_with(
    f1: f64,
    f2: f64,
    utopia: &Utopia,
    weights: &ScalarizationWeights,
    norm: Normalization,
) -> Scalarized {
    let r = match norm {
        Normalization::Magnitude => utopia.degradations(f1, f2),
        Normalization::Signed => [(f1 - utopia.f1_star) / utopia.f1_star, (f2 - utopia.f2_star) / utopia.f2_star],
    };
    let aug = weights.xi * (r[0] + r[1]);
    let a = weights.omega1 * (r[0] + aug);
    let b = weights.omega2 * (r[1] + aug);
    Scalarized { f1: a, f2: b, alpha: a.max(b) }
}

/// Normalized weighted sum omega1 f1/|f1*| + omega2 f2/f2*.
pub fn weighted_sum_value(f1: f64, f2: f64, utopia: &Utopia, weights: &ScalarizationWeights) -> f64 {
    weights.omega1 * f1 / utopia.f1_star.abs() + weights.omega2 * f2 / utopia.f2_star
}

/// Gap between the relative communication and sensing degradations.
pub fn fairness_gap(f1: f64, f2: f64, utopia: &Utopia) -> f64 {
    let r = utopia.degradations(f1, f2);
    (r[0] - r[1]).abs()
}
