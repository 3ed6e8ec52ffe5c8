use serde::{Deserialize, Serialize};

use super::context::Context;
use crate::error::Result;
use crate::metrics::{evaluate_waveform, rank_ratio, WaveformReport};
use crate::{CMatrix, CVector, C64};

/// How the transmit vector was obtained from the convex solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Extraction {
    /// The optimization variable is the vector itself.
    Direct,
    /// Principal eigenvector of a numerically rank-one covariance.
    Eigen,
    /// Best admissible Gaussian-randomization candidate.
    Randomized,
    /// No candidate passed the filter; the principal direction is reported.
    Fallback,
}

/// A transmit vector with its relaxed covariance and evaluated metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveformDesign {
    /// Transmit vector, sqrt(mW).
    pub x: CVector,
    /// Relaxed covariance (mW), when the algorithm optimizes one.
    pub covariance: Option<CMatrix>,
    /// Metrics of `x` and its covariance x x^H.
    pub report: WaveformReport,
    /// Sum rate implied by the relaxed solution, bit/s.
    pub relaxed_sum_rate: f64,
    /// Beampattern MSE of the relaxed covariance (of x x^H if none).
    pub relaxed_mse: f64,
    /// lambda_2 / lambda_1 of the relaxed covariance (0 without one).
    pub relaxed_rank_ratio: f64,
    pub extraction: Extraction,
}

impl WaveformDesign {
    /// Builds a design from normalized quantities.
    pub(crate) fn assemble(
        ctx: &Context<'_>,
        x: &CVector,
        cov: Option<&CMatrix>,
        relaxed_sum_rate: f64,
        extraction: Extraction,
    ) -> Result<Self> {
        let x_phys = ctx.to_physical(x);
        let covariance = cov.map(|r| r * C64::new(ctx.p_mw, 0.0));
        let report = evaluate_waveform(Some(&x_phys), None, ctx.scenario, ctx.cfg)?;
        let relaxed_mse = match cov {
            Some(r) => ctx.mse_of_cov(r),
            None => report.mse,
        };
        let relaxed_rank_ratio = covariance.as_ref().map_or(0.0, rank_ratio);
        Ok(WaveformDesign { x: x_phys, covariance, report, relaxed_sum_rate, relaxed_mse, relaxed_rank_ratio, extraction })
    }

    pub fn sum_rate(&self) -> f64 {
        self.report.sum_rate_bps
    }

    pub fn mse(&self) -> f64 {
        self.report.mse
    }
}
